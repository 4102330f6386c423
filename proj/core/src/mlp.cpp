#include "amgan/mlp.hpp"

#include <cmath>
#include <string>

#include "amgan/error.hpp"

namespace amgan {

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ShapeError("network needs an input and an output size");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw ShapeError("layer sizes must be positive");
    LayerShape s{sizes_[l], sizes_[l + 1], offset, offset + sizes_[l] * sizes_[l + 1]};
    offset = s.bias_offset + s.outputs;
    layers_.push_back(s);
  }
  params_.assign(offset, 0.0);
}

void Mlp::initialize(RandomStream& rng) {
  for (const LayerShape& s : layers_) {
    const double bound =
        std::sqrt(6.0 / ((1.0 + kLeakySlope * kLeakySlope) * static_cast<double>(s.inputs)));
    for (std::size_t i = 0; i < s.inputs * s.outputs; ++i) {
      params_[s.weight_offset + i] = (2.0 * rng.uniform() - 1.0) * bound;
    }
    for (std::size_t o = 0; o < s.outputs; ++o) params_[s.bias_offset + o] = 0.0;
  }
}

Matrix Mlp::forward(const Matrix& input, MlpCache* cache) const {
  if (input.cols != input_size()) {
    throw ShapeError("network expects " + std::to_string(input_size()) + " inputs, got " +
                     std::to_string(input.cols));
  }
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerShape& s = layers_[l];
    const double* w = params_.data() + s.weight_offset;
    const double* b = params_.data() + s.bias_offset;
    Matrix z(x.rows, s.outputs);
    for (std::size_t r = 0; r < x.rows; ++r) {
      double* zr = z.data.data() + r * s.outputs;
      for (std::size_t o = 0; o < s.outputs; ++o) zr[o] = b[o];
      const double* xr = x.data.data() + r * s.inputs;
      for (std::size_t i = 0; i < s.inputs; ++i) {
        const double xi = xr[i];
        const double* wi = w + i * s.outputs;
        for (std::size_t o = 0; o < s.outputs; ++o) zr[o] += xi * wi[o];
      }
    }
    const bool hidden = l + 1 < layers_.size();
    Matrix a = z;
    if (hidden) {
      for (double& v : a.data) v = v > 0.0 ? v : kLeakySlope * v;
    }
    if (cache != nullptr) {
      cache->inputs.push_back(std::move(x));
      cache->pre.push_back(std::move(z));
    }
    x = std::move(a);
  }
  return x;
}

MlpGradients Mlp::backward(const MlpCache& cache, const Matrix& output_grad,
                           bool want_param_grads) const {
  if (cache.inputs.size() != layers_.size()) throw ShapeError("cache does not match network");
  const std::size_t batch = cache.inputs.front().rows;
  if (output_grad.rows != batch || output_grad.cols != output_size()) {
    throw ShapeError("output gradient shape does not match the cached forward pass");
  }
  MlpGradients out;
  if (want_param_grads) out.params.assign(params_.size(), 0.0);

  Matrix delta = output_grad;  // d loss / d activation of the current layer
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerShape& s = layers_[l];
    if (l + 1 < layers_.size()) {
      const Matrix& z = cache.pre[l];
      for (std::size_t i = 0; i < delta.data.size(); ++i) {
        if (!(z.data[i] > 0.0)) delta.data[i] *= kLeakySlope;
      }
    }
    const Matrix& x = cache.inputs[l];
    const double* w = params_.data() + s.weight_offset;
    if (want_param_grads) {
      double* gw = out.params.data() + s.weight_offset;
      double* gb = out.params.data() + s.bias_offset;
      for (std::size_t r = 0; r < batch; ++r) {
        const double* dr = delta.data.data() + r * s.outputs;
        const double* xr = x.data.data() + r * s.inputs;
        for (std::size_t o = 0; o < s.outputs; ++o) gb[o] += dr[o];
        for (std::size_t i = 0; i < s.inputs; ++i) {
          const double xi = xr[i];
          double* gwi = gw + i * s.outputs;
          for (std::size_t o = 0; o < s.outputs; ++o) gwi[o] += xi * dr[o];
        }
      }
    }
    Matrix prev(batch, s.inputs);
    for (std::size_t r = 0; r < batch; ++r) {
      const double* dr = delta.data.data() + r * s.outputs;
      double* pr = prev.data.data() + r * s.inputs;
      for (std::size_t i = 0; i < s.inputs; ++i) {
        const double* wi = w + i * s.outputs;
        double acc = 0.0;
        for (std::size_t o = 0; o < s.outputs; ++o) acc += wi[o] * dr[o];
        pr[i] = acc;
      }
    }
    delta = std::move(prev);
  }
  out.input = std::move(delta);
  return out;
}

void Mlp::sgd_step(std::span<const double> grads, double learning_rate) {
  if (grads.size() != params_.size()) throw ShapeError("gradient size does not match parameters");
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= learning_rate * grads[i];
}

bool Mlp::all_finite() const noexcept {
  for (double p : params_) {
    if (!std::isfinite(p)) return false;
  }
  return true;
}

}  // namespace amgan
