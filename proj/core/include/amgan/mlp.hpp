#pragma once

// Fully connected network with leaky-rectifier hidden layers (slope 0.2) and
// a linear output layer, plus its exact reverse pass.

#include <cstddef>
#include <span>
#include <vector>

#include "amgan/rng.hpp"

namespace amgan {

inline constexpr double kLeakySlope = 0.2;

// Dense row-major matrix; one sample per row.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

// Weights of one layer are stored input-major: w[i * outputs + o].
struct LayerShape {
  std::size_t inputs;
  std::size_t outputs;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

struct MlpCache {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
};

struct MlpGradients {
  std::vector<double> params;  // same layout as Mlp::parameters(); empty if not requested
  Matrix input;                // d loss / d input
};

class Mlp {
 public:
  // sizes = {inputs, hidden..., outputs}; at least two entries, all positive.
  // Parameters start at zero. Throws ShapeError.
  explicit Mlp(std::vector<std::size_t> sizes);

  // Leaky-ReLU He-uniform weights, zero biases.
  void initialize(RandomStream& rng);

  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t output_size() const noexcept { return sizes_.back(); }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  const std::vector<LayerShape>& layers() const noexcept { return layers_; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  // Throws ShapeError when input.cols != input_size(). The cache is filled
  // when provided and is what backward() consumes.
  Matrix forward(const Matrix& input, MlpCache* cache = nullptr) const;

  // Reverse pass of the forward call that produced `cache`. Throws ShapeError
  // when output_grad does not match the cached batch.
  MlpGradients backward(const MlpCache& cache, const Matrix& output_grad,
                        bool want_param_grads = true) const;

  // params -= learning_rate * grads
  void sgd_step(std::span<const double> grads, double learning_rate);

  bool all_finite() const noexcept;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

}  // namespace amgan
