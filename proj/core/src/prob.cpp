#include "amgan/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "amgan/error.hpp"

namespace amgan {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                     " vs " + std::to_string(b) + ")");
  }
}

std::vector<double> normalize_simplex(std::vector<double> values) {
  double sum = 0.0;
  for (double& v : values) {
    if (!std::isfinite(v)) throw InvalidInput("probability vector has a non-finite entry");
    if (v < -kSimplexTolerance || v > 1.0 + kSimplexTolerance) {
      throw InvalidInput("probability entry " + std::to_string(v) + " outside [0, 1]");
    }
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw InvalidInput("probability vector sums to " + std::to_string(sum));
  }
  if (sum != 1.0) {
    for (double& v : values) v /= sum;
  }
  return values;
}

}  // namespace

double clamped_log(double p) noexcept { return std::log(std::max(p, kLogClamp)); }

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw InvalidInput("logit vector needs at least two entries");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInput("logit vector has a non-finite entry");
  }
}

LogitVector::LogitVector(std::initializer_list<double> values)
    : LogitVector(std::vector<double>(values)) {}

ProbVector::ProbVector(std::vector<double> values, Layout layout)
    : values_(normalize_simplex(std::move(values))), layout_(layout) {
  if (values_.empty()) throw InvalidInput("empty probability vector");
  if (layout_ == Layout::RealPlusFake && values_.size() < 3) {
    throw LayoutError("RealPlusFake layout needs at least two real classes plus the fake class");
  }
}

ProbVector::ProbVector(std::initializer_list<double> values, Layout layout)
    : ProbVector(std::vector<double>(values), layout) {}

ProbVector ProbVector::uniform(std::size_t n, Layout layout) {
  if (n == 0) throw InvalidInput("uniform distribution over zero classes");
  return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)), layout);
}

ProbVector ProbVector::one_hot(std::size_t n, std::size_t index, Layout layout) {
  if (index >= n) throw LabelError("one-hot index " + std::to_string(index) + " out of range");
  std::vector<double> v(n, 0.0);
  v[index] = 1.0;
  return ProbVector(std::move(v), layout);
}

std::size_t ProbVector::real_classes() const noexcept {
  return layout_ == Layout::RealPlusFake ? values_.size() - 1 : values_.size();
}

std::size_t ProbVector::fake_index() const {
  if (layout_ != Layout::RealPlusFake) throw LayoutError("vector has no fake class");
  return values_.size() - 1;
}

double ProbVector::real_mass() const noexcept {
  if (layout_ == Layout::RealOnly) return 1.0;
  double r = 0.0;
  for (std::size_t k = 0; k + 1 < values_.size(); ++k) r += values_[k];
  return r;
}

TargetVector TargetVector::one_hot_full(std::size_t label, std::size_t real_classes) {
  if (label > real_classes) {
    throw LabelError("label " + std::to_string(label) + " outside [0, " +
                     std::to_string(real_classes) + "]");
  }
  TargetVector t(ProbVector::one_hot(real_classes + 1, label, Layout::RealPlusFake),
                 TargetKind::OneHotFull);
  t.label_ = label;
  return t;
}

TargetVector TargetVector::one_hot_real(std::size_t label, std::size_t real_classes) {
  if (label >= real_classes) {
    throw LabelError("label " + std::to_string(label) + " outside [0, " +
                     std::to_string(real_classes) + ")");
  }
  TargetVector t(ProbVector::one_hot(real_classes, label), TargetKind::OneHotReal);
  t.label_ = label;
  return t;
}

TargetVector TargetVector::smoothed(bool real_sample, Smoothing smoothing) {
  auto valid = [](double l) { return l >= 0.0 && l < 0.5; };
  if (!valid(smoothing.lambda_fake) || !valid(smoothing.lambda_real)) {
    throw InvalidInput("smoothing strengths must lie in [0, 0.5)");
  }
  const double real_prob = real_sample ? 1.0 - smoothing.lambda_real : smoothing.lambda_fake;
  TargetVector t(ProbVector({real_prob, 1.0 - real_prob}), TargetKind::Smoothed);
  t.smoothing_ = smoothing;
  return t;
}

TargetVector TargetVector::uniform(std::size_t n, Layout layout) {
  return TargetVector(ProbVector::uniform(n, layout), TargetKind::Uniform);
}

TargetVector TargetVector::distribution(ProbVector probs) {
  return TargetVector(std::move(probs), TargetKind::Distribution);
}

ProbVector softmax(const LogitVector& logits, Layout layout) {
  const auto l = logits.values();
  const double peak = *std::max_element(l.begin(), l.end());
  std::vector<double> p(l.size());
  double z = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    p[i] = std::exp(l[i] - peak);
    z += p[i];
  }
  for (double& v : p) v /= z;
  if (layout == Layout::RealPlusFake && p.size() < 3) {
    throw LayoutError("RealPlusFake layout needs at least three logits");
  }
  return ProbVector(ProbVector::Trusted{}, std::move(p), layout);
}

double cross_entropy(std::span<const double> target, std::span<const double> probs) {
  require_same_length(target.size(), probs.size(), "cross_entropy");
  double h = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] != 0.0) h -= target[i] * clamped_log(probs[i]);
  }
  return h;
}

double cross_entropy(const TargetVector& target, const ProbVector& probs) {
  return cross_entropy(target.values(), probs.values());
}

double cross_entropy(const ProbVector& target, const ProbVector& probs) {
  return cross_entropy(target.values(), probs.values());
}

double entropy(std::span<const double> probs) { return cross_entropy(probs, probs); }

double entropy(const ProbVector& probs) { return entropy(probs.values()); }

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  require_same_length(p.size(), q.size(), "kl_divergence");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != 0.0) kl += p[i] * (clamped_log(p[i]) - clamped_log(q[i]));
  }
  return kl;
}

double kl_divergence(const ProbVector& p, const ProbVector& q) {
  return kl_divergence(p.values(), q.values());
}

std::vector<double> ce_logit_gradient(const TargetVector& target, const LogitVector& logits) {
  require_same_length(target.size(), logits.size(), "ce_logit_gradient");
  const ProbVector p = softmax(logits);
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = target.values()[i] - p[i];
  return g;
}

Decomposition decompose(const ProbVector& v) {
  if (v.layout() != Layout::RealPlusFake) {
    throw LayoutError("decompose needs a RealPlusFake vector");
  }
  const std::size_t k = v.real_classes();
  const double r = v.real_mass();
  const double fake = v[k];
  ProbVector fake_split({r, fake});
  if (r <= 0.0) {
    return {0.0, ProbVector::uniform(k), std::move(fake_split), true};
  }
  std::vector<double> real(v.values().begin(), v.values().begin() + static_cast<long>(k));
  for (double& x : real) x /= r;
  return {r, ProbVector(std::move(real)), std::move(fake_split), false};
}

DecomposedCrossEntropy decomposed_cross_entropy(const TargetVector& target,
                                                const ProbVector& probs) {
  require_same_length(target.size(), probs.size(), "decomposed_cross_entropy");
  if (target.probs().layout() != Layout::RealPlusFake ||
      probs.layout() != Layout::RealPlusFake) {
    throw LayoutError("decomposed_cross_entropy needs RealPlusFake target and probs");
  }
  const Decomposition t = decompose(target.probs());
  const std::size_t k = probs.real_classes();
  const double log_pr = clamped_log(probs.real_mass());

  double aux = 0.0;
  if (!t.degenerate) {
    double h_real = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double ti = t.real_part[i];
      if (ti != 0.0) h_real -= ti * (clamped_log(probs[i]) - log_pr);
    }
    aux = t.r_mass * h_real;
  }
  const double labelgan = -t.fake_split[0] * log_pr - t.fake_split[1] * clamped_log(probs[k]);
  return {aux, labelgan, aux + labelgan};
}

ProbVector mean_distribution(std::span<const ProbVector> batch) {
  if (batch.empty()) throw EmptyBatch("mean of an empty batch");
  const std::size_t n = batch.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& p : batch) {
    require_same_length(p.size(), n, "mean_distribution");
    for (std::size_t i = 0; i < n; ++i) mean[i] += p[i];
  }
  for (double& m : mean) m /= static_cast<double>(batch.size());
  return ProbVector(std::move(mean), batch.front().layout());
}

CommutedCrossEntropy expected_ce_commutes(std::span<const ProbVector> batch,
                                          const ProbVector& reference) {
  if (batch.empty()) throw EmptyBatch("expected_ce_commutes on an empty batch");
  double mean_ce = 0.0;
  for (const auto& p : batch) mean_ce += cross_entropy(p, reference);
  mean_ce /= static_cast<double>(batch.size());
  const ProbVector mean = mean_distribution(batch);
  return {mean_ce, cross_entropy(mean, reference)};
}

}  // namespace amgan
