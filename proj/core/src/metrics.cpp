#include "amgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "amgan/error.hpp"
#include "amgan/rng.hpp"

namespace amgan {

namespace {

void require_reference(const ClassifierBatch& batch, const ProbVector& train_dist) {
  if (train_dist.size() != batch.classes()) {
    throw ShapeError("reference distribution has " + std::to_string(train_dist.size()) +
                     " classes, batch has " + std::to_string(batch.classes()));
  }
}

}  // namespace

ClassifierBatch::ClassifierBatch(std::size_t classes, std::vector<double> flat)
    : classes_(classes), rows_(0), data_(std::move(flat)) {
  if (classes_ == 0) throw ShapeError("classifier batch needs at least one class");
  if (data_.size() % classes_ != 0) {
    throw ShapeError("classifier buffer is not a whole number of rows");
  }
  rows_ = data_.size() / classes_;
  if (rows_ == 0) throw EmptyBatch("classifier batch has no rows");
  for (std::size_t r = 0; r < rows_; ++r) {
    auto first = data_.begin() + static_cast<long>(r * classes_);
    ProbVector checked(std::vector<double>(first, first + static_cast<long>(classes_)));
    std::copy(checked.values().begin(), checked.values().end(), first);
  }
}

ClassifierBatch::ClassifierBatch(std::span<const ProbVector> rows)
    : classes_(rows.empty() ? 0 : rows.front().size()), rows_(rows.size()) {
  if (rows.empty()) throw EmptyBatch("classifier batch has no rows");
  data_.reserve(rows_ * classes_);
  for (const auto& r : rows) {
    if (r.size() != classes_) throw ShapeError("classifier batch rows differ in length");
    data_.insert(data_.end(), r.values().begin(), r.values().end());
  }
}

std::vector<double> ClassifierBatch::mean() const {
  // Accumulate deviations from the first row so a batch of identical rows has
  // a mean bit-identical to its rows.
  const auto pivot = row(0);
  std::vector<double> dev(classes_, 0.0);
  for (std::size_t r = 1; r < rows_; ++r) {
    const auto x = row(r);
    for (std::size_t k = 0; k < classes_; ++k) dev[k] += x[k] - pivot[k];
  }
  std::vector<double> mean(classes_);
  for (std::size_t k = 0; k < classes_; ++k) {
    mean[k] = pivot[k] + dev[k] / static_cast<double>(rows_);
  }
  return mean;
}

ScoreReport inception_score(const ClassifierBatch& batch) {
  const std::vector<double> marginal = batch.mean();
  double kl = 0.0;
  double cond_entropy = 0.0;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    kl += kl_divergence(batch.row(r), marginal);
    cond_entropy += entropy(batch.row(r));
  }
  const double n = static_cast<double>(batch.rows());
  ScoreReport out;
  // KL is non-negative; rounding may leave a residue of order 1e-17 below zero.
  out.log_inception_score = std::max(0.0, kl / n);
  out.inception_score = std::exp(out.log_inception_score);
  out.marginal_entropy = entropy(marginal);
  out.mean_conditional_entropy = cond_entropy / n;
  return out;
}

double mode_score(const ClassifierBatch& batch, const ProbVector& train_dist, bool* clamped) {
  require_reference(batch, train_dist);
  if (clamped != nullptr) {
    *clamped = std::any_of(train_dist.values().begin(), train_dist.values().end(),
                           [](double p) { return p < kLogClamp; });
  }
  // Averaged around the first row, like ClassifierBatch::mean, so a batch of
  // identical rows scores exactly one.
  const double pivot = kl_divergence(batch.row(0), train_dist.values());
  double dev = 0.0;
  for (std::size_t r = 1; r < batch.rows(); ++r) {
    dev += kl_divergence(batch.row(r), train_dist.values()) - pivot;
  }
  const double kl = pivot + dev / static_cast<double>(batch.rows());
  return std::exp(kl - kl_divergence(batch.mean(), train_dist.values()));
}

ScoreReport am_score(const ClassifierBatch& batch, const ProbVector& train_dist) {
  require_reference(batch, train_dist);
  ScoreReport out = inception_score(batch);
  const double kl = std::max(0.0, kl_divergence(train_dist.values(), batch.mean()));
  out.am_kl_term = kl;
  out.am_entropy_term = out.mean_conditional_entropy;
  out.am_score = kl + out.mean_conditional_entropy;
  return out;
}

ScoreReport score_report(const ClassifierBatch& batch, const ProbVector& train_dist) {
  ScoreReport out = am_score(batch, train_dist);
  bool clamped = false;
  out.mode_score = mode_score(batch, train_dist, &clamped);
  out.train_dist_clamped = clamped;
  return out;
}

double decomposition_residual(const ScoreReport& report) noexcept {
  return std::abs(report.log_inception_score -
                  (report.marginal_entropy - report.mean_conditional_entropy));
}

double weighted_log_inception(const ClassifierBatch& batch, std::span<const double> weights) {
  if (weights.size() != batch.rows()) throw ShapeError("one weight per row expected");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InvalidInput("weights must have positive total");

  std::vector<double> marginal(batch.classes(), 0.0);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto x = batch.row(r);
    const double w = weights[r] / total;
    for (std::size_t k = 0; k < batch.classes(); ++k) marginal[k] += w * x[k];
  }
  double kl = 0.0;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    if (weights[r] != 0.0) kl += weights[r] / total * kl_divergence(batch.row(r), marginal);
  }
  return std::max(0.0, kl);
}

void ModeDropConfig::validate() const {
  if (n_points < 2) throw ConfigError("mode drop needs at least two points");
  if (trials < 1) throw ConfigError("mode drop needs at least one trial");
  if (density == ClassDensity::Gaussian) {
    if (!std::isfinite(resolved_mu())) throw ConfigError("gaussian density mu must be finite");
    const double s = resolved_sigma();
    if (!std::isfinite(s) || s <= 0.0) throw ConfigError("gaussian density sigma must be positive");
  }
}

double ModeDropConfig::resolved_mu() const noexcept {
  return mu.value_or(static_cast<double>(n_points) / 2.0);
}

double ModeDropConfig::resolved_sigma() const noexcept {
  return sigma.value_or(static_cast<double>(n_points) / 4.0);
}

std::vector<double> ModeDropConfig::class_weights() const {
  std::vector<double> w(n_points, 1.0);
  if (density == ClassDensity::Gaussian) {
    const double m = resolved_mu();
    const double s = resolved_sigma();
    for (std::size_t i = 0; i < n_points; ++i) {
      const double d = static_cast<double>(i) - m;
      w[i] = std::exp(-d * d / (2.0 * s * s));
    }
  }
  return w;
}

std::vector<double> mode_drop_trials(const ModeDropConfig& config, std::size_t dropped) {
  config.validate();
  const std::size_t n = config.n_points;
  if (dropped >= n) throw ConfigError("cannot drop every point");
  const std::vector<double> density = config.class_weights();
  const std::size_t kept = n - dropped;

  std::vector<double> scores;
  scores.reserve(config.trials);
  std::vector<std::size_t> order(n);
  std::vector<double> rows(kept * n);
  std::vector<double> weights(kept);
  for (std::size_t t = 0; t < config.trials; ++t) {
    RandomStream rng(config.seed, "mode-drop", dropped, t);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // The first `dropped` slots of a partial Fisher-Yates shuffle are removed.
    for (std::size_t i = 0; i < dropped; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(order[i], order[j]);
    }
    std::sort(order.begin() + static_cast<long>(dropped), order.end());
    std::fill(rows.begin(), rows.end(), 0.0);
    for (std::size_t r = 0; r < kept; ++r) {
      const std::size_t cls = order[dropped + r];
      rows[r * n + cls] = 1.0;
      weights[r] = density[cls];
    }
    scores.push_back(weighted_log_inception(ClassifierBatch(n, rows), weights));
  }
  return scores;
}

std::vector<ModeDropPoint> mode_drop_simulation(const ModeDropConfig& config) {
  config.validate();
  std::vector<ModeDropPoint> series;
  series.reserve(config.n_points);
  for (std::size_t dropped = config.n_points; dropped-- > 0;) {
    const std::vector<double> scores = mode_drop_trials(config, dropped);
    ModeDropPoint p;
    p.kept = config.n_points - dropped;
    const double n = static_cast<double>(scores.size());
    p.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    p.min = *lo;
    p.max = *hi;
    if (scores.size() > 1) {
      double ss = 0.0;
      for (double s : scores) ss += (s - p.mean) * (s - p.mean);
      p.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    series.push_back(p);
  }
  return series;
}

}  // namespace amgan
