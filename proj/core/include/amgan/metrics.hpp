#pragma once

// Classifier-based sample scores: Inception Score with its entropy
// decomposition, Mode Score, AM Score, and the mode-dropping simulator.
//
// Scores are computed on explicit classifier outputs; nothing here owns a
// classifier.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "amgan/prob.hpp"

namespace amgan {

// Rows of C(x), one per sample, stored row-major.
class ClassifierBatch {
 public:
  // Validates every row as a probability vector (renormalizing within
  // tolerance). Throws EmptyBatch for zero rows, ShapeError for a flat buffer
  // that is not a multiple of `classes`.
  ClassifierBatch(std::size_t classes, std::vector<double> flat);
  explicit ClassifierBatch(std::span<const ProbVector> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t classes() const noexcept { return classes_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * classes_, classes_};
  }
  // C-bar: the average row.
  std::vector<double> mean() const;

 private:
  std::size_t classes_;
  std::size_t rows_;
  std::vector<double> data_;
};

struct ScoreReport {
  double inception_score = 0.0;
  double log_inception_score = 0.0;       // E[KL(C(x) || C-bar)]
  double marginal_entropy = 0.0;          // H(C-bar)
  double mean_conditional_entropy = 0.0;  // E[H(C(x))]
  std::optional<double> mode_score;
  std::optional<double> am_score;
  std::optional<double> am_kl_term;      // KL(C-train || C-bar)
  std::optional<double> am_entropy_term;  // E[H(C(x))]
  bool train_dist_clamped = false;        // reference had zero entries
};

// exp(E[KL(C(x) || C-bar)]) evaluated row by row, with the two entropy terms
// filled in alongside. Throws EmptyBatch.
ScoreReport inception_score(const ClassifierBatch& batch);

// exp(E[KL(C(x) || C-train)] - KL(C-bar || C-train)). Zero entries of
// train_dist go through the log clamp and set *clamped when provided.
double mode_score(const ClassifierBatch& batch, const ProbVector& train_dist,
                  bool* clamped = nullptr);

// KL(C-train || C-bar) + E[H(C(x))]; fills the inception fields as well.
ScoreReport am_score(const ClassifierBatch& batch, const ProbVector& train_dist);

// Every field, including mode_score.
ScoreReport score_report(const ClassifierBatch& batch, const ProbVector& train_dist);

// |log(IS) - (H(C-bar) - E[H(C(x))])|
double decomposition_residual(const ScoreReport& report) noexcept;

// E_x[KL(C(x) || C-bar)] when sample i carries weight weights[i] (weights are
// normalized internally; C-bar is the weighted mean row).
double weighted_log_inception(const ClassifierBatch& batch, std::span<const double> weights);

enum class ClassDensity { Uniform, Gaussian };

struct ModeDropConfig {
  std::size_t n_points = 10;
  ClassDensity density = ClassDensity::Uniform;
  // Gaussian density over class index; unset means N/2 and N/4.
  std::optional<double> mu;
  std::optional<double> sigma;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
  double resolved_mu() const noexcept;
  double resolved_sigma() const noexcept;
  // Unnormalized per-class weights.
  std::vector<double> class_weights() const;
};

struct ModeDropPoint {
  std::size_t kept = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std_error = 0.0;
};

// Log-domain score of each random trial with `dropped` of the N points
// removed. Trial t of drop count m reads the stream (seed, "mode-drop", m, t).
std::vector<double> mode_drop_trials(const ModeDropConfig& config, std::size_t dropped);

// One point per kept count, ascending from 1 to N (drop count N-1 down to 0).
std::vector<ModeDropPoint> mode_drop_simulation(const ModeDropConfig& config);

}  // namespace amgan
