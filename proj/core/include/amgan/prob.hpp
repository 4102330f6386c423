#pragma once

// Simplex arithmetic shared by every loss and metric: softmax, entropy,
// cross-entropy, KL divergence, the K+1 class decomposition and target
// vector construction.
//
// Class indices are zero-based. In a RealPlusFake vector of length K+1 the
// real classes occupy [0, K) and the fake class sits at index K.

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace amgan {

// Floor applied to every probability before a log is taken.
inline constexpr double kLogClamp = 1e-12;
// Allowed drift of a probability vector's sum before it is rejected.
inline constexpr double kSimplexTolerance = 1e-9;

// log(max(p, kLogClamp))
double clamped_log(double p) noexcept;

class LogitVector {
 public:
  // Throws InvalidInput on non-finite entries or fewer than two entries.
  explicit LogitVector(std::vector<double> values);
  LogitVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

enum class Layout { RealOnly, RealPlusFake };

class ProbVector {
 public:
  // Entries must be in [0, 1] and sum to 1 within kSimplexTolerance; vectors
  // inside tolerance are renormalized. Throws InvalidInput otherwise, and
  // LayoutError for a RealPlusFake vector shorter than 3.
  explicit ProbVector(std::vector<double> values, Layout layout = Layout::RealOnly);
  ProbVector(std::initializer_list<double> values, Layout layout = Layout::RealOnly);

  static ProbVector uniform(std::size_t n, Layout layout = Layout::RealOnly);
  static ProbVector one_hot(std::size_t n, std::size_t index,
                            Layout layout = Layout::RealOnly);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  Layout layout() const noexcept { return layout_; }

  // K: number of real classes.
  std::size_t real_classes() const noexcept;
  // Index of the fake class. Throws LayoutError for RealOnly vectors.
  std::size_t fake_index() const;
  // Total probability on real classes (D_r). 1 for RealOnly vectors.
  double real_mass() const noexcept;

 private:
  struct Trusted {};
  ProbVector(Trusted, std::vector<double> values, Layout layout)
      : values_(std::move(values)), layout_(layout) {}

  std::vector<double> values_;
  Layout layout_;

  friend ProbVector softmax(const LogitVector& logits, Layout layout);
};

// Label-smoothing strengths for the two-class real/fake target.
//   fake samples: [lambda_fake, 1 - lambda_fake]
//   real samples: [1 - lambda_real, lambda_real]
struct Smoothing {
  double lambda_fake = 0.0;
  double lambda_real = 0.0;
};

enum class TargetKind { OneHotFull, OneHotReal, Smoothed, Uniform, Distribution };

class TargetVector {
 public:
  // v(label) over K+1 classes; label may be K (the fake class).
  static TargetVector one_hot_full(std::size_t label, std::size_t real_classes);
  // u(label) over K real classes.
  static TargetVector one_hot_real(std::size_t label, std::size_t real_classes);
  // Two-class real/fake target under smoothing. Throws InvalidInput unless
  // both strengths are in [0, 0.5).
  static TargetVector smoothed(bool real_sample, Smoothing smoothing);
  static TargetVector uniform(std::size_t n, Layout layout = Layout::RealOnly);
  // Arbitrary simplex point used as a target.
  static TargetVector distribution(ProbVector probs);

  const ProbVector& probs() const noexcept { return probs_; }
  std::span<const double> values() const noexcept { return probs_.values(); }
  std::size_t size() const noexcept { return probs_.size(); }
  TargetKind kind() const noexcept { return kind_; }
  // Set for the one-hot kinds.
  std::optional<std::size_t> label() const noexcept { return label_; }
  // Set for Smoothed.
  std::optional<Smoothing> smoothing() const noexcept { return smoothing_; }

 private:
  TargetVector(ProbVector probs, TargetKind kind) : probs_(std::move(probs)), kind_(kind) {}

  ProbVector probs_;
  TargetKind kind_;
  std::optional<std::size_t> label_;
  std::optional<Smoothing> smoothing_;
};

ProbVector softmax(const LogitVector& logits, Layout layout = Layout::RealOnly);

// H(t, p) = -sum_i t_i log p_i, logs clamped at kLogClamp.
double cross_entropy(std::span<const double> target, std::span<const double> probs);
double cross_entropy(const TargetVector& target, const ProbVector& probs);
double cross_entropy(const ProbVector& target, const ProbVector& probs);

double entropy(std::span<const double> probs);
double entropy(const ProbVector& probs);

// KL(p || q) = sum_i p_i (log p_i - log q_i), both logs clamped.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const ProbVector& p, const ProbVector& q);

// Negative gradient of H(target, softmax(logits)) with respect to the logits:
// target - softmax(logits).
std::vector<double> ce_logit_gradient(const TargetVector& target, const LogitVector& logits);

// R(.) and F(.) split of a K+1 class vector.
struct Decomposition {
  double r_mass;
  ProbVector real_part;   // v_{1:K} / r_mass; uniform when degenerate
  ProbVector fake_split;  // [r_mass, v_fake]
  bool degenerate;        // r_mass == 0
};

// Throws LayoutError unless v is RealPlusFake.
Decomposition decompose(const ProbVector& v);

struct DecomposedCrossEntropy {
  double aux_classifier_term;  // t_r * H(R(t), R(p))
  double labelgan_term;        // H(F(t), F(p))
  double total;
};

// Splits H(t, p) over K+1 classes into the auxiliary-classifier and
// real-vs-fake parts. The R(p) logs are taken as log p_k - log p_r on clamped
// values so that the two parts always sum to cross_entropy(t, p).
DecomposedCrossEntropy decomposed_cross_entropy(const TargetVector& target,
                                                const ProbVector& probs);

struct CommutedCrossEntropy {
  double mean_of_ce;  // E_x[H(p(x), ref)]
  double ce_of_mean;  // H(E_x[p(x)], ref)
};

// Throws EmptyBatch on an empty batch, ShapeError on ragged lengths.
CommutedCrossEntropy expected_ce_commutes(std::span<const ProbVector> batch,
                                          const ProbVector& reference);

// Element-wise mean of equally sized probability vectors.
ProbVector mean_distribution(std::span<const ProbVector> batch);

}  // namespace amgan
