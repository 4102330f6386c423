#pragma once

// Generator and discriminator losses for the label-aware GAN family, their
// closed-form logit gradients, and the gradient-level analyses built on them.
//
// Every LossBundle gradient is the positive gradient of the batch-averaged
// loss with respect to one sample's logits (so it already carries the 1/n
// factor of the expectation it came from).

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "amgan/prob.hpp"

namespace amgan {

enum class ModelTag { VanillaGAN, GANStar, LabelGAN, ACGANStar, ACGANStarPlus, AMGAN };
enum class Labeling { Dynamic, Predefined, NotApplicable };
enum class GeneratorLoss { NegLogD, LogOneMinusD };

// Weight commonly used to damp the auxiliary classifier term.
inline constexpr double kReducedAuxWeight = 0.1;

struct ModelVariant {
  ModelTag tag = ModelTag::AMGAN;
  Labeling labeling = Labeling::Dynamic;
  GeneratorLoss generator_loss = GeneratorLoss::NegLogD;
  double aux_weight = 1.0;
  Smoothing smoothing{};
  // Adds E_{(x,y)~G}[H(u(y), C(x))] to the AC-GAN discriminator loss.
  bool include_fake_aux = false;

  // False for VanillaGAN and LabelGAN, whose generators take no target class.
  bool takes_target_class() const noexcept;

  // Builds a variant and resolves its labeling: VanillaGAN/LabelGAN accept only
  // NotApplicable, every other tag needs Dynamic or Predefined. Throws
  // ConfigError on a mismatch or out-of-range weights.
  static ModelVariant make(ModelTag tag, Labeling labeling);
  void validate() const;
};

std::string_view to_string(ModelTag tag) noexcept;
std::string_view to_string(Labeling labeling) noexcept;
std::string_view to_string(GeneratorLoss loss) noexcept;
std::optional<ModelTag> parse_model_tag(std::string_view text) noexcept;
std::optional<Labeling> parse_labeling(std::string_view text) noexcept;
std::optional<GeneratorLoss> parse_generator_loss(std::string_view text) noexcept;

// Discriminator output layout per model family.
enum class HeadLayout {
  Binary,               // [l_real, l_fake]
  RealPlusFake,         // [l_1 .. l_K, l_fake]
  BinaryPlusClassifier  // [l_real, l_fake, c_1 .. c_K] sharing one trunk
};
HeadLayout head_layout(ModelTag tag) noexcept;
std::size_t head_width(ModelTag tag, std::size_t real_classes) noexcept;

struct LossBundle {
  double g_loss = 0.0;
  double d_loss = 0.0;
  std::vector<std::vector<double>> d_grads_real;  // d d_loss / d logits, real samples
  std::vector<std::vector<double>> d_grads_fake;  // d d_loss / d logits, fake samples
  std::vector<std::vector<double>> g_grads_fake;  // d g_loss / d logits, fake samples
};

// Two-class GAN from D_r values. Gradients are with respect to the two
// logits [l_real, l_fake] that produce D_r.
LossBundle vanilla_gan_losses(std::span<const double> d_real_on_real,
                              std::span<const double> d_real_on_fake,
                              GeneratorLoss generator_loss, Smoothing smoothing = {});
LossBundle vanilla_gan_losses(std::span<const LogitVector> real_logits,
                              std::span<const LogitVector> fake_logits,
                              GeneratorLoss generator_loss, Smoothing smoothing = {});

// K+1 class LabelGAN. Logits are [l_1 .. l_K, l_fake].
LossBundle labelgan_losses(std::span<const LogitVector> real_logits,
                           std::span<const std::size_t> real_labels,
                           std::span<const LogitVector> fake_logits);

// K+1 class AM-GAN: each fake sample is pushed towards its own target class.
LossBundle amgan_losses(std::span<const LogitVector> real_logits,
                        std::span<const std::size_t> real_labels,
                        std::span<const LogitVector> fake_logits,
                        std::span<const std::size_t> fake_targets);

struct AcganLogits {
  LogitVector binary;      // [l_real, l_fake]
  LogitVector classifier;  // K-way auxiliary classifier
};

struct AcganOptions {
  double aux_weight = 1.0;        // generator-side classifier weight
  bool include_fake_aux = false;  // original AC-GAN fake-sample classifier term
  bool uniform_fake_aux = false;  // AC-GAN*+ adversarial uniform term
};

// AC-GAN* family. Gradients are concatenated [binary(2), classifier(K)].
LossBundle acgan_star_losses(std::span<const AcganLogits> real_logits,
                             std::span<const std::size_t> real_labels,
                             std::span<const AcganLogits> fake_logits,
                             std::span<const std::size_t> fake_targets,
                             AcganOptions options = {});

// E_{x~G}[H(uniform_K, C(x))]. Throws EmptyBatch.
double acgan_star_plus_extra(std::span<const ProbVector> classifier_probs);

struct ClassAwareGradient {
  std::vector<double> alpha;  // D_k / D_r on real classes, -1 on the fake class
  double overall_magnitude;   // 1 - D_r
  std::vector<double> per_logit;
};

// Negative gradient of the LabelGAN generator loss w.r.t. the K+1 logits,
// factored into its class weights. Throws DegenerateError if D_r < kLogClamp.
ClassAwareGradient class_aware_gradient(const ProbVector& probs);

// Most probable real class; the fake entry of a RealPlusFake vector is
// ignored. Ties resolve to the lowest index.
std::size_t dynamic_label(const ProbVector& probs);

struct CatganTerms {
  double cat_entropy;          // E[-H(D(x))]
  double am_fake_suppression;  // E[H(F(v(K+1)), F(D(x)))]
  double am_smoothed_uniform;  // v_r(K+1) * E[H(uniform_K, R(D(x)))]
};

// negative_smoothing_mass is the real-class mass v_r(K+1) left on the fake
// target after negative label smoothing. Throws EmptyBatch.
CatganTerms catgan_style_losses(std::span<const ProbVector> fake_probs,
                                double negative_smoothing_mass = 0.0);

struct UnlabeledTerms {
  double per_sample_fit;  // E[H(v(dynamic_label(x)), D(x))]
  double batch_ref_fit;   // H(p_ref, R(E[D(x)]))
};

UnlabeledTerms unlabeled_losses(std::span<const ProbVector> probs, const ProbVector& p_ref);

// Negative gradient w.r.t. the real logit of the smoothed generator loss:
//   LogOneMinusD: D_r - lambda        (lambda is the fake-sample strength)
//   NegLogD:      (1 - lambda) - D_r  (target [1 - lambda, lambda])
double smoothing_real_logit_gradient(double d_real, double lambda, GeneratorLoss loss);

// Dispatches to the loss family of `variant` on raw head outputs laid out per
// head_layout(). fake_targets is ignored by variants without a target class.
LossBundle model_losses(const ModelVariant& variant, std::size_t real_classes,
                        std::span<const std::vector<double>> real_heads,
                        std::span<const std::size_t> real_labels,
                        std::span<const std::vector<double>> fake_heads,
                        std::span<const std::size_t> fake_targets);

}  // namespace amgan
