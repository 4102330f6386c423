#include "amgan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amgan/error.hpp"

namespace amgan {

namespace {

void require_labels(std::span<const std::size_t> labels, std::size_t count,
                    std::size_t real_classes, const char* what) {
  if (labels.size() != count) {
    throw ShapeError(std::string(what) + ": " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(count) + " samples");
  }
  for (std::size_t y : labels) {
    if (y >= real_classes) {
      throw LabelError(std::string(what) + ": label " + std::to_string(y) + " outside [0, " +
                       std::to_string(real_classes) + ")");
    }
  }
}

void require_width(const LogitVector& l, std::size_t width, const char* what) {
  if (l.size() != width) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(width) +
                     " logits, got " + std::to_string(l.size()));
  }
}

// (p - t) * scale
std::vector<double> scaled_residual(const ProbVector& p, std::span<const double> t,
                                    double scale) {
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (p[i] - t[i]) * scale;
  return g;
}

double inverse_count(std::size_t n) { return n == 0 ? 0.0 : 1.0 / static_cast<double>(n); }

// Shared by LabelGAN and AM-GAN: H(v(y), D) on real, H(v(K+1), D) on fake.
void k_plus_one_discriminator(std::span<const LogitVector> real_logits,
                              std::span<const std::size_t> real_labels,
                              std::span<const LogitVector> fake_logits, std::size_t k,
                              LossBundle& out) {
  const double wr = inverse_count(real_logits.size());
  const double wf = inverse_count(fake_logits.size());
  out.d_grads_real.reserve(real_logits.size());
  out.d_grads_fake.reserve(fake_logits.size());
  for (std::size_t i = 0; i < real_logits.size(); ++i) {
    const ProbVector d = softmax(real_logits[i], Layout::RealPlusFake);
    const auto t = TargetVector::one_hot_full(real_labels[i], k);
    out.d_loss += wr * cross_entropy(t, d);
    out.d_grads_real.push_back(scaled_residual(d, t.values(), wr));
  }
  const auto fake_target = TargetVector::one_hot_full(k, k);
  for (const auto& l : fake_logits) {
    const ProbVector d = softmax(l, Layout::RealPlusFake);
    out.d_loss += wf * cross_entropy(fake_target, d);
    out.d_grads_fake.push_back(scaled_residual(d, fake_target.values(), wf));
  }
}

std::size_t infer_real_classes(std::span<const LogitVector> a, std::span<const LogitVector> b) {
  if (!a.empty()) return a.front().size() - 1;
  if (!b.empty()) return b.front().size() - 1;
  throw EmptyBatch("loss evaluated on an empty batch");
}

}  // namespace

bool ModelVariant::takes_target_class() const noexcept {
  return tag != ModelTag::VanillaGAN && tag != ModelTag::LabelGAN;
}

ModelVariant ModelVariant::make(ModelTag tag, Labeling labeling) {
  ModelVariant v;
  v.tag = tag;
  v.labeling = labeling;
  v.validate();
  return v;
}

void ModelVariant::validate() const {
  if (takes_target_class()) {
    if (labeling == Labeling::NotApplicable) {
      throw ConfigError(std::string(to_string(tag)) + " needs dynamic or predefined labeling");
    }
  } else if (labeling != Labeling::NotApplicable) {
    throw ConfigError(std::string(to_string(tag)) +
                      " takes no target class; labeling must be 'none'");
  }
  if (!std::isfinite(aux_weight) || aux_weight < 0.0) {
    throw ConfigError("aux_weight must be finite and non-negative");
  }
  auto valid = [](double l) { return l >= 0.0 && l < 0.5; };
  if (!valid(smoothing.lambda_fake) || !valid(smoothing.lambda_real)) {
    throw ConfigError("smoothing strengths must lie in [0, 0.5)");
  }
}

std::string_view to_string(ModelTag tag) noexcept {
  switch (tag) {
    case ModelTag::VanillaGAN: return "gan";
    case ModelTag::GANStar: return "gan-star";
    case ModelTag::LabelGAN: return "labelgan";
    case ModelTag::ACGANStar: return "acgan-star";
    case ModelTag::ACGANStarPlus: return "acgan-star-plus";
    case ModelTag::AMGAN: return "amgan";
  }
  return "unknown";
}

std::string_view to_string(Labeling labeling) noexcept {
  switch (labeling) {
    case Labeling::Dynamic: return "dynamic";
    case Labeling::Predefined: return "predefined";
    case Labeling::NotApplicable: return "none";
  }
  return "unknown";
}

std::string_view to_string(GeneratorLoss loss) noexcept {
  switch (loss) {
    case GeneratorLoss::NegLogD: return "neg-log-d";
    case GeneratorLoss::LogOneMinusD: return "log-one-minus-d";
  }
  return "unknown";
}

std::optional<ModelTag> parse_model_tag(std::string_view s) noexcept {
  if (s == "gan" || s == "vanilla") return ModelTag::VanillaGAN;
  if (s == "gan-star" || s == "ganstar" || s == "gan*") return ModelTag::GANStar;
  if (s == "labelgan") return ModelTag::LabelGAN;
  if (s == "acgan-star" || s == "acganstar" || s == "acgan*") return ModelTag::ACGANStar;
  if (s == "acgan-star-plus" || s == "acganstarplus" || s == "acgan*+") {
    return ModelTag::ACGANStarPlus;
  }
  if (s == "amgan") return ModelTag::AMGAN;
  return std::nullopt;
}

std::optional<Labeling> parse_labeling(std::string_view s) noexcept {
  if (s == "dynamic") return Labeling::Dynamic;
  if (s == "predefined") return Labeling::Predefined;
  if (s == "none") return Labeling::NotApplicable;
  return std::nullopt;
}

std::optional<GeneratorLoss> parse_generator_loss(std::string_view s) noexcept {
  if (s == "neg-log-d") return GeneratorLoss::NegLogD;
  if (s == "log-one-minus-d") return GeneratorLoss::LogOneMinusD;
  return std::nullopt;
}

HeadLayout head_layout(ModelTag tag) noexcept {
  switch (tag) {
    case ModelTag::VanillaGAN: return HeadLayout::Binary;
    case ModelTag::LabelGAN:
    case ModelTag::AMGAN: return HeadLayout::RealPlusFake;
    case ModelTag::GANStar:
    case ModelTag::ACGANStar:
    case ModelTag::ACGANStarPlus: return HeadLayout::BinaryPlusClassifier;
  }
  return HeadLayout::Binary;
}

std::size_t head_width(ModelTag tag, std::size_t real_classes) noexcept {
  switch (head_layout(tag)) {
    case HeadLayout::Binary: return 2;
    case HeadLayout::RealPlusFake: return real_classes + 1;
    case HeadLayout::BinaryPlusClassifier: return 2 + real_classes;
  }
  return 2;
}

LossBundle vanilla_gan_losses(std::span<const double> d_real_on_real,
                              std::span<const double> d_real_on_fake,
                              GeneratorLoss generator_loss, Smoothing smoothing) {
  if (d_real_on_real.empty() && d_real_on_fake.empty()) {
    throw EmptyBatch("vanilla_gan_losses on an empty batch");
  }
  const auto real_target = TargetVector::smoothed(true, smoothing);
  const auto fake_target = TargetVector::smoothed(false, smoothing);
  auto as_probs = [](double d) {
    if (!std::isfinite(d) || d < 0.0 || d > 1.0) {
      throw InvalidInput("D_r must lie in [0, 1]");
    }
    return ProbVector({d, 1.0 - d});
  };

  LossBundle out;
  const double wr = inverse_count(d_real_on_real.size());
  const double wf = inverse_count(d_real_on_fake.size());
  for (double d : d_real_on_real) {
    const ProbVector p = as_probs(d);
    out.d_loss += wr * cross_entropy(real_target, p);
    out.d_grads_real.push_back(scaled_residual(p, real_target.values(), wr));
  }
  for (double d : d_real_on_fake) {
    const ProbVector p = as_probs(d);
    out.d_loss += wf * cross_entropy(fake_target, p);
    out.d_grads_fake.push_back(scaled_residual(p, fake_target.values(), wf));
    if (generator_loss == GeneratorLoss::NegLogD) {
      out.g_loss += wf * cross_entropy(real_target, p);
      out.g_grads_fake.push_back(scaled_residual(p, real_target.values(), wf));
    } else {
      out.g_loss -= wf * cross_entropy(fake_target, p);
      out.g_grads_fake.push_back(scaled_residual(p, fake_target.values(), -wf));
    }
  }
  return out;
}

LossBundle vanilla_gan_losses(std::span<const LogitVector> real_logits,
                              std::span<const LogitVector> fake_logits,
                              GeneratorLoss generator_loss, Smoothing smoothing) {
  std::vector<double> real, fake;
  real.reserve(real_logits.size());
  fake.reserve(fake_logits.size());
  for (const auto& l : real_logits) {
    require_width(l, 2, "vanilla_gan_losses");
    real.push_back(softmax(l)[0]);
  }
  for (const auto& l : fake_logits) {
    require_width(l, 2, "vanilla_gan_losses");
    fake.push_back(softmax(l)[0]);
  }
  return vanilla_gan_losses(real, fake, generator_loss, smoothing);
}

LossBundle labelgan_losses(std::span<const LogitVector> real_logits,
                           std::span<const std::size_t> real_labels,
                           std::span<const LogitVector> fake_logits) {
  const std::size_t k = infer_real_classes(real_logits, fake_logits);
  if (k < 2) throw LayoutError("LabelGAN needs at least two real classes");
  for (const auto& l : real_logits) require_width(l, k + 1, "labelgan_losses");
  for (const auto& l : fake_logits) require_width(l, k + 1, "labelgan_losses");
  require_labels(real_labels, real_logits.size(), k, "labelgan_losses");

  LossBundle out;
  k_plus_one_discriminator(real_logits, real_labels, fake_logits, k, out);

  const double wf = inverse_count(fake_logits.size());
  const auto g_target = TargetVector::one_hot_real(0, 2);  // [1, 0] over F(D)
  for (const auto& l : fake_logits) {
    const ProbVector d = softmax(l, Layout::RealPlusFake);
    const double d_fake = d[k];
    out.g_loss += wf * cross_entropy(g_target.values(),
                                     std::vector<double>{d.real_mass(), d_fake});
    // D_k / D_r computed as the softmax over the real logits alone, which
    // stays finite when D_r underflows.
    const ProbVector ratio = softmax(LogitVector(std::vector<double>(
        l.values().begin(), l.values().begin() + static_cast<long>(k))));
    std::vector<double> g(k + 1);
    for (std::size_t i = 0; i < k; ++i) g[i] = -wf * d_fake * ratio[i];
    g[k] = wf * d_fake;
    out.g_grads_fake.push_back(std::move(g));
  }
  return out;
}

LossBundle amgan_losses(std::span<const LogitVector> real_logits,
                        std::span<const std::size_t> real_labels,
                        std::span<const LogitVector> fake_logits,
                        std::span<const std::size_t> fake_targets) {
  const std::size_t k = infer_real_classes(real_logits, fake_logits);
  if (k < 2) throw LayoutError("AM-GAN needs at least two real classes");
  for (const auto& l : real_logits) require_width(l, k + 1, "amgan_losses");
  for (const auto& l : fake_logits) require_width(l, k + 1, "amgan_losses");
  require_labels(real_labels, real_logits.size(), k, "amgan_losses");
  require_labels(fake_targets, fake_logits.size(), k, "amgan_losses");

  LossBundle out;
  k_plus_one_discriminator(real_logits, real_labels, fake_logits, k, out);

  const double wf = inverse_count(fake_logits.size());
  for (std::size_t i = 0; i < fake_logits.size(); ++i) {
    const ProbVector d = softmax(fake_logits[i], Layout::RealPlusFake);
    const auto t = TargetVector::one_hot_full(fake_targets[i], k);
    out.g_loss += wf * cross_entropy(t, d);
    out.g_grads_fake.push_back(scaled_residual(d, t.values(), wf));
  }
  return out;
}

LossBundle acgan_star_losses(std::span<const AcganLogits> real_logits,
                             std::span<const std::size_t> real_labels,
                             std::span<const AcganLogits> fake_logits,
                             std::span<const std::size_t> fake_targets,
                             AcganOptions options) {
  if (real_logits.empty() && fake_logits.empty()) {
    throw EmptyBatch("acgan_star_losses on an empty batch");
  }
  const std::size_t k = real_logits.empty() ? fake_logits.front().classifier.size()
                                            : real_logits.front().classifier.size();
  for (auto batch : {real_logits, fake_logits}) {
    for (const auto& l : batch) {
      require_width(l.binary, 2, "acgan_star_losses");
      require_width(l.classifier, k, "acgan_star_losses");
    }
  }
  require_labels(real_labels, real_logits.size(), k, "acgan_star_losses");
  require_labels(fake_targets, fake_logits.size(), k, "acgan_star_losses");
  if (!std::isfinite(options.aux_weight) || options.aux_weight < 0.0) {
    throw InvalidInput("aux_weight must be finite and non-negative");
  }

  const std::vector<double> is_real{1.0, 0.0};
  const std::vector<double> is_fake{0.0, 1.0};
  const auto uniform = TargetVector::uniform(k);
  const double wr = inverse_count(real_logits.size());
  const double wf = inverse_count(fake_logits.size());

  auto concat = [](std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };

  LossBundle out;
  for (std::size_t i = 0; i < real_logits.size(); ++i) {
    const ProbVector d2 = softmax(real_logits[i].binary);
    const ProbVector c = softmax(real_logits[i].classifier);
    const auto u = TargetVector::one_hot_real(real_labels[i], k);
    out.d_loss += wr * (cross_entropy(is_real, d2.values()) + cross_entropy(u, c));
    out.d_grads_real.push_back(
        concat(scaled_residual(d2, is_real, wr), scaled_residual(c, u.values(), wr)));
  }
  for (std::size_t i = 0; i < fake_logits.size(); ++i) {
    const ProbVector d2 = softmax(fake_logits[i].binary);
    const ProbVector c = softmax(fake_logits[i].classifier);
    const auto u = TargetVector::one_hot_real(fake_targets[i], k);

    std::vector<double> c_grad(k, 0.0);
    double d_term = cross_entropy(is_fake, d2.values());
    if (options.include_fake_aux) {
      d_term += cross_entropy(u, c);
      for (std::size_t j = 0; j < k; ++j) c_grad[j] += (c[j] - u.values()[j]) * wf;
    }
    if (options.uniform_fake_aux) {
      d_term += cross_entropy(uniform, c);
      for (std::size_t j = 0; j < k; ++j) c_grad[j] += (c[j] - uniform.values()[j]) * wf;
    }
    out.d_loss += wf * d_term;
    out.d_grads_fake.push_back(concat(scaled_residual(d2, is_fake, wf), c_grad));

    out.g_loss += wf * (cross_entropy(is_real, d2.values()) +
                        options.aux_weight * cross_entropy(u, c));
    out.g_grads_fake.push_back(concat(scaled_residual(d2, is_real, wf),
                                      scaled_residual(c, u.values(), wf * options.aux_weight)));
  }
  return out;
}

double acgan_star_plus_extra(std::span<const ProbVector> classifier_probs) {
  if (classifier_probs.empty()) throw EmptyBatch("acgan_star_plus_extra on an empty batch");
  const std::size_t k = classifier_probs.front().size();
  const auto uniform = ProbVector::uniform(k);
  double total = 0.0;
  for (const auto& c : classifier_probs) {
    if (c.size() != k) throw ShapeError("acgan_star_plus_extra: ragged batch");
    total += cross_entropy(uniform, c);
  }
  return total / static_cast<double>(classifier_probs.size());
}

ClassAwareGradient class_aware_gradient(const ProbVector& probs) {
  const std::size_t k = probs.fake_index();
  const double d_r = probs.real_mass();
  if (d_r < kLogClamp) throw DegenerateError("class_aware_gradient: D_r below clamp");

  ClassAwareGradient g;
  g.overall_magnitude = 1.0 - d_r;
  g.alpha.resize(k + 1);
  g.per_logit.resize(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    g.alpha[i] = probs[i] / d_r;
    g.per_logit[i] = g.overall_magnitude * g.alpha[i];
  }
  g.alpha[k] = -1.0;
  g.per_logit[k] = -g.overall_magnitude;
  return g;
}

std::size_t dynamic_label(const ProbVector& probs) {
  const std::size_t k = probs.real_classes();
  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

CatganTerms catgan_style_losses(std::span<const ProbVector> fake_probs,
                                double negative_smoothing_mass) {
  if (fake_probs.empty()) throw EmptyBatch("catgan_style_losses on an empty batch");
  if (!(negative_smoothing_mass >= 0.0 && negative_smoothing_mass < 1.0)) {
    throw InvalidInput("negative_smoothing_mass must lie in [0, 1)");
  }
  const std::vector<double> fake_split_target{negative_smoothing_mass,
                                              1.0 - negative_smoothing_mass};
  CatganTerms out{0.0, 0.0, 0.0};
  for (const auto& d : fake_probs) {
    const Decomposition parts = decompose(d);
    out.cat_entropy -= entropy(d);
    out.am_fake_suppression += cross_entropy(fake_split_target, parts.fake_split.values());
    if (negative_smoothing_mass > 0.0) {
      const auto uniform = ProbVector::uniform(d.real_classes());
      out.am_smoothed_uniform += cross_entropy(uniform, parts.real_part);
    }
  }
  const double n = static_cast<double>(fake_probs.size());
  out.cat_entropy /= n;
  out.am_fake_suppression /= n;
  out.am_smoothed_uniform = out.am_smoothed_uniform / n * negative_smoothing_mass;
  return out;
}

UnlabeledTerms unlabeled_losses(std::span<const ProbVector> probs, const ProbVector& p_ref) {
  if (probs.empty()) throw EmptyBatch("unlabeled_losses on an empty batch");
  const std::size_t k = probs.front().fake_index();
  if (p_ref.size() != k) throw ShapeError("unlabeled_losses: p_ref must cover the K real classes");

  double fit = 0.0;
  for (const auto& d : probs) {
    if (d.size() != k + 1) throw ShapeError("unlabeled_losses: ragged batch");
    fit += cross_entropy(TargetVector::one_hot_full(dynamic_label(d), k), d);
  }
  fit /= static_cast<double>(probs.size());
  const Decomposition mean = decompose(mean_distribution(probs));
  return {fit, cross_entropy(p_ref, mean.real_part)};
}

double smoothing_real_logit_gradient(double d_real, double lambda, GeneratorLoss loss) {
  return loss == GeneratorLoss::LogOneMinusD ? d_real - lambda : (1.0 - lambda) - d_real;
}

LossBundle model_losses(const ModelVariant& variant, std::size_t real_classes,
                        std::span<const std::vector<double>> real_heads,
                        std::span<const std::size_t> real_labels,
                        std::span<const std::vector<double>> fake_heads,
                        std::span<const std::size_t> fake_targets) {
  const std::size_t width = head_width(variant.tag, real_classes);
  auto to_logits = [&](std::span<const std::vector<double>> heads) {
    std::vector<LogitVector> out;
    out.reserve(heads.size());
    for (const auto& h : heads) {
      if (h.size() != width) throw ShapeError("model_losses: head width mismatch");
      out.emplace_back(h);
    }
    return out;
  };

  switch (head_layout(variant.tag)) {
    case HeadLayout::Binary:
      return vanilla_gan_losses(to_logits(real_heads), to_logits(fake_heads),
                                variant.generator_loss, variant.smoothing);
    case HeadLayout::RealPlusFake:
      if (variant.tag == ModelTag::LabelGAN) {
        return labelgan_losses(to_logits(real_heads), real_labels, to_logits(fake_heads));
      }
      return amgan_losses(to_logits(real_heads), real_labels, to_logits(fake_heads),
                          fake_targets);
    case HeadLayout::BinaryPlusClassifier: {
      auto split = [&](std::span<const std::vector<double>> heads) {
        std::vector<AcganLogits> out;
        out.reserve(heads.size());
        for (const auto& h : heads) {
          if (h.size() != width) throw ShapeError("model_losses: head width mismatch");
          out.push_back({LogitVector(std::vector<double>(h.begin(), h.begin() + 2)),
                         LogitVector(std::vector<double>(h.begin() + 2, h.end()))});
        }
        return out;
      };
      AcganOptions opts;
      opts.aux_weight = variant.tag == ModelTag::GANStar ? 0.0 : variant.aux_weight;
      opts.include_fake_aux = variant.include_fake_aux;
      opts.uniform_fake_aux = variant.tag == ModelTag::ACGANStarPlus;
      return acgan_star_losses(split(real_heads), real_labels, split(fake_heads), fake_targets,
                               opts);
    }
  }
  throw ConfigError("unknown model variant");
}

}  // namespace amgan
