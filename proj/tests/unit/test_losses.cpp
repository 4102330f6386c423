#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <amgan/error.hpp>
#include <amgan/losses.hpp>
#include <amgan/rng.hpp>

#include "oracles.hpp"

using namespace amgan;

namespace {

std::vector<double> draw(RandomStream& rng, std::size_t n, double scale) {
  std::vector<double> l(n);
  for (double& v : l) v = scale * rng.normal();
  return l;
}

// Splits a flat vector into rows of `width`.
std::vector<std::vector<double>> rows(const std::vector<double>& flat, std::size_t width) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < flat.size(); i += width) {
    out.emplace_back(flat.begin() + static_cast<long>(i),
                     flat.begin() + static_cast<long>(i + width));
  }
  return out;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rs) {
  std::vector<double> out;
  for (const auto& r : rs) out.insert(out.end(), r.begin(), r.end());
  return out;
}

// Checks every gradient field of model_losses against finite differences of
// the corresponding scalar loss, perturbing all real and fake head outputs.
void check_bundle_gradients(const ModelVariant& variant, std::size_t k, std::uint64_t seed) {
  const std::size_t width = head_width(variant.tag, k);
  RandomStream rng(seed, "test-bundle", static_cast<std::uint64_t>(variant.tag));
  const std::size_t nr = 1 + rng.below(4);
  const std::size_t nf = 1 + rng.below(4);
  const auto real = draw(rng, nr * width, 1.5);
  const auto fake = draw(rng, nf * width, 1.5);
  std::vector<std::size_t> labels(nr), targets(nf);
  for (auto& y : labels) y = rng.below(k);
  for (auto& y : targets) y = rng.below(k);

  auto eval = [&](const std::vector<double>& r, const std::vector<double>& f) {
    return model_losses(variant, k, rows(r, width), labels, rows(f, width), targets);
  };
  const LossBundle b = eval(real, fake);
  const auto d_real = flatten(b.d_grads_real);
  const auto d_fake = flatten(b.d_grads_fake);
  const auto g_fake = flatten(b.g_grads_fake);

  const auto fd_d_real = oracle::gradient(
      [&](const std::vector<double>& x) { return eval(x, fake).d_loss; }, real);
  const auto fd_d_fake = oracle::gradient(
      [&](const std::vector<double>& x) { return eval(real, x).d_loss; }, fake);
  const auto fd_g_fake = oracle::gradient(
      [&](const std::vector<double>& x) { return eval(real, x).g_loss; }, fake);

  auto rel = [](const std::vector<double>& a, const std::vector<double>& b) {
    return oracle::max_abs_diff(a, b) / std::max(oracle::max_abs(b), 1e-3);
  };
  EXPECT_LT(rel(d_real, fd_d_real), 1e-5) << to_string(variant.tag);
  EXPECT_LT(rel(d_fake, fd_d_fake), 1e-5) << to_string(variant.tag);
  EXPECT_LT(rel(g_fake, fd_g_fake), 1e-5) << to_string(variant.tag);
  EXPECT_TRUE(std::isfinite(b.g_loss));
  EXPECT_TRUE(std::isfinite(b.d_loss));
}

}  // namespace

TEST(ModelVariant, LabelingRules) {
  EXPECT_THROW(ModelVariant::make(ModelTag::LabelGAN, Labeling::Predefined), ConfigError);
  EXPECT_THROW(ModelVariant::make(ModelTag::VanillaGAN, Labeling::Dynamic), ConfigError);
  EXPECT_THROW(ModelVariant::make(ModelTag::AMGAN, Labeling::NotApplicable), ConfigError);
  EXPECT_EQ(ModelVariant::make(ModelTag::LabelGAN, Labeling::NotApplicable).labeling,
            Labeling::NotApplicable);
  EXPECT_TRUE(ModelVariant::make(ModelTag::AMGAN, Labeling::Dynamic).takes_target_class());
  EXPECT_FALSE(ModelVariant::make(ModelTag::LabelGAN, Labeling::NotApplicable).takes_target_class());
  ModelVariant v = ModelVariant::make(ModelTag::ACGANStar, Labeling::Predefined);
  v.aux_weight = -1.0;
  EXPECT_THROW(v.validate(), ConfigError);
}

TEST(ModelVariant, NamesRoundTrip) {
  for (auto tag : {ModelTag::VanillaGAN, ModelTag::GANStar, ModelTag::LabelGAN,
                   ModelTag::ACGANStar, ModelTag::ACGANStarPlus, ModelTag::AMGAN}) {
    EXPECT_EQ(parse_model_tag(to_string(tag)), tag);
  }
  for (auto l : {Labeling::Dynamic, Labeling::Predefined, Labeling::NotApplicable}) {
    EXPECT_EQ(parse_labeling(to_string(l)), l);
  }
  EXPECT_FALSE(parse_model_tag("wgan").has_value());
  EXPECT_EQ(head_width(ModelTag::VanillaGAN, 8), 2u);
  EXPECT_EQ(head_width(ModelTag::AMGAN, 8), 9u);
  EXPECT_EQ(head_width(ModelTag::ACGANStarPlus, 8), 10u);
}

TEST(VanillaGan, Examples) {
  const std::vector<double> half{0.5};
  const auto b = vanilla_gan_losses(half, half, GeneratorLoss::NegLogD);
  EXPECT_NEAR(b.g_loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(b.d_loss, 2.0 * std::log(2.0), 1e-15);
  const auto only_real = vanilla_gan_losses(half, {}, GeneratorLoss::NegLogD);
  EXPECT_NEAR(only_real.d_loss, std::log(2.0), 1e-15);
  const auto sat = vanilla_gan_losses({}, half, GeneratorLoss::LogOneMinusD);
  EXPECT_NEAR(sat.g_loss, std::log(0.5), 1e-15);
  EXPECT_THROW(vanilla_gan_losses(std::span<const double>{}, std::span<const double>{}, GeneratorLoss::NegLogD), EmptyBatch);
  const std::vector<double> bad{1.5};
  EXPECT_THROW(vanilla_gan_losses(bad, {}, GeneratorLoss::NegLogD), InvalidInput);
}

TEST(LabelGan, Examples) {
  const std::vector<LogitVector> fake{
      LogitVector({std::log(0.25), std::log(0.25), std::log(0.5)})};
  EXPECT_NEAR(labelgan_losses({}, {}, fake).g_loss, std::log(2.0), 1e-14);

  const std::vector<LogitVector> sure{LogitVector({0.0, 800.0, 0.0})};
  const std::vector<std::size_t> y1{1};
  EXPECT_NEAR(labelgan_losses(sure, y1, {}).d_loss, 0.0, 1e-300);

  const std::vector<std::size_t> bad{2};
  EXPECT_THROW(labelgan_losses(sure, bad, {}), LabelError);
}

TEST(LabelGan, GeneratorLossIsLabelganTermForAnyTarget) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    RandomStream rng(5, "test-labelgan-term", i);
    const std::size_t k = 2 + rng.below(8);
    const auto l = draw(rng, k + 1, 2.0);
    const std::vector<LogitVector> fake{LogitVector(l)};
    const double g = labelgan_losses({}, {}, fake).g_loss;
    const auto p = softmax(LogitVector(l), Layout::RealPlusFake);
    for (std::size_t y = 0; y < k; ++y) {
      EXPECT_NEAR(g, decomposed_cross_entropy(TargetVector::one_hot_full(y, k), p).labelgan_term,
                  1e-12);
    }
  }
}

TEST(AmGan, Examples) {
  const std::vector<LogitVector> at_target{LogitVector({0.0, 900.0, 0.0})};
  const std::vector<std::size_t> y{1};
  EXPECT_NEAR(amgan_losses({}, {}, at_target, y).g_loss, 0.0, 1e-300);
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(amgan_losses({}, {}, at_target, bad), LabelError);
}

TEST(AmGan, DiscriminatorLossEqualsLabelGanAndGeneratorLossSplits) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    RandomStream rng(5, "test-amgan", i);
    const std::size_t k = 2 + rng.below(8);
    std::vector<LogitVector> real, fake;
    std::vector<std::size_t> labels, targets;
    for (int s = 0; s < 3; ++s) {
      real.emplace_back(draw(rng, k + 1, 2.0));
      fake.emplace_back(draw(rng, k + 1, 2.0));
      labels.push_back(rng.below(k));
      targets.push_back(rng.below(k));
    }
    const auto am = amgan_losses(real, labels, fake, targets);
    const auto lab = labelgan_losses(real, labels, fake);
    EXPECT_EQ(am.d_loss, lab.d_loss);

    double split = 0.0;
    for (std::size_t s = 0; s < fake.size(); ++s) {
      const auto parts = decomposed_cross_entropy(TargetVector::one_hot_full(targets[s], k),
                                                  softmax(fake[s], Layout::RealPlusFake));
      split += (parts.aux_classifier_term + parts.labelgan_term) / 3.0;
    }
    EXPECT_NEAR(am.g_loss, split, 1e-10);
  }
}

TEST(AcganStar, Examples) {
  // C = u(y) and D_r = 1.
  const std::vector<AcganLogits> fake{{LogitVector({800.0, 0.0}), LogitVector({0.0, 900.0, 0.0})}};
  const std::vector<std::size_t> y{1};
  EXPECT_NEAR(acgan_star_losses({}, {}, fake, y).g_loss, 0.0, 1e-300);
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW(acgan_star_losses({}, {}, fake, bad), LabelError);
}

TEST(AcganStar, HierarchicalForm) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    RandomStream rng(5, "test-acgan-hier", i);
    const std::size_t k = 2 + rng.below(10);
    const auto b = draw(rng, 2, 2.0);
    const auto c = draw(rng, k, 2.0);
    const std::size_t y = rng.below(k);
    const std::vector<AcganLogits> fake{{LogitVector(b), LogitVector(c)}};
    const std::vector<std::size_t> t{y};
    const double g = acgan_star_losses({}, {}, fake, t).g_loss;
    const auto d2 = oracle::softmax(b);
    const auto cp = oracle::softmax(c);
    EXPECT_NEAR(g, -std::log(d2[0] * cp[y]), 1e-10);
  }
}

TEST(AcganStar, FakeAuxAndUniformTerms) {
  RandomStream rng(5, "test-acgan-terms");
  const std::size_t k = 4;
  const LogitVector b(draw(rng, 2, 1.0)), c(draw(rng, k, 1.0));
  const std::vector<AcganLogits> fake{{b, c}};
  const std::vector<std::size_t> t{2};
  const auto base = acgan_star_losses({}, {}, fake, t);
  AcganOptions with_aux;
  with_aux.include_fake_aux = true;
  const auto aux = acgan_star_losses({}, {}, fake, t, with_aux);
  const auto cp = softmax(c);
  EXPECT_NEAR(aux.d_loss - base.d_loss, -std::log(cp[2]), 1e-12);
  AcganOptions plus;
  plus.uniform_fake_aux = true;
  const auto pl = acgan_star_losses({}, {}, fake, t, plus);
  const std::vector<ProbVector> cps{cp};
  EXPECT_NEAR(pl.d_loss - base.d_loss, acgan_star_plus_extra(cps), 1e-12);
  EXPECT_EQ(pl.g_loss, base.g_loss);
}

TEST(AcganStarPlusExtra, Examples) {
  const std::vector<ProbVector> uni{ProbVector::uniform(5)};
  EXPECT_NEAR(acgan_star_plus_extra(uni), std::log(5.0), 1e-14);
  const std::vector<ProbVector> hot{ProbVector::one_hot(5, 1)};
  EXPECT_GT(acgan_star_plus_extra(hot), std::log(5.0));
  EXPECT_THROW(acgan_star_plus_extra(std::vector<ProbVector>{}), EmptyBatch);
  RandomStream rng(5, "test-plus-extra");
  std::vector<ProbVector> batch;
  double direct = 0.0;
  for (int i = 0; i < 6; ++i) {
    const auto l = draw(rng, 5, 2.0);
    batch.push_back(softmax(LogitVector(l)));
    const auto p = oracle::softmax(l);
    for (double v : p) direct -= std::log(v) / 5.0 / 6.0;
  }
  EXPECT_NEAR(acgan_star_plus_extra(batch), direct, 1e-12);
}

TEST(LossBundle, GradientsMatchFiniteDifferencesForEveryVariant) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (auto tag : {ModelTag::VanillaGAN, ModelTag::GANStar, ModelTag::LabelGAN,
                     ModelTag::ACGANStar, ModelTag::ACGANStarPlus, ModelTag::AMGAN}) {
      ModelVariant v;
      v.tag = tag;
      v.labeling = (tag == ModelTag::VanillaGAN || tag == ModelTag::LabelGAN)
                       ? Labeling::NotApplicable
                       : Labeling::Dynamic;
      if (tag == ModelTag::VanillaGAN && seed % 2 == 1) {
        v.generator_loss = GeneratorLoss::LogOneMinusD;
        v.smoothing = {0.1, 0.2};
      }
      if (tag == ModelTag::ACGANStar && seed % 2 == 1) {
        v.aux_weight = kReducedAuxWeight;
        v.include_fake_aux = true;
      }
      check_bundle_gradients(v, 2 + seed % 5, seed);
    }
  }
}

TEST(ClassAwareGradient, Examples) {
  const auto g = class_aware_gradient(ProbVector({0.3, 0.3, 0.4}, Layout::RealPlusFake));
  EXPECT_DOUBLE_EQ(g.alpha[0], 0.5);
  EXPECT_DOUBLE_EQ(g.alpha[1], 0.5);
  EXPECT_EQ(g.alpha[2], -1.0);
  EXPECT_NEAR(g.overall_magnitude, 0.4, 1e-15);
  EXPECT_NEAR(g.per_logit[0], 0.2, 1e-15);
  EXPECT_NEAR(g.per_logit[1], 0.2, 1e-15);
  EXPECT_NEAR(g.per_logit[2], -0.4, 1e-15);

  const auto zero = class_aware_gradient(ProbVector::one_hot(3, 0, Layout::RealPlusFake));
  EXPECT_EQ(zero.overall_magnitude, 0.0);
  for (double v : zero.per_logit) EXPECT_EQ(v, 0.0);

  EXPECT_THROW(class_aware_gradient(ProbVector::one_hot(3, 2, Layout::RealPlusFake)),
               DegenerateError);
  EXPECT_THROW(class_aware_gradient(ProbVector::uniform(3)), LayoutError);
}

TEST(ClassAwareGradient, MatchesLabelGanGradient) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    RandomStream rng(5, "test-class-aware", i);
    const std::size_t k = 2 + rng.below(10);
    const auto l = draw(rng, k + 1, 2.0);
    const auto p = softmax(LogitVector(l), Layout::RealPlusFake);
    const auto g = class_aware_gradient(p);
    const auto fd = oracle::gradient(
        [&](const std::vector<double>& x) {
          const auto q = oracle::softmax(x);
          double r = 0.0;
          for (std::size_t j = 0; j < k; ++j) r += q[j];
          return -std::log(r);
        },
        l, 1e-3);
    const std::vector<LogitVector> fake{LogitVector(l)};
    const auto exact = labelgan_losses({}, {}, fake).g_grads_fake[0];
    double real_sum = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      EXPECT_NEAR(g.per_logit[j], -fd[j], 1e-8);
      EXPECT_NEAR(g.per_logit[j], -exact[j], 1e-10);
      if (j < k) {
        EXPECT_NEAR(g.per_logit[j], g.overall_magnitude * g.alpha[j], 0.0);
        real_sum += g.per_logit[j];
      }
    }
    EXPECT_EQ(g.overall_magnitude, 1.0 - p.real_mass());
    EXPECT_NEAR(real_sum, g.overall_magnitude, 1e-10);
    EXPECT_NEAR(std::accumulate(g.per_logit.begin(), g.per_logit.end(), 0.0), 0.0, 1e-10);
  }
}

TEST(DynamicLabel, Examples) {
  EXPECT_EQ(dynamic_label(ProbVector({0.1, 0.7, 0.2}, Layout::RealPlusFake)), 1u);
  EXPECT_EQ(dynamic_label(ProbVector({0.3, 0.3, 0.4}, Layout::RealPlusFake)), 0u);
  EXPECT_EQ(dynamic_label(ProbVector({0.05, 0.05, 0.9}, Layout::RealPlusFake)), 0u);
}

TEST(DynamicLabel, InvariantUnderMonotoneTransformOfRealLogits) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    RandomStream rng(5, "test-dynamic-label", i);
    const std::size_t k = 2 + rng.below(10);
    auto l = draw(rng, k + 1, 2.0);
    const std::size_t before = dynamic_label(softmax(LogitVector(l), Layout::RealPlusFake));
    for (std::size_t j = 0; j < k; ++j) l[j] = 3.0 * l[j] + 1.0 + std::tanh(l[j]);
    l[k] = 5.0 * rng.normal();
    EXPECT_EQ(dynamic_label(softmax(LogitVector(l), Layout::RealPlusFake)), before);
  }
}

TEST(CatganTerms, Examples) {
  const std::vector<ProbVector> fake{ProbVector::one_hot(4, 3, Layout::RealPlusFake)};
  EXPECT_EQ(catgan_style_losses(fake).am_fake_suppression, 0.0);
  const std::vector<ProbVector> uni{ProbVector::uniform(4, Layout::RealPlusFake)};
  EXPECT_NEAR(catgan_style_losses(uni).cat_entropy, -std::log(4.0), 1e-14);
  EXPECT_EQ(catgan_style_losses(uni).am_smoothed_uniform, 0.0);
  EXPECT_THROW(catgan_style_losses(std::vector<ProbVector>{}), EmptyBatch);
}

TEST(CatganTerms, MatchDirectEvaluation) {
  RandomStream rng(5, "test-catgan");
  const std::size_t k = 5;
  const double m = 0.1;
  std::vector<ProbVector> batch;
  double ent = 0.0, supp = 0.0, unif = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto p = oracle::softmax(draw(rng, k + 1, 2.0));
    batch.emplace_back(p, Layout::RealPlusFake);
    ent -= oracle::entropy(p) / 10.0;
    const double r = 1.0 - p[k];
    supp += -(m * std::log(r) + (1.0 - m) * std::log(p[k])) / 10.0;
    for (std::size_t j = 0; j < k; ++j) unif += -m * std::log(p[j] / r) / k / 10.0;
  }
  const auto t = catgan_style_losses(batch, m);
  EXPECT_NEAR(t.cat_entropy, ent, 1e-12);
  EXPECT_NEAR(t.am_fake_suppression, supp, 1e-12);
  EXPECT_NEAR(t.am_smoothed_uniform, unif, 1e-12);
}

TEST(UnlabeledTerms, Examples) {
  const std::vector<ProbVector> hot{ProbVector::one_hot(4, 0, Layout::RealPlusFake),
                                    ProbVector::one_hot(4, 2, Layout::RealPlusFake)};
  const ProbVector ref({0.5, 0.0, 0.5});
  const auto t = unlabeled_losses(hot, ref);
  EXPECT_EQ(t.per_sample_fit, 0.0);
  EXPECT_NEAR(t.batch_ref_fit, entropy(ref), 1e-15);
  EXPECT_THROW(unlabeled_losses(std::vector<ProbVector>{}, ref), EmptyBatch);
}

TEST(UnlabeledTerms, MatchDirectEvaluation) {
  RandomStream rng(5, "test-unlabeled");
  const std::size_t k = 4;
  std::vector<ProbVector> batch;
  std::vector<double> mean(k + 1, 0.0);
  double fit = 0.0;
  for (int i = 0; i < 8; ++i) {
    const auto p = oracle::softmax(draw(rng, k + 1, 2.0));
    batch.emplace_back(p, Layout::RealPlusFake);
    const auto best = std::max_element(p.begin(), p.begin() + k) - p.begin();
    fit -= std::log(p[static_cast<std::size_t>(best)]) / 8.0;
    for (std::size_t j = 0; j <= k; ++j) mean[j] += p[j] / 8.0;
  }
  const auto ref = oracle::softmax(draw(rng, k, 1.0));
  double ref_fit = 0.0;
  for (std::size_t j = 0; j < k; ++j) ref_fit -= ref[j] * std::log(mean[j] / (1.0 - mean[k]));
  const auto t = unlabeled_losses(batch, ProbVector(ref));
  EXPECT_NEAR(t.per_sample_fit, fit, 1e-12);
  EXPECT_NEAR(t.batch_ref_fit, ref_fit, 1e-12);
}

TEST(Smoothing, StationaryPointsAndSigns) {
  EXPECT_EQ(smoothing_real_logit_gradient(0.1, 0.1, GeneratorLoss::LogOneMinusD), 0.0);
  EXPECT_EQ(smoothing_real_logit_gradient(1.0 - 0.2, 0.2, GeneratorLoss::NegLogD), 0.0);
  EXPECT_NEAR(smoothing_real_logit_gradient(0.3, 0.0, GeneratorLoss::NegLogD), 0.7, 1e-15);
  for (int i = 1; i < 1000; ++i) {
    const double d = i / 1000.0;
    const double a = smoothing_real_logit_gradient(d, 0.0, GeneratorLoss::LogOneMinusD);
    const double b = smoothing_real_logit_gradient(d, 0.0, GeneratorLoss::NegLogD);
    EXPECT_GT(a * b, 0.0) << d;
  }
}

TEST(Smoothing, MatchesFiniteDifferencesOfSmoothedLoss) {
  for (double lambda : {0.0, 0.1, 0.3}) {
    for (int i = 1; i < 100; ++i) {
      const double d = i / 100.0;
      // Logits [log d, log(1-d)] produce D_r = d.
      const std::vector<double> l{std::log(d), std::log(1.0 - d)};
      const auto neg_log_d = [&](const std::vector<double>& x) {
        const auto p = oracle::softmax(x);
        return -((1.0 - lambda) * std::log(p[0]) + lambda * std::log(p[1]));
      };
      const auto log_one_minus_d = [&](const std::vector<double>& x) {
        const auto p = oracle::softmax(x);
        return lambda * std::log(p[0]) + (1.0 - lambda) * std::log(p[1]);
      };
      EXPECT_NEAR(smoothing_real_logit_gradient(d, lambda, GeneratorLoss::NegLogD),
                  -oracle::partial(neg_log_d, l, 0), 1e-8);
      EXPECT_NEAR(smoothing_real_logit_gradient(d, lambda, GeneratorLoss::LogOneMinusD),
                  -oracle::partial(log_one_minus_d, l, 0), 1e-8);
    }
  }
}
