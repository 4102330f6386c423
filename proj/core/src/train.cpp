#include "amgan/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "amgan/diagnostics.hpp"
#include "amgan/error.hpp"
#include "amgan/metrics.hpp"
#include "amgan/mlp.hpp"
#include "amgan/rng.hpp"

namespace amgan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kGradCheckParams = 3;
constexpr std::size_t kInputGradSamples = 64;
constexpr double kFdStep = 1e-6;

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden,
                                     std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Matrix to_matrix(const std::vector<Point2>& points) {
  Matrix m(points.size(), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    m(i, 0) = points[i].x;
    m(i, 1) = points[i].y;
  }
  return m;
}

std::vector<Point2> to_points(const Matrix& m) {
  std::vector<Point2> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = {m(i, 0), m(i, 1)};
  return out;
}

std::vector<std::vector<double>> rows_of(const Matrix& m, std::size_t first, std::size_t count) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t r = first; r < first + count; ++r) {
    const auto row = m.row(r);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

Matrix stack(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
             std::size_t width) {
  Matrix m(a.size() + b.size(), width);
  std::size_t r = 0;
  for (const auto* part : {&a, &b}) {
    for (const auto& row : *part) {
      std::copy(row.begin(), row.end(), m.row(r).begin());
      ++r;
    }
  }
  return m;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// A batch of generator outputs together with what produced them.
struct FakeBatch {
  Matrix input;
  std::vector<std::size_t> condition;
  MlpCache cache;
  Matrix points;
};

class Trainer {
 public:
  explicit Trainer(const TrainConfig& config)
      : cfg_(config),
        k_(config.mixture.classes()),
        width_(head_width(config.variant.tag, k_)),
        generator_(layer_sizes(config.generator_input_size(), config.generator_hidden, 2)),
        discriminator_(layer_sizes(2, config.discriminator_hidden, width_)) {
    RandomStream g_init(cfg_.seed, "init-generator");
    RandomStream d_init(cfg_.seed, "init-discriminator");
    generator_.initialize(g_init);
    discriminator_.initialize(d_init);
  }

  TrainingTrace run() {
    TrainingTrace trace;
    trace.rng_algorithm = std::string(kRngAlgorithm);
    trace.snapshots.push_back(snapshot(0, &trace));
    for (std::size_t step = 1; step <= cfg_.steps; ++step) {
      try {
        discriminator_step(step);
        generator_step(step);
      } catch (const InvalidInput& e) {
        throw DivergedError(e.what(), static_cast<std::int64_t>(step));
      }
      if (!generator_.all_finite() || !discriminator_.all_finite()) {
        throw DivergedError("non-finite network parameters", static_cast<std::int64_t>(step));
      }
      if (step % cfg_.eval_every == 0 || step == cfg_.steps) {
        trace.snapshots.push_back(snapshot(step, &trace));
      }
    }
    return trace;
  }

 private:
  FakeBatch generate(std::size_t n, std::string_view purpose, std::uint64_t step) const {
    FakeBatch fake;
    RandomStream noise(cfg_.seed, purpose, step, 0);
    RandomStream cond(cfg_.seed, purpose, step, 1);
    const bool conditioned = cfg_.variant.labeling == Labeling::Predefined;
    fake.input = Matrix(n, cfg_.generator_input_size());
    for (std::size_t i = 0; i < n; ++i) {
      auto row = fake.input.row(i);
      for (std::size_t j = 0; j < cfg_.noise_dim; ++j) row[j] = noise.normal();
      if (conditioned) {
        const std::size_t y = sample_class(cfg_.mixture.weights(), cond);
        row[cfg_.noise_dim + y] = 1.0;
        fake.condition.push_back(y);
      }
    }
    fake.points = generator_.forward(fake.input, &fake.cache);
    return fake;
  }

  // Target class of each fake sample: the drawn condition under predefined
  // labeling, the discriminator's current favourite under dynamic labeling.
  std::vector<std::size_t> targets(const std::vector<std::vector<double>>& heads,
                                   const std::vector<std::size_t>& condition) const {
    switch (cfg_.variant.labeling) {
      case Labeling::Predefined: return condition;
      case Labeling::NotApplicable: return {};
      case Labeling::Dynamic: break;
    }
    std::vector<std::size_t> out;
    out.reserve(heads.size());
    for (const auto& h : heads) {
      if (head_layout(cfg_.variant.tag) == HeadLayout::RealPlusFake) {
        out.push_back(dynamic_label(softmax(LogitVector(h), Layout::RealPlusFake)));
      } else {
        out.push_back(dynamic_label(softmax(LogitVector(std::vector<double>(h.begin() + 2, h.end())))));
      }
    }
    return out;
  }

  double real_probability(std::span<const double> head) const {
    const LogitVector l(std::vector<double>(head.begin(), head.end()));
    if (head_layout(cfg_.variant.tag) == HeadLayout::RealPlusFake) {
      return softmax(l, Layout::RealPlusFake).real_mass();
    }
    return softmax(LogitVector({head[0], head[1]}))[0];
  }

  void discriminator_step(std::size_t step) {
    RandomStream data(cfg_.seed, "data", step);
    const LabeledPoints real = sample_mixture(cfg_.mixture, cfg_.batch_size, data);
    const FakeBatch fake = generate(cfg_.batch_size, "noise-discriminator", step);

    Matrix input = to_matrix(real.points);
    input.rows += fake.points.rows;
    input.data.insert(input.data.end(), fake.points.data.begin(), fake.points.data.end());

    MlpCache cache;
    const Matrix heads = discriminator_.forward(input, &cache);
    const auto real_heads = rows_of(heads, 0, cfg_.batch_size);
    const auto fake_heads = rows_of(heads, cfg_.batch_size, cfg_.batch_size);
    const auto fake_targets = targets(fake_heads, fake.condition);
    const LossBundle losses =
        model_losses(cfg_.variant, k_, real_heads, real.labels, fake_heads, fake_targets);
    if (!std::isfinite(losses.d_loss)) {
      throw DivergedError("non-finite discriminator loss", static_cast<std::int64_t>(step));
    }
    const MlpGradients g =
        discriminator_.backward(cache, stack(losses.d_grads_real, losses.d_grads_fake, width_));
    discriminator_.sgd_step(g.params, cfg_.lr_discriminator);
  }

  void generator_step(std::size_t step) {
    FakeBatch fake = generate(cfg_.batch_size, "noise-generator", step);
    MlpCache d_cache;
    const Matrix heads = discriminator_.forward(fake.points, &d_cache);
    const auto fake_heads = rows_of(heads, 0, heads.rows);
    const auto fake_targets = targets(fake_heads, fake.condition);
    const LossBundle losses = model_losses(cfg_.variant, k_, {}, {}, fake_heads, fake_targets);
    if (!std::isfinite(losses.g_loss)) {
      throw DivergedError("non-finite generator loss", static_cast<std::int64_t>(step));
    }
    const MlpGradients through_d =
        discriminator_.backward(d_cache, stack(losses.g_grads_fake, {}, width_), false);
    const MlpGradients g = generator_.backward(fake.cache, through_d.input);
    generator_.sgd_step(g.params, cfg_.lr_generator);
  }

  struct EvaluatedLosses {
    LossBundle bundle;
    std::vector<std::vector<double>> fake_heads;
    std::vector<std::size_t> targets;
  };

  EvaluatedLosses evaluate_losses(const Mlp& generator, const Mlp& discriminator,
                                  const LabeledPoints& real, const Matrix& gen_input,
                                  const std::vector<std::size_t>* fixed_targets,
                                  const std::vector<std::size_t>& condition) const {
    const Matrix points = generator.forward(gen_input);
    const Matrix real_out = discriminator.forward(to_matrix(real.points));
    const Matrix fake_out = discriminator.forward(points);
    EvaluatedLosses out;
    out.fake_heads = rows_of(fake_out, 0, fake_out.rows);
    out.targets = fixed_targets ? *fixed_targets : targets(out.fake_heads, condition);
    out.bundle = model_losses(cfg_.variant, k_, rows_of(real_out, 0, real_out.rows), real.labels,
                              out.fake_heads, out.targets);
    return out;
  }

  Snapshot snapshot(std::size_t step, TrainingTrace* trace) {
    Snapshot s;
    s.step = step;

    // Losses on a fresh minibatch at the current parameters.
    RandomStream data(cfg_.seed, "snapshot-data", step);
    const LabeledPoints real = sample_mixture(cfg_.mixture, cfg_.batch_size, data);
    const FakeBatch probe = generate(cfg_.batch_size, "snapshot-noise", step);
    const EvaluatedLosses eval =
        evaluate_losses(generator_, discriminator_, real, probe.input, nullptr, probe.condition);
    s.g_loss = eval.bundle.g_loss;
    s.d_loss = eval.bundle.d_loss;
    if (!std::isfinite(s.g_loss) || !std::isfinite(s.d_loss)) {
      throw DivergedError("non-finite loss at snapshot", static_cast<std::int64_t>(step));
    }
    if (cfg_.check_gradients) {
      s.grad_check_rel_err = gradient_check(step, real, probe, eval.targets);
      s.identity_check_err = identity_check(eval);
    } else {
      s.grad_check_rel_err = kNaN;
      s.identity_check_err = kNaN;
    }

    // Sample quality on a fixed evaluation batch.
    FakeBatch samples = generate(cfg_.eval_samples, "eval", 0);
    const std::vector<Point2> points = to_points(samples.points);
    const Matrix heads = discriminator_.forward(samples.points);
    std::vector<double> posterior;
    posterior.reserve(points.size() * k_);
    double d_r = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const ProbVector p = oracle_posterior(cfg_.mixture, points[i]);
      posterior.insert(posterior.end(), p.values().begin(), p.values().end());
      d_r += real_probability(heads.row(i));
    }
    s.d_r_mean_on_fake = d_r / static_cast<double>(points.size());
    const ScoreReport report =
        score_report(ClassifierBatch(k_, std::move(posterior)), cfg_.mixture.weights());
    s.inception_score = report.inception_score;
    s.am_score = *report.am_score;
    s.mode_coverage = mode_coverage(points, cfg_.mixture).covered;
    s.intra_mode_dispersion = intra_mode_dispersion(points, cfg_.mixture);
    s.input_grad_l1 = input_gradient_l1(samples);

    trace->final_samples = points;
    trace->final_assigned_labels.assign(points.size(), -1);
    if (cfg_.variant.labeling != Labeling::NotApplicable) {
      const auto assigned = targets(rows_of(heads, 0, heads.rows), samples.condition);
      for (std::size_t i = 0; i < assigned.size(); ++i) {
        trace->final_assigned_labels[i] = static_cast<long long>(assigned[i]);
      }
    }
    return s;
  }

  double input_gradient_l1(const FakeBatch& samples) const {
    const std::size_t n = std::min(kInputGradSamples, samples.input.rows);
    Matrix input(n, samples.input.cols);
    std::copy_n(samples.input.data.begin(), n * samples.input.cols, input.data.begin());
    MlpCache cache;
    generator_.forward(input, &cache);
    double total = 0.0;
    for (std::size_t out = 0; out < 2; ++out) {
      Matrix unit(n, 2);
      for (std::size_t r = 0; r < n; ++r) unit(r, out) = 1.0;
      const MlpGradients g = generator_.backward(cache, unit, false);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < cfg_.noise_dim; ++j) total += std::abs(g.input(r, j));
      }
    }
    return total / static_cast<double>(n);
  }

  // Compares the backpropagated parameter gradients of both losses against
  // central differences on a few randomly chosen parameters. Targets stay
  // fixed at their unperturbed values, matching how the update treats them.
  double gradient_check(std::size_t step, const LabeledPoints& real, const FakeBatch& probe,
                        const std::vector<std::size_t>& fixed_targets) const {
    // Analytic gradients, built exactly as the update steps build them.
    MlpCache d_cache;
    Matrix input = to_matrix(real.points);
    input.rows += probe.points.rows;
    input.data.insert(input.data.end(), probe.points.data.begin(), probe.points.data.end());
    const Matrix heads = discriminator_.forward(input, &d_cache);
    const auto real_heads = rows_of(heads, 0, real.points.size());
    const auto fake_heads = rows_of(heads, real.points.size(), probe.points.rows);
    const LossBundle losses =
        model_losses(cfg_.variant, k_, real_heads, real.labels, fake_heads, fixed_targets);
    const MlpGradients d_grad =
        discriminator_.backward(d_cache, stack(losses.d_grads_real, losses.d_grads_fake, width_));

    MlpCache fake_cache;
    discriminator_.forward(probe.points, &fake_cache);
    const MlpGradients through_d =
        discriminator_.backward(fake_cache, stack(losses.g_grads_fake, {}, width_), false);
    const MlpGradients g_grad = generator_.backward(probe.cache, through_d.input);

    RandomStream pick(cfg_.seed, "grad-check", step);
    double worst = 0.0;
    for (std::size_t c = 0; c < kGradCheckParams; ++c) {
      {
        Mlp d = discriminator_;
        const std::size_t idx = pick.below(d.parameters().size());
        const double base = d.parameters()[idx];
        d.parameters()[idx] = base + kFdStep;
        const double up =
            evaluate_losses(generator_, d, real, probe.input, &fixed_targets, probe.condition)
                .bundle.d_loss;
        d.parameters()[idx] = base - kFdStep;
        const double down =
            evaluate_losses(generator_, d, real, probe.input, &fixed_targets, probe.condition)
                .bundle.d_loss;
        worst = std::max(worst, relative_error(d_grad.params[idx], (up - down) / (2 * kFdStep)));
      }
      {
        Mlp g = generator_;
        const std::size_t idx = pick.below(g.parameters().size());
        const double base = g.parameters()[idx];
        g.parameters()[idx] = base + kFdStep;
        const double up =
            evaluate_losses(g, discriminator_, real, probe.input, &fixed_targets, probe.condition)
                .bundle.g_loss;
        g.parameters()[idx] = base - kFdStep;
        const double down =
            evaluate_losses(g, discriminator_, real, probe.input, &fixed_targets, probe.condition)
                .bundle.g_loss;
        worst = std::max(worst, relative_error(g_grad.params[idx], (up - down) / (2 * kFdStep)));
      }
    }
    return worst;
  }

  double identity_check(const EvaluatedLosses& eval) const {
    const auto& heads = eval.fake_heads;
    if (heads.empty()) return kNaN;
    const double n = static_cast<double>(heads.size());
    if (cfg_.variant.tag == ModelTag::LabelGAN) {
      double worst = 0.0;
      for (std::size_t i = 0; i < heads.size(); ++i) {
        const ProbVector d = softmax(LogitVector(heads[i]), Layout::RealPlusFake);
        if (d.real_mass() < kLogClamp) continue;
        const ClassAwareGradient cag = class_aware_gradient(d);
        for (std::size_t j = 0; j <= k_; ++j) {
          worst = std::max(worst, std::abs(cag.per_logit[j] + eval.bundle.g_grads_fake[i][j] * n));
        }
      }
      return worst;
    }
    if (cfg_.variant.tag == ModelTag::AMGAN) {
      double aux = 0.0, labelgan = 0.0;
      for (std::size_t i = 0; i < heads.size(); ++i) {
        const DecomposedCrossEntropy parts =
            decomposed_cross_entropy(TargetVector::one_hot_full(eval.targets[i], k_),
                                     softmax(LogitVector(heads[i]), Layout::RealPlusFake));
        aux += parts.aux_classifier_term;
        labelgan += parts.labelgan_term;
      }
      return std::abs(eval.bundle.g_loss - (aux + labelgan) / n);
    }
    return kNaN;
  }

  const TrainConfig& cfg_;
  std::size_t k_;
  std::size_t width_;
  Mlp generator_;
  Mlp discriminator_;
};

}  // namespace

void TrainConfig::validate() const {
  variant.validate();
  if (noise_dim == 0) throw ConfigError("noise_dim must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (eval_every == 0) throw ConfigError("eval_every must be positive");
  if (eval_samples == 0) throw ConfigError("eval_samples must be positive");
  for (double lr : {lr_generator, lr_discriminator}) {
    if (!std::isfinite(lr) || lr <= 0.0) throw ConfigError("learning rates must be positive");
  }
  for (const auto* hidden : {&generator_hidden, &discriminator_hidden}) {
    for (std::size_t h : *hidden) {
      if (h == 0) throw ConfigError("hidden layer sizes must be positive");
    }
  }
}

std::size_t TrainConfig::generator_input_size() const noexcept {
  return noise_dim + (variant.labeling == Labeling::Predefined ? mixture.classes() : 0);
}

TrainingTrace train(const TrainConfig& config) {
  config.validate();
  Trainer trainer(config);
  return trainer.run();
}

}  // namespace amgan
