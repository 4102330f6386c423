#include "amgan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include <json.hpp>

#include "amgan/losses.hpp"
#include "amgan/metrics.hpp"
#include "amgan/rng.hpp"

namespace amgan {

namespace {

class Property {
 public:
  Property(std::string name, double tolerance) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
    result_.passed = true;
  }

  void record(double error, const std::string& where) {
    ++result_.instances;
    if (std::isnan(error) || error > result_.worst_error) {
      result_.worst_error = std::isnan(error) ? error : std::max(result_.worst_error, error);
    }
    if (!(error <= result_.tolerance) && result_.passed) {
      result_.passed = false;
      std::ostringstream msg;
      msg << where << ": error " << error;
      result_.detail = msg.str();
    }
  }

  void fail(const std::string& why) {
    ++result_.instances;
    if (result_.passed) result_.detail = why;
    result_.passed = false;
  }

  PropertyResult finish() { return std::move(result_); }

 private:
  PropertyResult result_;
};

std::string instance(std::size_t i) { return "instance " + std::to_string(i); }

std::vector<double> random_logits(RandomStream& rng, std::size_t n, double scale) {
  std::vector<double> l(n);
  for (double& x : l) x = scale * rng.normal();
  return l;
}

ProbVector random_probs(RandomStream& rng, std::size_t n, double scale,
                        Layout layout = Layout::RealOnly) {
  return softmax(LogitVector(random_logits(rng, n, scale)), layout);
}

std::size_t between(RandomStream& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

double ce_of_logits(const TargetVector& t, std::vector<double> logits) {
  return cross_entropy(t, softmax(LogitVector(std::move(logits))));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

PropertyResult ce_gradient_property(const VerifyOptions& opt) {
  Property p("ce-gradient-vs-finite-difference", 1e-6);
  const double h = 1e-5;
  for (std::size_t i = 0; i < 1000; ++i) {
    RandomStream rng(opt.seed, "verify-ce-gradient", i);
    const std::size_t n = between(rng, 2, 16);
    const auto logits = random_logits(rng, n, 2.0);
    const TargetVector t = (i % 2 == 0)
                               ? TargetVector::one_hot_real(rng.below(n), n)
                               : TargetVector::distribution(random_probs(rng, n, 1.5));
    const auto grad = opt.ce_gradient(t, LogitVector(logits));
    if (grad.size() != n) {
      p.fail(instance(i) + ": gradient has wrong length");
      continue;
    }
    // ce_logit_gradient returns the negative gradient.
    std::vector<double> diff(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto up = logits, down = logits;
      up[j] += h;
      down[j] -= h;
      const double fd = (ce_of_logits(t, up) - ce_of_logits(t, down)) / (2.0 * h);
      diff[j] = -grad[j] - fd;
    }
    p.record(max_abs(diff) / std::max(max_abs(grad), 1e-3), instance(i));
  }
  return p.finish();
}

PropertyResult decomposition_property(const VerifyOptions& opt) {
  Property p("ce-decomposition-sum", 1e-10);
  for (std::size_t i = 0; i < 1000; ++i) {
    RandomStream rng(opt.seed, "verify-decomposition", i);
    const std::size_t k = between(rng, 2, 12);
    const ProbVector drawn = random_probs(rng, k + 1, 2.0);
    std::vector<double> probs(drawn.values().begin(), drawn.values().end());
    if (i % 10 == 0) {
      std::fill(probs.begin(), probs.end(), 0.0);
      probs[k] = 1.0;
    } else if (i % 10 == 1) {
      probs[k] = 0.0;
      double total = 0.0;
      for (double x : probs) total += x;
      for (double& x : probs) x /= total;
    }
    const ProbVector pv(probs, Layout::RealPlusFake);
    const TargetVector t = (i % 3 == 0)
                               ? TargetVector::one_hot_full(rng.below(k + 1), k)
                               : TargetVector::distribution(
                                     random_probs(rng, k + 1, 1.0, Layout::RealPlusFake));
    const auto parts = decomposed_cross_entropy(t, pv);
    const double direct = cross_entropy(t, pv);
    const double scale = std::max(1.0, std::abs(direct));
    const double err = std::max(std::abs(parts.total - direct),
                                std::abs(parts.aux_classifier_term + parts.labelgan_term - direct));
    p.record(err / scale, instance(i));
  }
  return p.finish();
}

PropertyResult commute_property(const VerifyOptions& opt) {
  Property p("expected-ce-commutes", 1e-10);
  for (std::size_t i = 0; i < 1000; ++i) {
    RandomStream rng(opt.seed, "verify-commute", i);
    const std::size_t k = between(rng, 2, 20);
    const std::size_t rows = between(rng, 1, 64);
    std::vector<ProbVector> batch;
    for (std::size_t r = 0; r < rows; ++r) batch.push_back(random_probs(rng, k, 2.0));
    const ProbVector ref = random_probs(rng, k, 1.0);
    const auto c = expected_ce_commutes(batch, ref);
    p.record(std::abs(c.mean_of_ce - c.ce_of_mean) / std::max(1.0, std::abs(c.mean_of_ce)),
             instance(i));
  }
  return p.finish();
}

ClassifierBatch random_batch(RandomStream& rng, std::size_t rows, std::size_t k) {
  std::vector<double> flat;
  flat.reserve(rows * k);
  const double sharpness = 0.5 + 4.0 * rng.uniform();
  for (std::size_t r = 0; r < rows; ++r) {
    const ProbVector row = random_probs(rng, k, sharpness);
    flat.insert(flat.end(), row.values().begin(), row.values().end());
  }
  return ClassifierBatch(k, std::move(flat));
}

// Also collects the entropy-decomposition residual of every report produced.
PropertyResult mode_score_property(const VerifyOptions& opt, Property& residuals) {
  Property p("mode-score-equals-inception-score", 1e-9);
  for (std::size_t i = 0; i < 1000; ++i) {
    RandomStream rng(opt.seed, "verify-mode-score", i);
    const std::size_t k = between(rng, 2, 20);
    const std::size_t rows = between(rng, 1, 256);
    const ClassifierBatch batch = random_batch(rng, rows, k);
    const ProbVector train = random_probs(rng, k, 1.0);
    const ScoreReport report = score_report(batch, train);
    p.record(std::abs(*report.mode_score - report.inception_score), instance(i));
    residuals.record(decomposition_residual(report), instance(i));
  }
  return p.finish();
}

PropertyResult identical_rows_property(const VerifyOptions& opt, Property& residuals) {
  Property p("identical-rows-score-one", 0.0);
  for (std::size_t i = 0; i < 200; ++i) {
    RandomStream rng(opt.seed, "verify-identical-rows", i);
    const std::size_t k = between(rng, 2, 20);
    const std::size_t rows = between(rng, 1, 300);
    const ProbVector row = random_probs(rng, k, 3.0);
    std::vector<double> flat;
    for (std::size_t r = 0; r < rows; ++r) {
      flat.insert(flat.end(), row.values().begin(), row.values().end());
    }
    const ScoreReport report = inception_score(ClassifierBatch(k, std::move(flat)));
    p.record(std::abs(report.inception_score - 1.0), instance(i));
    residuals.record(decomposition_residual(report), instance(i));
  }
  return p.finish();
}

PropertyResult am_floor_property(const VerifyOptions& opt, Property& residuals) {
  Property p("am-score-perfect-batch-is-zero", 1e-10);
  for (std::size_t i = 0; i < 200; ++i) {
    RandomStream rng(opt.seed, "verify-am-floor", i);
    const std::size_t k = between(rng, 2, 20);
    const std::size_t per_class = between(rng, 1, 20);
    std::vector<double> flat;
    for (std::size_t r = 0; r < k * per_class; ++r) {
      std::vector<double> row(k, 0.0);
      row[r % k] = 1.0;
      flat.insert(flat.end(), row.begin(), row.end());
    }
    const ScoreReport report = score_report(ClassifierBatch(k, std::move(flat)),
                                            ProbVector::uniform(k));
    p.record(std::abs(*report.am_score), instance(i));
    residuals.record(decomposition_residual(report), instance(i));
  }
  return p.finish();
}

double labelgan_g_loss(const std::vector<double>& logits) {
  return labelgan_losses({}, {}, std::vector<LogitVector>{LogitVector(logits)}).g_loss;
}

PropertyResult class_aware_property(const VerifyOptions& opt) {
  Property p("class-aware-gradient", 1e-8);
  const double h = 1e-3;
  for (std::size_t i = 0; i < 500; ++i) {
    RandomStream rng(opt.seed, "verify-class-aware", i);
    const std::size_t k = between(rng, 2, 12);
    const auto logits = random_logits(rng, k + 1, 2.0);
    const ProbVector probs = softmax(LogitVector(logits), Layout::RealPlusFake);
    const ClassAwareGradient cag = class_aware_gradient(probs);
    const auto bundle =
        labelgan_losses({}, {}, std::vector<LogitVector>{LogitVector(logits)});

    double err = std::abs(cag.overall_magnitude - (1.0 - probs.real_mass()));
    for (std::size_t j = 0; j <= k; ++j) {
      // Fourth-order central difference.
      auto at = [&](double step) {
        auto l = logits;
        l[j] += step;
        return labelgan_g_loss(l);
      };
      const double fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      err = std::max(err, std::abs(cag.per_logit[j] + fd));
      err = std::max(err, std::abs(cag.per_logit[j] + bundle.g_grads_fake[0][j]));
    }
    p.record(err, instance(i));
  }
  return p.finish();
}

PropertyResult acgan_hierarchy_property(const VerifyOptions& opt) {
  Property p("acgan-hierarchical-form", 1e-10);
  for (std::size_t i = 0; i < 500; ++i) {
    RandomStream rng(opt.seed, "verify-acgan-hierarchy", i);
    const std::size_t k = between(rng, 2, 12);
    const LogitVector binary(random_logits(rng, 2, 2.0));
    const LogitVector classifier(random_logits(rng, k, 2.0));
    const std::size_t y = rng.below(k);
    const std::vector<AcganLogits> fake{{binary, classifier}};
    const std::vector<std::size_t> target{y};
    const double g = acgan_star_losses({}, {}, fake, target).g_loss;

    const ProbVector d2 = softmax(binary);
    const ProbVector c = softmax(classifier);
    std::vector<double> joint(k + 1);
    for (std::size_t j = 0; j < k; ++j) joint[j] = d2[0] * c[j];
    joint[k] = d2[1];
    const double hier = cross_entropy(TargetVector::one_hot_full(y, k),
                                      ProbVector(joint, Layout::RealPlusFake));
    p.record(std::abs(g - hier) / std::max(1.0, std::abs(hier)), instance(i));
  }
  return p.finish();
}

PropertyResult amgan_split_property(const VerifyOptions& opt) {
  Property p("amgan-loss-splits-into-aux-and-labelgan", 1e-10);
  for (std::size_t i = 0; i < 500; ++i) {
    RandomStream rng(opt.seed, "verify-amgan-split", i);
    const std::size_t k = between(rng, 2, 12);
    const auto logits = random_logits(rng, k + 1, 2.0);
    const std::size_t y = rng.below(k);
    const std::vector<LogitVector> fake{LogitVector(logits)};
    const std::vector<std::size_t> target{y};
    const double g = amgan_losses({}, {}, fake, target).g_loss;
    const auto parts =
        decomposed_cross_entropy(TargetVector::one_hot_full(y, k),
                                 softmax(LogitVector(logits), Layout::RealPlusFake));
    p.record(std::abs(g - (parts.aux_classifier_term + parts.labelgan_term)), instance(i));
  }
  return p.finish();
}

PropertyResult smoothing_property() {
  Property p("smoothing-stationary-points", 0.0);
  for (std::size_t i = 1; i < 50; ++i) {
    const double lambda = 0.01 * static_cast<double>(i);
    p.record(std::abs(smoothing_real_logit_gradient(lambda, lambda,
                                                    GeneratorLoss::LogOneMinusD)),
             "lambda " + std::to_string(lambda));
    p.record(std::abs(smoothing_real_logit_gradient(1.0 - lambda, lambda,
                                                    GeneratorLoss::NegLogD)),
             "lambda " + std::to_string(lambda));
  }
  for (std::size_t i = 1; i <= 999; ++i) {
    const double d = 0.001 * static_cast<double>(i);
    const double a = smoothing_real_logit_gradient(d, 0.0, GeneratorLoss::LogOneMinusD);
    const double b = smoothing_real_logit_gradient(d, 0.0, GeneratorLoss::NegLogD);
    p.record((a > 0.0) == (b > 0.0) && (a < 0.0) == (b < 0.0) ? 0.0 : 1.0,
             "D_r " + std::to_string(d));
  }
  return p.finish();
}

PropertyResult uniform_mode_drop_property(const VerifyOptions& opt) {
  Property p("mode-drop-uniform-equals-log-kept", 1e-9);
  for (std::size_t n : {std::size_t{10}, std::size_t{100}}) {
    ModeDropConfig cfg;
    cfg.n_points = n;
    cfg.trials = n == 10 ? 200 : 20;
    cfg.seed = opt.seed;
    for (const ModeDropPoint& pt : mode_drop_simulation(cfg)) {
      p.record(std::abs(pt.mean - std::log(static_cast<double>(pt.kept))),
               "N=" + std::to_string(n) + " kept=" + std::to_string(pt.kept));
    }
  }
  return p.finish();
}

PropertyResult gaussian_mode_drop_property(const VerifyOptions& opt) {
  Property p("mode-drop-gaussian-non-decreasing", 0.0);
  ModeDropConfig cfg;
  cfg.density = ClassDensity::Gaussian;
  cfg.trials = 1000;
  cfg.seed = opt.seed;
  const auto series = mode_drop_simulation(cfg);
  for (std::size_t i = 1; i < series.size(); ++i) {
    p.record(std::max(0.0, series[i - 1].mean - series[i].mean),
             "kept=" + std::to_string(series[i].kept));
  }
  return p.finish();
}

PropertyResult basic_bounds_property(const VerifyOptions& opt) {
  Property p("kl-and-entropy-bounds", 1e-12);
  for (std::size_t i = 0; i < 1000; ++i) {
    RandomStream rng(opt.seed, "verify-bounds", i);
    const std::size_t n = between(rng, 2, 20);
    const ProbVector a = random_probs(rng, n, 3.0);
    const ProbVector b = random_probs(rng, n, 3.0);
    double sum = 0.0;
    for (double x : a.values()) sum += x;
    const double h = entropy(a);
    double err = std::abs(sum - 1.0);
    err = std::max(err, std::max(0.0, -kl_divergence(a, b)));
    err = std::max(err, std::max(0.0, -h));
    err = std::max(err, std::max(0.0, h - std::log(static_cast<double>(n))));
    err = std::max(err, std::abs(kl_divergence(a, a)));
    p.record(err, instance(i));
  }
  return p.finish();
}

template <typename F>
PropertyResult guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    PropertyResult r;
    r.name = name;
    r.passed = false;
    r.worst_error = std::nan("");
    r.detail = std::string("threw: ") + e.what();
    return r;
  }
}

}  // namespace

bool VerifyReport::passed() const noexcept {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& r) { return r.passed; });
}

VerifyReport run_verify(const VerifyOptions& options) {
  VerifyReport report;
  report.seed = options.seed;
  auto& out = report.properties;
  out.push_back(guarded("ce-gradient-vs-finite-difference",
                        [&] { return ce_gradient_property(options); }));
  out.push_back(guarded("ce-decomposition-sum", [&] { return decomposition_property(options); }));
  out.push_back(guarded("expected-ce-commutes", [&] { return commute_property(options); }));

  Property residuals("entropy-decomposition-of-inception-score", 1e-9);
  out.push_back(guarded("mode-score-equals-inception-score",
                        [&] { return mode_score_property(options, residuals); }));
  out.push_back(guarded("identical-rows-score-one",
                        [&] { return identical_rows_property(options, residuals); }));
  out.push_back(guarded("am-score-perfect-batch-is-zero",
                        [&] { return am_floor_property(options, residuals); }));
  out.push_back(residuals.finish());

  out.push_back(guarded("class-aware-gradient", [&] { return class_aware_property(options); }));
  out.push_back(guarded("acgan-hierarchical-form",
                        [&] { return acgan_hierarchy_property(options); }));
  out.push_back(guarded("amgan-loss-splits-into-aux-and-labelgan",
                        [&] { return amgan_split_property(options); }));
  out.push_back(guarded("smoothing-stationary-points", [] { return smoothing_property(); }));
  out.push_back(guarded("mode-drop-uniform-equals-log-kept",
                        [&] { return uniform_mode_drop_property(options); }));
  out.push_back(guarded("mode-drop-gaussian-non-decreasing",
                        [&] { return gaussian_mode_drop_property(options); }));
  out.push_back(guarded("kl-and-entropy-bounds", [&] { return basic_bounds_property(options); }));
  return report;
}

std::string verify_report_json(const VerifyReport& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed();
  j["seed"] = report.seed;
  auto& props = j["properties"] = nlohmann::ordered_json::array();
  for (const auto& r : report.properties) {
    nlohmann::ordered_json e;
    e["name"] = r.name;
    e["passed"] = r.passed;
    // JSON has no NaN; a property that threw reports null.
    if (std::isnan(r.worst_error)) {
      e["worst_error"] = nullptr;
    } else {
      e["worst_error"] = r.worst_error;
    }
    e["tolerance"] = r.tolerance;
    e["instances"] = r.instances;
    if (!r.detail.empty()) e["detail"] = r.detail;
    props.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace amgan
