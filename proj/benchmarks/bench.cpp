#include <benchmark/benchmark.h>

#include <vector>

#include <amgan/losses.hpp>
#include <amgan/metrics.hpp>
#include <amgan/mlp.hpp>
#include <amgan/prob.hpp>
#include <amgan/rng.hpp>
#include <amgan/train.hpp>

using namespace amgan;

namespace {

std::vector<double> logits(std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed, "bench-logits");
  std::vector<double> l(n);
  for (double& v : l) v = 3.0 * rng.normal();
  return l;
}

void BM_SoftmaxCrossEntropy(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const LogitVector l(logits(n, 1));
  const TargetVector t = TargetVector::one_hot_real(0, n);
  for (auto _ : state) {
    const ProbVector p = softmax(l);
    benchmark::DoNotOptimize(cross_entropy(t, p));
    benchmark::DoNotOptimize(ce_logit_gradient(t, l));
  }
}
BENCHMARK(BM_SoftmaxCrossEntropy)->Arg(9)->Arg(101)->Arg(1001);

void BM_AmganLosses(benchmark::State& state) {
  const std::size_t k = 8, n = static_cast<std::size_t>(state.range(0));
  std::vector<LogitVector> real, fake;
  std::vector<std::size_t> labels, targets;
  for (std::size_t i = 0; i < n; ++i) {
    real.emplace_back(logits(k + 1, 2 * i));
    fake.emplace_back(logits(k + 1, 2 * i + 1));
    labels.push_back(i % k);
    targets.push_back((i * 3) % k);
  }
  for (auto _ : state) benchmark::DoNotOptimize(amgan_losses(real, labels, fake, targets));
}
BENCHMARK(BM_AmganLosses)->Arg(128);

void BM_InceptionScore(benchmark::State& state) {
  const std::size_t k = 10, n = static_cast<std::size_t>(state.range(0));
  std::vector<double> flat;
  for (std::size_t i = 0; i < n; ++i) {
    const ProbVector p = softmax(LogitVector(logits(k, i)));
    flat.insert(flat.end(), p.values().begin(), p.values().end());
  }
  const ClassifierBatch batch(k, flat);
  const ProbVector uniform(std::vector<double>(k, 1.0 / k));
  for (auto _ : state) benchmark::DoNotOptimize(score_report(batch, uniform));
}
BENCHMARK(BM_InceptionScore)->Arg(1000)->Arg(10000);

void BM_ModeDrop(benchmark::State& state) {
  ModeDropConfig cfg;
  cfg.n_points = static_cast<std::size_t>(state.range(0));
  cfg.density = ClassDensity::Gaussian;
  cfg.trials = 100;
  for (auto _ : state) benchmark::DoNotOptimize(mode_drop_simulation(cfg));
}
BENCHMARK(BM_ModeDrop)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MlpForwardBackward(benchmark::State& state) {
  const std::size_t width = static_cast<std::size_t>(state.range(0));
  Mlp net({8, width, width, 2});
  RandomStream rng(1, "bench-init");
  net.initialize(rng);
  Matrix x(128, 8);
  for (double& v : x.data) v = rng.normal();
  const Matrix g(128, 2, 1.0);
  for (auto _ : state) {
    MlpCache cache;
    benchmark::DoNotOptimize(net.forward(x, &cache));
    benchmark::DoNotOptimize(net.backward(cache, g));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(128);

void BM_TrainSteps(benchmark::State& state) {
  TrainConfig cfg;
  cfg.variant = ModelVariant::make(ModelTag::AMGAN, Labeling::Dynamic);
  cfg.steps = static_cast<std::size_t>(state.range(0));
  cfg.eval_every = cfg.steps;
  cfg.eval_samples = 1000;
  cfg.check_gradients = false;
  for (auto _ : state) benchmark::DoNotOptimize(train(cfg));
}
BENCHMARK(BM_TrainSteps)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
