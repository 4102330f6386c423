#pragma once

// Desk-scale adversarial training on a labeled 2D mixture. One discriminator
// step and one generator step per iteration, plain SGD, metric snapshots
// scored with the mixture's Bayes posterior as the reference classifier.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "amgan/losses.hpp"
#include "amgan/mixture.hpp"

namespace amgan {

struct TrainConfig {
  ModelVariant variant;
  MixtureSpec mixture = MixtureSpec::ring();
  std::size_t noise_dim = 8;
  std::vector<std::size_t> generator_hidden{64, 64};
  std::vector<std::size_t> discriminator_hidden{64, 64};
  std::size_t batch_size = 128;
  std::size_t steps = 20000;
  double lr_generator = 2e-3;
  double lr_discriminator = 1e-3;
  std::uint64_t seed = 1;
  std::size_t eval_every = 1000;
  std::size_t eval_samples = 10000;
  // Finite-difference and identity spot checks at every snapshot.
  bool check_gradients = true;

  // Throws ConfigError.
  void validate() const;
  std::size_t generator_input_size() const noexcept;
};

struct Snapshot {
  std::size_t step = 0;
  double g_loss = 0.0;
  double d_loss = 0.0;
  double inception_score = 0.0;
  double am_score = 0.0;
  std::size_t mode_coverage = 0;
  double intra_mode_dispersion = 0.0;
  double d_r_mean_on_fake = 0.0;  // E_{x~G}[D_r(x)]
  double input_grad_l1 = 0.0;     // mean over samples of sum |dG(z)/dz|
  // Worst finite-difference relative error over the spot-checked parameters;
  // NaN when checks are off.
  double grad_check_rel_err = 0.0;
  // LabelGAN: max |class-aware gradient - loss gradient|; AM-GAN: |G loss -
  // (aux term + LabelGAN term)|. NaN for other variants or when checks are off.
  double identity_check_err = 0.0;
};

struct TrainingTrace {
  std::string rng_algorithm;
  std::vector<Snapshot> snapshots;
  // Evaluation samples of the last snapshot and the label the generator was
  // steered towards (-1 when the variant has no target class).
  std::vector<Point2> final_samples;
  std::vector<long long> final_assigned_labels;
};

// Bit-reproducible for a given config within one build. Throws ConfigError
// for an invalid config and DivergedError when a loss or parameter turns
// non-finite.
TrainingTrace train(const TrainConfig& config);

}  // namespace amgan
