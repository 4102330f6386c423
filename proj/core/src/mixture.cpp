#include "amgan/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "amgan/error.hpp"

namespace amgan {

MixtureSpec::MixtureSpec(std::vector<Point2> centers, double sigma, ProbVector weights)
    : centers_(std::move(centers)), sigma_(sigma), weights_(std::move(weights)) {
  if (centers_.size() < 2) throw ConfigError("mixture needs at least two modes");
  if (!std::isfinite(sigma_) || sigma_ <= 0.0) throw ConfigError("mixture sigma must be positive");
  if (weights_.size() != centers_.size()) {
    throw ConfigError("mixture weights must cover every mode");
  }
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (!std::isfinite(centers_[i].x) || !std::isfinite(centers_[i].y)) {
      throw ConfigError("mixture center is not finite");
    }
    for (std::size_t j = i + 1; j < centers_.size(); ++j) {
      const double d = std::hypot(centers_[i].x - centers_[j].x, centers_[i].y - centers_[j].y);
      if (!(d > 6.0 * sigma_)) {
        throw ConfigError("mixture centers " + std::to_string(i) + " and " + std::to_string(j) +
                          " are not separated by more than 6 sigma");
      }
    }
  }
}

MixtureSpec::MixtureSpec(std::vector<Point2> centers, double sigma)
    : MixtureSpec(centers, sigma, ProbVector::uniform(std::max<std::size_t>(centers.size(), 1))) {}

MixtureSpec MixtureSpec::ring(std::size_t modes, double radius, double sigma) {
  std::vector<Point2> centers(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(modes);
    centers[k] = {radius * std::cos(angle), radius * std::sin(angle)};
  }
  return MixtureSpec(std::move(centers), sigma);
}

std::size_t sample_class(const ProbVector& weights, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  return weights.size() - 1;
}

LabeledPoints sample_mixture(const MixtureSpec& spec, std::size_t n, RandomStream& rng) {
  if (n == 0) throw ConfigError("sample_mixture needs n >= 1");
  LabeledPoints out;
  out.points.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = sample_class(spec.weights(), rng);
    const Point2 c = spec.centers()[y];
    const double dx = rng.normal();
    const double dy = rng.normal();
    out.points.push_back({c.x + spec.sigma() * dx, c.y + spec.sigma() * dy});
    out.labels.push_back(y);
  }
  return out;
}

LabeledPoints sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed, "mixture");
  return sample_mixture(spec, n, rng);
}

ProbVector oracle_posterior(const MixtureSpec& spec, Point2 point) {
  const std::size_t k = spec.classes();
  const double inv_two_var = 1.0 / (2.0 * spec.sigma() * spec.sigma());
  std::vector<double> log_w(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = point.x - spec.centers()[i].x;
    const double dy = point.y - spec.centers()[i].y;
    const double w = spec.weights()[i];
    log_w[i] = (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) -
               (dx * dx + dy * dy) * inv_two_var;
  }
  const double peak = *std::max_element(log_w.begin(), log_w.end());
  double z = 0.0;
  for (double& v : log_w) {
    v = std::exp(v - peak);
    z += v;
  }
  for (double& v : log_w) v /= z;
  return ProbVector(std::move(log_w));
}

}  // namespace amgan
