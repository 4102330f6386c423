#pragma once

// Labeled 2D Gaussian mixture and its exact Bayes posterior, used as the
// training distribution and as the reference classifier for scoring.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "amgan/prob.hpp"
#include "amgan/rng.hpp"

namespace amgan {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

class MixtureSpec {
 public:
  // Throws ConfigError unless K >= 2, sigma > 0, weights cover K classes and
  // every pair of centers is more than 6 sigma apart.
  MixtureSpec(std::vector<Point2> centers, double sigma, ProbVector weights);
  MixtureSpec(std::vector<Point2> centers, double sigma);  // uniform weights

  // K equal-weight modes evenly spaced on a circle.
  static MixtureSpec ring(std::size_t modes = 8, double radius = 1.0, double sigma = 0.05);

  std::size_t classes() const noexcept { return centers_.size(); }
  const std::vector<Point2>& centers() const noexcept { return centers_; }
  double sigma() const noexcept { return sigma_; }
  const ProbVector& weights() const noexcept { return weights_; }

 private:
  std::vector<Point2> centers_;
  double sigma_;
  ProbVector weights_;
};

struct LabeledPoints {
  std::vector<Point2> points;
  std::vector<std::size_t> labels;
};

// Draws a class from the weights, then a point from N(center, sigma^2 I).
LabeledPoints sample_mixture(const MixtureSpec& spec, std::size_t n, RandomStream& rng);
LabeledPoints sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed);

// Draws a class label from a categorical distribution by inversion.
std::size_t sample_class(const ProbVector& weights, RandomStream& rng);

// posterior_k proportional to w_k exp(-|x - c_k|^2 / (2 sigma^2)), normalized
// in the log domain so far-away points stay well defined.
ProbVector oracle_posterior(const MixtureSpec& spec, Point2 point);

}  // namespace amgan
