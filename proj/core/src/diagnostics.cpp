#include "amgan/diagnostics.hpp"

#include <cmath>

#include "amgan/error.hpp"

namespace amgan {

namespace {

bool in_mode(Point2 p, Point2 center, double radius) {
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  return dx * dx + dy * dy <= radius * radius;
}

}  // namespace

ModeCoverage mode_coverage(std::span<const Point2> samples, const MixtureSpec& spec) {
  if (samples.empty()) throw EmptyBatch("mode_coverage on an empty batch");
  const double radius = kModeRadiusSigmas * spec.sigma();
  ModeCoverage out;
  out.per_mode_fraction.assign(spec.classes(), 0.0);
  for (std::size_t k = 0; k < spec.classes(); ++k) {
    std::size_t hits = 0;
    for (const Point2& p : samples) hits += in_mode(p, spec.centers()[k], radius) ? 1 : 0;
    out.per_mode_fraction[k] = static_cast<double>(hits) / static_cast<double>(samples.size());
    if (out.per_mode_fraction[k] >= kCoverageFraction) ++out.covered;
  }
  return out;
}

double intra_mode_dispersion(std::span<const Point2> samples, const MixtureSpec& spec) {
  const ModeCoverage coverage = mode_coverage(samples, spec);
  const double radius = kModeRadiusSigmas * spec.sigma();
  double total = 0.0;
  std::size_t modes = 0;
  for (std::size_t k = 0; k < spec.classes(); ++k) {
    if (coverage.per_mode_fraction[k] < kCoverageFraction) continue;
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (const Point2& p : samples) {
      if (!in_mode(p, spec.centers()[k], radius)) continue;
      sx += p.x;
      sy += p.y;
      ++n;
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double ss = 0.0;
    for (const Point2& p : samples) {
      if (!in_mode(p, spec.centers()[k], radius)) continue;
      ss += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    }
    total += std::sqrt(ss / (2.0 * static_cast<double>(n))) / spec.sigma();
    ++modes;
  }
  return modes == 0 ? 0.0 : total / static_cast<double>(modes);
}

}  // namespace amgan
