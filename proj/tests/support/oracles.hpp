#pragma once

// Independent reference computations used by the tests: finite differences,
// brute-force sums and plain-loop probability formulas written without the
// library's helpers.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

using Fn = std::function<double(const std::vector<double>&)>;

// Fourth-order central difference of f at x along coordinate j.
inline double partial(const Fn& f, std::vector<double> x, std::size_t j, double h = 1e-4) {
  const double x0 = x[j];
  auto at = [&](double d) {
    x[j] = x0 + d;
    return f(x);
  };
  const double g = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
  x[j] = x0;
  return g;
}

inline std::vector<double> gradient(const Fn& f, const std::vector<double>& x, double h = 1e-4) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = partial(f, x, j, h);
  return g;
}

// softmax through long double, no max shift needed for the moderate logits
// used in tests.
inline std::vector<double> softmax(const std::vector<double>& l) {
  long double z = 0.0L;
  for (double v : l) z += std::exp(static_cast<long double>(v));
  std::vector<double> p(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) {
    p[i] = static_cast<double>(std::exp(static_cast<long double>(l[i])) / z);
  }
  return p;
}

inline double cross_entropy(const std::vector<double>& t, const std::vector<double>& p) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0) s -= t[i] * std::log(static_cast<long double>(p[i]));
  }
  return static_cast<double>(s);
}

inline double entropy(const std::vector<double>& p) { return cross_entropy(p, p); }

inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      s += p[i] * (std::log(static_cast<long double>(p[i])) -
                   std::log(static_cast<long double>(q[i])));
    }
  }
  return static_cast<double>(s);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// All k-subsets of {0..n-1}, in lexicographic order.
inline void for_each_subset(std::size_t n, std::size_t k,
                            const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace oracle
