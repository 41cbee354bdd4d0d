#pragma once

#include <cmath>
#include <span>
#include <string>

#include "error.hpp"

namespace codexmine {

inline constexpr double kDistributionTolerance = 1e-6;
inline constexpr double kKlSmoothing = 1e-9;

inline void check_distribution(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    require_input(std::isfinite(v), std::string(what) + ": non-finite entry");
    require_input(v >= 0.0, std::string(what) + ": negative entry");
    sum += v;
  }
  require_input(std::abs(sum - 1.0) <= kDistributionTolerance,
                std::string(what) + ": entries sum to " + std::to_string(sum) + ", not 1");
}

/// Shannon entropy in nats, with 0 ln 0 = 0.
inline double entropy(std::span<const double> p) {
  check_distribution(p, "entropy");
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

/// KL(p || q') in nats where q' = (1 - eps) q + eps / n keeps the result finite.
inline double kl_divergence(std::span<const double> p, std::span<const double> q, double eps = kKlSmoothing) {
  require_input(p.size() == q.size(), "kl_divergence: dimension mismatch (" + std::to_string(p.size()) + " vs " +
                                          std::to_string(q.size()) + ")");
  check_distribution(p, "kl_divergence p");
  check_distribution(q, "kl_divergence q");
  const double n = static_cast<double>(p.size());
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    const double qs = (1.0 - eps) * q[i] + eps / n;
    kl += p[i] * std::log(p[i] / qs);
  }
  return kl;
}

} // namespace codexmine
