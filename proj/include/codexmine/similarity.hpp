#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "info.hpp"
#include "semspace.hpp"

namespace codexmine {

/// Weights of the three similarity terms: vector cosine, reciprocal
/// symmetric KL over the main topics, and descriptor overlap.
struct SimilarityParams {
  double alpha = 0.5;
  double beta = 0.25;
  double gamma = 0.25;
  std::size_t top_m = 10;

  void validate() const {
    require_input(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0, "similarity weights must be >= 0");
    require_input(std::abs(alpha + beta + gamma - 1.0) <= 1e-9, "weights must sum to 1");
    require_input(top_m >= 1, "top_m must be >= 1");
  }
};

/// What the similarity measure needs from a document or feature vector.
struct Profile {
  std::vector<double> unit;
  std::vector<double> topics;
  std::vector<std::uint32_t> support; ///< sorted overlap items of the non-zero dims
};

namespace detail {

inline std::vector<std::uint32_t> support_items(const SemanticSpace& space, std::span<const double> weights) {
  std::vector<std::uint32_t> items;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 0.0) {
      auto dim_items = space.overlap_items(i);
      items.insert(items.end(), dim_items.begin(), dim_items.end());
    }
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

} // namespace detail

inline Profile profile(const SemanticSpace& space, const DocVector& v) {
  require_input(v.w.size() == space.k(), "profile: vector dimension does not match the space");
  return Profile{v.unit, v.p, detail::support_items(space, v.w)};
}

inline Profile profile(const SemanticSpace& space, const FeatureVector& f) {
  require_input(f.centroid.size() == space.k(), "profile: vector dimension does not match the space");
  return Profile{f.centroid, l1_normalized(f.centroid), detail::support_items(space, f.centroid)};
}

/// Cosine of two unit-or-zero vectors; two zero vectors count as identical.
inline double unit_cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

/// Indices of the m largest entries; ties go to the lower index.
inline std::vector<std::size_t> top_indices(std::span<const double> p, std::size_t m) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  m = std::min(m, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                    [&](std::size_t a, std::size_t b) { return p[a] != p[b] ? p[a] > p[b] : a < b; });
  idx.resize(m);
  return idx;
}

/// Symmetrized KL between p and q restricted to the union of their top-m
/// topics and renormalized there.
inline double topic_divergence(std::span<const double> p, std::span<const double> q, std::size_t m) {
  require_input(p.size() == q.size(), "topic_divergence: dimension mismatch");
  auto keep = top_indices(p, m);
  auto other = top_indices(q, m);
  keep.insert(keep.end(), other.begin(), other.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  const auto restrict = [&](std::span<const double> v) {
    std::vector<double> r;
    r.reserve(keep.size());
    for (auto i : keep) r.push_back(v[i]);
    return l1_normalized(r);
  };
  const auto pr = restrict(p), qr = restrict(q);
  return 0.5 * (kl_divergence(pr, qr) + kl_divergence(qr, pr));
}

/// |A ∩ B| / |A ∪ B| over sorted sets; two empty sets are identical.
inline double jaccard(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

/// sim = alpha * max(0, cos) + beta / (1 + KL_sym) + gamma * overlap, in [0, 1].
/// Callers validate params once; this only checks dimensions.
inline double similarity(const Profile& a, const Profile& b, const SimilarityParams& params) {
  require_input(a.unit.size() == b.unit.size(), "similarity: dimension mismatch");
  const double cos = std::max(0.0, unit_cosine(a.unit, b.unit));
  const double kl = topic_divergence(a.topics, b.topics, params.top_m);
  const double overlap = jaccard(a.support, b.support);
  const double sim = params.alpha * cos + params.beta / (1.0 + std::max(0.0, kl)) + params.gamma * overlap;
  return std::clamp(sim, 0.0, 1.0);
}

template <class A, class B>
double similarity(const SemanticSpace& space, const A& a, const B& b, const SimilarityParams& params = {}) {
  params.validate();
  return similarity(profile(space, a), profile(space, b), params);
}

/// 1 - similarity; a candidate qualifies when this is below the threshold.
inline double semantic_deviation(const Profile& candidate, const Profile& reference, const SimilarityParams& params) {
  return 1.0 - similarity(candidate, reference, params);
}

template <class A, class B>
double semantic_deviation(const SemanticSpace& space, const A& a, const B& b, const SimilarityParams& params = {}) {
  return 1.0 - similarity(space, a, b, params);
}

} // namespace codexmine
