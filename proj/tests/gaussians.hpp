#pragma once

#include <cstdint>
#include <vector>

#include "codexmine/random.hpp"

namespace testdata {

struct LabelledPoints {
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> labels;
};

/// n points from `clusters` isotropic unit Gaussians centred at spread * e_c.
inline LabelledPoints gaussian_clusters(std::uint64_t seed, std::size_t n = 300, std::size_t dim = 10,
                                        std::size_t clusters = 3, double spread = 10.0) {
  codexmine::Rng rng(seed);
  LabelledPoints out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % clusters;
    std::vector<double> p(dim);
    for (std::size_t d = 0; d < dim; ++d) p[d] = rng.normal() + (d == c ? spread : 0.0);
    out.points.push_back(std::move(p));
    out.labels.push_back(c);
  }
  return out;
}

} // namespace testdata
