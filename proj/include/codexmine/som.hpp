#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace codexmine {

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Rectangular lattice of codebook vectors, stored row-major.
class SomGrid {
public:
  SomGrid() = default;
  SomGrid(std::size_t rows, std::size_t cols, std::size_t dim)
      : rows_(rows), cols_(cols), dim_(dim), codebook_(rows * cols * dim, 0.0) {
    require_input(rows >= 1 && cols >= 1, "SOM grid needs at least one row and one column");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t dim() const { return dim_; }
  std::size_t cells() const { return rows_ * cols_; }

  Cell cell(std::size_t index) const { return {index / cols_, index % cols_}; }
  std::size_t index(Cell c) const { return c.row * cols_ + c.col; }

  std::span<double> code(std::size_t cell) { return {codebook_.data() + cell * dim_, dim_}; }
  std::span<const double> code(std::size_t cell) const { return {codebook_.data() + cell * dim_, dim_}; }
  std::span<const double> code(Cell c) const { return code(index(c)); }
  std::span<double> code(Cell c) { return code(index(c)); }

  const std::vector<double>& codebook() const { return codebook_; }

  bool all_finite() const {
    return std::all_of(codebook_.begin(), codebook_.end(), [](double v) { return std::isfinite(v); });
  }

  bool operator==(const SomGrid&) const = default;

private:
  std::size_t rows_ = 0, cols_ = 0, dim_ = 0;
  std::vector<double> codebook_;
};

/// Batch-SOM schedule. The Gaussian neighbourhood width decays
/// exponentially from sigma0 to sigma_end over the epochs.
struct TrainConfig {
  std::size_t epochs = 30;
  double sigma0 = 0.0; ///< 0 means max(rows, cols) / 2
  double sigma_end = 1.0;
  std::size_t coarse_levels = 1;
  std::uint64_t seed = 42;
  bool batch = true; ///< online training is not supported
  std::size_t threads = 1;

  double initial_sigma(std::size_t rows, std::size_t cols) const {
    return sigma0 > 0.0 ? sigma0 : std::max(sigma_end, static_cast<double>(std::max(rows, cols)) / 2.0);
  }

  void validate(std::size_t rows, std::size_t cols) const {
    require_input(batch, "only batch SOM training is supported");
    require_input(sigma_end > 0.0, "sigma_end must be > 0");
    require_input(initial_sigma(rows, cols) >= sigma_end, "sigma0 must be >= sigma_end");
  }
};

inline double radius_at(std::size_t epoch, std::size_t epochs, double sigma0, double sigma_end) {
  if (epochs <= 1) return sigma_end;
  const double t = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
  return sigma0 * std::pow(sigma_end / sigma0, t);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    d += x * x;
  }
  return d;
}

namespace detail {

inline void check_dimension(const SomGrid& grid, std::span<const double> v) {
  require_input(v.size() == grid.dim(), "dimension mismatch: vector has " + std::to_string(v.size()) +
                                            " entries, codebook has " + std::to_string(grid.dim()));
}

inline void check_data(const SomGrid& grid, std::span<const std::vector<double>> data) {
  for (const auto& v : data) {
    check_dimension(grid, v);
    for (double x : v) require_input(std::isfinite(x), "non-finite input vector");
  }
}

} // namespace detail

/// Nearest and second-nearest cell indices. Ties go to the smaller index.
inline std::pair<std::size_t, std::size_t> two_best(const SomGrid& grid, std::span<const double> v) {
  detail::check_dimension(grid, v);
  std::size_t best = 0, second = 0;
  double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const double d = squared_distance(grid.code(c), v);
    if (d < d1) {
      second = best;
      d2 = d1;
      best = c;
      d1 = d;
    } else if (d < d2) {
      second = c;
      d2 = d;
    }
  }
  if (grid.cells() == 1) second = best;
  return {best, second};
}

/// Best-matching unit: argmin Euclidean distance, ties to the smallest (row, col).
inline Cell bmu(const SomGrid& grid, std::span<const double> v) { return grid.cell(two_best(grid, v).first); }

inline std::vector<std::size_t> assign_bmus(const SomGrid& grid, std::span<const std::vector<double>> data,
                                            std::size_t threads = 1) {
  std::vector<std::size_t> out(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) { out[i] = two_best(grid, data[i]).first; });
  return out;
}

/// One batch epoch: every codebook becomes the neighbourhood-weighted mean
/// of the data. Per-cell sums are accumulated in sample order and combined
/// in cell order, so the result does not depend on the worker count.
inline void batch_epoch(SomGrid& grid, std::span<const std::vector<double>> data, double sigma,
                        std::size_t threads = 1) {
  const auto bmus = assign_bmus(grid, data, threads);
  const std::size_t cells = grid.cells(), dim = grid.dim();
  std::vector<double> sums(cells * dim, 0.0);
  std::vector<std::size_t> counts(cells, 0);
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto u = bmus[j];
    ++counts[u];
    for (std::size_t i = 0; i < dim; ++i) sums[u * dim + i] += data[j][i];
  }
  std::vector<std::size_t> occupied;
  for (std::size_t u = 0; u < cells; ++u)
    if (counts[u]) occupied.push_back(u);
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  parallel_for(cells, threads, [&](std::size_t c) {
    const Cell cc = grid.cell(c);
    std::vector<double> num(dim, 0.0);
    double den = 0.0;
    for (auto u : occupied) {
      const Cell cu = grid.cell(u);
      const double dr = static_cast<double>(cc.row) - static_cast<double>(cu.row);
      const double dc = static_cast<double>(cc.col) - static_cast<double>(cu.col);
      const double h = std::exp(-(dr * dr + dc * dc) * inv2s2);
      if (h == 0.0) continue;
      den += h * static_cast<double>(counts[u]);
      for (std::size_t i = 0; i < dim; ++i) num[i] += h * sums[u * dim + i];
    }
    if (den > 0.0) {
      auto code = grid.code(c);
      for (std::size_t i = 0; i < dim; ++i) code[i] = num[i] / den;
    }
  });
  require_invariant(grid.all_finite(), "SOM training produced a non-finite codebook");
}

using EpochCallback = std::function<void(std::size_t epoch, const SomGrid&)>;

/// Batch-SOM training. on_epoch, when set, sees the grid after each epoch.
inline SomGrid train(SomGrid grid, std::span<const std::vector<double>> data, const TrainConfig& config,
                     const EpochCallback& on_epoch = {}) {
  config.validate(grid.rows(), grid.cols());
  detail::check_data(grid, data);
  if (data.empty()) return grid;
  const double s0 = config.initial_sigma(grid.rows(), grid.cols());
  for (std::size_t e = 0; e < config.epochs; ++e) {
    batch_epoch(grid, data, radius_at(e, config.epochs, s0, config.sigma_end), config.threads);
    if (on_epoch) on_epoch(e, grid);
  }
  return grid;
}

/// Codebooks drawn from the data: without replacement when there are
/// enough samples, with replacement otherwise.
inline SomGrid sample_init(std::span<const std::vector<double>> data, std::size_t rows, std::size_t cols,
                           std::uint64_t seed) {
  require_input(!data.empty(), "cannot initialize a SOM from empty data");
  SomGrid grid(rows, cols, data.front().size());
  detail::check_data(grid, data);
  Rng rng(seed);
  std::vector<std::size_t> picks;
  if (data.size() >= grid.cells()) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < grid.cells(); ++i) {
      const auto j = i + rng.index(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    picks.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(grid.cells()));
  } else {
    for (std::size_t i = 0; i < grid.cells(); ++i) picks.push_back(rng.index(data.size()));
  }
  for (std::size_t c = 0; c < grid.cells(); ++c) std::copy(data[picks[c]].begin(), data[picks[c]].end(), grid.code(c).begin());
  return grid;
}

/// Bilinear resampling onto a finer lattice with aligned corners. Every
/// result is a convex combination of at most four coarse codebooks.
inline SomGrid interpolate(const SomGrid& coarse, std::size_t rows, std::size_t cols) {
  SomGrid fine(rows, cols, coarse.dim());
  const auto coord = [](std::size_t i, std::size_t fine_n, std::size_t coarse_n) {
    if (fine_n <= 1 || coarse_n <= 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(coarse_n - 1) / static_cast<double>(fine_n - 1);
  };
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = coord(r, rows, coarse.rows());
    const auto y0 = std::min(static_cast<std::size_t>(y), coarse.rows() - 1);
    const auto y1 = std::min(y0 + 1, coarse.rows() - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = coord(c, cols, coarse.cols());
      const auto x0 = std::min(static_cast<std::size_t>(x), coarse.cols() - 1);
      const auto x1 = std::min(x0 + 1, coarse.cols() - 1);
      const double fx = x - static_cast<double>(x0);
      const auto a = coarse.code(Cell{y0, x0}), b = coarse.code(Cell{y0, x1});
      const auto d = coarse.code(Cell{y1, x0}), e = coarse.code(Cell{y1, x1});
      auto out = fine.code(Cell{r, c});
      for (std::size_t i = 0; i < coarse.dim(); ++i)
        out[i] = (1 - fy) * ((1 - fx) * a[i] + fx * b[i]) + fy * ((1 - fx) * d[i] + fx * e[i]);
    }
  }
  return fine;
}

/// Schedule for refining a grid whose large-scale order is already in
/// place: the neighbourhood stays at sigma_end, so only local relaxation runs.
inline TrainConfig refinement_schedule(TrainConfig config) {
  config.sigma0 = config.sigma_end;
  return config;
}

inline std::size_t coarse_budget(const TrainConfig& config) { return std::max<std::size_t>(1, (config.epochs + 3) / 4); }

inline std::size_t coarse_extent(std::size_t n, std::size_t level) {
  const std::size_t f = std::size_t{1} << level;
  return std::max<std::size_t>(1, (n + f - 1) / f);
}

/// Coarse-to-fine initial guess. levels = 0 samples codebooks from the data.
/// Otherwise a grid 2^levels times coarser is sampled and trained for a
/// quarter of the epoch budget, then repeatedly interpolated to the next
/// finer lattice and trained again, until the full lattice is reached
/// (returned untrained).
inline SomGrid init_coarse_rebalanced(std::span<const std::vector<double>> data, std::size_t rows, std::size_t cols,
                                      const TrainConfig& config) {
  require_input(!data.empty(), "cannot initialize a SOM from empty data");
  require_input(rows >= 2 && cols >= 2, "SOM grid must be at least 2x2");
  const std::size_t levels = config.coarse_levels;
  if (levels == 0) return sample_init(data, rows, cols, config.seed);

  TrainConfig stage = config;
  stage.epochs = coarse_budget(config);
  SomGrid grid = sample_init(data, coarse_extent(rows, levels), coarse_extent(cols, levels), config.seed);
  stage.sigma0 = 0.0;
  grid = train(std::move(grid), data, stage);
  for (std::size_t level = levels - 1;; --level) {
    grid = interpolate(grid, coarse_extent(rows, level), coarse_extent(cols, level));
    if (level == 0) break;
    grid = train(std::move(grid), data, refinement_schedule(stage));
  }
  return grid;
}

/// Coarse initialization followed by full training; refinement uses the
/// narrowed schedule when a coarse stage ran.
inline SomGrid fit(std::span<const std::vector<double>> data, std::size_t rows, std::size_t cols,
                   const TrainConfig& config, const EpochCallback& on_epoch = {}) {
  SomGrid grid = init_coarse_rebalanced(data, rows, cols, config);
  const TrainConfig schedule = config.coarse_levels > 0 ? refinement_schedule(config) : config;
  return train(std::move(grid), data, schedule, on_epoch);
}

struct SomMetrics {
  double quantization_error = 0.0; ///< mean distance to the BMU codebook
  double topographic_error = 0.0;  ///< share of samples whose two best cells are not 8-adjacent
};

inline bool grid_adjacent(Cell a, Cell b) {
  const auto dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  const auto dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return std::max(dr, dc) == 1;
}

inline SomMetrics metrics(const SomGrid& grid, std::span<const std::vector<double>> data, std::size_t threads = 1) {
  if (data.empty()) return {};
  std::vector<double> dist(data.size());
  std::vector<char> broken(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto [b1, b2] = two_best(grid, data[i]);
    dist[i] = std::sqrt(squared_distance(grid.code(b1), data[i]));
    broken[i] = grid.cells() > 1 && !grid_adjacent(grid.cell(b1), grid.cell(b2));
  });
  SomMetrics m;
  for (std::size_t i = 0; i < data.size(); ++i) {
    m.quantization_error += dist[i];
    m.topographic_error += broken[i];
  }
  m.quantization_error /= static_cast<double>(data.size());
  m.topographic_error /= static_cast<double>(data.size());
  return m;
}

} // namespace codexmine
