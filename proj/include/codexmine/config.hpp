#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "discovery.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "similarity.hpp"
#include "som.hpp"

namespace codexmine {

/// Every tunable of a pipeline run. `threads` never changes results and is
/// left out of output headers.
struct RunConfig {
  std::size_t k = 100;
  double alpha = 0.5;
  double beta = 0.25;
  double gamma = 0.25;
  std::size_t top_m = 10;
  double theta = 0.6;
  double n0 = 5.0;
  std::size_t df_min = 3;
  std::size_t clusters = 3;
  std::size_t min_support = 2;
  double lambda = 0.2;
  std::string whitelist; ///< comma-separated taxonomy labels or paths

  std::size_t rows = 10;
  std::size_t cols = 10;
  std::size_t epochs = 30;
  std::size_t coarse_levels = 1;
  std::uint64_t seed = 42;

  std::string lexicon;
  std::string corpus;
  std::string corpus_format = "jsonl";
  std::string seeds;
  std::string out_dir = "out";

  std::size_t threads = default_threads();

  SimilarityParams similarity() const { return {alpha, beta, gamma, top_m}; }

  DiscoveryParams discovery() const {
    DiscoveryParams p;
    p.similarity = similarity();
    p.theta = theta;
    p.n0 = n0;
    p.clusters_per_model = clusters;
    p.min_support = min_support;
    for (auto item : text::split(whitelist, ','))
      if (!text::trim(item).empty()) p.whitelist.emplace_back(text::trim(item));
    p.threads = threads;
    return p;
  }

  TrainConfig som() const {
    TrainConfig t;
    t.epochs = epochs;
    t.coarse_levels = coarse_levels;
    t.seed = seed;
    t.threads = threads;
    return t;
  }

  MappingOptions mapping() const {
    MappingOptions m;
    m.lambda = lambda;
    m.threads = threads;
    return m;
  }

  void validate() const {
    similarity().validate();
    const auto range = [](bool ok, const char* name, const char* rule) {
      require_input(ok, std::string("invalid value for ") + name + ": must be " + rule);
    };
    range(k >= 2, "k", ">= 2");
    range(top_m >= 1, "top_m", ">= 1");
    range(theta > 0.0 && theta < 1.0, "theta", "in (0, 1)");
    range(n0 > 0.0, "n0", "> 0");
    range(df_min >= 1, "df_min", ">= 1");
    range(clusters >= 1, "clusters", ">= 1");
    range(min_support >= 1, "min_support", ">= 1");
    range(lambda >= 0.0 && lambda <= 1.0, "lambda", "in [0, 1]");
    range(rows >= 2 && rows <= 200, "rows", "in [2, 200]");
    range(cols >= 2 && cols <= 200, "cols", "in [2, 200]");
    range(epochs >= 1 && epochs <= 10000, "epochs", "in [1, 10000]");
    range(coarse_levels <= 6, "coarse_levels", "in [0, 6]");
    range(threads >= 1, "threads", ">= 1");
  }

  /// "key=value" lines, fixed order.
  std::vector<std::string> header_lines() const {
    // shortest decimal that reads back to the same double
    const auto num = [](double v) {
      char buf[32];
      for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
      }
      return std::string(buf);
    };
    return {
        "alpha=" + num(alpha),
        "beta=" + num(beta),
        "gamma=" + num(gamma),
        "theta=" + num(theta),
        "k=" + std::to_string(k),
        "seed=" + std::to_string(seed),
        "top_m=" + std::to_string(top_m),
        "n0=" + num(n0),
        "df_min=" + std::to_string(df_min),
        "clusters=" + std::to_string(clusters),
        "min_support=" + std::to_string(min_support),
        "lambda=" + num(lambda),
        "whitelist=" + whitelist,
        "rows=" + std::to_string(rows),
        "cols=" + std::to_string(cols),
        "epochs=" + std::to_string(epochs),
        "coarse_levels=" + std::to_string(coarse_levels),
    };
  }
};

} // namespace codexmine
