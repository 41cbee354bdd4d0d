#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "corpus.hpp"
#include "discovery.hpp"
#include "infomap.hpp"
#include "lexicon.hpp"
#include "semspace.hpp"
#include "som.hpp"

namespace codexmine {

inline SemanticSpace build_space(std::span<const MappedDocument> docs, const Lexicon& lex, const RunConfig& cfg) {
  return select_dimensions(CorpusStatistics::collect(docs, lex), lex, cfg.k, cfg.df_min);
}

inline std::vector<std::vector<double>> unit_vectors(std::span<const DocVector> vectors) {
  std::vector<std::vector<double>> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(v.unit);
  return out;
}

/// Everything a discovery run produces, in pipeline order.
struct DiscoveryRun {
  MappedCorpus mapped;
  SemanticSpace space;
  std::vector<DocVector> vectors;
  SomGrid grid;
  InformationMap map;
  std::vector<UnknownTerm> unknowns;
  std::vector<InferredMeaning> inferred;
  std::vector<TargetSpec> targets;
  ReferenceModels models;
  std::vector<Candidate> candidates; ///< ranked
};

struct RunOptions {
  const SemanticSpace* space = nullptr; ///< prebuilt space; built from the corpus when null
  bool train_map = true;
};

/// Maps the corpus, builds (or reuses) the space, lays out the map, infers
/// unknown terms and runs the four discovery steps for every seeded target.
inline DiscoveryRun run_discovery(const Lexicon& lex, std::span<const Document> docs, std::span<const SeedEntry> seeds,
                                  const RunConfig& cfg, const RunOptions& options = {}) {
  cfg.validate();
  require_input(!docs.empty(), "empty corpus");
  require_input(!seeds.empty(), "seed file lists no seeds");
  DiscoveryRun run;
  run.mapped = map_corpus(docs, lex, cfg.mapping());
  run.space = options.space ? *options.space : build_space(run.mapped.documents, lex, cfg);
  run.vectors = vectorize_all(run.mapped.documents, run.space, cfg.threads);
  if (options.train_map) {
    const auto units = unit_vectors(run.vectors);
    run.grid = fit(units, cfg.rows, cfg.cols, cfg.som());
    run.map = build_map(run.grid, run.vectors, run.space, cfg.threads);
  }

  const auto params = cfg.discovery();
  const DiscoveryCorpus corpus(lex, run.mapped.documents, run.space, run.vectors, cfg.threads);
  run.unknowns = collect_unknowns(run.mapped.documents);
  const MeaningInference inference(corpus, params.similarity, cfg.threads);
  run.inferred = infer_unknowns(run.unknowns, inference, cfg.threads);

  run.targets = make_target_specs(lex, seeds, params.whitelist);
  run.models = build_reference_models(seeds, corpus, params);
  run.candidates = generate_candidates(corpus, run.models.models, run.targets, run.inferred, params);
  rank_candidates(run.candidates);
  return run;
}

} // namespace codexmine
