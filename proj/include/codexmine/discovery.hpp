#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "lexicon.hpp"
#include "parallel.hpp"
#include "semspace.hpp"
#include "similarity.hpp"

namespace codexmine {

// ---------------------------------------------------------------------------
// Seeds and targets

/// One row of the seed file: a known reference term for a relation.
struct SeedEntry {
  std::string term;
  std::string relationship;
  std::string target;
  bool operator==(const SeedEntry&) const = default;
};

/// TSV of term, relationship, target. '#' comments and an optional header
/// row ("term ...") are skipped.
inline std::vector<SeedEntry> parse_seeds(std::string_view content) {
  std::vector<SeedEntry> seeds;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    require_input(cols.size() == 3, "seed file line " + std::to_string(line_no) +
                                        ": expected 3 columns (term, relationship, target)");
    if (seeds.empty() && text::casefold(text::trim(cols[0])) == "term") continue;
    SeedEntry s{std::string(text::trim(cols[0])), std::string(text::trim(cols[1])), std::string(text::trim(cols[2]))};
    require_input(!s.term.empty() && !s.relationship.empty() && !s.target.empty(),
                  "seed file line " + std::to_string(line_no) + ": empty field");
    seeds.push_back(std::move(s));
  }
  return seeds;
}

inline std::string seeds_tsv(std::span<const SeedEntry> seeds) {
  std::string out = "term\trelationship\ttarget\n";
  for (const auto& s : seeds) out += s.term + '\t' + s.relationship + '\t' + s.target + '\n';
  return out;
}

struct DiscoveryParams {
  SimilarityParams similarity;
  double theta = 0.6;              ///< deviation threshold for qualification
  double n0 = 5.0;                 ///< support half-point of the confidence score
  std::size_t clusters_per_model = 3;
  std::size_t min_support = 2;
  std::vector<std::string> whitelist; ///< taxonomy labels or paths; empty = parents of the seed groups
  std::size_t threads = 1;

  void validate() const {
    similarity.validate();
    require_input(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1)");
    require_input(n0 > 0.0, "n0 must be > 0");
    require_input(clusters_per_model >= 1, "clusters_per_model must be >= 1");
    require_input(min_support >= 1, "min_support must be >= 1");
  }
};

/// What to look for around one target concept.
struct TargetSpec {
  std::string label;
  std::vector<std::string> relationships;
  std::vector<GroupIndex> target_groups;
  std::vector<TaxonId> whitelist; ///< sorted
};

inline std::vector<TaxonId> resolve_whitelist(const Lexicon& lex, std::span<const std::string> entries) {
  std::set<TaxonId> out;
  for (const auto& e : entries) {
    const auto name = std::string(text::trim(e));
    if (name.empty()) continue;
    std::vector<TaxonId> hits;
    if (name.find('/') != std::string::npos) {
      if (auto t = lex.find_taxon(name)) hits.push_back(*t);
    } else {
      hits = lex.find_taxa_by_label(name);
    }
    require_input(!hits.empty(), "whitelist entry '" + name + "' is not a taxonomy node");
    out.insert(hits.begin(), hits.end());
  }
  return {out.begin(), out.end()};
}

inline std::vector<GroupIndex> resolve_groups(const Lexicon& lex, std::string_view surface) {
  auto senses = lex.lookup_key(text::surface_key(surface));
  return {senses.begin(), senses.end()};
}

/// One spec per target label in the seed file (sorted by label). Without an
/// explicit whitelist, the whitelist is the set of hypernyms of the
/// resolvable seed terms of that target.
inline std::vector<TargetSpec> make_target_specs(const Lexicon& lex, std::span<const SeedEntry> seeds,
                                                 std::span<const std::string> whitelist = {}) {
  std::map<std::string, TargetSpec> by_label;
  std::map<std::string, std::set<TaxonId>> derived;
  for (const auto& s : seeds) {
    auto& spec = by_label[s.target];
    spec.label = s.target;
    if (std::find(spec.relationships.begin(), spec.relationships.end(), s.relationship) == spec.relationships.end())
      spec.relationships.push_back(s.relationship);
    for (GroupIndex g : resolve_groups(lex, s.term)) derived[s.target].insert(lex.hypernym(g));
  }
  const auto explicit_list = resolve_whitelist(lex, whitelist);
  std::vector<TargetSpec> specs;
  for (auto& [label, spec] : by_label) {
    spec.target_groups = resolve_groups(lex, label);
    require_input(!spec.target_groups.empty(), "target '" + label + "' has no synonym group in the lexicon");
    std::sort(spec.relationships.begin(), spec.relationships.end());
    if (!explicit_list.empty()) {
      spec.whitelist = explicit_list;
    } else {
      spec.whitelist.assign(derived[label].begin(), derived[label].end());
    }
    require_input(!spec.whitelist.empty(), "target '" + label + "': empty taxonomy whitelist");
    specs.push_back(std::move(spec));
  }
  return specs;
}

// ---------------------------------------------------------------------------
// Corpus view

/// Read-only, vectorized corpus with the inverted indexes discovery needs.
class DiscoveryCorpus {
public:
  DiscoveryCorpus(const Lexicon& lex, std::span<const MappedDocument> docs, const SemanticSpace& space,
                  std::span<const DocVector> vectors, std::size_t threads = 1)
      : lex_(&lex), docs_(docs), space_(&space), vectors_(vectors) {
    require_input(docs.size() == vectors.size(), "discovery: mapped documents and vectors differ in count");
    group_docs_.resize(lex.group_count());
    for (std::uint32_t i = 0; i < docs.size(); ++i) {
      require_input(docs[i].doc_id == vectors[i].doc_id, "discovery: document order mismatch");
      for (const auto& [g, c] : docs[i].group_counts) group_docs_[g].push_back(i);
      std::set<std::string> seen;
      for (const auto& occ : docs[i].occurrences)
        if (!occ.group && seen.insert(occ.surface).second) unknown_docs_[occ.surface].push_back(i);
    }
    profiles_.resize(vectors.size());
    parallel_for(vectors.size(), threads, [&](std::size_t i) { profiles_[i] = profile(space, vectors[i]); });
  }

  const Lexicon& lexicon() const { return *lex_; }
  const SemanticSpace& space() const { return *space_; }
  std::size_t size() const { return docs_.size(); }
  const MappedDocument& doc(std::size_t i) const { return docs_[i]; }
  const DocVector& vector(std::size_t i) const { return vectors_[i]; }
  const Profile& doc_profile(std::size_t i) const { return profiles_[i]; }

  std::span<const std::uint32_t> docs_with_group(GroupIndex g) const { return group_docs_.at(g); }

  std::span<const std::uint32_t> docs_with_unknown(const std::string& surface) const {
    auto it = unknown_docs_.find(surface);
    if (it == unknown_docs_.end()) return {};
    return it->second;
  }

  /// Sorted union of the documents containing any of the groups.
  std::vector<std::uint32_t> docs_with_any(std::span<const GroupIndex> groups) const {
    std::vector<std::uint32_t> out;
    for (GroupIndex g : groups) out.insert(out.end(), group_docs_.at(g).begin(), group_docs_.at(g).end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  FeatureVector feature(std::span<const std::uint32_t> doc_indices, std::string label) const {
    std::vector<const DocVector*> ptrs;
    ptrs.reserve(doc_indices.size());
    for (auto i : doc_indices) ptrs.push_back(&vectors_[i]);
    return centroid(std::span<const DocVector* const>(ptrs), std::move(label));
  }

private:
  const Lexicon* lex_;
  std::span<const MappedDocument> docs_;
  const SemanticSpace* space_;
  std::span<const DocVector> vectors_;
  std::vector<std::vector<std::uint32_t>> group_docs_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> unknown_docs_;
  std::vector<Profile> profiles_;
};

inline std::vector<std::uint32_t> intersect_sorted(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// ---------------------------------------------------------------------------
// Step 1: reference models

/// k-medoids over a dense n x n similarity matrix. Medoids start from the
/// most central item and then farthest-first; assignment and medoid update
/// alternate until stable. Returns the non-empty clusters, each sorted.
inline std::vector<std::vector<std::size_t>> kmedoids(std::span<const double> sim, std::size_t n, std::size_t k,
                                                      std::size_t max_iter = 100) {
  require_input(sim.size() == n * n, "kmedoids: matrix size mismatch");
  if (n == 0) return {};
  k = std::clamp<std::size_t>(k, 1, n);
  const auto s = [&](std::size_t i, std::size_t j) { return sim[i * n + j]; };

  std::vector<std::size_t> medoids;
  {
    std::size_t best = 0;
    double best_total = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += s(i, j);
      if (total > best_total) {
        best_total = total;
        best = i;
      }
    }
    medoids.push_back(best);
  }
  while (medoids.size() < k) {
    std::size_t pick = n;
    double farthest = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(medoids.begin(), medoids.end(), i) != medoids.end()) continue;
      double nearest = 2.0;
      for (auto m : medoids) nearest = std::min(nearest, 1.0 - s(i, m));
      if (nearest > farthest) {
        farthest = nearest;
        pick = i;
      }
    }
    medoids.push_back(pick);
  }

  std::vector<std::size_t> assign(n, 0);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < medoids.size(); ++c)
        if (s(i, medoids[c]) > s(i, medoids[best])) best = c;
      // a medoid always stays in its own cluster
      for (std::size_t c = 0; c < medoids.size(); ++c)
        if (medoids[c] == i) best = c;
      assign[i] = best;
    }
    bool changed = false;
    for (std::size_t c = 0; c < medoids.size(); ++c) {
      std::size_t best = medoids[c];
      double best_total = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != c) continue;
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (assign[j] == c) total += s(i, j);
        if (total > best_total) {
          best_total = total;
          best = i;
        }
      }
      if (best != medoids[c]) {
        medoids[c] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<std::vector<std::size_t>> clusters(medoids.size());
  for (std::size_t i = 0; i < n; ++i) clusters[assign[i]].push_back(i);
  std::erase_if(clusters, [](const auto& c) { return c.empty(); });
  return clusters;
}

/// Semantic model of "relationship target": centroids of the clustered
/// documents that mention a seed term together with the target.
struct ReferenceModel {
  std::string relationship;
  std::string target;
  std::vector<std::string> seed_terms; ///< resolved seeds only
  std::vector<FeatureVector> centroids;

  std::size_t document_count() const {
    std::size_t n = 0;
    for (const auto& c : centroids) n += c.member_count();
    return n;
  }
};

struct ReferenceModels {
  std::vector<ReferenceModel> models;
  std::vector<std::string> unresolved_seeds;
  std::vector<std::string> empty_models; ///< "relationship target" pairs without matching documents
};

inline ReferenceModels build_reference_models(std::span<const SeedEntry> seeds, const DiscoveryCorpus& corpus,
                                              const DiscoveryParams& params) {
  const auto& lex = corpus.lexicon();
  ReferenceModels out;
  std::map<std::pair<std::string, std::string>, std::vector<const SeedEntry*>> keyed;
  bool any_resolved = false;
  for (const auto& s : seeds) {
    keyed[{s.relationship, s.target}].push_back(&s);
    if (resolve_groups(lex, s.term).empty()) {
      if (std::find(out.unresolved_seeds.begin(), out.unresolved_seeds.end(), s.term) == out.unresolved_seeds.end())
        out.unresolved_seeds.push_back(s.term);
    } else {
      any_resolved = true;
    }
  }
  require_input(any_resolved, "no seed term resolves to a lexicon entry");

  for (const auto& [key, entries] : keyed) {
    const auto& [relationship, target] = key;
    const auto target_groups = resolve_groups(lex, target);
    require_input(!target_groups.empty(), "target '" + target + "' has no synonym group in the lexicon");
    ReferenceModel model{relationship, target, {}, {}};
    std::set<GroupIndex> seed_groups;
    for (const auto* e : entries) {
      const auto groups = resolve_groups(lex, e->term);
      if (groups.empty()) continue;
      model.seed_terms.push_back(e->term);
      seed_groups.insert(groups.begin(), groups.end());
    }
    const std::vector<GroupIndex> seed_list(seed_groups.begin(), seed_groups.end());
    const auto docs = intersect_sorted(corpus.docs_with_any(seed_list), corpus.docs_with_any(target_groups));
    if (docs.empty()) {
      out.empty_models.push_back(relationship + " " + target);
      continue;
    }
    const std::size_t n = docs.size();
    std::vector<double> sim(n * n, 1.0);
    parallel_for(n, params.threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j)
        if (i != j)
          sim[i * n + j] =
              similarity(corpus.doc_profile(docs[i]), corpus.doc_profile(docs[j]), params.similarity);
    });
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sim[j * n + i] = sim[i * n + j];
    const auto clusters = kmedoids(sim, n, params.clusters_per_model);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      std::vector<std::uint32_t> members;
      for (auto i : clusters[c]) members.push_back(docs[i]);
      model.centroids.push_back(
          corpus.feature(members, relationship + " " + target + " #" + std::to_string(c + 1)));
    }
    out.models.push_back(std::move(model));
  }
  require_input(!out.models.empty(), "no documents match any seed term together with its target");
  return out;
}

// ---------------------------------------------------------------------------
// Step 2: meaning of unknown terms

/// Constructed hypernym and nearest known groups of an unknown term.
struct InferredMeaning {
  std::string surface;
  TaxonId hypernym = 0;
  std::vector<GroupIndex> descriptors; ///< up to two, nearest first
  double score = 0.0;                  ///< similarity to the constructed hypernym
};

/// Centroids of every occurring group and of every taxonomy node of level
/// >= 2 (mean of its member groups' centroids), built once per corpus.
class MeaningInference {
public:
  MeaningInference(const DiscoveryCorpus& corpus, const SimilarityParams& params, std::size_t threads = 1)
      : corpus_(&corpus), params_(params) {
    const auto& lex = corpus.lexicon();
    group_profiles_.resize(lex.group_count());
    std::vector<std::vector<double>> group_centroids(lex.group_count());
    parallel_for(lex.group_count(), threads, [&](std::size_t g) {
      const auto docs = corpus.docs_with_group(static_cast<GroupIndex>(g));
      if (docs.empty()) return;
      auto fv = corpus.feature(docs, lex.group(static_cast<GroupIndex>(g)).id);
      group_centroids[g] = fv.centroid;
      group_profiles_[g] = profile(corpus.space(), fv);
    });
    std::vector<std::vector<const std::vector<double>*>> node_members(lex.taxon_count());
    for (GroupIndex g = 0; g < lex.group_count(); ++g) {
      if (group_centroids[g].empty()) continue;
      for (TaxonId t : lex.hypernym_chain(g))
        if (lex.taxon(t).depth >= 2) node_members[t].push_back(&group_centroids[g]);
    }
    for (TaxonId t = 0; t < lex.taxon_count(); ++t)
      if (!node_members[t].empty()) nodes_.push_back(t);
    node_profiles_.resize(nodes_.size());
    parallel_for(nodes_.size(), threads, [&](std::size_t i) {
      FeatureVector fv{lex.taxon(nodes_[i]).path, mean_direction(node_members[nodes_[i]]), {}};
      node_profiles_[i] = profile(corpus.space(), fv);
    });
  }

  InferredMeaning infer(const UnknownTerm& u) const {
    require_input(u.document_frequency >= 2, "insufficient evidence for '" + u.surface + "': document frequency " +
                                                 std::to_string(u.document_frequency) + " < 2");
    require_input(!nodes_.empty(), "no taxonomy node has occurring members");
    const auto docs = corpus_->docs_with_unknown(u.surface);
    require_input(docs.size() >= 2, "insufficient evidence for '" + u.surface + "'");
    const auto context = corpus_->feature(docs, u.surface);
    const bool empty = std::all_of(context.centroid.begin(), context.centroid.end(), [](double v) { return v == 0.0; });
    require_input(!empty, "empty context for '" + u.surface + "': its documents contain no mapped terms");
    const auto ctx = profile(corpus_->space(), context);

    InferredMeaning out;
    out.surface = u.surface;
    out.score = -1.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double s = similarity(ctx, node_profiles_[i], params_);
      if (s > out.score) {
        out.score = s;
        out.hypernym = nodes_[i];
      }
    }
    std::set<GroupIndex> present;
    for (auto d : docs)
      for (const auto& [g, c] : corpus_->doc(d).group_counts) present.insert(g);
    std::vector<std::pair<double, GroupIndex>> ranked;
    for (GroupIndex g : present)
      if (!group_profiles_[g].unit.empty()) ranked.emplace_back(similarity(ctx, group_profiles_[g], params_), g);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i) out.descriptors.push_back(ranked[i].second);
    return out;
  }

private:
  const DiscoveryCorpus* corpus_;
  SimilarityParams params_;
  std::vector<Profile> group_profiles_;
  std::vector<TaxonId> nodes_;
  std::vector<Profile> node_profiles_;
};

/// Infers every unknown term with document frequency >= 2, skipping those
/// whose documents carry no mapped terms. Output follows the input order.
inline std::vector<InferredMeaning> infer_unknowns(std::span<const UnknownTerm> unknowns,
                                                   const MeaningInference& inference, std::size_t threads = 1) {
  std::vector<std::optional<InferredMeaning>> slots(unknowns.size());
  parallel_for(unknowns.size(), threads, [&](std::size_t i) {
    if (unknowns[i].document_frequency < 2) return;
    try {
      slots[i] = inference.infer(unknowns[i]);
    } catch (const InputError&) {
    }
  });
  std::vector<InferredMeaning> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Steps 3 and 4: candidates and confidence

/// One proposed (term, relationship, object) triple.
struct Candidate {
  std::string term;     ///< canonical surface of a group, or the unknown surface
  std::string term_key; ///< group_id, or "?" + surface for unknown terms
  std::string relationship;
  std::string object;
  double deviation = 1.0;  ///< minimum semantic deviation from the model centroids
  double confidence = 0.0; ///< percent
  std::vector<std::string> support; ///< doc_ids, corpus order
};

/// 100 * (1 - d / theta) * n / (n + n0), clamped to [0, 100].
inline double confidence(double deviation, double theta, std::size_t support, double n0 = 5.0) {
  require_input(deviation < theta, "confidence requested for a non-qualified candidate (deviation " +
                                       std::to_string(deviation) + " >= theta " + std::to_string(theta) + ")");
  const double n = static_cast<double>(support);
  const double conf = 100.0 * (1.0 - deviation / theta) * n / (n + n0);
  return std::clamp(conf, 0.0, 100.0);
}

namespace detail {

struct PoolEntry {
  std::string term;
  std::string key;
  std::vector<std::uint32_t> docs;
};

inline bool chain_hits(const Lexicon& lex, TaxonId node, std::span<const TaxonId> whitelist) {
  for (TaxonId t : lex.chain(node))
    if (std::binary_search(whitelist.begin(), whitelist.end(), t)) return true;
  return false;
}

inline std::vector<PoolEntry> candidate_pool(const DiscoveryCorpus& corpus, const TargetSpec& spec,
                                             std::span<const InferredMeaning> inferred) {
  const auto& lex = corpus.lexicon();
  std::vector<PoolEntry> pool;
  for (GroupIndex g = 0; g < lex.group_count(); ++g) {
    if (std::find(spec.target_groups.begin(), spec.target_groups.end(), g) != spec.target_groups.end()) continue;
    if (!chain_hits(lex, lex.hypernym(g), spec.whitelist)) continue;
    const auto docs = corpus.docs_with_group(g);
    pool.push_back({lex.group(g).canonical, lex.group(g).id, {docs.begin(), docs.end()}});
  }
  for (const auto& m : inferred) {
    if (!chain_hits(lex, m.hypernym, spec.whitelist)) continue;
    const auto docs = corpus.docs_with_unknown(m.surface);
    pool.push_back({m.surface, "?" + m.surface, {docs.begin(), docs.end()}});
  }
  return pool;
}

} // namespace detail

/// Scores every whitelisted term against the reference models of its
/// (relationship, target). A term qualifies when its support documents'
/// feature vector deviates less than theta from at least one centroid.
inline std::vector<Candidate> generate_candidates(const DiscoveryCorpus& corpus,
                                                  std::span<const ReferenceModel> models,
                                                  std::span<const TargetSpec> specs,
                                                  std::span<const InferredMeaning> inferred,
                                                  const DiscoveryParams& params) {
  require_input(!models.empty(), "generate_candidates: no reference models");
  params.validate();
  std::vector<Candidate> out;
  for (const auto& model : models) {
    auto spec_it = std::find_if(specs.begin(), specs.end(), [&](const TargetSpec& s) { return s.label == model.target; });
    require_input(spec_it != specs.end(), "no target spec for '" + model.target + "'");
    const auto pool = detail::candidate_pool(corpus, *spec_it, inferred);
    const auto target_docs = corpus.docs_with_any(spec_it->target_groups);
    std::vector<Profile> refs;
    for (const auto& c : model.centroids) refs.push_back(profile(corpus.space(), c));

    std::vector<std::optional<Candidate>> slots(pool.size());
    parallel_for(pool.size(), params.threads, [&](std::size_t i) {
      const auto support = intersect_sorted(pool[i].docs, target_docs);
      if (support.size() < params.min_support || support.empty()) return;
      const auto fv = corpus.feature(support, pool[i].term);
      const auto cand = profile(corpus.space(), fv);
      double best = 1.0;
      for (const auto& r : refs) best = std::min(best, semantic_deviation(cand, r, params.similarity));
      if (!(best < params.theta)) return;
      Candidate c;
      c.term = pool[i].term;
      c.term_key = pool[i].key;
      c.relationship = model.relationship;
      c.object = model.target;
      c.deviation = best;
      c.confidence = confidence(best, params.theta, support.size(), params.n0);
      for (auto d : support) c.support.push_back(corpus.doc(d).doc_id);
      slots[i] = std::move(c);
    });
    for (auto& s : slots)
      if (s) out.push_back(std::move(*s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ranking and output

inline double round_tenths(double v) { return std::round(v * 10.0) / 10.0; }

/// Confidence (to one decimal) descending, then support size descending,
/// then term and relationship ascending.
inline void rank_candidates(std::vector<Candidate>& cands) {
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    const auto ca = std::llround(a.confidence * 10.0), cb = std::llround(b.confidence * 10.0);
    if (ca != cb) return ca > cb;
    if (a.support.size() != b.support.size()) return a.support.size() > b.support.size();
    if (a.term != b.term) return a.term < b.term;
    if (a.relationship != b.relationship) return a.relationship < b.relationship;
    return a.object < b.object;
  });
}

inline constexpr std::size_t kMaxListedDocs = 25;

/// `header` lines are written verbatim after a "# " prefix.
inline std::string candidates_tsv(std::span<const Candidate> ranked, std::span<const std::string> header = {}) {
  std::string out;
  for (const auto& h : header) out += "# " + h + '\n';
  out += "Row\tTerm\tRelationship\tObject\tConf%\t#Docs\tDocIDs\n";
  char conf[32];
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& c = ranked[i];
    std::snprintf(conf, sizeof conf, "%.1f", round_tenths(c.confidence));
    std::string ids;
    for (std::size_t j = 0; j < std::min(kMaxListedDocs, c.support.size()); ++j) {
      if (j) ids += ',';
      ids += c.support[j];
    }
    if (c.support.size() > kMaxListedDocs) ids += ",\u2026";
    out += std::to_string(i + 1) + '\t' + c.term + '\t' + c.relationship + '\t' + c.object + '\t' + conf + '\t' +
           std::to_string(c.support.size()) + '\t' + ids + '\n';
  }
  return out;
}

/// A row read back from a candidates file.
struct CandidateRow {
  std::size_t row = 0;
  std::string term;
  std::string relationship;
  std::string object;
  double confidence = 0.0;
  std::size_t support = 0;
  std::vector<std::string> doc_ids; ///< as listed (truncated lists lose the tail)
};

inline std::vector<CandidateRow> parse_candidates_tsv(std::string_view content) {
  std::vector<CandidateRow> rows;
  bool header_seen = false;
  for (auto line : text::split(content, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (!header_seen) {
      require_input(cols.size() == 7 && cols[0] == "Row", "candidates: missing header row");
      header_seen = true;
      continue;
    }
    require_input(cols.size() == 7, "candidates: expected 7 columns");
    CandidateRow r;
    try {
      r.row = std::stoul(std::string(cols[0]));
      r.confidence = std::stod(std::string(cols[4]));
      r.support = std::stoul(std::string(cols[5]));
    } catch (const std::exception&) {
      throw InputError("candidates: malformed number in row '" + std::string(cols[0]) + "'");
    }
    r.term = cols[1];
    r.relationship = cols[2];
    r.object = cols[3];
    for (auto id : text::split(cols[6], ','))
      if (!id.empty() && id != "\u2026") r.doc_ids.emplace_back(id);
    rows.push_back(std::move(r));
  }
  require_input(header_seen, "candidates: missing header row");
  return rows;
}

/// term, hypernym path, descriptor 1, descriptor 2 (canonical terms), score.
inline std::string inferred_tsv(std::span<const InferredMeaning> inferred, const Lexicon& lex,
                                std::span<const std::string> header = {}) {
  std::string out;
  for (const auto& h : header) out += "# " + h + '\n';
  out += "term\thypernym\tdescriptor1\tdescriptor2\tscore\n";
  char score[32];
  for (const auto& m : inferred) {
    std::string d1, d2;
    if (m.descriptors.size() > 0) d1 = lex.group(m.descriptors[0]).canonical;
    if (m.descriptors.size() > 1) d2 = lex.group(m.descriptors[1]).canonical;
    std::snprintf(score, sizeof score, "%.4f", m.score);
    out += m.surface + '\t' + lex.taxon(m.hypernym).path + '\t' + d1 + '\t' + d2 + '\t' + score + '\n';
  }
  return out;
}

} // namespace codexmine
