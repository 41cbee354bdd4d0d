#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "info.hpp"
#include "lexicon.hpp"
#include "parallel.hpp"

namespace codexmine {

enum class DescriptorKind { taxon, group };

inline std::string_view to_string(DescriptorKind k) { return k == DescriptorKind::taxon ? "taxon" : "group"; }

/// A candidate dimension: a taxonomy node or a synonym group.
struct Descriptor {
  DescriptorKind kind = DescriptorKind::group;
  std::uint32_t index = 0; ///< TaxonId or GroupIndex

  /// Taxa are identified by their path, groups by group_id.
  std::string id(const Lexicon& lex) const {
    return kind == DescriptorKind::taxon ? lex.taxon(index).path : lex.group(index).id;
  }
  std::string label(const Lexicon& lex) const {
    return kind == DescriptorKind::taxon ? lex.taxon(index).label : lex.group(index).canonical;
  }
  bool operator==(const Descriptor&) const = default;
};

struct DescriptorStats {
  std::uint64_t total = 0;
  std::vector<std::uint32_t> doc_counts; ///< one entry per containing document
  std::size_t document_frequency() const { return doc_counts.size(); }
};

/// Per-descriptor occurrence counts. A group occurrence also counts toward
/// every taxonomy node on its hypernym chain.
struct CorpusStatistics {
  std::size_t documents = 0;
  std::vector<DescriptorStats> taxa;
  std::vector<DescriptorStats> groups;

  static CorpusStatistics collect(std::span<const MappedDocument> docs, const Lexicon& lex) {
    CorpusStatistics s;
    s.documents = docs.size();
    s.taxa.resize(lex.taxon_count());
    s.groups.resize(lex.group_count());
    std::vector<std::uint32_t> taxon_counts(lex.taxon_count(), 0);
    std::vector<TaxonId> touched;
    for (const auto& d : docs) {
      for (const auto& [g, c] : d.group_counts) {
        auto& gs = s.groups[g];
        gs.total += c;
        gs.doc_counts.push_back(c);
        for (TaxonId t : lex.hypernym_chain(g)) {
          if (taxon_counts[t] == 0) touched.push_back(t);
          taxon_counts[t] += c;
        }
      }
      for (TaxonId t : touched) {
        s.taxa[t].total += taxon_counts[t];
        s.taxa[t].doc_counts.push_back(taxon_counts[t]);
        taxon_counts[t] = 0;
      }
      touched.clear();
    }
    return s;
  }

  const DescriptorStats& of(const Descriptor& d) const {
    return d.kind == DescriptorKind::taxon ? taxa.at(d.index) : groups.at(d.index);
  }
};

/// Shannon entropy of a descriptor's distribution over its documents,
/// normalized by ln(#documents containing it); 0 for fewer than two.
/// Counts are sorted first so the value does not depend on document order.
inline double normalized_entropy(const DescriptorStats& s) {
  const std::size_t n = s.document_frequency();
  if (n < 2 || s.total == 0) return 0.0;
  std::vector<std::uint32_t> counts = s.doc_counts;
  std::sort(counts.begin(), counts.end());
  const double total = static_cast<double>(s.total);
  double h = 0.0;
  for (auto c : counts) {
    const double p = c / total;
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(n));
}

/// W = ln(1 + F) * (1 - H_norm): frequent but concentrated descriptors win.
inline double informativeness(const DescriptorStats& s) {
  return std::log1p(static_cast<double>(s.total)) * (1.0 - normalized_entropy(s));
}

struct Dimension {
  Descriptor descriptor;
  std::string id;
  std::string label;
  double weight = 0.0; ///< selection score W
  double idf = 0.0;
};

/// k selected descriptors plus the lookup tables needed to vectorize and to
/// build overlap sets. Immutable once built.
class SemanticSpace {
public:
  SemanticSpace() = default;

  SemanticSpace(std::vector<Dimension> dims, const Lexicon& lex) : dims_(std::move(dims)) {
    require_input(dims_.size() >= 2, "semantic space needs at least 2 dimensions");
    taxon_dim_.assign(lex.taxon_count(), kNone);
    group_dim_.assign(lex.group_count(), kNone);
    for (std::uint32_t i = 0; i < dims_.size(); ++i) {
      const auto& d = dims_[i].descriptor;
      auto& slot = d.kind == DescriptorKind::taxon ? taxon_dim_.at(d.index) : group_dim_.at(d.index);
      require_input(slot == kNone, "duplicate dimension '" + dims_[i].id + "'");
      require_input(std::isfinite(dims_[i].weight) && dims_[i].weight >= 0.0 && std::isfinite(dims_[i].idf) &&
                        dims_[i].idf >= 0.0,
                    "dimension '" + dims_[i].id + "' has an invalid weight");
      slot = i;
    }
    group_touch_.resize(lex.group_count());
    for (GroupIndex g = 0; g < lex.group_count(); ++g) {
      auto& touch = group_touch_[g];
      if (group_dim_[g] != kNone) touch.push_back(group_dim_[g]);
      for (TaxonId t : lex.hypernym_chain(g))
        if (taxon_dim_[t] != kNone) touch.push_back(taxon_dim_[t]);
      std::sort(touch.begin(), touch.end());
    }
    // overlap items: taxa and groups share one id space, groups offset by the taxon count
    const auto taxa = static_cast<std::uint32_t>(lex.taxon_count());
    overlap_items_.resize(dims_.size());
    for (std::uint32_t i = 0; i < dims_.size(); ++i) {
      const auto& d = dims_[i].descriptor;
      auto& items = overlap_items_[i];
      if (d.kind == DescriptorKind::taxon) {
        items.push_back(d.index);
      } else {
        items.push_back(taxa + d.index);
        for (TaxonId t : lex.hypernym_chain(d.index))
          if (lex.taxon(t).depth >= 2) items.push_back(t);
      }
      std::sort(items.begin(), items.end());
    }
  }

  std::size_t k() const { return dims_.size(); }
  std::span<const Dimension> dims() const { return dims_; }
  const Dimension& dim(std::size_t i) const { return dims_.at(i); }

  /// Dimensions an occurrence of group g contributes to.
  std::span<const std::uint32_t> dims_touched_by(GroupIndex g) const { return group_touch_.at(g); }

  std::span<const std::uint32_t> overlap_items(std::size_t dim) const { return overlap_items_.at(dim); }

  std::size_t count(DescriptorKind kind) const {
    return static_cast<std::size_t>(std::count_if(dims_.begin(), dims_.end(),
                                                  [&](const Dimension& d) { return d.descriptor.kind == kind; }));
  }

  /// TSV: index, descriptor id, kind, W, idf.
  std::string manifest() const {
    std::string out = "# index\tdescriptor\tkind\tW\tidf\n";
    char buf[64];
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      out += std::to_string(i) + '\t' + dims_[i].id + '\t' + std::string(to_string(dims_[i].descriptor.kind));
      std::snprintf(buf, sizeof buf, "\t%.17g\t%.17g\n", dims_[i].weight, dims_[i].idf);
      out += buf;
    }
    return out;
  }

  static SemanticSpace from_manifest(std::string_view content, const Lexicon& lex) {
    std::vector<Dimension> dims;
    std::size_t line_no = 0;
    for (auto line : text::split(content, '\n')) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (text::trim(line).empty() || line.front() == '#') continue;
      const auto cols = text::split(line, '\t');
      const auto where = "space manifest line " + std::to_string(line_no);
      require_input(cols.size() == 5, where + ": expected 5 columns");
      require_input(std::stoul(std::string(cols[0])) == dims.size(), where + ": indices must be consecutive");
      Dimension d;
      d.id = std::string(cols[1]);
      if (cols[2] == "taxon") {
        auto t = lex.find_taxon(d.id);
        require_input(t.has_value(), where + ": unknown taxon '" + d.id + "'");
        d.descriptor = {DescriptorKind::taxon, *t};
      } else if (cols[2] == "group") {
        auto g = lex.find_group(d.id);
        require_input(g.has_value(), where + ": unknown group '" + d.id + "'");
        d.descriptor = {DescriptorKind::group, *g};
      } else {
        throw InputError(where + ": kind must be taxon or group");
      }
      d.label = d.descriptor.label(lex);
      d.weight = std::stod(std::string(cols[3]));
      d.idf = std::stod(std::string(cols[4]));
      dims.push_back(std::move(d));
    }
    return SemanticSpace(std::move(dims), lex);
  }

private:
  static constexpr std::uint32_t kNone = UINT32_MAX;
  std::vector<Dimension> dims_;
  std::vector<std::uint32_t> taxon_dim_, group_dim_;
  std::vector<std::vector<std::uint32_t>> group_touch_;
  std::vector<std::vector<std::uint32_t>> overlap_items_;
};

/// Picks the k most informative descriptors. Candidates are all taxonomy
/// nodes at levels 2..7 and every group with document frequency >= df_min;
/// ties are broken by descriptor id.
inline SemanticSpace select_dimensions(const CorpusStatistics& stats, const Lexicon& lex, std::size_t k,
                                       std::size_t df_min = 3) {
  require_input(stats.documents > 0, "select_dimensions: empty corpus");
  require_input(k >= 2, "select_dimensions: k must be at least 2");
  struct Scored {
    Descriptor d;
    std::string id;
    double w;
  };
  std::vector<Scored> candidates;
  for (TaxonId t = 0; t < lex.taxon_count(); ++t)
    if (lex.taxon(t).depth >= 2) candidates.push_back({{DescriptorKind::taxon, t}, lex.taxon(t).path, 0.0});
  for (GroupIndex g = 0; g < lex.group_count(); ++g)
    if (stats.groups[g].document_frequency() >= df_min)
      candidates.push_back({{DescriptorKind::group, g}, lex.group(g).id, 0.0});
  require_input(candidates.size() >= k, "select_dimensions: only " + std::to_string(candidates.size()) +
                                            " candidate descriptors for k = " + std::to_string(k));
  for (auto& c : candidates) c.w = informativeness(stats.of(c.d));
  std::sort(candidates.begin(), candidates.end(), [](const Scored& a, const Scored& b) {
    if (a.w != b.w) return a.w > b.w;
    return a.id < b.id;
  });
  std::vector<Dimension> dims;
  const double n = static_cast<double>(stats.documents);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& c = candidates[i];
    const auto df = std::max<std::size_t>(1, stats.of(c.d).document_frequency());
    dims.push_back(Dimension{c.d, c.id, c.d.label(lex), c.w, std::log1p(n / static_cast<double>(df))});
  }
  return SemanticSpace(std::move(dims), lex);
}

/// Document in the semantic space: raw tf-idf weights, their L1
/// normalization (uniform when all zero) and their L2 normalization.
struct DocVector {
  std::string doc_id;
  std::vector<double> w;
  std::vector<double> p;
  std::vector<double> unit;
};

inline std::vector<double> l1_normalized(std::span<const double> w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (s <= 0.0) return std::vector<double>(w.size(), 1.0 / static_cast<double>(w.size()));
  std::vector<double> out(w.begin(), w.end());
  for (auto& v : out) v /= s;
  return out;
}

inline std::vector<double> l2_normalized(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  std::vector<double> out(w.begin(), w.end());
  if (s <= 0.0) return out;
  const double inv = 1.0 / std::sqrt(s);
  for (auto& v : out) v *= inv;
  return out;
}

inline DocVector make_doc_vector(std::string doc_id, std::vector<double> w) {
  for (double v : w) require_invariant(std::isfinite(v) && v >= 0.0, "document weights must be finite and >= 0");
  DocVector out{std::move(doc_id), std::move(w), {}, {}};
  out.p = l1_normalized(out.w);
  out.unit = l2_normalized(out.w);
  return out;
}

/// w_i = tf_i * idf_i with idf_i = ln(1 + N / df_i).
inline DocVector vectorize(const MappedDocument& doc, const SemanticSpace& space) {
  std::vector<double> tf(space.k(), 0.0);
  for (const auto& [g, c] : doc.group_counts)
    for (auto dim : space.dims_touched_by(g)) tf[dim] += c;
  for (std::size_t i = 0; i < tf.size(); ++i) tf[i] *= space.dim(i).idf;
  return make_doc_vector(doc.doc_id, std::move(tf));
}

inline std::vector<DocVector> vectorize_all(std::span<const MappedDocument> docs, const SemanticSpace& space,
                                            std::size_t threads = 1) {
  std::vector<DocVector> out(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) { out[i] = vectorize(docs[i], space); });
  return out;
}

/// Representative vector of a document group: mean of member unit vectors,
/// re-normalized to unit length.
struct FeatureVector {
  std::string label;
  std::vector<double> centroid;
  std::vector<std::string> members;
  std::size_t member_count() const { return members.size(); }
};

inline FeatureVector centroid(std::span<const DocVector* const> vectors, std::string label) {
  require_input(!vectors.empty(), "centroid of an empty vector list");
  const std::size_t k = vectors.front()->unit.size();
  std::vector<double> sum(k, 0.0);
  FeatureVector fv;
  fv.label = std::move(label);
  for (const DocVector* v : vectors) {
    require_input(v->unit.size() == k, "centroid: dimension mismatch");
    for (std::size_t i = 0; i < k; ++i) sum[i] += v->unit[i];
    fv.members.push_back(v->doc_id);
  }
  const double inv = 1.0 / static_cast<double>(vectors.size());
  for (auto& s : sum) s *= inv;
  fv.centroid = l2_normalized(sum);
  return fv;
}

inline FeatureVector centroid(std::span<const DocVector> vectors, std::string label) {
  std::vector<const DocVector*> ptrs;
  for (const auto& v : vectors) ptrs.push_back(&v);
  return centroid(std::span<const DocVector* const>(ptrs), std::move(label));
}

/// Mean of already-normalized vectors (e.g. group centroids), re-normalized.
inline std::vector<double> mean_direction(std::span<const std::vector<double>* const> vectors) {
  require_input(!vectors.empty(), "mean of an empty vector list");
  std::vector<double> sum(vectors.front()->size(), 0.0);
  for (const auto* v : vectors)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
  for (auto& s : sum) s /= static_cast<double>(vectors.size());
  return l2_normalized(sum);
}

} // namespace codexmine
