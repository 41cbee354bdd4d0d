#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "lexicon.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace codexmine {

enum class Source { pubmed, trial, internal, synthetic };

inline std::string_view to_string(Source s) {
  switch (s) {
  case Source::pubmed: return "pubmed";
  case Source::trial: return "trial";
  case Source::internal: return "internal";
  case Source::synthetic: return "synthetic";
  }
  return "internal";
}

inline std::optional<Source> parse_source(std::string_view s) {
  if (s == "pubmed") return Source::pubmed;
  if (s == "trial") return Source::trial;
  if (s == "internal") return Source::internal;
  if (s == "synthetic") return Source::synthetic;
  return std::nullopt;
}

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  Source source = Source::internal;
  bool operator==(const Document&) const = default;
};

enum class CorpusFormat { jsonl, pubmed_tsv, textdir };

inline CorpusFormat parse_format(std::string_view s) {
  if (s == "jsonl") return CorpusFormat::jsonl;
  if (s == "pubmed_tsv") return CorpusFormat::pubmed_tsv;
  if (s == "textdir") return CorpusFormat::textdir;
  throw InputError("unsupported corpus format '" + std::string(s) + "' (expected jsonl, pubmed_tsv or textdir)");
}

/// Accepted documents in input order plus per-record problems that were
/// skipped. Duplicate doc_ids are not record-level: they abort ingestion.
struct IngestResult {
  std::vector<Document> documents;
  std::vector<std::string> record_errors;
};

namespace detail {

class CorpusCollector {
public:
  void add(Document doc, std::string_view where) {
    if (doc.doc_id.empty()) {
      result_.record_errors.push_back(std::string(where) + ": missing doc_id");
      return;
    }
    if (text::trim(doc.body).empty()) {
      result_.record_errors.push_back(std::string(where) + ": empty body for doc_id '" + doc.doc_id + "'");
      return;
    }
    require_input(seen_.insert(doc.doc_id).second, "duplicate doc_id '" + doc.doc_id + "'");
    result_.documents.push_back(std::move(doc));
  }
  void error(std::string msg) { result_.record_errors.push_back(std::move(msg)); }
  IngestResult take() { return std::move(result_); }

private:
  IngestResult result_;
  std::unordered_set<std::string> seen_;
};

inline std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require_input(in.good(), "cannot read '" + path.string() + "'");
  return in;
}

} // namespace detail

/// One JSON object per line with keys doc_id, title, body, source.
/// Blank lines and lines starting with '#' are skipped.
inline IngestResult ingest_jsonl(std::istream& in) {
  detail::CorpusCollector collector;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto where = "line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(trimmed);
    } catch (const nlohmann::json::exception& e) {
      collector.error(where + ": invalid JSON (" + e.what() + ")");
      continue;
    }
    if (!j.is_object()) {
      collector.error(where + ": not a JSON object");
      continue;
    }
    const auto str = [&](const char* key) -> std::string {
      auto it = j.find(key);
      if (it == j.end() || it->is_null()) return {};
      if (it->is_string()) return it->get<std::string>();
      if (it->is_number_integer()) return std::to_string(it->get<long long>());
      return it->dump();
    };
    Document doc{str("doc_id"), str("title"), str("body"), Source::internal};
    if (const auto src = str("source"); !src.empty()) {
      auto parsed = parse_source(src);
      if (!parsed) {
        collector.error(where + ": unknown source '" + src + "'");
        continue;
      }
      doc.source = *parsed;
    }
    collector.add(std::move(doc), where);
  }
  return collector.take();
}

/// Columns pmid, title, abstract. An optional header row starting with
/// "pmid" is skipped.
inline IngestResult ingest_pubmed_tsv(std::istream& in) {
  detail::CorpusCollector collector;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    const auto where = "line " + std::to_string(line_no);
    if (line_no == 1 && text::casefold(text::trim(cols[0])) == "pmid") continue;
    if (cols.size() != 3) {
      collector.error(where + ": expected 3 columns (pmid, title, abstract), got " + std::to_string(cols.size()));
      continue;
    }
    collector.add(Document{std::string(text::trim(cols[0])), std::string(text::trim(cols[1])),
                           std::string(cols[2]), Source::pubmed},
                  where);
  }
  return collector.take();
}

/// Every *.txt file is one document; doc_id is the file stem. Files are
/// visited in sorted path order.
inline IngestResult ingest_textdir(const std::filesystem::path& dir) {
  require_input(std::filesystem::is_directory(dir), "not a directory: '" + dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  detail::CorpusCollector collector;
  for (const auto& f : files) {
    auto in = detail::open_or_throw(f);
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    collector.add(Document{f.stem().string(), "", std::move(body), Source::internal}, f.filename().string());
  }
  return collector.take();
}

inline IngestResult ingest(const std::filesystem::path& path, CorpusFormat format) {
  switch (format) {
  case CorpusFormat::textdir: return ingest_textdir(path);
  case CorpusFormat::pubmed_tsv: {
    auto in = detail::open_or_throw(path);
    return ingest_pubmed_tsv(in);
  }
  case CorpusFormat::jsonl: break;
  }
  auto in = detail::open_or_throw(path);
  return ingest_jsonl(in);
}

inline std::string to_jsonl(const Document& d) {
  nlohmann::ordered_json j;
  j["doc_id"] = d.doc_id;
  j["title"] = d.title;
  j["body"] = d.body;
  j["source"] = std::string(to_string(d.source));
  return j.dump();
}

// ---------------------------------------------------------------------------
// Term mapping

struct Occurrence {
  std::string surface;
  std::optional<GroupIndex> group; ///< nullopt = unknown term
  std::size_t position = 0;
  bool operator==(const Occurrence&) const = default;
};

/// Sparse group -> count, sorted by group index.
using GroupCounts = std::vector<std::pair<GroupIndex, std::uint32_t>>;

inline std::uint32_t count_of(const GroupCounts& counts, GroupIndex g) {
  auto it = std::lower_bound(counts.begin(), counts.end(), g,
                             [](const auto& p, GroupIndex v) { return p.first < v; });
  return (it != counts.end() && it->first == g) ? it->second : 0;
}

struct MappedDocument {
  std::string doc_id;
  std::vector<Occurrence> occurrences;
  GroupCounts group_counts;

  bool contains(GroupIndex g) const { return count_of(group_counts, g) > 0; }
  bool operator==(const MappedDocument&) const = default;
};

struct UnknownTerm {
  std::string surface;
  std::size_t document_frequency = 0;
  std::size_t total_frequency = 0;
  std::vector<std::string> sample_doc_ids; ///< first 20, corpus order
};

struct MappingOptions {
  double lambda = 0.2;           ///< weight of the corpus prior in disambiguation
  std::size_t taxon_level = 3;   ///< taxonomy level used for context aggregation
  std::size_t min_unknown_length = 3;
  std::size_t threads = 1;
};

/// Corpus-wide group frequencies used as disambiguation priors.
using GroupPrior = std::vector<std::uint64_t>;

namespace detail {

/// Title twice, then body; each segment is matched separately so no
/// multi-word match crosses a boundary. Positions are global, with one
/// slot reserved for every separator.
inline std::vector<std::vector<std::string>> document_segments(const Document& doc) {
  std::vector<std::vector<std::string>> segs;
  auto title = text::tokenize(doc.title);
  if (!title.empty()) {
    segs.push_back(title);
    segs.push_back(std::move(title));
  }
  segs.push_back(text::tokenize(doc.body));
  return segs;
}

struct ScanEvent {
  std::size_t position;
  std::string surface;
  std::span<const GroupIndex> senses; ///< empty = unmatched token
};

/// Greedy longest-first matching of up to four tokens.
template <class Fn>
void scan_document(const Document& doc, const Lexicon& lex, Fn&& on_event) {
  std::size_t base = 0;
  for (const auto& seg : document_segments(doc)) {
    std::size_t i = 0;
    while (i < seg.size()) {
      std::size_t matched = 0;
      std::span<const GroupIndex> senses;
      std::string key;
      for (std::size_t n = std::min(kMaxSurfaceTokens, seg.size() - i); n >= 1; --n) {
        key = seg[i];
        for (std::size_t k = 1; k < n; ++k) key += ' ' + seg[i + k];
        senses = lex.lookup_key(key);
        if (!senses.empty()) {
          matched = n;
          break;
        }
      }
      if (matched) {
        on_event(ScanEvent{base + i, std::move(key), senses});
        i += matched;
      } else {
        on_event(ScanEvent{base + i, seg[i], {}});
        ++i;
      }
    }
    base += seg.size() + 1;
  }
}

inline GroupCounts tally(std::map<GroupIndex, std::uint32_t> m) { return GroupCounts(m.begin(), m.end()); }

} // namespace detail

/// Counts of the unambiguously resolved groups of a document.
inline GroupCounts unambiguous_context(const Document& doc, const Lexicon& lex) {
  std::map<GroupIndex, std::uint32_t> counts;
  detail::scan_document(doc, lex, [&](const detail::ScanEvent& e) {
    if (e.senses.size() == 1) ++counts[e.senses[0]];
  });
  return detail::tally(std::move(counts));
}

/// Picks one sense of a polysemous surface.
///
/// score(s) = cos(context level-L distribution, point mass at the level-L
/// ancestor of s) + lambda * prior(s) / sum of priors over the senses.
/// Ties go to the higher prior, then to the smaller group id.
inline GroupIndex disambiguate(std::span<const GroupIndex> senses, const GroupCounts& context,
                               const GroupPrior& prior, const Lexicon& lex, const MappingOptions& opts = {}) {
  require_input(!senses.empty(), "disambiguate: no senses");
  std::map<TaxonId, double> dist;
  for (const auto& [g, c] : context) dist[lex.ancestor_at(lex.hypernym(g), opts.taxon_level)] += c;
  double norm = 0.0;
  for (const auto& [_, v] : dist) norm += v * v;
  norm = std::sqrt(norm);

  const auto prior_of = [&](GroupIndex g) -> double { return g < prior.size() ? static_cast<double>(prior[g]) : 0.0; };
  double prior_sum = 0.0;
  for (GroupIndex s : senses) prior_sum += prior_of(s);

  GroupIndex best = senses[0];
  double best_score = -1.0, best_prior = -1.0;
  for (GroupIndex s : senses) {
    double cos = 0.0;
    if (norm > 0.0) {
      auto it = dist.find(lex.ancestor_at(lex.hypernym(s), opts.taxon_level));
      if (it != dist.end()) cos = it->second / norm;
    }
    const double p = prior_of(s);
    const double score = cos + opts.lambda * (prior_sum > 0.0 ? p / prior_sum : 0.0);
    const bool better = score > best_score || (score == best_score && p > best_prior) ||
                        (score == best_score && p == best_prior && lex.group(s).id < lex.group(best).id);
    if (better) {
      best = s;
      best_score = score;
      best_prior = p;
    }
  }
  return best;
}

/// Maps a document onto synonym groups. Polysemous surfaces are resolved
/// with disambiguate() against the document's unambiguous context; short or
/// numeric unmatched tokens are dropped, the rest become unknown occurrences.
inline MappedDocument map_terms(const Document& doc, const Lexicon& lex, const GroupPrior& prior,
                                const MappingOptions& opts = {}) {
  MappedDocument out;
  out.doc_id = doc.doc_id;
  GroupCounts context;
  bool context_ready = false;
  std::map<GroupIndex, std::uint32_t> counts;
  detail::scan_document(doc, lex, [&](const detail::ScanEvent& e) {
    if (e.senses.empty()) {
      if (text::codepoint_length(e.surface) >= opts.min_unknown_length && !text::is_numeric(e.surface))
        out.occurrences.push_back(Occurrence{e.surface, std::nullopt, e.position});
      return;
    }
    GroupIndex g = e.senses[0];
    if (e.senses.size() > 1) {
      if (!context_ready) {
        context = unambiguous_context(doc, lex);
        context_ready = true;
      }
      g = disambiguate(e.senses, context, prior, lex, opts);
    }
    ++counts[g];
    out.occurrences.push_back(Occurrence{e.surface, g, e.position});
  });
  out.group_counts = detail::tally(std::move(counts));
  return out;
}

inline MappedDocument map_terms(const Document& doc, const Lexicon& lex) {
  return map_terms(doc, lex, GroupPrior(lex.group_count(), 0));
}

struct MappedCorpus {
  std::vector<MappedDocument> documents;
  GroupPrior prior;                       ///< first pass: unambiguous counts
  std::vector<std::uint64_t> group_frequency; ///< final counts after disambiguation
};

/// Two passes: priors from unambiguous occurrences (ordered merge), then
/// the per-document mapping, both parallel over documents.
inline MappedCorpus map_corpus(std::span<const Document> docs, const Lexicon& lex, const MappingOptions& opts = {}) {
  MappedCorpus out;
  std::vector<GroupCounts> contexts(docs.size());
  parallel_for(docs.size(), opts.threads, [&](std::size_t i) { contexts[i] = unambiguous_context(docs[i], lex); });
  out.prior.assign(lex.group_count(), 0);
  for (const auto& ctx : contexts)
    for (const auto& [g, c] : ctx) out.prior[g] += c;

  out.documents.resize(docs.size());
  parallel_for(docs.size(), opts.threads,
               [&](std::size_t i) { out.documents[i] = map_terms(docs[i], lex, out.prior, opts); });
  out.group_frequency.assign(lex.group_count(), 0);
  for (const auto& d : out.documents)
    for (const auto& [g, c] : d.group_counts) out.group_frequency[g] += c;
  return out;
}

/// One entry per distinct unknown surface, by descending total frequency
/// (ties by surface).
inline std::vector<UnknownTerm> collect_unknowns(std::span<const MappedDocument> docs) {
  std::unordered_map<std::string, UnknownTerm> acc;
  for (const auto& d : docs) {
    std::set<std::string> seen_here;
    for (const auto& occ : d.occurrences) {
      if (occ.group) continue;
      auto& u = acc[occ.surface];
      u.surface = occ.surface;
      ++u.total_frequency;
      if (seen_here.insert(occ.surface).second) {
        ++u.document_frequency;
        if (u.sample_doc_ids.size() < 20) u.sample_doc_ids.push_back(d.doc_id);
      }
    }
  }
  std::vector<UnknownTerm> out;
  out.reserve(acc.size());
  for (auto& [_, u] : acc) out.push_back(std::move(u));
  std::sort(out.begin(), out.end(), [](const UnknownTerm& a, const UnknownTerm& b) {
    if (a.total_frequency != b.total_frequency) return a.total_frequency > b.total_frequency;
    return a.surface < b.surface;
  });
  return out;
}

} // namespace codexmine
