#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "corpus.hpp"
#include "discovery.hpp"
#include "error.hpp"
#include "lexicon.hpp"
#include "random.hpp"

namespace codexmine::synth {

/// Scenario of a synthetic corpus with planted term-target relations.
///
/// Documents are bags of theme vocabulary: every document has one theme and
/// one subtheme; tokens come from the subtheme with probability
/// `subtheme_focus`, otherwise from the whole theme, Zipf-distributed by
/// rank. The target is mentioned mostly in the first `target_themes`
/// themes. A target-mentioning document carries the relation context with
/// probability max(relation_context, highest plant rate); seeds and
/// positives are planted only there, so each appears in a fraction of
/// `positive_rate` of the target documents. Distractors live in one home
/// theme each and ignore the target.
struct GeneratorSpec {
  std::size_t documents = 2000;
  std::size_t themes = 9;
  std::size_t subthemes_per_theme = 3;
  std::size_t terms_per_theme = 30;
  double subtheme_focus = 0.7;
  double zipf_exponent = 1.0;

  std::string target = "Diabetes";
  std::vector<std::string> target_synonyms = {"diabetes mellitus"};
  std::string relationship = "BiomarkerFor";
  std::size_t target_themes = 1;
  double target_rate_in = 0.7;  ///< target mention probability in the target themes
  double target_rate_out = 0.05; ///< ... and elsewhere
  double relation_context = 0.5;

  std::size_t seeds = 9;
  std::size_t positives = 20;
  double positive_rate = 0.35; ///< also used for the seeds
  std::size_t distractors = 200;
  double distractor_rate = 0.1; ///< within the home theme's documents

  std::size_t min_length = 30;
  std::size_t max_length = 60;
  double noise_rate = 0.03;
  std::size_t noise_vocabulary = 400;
  std::uint64_t seed = 42;

  std::size_t group_count() const { return themes * terms_per_theme + seeds + positives + distractors + 1; }

  void validate() const {
    const auto rate = [](double r, const char* name) {
      require_input(r >= 0.0 && r <= 1.0, std::string(name) + " must lie in [0, 1]");
    };
    rate(subtheme_focus, "subtheme_focus");
    rate(target_rate_in, "target_rate_in");
    rate(target_rate_out, "target_rate_out");
    rate(relation_context, "relation_context");
    rate(positive_rate, "positive_rate");
    rate(distractor_rate, "distractor_rate");
    rate(noise_rate, "noise_rate");
    require_input(documents > 0, "documents must be > 0");
    require_input(themes > 0 && subthemes_per_theme > 0, "themes and subthemes must be > 0");
    require_input(terms_per_theme >= subthemes_per_theme, "terms_per_theme must be >= subthemes_per_theme");
    require_input(target_themes <= themes, "target_themes exceeds themes");
    require_input(seeds > 0, "at least one seed term is required");
    require_input(min_length >= 1 && min_length <= max_length, "document length range is invalid");
    require_input(zipf_exponent >= 0.0, "zipf_exponent must be >= 0");
    require_input(noise_rate == 0.0 || noise_vocabulary > 0, "noise needs a noise vocabulary");
    require_input(!text::surface_key(target).empty(), "target label has no word tokens");
    require_input(seeds + positives + distractors + themes * terms_per_theme <= kNameSpace,
                  "vocabulary too large for the name generator");
  }

  static constexpr std::size_t kNameSpace = 80 * 80 * 80 / 2;
};

struct TruthEntry {
  std::string term;
  std::string relationship;
  std::string target;
  bool positive = false;
};

struct DocTheme {
  std::string doc_id;
  std::size_t theme = 0;
  std::size_t subtheme = 0; ///< global subtheme index
};

/// Ground truth of a generated scenario. Never an input to discovery.
struct GroundTruth {
  std::vector<TruthEntry> entries;
  std::vector<DocTheme> documents;
  /// Theme of each theme-vocabulary group id.
  std::map<std::string, std::size_t> group_theme;
};

struct Scenario {
  std::vector<Document> documents;
  std::vector<SynonymGroup> groups;
  std::vector<SeedEntry> seeds;
  GroundTruth truth;
};

namespace detail {

/// Distinct pronounceable CV-syllable words.
class NameGenerator {
public:
  explicit NameGenerator(Rng& rng) : rng_(&rng) {}

  std::string next() {
    static constexpr std::string_view kConsonants = "bdfghklmnprstvwz";
    static constexpr std::string_view kVowels = "aeiou";
    while (true) {
      std::string word;
      const std::size_t syllables = 2 + rng_->index(2);
      for (std::size_t i = 0; i < syllables; ++i) {
        word += kConsonants[rng_->index(kConsonants.size())];
        word += kVowels[rng_->index(kVowels.size())];
      }
      if (used_.insert(word).second) return word;
    }
  }

private:
  Rng* rng_;
  std::set<std::string> used_;
};

class Zipf {
public:
  Zipf(std::size_t n, double exponent) {
    double total = 0.0;
    for (std::size_t r = 1; r <= n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r), exponent);
      cdf_.push_back(total);
    }
    for (auto& c : cdf_) c /= total;
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

private:
  std::vector<double> cdf_;
};

inline const std::vector<std::pair<std::string, std::vector<std::string>>>& candidate_classes() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> classes = {
      {"genes", {"regulatory genes", "structural genes"}},
      {"proteins", {"plasma proteins", "membrane proteins"}},
      {"hormones", {"peptide hormones", "steroid hormones"}},
      {"enzymes", {"hydrolases", "transferases"}},
  };
  return classes;
}

inline std::vector<TaxonPath> candidate_families() {
  std::vector<TaxonPath> out;
  for (const auto& [cls, fams] : candidate_classes())
    for (const auto& f : fams)
      out.push_back(TaxonPath{{"entity", "life science", "biochemistry", "molecule", "substance", cls, f}});
  return out;
}

inline TaxonPath theme_path(std::size_t theme, std::size_t themes_per_area) {
  const std::size_t area = theme / themes_per_area;
  return TaxonPath{{"entity", "life science", "area " + std::to_string(area + 1),
                    "field " + std::to_string(area + 1), "theme " + std::to_string(theme + 1)}};
}

} // namespace detail

/// Builds the scenario in memory. Fully determined by the GeneratorSpec fields, seed included.
inline Scenario generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  detail::NameGenerator names(rng);
  Scenario out;

  // vocabulary
  const std::size_t S = spec.subthemes_per_theme;
  std::vector<std::vector<std::string>> theme_terms(spec.themes);
  for (std::size_t t = 0; t < spec.themes; ++t) {
    const auto base = detail::theme_path(t, 3);
    for (std::size_t j = 0; j < spec.terms_per_theme; ++j) {
      const auto word = names.next();
      theme_terms[t].push_back(word);
      auto path = base;
      path.levels.push_back("subtheme " + std::to_string(t + 1) + "." + std::to_string(j % S + 1));
      const auto id = "g_t" + std::to_string(t + 1) + "_" + word;
      out.groups.push_back({id, word, {{word, "en"}}, path});
      out.truth.group_theme[id] = t;
    }
  }
  const auto families = detail::candidate_families();
  const auto add_candidate = [&](std::size_t family) {
    const auto word = names.next();
    out.groups.push_back({"g_" + word, word, {{word, "en"}}, families[family]});
    return word;
  };
  std::vector<std::string> seed_terms, positive_terms, distractor_terms;
  for (std::size_t i = 0; i < spec.seeds; ++i) seed_terms.push_back(add_candidate(i % families.size()));
  for (std::size_t i = 0; i < spec.positives; ++i) positive_terms.push_back(add_candidate(rng.index(families.size())));
  std::vector<std::size_t> distractor_home;
  for (std::size_t i = 0; i < spec.distractors; ++i) {
    distractor_terms.push_back(add_candidate(rng.index(families.size())));
    distractor_home.push_back(i % spec.themes);
  }
  {
    std::vector<Member> members{{text::casefold(spec.target), "en"}};
    for (const auto& s : spec.target_synonyms) members.push_back({s, "en"});
    out.groups.push_back({"g_target_" + text::join(text::tokenize(spec.target), "_"), members.front().surface, members,
                          TaxonPath{{"entity", "medicine", "pathology", "disease", "metabolic disorders"}}});
  }
  std::vector<std::string> target_surfaces;
  for (const auto& m : out.groups.back().members) target_surfaces.push_back(m.surface);
  std::vector<std::string> noise;
  for (std::size_t i = 0; i < spec.noise_vocabulary; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "nn%04zu", i);
    noise.emplace_back(buf);
  }

  for (const auto& s : seed_terms) out.seeds.push_back({s, spec.relationship, spec.target});
  for (const auto& p : positive_terms) out.truth.entries.push_back({p, spec.relationship, spec.target, true});
  for (const auto& d : distractor_terms) out.truth.entries.push_back({d, spec.relationship, spec.target, false});

  // documents
  const detail::Zipf theme_zipf(spec.terms_per_theme, spec.zipf_exponent);
  std::vector<std::vector<std::size_t>> sub_members(S);
  for (std::size_t j = 0; j < spec.terms_per_theme; ++j) sub_members[j % S].push_back(j);
  std::vector<detail::Zipf> sub_zipf;
  for (const auto& m : sub_members) sub_zipf.emplace_back(m.size(), spec.zipf_exponent);

  const double max_plant = spec.positive_rate;
  const double context_rate = std::max(spec.relation_context, max_plant);
  const double plant_given_context = context_rate > 0.0 ? spec.positive_rate / context_rate : 0.0;

  std::uint64_t doc_number = 20100000;
  for (std::size_t i = 0; i < spec.documents; ++i) {
    doc_number += 1 + rng.index(40);
    const std::size_t theme = rng.index(spec.themes);
    const std::size_t sub = rng.index(S);
    const auto& vocab = theme_terms[theme];
    const auto draw_theme_word = [&] {
      if (rng.bernoulli(spec.subtheme_focus)) return vocab[sub_members[sub][sub_zipf[sub].draw(rng)]];
      return vocab[theme_zipf.draw(rng)];
    };

    std::vector<std::string> tokens;
    const std::size_t length = rng.between(spec.min_length, spec.max_length);
    for (std::size_t k = 0; k < length; ++k) {
      if (rng.bernoulli(spec.noise_rate)) tokens.push_back(noise[rng.index(noise.size())]);
      else tokens.push_back(draw_theme_word());
    }
    const auto insert = [&](const std::string& term) {
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng.index(tokens.size() + 1)), term);
    };
    const auto mention = [&](const std::string& term) {
      const std::size_t times = 1 + rng.index(2);
      for (std::size_t k = 0; k < times; ++k) insert(term);
    };

    const double target_rate = theme < spec.target_themes ? spec.target_rate_in : spec.target_rate_out;
    if (rng.bernoulli(target_rate)) {
      mention(target_surfaces[rng.index(target_surfaces.size())]);
      if (rng.bernoulli(context_rate)) {
        for (const auto& s : seed_terms)
          if (rng.bernoulli(plant_given_context)) mention(s);
        for (const auto& p : positive_terms)
          if (rng.bernoulli(plant_given_context)) mention(p);
      }
    }
    for (std::size_t d = 0; d < distractor_terms.size(); ++d)
      if (distractor_home[d] == theme && rng.bernoulli(spec.distractor_rate)) mention(distractor_terms[d]);

    std::vector<std::string> title;
    for (int k = 0; k < 4; ++k) title.push_back(draw_theme_word());
    std::string body;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (k) body += (k % 12 == 0) ? ". " : " ";
      body += tokens[k];
    }
    body += '.';
    title.front()[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title.front()[0])));

    Document doc{std::to_string(doc_number), text::join(title, " "), body, Source::synthetic};
    out.truth.documents.push_back({doc.doc_id, theme, theme * S + sub});
    out.documents.push_back(std::move(doc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string corpus_jsonl(std::span<const Document> docs) {
  std::string out;
  for (const auto& d : docs) out += to_jsonl(d) + '\n';
  return out;
}

inline std::string lexicon_tsv(std::span<const SynonymGroup> groups) {
  return Lexicon::from_groups({groups.begin(), groups.end()}).serialize();
}

inline std::string truth_tsv(const GroundTruth& truth) {
  std::string out = "term\trelationship\ttarget\tkind\n";
  for (const auto& e : truth.entries)
    out += e.term + '\t' + e.relationship + '\t' + e.target + '\t' + (e.positive ? "positive" : "distractor") + '\n';
  return out;
}

inline std::string themes_tsv(const GroundTruth& truth) {
  std::string out = "doc_id\ttheme\tsubtheme\n";
  for (const auto& d : truth.documents)
    out += d.doc_id + '\t' + std::to_string(d.theme) + '\t' + std::to_string(d.subtheme) + '\n';
  return out;
}

inline std::vector<TruthEntry> parse_truth(std::string_view content) {
  std::vector<TruthEntry> out;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    require_input(cols.size() == 4, "truth line " + std::to_string(line_no) + ": expected 4 columns");
    if (cols[0] == "term" && cols[3] == "kind") continue;
    require_input(cols[3] == "positive" || cols[3] == "distractor",
                  "truth line " + std::to_string(line_no) + ": kind must be positive or distractor");
    out.push_back({std::string(cols[0]), std::string(cols[1]), std::string(cols[2]), cols[3] == "positive"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Metrics {
  std::size_t rows = 0;
  std::size_t positives = 0;
  std::size_t distractors = 0;
  std::vector<std::pair<std::size_t, double>> precision_at; ///< k -> precision
  double recall = 0.0;       ///< positives anywhere in the output
  double recall_at_50 = 0.0; ///< positives within the first 50 rows
  double auc = 0.0;
};

/// Probability that a random positive outscores a random negative, ties
/// counted one half.
inline double roc_auc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  require_input(!positive_scores.empty() && !negative_scores.empty(), "AUC needs positives and negatives");
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (double p : positive_scores) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(neg.begin(), neg.end(), p);
    wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(positive_scores.size()) * static_cast<double>(neg.size()));
}

/// Positives are matched on (term, relationship, target); a distractor's
/// score is its best confidence for the target under any relationship.
/// Terms absent from the output score zero.
inline Metrics evaluate(std::span<const CandidateRow> rows, std::span<const TruthEntry> truth) {
  const auto key = [](std::string_view s) { return text::surface_key(s); };
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> first_rank;
  std::map<std::tuple<std::string, std::string, std::string>, double> triple_score;
  std::map<std::pair<std::string, std::string>, double> term_score;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto t = std::make_tuple(key(r.term), r.relationship, key(r.object));
    first_rank.emplace(t, i);
    auto& ts = triple_score[t];
    ts = std::max(ts, r.confidence);
    auto& s = term_score[{key(r.term), key(r.object)}];
    s = std::max(s, r.confidence);
  }

  Metrics m;
  m.rows = rows.size();
  std::vector<double> pos_scores, neg_scores;
  std::set<std::size_t> positive_rows;
  std::size_t found = 0, found_50 = 0;
  for (const auto& e : truth) {
    if (e.positive) {
      ++m.positives;
      const auto t = std::make_tuple(key(e.term), e.relationship, key(e.target));
      const auto it = first_rank.find(t);
      pos_scores.push_back(it == first_rank.end() ? 0.0 : triple_score[t]);
      if (it != first_rank.end()) {
        ++found;
        if (it->second < 50) ++found_50;
        // every row carrying this triple counts toward precision
        for (std::size_t i = 0; i < rows.size(); ++i)
          if (std::make_tuple(key(rows[i].term), rows[i].relationship, key(rows[i].object)) == t)
            positive_rows.insert(i);
      }
    } else {
      ++m.distractors;
      const auto it = term_score.find({key(e.term), key(e.target)});
      neg_scores.push_back(it == term_score.end() ? 0.0 : it->second);
    }
  }
  require_input(m.positives > 0, "ground truth lists no positives");
  for (std::size_t k : {10, 25, 50}) {
    std::size_t hits = 0;
    for (auto i : positive_rows)
      if (i < k) ++hits;
    m.precision_at.emplace_back(k, static_cast<double>(hits) / static_cast<double>(k));
  }
  m.recall = static_cast<double>(found) / static_cast<double>(m.positives);
  m.recall_at_50 = static_cast<double>(found_50) / static_cast<double>(m.positives);
  m.auc = neg_scores.empty() ? 1.0 : roc_auc(pos_scores, neg_scores);
  return m;
}

inline std::string metrics_text(const Metrics& m) {
  char buf[96];
  std::string out;
  const auto line = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%-14s %8.4f\n", name, v);
    out += buf;
  };
  std::snprintf(buf, sizeof buf, "%-14s %8zu\n%-14s %8zu\n%-14s %8zu\n", "rows", m.rows, "positives", m.positives,
                "distractors", m.distractors);
  out += buf;
  for (const auto& [k, p] : m.precision_at) {
    const auto name = "precision@" + std::to_string(k);
    line(name.c_str(), p);
  }
  line("recall", m.recall);
  line("recall@50", m.recall_at_50);
  line("roc_auc", m.auc);
  return out;
}

inline std::string metrics_tsv(const Metrics& m) {
  char buf[96];
  std::string out = "metric\tvalue\n";
  out += "rows\t" + std::to_string(m.rows) + "\npositives\t" + std::to_string(m.positives) + "\ndistractors\t" +
         std::to_string(m.distractors) + '\n';
  const auto line = [&](const std::string& name, double v) {
    std::snprintf(buf, sizeof buf, "\t%.6f\n", v);
    out += name + buf;
  };
  for (const auto& [k, p] : m.precision_at) line("precision@" + std::to_string(k), p);
  line("recall", m.recall);
  line("recall@50", m.recall_at_50);
  line("roc_auc", m.auc);
  return out;
}

} // namespace codexmine::synth
