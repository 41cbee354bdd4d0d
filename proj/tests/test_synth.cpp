#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "codexmine/codexmine.hpp"

using namespace codexmine;

namespace {

std::set<std::string> word_set(const Document& d) {
  std::set<std::string> out;
  for (const auto& t : text::tokenize(d.title)) out.insert(t);
  for (const auto& t : text::tokenize(d.body)) out.insert(t);
  return out;
}

synth::GeneratorSpec small_spec(std::uint64_t seed = 42) {
  synth::GeneratorSpec spec;
  spec.documents = 600;
  spec.seed = seed;
  return spec;
}

} // namespace

TEST(Generate, SameSeedSameBytes) {
  const auto a = synth::generate(small_spec()), b = synth::generate(small_spec());
  EXPECT_EQ(synth::corpus_jsonl(a.documents), synth::corpus_jsonl(b.documents));
  EXPECT_EQ(synth::lexicon_tsv(a.groups), synth::lexicon_tsv(b.groups));
  EXPECT_EQ(synth::truth_tsv(a.truth), synth::truth_tsv(b.truth));
  EXPECT_EQ(synth::themes_tsv(a.truth), synth::themes_tsv(b.truth));
  EXPECT_EQ(seeds_tsv(a.seeds), seeds_tsv(b.seeds));
  const auto c = synth::generate(small_spec(43));
  EXPECT_NE(synth::corpus_jsonl(a.documents), synth::corpus_jsonl(c.documents));
}

TEST(Generate, LexiconPassesValidation) {
  const synth::GeneratorSpec spec;
  const auto s = synth::generate(spec);
  EXPECT_EQ(s.groups.size(), spec.group_count());
  EXPECT_EQ(spec.group_count(), 500u);
  const auto lex = Lexicon::parse(synth::lexicon_tsv(s.groups));
  EXPECT_EQ(lex.group_count(), 500u);
  for (const auto& seed : s.seeds) EXPECT_EQ(lex.lookup(seed.term).size(), 1u) << seed.term;
  for (const auto& e : s.truth.entries) EXPECT_EQ(lex.lookup(e.term).size(), 1u) << e.term;
  EXPECT_EQ(lex.lookup("diabetes mellitus").size(), 1u);
}

TEST(Generate, CorpusIngestsWithoutErrors) {
  const auto s = synth::generate(small_spec());
  std::istringstream in(synth::corpus_jsonl(s.documents));
  const auto result = ingest_jsonl(in);
  EXPECT_TRUE(result.record_errors.empty());
  EXPECT_EQ(result.documents, s.documents);
  std::set<std::string> ids;
  for (const auto& d : s.documents) ids.insert(d.doc_id);
  EXPECT_EQ(ids.size(), s.documents.size());
}

TEST(Generate, PlantedCoOccurrenceRate) {
  const synth::GeneratorSpec spec;
  const auto s = synth::generate(spec);
  std::vector<std::set<std::string>> words;
  for (const auto& d : s.documents) words.push_back(word_set(d));
  std::size_t target_docs = 0;
  for (const auto& w : words) target_docs += w.count("diabetes") > 0 || w.count("mellitus") > 0;
  ASSERT_GT(target_docs, 100u);

  std::vector<std::string> planted;
  for (const auto& seed : s.seeds) planted.push_back(seed.term);
  for (const auto& e : s.truth.entries)
    if (e.positive) planted.push_back(e.term);
  double sum = 0;
  for (const auto& term : planted) {
    std::size_t with = 0;
    for (const auto& w : words)
      if ((w.count("diabetes") || w.count("mellitus")) && w.count(term)) ++with;
    sum += static_cast<double>(with) / static_cast<double>(target_docs);
  }
  EXPECT_NEAR(sum / static_cast<double>(planted.size()), spec.positive_rate, 0.05);
}

TEST(Generate, RateExtremes) {
  auto spec = small_spec();
  spec.positive_rate = 1.0;
  spec.relation_context = 1.0;
  auto s = synth::generate(spec);
  std::string first_positive;
  for (const auto& e : s.truth.entries)
    if (e.positive) {
      first_positive = e.term;
      break;
    }
  for (const auto& d : s.documents) {
    const auto w = word_set(d);
    if (w.count("diabetes") || w.count("mellitus")) {
      EXPECT_TRUE(w.count(first_positive)) << d.doc_id;
    }
  }

  spec.positive_rate = 0.0;
  spec.relation_context = 0.5;
  s = synth::generate(spec);
  for (const auto& d : s.documents) {
    const auto w = word_set(d);
    for (const auto& seed : s.seeds) EXPECT_FALSE(w.count(seed.term));
    for (const auto& e : s.truth.entries)
      if (e.positive) {
        EXPECT_FALSE(w.count(e.term));
      }
  }
}

TEST(Generate, InvalidSpec) {
  auto spec = small_spec();
  spec.positive_rate = 1.5;
  EXPECT_THROW(synth::generate(spec), InputError);
  spec = small_spec();
  spec.target_themes = 20;
  EXPECT_THROW(synth::generate(spec), InputError);
}

TEST(Truth, RoundTrip) {
  const auto s = synth::generate(small_spec());
  const auto parsed = synth::parse_truth(synth::truth_tsv(s.truth));
  ASSERT_EQ(parsed.size(), s.truth.entries.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    EXPECT_EQ(parsed[i].term, s.truth.entries[i].term);
    EXPECT_EQ(parsed[i].positive, s.truth.entries[i].positive);
  }
  EXPECT_EQ(s.truth.documents.size(), s.documents.size());
  EXPECT_THROW(synth::parse_truth("a\tb\tc\tmaybe\n"), InputError);
}

TEST(Evaluate, PerfectRankingHasUnitAuc) {
  std::vector<synth::TruthEntry> truth;
  std::vector<CandidateRow> rows;
  for (int i = 0; i < 20; ++i) {
    truth.push_back({"pos" + std::to_string(i), "BiomarkerFor", "Diabetes", true});
    rows.push_back({static_cast<std::size_t>(i + 1), "pos" + std::to_string(i), "BiomarkerFor", "Diabetes",
                    90.0 - i, 5, {}});
  }
  for (int i = 0; i < 50; ++i) {
    truth.push_back({"neg" + std::to_string(i), "BiomarkerFor", "Diabetes", false});
    if (i < 10)
      rows.push_back({static_cast<std::size_t>(21 + i), "neg" + std::to_string(i), "BiomarkerFor", "Diabetes",
                      40.0 - i, 5, {}});
  }
  const auto m = synth::evaluate(rows, truth);
  EXPECT_EQ(m.auc, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.recall_at_50, 1.0);
  EXPECT_EQ(m.precision_at[0].second, 1.0);
  EXPECT_DOUBLE_EQ(m.precision_at[1].second, 20.0 / 25.0);
}

TEST(Evaluate, RandomRankingNearHalf) {
  double sum = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    std::vector<synth::TruthEntry> truth;
    std::vector<CandidateRow> rows;
    for (int i = 0; i < 200; ++i) {
      const bool pos = i < 100;
      const auto term = "t" + std::to_string(i);
      truth.push_back({term, "BiomarkerFor", "Diabetes", pos});
      rows.push_back({0, term, "BiomarkerFor", "Diabetes", std::round(rng.uniform() * 1000.0) / 10.0, 3, {}});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
    sum += synth::evaluate(rows, truth).auc;
  }
  EXPECT_NEAR(sum / 10.0, 0.5, 0.1);
}

TEST(Evaluate, AucMatchesPairCount) {
  const std::vector<double> pos{0.9, 0.5, 0.5}, neg{0.5, 0.1};
  // pairs won: 0.9 beats both (2), each 0.5 beats 0.1 and ties 0.5 (1.5 each)
  EXPECT_DOUBLE_EQ(synth::roc_auc(pos, neg), 5.0 / 6.0);
  EXPECT_THROW(synth::roc_auc(pos, {}), InputError);
}

TEST(Evaluate, ReportFormats) {
  synth::Metrics m;
  m.rows = 3;
  m.positives = 2;
  m.precision_at = {{10, 0.2}};
  m.auc = 0.75;
  const auto tsv = synth::metrics_tsv(m);
  EXPECT_EQ(tsv.substr(0, 13), "metric\tvalue\n");
  EXPECT_NE(tsv.find("precision@10\t0.200000\n"), std::string::npos);
  EXPECT_NE(tsv.find("roc_auc\t0.750000\n"), std::string::npos);
  EXPECT_NE(synth::metrics_text(m).find("roc_auc"), std::string::npos);
}
