#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "codexmine/codexmine.hpp"
#include "gaussians.hpp"
#include "sample_data.hpp"

using namespace codexmine;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> random_distribution(Rng& rng, std::size_t n, bool sparse) {
  std::vector<double> p(n);
  double s = 0;
  for (auto& x : p) {
    x = sparse && rng.bernoulli(0.3) ? 0.0 : rng.uniform();
    s += x;
  }
  if (s == 0) p[rng.index(n)] = s = 1.0;
  for (auto& x : p) x /= s;
  return p;
}

long double oracle_entropy(const std::vector<double>& p) {
  long double h = 0;
  for (double x : p)
    if (x > 0) h -= static_cast<long double>(x) * std::log(static_cast<long double>(x));
  return h;
}

long double oracle_kl(const std::vector<double>& p, const std::vector<double>& q) {
  const long double eps = kKlSmoothing, n = static_cast<long double>(p.size());
  long double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) d += p[i] * std::log(p[i] / ((1 - eps) * q[i] + eps / n));
  return d;
}

Outcome information_oracle() {
  Rng rng(101);
  double worst = 0, min_kl = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = rng.between(2, 100);
    const auto p = random_distribution(rng, n, t % 2), q = random_distribution(rng, n, t % 3 == 0);
    worst = std::max(worst, std::fabs(static_cast<double>(entropy(p) - oracle_entropy(p))));
    const double kl = kl_divergence(p, q);
    worst = std::max(worst, std::fabs(static_cast<double>(kl - oracle_kl(p, q))));
    min_kl = std::min(min_kl, kl);
  }
  return {worst <= 1e-9 && min_kl >= -1e-12, fmt("max |delta| %.2e nats, min KL %.2e", worst, min_kl)};
}

Outcome similarity_contract() {
  const std::size_t dims = 30;
  std::string tsv;
  for (std::size_t i = 0; i < dims; ++i)
    tsv += "g" + std::to_string(i) + "\tw" + std::to_string(i) + "\tw" + std::to_string(i) + ",en\troot/t" +
           std::to_string(i % 7) + "/s" + std::to_string(i) + "\n";
  const auto lex = Lexicon::parse(tsv);
  std::vector<Dimension> d;
  for (GroupIndex g = 0; g < dims; ++g) d.push_back({{DescriptorKind::group, g}, lex.group(g).id, "", 1.0, 1.0});
  const SemanticSpace space(d, lex);
  Rng rng(202);
  const auto random_vector = [&] {
    std::vector<double> w(dims, 0.0);
    for (auto& x : w)
      if (rng.bernoulli(0.3)) x = rng.uniform() * 10.0;
    return make_doc_vector("v", w);
  };
  double lo = 1, hi = 0, asym = 0, self = 1;
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_vector(), b = random_vector();
    const double ab = similarity(space, a, b), ba = similarity(space, b, a);
    lo = std::min(lo, ab);
    hi = std::max(hi, ab);
    asym = std::max(asym, std::fabs(ab - ba));
    self = std::min(self, similarity(space, a, a));
  }
  return {lo >= 0 && hi <= 1 && asym <= 1e-12 && self >= 0.999,
          fmt("range [%.4f, %.4f], max asymmetry %.1e, min self %.6f", lo, hi, asym, self)};
}

std::size_t scan_bmu(const SomGrid& g, const std::vector<double>& v) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const double d = squared_distance(g.code(c), v);
    if (d < best_d) best_d = d, best = c;
  }
  return best;
}

Outcome som_correctness() {
  const auto data = testdata::gaussian_clusters(303);
  TrainConfig cfg;
  cfg.epochs = 30;
  std::vector<double> qe;
  const auto grid = fit(data.points, 10, 10, cfg, [&](std::size_t, const SomGrid& g) {
    qe.push_back(metrics(g, data.points).quantization_error);
  });
  std::map<std::size_t, std::map<std::size_t, std::size_t>> votes;
  for (std::size_t i = 0; i < data.points.size(); ++i) ++votes[scan_bmu(grid, data.points[i])][data.labels[i]];
  std::size_t agree = 0;
  for (const auto& [cell, v] : votes) {
    std::size_t best = 0;
    for (const auto& [label, n] : v) best = std::max(best, n);
    agree += best;
  }
  const double purity = static_cast<double>(agree) / static_cast<double>(data.points.size());
  const double te = metrics(grid, data.points).topographic_error;
  double worst_rise = 0;
  for (std::size_t e = qe.size() - 14; e < qe.size(); ++e) worst_rise = std::max(worst_rise, qe[e] / qe[e - 1] - 1.0);
  return {purity >= 0.9 && te <= 0.1 && worst_rise <= 0.02 && qe.size() == 30,
          fmt("purity %.3f, TE %.3f, worst QE step in last 15 epochs %+.2f%%", purity, te, 100 * worst_rise)};
}

std::vector<double> qe_curve(const testdata::LabelledPoints& data, std::size_t coarse_levels, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.coarse_levels = coarse_levels;
  cfg.seed = seed;
  std::vector<double> qe;
  fit(data.points, 10, 10, cfg,
      [&](std::size_t, const SomGrid& g) { qe.push_back(metrics(g, data.points).quantization_error); });
  return qe;
}

std::size_t epochs_to_reach(const std::vector<double>& qe, double target) {
  for (std::size_t e = 0; e < qe.size(); ++e)
    if (qe[e] <= target) return e + 1;
  return qe.size() + 1;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome coarse_benefit() {
  std::vector<double> random_epochs, coarse_epochs;
  const TrainConfig defaults;
  const double coarse_cost = static_cast<double>(coarse_budget(defaults)) * 25.0 / 100.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = testdata::gaussian_clusters(400 + seed);
    const auto random = qe_curve(data, 0, seed), coarse = qe_curve(data, 1, seed);
    const double target = 1.05 * random.back();
    random_epochs.push_back(static_cast<double>(epochs_to_reach(random, target)));
    coarse_epochs.push_back(static_cast<double>(epochs_to_reach(coarse, target)));
  }
  const double r = median(random_epochs), c = median(coarse_epochs);
  return {c <= 0.8 * r, fmt("median epochs to within 5%% of final QE: random init %.1f, coarse init %.1f (%.0f%%); "
                            "coarse stage adds %.1f fine-epoch equivalents",
                            r, c, 100.0 * c / r, coarse_cost)};
}

struct ScenarioFiles {
  fs::path dir;
  ~ScenarioFiles() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

Outcome planted_discovery() {
  const auto t0 = Clock::now();
  const synth::GeneratorSpec spec;
  auto scenario = synth::generate(spec);
  ScenarioFiles files{fs::temp_directory_path() / ("codexmine_acceptance_" + std::to_string(::getpid()))};
  fs::create_directories(files.dir);
  write_file(files.dir / "lexicon.tsv", synth::lexicon_tsv(scenario.groups));
  write_file(files.dir / "corpus.jsonl", synth::corpus_jsonl(scenario.documents));
  write_file(files.dir / "seeds.tsv", seeds_tsv(scenario.seeds));
  write_file(files.dir / "truth.tsv", synth::truth_tsv(scenario.truth));
  // the harness keeps the truth in memory; the pipeline sees only the input files
  const auto truth = synth::parse_truth(testdata::slurp((files.dir / "truth.tsv").string()));
  scenario = {};
  fs::remove(files.dir / "truth.tsv");
  if (fs::exists(files.dir / "truth.tsv")) return {false, "truth file still present"};

  const auto lex = Lexicon::load(files.dir / "lexicon.tsv");
  const auto docs = ingest(files.dir / "corpus.jsonl", CorpusFormat::jsonl).documents;
  const auto seeds = parse_seeds(testdata::slurp((files.dir / "seeds.tsv").string()));
  RunConfig cfg;
  cfg.theta = 0.6;
  cfg.threads = 1;
  const auto run = run_discovery(lex, docs, seeds, cfg);
  const auto rows = parse_candidates_tsv(candidates_tsv(run.candidates, cfg.header_lines()));
  const auto m = synth::evaluate(rows, truth);
  const double secs = seconds_since(t0);
  std::size_t depth = 0;
  for (const auto& t : lex.taxa()) depth = std::max(depth, t.depth);
  const bool shape = docs.size() == 2000 && lex.group_count() == 500 && depth == 7 && m.positives == 20 &&
                     m.distractors == 200;
  return {shape && m.recall_at_50 >= 0.8 && m.auc >= 0.9 && secs < 60.0,
          fmt("%zu docs, %zu groups, taxonomy depth %zu, %zu rows: recall@50 %.3f, AUC %.3f", docs.size(),
              lex.group_count(), depth, m.rows, m.recall_at_50, m.auc)};
}

Outcome masked_inference() {
  const auto scenario = synth::generate(synth::GeneratorSpec{});
  const auto full = Lexicon::from_groups(scenario.groups);
  const auto mapped_full = map_corpus(scenario.documents, full);
  std::vector<std::string> eligible;
  for (GroupIndex g = 0; g < full.group_count(); ++g) {
    std::size_t df = 0;
    for (const auto& d : mapped_full.documents) df += d.contains(g);
    if (df >= 5 && scenario.truth.group_theme.count(full.group(g).id)) eligible.push_back(full.group(g).id);
  }
  if (eligible.size() < 50) return {false, "fewer than 50 eligible groups"};
  Rng rng(7);
  rng.shuffle(eligible.begin(), eligible.end());
  eligible.resize(50);
  const auto lex = Lexicon::from_groups(full.records_without({eligible.begin(), eligible.end()}));

  RunConfig cfg;
  cfg.threads = 1;
  const auto mapped = map_corpus(scenario.documents, lex);
  const auto space = build_space(mapped.documents, lex, cfg);
  const auto vectors = vectorize_all(mapped.documents, space);
  const DiscoveryCorpus corpus(lex, mapped.documents, space, vectors);
  const MeaningInference inference(corpus, cfg.similarity());
  const auto unknowns = collect_unknowns(mapped.documents);

  std::size_t hypernym_ok = 0, descriptor_ok = 0;
  for (const auto& id : eligible) {
    const auto& g = full.group(full.group_index(id));
    const auto it = std::find_if(unknowns.begin(), unknowns.end(), [&](const auto& u) { return u.surface == g.canonical; });
    if (it == unknowns.end()) continue;
    const auto m = inference.infer(*it);
    hypernym_ok += lex.taxon_distance(lex.path_of(m.hypernym), g.hypernym) <= 1;
    const auto theme = scenario.truth.group_theme.at(id);
    descriptor_ok += std::any_of(m.descriptors.begin(), m.descriptors.end(), [&](GroupIndex d) {
      const auto t = scenario.truth.group_theme.find(lex.group(d).id);
      return t != scenario.truth.group_theme.end() && t->second == theme;
    });
  }
  return {hypernym_ok >= 35 && descriptor_ok >= 40,
          fmt("hypernym within distance 1: %zu/50, co-theme descriptor: %zu/50", hypernym_ok, descriptor_ok)};
}

Outcome output_fidelity() {
  const auto cfg = testdata::sample_config();
  const auto run = run_discovery(testdata::sample_lexicon(), testdata::sample_corpus(), testdata::sample_seeds(), cfg);
  const auto tsv = candidates_tsv(run.candidates, cfg.header_lines());
  const auto golden = testdata::slurp(testdata::source_path("tests/golden/sample_candidates.tsv"));
  const auto lines = text::split(tsv, '\n');
  std::size_t header = 0;
  while (header < lines.size() && !lines[header].empty() && lines[header][0] == '#') ++header;
  const bool schema = header < lines.size() && lines[header] == "Row\tTerm\tRelationship\tObject\tConf%\t#Docs\tDocIDs";
  const std::regex row(R"(\d+\t[^\t]+\t[^\t]+\t[^\t]+\t\d+\.\d\t\d+\t[^\t]+)");
  std::size_t rows = 0, bad = 0;
  for (std::size_t i = header + 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ++rows;
    bad += !std::regex_match(std::string(lines[i]), row);
  }
  return {schema && bad == 0 && rows > 0 && tsv == golden,
          fmt("%zu rows, schema %s, malformed rows %zu, golden %s", rows, schema ? "ok" : "wrong", bad,
              tsv == golden ? "identical" : "differs")};
}

Outcome determinism() {
  const auto scenario = synth::generate(synth::GeneratorSpec{});
  const auto lex = Lexicon::from_groups(scenario.groups);
  const auto once = [&](std::size_t threads) {
    RunConfig cfg;
    cfg.threads = threads;
    const auto run = run_discovery(lex, scenario.documents, scenario.seeds, cfg);
    return std::pair{candidates_tsv(run.candidates, cfg.header_lines()), map_svg(run.map)};
  };
  const auto a = once(1), b = once(8);
  return {a.first == b.first && a.second == b.second,
          fmt("candidates TSV %s (%zu bytes), SVG %s (%zu bytes)", a.first == b.first ? "identical" : "differs",
              a.first.size(), a.second == b.second ? "identical" : "differs", a.second.size())};
}

} // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double limit_seconds;
  };
  const std::vector<Criterion> criteria{
      {"information-theory oracle", information_oracle, 5.0},
      {"similarity contract", similarity_contract, 5.0},
      {"SOM correctness", som_correctness, 10.0},
      {"coarse rebalancing benefit", coarse_benefit, 0.0},
      {"planted discovery", planted_discovery, 60.0},
      {"masked hypernym inference", masked_inference, 0.0},
      {"output fidelity", output_fidelity, 0.0},
      {"determinism", determinism, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    if (criteria[i].limit_seconds > 0 && secs >= criteria[i].limit_seconds) {
      o.pass = false;
      o.detail += fmt(" (over the %.0f s limit)", criteria[i].limit_seconds);
    }
    failures += !o.pass;
    std::printf("%s %zu %-28s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
