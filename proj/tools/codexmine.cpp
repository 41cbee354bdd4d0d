#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "codexmine/codexmine.hpp"

namespace fs = std::filesystem;
using namespace codexmine;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require_input(in.good(), "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  require_input(out.good(), "cannot write '" + path.string() + "'");
  out << content;
  require_input(out.good(), "write failed for '" + path.string() + "'");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require_invariant(EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) == 1,
                    "SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

/// Header lines shared by every output of one invocation.
struct Provenance {
  std::vector<std::string> lines;

  Provenance(std::string_view command, const RunConfig& cfg) {
    lines.push_back("codexmine " + std::string(command));
    for (auto& l : cfg.header_lines()) lines.push_back(std::move(l));
  }

  void input(std::string_view role, const std::string& path, std::string_view content) {
    lines.push_back(std::string(role) + "=" + path + " sha256=" + sha256_hex(content));
  }

  std::string comment(std::string_view prefix = "# ") const {
    std::string out;
    for (const auto& l : lines) out += std::string(prefix) + l + '\n';
    return out;
  }
};

Lexicon load_lexicon(const RunConfig& cfg, Provenance& prov) {
  require_input(!cfg.lexicon.empty(), "missing --lexicon");
  const auto text = read_file(cfg.lexicon);
  prov.input("lexicon", cfg.lexicon, text);
  return Lexicon::parse(text);
}

std::vector<Document> load_corpus(const RunConfig& cfg, Provenance& prov) {
  require_input(!cfg.corpus.empty(), "missing --corpus");
  const auto format = parse_format(cfg.corpus_format);
  auto result = ingest(cfg.corpus, format);
  if (format == CorpusFormat::textdir) {
    std::string listing;
    for (const auto& d : result.documents) listing += to_jsonl(d) + '\n';
    prov.input("corpus", cfg.corpus, listing);
  } else {
    prov.input("corpus", cfg.corpus, read_file(cfg.corpus));
  }
  for (const auto& e : result.record_errors) std::cerr << "warning: " << e << '\n';
  require_input(!result.documents.empty(), "corpus '" + cfg.corpus + "' contains no valid documents");
  return std::move(result.documents);
}

std::vector<SeedEntry> load_seeds(const RunConfig& cfg, Provenance& prov) {
  require_input(!cfg.seeds.empty(), "missing --seeds");
  const auto text = read_file(cfg.seeds);
  prov.input("seeds", cfg.seeds, text);
  return parse_seeds(text);
}

std::optional<SemanticSpace> load_space(const std::string& path, const Lexicon& lex, Provenance& prov) {
  if (path.empty()) return std::nullopt;
  const auto text = read_file(path);
  prov.input("space", path, text);
  return SemanticSpace::from_manifest(text, lex);
}

void add_model_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--k", cfg.k, "semantic space dimensions")->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "weight of the cosine term")->capture_default_str();
  sub->add_option("--beta", cfg.beta, "weight of the topic-divergence term")->capture_default_str();
  sub->add_option("--gamma", cfg.gamma, "weight of the descriptor-overlap term")->capture_default_str();
  sub->add_option("--top-m,--top_m", cfg.top_m, "topics compared by the divergence term")->capture_default_str();
  sub->add_option("--df-min,--df_min", cfg.df_min, "minimum document frequency of group dimensions")
      ->capture_default_str();
  sub->add_option("--lambda", cfg.lambda, "weight of the corpus prior in disambiguation")->capture_default_str();
}

void add_som_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--rows", cfg.rows, "map rows")->capture_default_str();
  sub->add_option("--cols", cfg.cols, "map columns")->capture_default_str();
  sub->add_option("--epochs", cfg.epochs, "batch training epochs")->capture_default_str();
  sub->add_option("--coarse-levels,--coarse_levels", cfg.coarse_levels, "coarse-to-fine initialization levels")
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

void add_discovery_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--theta", cfg.theta, "semantic deviation threshold")->capture_default_str();
  sub->add_option("--n0", cfg.n0, "support half-point of the confidence score")->capture_default_str();
  sub->add_option("--clusters", cfg.clusters, "reference clusters per relationship and target")
      ->capture_default_str();
  sub->add_option("--min-support,--min_support", cfg.min_support, "minimum supporting documents")
      ->capture_default_str();
  sub->add_option("--whitelist", cfg.whitelist, "comma-separated taxonomy nodes (default: seed hypernyms)");
}

void add_common(CLI::App* sub, RunConfig& cfg, std::string& config_path) {
  sub->add_option("--config", config_path, "flat key = value file; keys are option names, flags override");
  sub->add_option("--threads", cfg.threads, "worker threads (default: CODEXMINE_THREADS or all cores)");
}

/// Fills options of `sub` that were not given on the command line. Keys
/// that belong to other subcommands are ignored.
void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  require_input(in.good(), "cannot read config '" + path + "'");
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--") continue;
    auto* op = sub->get_option_no_throw("--" + item.name);
    if (op == nullptr || op->count() > 0) continue;
    for (const auto& v : item.inputs) op->add_result(v);
    op->run_callback();
  }
}

std::string map_svg_comment(const Provenance& prov) {
  std::string out;
  for (const auto& l : prov.lines) out += l + '\n';
  if (!out.empty()) out.pop_back();
  return out;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) { return fs::path(cfg.out_dir) / name; }

} // namespace

int run(int argc, char** argv) {
  CLI::App app{"Semantic text mining over a synonym-group lexicon: map corpora, train information maps and "
               "discover candidate terms related to a target concept."};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path, space_path, codebook_path, truth_path, candidates_path, out_file;
  synth::GeneratorSpec gen;

  auto* validate = app.add_subcommand("lexicon-validate", "load a lexicon and print its summary");
  add_common(validate, cfg, config_path);
  validate->add_option("--lexicon", cfg.lexicon, "lexicon TSV");

  auto* ingest_cmd = app.add_subcommand("ingest", "normalize a corpus to JSONL");
  add_common(ingest_cmd, cfg, config_path);
  ingest_cmd->add_option("--corpus", cfg.corpus, "input corpus");
  ingest_cmd->add_option("--format", cfg.corpus_format, "jsonl, pubmed_tsv or textdir")->capture_default_str();
  ingest_cmd->add_option("--out", out_file, "output JSONL");

  auto* space_cmd = app.add_subcommand("space-build", "select the semantic space");
  add_common(space_cmd, cfg, config_path);
  add_model_options(space_cmd, cfg);

  auto* som_cmd = app.add_subcommand("som-train", "train the information map codebook");
  add_common(som_cmd, cfg, config_path);
  add_model_options(som_cmd, cfg);
  add_som_options(som_cmd, cfg);

  auto* map_cmd = app.add_subcommand("map-export", "lay out documents on a trained codebook");
  add_common(map_cmd, cfg, config_path);
  add_model_options(map_cmd, cfg);
  map_cmd->add_option("--codebook", codebook_path, "codebook TSV from som-train");

  auto* infer_cmd = app.add_subcommand("infer", "infer hypernyms and descriptors of unknown terms");
  add_common(infer_cmd, cfg, config_path);
  add_model_options(infer_cmd, cfg);

  auto* discover_cmd = app.add_subcommand("discover", "run the discovery pipeline");
  add_common(discover_cmd, cfg, config_path);
  add_model_options(discover_cmd, cfg);
  add_som_options(discover_cmd, cfg);
  add_discovery_options(discover_cmd, cfg);
  discover_cmd->add_option("--seeds", cfg.seeds, "seed TSV (term, relationship, target)");
  discover_cmd->add_option("--truth", truth_path, "ground truth TSV, read only after candidates are written");

  for (auto* sub : {space_cmd, som_cmd, map_cmd, infer_cmd, discover_cmd}) {
    sub->add_option("--lexicon", cfg.lexicon, "lexicon TSV");
    sub->add_option("--corpus", cfg.corpus, "corpus file or directory");
    sub->add_option("--format", cfg.corpus_format, "jsonl, pubmed_tsv or textdir")->capture_default_str();
    sub->add_option("--out-dir,--out_dir", cfg.out_dir, "output directory")->capture_default_str();
  }
  for (auto* sub : {som_cmd, map_cmd, infer_cmd, discover_cmd})
    sub->add_option("--space", space_path, "prebuilt space manifest");

  auto* synth_cmd = app.add_subcommand("synth-generate", "write a synthetic scenario with ground truth");
  add_common(synth_cmd, cfg, config_path);
  synth_cmd->add_option("--out-dir,--out_dir", cfg.out_dir, "output directory")->capture_default_str();
  synth_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--documents", gen.documents, "document count")->capture_default_str();
  synth_cmd->add_option("--themes", gen.themes, "themes")->capture_default_str();
  synth_cmd->add_option("--terms-per-theme,--terms_per_theme", gen.terms_per_theme)->capture_default_str();
  synth_cmd->add_option("--positives", gen.positives, "planted positives")->capture_default_str();
  synth_cmd->add_option("--positive-rate,--positive_rate", gen.positive_rate, "co-occurrence rate with the target")
      ->capture_default_str();
  synth_cmd->add_option("--distractors", gen.distractors)->capture_default_str();
  synth_cmd->add_option("--seed-terms,--seed_terms", gen.seeds, "seed terms written to seeds.tsv")
      ->capture_default_str();
  synth_cmd->add_option("--target", gen.target, "target label")->capture_default_str();
  synth_cmd->add_option("--target-synonyms,--target_synonyms", gen.target_synonyms, "extra target surfaces")
      ->delimiter(',');
  synth_cmd->add_option("--relationship", gen.relationship)->capture_default_str();
  synth_cmd->add_option("--noise-rate,--noise_rate", gen.noise_rate)->capture_default_str();

  auto* eval_cmd = app.add_subcommand("evaluate", "score a candidates file against ground truth");
  add_common(eval_cmd, cfg, config_path);
  eval_cmd->add_option("--candidates", candidates_path, "candidates TSV");
  eval_cmd->add_option("--truth", truth_path, "ground truth TSV");
  eval_cmd->add_option("--out", out_file, "metrics TSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (!config_path.empty()) apply_config(sub, config_path);
  cfg.validate();
  Provenance prov(name, cfg);

  if (sub == validate) {
    const auto lex = load_lexicon(cfg, prov);
    std::cout << "groups=" << lex.group_count() << ", taxa=" << lex.taxon_count()
              << ", surfaces=" << lex.surface_count() << ", polysemous=" << lex.polysemous_count() << '\n';
    return 0;
  }

  if (sub == ingest_cmd) {
    require_input(!out_file.empty(), "missing --out");
    const auto docs = load_corpus(cfg, prov);
    write_file(out_file, prov.comment() + synth::corpus_jsonl(docs));
    std::cout << "documents=" << docs.size() << '\n';
    return 0;
  }

  if (sub == synth_cmd) {
    const auto scenario = synth::generate(gen);
    Provenance p(name, cfg);
    p.lines.resize(1);
    char buf[64];
    std::snprintf(buf, sizeof buf, "seed=%llu", static_cast<unsigned long long>(gen.seed));
    p.lines.push_back(buf);
    p.lines.push_back("documents=" + std::to_string(gen.documents));
    p.lines.push_back("target=" + gen.target);
    write_file(out_path(cfg, "corpus.jsonl"), p.comment() + synth::corpus_jsonl(scenario.documents));
    write_file(out_path(cfg, "lexicon.tsv"), p.comment() + synth::lexicon_tsv(scenario.groups));
    write_file(out_path(cfg, "seeds.tsv"), p.comment() + seeds_tsv(scenario.seeds));
    write_file(out_path(cfg, "truth.tsv"), p.comment() + synth::truth_tsv(scenario.truth));
    write_file(out_path(cfg, "themes.tsv"), p.comment() + synth::themes_tsv(scenario.truth));
    std::cout << "documents=" << scenario.documents.size() << ", groups=" << scenario.groups.size() << '\n';
    return 0;
  }

  if (sub == eval_cmd) {
    require_input(!candidates_path.empty(), "missing --candidates");
    require_input(!truth_path.empty(), "missing --truth");
    const auto candidates = read_file(candidates_path);
    const auto truth = read_file(truth_path);
    prov.input("candidates", candidates_path, candidates);
    prov.input("truth", truth_path, truth);
    const auto metrics = synth::evaluate(parse_candidates_tsv(candidates), synth::parse_truth(truth));
    std::cout << synth::metrics_text(metrics);
    if (!out_file.empty()) write_file(out_file, prov.comment() + synth::metrics_tsv(metrics));
    return 0;
  }

  const auto lex = load_lexicon(cfg, prov);
  const auto docs = load_corpus(cfg, prov);
  const auto prebuilt = load_space(space_path, lex, prov);
  const auto header = prov.comment();

  if (sub == discover_cmd) {
    const auto seeds = load_seeds(cfg, prov);
    const auto header_with_seeds = prov.comment();
    RunOptions options;
    options.space = prebuilt ? &*prebuilt : nullptr;
    const auto run = run_discovery(lex, docs, seeds, cfg, options);
    for (const auto& s : run.models.unresolved_seeds) std::cerr << "warning: seed '" << s << "' not in lexicon\n";
    for (const auto& m : run.models.empty_models) std::cerr << "warning: no documents for '" << m << "'\n";
    write_file(out_path(cfg, "space.tsv"), header_with_seeds + run.space.manifest());
    write_file(out_path(cfg, "map.tsv"), header_with_seeds + map_tsv(run.map));
    write_file(out_path(cfg, "map.svg"), map_svg(run.map, map_svg_comment(prov)));
    write_file(out_path(cfg, "inferred.tsv"), header_with_seeds + inferred_tsv(run.inferred, lex));
    write_file(out_path(cfg, "candidates.tsv"), candidates_tsv(run.candidates, prov.lines));
    std::cout << "candidates=" << run.candidates.size() << ", models=" << run.models.models.size()
              << ", inferred=" << run.inferred.size() << '\n';
    if (!truth_path.empty()) {
      const auto truth = read_file(truth_path);
      const auto metrics = synth::evaluate(parse_candidates_tsv(candidates_tsv(run.candidates)), synth::parse_truth(truth));
      prov.input("truth", truth_path, truth);
      std::cout << synth::metrics_text(metrics);
      write_file(out_path(cfg, "metrics.tsv"), prov.comment() + synth::metrics_tsv(metrics));
    }
    return 0;
  }

  const auto mapped = map_corpus(docs, lex, cfg.mapping());
  const auto space = prebuilt ? *prebuilt : build_space(mapped.documents, lex, cfg);
  const auto vectors = vectorize_all(mapped.documents, space, cfg.threads);

  if (sub == space_cmd) {
    write_file(out_path(cfg, "space.tsv"), header + space.manifest());
    std::cout << "dims=" << space.k() << ", taxa=" << space.count(DescriptorKind::taxon)
              << ", groups=" << space.count(DescriptorKind::group) << '\n';
    return 0;
  }
  if (sub == som_cmd) {
    const auto units = unit_vectors(vectors);
    const auto grid = fit(units, cfg.rows, cfg.cols, cfg.som());
    const auto m = metrics(grid, units, cfg.threads);
    write_file(out_path(cfg, "codebook.tsv"), header + codebook_tsv(grid));
    char buf[96];
    std::snprintf(buf, sizeof buf, "quantization_error=%.6f, topographic_error=%.6f\n", m.quantization_error,
                  m.topographic_error);
    std::cout << buf;
    return 0;
  }
  if (sub == map_cmd) {
    require_input(!codebook_path.empty(), "missing --codebook");
    const auto codebook = read_file(codebook_path);
    prov.input("codebook", codebook_path, codebook);
    const auto grid = parse_codebook_tsv(codebook);
    const auto map = build_map(grid, vectors, space, cfg.threads);
    write_file(out_path(cfg, "map.tsv"), prov.comment() + map_tsv(map));
    write_file(out_path(cfg, "map.svg"), map_svg(map, map_svg_comment(prov)));
    return 0;
  }
  if (sub == infer_cmd) {
    const DiscoveryCorpus corpus(lex, mapped.documents, space, vectors, cfg.threads);
    const MeaningInference inference(corpus, cfg.similarity(), cfg.threads);
    const auto unknowns = collect_unknowns(mapped.documents);
    const auto inferred = infer_unknowns(unknowns, inference, cfg.threads);
    write_file(out_path(cfg, "inferred.tsv"), header + inferred_tsv(inferred, lex));
    std::cout << "unknown=" << unknowns.size() << ", inferred=" << inferred.size() << '\n';
    return 0;
  }
  throw InvariantError("unhandled subcommand '" + name + "'");
}

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: malformed number (" << e.what() << ")\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: number out of range (" << e.what() << ")\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
