#include <gtest/gtest.h>

#include <limits>
#include <map>

#include "codexmine/infomap.hpp"

using namespace codexmine;

namespace {

Cell scan_bmu(const SomGrid& grid, const std::vector<double>& v) {
  Cell best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < grid.rows(); ++r)
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      double d = 0;
      const auto code = grid.code(Cell{r, c});
      for (std::size_t i = 0; i < v.size(); ++i) d += (code[i] - v[i]) * (code[i] - v[i]);
      if (d < best_d) best_d = d, best = {r, c};
    }
  return best;
}

} // namespace

TEST(InformationMap, CountsMatchRecountAndSumToCorpus) {
  const auto lex = Lexicon::parse("g1\ta\ta,en\tr/x\ng2\tb\tb,en\tr/y\ng3\tc\tc,en\tr/z\n");
  std::vector<Dimension> dims;
  for (GroupIndex g = 0; g < 3; ++g) dims.push_back({{DescriptorKind::group, g}, lex.group(g).id, lex.group(g).canonical, 1, 1});
  const SemanticSpace space(dims, lex);
  Rng rng(14);
  std::vector<DocVector> docs;
  std::vector<std::vector<double>> units;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> w(3);
    w[i % 3] = 1 + rng.uniform();
    w[(i + 1) % 3] = 0.2 * rng.uniform();
    docs.push_back(make_doc_vector("d" + std::to_string(i), w));
    units.push_back(docs.back().unit);
  }
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto grid = fit(units, 5, 5, cfg);
  const auto map = build_map(grid, docs, space);

  std::map<Cell, std::size_t> recount;
  for (const auto& u : units) ++recount[scan_bmu(grid, u)];
  std::size_t total = 0;
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c) {
      const auto& cell = map.at({r, c});
      EXPECT_EQ(cell.count, recount[(Cell{r, c})]);
      total += cell.count;
      if (cell.count == 0) EXPECT_TRUE(cell.labels.empty());
      else EXPECT_FALSE(cell.labels.empty());
      EXPECT_LE(cell.labels.size(), 5u);
    }
  EXPECT_EQ(total, docs.size());

  const auto svg = map_svg(map, "run=1");
  EXPECT_NE(svg.find("<!--\nrun=1\n-->"), std::string::npos);
  EXPECT_EQ(svg, map_svg(build_map(grid, docs, space, 4), "run=1"));
  EXPECT_EQ(parse_codebook_tsv(codebook_tsv(grid)), grid);
}

TEST(InformationMap, LabelsRankedBySummedWeight) {
  const auto lex = Lexicon::parse("g1\ta\ta,en\tr/x\ng2\tb\tb,en\tr/y\ng3\tc\tc,en\tr/z\n");
  std::vector<Dimension> dims;
  for (GroupIndex g = 0; g < 3; ++g) dims.push_back({{DescriptorKind::group, g}, lex.group(g).id, lex.group(g).canonical, 1, 1});
  const SemanticSpace space(dims, lex);
  SomGrid grid(1, 3, 3);
  grid.code(0)[0] = 1.0;
  grid.code(1)[1] = 1.0;
  grid.code(2)[0] = grid.code(2)[1] = grid.code(2)[2] = -5.0;
  const std::vector<DocVector> docs{make_doc_vector("d1", {3.0, 0.0, 1.0}), make_doc_vector("d2", {2.0, 0.5, 0.0}),
                                    make_doc_vector("d3", {0.0, 4.0, 0.0})};
  const auto map = build_map(grid, docs, space);
  EXPECT_EQ(map.at({0, 0}).count, 2u);
  EXPECT_EQ(map.at({0, 0}).labels, (std::vector<std::string>{"a", "c", "b"}));
  EXPECT_EQ(map.at({0, 1}).labels, (std::vector<std::string>{"b"}));
  EXPECT_EQ(map.at({0, 2}).count, 0u);
  EXPECT_TRUE(map.at({0, 2}).labels.empty());
  EXPECT_EQ(map_tsv(map), "row\tcol\tcount\tlabels\n0\t0\t2\ta; c; b\n0\t1\t1\tb\n0\t2\t0\t\n");
  EXPECT_EQ(map.assignment[2], (std::pair<std::string, Cell>{"d3", Cell{0, 1}}));
}

TEST(InformationMap, DimensionMismatch) {
  const auto lex = Lexicon::parse("g1\ta\ta,en\tr/x\ng2\tb\tb,en\tr/y\n");
  std::vector<Dimension> dims;
  for (GroupIndex g = 0; g < 2; ++g) dims.push_back({{DescriptorKind::group, g}, lex.group(g).id, "", 1, 1});
  EXPECT_THROW(build_map(SomGrid(2, 2, 5), {}, SemanticSpace(dims, lex)), InputError);
}
