#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "semspace.hpp"
#include "som.hpp"

namespace codexmine {

struct MapCell {
  std::size_t count = 0;
  std::vector<std::string> labels; ///< up to 5 descriptor labels, strongest first
  std::vector<double> centroid;    ///< zero vector for empty cells
};

/// Documents laid out on a trained SOM lattice.
struct InformationMap {
  std::size_t rows = 0, cols = 0;
  std::vector<std::pair<std::string, Cell>> assignment; ///< corpus order
  std::vector<MapCell> cells;                            ///< row-major

  const MapCell& at(Cell c) const { return cells.at(c.row * cols + c.col); }
};

inline InformationMap build_map(const SomGrid& grid, std::span<const DocVector> docs, const SemanticSpace& space,
                                std::size_t threads = 1) {
  require_input(grid.dim() == space.k(), "map: codebook dimension does not match the space");
  std::vector<std::vector<double>> units;
  units.reserve(docs.size());
  for (const auto& d : docs) units.push_back(d.unit);
  const auto bmus = assign_bmus(grid, units, threads);

  InformationMap map;
  map.rows = grid.rows();
  map.cols = grid.cols();
  map.cells.resize(grid.cells());
  std::vector<std::vector<const DocVector*>> members(grid.cells());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    map.assignment.emplace_back(docs[i].doc_id, grid.cell(bmus[i]));
    members[bmus[i]].push_back(&docs[i]);
  }
  std::size_t total = 0;
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    auto& cell = map.cells[c];
    cell.count = members[c].size();
    total += cell.count;
    if (members[c].empty()) {
      cell.centroid.assign(space.k(), 0.0);
      continue;
    }
    cell.centroid = centroid(std::span<const DocVector* const>(members[c]), "").centroid;
    std::vector<double> weight(space.k(), 0.0);
    for (const auto* d : members[c])
      for (std::size_t i = 0; i < space.k(); ++i) weight[i] += d->w[i];
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < space.k(); ++i)
      if (weight[i] > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
    for (std::size_t i = 0; i < std::min<std::size_t>(5, order.size()); ++i)
      cell.labels.push_back(space.dim(order[i]).label);
  }
  require_invariant(total == docs.size(), "information map: cell counts do not sum to the corpus size");
  return map;
}

/// row, col, count, labels ("; "-joined).
inline std::string map_tsv(const InformationMap& map) {
  std::string out = "row\tcol\tcount\tlabels\n";
  for (std::size_t r = 0; r < map.rows; ++r)
    for (std::size_t c = 0; c < map.cols; ++c) {
      const auto& cell = map.at({r, c});
      out += std::to_string(r) + '\t' + std::to_string(c) + '\t' + std::to_string(cell.count) + '\t' +
             text::join(cell.labels, "; ") + '\n';
    }
  return out;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += ch;
    }
  }
  return out;
}

} // namespace detail

/// Grid of cells with a dot whose radius grows with sqrt(count) and the
/// leading label of each cell. `comment` is emitted as an XML comment.
inline std::string map_svg(const InformationMap& map, std::string_view comment = {}) {
  constexpr double kCell = 90.0, kMaxRadius = 32.0;
  std::size_t max_count = 1;
  for (const auto& c : map.cells) max_count = std::max(max_count, c.count);
  char buf[512];
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) out += "<!--\n" + detail::xml_escape(comment) + "\n-->\n";
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "font-family=\"sans-serif\" font-size=\"9\">\n",
                kCell * static_cast<double>(map.cols), kCell * static_cast<double>(map.rows));
  out += buf;
  for (std::size_t r = 0; r < map.rows; ++r)
    for (std::size_t c = 0; c < map.cols; ++c) {
      const auto& cell = map.at({r, c});
      const double x = kCell * static_cast<double>(c), y = kCell * static_cast<double>(r);
      std::snprintf(buf, sizeof buf,
                    "  <rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"#f4f6fb\" stroke=\"#8a94a6\"/>\n",
                    x, y, kCell, kCell);
      out += buf;
      if (cell.count > 0) {
        const double radius =
            kMaxRadius * std::sqrt(static_cast<double>(cell.count) / static_cast<double>(max_count));
        std::snprintf(buf, sizeof buf,
                      "  <circle cx=\"%.1f\" cy=\"%.1f\" r=\"%.2f\" fill=\"#2f6db5\" fill-opacity=\"0.75\"/>\n",
                      x + kCell / 2, y + kCell / 2, radius);
        out += buf;
      }
      const std::string label = cell.labels.empty() ? "" : detail::xml_escape(cell.labels.front());
      std::snprintf(buf, sizeof buf, "  <text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%s (%zu)</text>\n",
                    x + kCell / 2, y + kCell - 6, label.c_str(), cell.count);
      out += buf;
    }
  out += "</svg>\n";
  return out;
}

/// row, col, then one column per dimension.
inline std::string codebook_tsv(const SomGrid& grid) {
  std::string out;
  char buf[40];
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const Cell cell = grid.cell(c);
    out += std::to_string(cell.row) + '\t' + std::to_string(cell.col);
    for (double v : grid.code(c)) {
      std::snprintf(buf, sizeof buf, "\t%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline SomGrid parse_codebook_tsv(std::string_view content) {
  struct Row {
    std::size_t r, c;
    std::vector<double> v;
  };
  std::vector<Row> rows;
  std::size_t max_r = 0, max_c = 0, dim = 0;
  for (auto line : text::split(content, '\n')) {
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    require_input(cols.size() >= 3, "codebook: expected row, col and at least one value");
    Row row{std::stoul(std::string(cols[0])), std::stoul(std::string(cols[1])), {}};
    for (std::size_t i = 2; i < cols.size(); ++i) row.v.push_back(std::stod(std::string(cols[i])));
    require_input(dim == 0 || row.v.size() == dim, "codebook: inconsistent dimension");
    dim = row.v.size();
    max_r = std::max(max_r, row.r);
    max_c = std::max(max_c, row.c);
    rows.push_back(std::move(row));
  }
  require_input(!rows.empty(), "codebook: no rows");
  SomGrid grid(max_r + 1, max_c + 1, dim);
  require_input(rows.size() == grid.cells(), "codebook: missing cells");
  for (const auto& row : rows) std::copy(row.v.begin(), row.v.end(), grid.code(Cell{row.r, row.c}).begin());
  return grid;
}

} // namespace codexmine
