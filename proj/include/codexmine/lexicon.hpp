#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "text.hpp"

namespace codexmine {

inline constexpr std::size_t kMaxTaxonDepth = 7;
inline constexpr std::size_t kMaxSurfaceTokens = 4;

using GroupIndex = std::uint32_t;
using TaxonId = std::uint32_t;

/// Root-first list of taxonomy labels, 1..7 levels deep.
struct TaxonPath {
  std::vector<std::string> levels;

  static TaxonPath parse(std::string_view s) {
    TaxonPath p;
    for (auto part : text::split(s, '/')) {
      const auto label = text::trim(part);
      require_input(!label.empty(), "invalid taxon path '" + std::string(s) + "': empty label");
      p.levels.emplace_back(label);
    }
    require_input(p.levels.size() <= kMaxTaxonDepth,
                  "invalid taxon path '" + std::string(s) + "': deeper than 7 levels");
    return p;
  }

  std::size_t depth() const { return levels.size(); }
  std::string str() const { return text::join(levels, "/"); }
  bool operator==(const TaxonPath&) const = default;
};

/// (len(a) - L) + (len(b) - L) where L is the common-prefix length.
inline std::size_t path_distance(const TaxonPath& a, const TaxonPath& b) {
  std::size_t common = 0;
  while (common < a.depth() && common < b.depth() && a.levels[common] == b.levels[common]) ++common;
  return (a.depth() - common) + (b.depth() - common);
}

struct Member {
  std::string surface;
  std::string language;
  bool operator==(const Member&) const = default;
};

/// A set of interchangeable surface forms linked to exactly one taxon.
struct SynonymGroup {
  std::string id;
  std::string canonical;
  std::vector<Member> members;
  TaxonPath hypernym;
};

struct TaxonNode {
  std::string label;
  std::string path;
  std::size_t depth = 0;
  std::optional<TaxonId> parent;
  std::vector<TaxonId> children;
};

/// Optional "#groups=N #taxa=M [#polysemous=P]" line validated on load.
struct LexiconManifest {
  std::optional<std::size_t> groups;
  std::optional<std::size_t> taxa;
  std::optional<std::size_t> polysemous;
};

/// Immutable synonym-group lexicon over a <=7-level taxonomy.
///
/// Groups are stored sorted by id and taxa sorted by path, so every index
/// and every derived output is independent of the record order of the file
/// it was loaded from. The taxonomy is the prefix closure of all hypernym
/// paths.
class Lexicon {
public:
  Lexicon() = default;

  static Lexicon from_groups(std::vector<SynonymGroup> groups, const LexiconManifest& manifest = {}) {
    require_input(!groups.empty(), "empty lexicon: no records");
    std::sort(groups.begin(), groups.end(),
              [](const SynonymGroup& a, const SynonymGroup& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < groups.size(); ++i)
      require_input(groups[i].id != groups[i - 1].id, "duplicate group_id '" + groups[i].id + "'");

    Lexicon lex;
    lex.groups_ = std::move(groups);
    lex.build_taxonomy();
    lex.build_index();
    lex.check_manifest(manifest);
    return lex;
  }

  static Lexicon parse(std::string_view content) {
    std::vector<SynonymGroup> groups;
    LexiconManifest manifest;
    std::size_t line_no = 0;
    for (auto raw : text::split(content, '\n')) {
      ++line_no;
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      if (text::trim(raw).empty()) continue;
      if (raw.front() == '#') {
        parse_manifest(raw, manifest);
        continue;
      }
      groups.push_back(parse_record(raw, line_no));
    }
    return from_groups(std::move(groups), manifest);
  }

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require_input(in.good(), "cannot read lexicon '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  std::size_t group_count() const { return groups_.size(); }
  std::size_t taxon_count() const { return taxa_.size(); }
  std::span<const SynonymGroup> groups() const { return groups_; }
  std::span<const TaxonNode> taxa() const { return taxa_; }
  const SynonymGroup& group(GroupIndex g) const { return groups_.at(g); }
  const TaxonNode& taxon(TaxonId t) const { return taxa_.at(t); }
  TaxonId hypernym(GroupIndex g) const { return hypernym_.at(g); }

  std::optional<GroupIndex> find_group(std::string_view id) const {
    auto it = std::lower_bound(groups_.begin(), groups_.end(), id,
                               [](const SynonymGroup& g, std::string_view v) { return g.id < v; });
    if (it == groups_.end() || it->id != id) return std::nullopt;
    return static_cast<GroupIndex>(it - groups_.begin());
  }

  GroupIndex group_index(std::string_view id) const {
    auto g = find_group(id);
    require_input(g.has_value(), "unknown group_id '" + std::string(id) + "'");
    return *g;
  }

  std::optional<TaxonId> find_taxon(std::string_view path) const {
    auto it = taxon_by_path_.find(std::string(path));
    if (it == taxon_by_path_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<TaxonId> find_taxon(const TaxonPath& path) const { return find_taxon(path.str()); }

  /// Nodes whose own label matches case-insensitively.
  std::vector<TaxonId> find_taxa_by_label(std::string_view label) const {
    const auto key = text::casefold(text::trim(label));
    std::vector<TaxonId> out;
    for (TaxonId t = 0; t < taxa_.size(); ++t)
      if (text::casefold(taxa_[t].label) == key) out.push_back(t);
    return out;
  }

  /// Root-first chain of nodes ending at t.
  std::vector<TaxonId> chain(TaxonId t) const {
    std::vector<TaxonId> out;
    std::optional<TaxonId> cur = t;
    while (cur) {
      out.push_back(*cur);
      cur = taxa_.at(*cur).parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::vector<TaxonId> hypernym_chain(GroupIndex g) const { return chain(hypernym(g)); }

  std::vector<TaxonId> hypernym_chain(std::string_view group_id) const {
    return hypernym_chain(group_index(group_id));
  }

  std::vector<std::string> hypernym_chain_labels(std::string_view group_id) const {
    std::vector<std::string> labels;
    for (TaxonId t : hypernym_chain(group_id)) labels.push_back(taxa_[t].label);
    return labels;
  }

  /// Ancestor of t at the given 1-based depth, or t itself when t is shallower.
  TaxonId ancestor_at(TaxonId t, std::size_t depth) const {
    while (taxa_.at(t).depth > depth) t = *taxa_[t].parent;
    return t;
  }

  bool is_ancestor_or_self(TaxonId ancestor, TaxonId node) const {
    const auto d = taxa_.at(ancestor).depth;
    if (taxa_.at(node).depth < d) return false;
    return ancestor_at(node, d) == ancestor;
  }

  std::size_t taxon_distance(const TaxonPath& a, const TaxonPath& b) const {
    require_input(find_taxon(a).has_value(), "invalid taxon path '" + a.str() + "'");
    require_input(find_taxon(b).has_value(), "invalid taxon path '" + b.str() + "'");
    return path_distance(a, b);
  }

  std::size_t taxon_distance(TaxonId a, TaxonId b) const {
    std::size_t da = taxa_.at(a).depth, db = taxa_.at(b).depth, dist = 0;
    while (da > db) { a = *taxa_[a].parent; --da; ++dist; }
    while (db > da) { b = *taxa_[b].parent; --db; ++dist; }
    while (a != b) {
      if (!taxa_[a].parent || !taxa_[b].parent) return dist + 2 * da;
      a = *taxa_[a].parent;
      b = *taxa_[b].parent;
      dist += 2;
      --da;
    }
    return dist;
  }

  TaxonPath path_of(TaxonId t) const { return TaxonPath::parse(taxa_.at(t).path); }

  /// Groups for an already-normalized surface key (tokens joined by spaces).
  std::span<const GroupIndex> lookup_key(const std::string& key) const {
    auto it = surface_index_.find(key);
    if (it == surface_index_.end()) return {};
    return it->second;
  }

  /// Case-folded exact lookup; all senses of a polysemous surface.
  std::vector<std::string> lookup(std::string_view surface) const {
    std::vector<std::string> ids;
    for (GroupIndex g : lookup_key(text::surface_key(surface))) ids.push_back(groups_[g].id);
    return ids;
  }

  std::size_t surface_count() const { return surface_index_.size(); }

  std::size_t polysemous_count() const {
    return static_cast<std::size_t>(std::count_if(surface_index_.begin(), surface_index_.end(),
                                                  [](const auto& kv) { return kv.second.size() > 1; }));
  }

  /// Keys of the surface index, sorted.
  std::vector<std::string> surface_keys() const {
    std::vector<std::string> keys;
    keys.reserve(surface_index_.size());
    for (const auto& [k, _] : surface_index_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
  }

  std::string manifest_line() const {
    return "#groups=" + std::to_string(group_count()) + " #taxa=" + std::to_string(taxon_count()) +
           " #polysemous=" + std::to_string(polysemous_count());
  }

  /// Canonical TSV: manifest line, then records sorted by group_id.
  std::string serialize() const {
    std::string out = manifest_line() + "\n";
    for (const auto& g : groups_) {
      out += g.id + '\t' + g.canonical + '\t';
      for (std::size_t i = 0; i < g.members.size(); ++i) {
        if (i) out += ';';
        out += g.members[i].surface + ',' + g.members[i].language;
      }
      out += '\t' + g.hypernym.str() + '\n';
    }
    return out;
  }

  /// Copy of the records with the listed group ids removed.
  std::vector<SynonymGroup> records_without(const std::set<std::string>& ids) const {
    std::vector<SynonymGroup> out;
    for (const auto& g : groups_)
      if (!ids.count(g.id)) out.push_back(g);
    return out;
  }

private:
  static void parse_manifest(std::string_view line, LexiconManifest& m) {
    std::istringstream ss{std::string(line)};
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (tok.size() < 2 || tok[0] != '#' || eq == std::string::npos) continue;
      const auto key = tok.substr(1, eq - 1);
      const auto val = tok.substr(eq + 1);
      std::size_t n = 0;
      try {
        n = std::stoul(val);
      } catch (...) {
        throw InputError("malformed manifest value '" + tok + "'");
      }
      if (key == "groups") m.groups = n;
      else if (key == "taxa") m.taxa = n;
      else if (key == "polysemous") m.polysemous = n;
    }
  }

  static SynonymGroup parse_record(std::string_view line, std::size_t line_no) {
    const auto where = " (line " + std::to_string(line_no) + ")";
    const auto cols = text::split(line, '\t');
    require_input(cols.size() == 4, "malformed record" + where + ": expected 4 tab-separated columns, got " +
                                        std::to_string(cols.size()));
    SynonymGroup g;
    g.id = std::string(text::trim(cols[0]));
    g.canonical = std::string(text::trim(cols[1]));
    require_input(!g.id.empty(), "malformed record" + where + ": empty group_id");
    require_input(!g.canonical.empty(), "malformed record" + where + ": empty canonical form");
    const auto members = text::trim(cols[2]);
    require_input(!members.empty(), "malformed record" + where + ": empty member list");
    for (auto item : text::split(members, ';')) {
      item = text::trim(item);
      if (item.empty()) continue;
      const auto comma = item.rfind(',');
      require_input(comma != std::string_view::npos,
                    "malformed record" + where + ": member '" + std::string(item) + "' lacks a language tag");
      Member m{std::string(text::trim(item.substr(0, comma))), std::string(text::trim(item.substr(comma + 1)))};
      require_input(!m.surface.empty(), "malformed record" + where + ": empty member surface");
      g.members.push_back(std::move(m));
    }
    require_input(!g.members.empty(), "malformed record" + where + ": empty member list");
    try {
      g.hypernym = TaxonPath::parse(text::trim(cols[3]));
    } catch (const InputError& e) {
      throw InputError("malformed record" + where + ": " + e.what());
    }
    return g;
  }

  void build_taxonomy() {
    std::set<std::string> paths;
    for (const auto& g : groups_) {
      std::string prefix;
      for (std::size_t i = 0; i < g.hypernym.depth(); ++i) {
        if (i) prefix += '/';
        prefix += g.hypernym.levels[i];
        paths.insert(prefix);
      }
    }
    taxa_.reserve(paths.size());
    for (const auto& p : paths) {
      TaxonNode node;
      node.path = p;
      const auto slash = p.rfind('/');
      node.label = slash == std::string::npos ? p : p.substr(slash + 1);
      node.depth = static_cast<std::size_t>(std::count(p.begin(), p.end(), '/')) + 1;
      const auto id = static_cast<TaxonId>(taxa_.size());
      if (slash != std::string::npos) {
        const TaxonId parent = taxon_by_path_.at(p.substr(0, slash));
        node.parent = parent;
        taxa_[parent].children.push_back(id);
      }
      taxon_by_path_.emplace(p, id);
      taxa_.push_back(std::move(node));
    }
    hypernym_.reserve(groups_.size());
    for (const auto& g : groups_) {
      auto t = find_taxon(g.hypernym);
      require_input(t.has_value(), "hypernym path absent from taxonomy: '" + g.hypernym.str() + "'");
      hypernym_.push_back(*t);
    }
  }

  void build_index() {
    for (GroupIndex gi = 0; gi < groups_.size(); ++gi) {
      const auto& g = groups_[gi];
      bool canonical_found = false;
      const auto canonical_key = text::surface_key(g.canonical);
      for (const auto& m : g.members) {
        const auto key = text::surface_key(m.surface);
        const auto ntok = key.empty() ? 0 : std::count(key.begin(), key.end(), ' ') + 1;
        require_input(ntok >= 1, "malformed record '" + g.id + "': member '" + m.surface + "' has no word tokens");
        require_input(static_cast<std::size_t>(ntok) <= kMaxSurfaceTokens,
                      "malformed record '" + g.id + "': member '" + m.surface + "' exceeds 4 tokens");
        canonical_found = canonical_found || key == canonical_key;
        auto& senses = surface_index_[key];
        if (std::find(senses.begin(), senses.end(), gi) == senses.end()) senses.push_back(gi);
      }
      require_input(canonical_found,
                    "malformed record '" + g.id + "': canonical '" + g.canonical + "' is not among its members");
    }
  }

  void check_manifest(const LexiconManifest& m) const {
    if (m.groups && *m.groups != group_count())
      throw InputError("manifest mismatch: #groups=" + std::to_string(*m.groups) + " but file has " +
                       std::to_string(group_count()));
    if (m.taxa && *m.taxa != taxon_count())
      throw InputError("manifest mismatch: #taxa=" + std::to_string(*m.taxa) + " but taxonomy has " +
                       std::to_string(taxon_count()));
    if (m.polysemous && *m.polysemous != polysemous_count())
      throw InputError("manifest mismatch: #polysemous=" + std::to_string(*m.polysemous) + " but index has " +
                       std::to_string(polysemous_count()));
  }

  std::vector<SynonymGroup> groups_;
  std::vector<TaxonId> hypernym_;
  std::vector<TaxonNode> taxa_;
  std::map<std::string, TaxonId> taxon_by_path_;
  std::unordered_map<std::string, std::vector<GroupIndex>> surface_index_;
};

} // namespace codexmine
