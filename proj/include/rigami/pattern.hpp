#pragma once

// Crease-pattern data model: planar vertices, creases with mountain/valley
// assignment, boundary edges and facets, plus validation, interior-vertex
// fans and the JSON document format.

#include <rigami/core.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rigami {

enum class Assignment { mountain, valley, unassigned };

inline char assignment_code(Assignment a) {
  switch (a) {
    case Assignment::mountain: return 'M';
    case Assignment::valley: return 'V';
    case Assignment::unassigned: return 'U';
  }
  return 'U';
}

/// Sign of the fold angle implied by an assignment: valleys fold positive.
inline double assignment_sign(Assignment a) {
  switch (a) {
    case Assignment::mountain: return -1.0;
    case Assignment::valley: return 1.0;
    case Assignment::unassigned: return 0.0;
  }
  return 0.0;
}

struct Crease {
  int a = 0;
  int b = 0;
  Assignment assignment = Assignment::unassigned;

  bool operator==(const Crease&) const = default;
};

struct Edge {
  int a = 0;
  int b = 0;

  bool operator==(const Edge&) const = default;
};

/// One traversal of an edge by a facet cycle, in the facet's counterclockwise
/// direction `from -> to`.
struct EdgeUse {
  int facet = 0;
  int from = 0;
  int to = 0;
};

/// Creases around one interior vertex, ordered anticlockwise. Sector k lies
/// between creases k and k+1 (indices cyclic).
struct VertexFan {
  int vertex_id = 0;
  std::vector<int> creases;
  std::vector<double> sector_angles;

  std::size_t size() const { return creases.size(); }
};

struct Violation {
  std::string kind;
  std::string location;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  bool has(std::string_view kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
  }
};

/// Immutable crease pattern. The constructor canonicalizes the input:
/// creases and boundary edges are stored with `a < b` and sorted, which fixes
/// the global crease numbering used by every fold-angle vector; facets are
/// oriented counterclockwise, rotated to start at their smallest vertex id
/// and sorted.
class CreasePattern {
 public:
  CreasePattern() = default;

  CreasePattern(std::vector<Vec2> vertices, std::vector<Crease> creases,
                std::vector<Edge> boundary, std::vector<std::vector<int>> facets,
                nlohmann::json meta = nlohmann::json::object())
      : vertices_(std::move(vertices)),
        creases_(std::move(creases)),
        boundary_(std::move(boundary)),
        facets_(std::move(facets)),
        meta_(meta.is_null() ? nlohmann::json::object() : std::move(meta)) {
    canonicalize();
  }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Crease>& creases() const { return creases_; }
  const std::vector<Edge>& boundary() const { return boundary_; }
  const std::vector<std::vector<int>>& facets() const { return facets_; }
  const nlohmann::json& meta() const { return meta_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_creases() const { return creases_.size(); }
  std::size_t num_facets() const { return facets_.size(); }

  /// Vertices with at least one crease and no incident boundary edge, ascending.
  const std::vector<int>& interior_vertices() const { return interior_; }

  std::optional<int> crease_index(int a, int b) const {
    auto it = crease_lookup_.find(key(a, b));
    if (it == crease_lookup_.end()) return std::nullopt;
    return it->second;
  }

  bool is_boundary_edge(int a, int b) const { return boundary_lookup_.count(key(a, b)) > 0; }

  double crease_length(int i) const {
    const Crease& c = creases_.at(static_cast<std::size_t>(i));
    return (vertices_[c.b] - vertices_[c.a]).norm();
  }

  /// Facet traversals of the undirected edge (a, b).
  const std::vector<EdgeUse>& edge_uses(int a, int b) const {
    static const std::vector<EdgeUse> kNone;
    auto it = edge_uses_.find(key(a, b));
    return it == edge_uses_.end() ? kNone : it->second;
  }

  /// Global indices of the creases incident to vertex v.
  const std::vector<int>& incident_creases(int v) const {
    return incident_creases_.at(static_cast<std::size_t>(v));
  }

  bool operator==(const CreasePattern& o) const {
    return vertices_ == o.vertices_ && creases_ == o.creases_ && boundary_ == o.boundary_ &&
           facets_ == o.facets_ && meta_ == o.meta_;
  }

  static std::pair<int, int> key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

 private:
  void check_index(int v, const char* what) const {
    if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
      throw DomainError("dangling index " + std::to_string(v) + " in " + what + " (pattern has " +
                        std::to_string(vertices_.size()) + " vertices)");
    }
  }

  void canonicalize() {
    for (const Vec2& v : vertices_) {
      if (!v.allFinite()) throw DomainError("non-finite vertex coordinate");
    }
    for (Crease& c : creases_) {
      check_index(c.a, "crease");
      check_index(c.b, "crease");
      if (c.a == c.b) throw DomainError("degenerate crease at vertex " + std::to_string(c.a));
      if (c.a > c.b) std::swap(c.a, c.b);
    }
    std::sort(creases_.begin(), creases_.end(), [](const Crease& l, const Crease& r) {
      return std::pair{l.a, l.b} < std::pair{r.a, r.b};
    });
    for (std::size_t i = 0; i < creases_.size(); ++i) {
      if (i > 0 && creases_[i].a == creases_[i - 1].a && creases_[i].b == creases_[i - 1].b) {
        throw DomainError("duplicate crease (" + std::to_string(creases_[i].a) + ", " +
                          std::to_string(creases_[i].b) + ")");
      }
      crease_lookup_[{creases_[i].a, creases_[i].b}] = static_cast<int>(i);
    }

    for (Edge& e : boundary_) {
      check_index(e.a, "boundary edge");
      check_index(e.b, "boundary edge");
      if (e.a == e.b) throw DomainError("degenerate boundary edge at vertex " + std::to_string(e.a));
      if (e.a > e.b) std::swap(e.a, e.b);
    }
    std::sort(boundary_.begin(), boundary_.end(),
              [](const Edge& l, const Edge& r) { return std::pair{l.a, l.b} < std::pair{r.a, r.b}; });
    for (std::size_t i = 0; i < boundary_.size(); ++i) {
      auto k = std::pair{boundary_[i].a, boundary_[i].b};
      if (i > 0 && boundary_[i] == boundary_[i - 1]) {
        throw DomainError("duplicate boundary edge (" + std::to_string(k.first) + ", " +
                          std::to_string(k.second) + ")");
      }
      if (crease_lookup_.count(k)) {
        throw DomainError("edge (" + std::to_string(k.first) + ", " + std::to_string(k.second) +
                          ") is both a crease and a boundary edge");
      }
      boundary_lookup_.insert(k);
    }

    for (auto& f : facets_) {
      if (f.size() < 3) throw DomainError("facet with fewer than 3 vertices");
      for (int v : f) check_index(v, "facet");
      if (signed_area(f) < 0.0) std::reverse(f.begin(), f.end());
      std::rotate(f.begin(), std::min_element(f.begin(), f.end()), f.end());
    }
    std::sort(facets_.begin(), facets_.end());

    for (std::size_t fi = 0; fi < facets_.size(); ++fi) {
      const auto& f = facets_[fi];
      for (std::size_t k = 0; k < f.size(); ++k) {
        int from = f[k];
        int to = f[(k + 1) % f.size()];
        edge_uses_[key(from, to)].push_back({static_cast<int>(fi), from, to});
      }
    }

    incident_creases_.assign(vertices_.size(), {});
    std::vector<bool> on_boundary(vertices_.size(), false);
    for (std::size_t i = 0; i < creases_.size(); ++i) {
      incident_creases_[creases_[i].a].push_back(static_cast<int>(i));
      incident_creases_[creases_[i].b].push_back(static_cast<int>(i));
    }
    for (const Edge& e : boundary_) on_boundary[e.a] = on_boundary[e.b] = true;
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
      if (!incident_creases_[v].empty() && !on_boundary[v]) interior_.push_back(static_cast<int>(v));
    }
  }

  double signed_area(const std::vector<int>& f) const {
    double area = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const Vec2& p = vertices_[f[k]];
      const Vec2& q = vertices_[f[(k + 1) % f.size()]];
      area += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * area;
  }

  std::vector<Vec2> vertices_;
  std::vector<Crease> creases_;
  std::vector<Edge> boundary_;
  std::vector<std::vector<int>> facets_;
  nlohmann::json meta_ = nlohmann::json::object();

  std::map<std::pair<int, int>, int> crease_lookup_;
  std::set<std::pair<int, int>> boundary_lookup_;
  std::map<std::pair<int, int>, std::vector<EdgeUse>> edge_uses_;
  std::vector<std::vector<int>> incident_creases_;
  std::vector<int> interior_;
};

namespace detail {

inline double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

/// Angle in (0, 2pi] swept counterclockwise from u to v.
inline double ccw_angle(const Vec2& u, const Vec2& v) {
  double a = std::atan2(cross2(u, v), u.dot(v));
  if (a <= 0.0) a += 2.0 * kPi;
  return a;
}

inline bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); };
  double d1 = orient(q1, q2, p1);
  double d2 = orient(q1, q2, p2);
  double d3 = orient(p1, p2, q1);
  double d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

inline std::string vertex_loc(int v) { return "vertex " + std::to_string(v); }
inline std::string facet_loc(std::size_t f) { return "facet " + std::to_string(f); }
inline std::string edge_loc(int a, int b) {
  return "edge (" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

}  // namespace detail

/// Reports every violated structural invariant. Violations are data; the
/// function never throws for a constructed pattern.
inline ValidationReport validate_pattern(const CreasePattern& p) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string loc, double value) {
    report.violations.push_back({std::move(kind), std::move(loc), value});
  };
  const auto& X = p.vertices();
  const auto& facets = p.facets();

  for (std::size_t fi = 0; fi < facets.size(); ++fi) {
    const auto& f = facets[fi];
    std::set<int> unique(f.begin(), f.end());
    double area = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) area += detail::cross2(X[f[k]], X[f[(k + 1) % f.size()]]);
    area *= 0.5;
    if (unique.size() != f.size() || std::abs(area) < 1e-14) {
      add("facet-degenerate", detail::facet_loc(fi), area);
      continue;
    }
    const std::size_t n = f.size();
    bool crossing = false;
    for (std::size_t i = 0; i < n && !crossing; ++i) {
      for (std::size_t j = i + 2; j < n && !crossing; ++j) {
        if (i == 0 && j == n - 1) continue;
        crossing = detail::segments_cross(X[f[i]], X[f[(i + 1) % n]], X[f[j]], X[f[(j + 1) % n]]);
      }
    }
    if (crossing) add("facet-self-intersection", detail::facet_loc(fi), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      int a = f[k], b = f[(k + 1) % n];
      if (!p.crease_index(a, b) && !p.is_boundary_edge(a, b)) {
        add("unknown-edge", detail::edge_loc(a, b), static_cast<double>(fi));
      }
    }
  }

  for (const Crease& c : p.creases()) {
    const auto& uses = p.edge_uses(c.a, c.b);
    if (uses.size() != 2) {
      add("crease-adjacency", detail::edge_loc(c.a, c.b), static_cast<double>(uses.size()));
    } else if (uses[0].from == uses[1].from) {
      add("orientation", detail::edge_loc(c.a, c.b), 0.0);
    }
  }
  for (const Edge& e : p.boundary()) {
    const auto& uses = p.edge_uses(e.a, e.b);
    if (uses.size() != 1) {
      add("boundary-adjacency", detail::edge_loc(e.a, e.b), static_cast<double>(uses.size()));
    }
  }

  // Facet connectivity through creases.
  if (!facets.empty()) {
    std::vector<int> parent(facets.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const Crease& c : p.creases()) {
      const auto& uses = p.edge_uses(c.a, c.b);
      for (std::size_t k = 1; k < uses.size(); ++k) parent[find(uses[k].facet)] = find(uses[0].facet);
    }
    std::set<int> roots;
    for (std::size_t f = 0; f < facets.size(); ++f) roots.insert(find(static_cast<int>(f)));
    if (roots.size() > 1) add("disconnected", "facets", static_cast<double>(roots.size()));
  }

  std::vector<bool> used(p.num_vertices(), false);
  for (const auto& f : facets)
    for (int v : f) used[v] = true;
  for (std::size_t v = 0; v < used.size(); ++v) {
    if (!used[v]) add("unused-vertex", detail::vertex_loc(static_cast<int>(v)), 0.0);
  }

  const long euler = static_cast<long>(p.num_vertices()) -
                     static_cast<long>(p.num_creases() + p.boundary().size()) +
                     static_cast<long>(facets.size());
  if (euler != 1) add("holes unsupported", "pattern", static_cast<double>(euler));

  // Corner angles of the facets around each interior vertex must tile the
  // full turn, and creases must leave in distinct directions.
  std::vector<double> corner_sum(p.num_vertices(), 0.0);
  for (const auto& f : facets) {
    const std::size_t n = f.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2& v = X[f[k]];
      const Vec2& next = X[f[(k + 1) % n]];
      const Vec2& prev = X[f[(k + n - 1) % n]];
      corner_sum[f[k]] += detail::ccw_angle(next - v, prev - v);
    }
  }
  for (int v : p.interior_vertices()) {
    const auto& inc = p.incident_creases(v);
    if (inc.size() < 3) add("fan-degree", detail::vertex_loc(v), static_cast<double>(inc.size()));
    std::vector<double> dirs;
    for (int ci : inc) {
      const Crease& c = p.creases()[ci];
      Vec2 d = X[c.a == v ? c.b : c.a] - X[v];
      dirs.push_back(std::atan2(d.y(), d.x()));
    }
    std::sort(dirs.begin(), dirs.end());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      double gap = (k + 1 < dirs.size() ? dirs[k + 1] : dirs[0] + 2.0 * kPi) - dirs[k];
      if (dirs.size() > 1 && gap <= 1e-12) add("zero-sector", detail::vertex_loc(v), gap);
    }
    if (std::abs(corner_sum[v] - 2.0 * kPi) > 1e-9) {
      add("developability", detail::vertex_loc(v), corner_sum[v]);
    }
  }
  return report;
}

/// Fans of all interior vertices, in ascending vertex order. Creases are
/// sorted anticlockwise starting from the smallest polar angle in [0, 2pi).
inline std::vector<VertexFan> build_vertex_fans(const CreasePattern& p) {
  std::vector<VertexFan> fans;
  const auto& X = p.vertices();
  for (int v : p.interior_vertices()) {
    const auto& inc = p.incident_creases(v);
    if (inc.size() < 3) {
      throw DomainError("interior vertex " + std::to_string(v) + " has fewer than 3 creases");
    }
    std::vector<std::pair<double, int>> polar;
    for (int ci : inc) {
      const Crease& c = p.creases()[ci];
      Vec2 d = X[c.a == v ? c.b : c.a] - X[v];
      double t = std::atan2(d.y(), d.x());
      if (t < 0.0) t += 2.0 * kPi;
      polar.emplace_back(t, ci);
    }
    std::sort(polar.begin(), polar.end());
    VertexFan fan;
    fan.vertex_id = v;
    const std::size_t n = polar.size();
    for (std::size_t k = 0; k < n; ++k) {
      fan.creases.push_back(polar[k].second);
      const Crease& c0 = p.creases()[polar[k].second];
      const Crease& c1 = p.creases()[polar[(k + 1) % n].second];
      Vec2 d0 = X[c0.a == v ? c0.b : c0.a] - X[v];
      Vec2 d1 = X[c1.a == v ? c1.b : c1.a] - X[v];
      double sector = detail::ccw_angle(d0, d1);
      if (sector <= 1e-12 || sector >= 2.0 * kPi - 1e-12) {
        throw DomainError("zero sector angle at vertex " + std::to_string(v));
      }
      fan.sector_angles.push_back(sector);
    }
    fans.push_back(std::move(fan));
  }
  return fans;
}

// ---------------------------------------------------------------------------
// JSON document format
//
//   { "vertices": [[x, y], ...], "creases": [[a, b, "M"|"V"|"U"], ...],
//     "boundary": [[a, b], ...], "facets": [[v0, v1, ...], ...], "meta": {...} }

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) {
    throw IoError(std::string("missing field \"") + field + "\"");
  }
  return j.at(field);
}

inline int as_index(const nlohmann::json& j, const char* what) {
  if (!j.is_number_integer()) throw IoError(std::string("non-integer index in ") + what);
  return j.get<int>();
}

inline Assignment parse_assignment(const nlohmann::json& j) {
  if (!j.is_string()) throw IoError("crease assignment must be \"M\", \"V\" or \"U\"");
  const std::string s = j.get<std::string>();
  if (s == "M") return Assignment::mountain;
  if (s == "V") return Assignment::valley;
  if (s == "U") return Assignment::unassigned;
  throw IoError("unknown crease assignment \"" + s + "\"");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

inline nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace detail

inline CreasePattern pattern_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Vec2> vertices;
    for (const auto& v : detail::require(doc, "vertices")) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw IoError("vertex must be [x, y]");
      }
      vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    std::vector<Crease> creases;
    for (const auto& c : detail::require(doc, "creases")) {
      if (!c.is_array() || c.size() != 3) throw IoError("crease must be [a, b, assignment]");
      creases.push_back({detail::as_index(c[0], "crease"), detail::as_index(c[1], "crease"),
                         detail::parse_assignment(c[2])});
    }
    std::vector<Edge> boundary;
    for (const auto& e : detail::require(doc, "boundary")) {
      if (!e.is_array() || e.size() != 2) throw IoError("boundary edge must be [a, b]");
      boundary.push_back({detail::as_index(e[0], "boundary"), detail::as_index(e[1], "boundary")});
    }
    std::vector<std::vector<int>> facets;
    for (const auto& f : detail::require(doc, "facets")) {
      if (!f.is_array()) throw IoError("facet must be an index list");
      std::vector<int> cycle;
      for (const auto& v : f) cycle.push_back(detail::as_index(v, "facet"));
      facets.push_back(std::move(cycle));
    }
    nlohmann::json meta = doc.contains("meta") ? doc.at("meta") : nlohmann::json::object();
    return CreasePattern(std::move(vertices), std::move(creases), std::move(boundary),
                         std::move(facets), std::move(meta));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("invalid pattern document: ") + e.what());
  }
}

inline CreasePattern parse_pattern(std::string_view document) {
  return pattern_from_json(detail::parse_json(document));
}

inline nlohmann::json pattern_to_json(const CreasePattern& p) {
  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (const Vec2& v : p.vertices()) doc["vertices"].push_back({v.x(), v.y()});
  doc["creases"] = nlohmann::json::array();
  for (const Crease& c : p.creases()) {
    doc["creases"].push_back({c.a, c.b, std::string(1, assignment_code(c.assignment))});
  }
  doc["boundary"] = nlohmann::json::array();
  for (const Edge& e : p.boundary()) doc["boundary"].push_back({e.a, e.b});
  doc["facets"] = p.facets();
  doc["meta"] = p.meta();
  return doc;
}

inline std::string serialize_pattern(const CreasePattern& p) { return pattern_to_json(p).dump(1); }

inline CreasePattern load_pattern(const std::string& path) {
  return parse_pattern(detail::read_file(path));
}

inline void save_pattern(const std::string& path, const CreasePattern& p) {
  detail::write_file(path, serialize_pattern(p) + "\n");
}

}  // namespace rigami
