#pragma once

// Builtin crease patterns: Miura-ori, waterbomb base, waterbomb tessellation
// and a crane base reconstructed on the unit square.

#include <rigami/core.hpp>
#include <rigami/pattern.hpp>
#include <rigami/sequential.hpp>

#include <json.hpp>

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

namespace rigami {

namespace detail {

struct PlanarEdge {
  int a = 0;
  int b = 0;
  bool boundary = false;
  Assignment assignment = Assignment::unassigned;
};

/// Bounded faces of a planar straight-line graph, each traced with the face
/// on its left. The outer face (negative area) is dropped.
inline std::vector<std::vector<int>> trace_planar_faces(const std::vector<Vec2>& X,
                                                        const std::vector<PlanarEdge>& edges) {
  std::vector<std::vector<int>> nbr(X.size());
  for (const auto& e : edges) {
    nbr[e.a].push_back(e.b);
    nbr[e.b].push_back(e.a);
  }
  for (std::size_t v = 0; v < X.size(); ++v) {
    std::sort(nbr[v].begin(), nbr[v].end(), [&](int p, int q) {
      const Vec2 dp = X[p] - X[v], dq = X[q] - X[v];
      return std::atan2(dp.y(), dp.x()) < std::atan2(dq.y(), dq.x());
    });
  }
  std::set<std::pair<int, int>> used;
  std::vector<std::vector<int>> faces;
  for (const auto& e : edges) {
    for (auto [u0, v0] : {std::pair{e.a, e.b}, std::pair{e.b, e.a}}) {
      if (used.count({u0, v0})) continue;
      std::vector<int> face;
      int u = u0, v = v0;
      while (!used.count({u, v})) {
        used.insert({u, v});
        face.push_back(u);
        const auto& nv = nbr[v];
        const auto pos = std::find(nv.begin(), nv.end(), u) - nv.begin();
        const int w = nv[static_cast<std::size_t>((pos + static_cast<long>(nv.size()) - 1) % static_cast<long>(nv.size()))];
        u = v;
        v = w;
      }
      double area = 0.0;
      for (std::size_t k = 0; k < face.size(); ++k) area += cross2(X[face[k]], X[face[(k + 1) % face.size()]]);
      if (area > 1e-12) faces.push_back(std::move(face));
    }
  }
  return faces;
}

inline CreasePattern assemble_pattern(std::vector<Vec2> X, const std::vector<PlanarEdge>& edges, nlohmann::json meta) {
  std::vector<Crease> creases;
  std::vector<Edge> boundary;
  for (const auto& e : edges) {
    if (e.boundary) boundary.push_back({e.a, e.b});
    else creases.push_back({e.a, e.b, e.assignment});
  }
  auto facets = trace_planar_faces(X, edges);
  return CreasePattern(std::move(X), std::move(creases), std::move(boundary), std::move(facets), std::move(meta));
}

}  // namespace detail

/// Vertex id of lattice point (i, j), 0 <= i <= 2m, 0 <= j <= 2n.
inline int miura_vertex_id(int m, int i, int j) { return j * (2 * m + 1) + i; }

/// m x n unit cells of four congruent parallelograms with sides a (straight
/// direction, along x) and b (zigzag direction, at angle alpha to x).
inline CreasePattern generate_miura(int m, int n, double a, double b, double alpha) {
  if (m < 1 || n < 1) throw DomainError("Miura cell counts must be at least 1");
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("Miura side lengths must be positive");
  if (!(alpha > 0.0 && alpha < kPi / 2)) throw DomainError("Miura angle must lie in (0, pi/2)");
  const int ni = 2 * m + 1, nj = 2 * n + 1;
  std::vector<Vec2> X(static_cast<std::size_t>(ni * nj));
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i < ni; ++i) {
      X[static_cast<std::size_t>(miura_vertex_id(m, i, j))] =
          Vec2(i * a + (j % 2 ? b * std::cos(alpha) : 0.0), j * b * std::sin(alpha));
    }
  }
  // Zigzag column i folds valley for even i, mountain for odd i; straight
  // segments alternate along each row.
  auto column = [](int i) { return i % 2 ? Assignment::mountain : Assignment::valley; };
  auto flip = [](Assignment s) { return s == Assignment::mountain ? Assignment::valley : Assignment::mountain; };
  std::vector<Crease> creases;
  std::vector<Edge> boundary;
  for (int j = 0; j < nj; ++j) {
    for (int i = 0; i + 1 < ni; ++i) {
      const int p = miura_vertex_id(m, i, j), q = miura_vertex_id(m, i + 1, j);
      if (j == 0 || j == nj - 1) boundary.push_back({p, q});
      else creases.push_back({p, q, j % 2 ? column(i) : flip(column(i))});
    }
  }
  for (int i = 0; i < ni; ++i) {
    for (int j = 0; j + 1 < nj; ++j) {
      const int p = miura_vertex_id(m, i, j), q = miura_vertex_id(m, i, j + 1);
      if (i == 0 || i == ni - 1) boundary.push_back({p, q});
      else creases.push_back({p, q, column(i)});
    }
  }
  std::vector<std::vector<int>> facets;
  for (int j = 0; j + 1 < nj; ++j) {
    for (int i = 0; i + 1 < ni; ++i) {
      facets.push_back({miura_vertex_id(m, i, j), miura_vertex_id(m, i + 1, j), miura_vertex_id(m, i + 1, j + 1),
                        miura_vertex_id(m, i, j + 1)});
    }
  }
  nlohmann::json meta = {{"generator", "miura"}, {"m", m}, {"n", n}, {"a", a}, {"b", b}, {"alpha", alpha}};
  return CreasePattern(std::move(X), std::move(creases), std::move(boundary), std::move(facets), std::move(meta));
}

/// Two creases at lattice vertex (1, 1): the zigzag crease towards (1, 2) and
/// the straight crease towards (2, 1). Both are mountains.
struct MiuraReference {
  int zigzag = 0;
  int straight = 0;
};

inline MiuraReference miura_reference_creases(const CreasePattern& p) {
  if (p.meta().value("generator", "") != "miura") throw DomainError("not a generated Miura pattern");
  const int m = p.meta().at("m").get<int>();
  const auto z = p.crease_index(miura_vertex_id(m, 1, 1), miura_vertex_id(m, 1, 2));
  const auto s = p.crease_index(miura_vertex_id(m, 1, 1), miura_vertex_id(m, 2, 1));
  if (!z || !s) throw DomainError("Miura reference creases not found");
  return {*z, *s};
}

/// Eight creases of length `radius` at 45 degree spacing around vertex 0,
/// bounded by the octagon of their endpoints. Crease k (towards vertex k+1,
/// at angle 45k degrees) is a mountain for even k.
inline CreasePattern generate_waterbomb_base(double radius) {
  if (!(radius > 0.0)) throw DomainError("waterbomb radius must be positive");
  std::vector<Vec2> X{Vec2::Zero()};
  for (int k = 0; k < 8; ++k) X.emplace_back(radius * std::cos(k * kPi / 4), radius * std::sin(k * kPi / 4));
  std::vector<Crease> creases;
  std::vector<Edge> boundary;
  std::vector<std::vector<int>> facets;
  for (int k = 1; k <= 8; ++k) {
    creases.push_back({0, k, (k - 1) % 2 == 0 ? Assignment::mountain : Assignment::valley});
    boundary.push_back({k, k % 8 + 1});
    facets.push_back({0, k, k % 8 + 1});
  }
  nlohmann::json meta = {{"generator", "waterbomb_base"}, {"radius", radius}};
  return CreasePattern(std::move(X), std::move(creases), std::move(boundary), std::move(facets), std::move(meta));
}

/// rows x cols degree-6 waterbomb bases of size a x b. Odd rows are shifted
/// by half a base; their end bases are cut by the sheet boundary. Diagonals
/// are mountains; midlines and the lines between rows are valleys.
inline CreasePattern generate_waterbomb_tessellation(int rows, int cols, double a, double b) {
  if (rows < 1 || cols < 1) throw DomainError("tessellation counts must be at least 1");
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("tessellation base sizes must be positive");
  // Vertices live on the half-size grid (h * a/2, v * b/2).
  const int H = 2 * cols, V = 2 * rows;
  std::map<std::pair<int, int>, int> id;
  std::vector<Vec2> X;
  auto vid = [&](int h, int v) {
    auto [it, fresh] = id.try_emplace({h, v}, static_cast<int>(X.size()));
    if (fresh) X.emplace_back(h * a / 2, v * b / 2);
    return it->second;
  };
  std::set<std::pair<int, int>> seen;
  std::vector<detail::PlanarEdge> edges;
  auto add = [&](int p, int q, bool bnd, Assignment s) {
    if (seen.insert(CreasePattern::key(p, q)).second) edges.push_back({p, q, bnd, s});
  };
  std::vector<std::vector<int>> on_line(static_cast<std::size_t>(rows + 1));  // h values per line v = 2r
  for (int r = 0; r < rows; ++r) {
    const int vc = 2 * r + 1;
    std::vector<int> centers;
    if (r % 2 == 0) {
      for (int k = 0; k < cols; ++k) centers.push_back(2 * k + 1);
    } else {
      for (int k = 0; k <= cols; ++k) centers.push_back(2 * k);
    }
    for (int hc : centers) {
      for (int dh : {-1, 1}) {
        if (hc + dh < 0 || hc + dh > H) continue;
        for (int dv : {-1, 1}) {
          add(vid(hc, vc), vid(hc + dh, vc + dv), false, Assignment::mountain);
          on_line[static_cast<std::size_t>(r + (dv > 0))].push_back(hc + dh);
        }
      }
    }
    std::vector<int> mid = centers;
    if (mid.front() != 0) mid.insert(mid.begin(), 0);
    if (mid.back() != H) mid.push_back(H);
    for (std::size_t k = 0; k + 1 < mid.size(); ++k) add(vid(mid[k], vc), vid(mid[k + 1], vc), false, Assignment::valley);
  }
  for (int r = 0; r <= rows; ++r) {
    auto& hs = on_line[static_cast<std::size_t>(r)];
    hs.push_back(0);
    hs.push_back(H);
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    const bool bnd = r == 0 || r == rows;
    for (std::size_t k = 0; k + 1 < hs.size(); ++k) {
      add(vid(hs[k], 2 * r), vid(hs[k + 1], 2 * r), bnd, bnd ? Assignment::unassigned : Assignment::valley);
    }
  }
  for (int h : {0, H}) {
    for (int v = 0; v < V; ++v) add(vid(h, v), vid(h, v + 1), true, Assignment::unassigned);
  }
  nlohmann::json meta = {{"generator", "waterbomb_tessellation"}, {"rows", rows}, {"cols", cols}, {"a", a}, {"b", b}};
  return detail::assemble_pattern(std::move(X), edges, std::move(meta));
}

namespace detail {

inline const std::vector<Vec2>& crane_vertices() {
  static const std::vector<Vec2> X{
      {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0},          // 0-3 corners
      {0.5, 0.5},                                              // 4 centre
      {0.5, 0.0}, {1.0, 0.5}, {0.5, 1.0}, {0.0, 0.5},          // 5-8 edge midpoints
      {0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75},  // 9-12 diamond/diagonal crossings
  };
  return X;
}

struct CraneCrease {
  int a, b;
  Assignment s;
};

// Final fold directions: diamond valleys (blintz), diagonal through 0-2 folded
// with the base layer as a valley and the flaps as mountains, and the
// diagonal through 1-3 split the same way across the stack.
inline const std::vector<CraneCrease>& crane_creases() {
  using A = Assignment;
  static const std::vector<CraneCrease> C{
      // diamond
      {5, 10, A::valley}, {10, 6, A::valley}, {6, 11, A::valley}, {11, 7, A::valley},
      {7, 12, A::valley}, {12, 8, A::valley}, {8, 9, A::valley}, {9, 5, A::valley},
      // diagonal 0-2: outer segments in the flaps, inner in the base layer
      {0, 9, A::mountain}, {9, 4, A::valley}, {4, 11, A::valley}, {11, 2, A::mountain},
      // diagonal 1-3
      {1, 10, A::mountain}, {10, 4, A::valley}, {4, 12, A::mountain}, {12, 3, A::valley},
      // midlines stay flat
      {4, 5, A::unassigned}, {4, 6, A::unassigned}, {4, 7, A::unassigned}, {4, 8, A::unassigned},
  };
  return C;
}

}  // namespace detail

/// Crane base on the unit square: a blintz diamond through the edge midpoints,
/// both diagonals and both midlines, mirror symmetric about y = x. The
/// coordinates are reconstructed, not measured.
inline CreasePattern generate_crane() {
  std::vector<detail::PlanarEdge> edges;
  for (const auto& c : detail::crane_creases()) edges.push_back({c.a, c.b, false, c.s});
  for (auto [p, q] : {std::pair{0, 5}, {5, 1}, {1, 6}, {6, 2}, {2, 7}, {7, 3}, {3, 8}, {8, 0}}) {
    edges.push_back({p, q, true, Assignment::unassigned});
  }
  nlohmann::json meta = {{"generator", "crane"}, {"coordinates", "reconstructed"}};
  return detail::assemble_pattern(detail::crane_vertices(), edges, std::move(meta));
}

/// Three stages: blintz the corners, fold the stack along diagonal 0-2, then
/// along diagonal 1-3. Earlier creases are held in later stages.
inline FoldSchedule crane_schedule(const CreasePattern& crane, int steps_per_stage = 36) {
  auto target_of = [](const detail::CraneCrease& c) { return assignment_sign(c.s) * kPi; };
  auto idx = [&](const detail::CraneCrease& c) {
    auto i = crane.crease_index(c.a, c.b);
    if (!i) throw DomainError("crane schedule does not match the pattern");
    return *i;
  };
  const auto& C = detail::crane_creases();
  FoldSchedule sched;
  std::vector<int> held;
  for (auto [lo, hi] : {std::pair{0, 8}, {8, 12}, {12, 16}}) {
    FoldStage st;
    st.steps = steps_per_stage;
    st.hold = held;
    for (int k = lo; k < hi; ++k) {
      st.controlled.push_back({idx(C[static_cast<std::size_t>(k)]), target_of(C[static_cast<std::size_t>(k)])});
      held.push_back(idx(C[static_cast<std::size_t>(k)]));
    }
    sched.stages.push_back(std::move(st));
  }
  return sched;
}

}  // namespace rigami
