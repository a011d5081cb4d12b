#pragma once

// Folded-form reconstruction: facets are placed along a breadth-first
// spanning tree of the facet adjacency graph, each child rotated about its
// shared crease by the crease's fold angle. Also measurement helpers.

#include <rigami/core.hpp>
#include <rigami/kinematics.hpp>
#include <rigami/pattern.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>

#include <cstdint>
#include <cstring>
#include <deque>
#include <optional>
#include <vector>

namespace rigami {

struct TreeLink {
  int parent = -1;  ///< -1 for the root
  int crease = -1;  ///< shared crease id
  int a = -1;       ///< axis runs a -> b, clockwise along the parent facet
  int b = -1;
};

struct SpanningTree {
  int root = 0;
  std::vector<TreeLink> links;  ///< per facet
  std::vector<int> order;       ///< breadth-first visiting order, root first

  std::size_t num_edges() const { return order.empty() ? 0 : order.size() - 1; }
};

inline SpanningTree build_spanning_tree(const CreasePattern& p, int root = 0) {
  const auto nf = static_cast<int>(p.num_facets());
  if (root < 0 || root >= nf) throw DomainError("root facet " + std::to_string(root) + " out of range");
  SpanningTree t;
  t.root = root;
  t.links.assign(static_cast<std::size_t>(nf), {});
  std::vector<bool> seen(static_cast<std::size_t>(nf), false);
  std::deque<int> queue{root};
  seen[static_cast<std::size_t>(root)] = true;
  while (!queue.empty()) {
    const int f = queue.front();
    queue.pop_front();
    t.order.push_back(f);
    struct Candidate {
      int facet, crease, a, b;
    };
    std::vector<Candidate> next;
    const auto& cyc = p.facets()[static_cast<std::size_t>(f)];
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      const int from = cyc[k], to = cyc[(k + 1) % cyc.size()];
      const auto ci = p.crease_index(from, to);
      if (!ci) continue;
      for (const EdgeUse& u : p.edge_uses(from, to)) {
        if (u.facet != f && !seen[static_cast<std::size_t>(u.facet)]) next.push_back({u.facet, *ci, to, from});
      }
    }
    std::sort(next.begin(), next.end(), [](const Candidate& l, const Candidate& r) { return l.facet < r.facet; });
    for (const auto& c : next) {
      if (seen[static_cast<std::size_t>(c.facet)]) continue;
      seen[static_cast<std::size_t>(c.facet)] = true;
      t.links[static_cast<std::size_t>(c.facet)] = {f, c.crease, c.a, c.b};
      queue.push_back(c.facet);
    }
  }
  if (static_cast<int>(t.order.size()) != nf) throw DomainError("facet adjacency graph is disconnected");
  return t;
}

/// Proper rotation by rho about the unit axis e.
inline Mat3 rodrigues(double rho, const Vec3& e) {
  if (std::abs(e.norm() - 1.0) > 1e-12) throw DomainError("rotation axis must be a unit vector");
  return Eigen::AngleAxisd(rho, e).toRotationMatrix();
}

struct Embedding3D {
  std::vector<Vec3> x;
  int root = 0;
  std::uint64_t state_hash = 0;
  double tear = 0.0;  ///< largest disagreement between facets placing a shared vertex
};

namespace detail {

inline std::uint64_t hash_state(const FoldState& rho) {
  std::uint64_t h = 1469598103934665603ull;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    std::uint64_t bits;
    const double v = rho[i];
    std::memcpy(&bits, &v, sizeof bits);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

inline double pattern_diameter(const CreasePattern& p) {
  if (p.vertices().empty()) return 0.0;
  Vec2 lo = p.vertices()[0], hi = lo;
  for (const Vec2& v : p.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

inline Vec3 lift(const Vec2& v) { return {v.x(), v.y(), 0.0}; }

}  // namespace detail

/// Places every facet rigidly; the root facet keeps its planar coordinates.
/// Throws when the fold angles tear the mesh by more than tear_tolerance
/// (relative to the pattern diameter).
inline Embedding3D embed(const CreasePattern& p, const FoldState& rho, int root = 0, double tear_tolerance = 1e-6) {
  if (rho.size() != static_cast<Eigen::Index>(p.num_creases())) throw DomainError("fold state size does not match the pattern");
  Embedding3D e;
  e.root = root;
  e.state_hash = detail::hash_state(rho);
  if (p.num_facets() == 0) {
    for (const Vec2& v : p.vertices()) e.x.push_back(detail::lift(v));
    return e;
  }
  const SpanningTree t = build_spanning_tree(p, root);
  const auto& X = p.vertices();
  std::vector<Mat3> R(p.num_facets(), Mat3::Identity());
  std::vector<Vec3> T(p.num_facets(), Vec3::Zero());
  for (int f : t.order) {
    const TreeLink& l = t.links[static_cast<std::size_t>(f)];
    if (l.parent < 0) continue;
    const Vec3 Xa = detail::lift(X[static_cast<std::size_t>(l.a)]);
    const Vec3 axis = (detail::lift(X[static_cast<std::size_t>(l.b)]) - Xa).normalized();
    const Mat3 Q = rodrigues(rho[l.crease], axis);
    // x -> Rp (Q (x - Xa) + Xa) + Tp
    const auto pf = static_cast<std::size_t>(l.parent);
    R[static_cast<std::size_t>(f)] = R[pf] * Q;
    T[static_cast<std::size_t>(f)] = R[pf] * (Xa - Q * Xa) + T[pf];
  }
  e.x.assign(X.size(), Vec3::Zero());
  std::vector<bool> placed(X.size(), false);
  for (int f : t.order) {
    for (int v : p.facets()[static_cast<std::size_t>(f)]) {
      const Vec3 y = R[static_cast<std::size_t>(f)] * detail::lift(X[static_cast<std::size_t>(v)]) + T[static_cast<std::size_t>(f)];
      if (!placed[static_cast<std::size_t>(v)]) {
        e.x[static_cast<std::size_t>(v)] = y;
        placed[static_cast<std::size_t>(v)] = true;
      } else {
        e.tear = std::max(e.tear, (y - e.x[static_cast<std::size_t>(v)]).norm());
      }
    }
  }
  for (std::size_t v = 0; v < X.size(); ++v) {
    if (!placed[v]) e.x[v] = detail::lift(X[v]);
  }
  if (e.tear > tear_tolerance * std::max(1.0, detail::pattern_diameter(p))) {
    throw DomainError("incompatible fold state: facets disagree by " + std::to_string(e.tear));
  }
  return e;
}

/// Unnormalized facet normal (twice the vector area) by Newell's method.
inline Vec3 newell_normal(const std::vector<Vec3>& x, const std::vector<int>& cycle) {
  Vec3 n = Vec3::Zero();
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const Vec3& p = x[static_cast<std::size_t>(cycle[k])];
    const Vec3& q = x[static_cast<std::size_t>(cycle[(k + 1) % cycle.size()])];
    n += p.cross(q);
  }
  return n;
}

/// Fold angle of every crease measured from the embedded facet normals,
/// valley positive. Near +-pi the sign follows the crease assignment.
inline FoldState dihedral_angles(const CreasePattern& p, const Embedding3D& e) {
  if (e.x.size() != p.num_vertices()) throw DomainError("embedding does not match the pattern");
  std::vector<Vec3> normals;
  for (const auto& f : p.facets()) {
    Vec3 n = newell_normal(e.x, f);
    if (n.norm() < 1e-14) throw DomainError("degenerate facet normal");
    normals.push_back(n.normalized());
  }
  FoldState rho(static_cast<Eigen::Index>(p.num_creases()));
  for (std::size_t i = 0; i < p.num_creases(); ++i) {
    const Crease& c = p.creases()[i];
    const auto& uses = p.edge_uses(c.a, c.b);
    if (uses.size() != 2) throw DomainError("crease without two facets");
    // The second facet lies to the left of the axis to -> from of the first.
    const Vec3 axis = (e.x[static_cast<std::size_t>(uses[0].from)] - e.x[static_cast<std::size_t>(uses[0].to)]).normalized();
    const Vec3& n0 = normals[static_cast<std::size_t>(uses[0].facet)];
    const Vec3& n1 = normals[static_cast<std::size_t>(uses[1].facet)];
    const double s = n0.cross(n1).dot(axis);
    const double cs = n0.dot(n1);
    double angle = std::atan2(s, cs);
    if (std::abs(s) < 1e-9 && cs < 0.0) {
      angle = c.assignment == Assignment::mountain ? -kPi : kPi;
    }
    rho[static_cast<Eigen::Index>(i)] = angle;
  }
  return rho;
}

struct Dimensions {
  double L = 0.0;
  double W = 0.0;
  double H = 0.0;
  // Unit axes the extents were taken along, in embedding coordinates.
  Vec3 axis_l = Vec3::UnitX();
  Vec3 axis_w = Vec3::UnitY();
  Vec3 axis_h = Vec3::UnitZ();
};

namespace detail {

inline double extent(const std::vector<Vec3>& x, const Vec3& axis) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec3& v : x) {
    lo = std::min(lo, v.dot(axis));
    hi = std::max(hi, v.dot(axis));
  }
  return x.empty() ? 0.0 : hi - lo;
}

inline Dimensions extents_along(const std::vector<Vec3>& x, const Vec3& l, const Vec3& w, const Vec3& h) {
  Dimensions d;
  d.axis_l = l.normalized();
  d.axis_w = w.normalized();
  d.axis_h = h.normalized();
  d.L = extent(x, d.axis_l);
  d.W = extent(x, d.axis_w);
  d.H = extent(x, d.axis_h);
  return d;
}

}  // namespace detail

/// Axis-aligned extents in the embedding frame, where the root facet stays at
/// its pattern position in the z = 0 plane.
inline Dimensions measure_dimensions(const Embedding3D& e) {
  return detail::extents_along(e.x, Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ());
}

/// Extents in the folded form's own frame: H along the total vector area of
/// the surface, L and W along the principal axes of the vertex cloud within
/// the perpendicular plane, L being the axis closer to x. A flat-folded sheet
/// has no vector area; its principal axes are then matched to the axes of
/// `previous` when given, else the thinnest one is taken as H.
inline Dimensions measure_sheet_dimensions(const CreasePattern& p, const Embedding3D& e,
                                           const Dimensions* previous = nullptr) {
  if (e.x.empty()) return {};
  Vec3 up = Vec3::Zero();
  double area = 0.0;
  for (const auto& f : p.facets()) {
    const Vec3 n = newell_normal(e.x, f);
    up += n;
    area += n.norm();
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& v : e.x) centroid += v;
  centroid /= static_cast<double>(e.x.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& v : e.x) cov += (v - centroid) * (v - centroid).transpose();
  if (up.norm() <= 1e-6 * area) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const Mat3 V = es.eigenvectors();
    if (!previous) return detail::extents_along(e.x, V.col(2), V.col(1), V.col(0));
    // Assign each principal axis to the previous axis it aligns with best.
    const std::array<Vec3, 3> ref{previous->axis_l, previous->axis_w, previous->axis_h};
    std::array<int, 3> perm{0, 1, 2}, best = perm;
    double score = -1.0;
    do {
      double sc = 0.0;
      for (int k = 0; k < 3; ++k) sc += std::abs(V.col(perm[static_cast<std::size_t>(k)]).dot(ref[static_cast<std::size_t>(k)]));
      if (sc > score) {
        score = sc;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return detail::extents_along(e.x, V.col(best[0]), V.col(best[1]), V.col(best[2]));
  }
  up.normalize();
  const Mat3 P = Mat3::Identity() - up * up.transpose();
  Vec3 ex = P * Vec3::UnitX();
  if (ex.norm() < 1e-12) ex = P * Vec3::UnitY();
  ex.normalize();
  const Vec3 ey = up.cross(ex);
  Eigen::Matrix2d c2;
  c2 << ex.dot(cov * ex), ex.dot(cov * ey), ey.dot(cov * ex), ey.dot(cov * ey);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(c2);
  const Vec2 ev = es2.eigenvalues();
  Vec3 axis_l = ex, axis_w = ey;
  if (std::abs(ev[1] - ev[0]) > 1e-9 * std::max(1.0, std::abs(ev[1]))) {
    const Eigen::Matrix2d V = es2.eigenvectors();
    const Vec3 u0 = V(0, 0) * ex + V(1, 0) * ey;
    const Vec3 u1 = V(0, 1) * ex + V(1, 1) * ey;
    if (std::abs(u0.dot(ex)) >= std::abs(u1.dot(ex))) {
      axis_l = u0;
      axis_w = u1;
    } else {
      axis_l = u1;
      axis_w = u0;
    }
  }
  return detail::extents_along(e.x, axis_l, axis_w, up);
}

/// Sheet-frame extents along a folding sequence, each frame tracked from the
/// one before.
inline std::vector<Dimensions> sheet_dimension_history(const CreasePattern& p,
                                                       const std::vector<Embedding3D>& frames) {
  std::vector<Dimensions> out;
  out.reserve(frames.size());
  for (const auto& e : frames) out.push_back(measure_sheet_dimensions(p, e, out.empty() ? nullptr : &out.back()));
  return out;
}

/// nu = -((L1 - L0)/L0) / ((W1 - W0)/W0) for consecutive samples; an empty
/// entry marks a step with no change in W.
inline std::vector<std::optional<double>> poisson_ratio(const std::vector<Dimensions>& history) {
  if (history.size() < 2) throw DomainError("Poisson ratio needs at least two samples");
  std::vector<std::optional<double>> nu;
  for (std::size_t i = 0; i + 1 < history.size(); ++i) {
    const Dimensions& a = history[i];
    const Dimensions& b = history[i + 1];
    const double dw = b.W - a.W;
    if (dw == 0.0 || a.W == 0.0 || a.L == 0.0) {
      nu.push_back(std::nullopt);
      continue;
    }
    nu.push_back(-((b.L - a.L) / a.L) / (dw / a.W));
  }
  return nu;
}

/// Angle between the symmetry axis OS of a waterbomb base and its creases
/// OA, where A are the tips of the creases that close onto the axis in the
/// downward compact state (theta = 0). With valley-positive fold angles these
/// are the valley creases.
inline double waterbomb_theta(const CreasePattern& p, const Embedding3D& e) {
  if (p.interior_vertices().size() != 1) throw DomainError("not a waterbomb base: needs one interior vertex");
  const auto fans = build_vertex_fans(p);
  const VertexFan& fan = fans.front();
  if (fan.size() != 8) throw DomainError("not a waterbomb base: centre must have 8 creases");
  const int o = fan.vertex_id;
  std::vector<int> mountain, valley;
  for (int ci : fan.creases) {
    const Crease& c = p.creases()[static_cast<std::size_t>(ci)];
    const int tip = c.a == o ? c.b : c.a;
    if (c.assignment == Assignment::mountain) mountain.push_back(tip);
    else if (c.assignment == Assignment::valley) valley.push_back(tip);
  }
  if (mountain.size() != 4 || valley.size() != 4) throw DomainError("not a waterbomb base: needs 4 mountains and 4 valleys");
  const Vec3 O = e.x[static_cast<std::size_t>(o)];
  // Normal of the quad of tips, counterclockwise in the pattern; +z when flat.
  auto quad_normal = [&](const std::vector<int>& q) {
    auto P = [&](int k) { return e.x[static_cast<std::size_t>(q[static_cast<std::size_t>(k)])]; };
    return Vec3((P(0) - P(2)).cross(P(1) - P(3)));
  };
  Vec3 S = quad_normal(valley);
  if (S.norm() < 1e-9) S = quad_normal(mountain);
  if (S.norm() < 1e-12) throw DomainError("waterbomb symmetry axis is degenerate");
  S = -S.normalized();
  double sum = 0.0;
  for (int a : valley) {
    const Vec3 oa = (e.x[static_cast<std::size_t>(a)] - O).normalized();
    sum += std::atan2(oa.cross(S).norm(), oa.dot(S));
  }
  return sum / 4.0;
}

}  // namespace rigami
