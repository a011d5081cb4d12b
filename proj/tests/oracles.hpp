#pragma once

// Reference values computed without the library's kinematics: closed
// lattice geometry for the Miura sheet, explicit crease directions for the
// symmetric waterbomb, and finite differences.

#include <rigami/rigami.hpp>

#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using rigami::kPi;
using rigami::Mat3;
using rigami::MatX;
using rigami::Vec3;
using rigami::VecX;

// Folded Miura lattice. Vertex (i, j) sits at
//   (i l + [j odd] s, j w, [i odd] h)
// so every row is a zigzag in a vertical plane and every column a zigzag in a
// horizontal plane. Row edges have length a, column edges b, and the corner
// angle alpha fixes l s = a b cos(alpha). The row spacing w runs from
// b sin(alpha) (flat) down to 0 (flat-folded) and parametrizes the motion.
struct MiuraCell {
  double a = 1.0, b = 1.0, alpha = kPi / 3;
  double w = b * std::sin(alpha);

  double s() const { return std::sqrt(std::max(0.0, b * b - w * w)); }
  double l() const { return a * b * std::cos(alpha) / s(); }
  double h() const { return std::sqrt(std::max(0.0, a * a - l() * l())); }

  Vec3 vertex(int i, int j) const {
    return {i * l() + (j % 2 ? s() : 0.0), j * w, i % 2 ? h() : 0.0};
  }

  // Sheet of m x n cells: (2m + 1) x (2n + 1) lattice vertices.
  double length(int m) const { return 2 * m * l() + s(); }
  double width(int n) const { return 2 * n * w; }

  // Unsigned fold angle of the column crease (1,1)-(1,2), from the normals of
  // the two parallelograms sharing it.
  double column_fold() const {
    const Vec3 o = vertex(1, 1), up = vertex(1, 2);
    const Vec3 left = vertex(0, 1), right = vertex(2, 1);
    const Vec3 axis = up - o;
    const Vec3 n0 = (left - o).cross(axis).normalized();
    const Vec3 n1 = axis.cross(right - o).normalized();
    return std::atan2(n0.cross(n1).norm(), n0.dot(n1));
  }
};

// Bisection on w for the cell whose column crease folds by |rho|.
inline MiuraCell miura_cell_for(double rho, double a = 1.0, double b = 1.0, double alpha = kPi / 3) {
  MiuraCell c{a, b, alpha};
  const double target = std::abs(rho);
  double lo = 0.0, hi = b * std::sin(alpha);
  for (int it = 0; it < 200; ++it) {
    c.w = 0.5 * (lo + hi);
    if (c.column_fold() > target) lo = c.w;
    else hi = c.w;
  }
  c.w = 0.5 * (lo + hi);
  return c;
}

// Analytic in-plane Poisson ratio -(dL/L)/(dW/W) of an m x n sheet.
inline double miura_poisson(const MiuraCell& c, int m, int n) {
  // Derivatives with respect to w.
  const double ds = -c.w / c.s();
  const double dl = -c.l() * ds / c.s();
  const double dL = 2 * m * dl + ds;
  const double dW = 2.0 * n;
  return -(dL / c.length(m)) / (dW / c.width(n));
}

// Symmetric waterbomb base: crease k leaves the apex at azimuth k pi/4. The
// even creases make angle theta with the axis, the odd ones an angle phi
// fixed by the pi/4 sector between neighbours. Returns fold angles
// (even crease, odd crease) measured from the facet normals, valley positive.
inline std::pair<double, double> waterbomb_folds(double theta) {
  const double A = std::cos(theta), B = std::sin(theta) / std::sqrt(2.0), c = 1.0 / std::sqrt(2.0);
  const double R = std::hypot(A, B);
  const double phi = std::atan2(B, A) + std::acos(std::min(1.0, c / R));
  std::vector<Vec3> d;
  for (int k = 0; k < 8; ++k) {
    const double t = k % 2 ? phi : theta, az = k * kPi / 4;
    d.emplace_back(std::sin(t) * std::cos(az), std::sin(t) * std::sin(az), -std::cos(t));
  }
  auto fold = [&](int j) {
    const Vec3 n0 = d[static_cast<std::size_t>((j + 7) % 8)].cross(d[static_cast<std::size_t>(j)]).normalized();
    const Vec3 n1 = d[static_cast<std::size_t>(j)].cross(d[static_cast<std::size_t>((j + 1) % 8)]).normalized();
    return std::atan2(n0.cross(n1).dot(d[static_cast<std::size_t>(j)]), n0.dot(n1));
  };
  return {fold(0), fold(1)};
}

// Symmetric states in (mountain, valley) form. The odd creases of the
// construction fold as mountains.
inline std::pair<double, double> waterbomb_mv(double theta) {
  const auto [even, odd] = waterbomb_folds(theta);
  return {odd, even};
}

// Brute-force minimum of U = 1/2 sum k_i (rho_i - rest_i)^2 along the
// symmetric path over theta in [lo, hi]: dense scan, then golden section.
inline double waterbomb_energy(double theta, double rest_m, double rest_v, double k = 1.0) {
  const auto [m, v] = waterbomb_mv(theta);
  return 0.5 * k * 4.0 * ((m - rest_m) * (m - rest_m) + (v - rest_v) * (v - rest_v));
}

inline double waterbomb_minimizer(double rest_m, double rest_v, double lo, double hi) {
  const int n = 20000;
  double best = lo, best_u = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double t = lo + (hi - lo) * i / n;
    const double u = waterbomb_energy(t, rest_m, rest_v);
    if (u < best_u) {
      best_u = u;
      best = t;
    }
  }
  double a = std::max(lo, best - (hi - lo) / n), b = std::min(hi, best + (hi - lo) / n);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (waterbomb_energy(x1, rest_m, rest_v) < waterbomb_energy(x2, rest_m, rest_v)) b = x2;
    else a = x1;
  }
  return 0.5 * (a + b);
}

// Central difference of a matrix-valued function of one scalar.
inline Mat3 central_difference(const std::function<Mat3(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Rank by one-sided Jacobi SVD with a relative cutoff.
inline Eigen::Index jacobi_rank(const MatX& M, double rel = 1e-9) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<MatX> svd(M);
  const VecX s = svd.singularValues();
  const double cut = rel * (s.size() ? s[0] : 0.0);
  return static_cast<Eigen::Index>((s.array() > cut).count());
}

inline double wrap(double x) { return std::remainder(x, 2.0 * kPi); }

}  // namespace oracle
