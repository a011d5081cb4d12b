#pragma once

// Loop-closure constraint of an interior vertex, its analytic derivatives and
// the global linearized constraint system C * drho = -r.

#include <rigami/core.hpp>
#include <rigami/numerics.hpp>
#include <rigami/pattern.hpp>

#include <array>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

namespace rigami {

/// Fold angles in radians, one per crease in canonical crease order.
/// Valleys are positive, mountains negative.
using FoldState = VecX;

template <class Scalar = double>
inline Eigen::Matrix<Scalar, 3, 3> rot_x(Scalar t) {
  const Scalar c = std::cos(t), s = std::sin(t);
  Eigen::Matrix<Scalar, 3, 3> R;
  R << 1, 0, 0, 0, c, -s, 0, s, c;
  return R;
}

template <class Scalar = double>
inline Eigen::Matrix<Scalar, 3, 3> rot_z(Scalar t) {
  const Scalar c = std::cos(t), s = std::sin(t);
  Eigen::Matrix<Scalar, 3, 3> R;
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

/// d/dt rot_x(t)
inline Mat3 rot_x_prime(double t) {
  const double c = std::cos(t), s = std::sin(t);
  Mat3 R;
  R << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return R;
}

/// chi = Rz(theta_prev) * Rx(rho): frame of crease i seen from crease i-1.
inline Mat3 crease_transform(double theta_prev, double rho) { return rot_z(theta_prev) * rot_x(rho); }

namespace detail {

inline void check_fan_angles(const VertexFan& fan, const VecX& rho_fan) {
  if (static_cast<std::size_t>(rho_fan.size()) != fan.size()) {
    throw DomainError("fan of vertex " + std::to_string(fan.vertex_id) + " has " +
                      std::to_string(fan.size()) + " creases but " + std::to_string(rho_fan.size()) +
                      " fold angles were given");
  }
}

// Factor k of the loop product: Rz(sector k) * Rx(rho of fan crease k+1).
inline Mat3 loop_factor(const VertexFan& fan, const VecX& rho_fan, std::size_t k) {
  const std::size_t n = fan.size();
  return crease_transform(fan.sector_angles[k], rho_fan[static_cast<Eigen::Index>((k + 1) % n)]);
}

}  // namespace detail

/// F = chi_{1,2} chi_{2,3} ... chi_{n,1}; the identity for compatible angles.
inline Mat3 loop_closure(const VertexFan& fan, const VecX& rho_fan) {
  detail::check_fan_angles(fan, rho_fan);
  Mat3 F = Mat3::Identity();
  for (std::size_t k = 0; k < fan.size(); ++k) F = F * detail::loop_factor(fan, rho_fan, k);
  return F;
}

/// Off-diagonal entries (F32, F13, F21) of the loop product.
inline Vec3 vertex_residual(const VertexFan& fan, const VecX& rho_fan) {
  const Mat3 F = loop_closure(fan, rho_fan);
  return {F(2, 1), F(0, 2), F(1, 0)};
}

/// dF/drho_j for every fan crease j, from prefix and suffix products.
inline std::vector<Mat3> loop_closure_derivatives(const VertexFan& fan, const VecX& rho_fan) {
  detail::check_fan_angles(fan, rho_fan);
  const std::size_t n = fan.size();
  std::vector<Mat3> prefix(n + 1), suffix(n + 1);
  prefix[0] = Mat3::Identity();
  suffix[n] = Mat3::Identity();
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * detail::loop_factor(fan, rho_fan, k);
  for (std::size_t k = n; k-- > 0;) suffix[k] = detail::loop_factor(fan, rho_fan, k) * suffix[k + 1];

  std::vector<Mat3> dF(n);
  for (std::size_t j = 0; j < n; ++j) {
    // rho_j enters through factor k = j - 1 (cyclic).
    const std::size_t k = (j + n - 1) % n;
    dF[j] = prefix[k] * rot_z(fan.sector_angles[k]) *
            rot_x_prime(rho_fan[static_cast<Eigen::Index>(j)]) * suffix[k + 1];
  }
  return dF;
}

/// 3 x n matrix whose column j holds entries (3,2), (1,3), (2,1) of dF/drho_j.
inline MatX vertex_jacobian(const VertexFan& fan, const VecX& rho_fan) {
  const auto dF = loop_closure_derivatives(fan, rho_fan);
  MatX J(3, static_cast<Eigen::Index>(dF.size()));
  for (std::size_t j = 0; j < dF.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    J(0, c) = dF[j](2, 1);
    J(1, c) = dF[j](0, 2);
    J(2, c) = dF[j](1, 0);
  }
  return J;
}

struct GlobalConstraint {
  MatX C;       ///< 3 N_Vi x N_Ei
  VecX r;       ///< 3 N_Vi
  FoldState rho;
};

/// Crease pattern with its vertex fans precomputed; evaluates the global
/// constraint system at arbitrary fold states.
class Mechanism {
 public:
  explicit Mechanism(CreasePattern pattern)
      : pattern_(std::move(pattern)), fans_(build_vertex_fans(pattern_)) {
    // Residuals are evaluated in extended precision with sector angles taken
    // straight from the coordinates: near flat-folded states the distance to
    // the manifold scales with the square root of the residual error.
    const auto& X = pattern_.vertices();
    for (const VertexFan& fan : fans_) {
      std::vector<long double> sectors;
      const std::size_t n = fan.size();
      for (std::size_t k = 0; k < n; ++k) {
        auto dir = [&](int ci) {
          const Crease& c = pattern_.creases()[static_cast<std::size_t>(ci)];
          const int other = c.a == fan.vertex_id ? c.b : c.a;
          const Vec2& p = X[static_cast<std::size_t>(fan.vertex_id)];
          const Vec2& q = X[static_cast<std::size_t>(other)];
          return std::pair<long double, long double>{static_cast<long double>(q.x()) - p.x(),
                                                     static_cast<long double>(q.y()) - p.y()};
        };
        const auto [ux, uy] = dir(fan.creases[k]);
        const auto [vx, vy] = dir(fan.creases[(k + 1) % n]);
        long double t = std::atan2(ux * vy - uy * vx, ux * vx + uy * vy);
        if (t <= 0.0L) t += 2.0L * std::numbers::pi_v<long double>;
        sectors.push_back(t);
      }
      precise_sectors_.push_back(std::move(sectors));
    }
  }

  const CreasePattern& pattern() const { return pattern_; }
  const std::vector<VertexFan>& fans() const { return fans_; }
  Eigen::Index num_creases() const { return static_cast<Eigen::Index>(pattern_.num_creases()); }
  Eigen::Index num_constraints() const { return 3 * static_cast<Eigen::Index>(fans_.size()); }

  VecX fan_angles(const VertexFan& fan, const FoldState& rho) const {
    VecX out(static_cast<Eigen::Index>(fan.size()));
    for (std::size_t j = 0; j < fan.size(); ++j) out[static_cast<Eigen::Index>(j)] = rho[fan.creases[j]];
    return out;
  }

  VecX residual(const FoldState& rho) const {
    check_size(rho);
    VecX r(num_constraints());
    for (std::size_t v = 0; v < fans_.size(); ++v) {
      using M3 = Eigen::Matrix<long double, 3, 3>;
      const auto& fan = fans_[v];
      const std::size_t n = fan.size();
      M3 F = M3::Identity();
      for (std::size_t k = 0; k < n; ++k) {
        F = F * (rot_z(precise_sectors_[v][k]) *
                 rot_x(static_cast<long double>(rho[fan.creases[(k + 1) % n]])));
      }
      const auto row = 3 * static_cast<Eigen::Index>(v);
      r[row] = static_cast<double>(F(2, 1));
      r[row + 1] = static_cast<double>(F(0, 2));
      r[row + 2] = static_cast<double>(F(1, 0));
    }
    return r;
  }

  /// ||r|| / (3 N_Vi); zero for patterns without interior vertices.
  double residual_measure(const FoldState& rho) const { return normalized(residual(rho)); }

  double normalized(const VecX& r) const {
    return fans_.empty() ? 0.0 : r.norm() / static_cast<double>(num_constraints());
  }

  GlobalConstraint assemble(const FoldState& rho) const {
    check_size(rho);
    GlobalConstraint g{MatX::Zero(num_constraints(), num_creases()), residual(rho), rho};
    for (std::size_t v = 0; v < fans_.size(); ++v) {
      const auto row = 3 * static_cast<Eigen::Index>(v);
      const VecX local = fan_angles(fans_[v], rho);
      const MatX J = vertex_jacobian(fans_[v], local);
      for (std::size_t j = 0; j < fans_[v].size(); ++j) {
        g.C.block<3, 1>(row, fans_[v].creases[j]) += J.col(static_cast<Eigen::Index>(j));
      }
    }
    return g;
  }

  void check_size(const FoldState& rho) const {
    if (rho.size() != num_creases()) {
      throw DomainError("fold state has " + std::to_string(rho.size()) + " angles, pattern has " +
                        std::to_string(num_creases()) + " creases");
    }
  }

 private:
  CreasePattern pattern_;
  std::vector<VertexFan> fans_;
  std::vector<std::vector<long double>> precise_sectors_;
};

inline GlobalConstraint assemble_global(const CreasePattern& p, const FoldState& rho) {
  return Mechanism(p).assemble(rho);
}

/// Kinematic degrees of freedom: nullity of C.
inline Eigen::Index dof(const GlobalConstraint& g, SvdTolerance tol = {}) {
  return g.C.cols() - rank(g.C, tol);
}

/// Number of components outside [-pi, pi] (beyond a small slack).
inline Eigen::Index count_out_of_range(const FoldState& rho, double slack = 1e-9) {
  return static_cast<Eigen::Index>((rho.array().abs() > kPi + slack).count());
}

}  // namespace rigami
