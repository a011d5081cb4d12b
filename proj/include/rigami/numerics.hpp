#pragma once

// SVD-based pseudoinverse, minimum-norm solves and numerical rank.

#include <rigami/core.hpp>

#include <lapacke.h>

#include <algorithm>

namespace rigami {

/// Singular values below cutoff * sigma_max * max(rows, cols) count as zero.
struct SvdTolerance {
  double cutoff = 1e-12;
};

namespace detail {

inline void require_finite(const MatX& M, const char* what) {
  if (!M.allFinite()) throw DomainError(std::string("non-finite entries in ") + what);
}

inline double singular_cutoff(const VecX& sigma, Eigen::Index rows, Eigen::Index cols,
                              SvdTolerance tol) {
  if (tol.cutoff <= 0.0) throw DomainError("SVD cutoff must be positive");
  const double smax = sigma.size() > 0 ? sigma.maxCoeff() : 0.0;
  return tol.cutoff * smax * static_cast<double>(std::max(rows, cols));
}

// Thin SVD M = U diag(s) V^T by LAPACK dgesvd. The divide-and-conquer
// driver is avoided: some LAPACK builds return wrong factors for wide inputs.
struct Svd {
  MatX U;
  VecX s;
  MatX V;

  explicit Svd(const MatX& M, bool vectors = true) {
    const auto m = static_cast<lapack_int>(M.rows());
    const auto n = static_cast<lapack_int>(M.cols());
    const lapack_int k = std::min(m, n);
    MatX A = M;
    s.resize(k);
    MatX Vt;
    if (vectors) {
      U.resize(m, k);
      Vt.resize(k, n);
    }
    VecX superb(std::max<lapack_int>(1, k));
    const char job = vectors ? 'S' : 'N';
    const lapack_int info =
        LAPACKE_dgesvd(LAPACK_COL_MAJOR, job, job, m, n, A.data(), std::max<lapack_int>(1, m), s.data(),
                       vectors ? U.data() : nullptr, std::max<lapack_int>(1, m), vectors ? Vt.data() : nullptr,
                       std::max<lapack_int>(1, k), superb.data());
    if (info != 0) throw SolverError("SVD failed to converge (info " + std::to_string(info) + ")");
    if (vectors) V = Vt.transpose();
  }
};

}  // namespace detail

inline MatX pseudoinverse(const MatX& M, SvdTolerance tol = {}) {
  detail::require_finite(M, "pseudoinverse input");
  if (M.size() == 0) return MatX::Zero(M.cols(), M.rows());
  const detail::Svd svd(M);
  const VecX& s = svd.s;
  const double cut = detail::singular_cutoff(s, M.rows(), M.cols(), tol);
  VecX inv = VecX::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > cut) inv[i] = 1.0 / s[i];
  }
  return svd.V * inv.asDiagonal() * svd.U.transpose();
}

/// x = M^+ b, the least-squares solution of smallest Euclidean norm.
inline VecX min_norm_solve(const MatX& M, const VecX& b, SvdTolerance tol = {}) {
  if (M.rows() != b.size()) throw DomainError("min_norm_solve: dimension mismatch");
  detail::require_finite(b, "right-hand side");
  return pseudoinverse(M, tol) * b;
}

inline Eigen::Index rank(const MatX& M, SvdTolerance tol = {}) {
  detail::require_finite(M, "rank input");
  if (M.size() == 0) return 0;
  const detail::Svd svd(M, false);
  const VecX& s = svd.s;
  const double cut = detail::singular_cutoff(s, M.rows(), M.cols(), tol);
  return static_cast<Eigen::Index>((s.array() > cut).count());
}

}  // namespace rigami
