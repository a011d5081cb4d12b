#include "fixtures.hpp"
#include "oracles.hpp"

#include <rigami/rigami.hpp>

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace rigami;

namespace {

MatX random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  MatX M(rows, cols);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = n(rng);
  return M;
}

// Largest violation of the four Penrose identities, relative to |M| |M+|.
double penrose_defect(const MatX& M, const MatX& P) {
  const double scale = std::max(1.0, M.norm()) * std::max(1.0, P.norm());
  double e = (M * P * M - M).norm() / scale;
  e = std::max(e, (P * M * P - P).norm() / scale);
  e = std::max(e, ((M * P).transpose() - M * P).norm() / scale);
  e = std::max(e, ((P * M).transpose() - P * M).norm() / scale);
  return e;
}

}  // namespace

TEST(Pseudoinverse, Identity) {
  EXPECT_TRUE(pseudoinverse(MatX::Identity(4, 4)).isApprox(MatX::Identity(4, 4), 1e-15));
}

TEST(Pseudoinverse, RankDeficientDiagonal) {
  MatX D = MatX::Zero(2, 2);
  D(0, 0) = 2.0;
  MatX expected = MatX::Zero(2, 2);
  expected(0, 0) = 0.5;
  EXPECT_LT((pseudoinverse(D) - expected).norm(), 1e-15);
}

TEST(Pseudoinverse, PenroseIdentitiesOnConstraintMatrices) {
  const Mechanism m(fixture::miura());
  for (double deg : {-1.0, -40.0, -120.0}) {
    const MatX C = m.assemble(fixture::miura_state(deg2rad(deg))).C;
    const MatX P = pseudoinverse(C);
    EXPECT_LT((C * P * C - C).norm() / C.norm(), 1e-10);
    EXPECT_LT(penrose_defect(C, P), 1e-9);
  }
  const MatX flat = m.assemble(FoldState::Zero(m.num_creases())).C;
  EXPECT_LT(penrose_defect(flat, pseudoinverse(flat)), 1e-9);
}

TEST(Pseudoinverse, WideTallAndRankDeficient) {
  for (const MatX& M : {random_matrix(3, 8, 1), random_matrix(8, 3, 2),
                        MatX(random_matrix(6, 2, 3) * random_matrix(2, 9, 4))}) {
    EXPECT_LT(penrose_defect(M, pseudoinverse(M)), 1e-9);
  }
}

TEST(Pseudoinverse, NonFiniteInput) {
  MatX M = MatX::Identity(2, 2);
  M(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(pseudoinverse(M), DomainError);
}

TEST(MinNormSolve, SymmetricSplit) {
  MatX M(1, 2);
  M << 1, 1;
  VecX b(1);
  b << 2;
  const VecX x = min_norm_solve(M, b);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(MinNormSolve, SquareNonsingular) {
  const MatX M = random_matrix(5, 5, 7);
  const VecX x = VecX::LinSpaced(5, -2.0, 2.0);
  EXPECT_LT((min_norm_solve(M, M * x) - x).norm(), 1e-12);
}

TEST(MinNormSolve, ShortestAmongSolutions) {
  const MatX M = random_matrix(4, 9, 11);
  const VecX b = random_matrix(4, 1, 12);
  const VecX x = min_norm_solve(M, b);
  ASSERT_LT((M * x - b).norm(), 1e-12);
  // Oracle: every solution is x plus a null-space vector.
  Eigen::JacobiSVD<MatX> svd(M, Eigen::ComputeFullV);
  const MatX N = svd.matrixV().rightCols(5);
  std::mt19937 rng(13);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    VecX c(5);
    for (auto& v : c) v = n(rng);
    const VecX other = x + N * c;
    EXPECT_LT((M * other - b).norm(), 1e-10);
    EXPECT_GE(other.norm(), x.norm());
  }
}

TEST(MinNormSolve, ZeroRightHandSide) {
  const MatX M = random_matrix(3, 6, 17);
  EXPECT_EQ(min_norm_solve(M, VecX::Zero(3)), VecX::Zero(6));
}

TEST(MinNormSolve, Errors) {
  EXPECT_THROW(min_norm_solve(MatX::Identity(2, 2), VecX::Zero(3)), DomainError);
  VecX b = VecX::Zero(2);
  b[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(min_norm_solve(MatX::Identity(2, 2), b), DomainError);
}

TEST(Rank, ZeroMatrix) { EXPECT_EQ(rank(MatX::Zero(3, 4)), 0); }

TEST(Rank, WaterbombGeneric) {
  const Mechanism m(fixture::waterbomb());
  const MatX C = m.assemble(fixture::waterbomb_state(0.6 * kPi)).C;
  EXPECT_EQ(rank(C), 3);
  EXPECT_EQ(rank(C), oracle::jacobi_rank(C));
}

TEST(Rank, MiuraFlatIsDegenerate) {
  const Mechanism m(fixture::miura());
  const MatX flat = m.assemble(FoldState::Zero(m.num_creases())).C;
  const MatX folded = m.assemble(fixture::miura_state(deg2rad(-60.0))).C;
  EXPECT_LT(rank(flat), rank(folded));
  EXPECT_EQ(rank(flat), oracle::jacobi_rank(flat));
  EXPECT_EQ(rank(flat), 2 * static_cast<Eigen::Index>(fixture::miura().interior_vertices().size()));
}

TEST(Rank, PermutationInvariant) {
  const MatX M = random_matrix(5, 3, 19) * random_matrix(3, 7, 20);
  Eigen::PermutationMatrix<Eigen::Dynamic> pr(5), pc(7);
  pr.setIdentity();
  pc.setIdentity();
  std::mt19937 rng(21);
  std::shuffle(pr.indices().data(), pr.indices().data() + 5, rng);
  std::shuffle(pc.indices().data(), pc.indices().data() + 7, rng);
  EXPECT_EQ(rank(M), 3);
  EXPECT_EQ(rank(MatX(pr * M * pc)), 3);
}

TEST(Rank, CutoffMustBePositive) { EXPECT_THROW(rank(MatX::Identity(2, 2), SvdTolerance{0.0}), DomainError); }
