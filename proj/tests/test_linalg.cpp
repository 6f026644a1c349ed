#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "biot/linalg.hpp"

using namespace biot;

namespace {

CsrMatrix two_by_two() { return CsrMatrix::from_triplets(2, 2, {{0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 2}}); }

CsrMatrix tridiagonal(std::size_t n) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

DenseMatrix random_spd(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix b(n, n);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
  return b * b.transpose() + static_cast<double>(n) * DenseMatrix::Identity(n, n);
}

DenseVector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  DenseVector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Thomas algorithm for the constant tridiagonal (-1, 2, -1) system.
DenseVector thomas(const DenseVector& rhs) {
  const auto n = rhs.size();
  DenseVector c(n), d(n), x(n);
  c[0] = -0.5;
  d[0] = rhs[0] / 2.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double m = 2.0 + c[i - 1];
    c[i] = -1.0 / m;
    d[i] = (rhs[i] + d[i - 1]) / m;
  }
  x[n - 1] = d[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace

TEST(Csr, FromTripletsSortsAndSumsDuplicates) {
  const auto a = CsrMatrix::from_triplets(3, 3, {{2, 1, 1.0}, {0, 2, 4.0}, {0, 0, 1.0}, {2, 1, 2.5}, {0, 2, -1.0}});
  EXPECT_EQ(a.nonzeros(), 3u);
  EXPECT_DOUBLE_EQ(a(2, 1), 3.5);
  EXPECT_DOUBLE_EQ(a(0, 2), 3.0);
  EXPECT_DOUBLE_EQ(a(1, 1), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    EXPECT_LE(a.row_offsets()[r], a.row_offsets()[r + 1]);
    for (std::size_t k = a.row_offsets()[r] + 1; k < a.row_offsets()[r + 1]; ++k)
      EXPECT_LT(a.col_indices()[k - 1], a.col_indices()[k]);
  }
}

TEST(Csr, OutOfRangeTripletRejected) {
  EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), std::out_of_range);
}

TEST(Csr, PermutedTripletOrderGivesSameMatrix) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> idx(0, 19);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Triplet> t;
  for (int k = 0; k < 300; ++k) t.push_back({idx(rng), idx(rng), u(rng)});
  const auto a = CsrMatrix::from_triplets(20, 20, t);
  std::shuffle(t.begin(), t.end(), rng);
  const auto b = CsrMatrix::from_triplets(20, 20, t);
  EXPECT_EQ(a.row_offsets(), b.row_offsets());
  EXPECT_EQ(a.col_indices(), b.col_indices());
  for (std::size_t k = 0; k < a.nonzeros(); ++k) EXPECT_NEAR(a.values()[k], b.values()[k], 1e-14);
}

TEST(Csr, TransposeAndDenseRoundTrip) {
  const auto a = CsrMatrix::from_triplets(2, 3, {{0, 2, 5.0}, {1, 0, -2.0}});
  const auto at = a.transpose();
  EXPECT_EQ(at.rows(), 3u);
  EXPECT_DOUBLE_EQ(at(2, 0), 5.0);
  EXPECT_DOUBLE_EQ(at(0, 1), -2.0);
  EXPECT_EQ((CsrMatrix::from_dense(a.to_dense()).to_dense() - a.to_dense()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(two_by_two().asymmetry(), 0.0);
}

TEST(Spmv, Examples) {
  DenseVector x(3);
  x << 1.5, -2.0, 4.0;
  EXPECT_EQ(spmv(CsrMatrix::identity(3), x), x);
  EXPECT_EQ(spmv(CsrMatrix::from_triplets(3, 3, {}), x), DenseVector::Zero(3));
  const DenseVector y = spmv(two_by_two(), DenseVector::Ones(2));
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], 3.0);
}

TEST(Spmv, DimensionMismatch) { EXPECT_THROW(spmv(two_by_two(), DenseVector::Ones(3)), std::invalid_argument); }

TEST(Blocks, AssembleWithTransposeAndScale) {
  const auto a = CsrMatrix::identity(2);
  const auto b = CsrMatrix::from_triplets(1, 2, {{0, 0, 3.0}, {0, 1, 4.0}});
  const auto k = assemble_blocks({2, 1}, {2, 1}, {{0, 0, &a}, {0, 1, &b, -1.0, true}, {1, 0, &b}});
  DenseMatrix expect(3, 3);
  expect << 1, 0, -3, 0, 1, -4, 3, 4, 0;
  EXPECT_EQ((k.to_dense() - expect).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(assemble_blocks({2, 1}, {2, 1}, {{0, 0, &b}}), std::invalid_argument);
}

TEST(SolveDirect, Examples) {
  DenseVector b(3);
  b << 1, 2, 3;
  EXPECT_LE((solve_direct(CsrMatrix::identity(3), b) - b).norm(), 1e-15);
  const DenseVector x = solve_direct(two_by_two(), DenseVector::Constant(2, 3.0));
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 1.0, 1e-14);
}

TEST(SolveDirect, RandomSpd50) {
  const auto a = random_spd(50, 42);
  const auto csr = CsrMatrix::from_dense(a);
  const DenseVector b = random_vector(50, 43);
  const DenseVector x = solve_direct(csr, b);
  const DenseVector r = b - a * x;
  EXPECT_LE(r.norm() / b.norm(), 1e-10);
  // one refinement step with an unrelated solver barely moves x
  const DenseVector dx = a.llt().solve(r);
  EXPECT_LE(dx.norm() / x.norm(), 1e-12);
}

TEST(SolveDirect, TwentyRandomSystems) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    DenseMatrix a = random_spd(30, 100 + s);
    a(0, 1) += 0.5;  // not symmetric
    const DenseVector b = random_vector(30, 200 + s);
    const DenseVector x = solve_direct(CsrMatrix::from_dense(a), b);
    EXPECT_LE((spmv(CsrMatrix::from_dense(a), x) - b).norm() / b.norm(), 1e-10);
  }
}

TEST(SolveDirect, SparsePathAboveThreshold) {
  const std::size_t n = dense_solver_threshold + 500;
  const auto a = tridiagonal(n);
  const DenseVector b = random_vector(n, 9);
  const LuFactorization lu(a);
  EXPECT_TRUE(std::isnan(lu.min_pivot()));
  const DenseVector x = lu.solve(b);
  EXPECT_LE((spmv(a, x) - b).norm() / b.norm(), 1e-10);
  EXPECT_LE((x - thomas(b)).norm() / x.norm(), 1e-8);
}

TEST(SolveDirect, SingularMatrixReportsPivot) {
  const auto a = CsrMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 2}, {1, 0, 2}, {1, 1, 4}});
  try {
    solve_direct(a, DenseVector::Ones(2));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("pivot magnitude"), std::string::npos);
  }
}

TEST(SolveDirect, ZeroRightHandSide) {
  EXPECT_EQ(solve_direct(two_by_two(), DenseVector::Zero(2)), DenseVector::Zero(2));
}

TEST(Eig, Examples) {
  const auto m = CsrMatrix::from_dense(random_spd(6, 5));
  EXPECT_NEAR(eig_min_generalized(m, m).value, 1.0, 1e-12);
  DenseVector d(3);
  d << 1, 2, 3;
  EXPECT_NEAR(eig_min_generalized(CsrMatrix::diagonal(d), CsrMatrix::identity(3)).value, 1.0, 1e-14);
}

TEST(Eig, TridiagonalClosedForm) {
  const auto a = tridiagonal(10);
  const auto pair = eig_min_generalized(a, CsrMatrix::identity(10));
  const double closed = 2.0 - 2.0 * std::cos(std::numbers::pi / 11.0);
  EXPECT_NEAR(closed, 0.0810140527, 1e-9);
  EXPECT_NEAR(pair.value, closed, 1e-12);
  // inverse power iteration with the Thomas solver
  DenseVector v = DenseVector::Ones(10);
  double mu = 0.0;
  for (int k = 0; k < 200; ++k) {
    DenseVector w = thomas(v);
    mu = v.dot(w) / v.dot(v);
    v = w / w.norm();
  }
  EXPECT_NEAR(1.0 / mu, closed, 1e-12);
  const DenseVector res = spmv(a, pair.vector) - pair.value * pair.vector;
  EXPECT_LE(res.norm(), 1e-8 * a.max_abs());
}

TEST(Eig, RejectsBadInput) {
  const auto nonsym = CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}});
  EXPECT_THROW(eig_min_generalized(nonsym, CsrMatrix::identity(2)), std::invalid_argument);
  DenseVector d(2);
  d << 1, -1;
  EXPECT_THROW(eig_min_generalized(CsrMatrix::identity(2), CsrMatrix::diagonal(d)), std::invalid_argument);
}

TEST(Coordinates, Dump) {
  std::ostringstream os;
  write_coordinates(os, two_by_two());
  EXPECT_EQ(os.str(), "# 2 2 4\n0 0 2\n0 1 1\n1 0 1\n1 1 2\n");
}
