#ifndef BIOT_LINALG_HPP
#define BIOT_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "errors.hpp"

namespace biot {

using DenseVector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix; column indices are sorted and unique per row.
class CsrMatrix {
 public:
  CsrMatrix() : row_offsets_(1, 0) {}
  CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

  /// Duplicates are summed in input order, so equal triplet lists give
  /// bitwise equal matrices.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets)
      if (t.row >= rows || t.col >= cols) throw std::out_of_range("triplet outside matrix shape");
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(rows, cols);
    for (std::size_t i = 0; i < triplets.size();) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < triplets.size() && triplets[j].row == triplets[i].row && triplets[j].col == triplets[i].col)
        sum += triplets[j++].value;
      m.cols_idx_.push_back(triplets[i].col);
      m.values_.push_back(sum);
      ++m.row_offsets_[triplets[i].row + 1];
      i = j;
    }
    std::partial_sum(m.row_offsets_.begin(), m.row_offsets_.end(), m.row_offsets_.begin());
    return m;
  }

  static CsrMatrix identity(std::size_t n) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  static CsrMatrix diagonal(const DenseVector& d) {
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < d.size(); ++i)
      t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i), d[i]});
    return from_triplets(static_cast<std::size_t>(d.size()), static_cast<std::size_t>(d.size()), std::move(t));
  }

  static CsrMatrix from_dense(const DenseMatrix& a) {
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (a(i, j) != 0.0) t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), a(i, j)});
    return from_triplets(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()), std::move(t));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }
  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return cols_idx_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(std::size_t r, std::size_t c) const {
    const auto first = cols_idx_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
    const auto last = cols_idx_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) t.push_back({r, cols_idx_[k], values_[k]});
    return t;
  }

  CsrMatrix transpose() const {
    auto t = triplets();
    for (auto& x : t) std::swap(x.row, x.col);
    return from_triplets(cols_, rows_, std::move(t));
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  DenseMatrix to_dense() const {
    DenseMatrix a = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_idx_[k])) += values_[k];
    return a;
  }

  Eigen::SparseMatrix<double> to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
        t.emplace_back(static_cast<int>(r), static_cast<int>(cols_idx_[k]), values_[k]);
    Eigen::SparseMatrix<double> s(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    s.setFromTriplets(t.begin(), t.end());
    return s;
  }

  /// max |A - A^T| over all entries.
  double asymmetry() const {
    if (rows_ != cols_) return INFINITY;
    double m = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
        m = std::max(m, std::abs(values_[k] - (*this)(cols_idx_[k], r)));
    return m;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> cols_idx_;
  std::vector<double> values_;
};

inline DenseVector spmv(const CsrMatrix& a, const DenseVector& x) {
  if (static_cast<std::size_t>(x.size()) != a.cols())
    throw std::invalid_argument("spmv: matrix has " + std::to_string(a.cols()) + " columns, vector has " +
                                std::to_string(x.size()) + " entries");
  DenseVector y = DenseVector::Zero(static_cast<Eigen::Index>(a.rows()));
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  const auto& val = a.values();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = off[r]; k < off[r + 1]; ++k) s += val[k] * x[static_cast<Eigen::Index>(col[k])];
    y[static_cast<Eigen::Index>(r)] = s;
  }
  return y;
}

/// Sum of scaled matrices of equal shape.
inline CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double sa = 1.0, double sb = 1.0) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  auto t = a.triplets();
  for (auto& x : t) x.value *= sa;
  for (auto x : b.triplets()) t.push_back({x.row, x.col, sb * x.value});
  return CsrMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

/// One block of a block matrix: a matrix, a scale and whether to transpose.
struct Block {
  std::size_t row = 0, col = 0;
  const CsrMatrix* matrix = nullptr;
  double scale = 1.0;
  bool transposed = false;
};

/// Places blocks into a monolithic matrix with the given block sizes.
inline CsrMatrix assemble_blocks(const std::vector<std::size_t>& row_sizes, const std::vector<std::size_t>& col_sizes,
                                 const std::vector<Block>& blocks) {
  std::vector<std::size_t> roff(row_sizes.size() + 1, 0), coff(col_sizes.size() + 1, 0);
  std::partial_sum(row_sizes.begin(), row_sizes.end(), roff.begin() + 1);
  std::partial_sum(col_sizes.begin(), col_sizes.end(), coff.begin() + 1);
  std::vector<Triplet> t;
  for (const auto& b : blocks) {
    const std::size_t er = b.transposed ? b.matrix->cols() : b.matrix->rows();
    const std::size_t ec = b.transposed ? b.matrix->rows() : b.matrix->cols();
    if (er != row_sizes[b.row] || ec != col_sizes[b.col])
      throw std::invalid_argument("assemble_blocks: block (" + std::to_string(b.row) + "," + std::to_string(b.col) +
                                  ") has wrong shape");
    for (auto x : b.matrix->triplets()) {
      if (b.transposed) std::swap(x.row, x.col);
      t.push_back({roff[b.row] + x.row, coff[b.col] + x.col, b.scale * x.value});
    }
  }
  return CsrMatrix::from_triplets(roff.back(), coff.back(), std::move(t));
}

/// Dimension below which factorizations are dense.
inline constexpr std::size_t dense_solver_threshold = 2000;

/// LU factorization of a square matrix, computed once and reused. Solves are
/// const and may run concurrently.
class LuFactorization {
 public:
  explicit LuFactorization(CsrMatrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw std::invalid_argument("LU: matrix must be square");
    const double amax = a_.max_abs();
    for (std::size_t i = 0; i < a_.rows(); ++i) {
      double row = 0.0;
      for (std::size_t k = a_.row_offsets()[i]; k < a_.row_offsets()[i + 1]; ++k) row += std::abs(a_.values()[k]);
      inf_norm_ = std::max(inf_norm_, row);
    }
    if (a_.rows() < dense_solver_threshold) {
      dense_ = std::make_shared<Eigen::PartialPivLU<DenseMatrix>>(a_.to_dense());
      const auto& lu = dense_->matrixLU();
      min_pivot_ = INFINITY;
      for (Eigen::Index i = 0; i < lu.rows(); ++i) min_pivot_ = std::min(min_pivot_, std::abs(lu(i, i)));
      if (!(min_pivot_ > std::numeric_limits<double>::epsilon() * amax))
      {
        char msg[160];
        std::snprintf(msg, sizeof msg, "matrix is singular to tolerance: pivot magnitude %.3e, max entry %.3e",
                      min_pivot_, amax);
        throw NumericalError(msg);
      }
    } else {
      sparse_ = std::make_shared<SparseLu>();
      const Eigen::SparseMatrix<double> s = a_.to_eigen();
      sparse_->analyzePattern(s);
      sparse_->factorize(s);
      if (sparse_->info() != Eigen::Success)
        throw NumericalError("sparse LU failed: " + sparse_->lastErrorMessage());
    }
  }

  std::size_t size() const { return a_.rows(); }
  const CsrMatrix& matrix() const { return a_; }
  /// Smallest pivot magnitude of the dense path; NaN for the sparse path.
  double min_pivot() const { return min_pivot_; }

  /// Solves A x = b with iterative refinement (residuals accumulated in
  /// extended precision). Accepts when the relative residual meets `rel_tol`,
  /// or when the normwise backward error ||r|| / (||A|| ||x|| + ||b||) is at
  /// most `backward_tol`: for stiff blocks (lambda >> mu) the rounding of x
  /// alone puts ||r|| / ||b|| above 1e-10.
  DenseVector solve(const DenseVector& b, double rel_tol = 1e-10, double backward_tol = 1e-14) const {
    if (static_cast<std::size_t>(b.size()) != size()) throw std::invalid_argument("LU solve: length mismatch");
    DenseVector x = raw_solve(b);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return x;
    double res = INFINITY, backward = INFINITY;
    for (int iter = 0; iter < 4; ++iter) {
      const DenseVector r = residual(b, x);
      res = r.norm() / bnorm;
      if (!std::isfinite(res)) break;
      if (res <= rel_tol) return x;
      backward = r.lpNorm<Eigen::Infinity>() /
                 (inf_norm_ * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
      x += raw_solve(r);
    }
    if (backward <= backward_tol && x.allFinite()) return x;
    char msg[200];
    std::snprintf(msg, sizeof msg, "direct solve relative residual %.3e exceeds %.1e (backward error %.3e)", res,
                  rel_tol, backward);
    throw NumericalError(msg);
  }

  /// b - A x with long double accumulation.
  DenseVector residual(const DenseVector& b, const DenseVector& x) const {
    DenseVector r(b.size());
    const auto& off = a_.row_offsets();
    const auto& col = a_.col_indices();
    const auto& val = a_.values();
    for (std::size_t i = 0; i < a_.rows(); ++i) {
      long double s = b[static_cast<Eigen::Index>(i)];
      for (std::size_t k = off[i]; k < off[i + 1]; ++k)
        s -= static_cast<long double>(val[k]) * x[static_cast<Eigen::Index>(col[k])];
      r[static_cast<Eigen::Index>(i)] = static_cast<double>(s);
    }
    return r;
  }

 private:
  using SparseLu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

  DenseVector raw_solve(const DenseVector& b) const {
    if (dense_) return dense_->solve(b);
    return sparse_->solve(b);
  }

  CsrMatrix a_;
  std::shared_ptr<const Eigen::PartialPivLU<DenseMatrix>> dense_;
  std::shared_ptr<SparseLu> sparse_;
  double min_pivot_ = NAN;
  double inf_norm_ = 0.0;
};

inline DenseVector solve_direct(const CsrMatrix& a, const DenseVector& b) { return LuFactorization(a).solve(b); }

struct EigenPair {
  double value = 0.0;
  DenseVector vector;
};

namespace detail {

inline void require_symmetric(const DenseMatrix& a, const char* name) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(name) + " is not symmetric");
}

}  // namespace detail

/// All eigenpairs of A x = lambda M x, ascending; A and M dense symmetric, M SPD.
inline Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig_generalized(const DenseMatrix& a,
                                                                            const DenseMatrix& m) {
  if (a.rows() != a.cols() || m.rows() != m.cols() || a.rows() != m.rows())
    throw std::invalid_argument("generalized eigenproblem: shape mismatch");
  detail::require_symmetric(a, "A");
  detail::require_symmetric(m, "M");
  Eigen::LLT<DenseMatrix> llt(m);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("M is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(a, m);
  if (es.info() != Eigen::Success) throw NumericalError("generalized eigensolver did not converge");
  return es;
}

/// Smallest eigenpair of A x = lambda M x (densified).
inline EigenPair eig_min_generalized(const CsrMatrix& a, const CsrMatrix& m) {
  const auto es = eig_generalized(a.to_dense(), m.to_dense());
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

/// Coordinate text dump, one `row col value` line per stored entry.
inline void write_coordinates(std::ostream& os, const CsrMatrix& a) {
  os.precision(17);
  os << "# " << a.rows() << " " << a.cols() << " " << a.nonzeros() << "\n";
  for (const auto& t : a.triplets()) os << t.row << " " << t.col << " " << t.value << "\n";
}

}  // namespace biot

#endif  // BIOT_LINALG_HPP
