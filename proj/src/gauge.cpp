#include "rerm/gauge.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rerm {

namespace {

// Dense tableau simplex, min c'x s.t. Ax = b, x >= 0, with Bland's rule.
// Rows of A are assumed independent only up to phase 1; redundant rows keep
// their artificial at zero in the basis, which is harmless.
struct Simplex {
  Eigen::MatrixXd T;          // m x (n_total + 1), last column is b
  Eigen::RowVectorXd z;       // reduced-cost row, n_total + 1 entries
  std::vector<int> basis;     // basic column per row
  int m, n_total;
  static constexpr double kPivTol = 1e-10;

  Simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int n_extra)
      : m(static_cast<int>(A.rows())), n_total(static_cast<int>(A.cols()) + n_extra) {
    T.resize(m, n_total + 1);
    T.setZero();
    T.leftCols(A.cols()) = A;
    T.col(n_total) = b;
    basis.assign(m, -1);
  }

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int r = 0; r < m; ++r) {
      if (r != row && std::abs(T(r, col)) > 0.0) T.row(r) -= T(r, col) * T.row(row);
    }
    z -= z(col) * T.row(row);
    basis[row] = col;
  }

  // Returns false on unboundedness (cannot happen for the gauge LP).
  bool run() {
    for (;;) {
      int col = -1;
      for (int j = 0; j < n_total; ++j) {
        if (z(j) < -kPivTol) {  // Bland: first improving column
          col = j;
          break;
        }
      }
      if (col < 0) return true;
      int row = -1;
      double best = 0.0;
      for (int r = 0; r < m; ++r) {
        if (T(r, col) > kPivTol) {
          const double ratio = T(r, n_total) / T(r, col);
          if (row < 0 || ratio < best - 1e-15 ||
              (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[row])) {
            row = r;
            best = ratio;
          }
        }
      }
      if (row < 0) return false;
      pivot(row, col);
    }
  }
};

}  // namespace

double polytope_gauge(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& point) {
  const int dim = static_cast<int>(vertices.rows());
  const int n = static_cast<int>(vertices.cols());
  if (point.size() != dim) throw std::invalid_argument("polytope_gauge: dimension mismatch");
  if (n == 0) throw std::invalid_argument("polytope_gauge: empty vertex set");

  const double scale = point.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  // Scaling both sides leaves the coefficients (and the gauge) unchanged;
  // it only normalizes the phase-1 feasibility tolerance.
  Eigen::MatrixXd A = vertices / scale;
  Eigen::VectorXd b = point / scale;
  for (int r = 0; r < dim; ++r) {
    if (b(r) < 0.0) {
      b(r) = -b(r);
      A.row(r) = -A.row(r);
    }
  }

  Simplex sx(A, b, dim);  // extra columns: artificials
  // Phase 1: basis = artificials, objective = sum of artificials.
  for (int r = 0; r < dim; ++r) {
    sx.T(r, n + r) = 1.0;
    sx.basis[r] = n + r;
  }
  sx.z.resize(sx.n_total + 1);
  sx.z.setZero();
  for (int r = 0; r < dim; ++r) sx.z.head(n) -= sx.T.row(r).head(n);
  double phase1_obj = -b.sum();  // z(n_total) tracks -objective
  sx.z(sx.n_total) = phase1_obj;
  if (!sx.run()) throw std::logic_error("polytope_gauge: phase-1 unbounded");
  if (sx.z(sx.n_total) < -1e-7)
    throw std::invalid_argument("polytope_gauge: point outside the span of the vertex set");

  // Phase 2: minimize sum over original columns; artificials pinned at zero
  // by an effectively infinite cost.
  Eigen::RowVectorXd cost(sx.n_total + 1);
  cost.setZero();
  cost.head(n).setConstant(1.0);
  cost.segment(n, dim).setConstant(1e12);
  sx.z = cost;
  for (int r = 0; r < dim; ++r) {
    if (sx.z(sx.basis[r]) != 0.0) sx.z -= sx.z(sx.basis[r]) * sx.T.row(r);
  }
  if (!sx.run()) throw std::logic_error("polytope_gauge: phase-2 unbounded");

  double value = 0.0;
  for (int r = 0; r < dim; ++r) {
    if (sx.basis[r] < n) value += sx.T(r, sx.n_total);
  }
  return value;
}

}  // namespace rerm
