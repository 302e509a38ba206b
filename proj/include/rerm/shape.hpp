#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace rerm {

// Ambient shape of a linear problem: plain vectors in R^d or m x T matrices
// (flattened row-major everywhere, so one solver code path serves both).
struct Shape {
  enum class Kind { vector, matrix };

  Kind kind = Kind::vector;
  int d = 0;     // vector dimension
  int rows = 0;  // matrix rows (m)
  int cols = 0;  // matrix cols (T)

  static Shape vector(int d) {
    if (d < 1) throw std::invalid_argument("Shape::vector: d must be >= 1");
    Shape s;
    s.kind = Kind::vector;
    s.d = d;
    return s;
  }

  static Shape matrix(int m, int T) {
    if (m < 1 || T < 1) throw std::invalid_argument("Shape::matrix: dims must be >= 1");
    Shape s;
    s.kind = Kind::matrix;
    s.rows = m;
    s.cols = T;
    return s;
  }

  bool is_matrix() const { return kind == Kind::matrix; }

  int ambient_dim() const { return is_matrix() ? rows * cols : d; }

  friend bool operator==(const Shape& a, const Shape& b) {
    if (a.kind != b.kind) return false;
    return a.is_matrix() ? (a.rows == b.rows && a.cols == b.cols) : (a.d == b.d);
  }
};

// Row-major flatten/unflatten helpers shared by the spectral regularizers.
inline Eigen::MatrixXd to_matrix(const Eigen::VectorXd& v, const Shape& shape) {
  if (!shape.is_matrix()) throw std::invalid_argument("to_matrix: vector shape");
  if (v.size() != shape.ambient_dim())
    throw std::invalid_argument("to_matrix: size mismatch");
  Eigen::MatrixXd M(shape.rows, shape.cols);
  for (int i = 0; i < shape.rows; ++i)
    for (int j = 0; j < shape.cols; ++j) M(i, j) = v(i * shape.cols + j);
  return M;
}

inline Eigen::VectorXd to_vector(const Eigen::MatrixXd& M) {
  Eigen::VectorXd v(M.rows() * M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) v(i * M.cols() + j) = M(i, j);
  return v;
}

}  // namespace rerm
