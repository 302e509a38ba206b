#pragma once

#include <Eigen/Dense>

namespace rerm {

// Gauge (Minkowski functional) of the convex hull of a finite symmetric
// vertex set, evaluated at `point`. Columns of `vertices` are the vertex
// vectors; the set must be closed under negation. Solved exactly as the
// linear program
//
//   min sum(c)  s.t.  vertices * c = point,  c >= 0,
//
// via a two-phase dense simplex with Bland's rule. Throws
// std::invalid_argument when `point` lies outside the span of the vertices
// (gauge is infinite there).
double polytope_gauge(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& point);

}  // namespace rerm
