#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rerm/model.hpp"
#include "rerm/regularizer.hpp"

namespace rerm {

struct SolverConfig {
  int max_iter = 5000;
  double rel_tol = 1e-9;      // relative certificate at which we declare convergence
  double bt_shrink = 0.5;     // backtracking step shrink
  double bt_growth = 1.1;     // per-iteration step growth
  bool monotone = true;       // enforce a nonincreasing objective trace
};

enum class SolveStatus { converged, iteration_cap, failed };

struct Solution {
  Eigen::VectorXd t_hat;
  std::vector<double> objective_trace;
  // Per-iteration certificate values aligned with objective_trace (the entry
  // for the starting point is the first computed residual/gap).
  std::vector<double> certificate_trace;
  SolveStatus status = SolveStatus::iteration_cap;
  // Relative optimality certificate: prox-gradient residual (penalized path)
  // or conditional-gradient gap (constrained path), both scaled by the
  // problem's natural magnitude. converged implies certificate <= rel_tol.
  double certificate = 0.0;
  // Set when the penalized problem was solved by an outer radius search over
  // the constrained solver (kinds without a prox); the result is approximate
  // at the level of that scalar search.
  bool outer_search = false;
};

/// Minimize (1/N) sum (Y_i - <X_i,t>)^2 + lambda * Psi(t). Accelerated
/// proximal gradient with backtracking and monotone restart when the penalty
/// has a prox; otherwise an outer golden-section radius search over the
/// constrained solver.
Solution solve_rerm(const ProblemInstance& inst, const Regularizer& reg, double lambda,
                    const SolverConfig& config = {});

/// Minimize (1/N) sum (Y_i - <X_i,t>)^2 over { Psi(t) <= radius } by pairwise
/// Frank-Wolfe with exact line search on the quadratic. Feasibility holds by
/// construction (iterates are convex combinations of LMO vertices).
Solution solve_constrained(const ProblemInstance& inst, const Regularizer& reg, double radius,
                           const SolverConfig& config = {});

/// Penalized objective value at t.
double rerm_objective(const ProblemInstance& inst, const Regularizer& reg, double lambda,
                      const Eigen::VectorXd& t);

}  // namespace rerm
