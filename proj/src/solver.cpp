#include "rerm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rerm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quadratic part f0(t) = (1/N) ||Y - Xt||^2. Uses the Gram matrix when
// N >= D, otherwise works through X directly.
struct Quadratic {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& Y;
  double invN;
  bool use_gram;
  Eigen::MatrixXd XtX;
  Eigen::VectorXd XtY;
  double YtY;

  Quadratic(const Eigen::MatrixXd& X_, const Eigen::VectorXd& Y_)
      : X(X_), Y(Y_), invN(1.0 / static_cast<double>(X_.rows())) {
    use_gram = X.rows() >= X.cols();
    XtY = X.transpose() * Y;
    YtY = Y.squaredNorm();
    if (use_gram) XtX = X.transpose() * X;
  }

  double value(const Eigen::VectorXd& t) const {
    if (use_gram) return invN * (t.dot(XtX * t) - 2.0 * t.dot(XtY) + YtY);
    return invN * (Y - X * t).squaredNorm();
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& t) const {
    if (use_gram) return 2.0 * invN * (XtX * t - XtY);
    return 2.0 * invN * (X.transpose() * (X * t) - XtY);
  }

  // (2/N) ||X d||^2, curvature along a direction.
  double curvature(const Eigen::VectorXd& d) const {
    if (use_gram) return 2.0 * invN * d.dot(XtX * d);
    return 2.0 * invN * (X * d).squaredNorm();
  }

  // Natural magnitude for relative certificates.
  double scale() const { return std::max(1.0, 2.0 * invN * XtY.norm()); }
};

void check_finite(const ProblemInstance& inst) {
  if (!inst.X.allFinite() || !inst.Y.allFinite())
    throw std::invalid_argument("solver: non-finite data");
}

Eigen::VectorXd prox_step(const Regularizer& reg, double lambda, const Eigen::VectorXd& v,
                          double step) {
  if (lambda == 0.0) return v;
  return prox(reg, v, step * lambda);
}

Solution solve_prox_path(const ProblemInstance& inst, const Regularizer& reg, double lambda,
                         const SolverConfig& config) {
  const int D = inst.dim();
  Quadratic f(inst.X, inst.Y);
  const double scale = f.scale();
  const double tol_rel = config.rel_tol;

  auto objective = [&](const Eigen::VectorXd& t) {
    return f.value(t) + (lambda == 0.0 ? 0.0 : lambda * psi_value(reg, t));
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd z = x, z_prev = x;
  double tk = 1.0;
  // Frobenius bound on the Lipschitz constant; backtracking growth relaxes
  // an over-conservative start.
  double L0 = 2.0 * f.invN * inst.X.squaredNorm();
  double step = L0 > 0.0 ? 1.0 / L0 : 1.0;

  Solution sol;
  double obj_x = objective(x);
  sol.objective_trace.push_back(obj_x);
  sol.certificate_trace.push_back(kInf);
  sol.certificate = kInf;

  for (int k = 0; k < config.max_iter; ++k) {
    step *= config.bt_growth;
    const double momentum = (tk - 1.0) / (0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk)));
    Eigen::VectorXd y = z + momentum * (z - z_prev);
    Eigen::VectorXd gy = f.grad(y);
    const double fy = f.value(y);

    Eigen::VectorXd u;
    for (;;) {
      u = prox_step(reg, lambda, y - step * gy, step);
      const Eigen::VectorXd diff = u - y;
      const double quad = fy + gy.dot(diff) + diff.squaredNorm() / (2.0 * step);
      if (f.value(u) <= quad + 1e-12 * std::max(1.0, std::abs(quad))) break;
      step *= config.bt_shrink;
      if (step < 1e-18) break;
    }

    const double residual = (y - u).norm() / step;
    z_prev = z;
    z = u;
    tk = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    // Gradient-based restart keeps the momentum useful on strongly convex
    // stretches.
    if ((y - u).dot(u - z_prev) > 0.0) tk = 1.0;

    const double obj_u = objective(u);
    if (!config.monotone || obj_u <= obj_x) {
      x = u;
      obj_x = obj_u;
    }
    sol.objective_trace.push_back(obj_x);
    sol.certificate = residual / scale;
    sol.certificate_trace.push_back(sol.certificate);
    if (sol.certificate <= tol_rel) {
      sol.status = SolveStatus::converged;
      break;
    }
  }

  // Certificate reported for the returned iterate.
  {
    Eigen::VectorXd gx = f.grad(x);
    Eigen::VectorXd ux = prox_step(reg, lambda, x - step * gx, step);
    sol.certificate = (x - ux).norm() / step / scale;
  }
  sol.status = sol.certificate <= tol_rel ? SolveStatus::converged : SolveStatus::iteration_cap;
  sol.t_hat = std::move(x);
  return sol;
}

Solution solve_constrained_fw(const ProblemInstance& inst, const Regularizer& reg, double radius,
                              const SolverConfig& config) {
  const int D = inst.dim();
  Quadratic f(inst.X, inst.Y);
  const double scale = std::max(1.0, f.value(Eigen::VectorXd::Zero(D)));

  Solution sol;
  if (radius == 0.0) {
    sol.t_hat = Eigen::VectorXd::Zero(D);
    sol.objective_trace.push_back(f.value(sol.t_hat));
    sol.certificate_trace.push_back(0.0);
    sol.certificate = 0.0;
    sol.status = SolveStatus::converged;
    return sol;
  }

  // Pairwise Frank-Wolfe: iterates stay convex combinations of LMO vertices
  // (plus the zero start), so Psi(t) <= radius by construction.
  Eigen::VectorXd t = Eigen::VectorXd::Zero(D);
  std::vector<Eigen::VectorXd> atoms_v{Eigen::VectorXd::Zero(D)};
  std::vector<double> atoms_w{1.0};

  sol.objective_trace.push_back(f.value(t));
  sol.certificate_trace.push_back(kInf);
  sol.certificate = kInf;

  for (int k = 0; k < config.max_iter; ++k) {
    Eigen::VectorXd g = f.grad(t);
    Eigen::VectorXd s = lmo(reg, -g, radius);
    const double gap = (-g).dot(s - t);
    sol.certificate = gap / scale;
    sol.certificate_trace.push_back(sol.certificate);
    if (sol.certificate <= config.rel_tol) {
      sol.status = SolveStatus::converged;
      break;
    }

    // Away atom: the active atom the gradient most wants to leave.
    int away = 0;
    double away_val = -kInf;
    for (int i = 0; i < static_cast<int>(atoms_v.size()); ++i) {
      const double val = g.dot(atoms_v[i]);
      if (val > away_val) {
        away_val = val;
        away = i;
      }
    }

    Eigen::VectorXd d = s - atoms_v[away];
    const double gmax = atoms_w[away];
    const double slope = (-g).dot(d);
    if (slope <= 0.0) {
      // Numerically no pairwise progress left; fall back to the plain FW
      // direction for this step.
      d = s - t;
      const double c = f.curvature(d);
      double gamma = c > 0.0 ? std::min(1.0, gap / c) : 1.0;
      if (gamma <= 0.0) break;
      t += gamma * d;
      for (auto& w : atoms_w) w *= (1.0 - gamma);
      atoms_v.push_back(s);
      atoms_w.push_back(gamma);
    } else {
      const double c = f.curvature(d);
      double gamma = c > 0.0 ? std::min(gmax, slope / c) : gmax;
      t += gamma * d;
      atoms_w[away] -= gamma;
      bool merged = false;
      for (int i = 0; i < static_cast<int>(atoms_v.size()); ++i) {
        if ((atoms_v[i] - s).lpNorm<Eigen::Infinity>() <= 1e-14) {
          atoms_w[i] += gamma;
          merged = true;
          break;
        }
      }
      if (!merged) {
        atoms_v.push_back(s);
        atoms_w.push_back(gamma);
      }
      if (atoms_w[away] <= 1e-15) {
        atoms_v.erase(atoms_v.begin() + away);
        atoms_w.erase(atoms_w.begin() + away);
      }
    }
    sol.objective_trace.push_back(f.value(t));
  }

  if (sol.status != SolveStatus::converged)
    sol.status = sol.certificate <= config.rel_tol ? SolveStatus::converged
                                                   : SolveStatus::iteration_cap;
  sol.t_hat = std::move(t);
  return sol;
}

// Penalized problems for prox-less kinds: scalarize over the constraint
// radius. phi(r) = min_{Psi <= r} f0 + lambda r is convex in r.
Solution solve_outer_search(const ProblemInstance& inst, const Regularizer& reg, double lambda,
                            const SolverConfig& config) {
  SolverConfig inner = config;
  inner.rel_tol = std::max(config.rel_tol * 1e-2, 1e-12);

  auto eval = [&](double r) { return solve_constrained_fw(inst, reg, r, inner); };
  auto phi = [&](const Solution& s, double r) {
    return s.objective_trace.back() + lambda * r;
  };

  // Bracket the minimizer.
  double r_hi = 1.0;
  Solution s0 = eval(0.0);
  double phi0 = phi(s0, 0.0);
  Solution s_hi = eval(r_hi);
  double phi_hi = phi(s_hi, r_hi);
  int doublings = 0;
  while (phi_hi < phi0 && doublings < 60) {
    r_hi *= 2.0;
    s_hi = eval(r_hi);
    phi_hi = phi(s_hi, r_hi);
    ++doublings;
    phi0 = std::min(phi0, phi_hi);
  }

  // Golden-section on [0, r_hi].
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = r_hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  Solution sx1 = eval(x1), sx2 = eval(x2);
  double f1 = phi(sx1, x1), f2 = phi(sx2, x2);
  for (int it = 0; it < 80 && (b - a) > 1e-8 * std::max(1.0, r_hi); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      sx2 = sx1;
      x1 = b - gr * (b - a);
      sx1 = eval(x1);
      f1 = phi(sx1, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      sx1 = sx2;
      x2 = a + gr * (b - a);
      sx2 = eval(x2);
      f2 = phi(sx2, x2);
    }
  }

  Solution best = f1 <= f2 ? std::move(sx1) : std::move(sx2);
  const double r_best = f1 <= f2 ? x1 : x2;
  best.outer_search = true;
  // Trace reported as the penalized objective along the final inner solve
  // (constant shift lambda * r), still nonincreasing.
  for (auto& v : best.objective_trace) v += lambda * r_best;
  return best;
}

}  // namespace

double rerm_objective(const ProblemInstance& inst, const Regularizer& reg, double lambda,
                      const Eigen::VectorXd& t) {
  const double fit = (inst.Y - inst.X * t).squaredNorm() / static_cast<double>(inst.n_samples());
  return fit + (lambda == 0.0 ? 0.0 : lambda * psi_value(reg, t));
}

Solution solve_rerm(const ProblemInstance& inst, const Regularizer& reg, double lambda,
                    const SolverConfig& config) {
  check_finite(inst);
  if (lambda < 0.0) throw std::invalid_argument("solve_rerm: lambda must be >= 0");
  reg.check_dim(inst.dim());
  if (reg.caps.has_prox || lambda == 0.0) return solve_prox_path(inst, reg, lambda, config);
  if (!reg.caps.has_lmo)
    throw unsupported_capability("solve_rerm: regularizer has neither prox nor LMO");
  return solve_outer_search(inst, reg, lambda, config);
}

Solution solve_constrained(const ProblemInstance& inst, const Regularizer& reg, double radius,
                           const SolverConfig& config) {
  check_finite(inst);
  if (radius < 0.0) throw std::invalid_argument("solve_constrained: radius must be >= 0");
  reg.check_dim(inst.dim());
  if (!reg.caps.has_lmo)
    throw unsupported_capability("solve_constrained: regularizer has no LMO");
  return solve_constrained_fw(inst, reg, radius, config);
}

}  // namespace rerm
