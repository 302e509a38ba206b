#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "rerm/shape.hpp"

namespace rerm {

// Requested operation is not available for this penalty (e.g. prox of the
// max-norm, dual norm of weak-lp).
class unsupported_capability : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class RegKind { l1, lp, weak_lp, slope, mmp_cone, schatten, max_norm, atomic };
enum class ConeKind { nonneg_orthant, group_partition };

struct Capabilities {
  bool has_prox = false;
  bool has_lmo = false;
  bool has_width_formula = false;
};

// Grothendieck constant used when relating the sign-matrix hull gauge to the
// true max-norm in reports.
inline constexpr double k_grothendieck = 1.782;

/// One penalty from the catalog. Value type; build through the factories,
/// which validate parameters and set capability flags.
struct Regularizer {
  RegKind kind = RegKind::l1;
  double p = 1.0;                        // lp / weak_lp / schatten exponent
  double eta = 1.0;                      // quasi-triangle constant
  Eigen::VectorXd weights;               // slope (nonincreasing, positive)
  ConeKind cone = ConeKind::nonneg_orthant;
  std::vector<std::vector<int>> groups;  // mmp group partition, 0-based
  Shape shape = Shape::vector(1);        // spectral / atomic kinds
  Eigen::MatrixXd atoms;                 // atomic: columns, closed under negation
  Capabilities caps;
  int bruteforce_cap = 24;               // max-norm LMO: refuse when m+T exceeds this

  static Regularizer l1();
  // p in [1, inf]; p == std::numeric_limits<double>::infinity() gives the
  // sup-norm ball.
  static Regularizer lp(double p);
  // Quasi-norm max_j j^{1/p} t*_j for p in (0,1]. The quasi-triangle constant
  // is a required input; eta = 2^{1/p} is the usual choice.
  static Regularizer weak_lp(double p, double eta);
  static Regularizer slope(Eigen::VectorXd weights);
  static Regularizer mmp_orthant();
  static Regularizer mmp_groups(std::vector<std::vector<int>> groups, int dim);
  static Regularizer schatten(double p, Shape shape);
  static Regularizer max_norm(Shape shape);
  static Regularizer atomic(Eigen::MatrixXd atoms, Shape shape);

  std::string name() const;
  // Dimension the penalty pins down, or 0 when it applies to any dimension
  // (l1 / lp / weak-lp).
  int required_dim() const;
  void check_dim(Eigen::Index n) const;
};

/// Psi(t). Satisfies: Psi(0) = 0, even, positively homogeneous, and the
/// eta-triangle inequality recorded on the descriptor.
double psi_value(const Regularizer& reg, const Eigen::VectorXd& t);

/// Psi*(g) = sup { <g,t> : Psi(t) <= 1 }. Norm kinds only; weak-lp throws
/// unsupported_capability.
double dual_norm(const Regularizer& reg, const Eigen::VectorXd& g);

/// argmin_x 0.5 ||x - v||^2 + tau * Psi(x). Requires caps.has_prox.
Eigen::VectorXd prox(const Regularizer& reg, const Eigen::VectorXd& v, double tau);

/// A maximizer of <g,t> over { Psi(t) <= radius }. Ties broken by lowest
/// coordinate / atom index. For norm kinds attains radius * Psi*(g).
Eigen::VectorXd lmo(const Regularizer& reg, const Eigen::VectorXd& g, double radius);

struct WidthEstimate {
  enum class Method { closed_form, monte_carlo };
  double value = 0.0;
  Method method = Method::closed_form;
  long samples = 0;      // monte_carlo only
  double std_error = 0.0;
  std::string formula;   // expression the value came from
  static constexpr const char* convention = "constants normalized to 1";
};

/// Closed-form Gaussian mean-width of the unit ball { Psi <= 1 }, with every
/// unnamed absolute constant set to 1 (see WidthEstimate::convention). The
/// atomic kind has no closed form and falls back to a seeded Monte Carlo
/// estimate over its atoms.
WidthEstimate mean_width_formula(const Regularizer& reg, const Shape& shape);

/// Benjamini-Hochberg style SLOPE weights lambda_i = PhiInv(1 - i*q/(2d)),
/// q in (0,1). Strictly decreasing and positive.
Eigen::VectorXd slope_weights_bhq(int d, double q);

// Euclidean projection onto { ||x||_q <= radius }, q in [1, inf]. Scalar
// root-find on the Lagrange multiplier (bisection to 1e-12) for general q.
Eigen::VectorXd project_lq_ball(const Eigen::VectorXd& x, double q, double radius = 1.0);
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& x, double radius = 1.0);

}  // namespace rerm
