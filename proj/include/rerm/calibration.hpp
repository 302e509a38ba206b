#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "rerm/model.hpp"
#include "rerm/regularizer.hpp"

namespace rerm {

// Constants entering the fixed-point and lambda formulas. The factory folds
// every unnamed absolute constant (and the subgaussian bookkeeping factors)
// into c_user:
//   alpha = kappa*eps / c_user
//   beta  = kappa^2*eps / (c_user * sigma_q)   (undefined when sigma_q = 0)
//   gamma = eta^3 * sigma_q                    (lambda = c_user*gamma*width/sqrt N)
//   theta = kappa^2*eps / 16
//   tau   = 3 / (80 eta^3)
struct CalibrationConstants {
  double alpha = 1.0;
  double beta = 1.0;
  bool beta_defined = true;
  double gamma = 1.0;
  double theta = 1.0;
  double tau = 1.0;
  double c_user = 1.0;
  double kappa = 0.5;
  double eps = 0.617;
  double eta = 1.0;
  double sigma_q = 1.0;

  static CalibrationConstants from_assumptions(double kappa, double eps, double eta,
                                               double sigma_q, double c_user = 1.0);
  // kappa = 1/2 and eps = 2*Phi(-1/2), the small-ball pair of the standard
  // Gaussian design at kappa = 1/2.
  static CalibrationConstants defaults(double eta, double sigma_q, double c_user = 1.0);
};

struct SmallBallReport {
  double kappa = 0.0;
  double eps_hat = 0.0;  // min over tested directions of the empirical frequency
  int directions_tested = 0;
  Eigen::VectorXd min_direction;
};

struct MomentGrowthReport {
  double p0 = 0.0;
  Eigen::VectorXd per_coordinate_ratio;  // sup_{2<=p<=p0} ||x_j||_p / (sqrt(p) ||x_j||_2)
  double kappa0_hat = 0.0;               // max over coordinates
  double M = 0.0;                        // max_j ||x_j||_2
  bool reliable = true;                  // N >= 10 * e^{p0}
  bool violated = false;                 // kappa0_hat above the pass threshold
  double threshold = 1.0;
};

struct FixedPointResult {
  double r_squared = 0.0;
  std::string regime;
};

struct LambdaResult {
  double value = 0.0;
  bool noise_free = false;  // sigma_q = 0: any positive lambda works, reported as 0+
  std::string track;        // "subgaussian-width" or "l1-limited-moment"
};

enum class LambdaTrack { subgaussian_width, l1_limited_moment };

/// Monte Carlo Gaussian mean-width of { Psi <= 1 } under isotropy:
/// E Psi*(G) for standard Gaussian G, via the dual norm (or the LMO for
/// weak-lp, whose dual is not in the catalog). Deterministic under seed.
WidthEstimate estimate_mean_width_mc(const Regularizer& reg, const Shape& shape, long samples,
                                     std::uint64_t seed);

/// Same, under a non-isotropic design: uses Sigma^{1/2} G. Refused for laws
/// without a known covariance (all catalog laws have one).
WidthEstimate estimate_mean_width_mc(const Regularizer& reg, const DesignSpec& design,
                                     long samples, std::uint64_t seed);

/// Width of the covariance ellipsoid E = { t : E<X,t>^2 <= 1 }, the sqrt(D)
/// bound (exact order for isotropic designs).
WidthEstimate ellipsoid_width(const Shape& shape);

/// The bound-based fixed point: with Lambda(rho) = rho * width_K / sqrt(N),
///   r^2 = Lambda/beta                      when N >= (width_E/alpha)^2,
///   r^2 = max{ Lambda/beta, Lambda^2/alpha^2 }  otherwise.
/// Noise-free (beta undefined) keeps the quadratic branch only. r(0) = 0.
FixedPointResult fixed_point_r(const Regularizer& reg, const Shape& shape, double rho, int N,
                               const CalibrationConstants& constants,
                               std::optional<WidthEstimate> width_K = std::nullopt,
                               std::optional<WidthEstimate> width_E = std::nullopt);

/// Regularization parameter. Subgaussian-width track:
///   lambda = c_user * gamma * width_K / sqrt(N),  gamma = eta^3 sigma_q.
/// l1 limited-moment track (l1 kind only):
///   lambda = c_user * sigma_q * M * sqrt(log(d) / N).
/// sigma_q = 0 returns 0 with the noise-free flag set.
LambdaResult lambda_rerm(const Regularizer& reg, const Shape& shape, int N, double sigma_q,
                         const CalibrationConstants& constants,
                         LambdaTrack track = LambdaTrack::subgaussian_width, double M = 1.0,
                         std::optional<WidthEstimate> width_K = std::nullopt);

/// Empirical small-ball constant: min over random unit directions t of the
/// frequency of { |<X,t>| >= kappa * ||<X,t>||_{L2} }, the L2 norm taken from
/// the known covariance.
SmallBallReport estimate_small_ball(const DesignSpec& design, double kappa, int directions,
                                    int samples, std::uint64_t seed);

/// Same from an existing sample matrix; L2 norms computed from `sigma` when
/// given, else empirically. Directions with zero empirical variance are
/// excluded (warning on stderr).
SmallBallReport estimate_small_ball(const Eigen::MatrixXd& samples, double kappa, int directions,
                                    std::uint64_t seed, const Eigen::MatrixXd* sigma = nullptr);

/// Per-coordinate moment growth sup_{2<=p<=p0} ||x_j||_p/(sqrt p ||x_j||_2) on
/// a 20-point geometric grid in p. Flags the report unreliable when
/// N < 10 e^{p0} and violated when the max ratio exceeds `threshold`.
MomentGrowthReport moment_growth_diagnostic(const Eigen::MatrixXd& samples, double p0,
                                            double threshold = 1.0);

struct LossDecomposition {
  double PN_Q = 0.0;  // (1/N) sum <X_i, t - t*>^2
  double PN_M = 0.0;  // (1/N) sum xi_i <X_i, t - t*>,  xi_i = Y_i - <X_i, t*>
  double PN_L = 0.0;  // = PN_Q - 2 PN_M (empirical excess loss, exact identity)
};

LossDecomposition excess_loss_decomposition(const ProblemInstance& inst,
                                            const Eigen::VectorXd& t,
                                            const Eigen::VectorXd& t_star);

// Everything the pipeline computes to pick lambda and predict radii. The
// lambda_0 of the general theory (a quantile of a supremum process) is
// replaced by its mean-width upper bound gamma * width_K / sqrt(N); that
// substitution is recorded in `note`.
struct CalibrationResult {
  WidthEstimate width_K;
  WidthEstimate width_E;
  LambdaResult lambda;
  CalibrationConstants constants;
  int N = 0;
  std::string note;

  FixedPointResult r_at(const Regularizer& reg, const Shape& shape, double rho) const {
    return fixed_point_r(reg, shape, rho, N, constants, width_K, width_E);
  }
};

CalibrationResult calibrate(const Regularizer& reg, const Shape& shape, int N, double sigma_q,
                            const CalibrationConstants& constants,
                            LambdaTrack track = LambdaTrack::subgaussian_width, double M = 1.0);

}  // namespace rerm
