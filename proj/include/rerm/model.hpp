#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

#include "rerm/shape.hpp"

namespace rerm {

enum class DesignLaw { gaussian_isotropic, rademacher, student_t, explicit_covariance };

// Law of one design row. student_t coordinates are rescaled to unit variance
// so isotropy holds across laws; dof is the sole tail knob.
// explicit_covariance draws Gaussian rows with the given covariance.
struct DesignSpec {
  DesignLaw law = DesignLaw::gaussian_isotropic;
  Shape shape = Shape::vector(1);
  double dof = 0.0;        // student_t, must be > 2
  Eigen::MatrixXd sigma;   // explicit_covariance, D x D PSD

  static DesignSpec gaussian(Shape shape);
  static DesignSpec rademacher(Shape shape);
  static DesignSpec student_t(Shape shape, double dof);
  static DesignSpec with_covariance(Shape shape, Eigen::MatrixXd sigma);

  bool isotropic() const { return law != DesignLaw::explicit_covariance; }
  Eigen::MatrixXd covariance() const;
  void validate() const;
};

enum class NoiseLaw { none, gaussian, student_t };

// Noise xi. scale is the standard deviation (student_t is variance-normalized
// before scaling, mirroring the design convention); q is the assumed moment
// order and sigma_q() computes ||xi||_{L_q} in closed form.
struct NoiseSpec {
  NoiseLaw law = NoiseLaw::none;
  double scale = 0.0;
  double q = 4.0;
  double dof = 0.0;  // student_t, must be > q

  static NoiseSpec none();
  static NoiseSpec gaussian(double scale, double q = 4.0);
  static NoiseSpec student_t(double scale, double dof, double q = 4.0);

  double sigma_q() const;
  void validate() const;
};

enum class TargetKind { sparse, dense_spread, low_rank, misspecified_quadratic, explicit_vector };

struct TargetSpec {
  TargetKind kind = TargetKind::sparse;
  int support = 1;           // sparse: number of nonzeros
  double magnitude = 1.0;    // sparse: entry magnitude
  double psi_budget = 1.0;   // dense_spread: l1 budget, entries = budget / D
  int rank = 1;              // low_rank
  double factor_scale = 1.0; // low_rank: A = scale * U V^T, U,V standard normal
  Eigen::VectorXd t0;        // misspecified_quadratic / explicit_vector

  static TargetSpec sparse(int support, double magnitude);
  static TargetSpec dense_spread(double psi_budget);
  static TargetSpec low_rank(int rank, double factor_scale);
  // Y = <X,t0>^2 + xi; no claim that Y is linear in X. For symmetric designs
  // the best linear predictor is 0, not t0.
  static TargetSpec misspecified_quadratic(Eigen::VectorXd t0);
  static TargetSpec explicit_vector(Eigen::VectorXd t);

  bool linear() const { return kind != TargetKind::misspecified_quadratic; }
  // Ground-truth vector (t0 for the misspecified kind). Deterministic in
  // (shape, seed); only low_rank consumes randomness.
  Eigen::VectorXd materialize(const Shape& shape, std::uint64_t seed) const;
};

struct ProblemInstance {
  Eigen::MatrixXd X;  // N x D, rows are samples (matrix problems row-major flattened)
  Eigen::VectorXd Y;
  DesignSpec design;
  TargetSpec target;
  NoiseSpec noise;
  Eigen::VectorXd t_star;  // materialized target (t0 for misspecified kinds)
  std::uint64_t seed = 0;

  int n_samples() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
};

/// Draws an i.i.d. sample of the design/target/noise triple. Deterministic
/// given seed; for linear targets with no noise, Y_i = <X_i, t*> exactly.
ProblemInstance generate_dataset(const DesignSpec& design, const TargetSpec& target,
                                 const NoiseSpec& noise, int N, std::uint64_t seed);

/// N design rows only (diagnostics).
Eigen::MatrixXd sample_design(const DesignSpec& design, int n, std::uint64_t seed);

/// E <X, t_hat - t_star>^2 under the design law: the exact quadratic form
/// (t_hat - t_star)' Sigma (t_hat - t_star). Equals the squared Euclidean
/// distance for isotropic designs.
double population_error(const Eigen::VectorXd& t_hat, const Eigen::VectorXd& t_star,
                        const DesignSpec& design);

}  // namespace rerm
