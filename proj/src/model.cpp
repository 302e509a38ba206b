#include "rerm/model.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "rerm/rng.hpp"
#include "rerm/stats.hpp"

namespace rerm {

// --- DesignSpec -----------------------------------------------------------------

DesignSpec DesignSpec::gaussian(Shape shape) {
  DesignSpec d;
  d.law = DesignLaw::gaussian_isotropic;
  d.shape = shape;
  return d;
}

DesignSpec DesignSpec::rademacher(Shape shape) {
  DesignSpec d;
  d.law = DesignLaw::rademacher;
  d.shape = shape;
  return d;
}

DesignSpec DesignSpec::student_t(Shape shape, double dof) {
  if (!(dof > 2.0))
    throw std::invalid_argument("DesignSpec::student_t: dof must be > 2 (finite variance)");
  DesignSpec d;
  d.law = DesignLaw::student_t;
  d.shape = shape;
  d.dof = dof;
  return d;
}

DesignSpec DesignSpec::with_covariance(Shape shape, Eigen::MatrixXd sigma) {
  const int D = shape.ambient_dim();
  if (sigma.rows() != D || sigma.cols() != D)
    throw std::invalid_argument("DesignSpec::with_covariance: Sigma must be D x D");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("DesignSpec::with_covariance: Sigma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma +
                                  1e-12 * Eigen::MatrixXd::Identity(D, D));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("DesignSpec::with_covariance: Sigma must be PSD");
  DesignSpec d;
  d.law = DesignLaw::explicit_covariance;
  d.shape = shape;
  d.sigma = std::move(sigma);
  return d;
}

Eigen::MatrixXd DesignSpec::covariance() const {
  if (law == DesignLaw::explicit_covariance) return sigma;
  const int D = shape.ambient_dim();
  return Eigen::MatrixXd::Identity(D, D);
}

void DesignSpec::validate() const {
  if (shape.ambient_dim() < 1) throw std::invalid_argument("DesignSpec: empty shape");
  if (law == DesignLaw::student_t && !(dof > 2.0))
    throw std::invalid_argument("DesignSpec: student_t dof must be > 2");
  if (law == DesignLaw::explicit_covariance && sigma.rows() != shape.ambient_dim())
    throw std::invalid_argument("DesignSpec: Sigma dimension mismatch");
}

// --- NoiseSpec ------------------------------------------------------------------

NoiseSpec NoiseSpec::none() {
  NoiseSpec n;
  n.law = NoiseLaw::none;
  n.scale = 0.0;
  return n;
}

NoiseSpec NoiseSpec::gaussian(double scale, double q) {
  NoiseSpec n;
  n.law = NoiseLaw::gaussian;
  n.scale = scale;
  n.q = q;
  n.validate();
  return n;
}

NoiseSpec NoiseSpec::student_t(double scale, double dof, double q) {
  NoiseSpec n;
  n.law = NoiseLaw::student_t;
  n.scale = scale;
  n.dof = dof;
  n.q = q;
  n.validate();
  return n;
}

void NoiseSpec::validate() const {
  if (law == NoiseLaw::none) {
    if (scale != 0.0) throw std::invalid_argument("NoiseSpec: law none requires scale 0");
    return;
  }
  if (!(scale >= 0.0)) throw std::invalid_argument("NoiseSpec: scale must be >= 0");
  if (!(q > 2.0)) throw std::invalid_argument("NoiseSpec: q must be > 2");
  if (law == NoiseLaw::student_t && !(dof > q))
    throw std::invalid_argument(
        "NoiseSpec: student_t requires dof > q, otherwise the assumed L_q moment is infinite");
}

double NoiseSpec::sigma_q() const {
  switch (law) {
    case NoiseLaw::none: return 0.0;
    case NoiseLaw::gaussian:
      return scale * std::pow(stats::gaussian_abs_moment(q), 1.0 / q);
    case NoiseLaw::student_t: {
      // xi = scale * T / sqrt(dof/(dof-2)), so ||xi||_q uses the normalized
      // absolute moment.
      const double norm = std::sqrt(dof / (dof - 2.0));
      return scale / norm * std::pow(stats::student_t_abs_moment(q, dof), 1.0 / q);
    }
  }
  return 0.0;
}

// --- TargetSpec -----------------------------------------------------------------

TargetSpec TargetSpec::sparse(int support, double magnitude) {
  if (support < 1) throw std::invalid_argument("TargetSpec::sparse: support must be >= 1");
  TargetSpec t;
  t.kind = TargetKind::sparse;
  t.support = support;
  t.magnitude = magnitude;
  return t;
}

TargetSpec TargetSpec::dense_spread(double psi_budget) {
  if (!(psi_budget >= 0.0))
    throw std::invalid_argument("TargetSpec::dense_spread: budget must be >= 0");
  TargetSpec t;
  t.kind = TargetKind::dense_spread;
  t.psi_budget = psi_budget;
  return t;
}

TargetSpec TargetSpec::low_rank(int rank, double factor_scale) {
  if (rank < 1) throw std::invalid_argument("TargetSpec::low_rank: rank must be >= 1");
  TargetSpec t;
  t.kind = TargetKind::low_rank;
  t.rank = rank;
  t.factor_scale = factor_scale;
  return t;
}

TargetSpec TargetSpec::misspecified_quadratic(Eigen::VectorXd t0) {
  TargetSpec t;
  t.kind = TargetKind::misspecified_quadratic;
  t.t0 = std::move(t0);
  return t;
}

TargetSpec TargetSpec::explicit_vector(Eigen::VectorXd t) {
  TargetSpec s;
  s.kind = TargetKind::explicit_vector;
  s.t0 = std::move(t);
  return s;
}

Eigen::VectorXd TargetSpec::materialize(const Shape& shape, std::uint64_t seed) const {
  const int D = shape.ambient_dim();
  switch (kind) {
    case TargetKind::sparse: {
      if (support > D)
        throw std::invalid_argument("TargetSpec: sparse support exceeds the dimension");
      Eigen::VectorXd t = Eigen::VectorXd::Zero(D);
      for (int i = 0; i < support; ++i) t(i) = magnitude;
      return t;
    }
    case TargetKind::dense_spread:
      return Eigen::VectorXd::Constant(D, psi_budget / D);
    case TargetKind::low_rank: {
      if (!shape.is_matrix())
        throw std::invalid_argument("TargetSpec: low_rank requires a matrix shape");
      if (rank > std::min(shape.rows, shape.cols))
        throw std::invalid_argument("TargetSpec: rank exceeds min(m,T)");
      rng::Stream stream(rng::derive_seed(seed, 0x7a9, 0));
      Eigen::MatrixXd U(shape.rows, rank), V(shape.cols, rank);
      for (int i = 0; i < shape.rows; ++i)
        for (int k = 0; k < rank; ++k) U(i, k) = stream.normal();
      for (int j = 0; j < shape.cols; ++j)
        for (int k = 0; k < rank; ++k) V(j, k) = stream.normal();
      Eigen::MatrixXd A = factor_scale * (U * V.transpose());
      return to_vector(A);
    }
    case TargetKind::misspecified_quadratic:
    case TargetKind::explicit_vector:
      if (t0.size() != D) throw std::invalid_argument("TargetSpec: t0 dimension mismatch");
      return t0;
  }
  return Eigen::VectorXd::Zero(D);
}

// --- generation -----------------------------------------------------------------

namespace {

void fill_row(Eigen::VectorXd& row, const DesignSpec& design, rng::Stream& stream,
              const Eigen::MatrixXd* chol) {
  const int D = static_cast<int>(row.size());
  switch (design.law) {
    case DesignLaw::gaussian_isotropic:
      for (int j = 0; j < D; ++j) row(j) = stream.normal();
      return;
    case DesignLaw::rademacher:
      for (int j = 0; j < D; ++j) row(j) = stream.rademacher();
      return;
    case DesignLaw::student_t: {
      const double norm = std::sqrt(design.dof / (design.dof - 2.0));
      for (int j = 0; j < D; ++j) row(j) = stream.student_t(design.dof) / norm;
      return;
    }
    case DesignLaw::explicit_covariance: {
      Eigen::VectorXd z(D);
      for (int j = 0; j < D; ++j) z(j) = stream.normal();
      row = *chol * z;
      return;
    }
  }
}

double draw_noise(const NoiseSpec& noise, rng::Stream& stream) {
  switch (noise.law) {
    case NoiseLaw::none: return 0.0;
    case NoiseLaw::gaussian: return noise.scale * stream.normal();
    case NoiseLaw::student_t: {
      const double norm = std::sqrt(noise.dof / (noise.dof - 2.0));
      return noise.scale * stream.student_t(noise.dof) / norm;
    }
  }
  return 0.0;
}

}  // namespace

Eigen::MatrixXd sample_design(const DesignSpec& design, int n, std::uint64_t seed) {
  design.validate();
  if (n < 1) throw std::invalid_argument("sample_design: n must be >= 1");
  const int D = design.shape.ambient_dim();
  Eigen::MatrixXd X(n, D);
  Eigen::MatrixXd chol;
  if (design.law == DesignLaw::explicit_covariance)
    chol = Eigen::LLT<Eigen::MatrixXd>(design.sigma +
                                       1e-12 * Eigen::MatrixXd::Identity(D, D))
               .matrixL();
  rng::Stream stream(rng::derive_seed(seed, 0x0de5160));
  Eigen::VectorXd row(D);
  for (int i = 0; i < n; ++i) {
    fill_row(row, design, stream, &chol);
    X.row(i) = row.transpose();
  }
  return X;
}

ProblemInstance generate_dataset(const DesignSpec& design, const TargetSpec& target,
                                 const NoiseSpec& noise, int N, std::uint64_t seed) {
  design.validate();
  noise.validate();
  if (N < 1) throw std::invalid_argument("generate_dataset: N must be >= 1");
  if (noise.law == NoiseLaw::student_t && !(noise.dof > noise.q))
    throw std::invalid_argument("generate_dataset: noise dof <= q violates the moment assumption");

  ProblemInstance inst;
  inst.design = design;
  inst.target = target;
  inst.noise = noise;
  inst.seed = seed;
  inst.t_star = target.materialize(design.shape, rng::derive_seed(seed, 0x7a26e7));
  inst.X = sample_design(design, N, seed);

  rng::Stream noise_stream(rng::derive_seed(seed, 0x4015e));
  inst.Y.resize(N);
  const bool quadratic = (target.kind == TargetKind::misspecified_quadratic);
  for (int i = 0; i < N; ++i) {
    const double lin = inst.X.row(i).dot(inst.t_star);
    inst.Y(i) = (quadratic ? lin * lin : lin) + draw_noise(noise, noise_stream);
  }
  return inst;
}

double population_error(const Eigen::VectorXd& t_hat, const Eigen::VectorXd& t_star,
                        const DesignSpec& design) {
  if (t_hat.size() != t_star.size())
    throw std::invalid_argument("population_error: dimension mismatch");
  if (t_hat.size() != design.shape.ambient_dim())
    throw std::invalid_argument("population_error: design dimension mismatch");
  const Eigen::VectorXd u = t_hat - t_star;
  if (design.isotropic()) return u.squaredNorm();
  return u.dot(design.sigma * u);
}

}  // namespace rerm
