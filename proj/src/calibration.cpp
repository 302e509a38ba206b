#include "rerm/calibration.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/Cholesky>

#include "rerm/rng.hpp"
#include "rerm/stats.hpp"

namespace rerm {

CalibrationConstants CalibrationConstants::from_assumptions(double kappa, double eps, double eta,
                                                            double sigma_q, double c_user) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw std::invalid_argument("CalibrationConstants: kappa must be in (0,1]");
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("CalibrationConstants: eps must be in (0,1]");
  if (!(eta >= 1.0)) throw std::invalid_argument("CalibrationConstants: eta must be >= 1");
  if (!(sigma_q >= 0.0)) throw std::invalid_argument("CalibrationConstants: sigma_q must be >= 0");
  if (!(c_user > 0.0)) throw std::invalid_argument("CalibrationConstants: c_user must be > 0");
  CalibrationConstants c;
  c.kappa = kappa;
  c.eps = eps;
  c.eta = eta;
  c.sigma_q = sigma_q;
  c.c_user = c_user;
  c.alpha = kappa * eps / c_user;
  c.beta_defined = sigma_q > 0.0;
  c.beta = c.beta_defined ? kappa * kappa * eps / (c_user * sigma_q) : 0.0;
  c.gamma = eta * eta * eta * sigma_q;
  c.theta = kappa * kappa * eps / 16.0;
  c.tau = 3.0 / (80.0 * eta * eta * eta);
  return c;
}

CalibrationConstants CalibrationConstants::defaults(double eta, double sigma_q, double c_user) {
  const double kappa = 0.5;
  const double eps = 2.0 * stats::normal_cdf(-0.5);
  return from_assumptions(kappa, eps, eta, sigma_q, c_user);
}

// --- mean widths ------------------------------------------------------------------

namespace {

WidthEstimate width_mc_impl(const Regularizer& reg, const Shape& shape, long samples,
                            std::uint64_t seed, const Eigen::MatrixXd* chol) {
  if (samples < 2) throw std::invalid_argument("estimate_mean_width_mc: need samples >= 2");
  const int D = shape.ambient_dim();
  reg.check_dim(D);
  const bool use_dual = reg.kind != RegKind::weak_lp;
  rng::Stream stream(rng::derive_seed(seed, 0x31d7));
  double mean = 0.0, m2 = 0.0;
  Eigen::VectorXd G(D), H;
  for (long i = 0; i < samples; ++i) {
    for (int j = 0; j < D; ++j) G(j) = stream.normal();
    const Eigen::VectorXd* gp = &G;
    if (chol) {
      H = (*chol) * G;
      gp = &H;
    }
    // Width of {Psi <= 1}: E Psi*(G); for weak-lp the LMO supplies the sup.
    const double val = use_dual ? dual_norm(reg, *gp) : gp->dot(lmo(reg, *gp, 1.0));
    const double delta = val - mean;
    mean += delta / (i + 1);
    m2 += delta * (val - mean);
  }
  WidthEstimate w;
  w.value = mean;
  w.method = WidthEstimate::Method::monte_carlo;
  w.samples = samples;
  w.std_error = std::sqrt(m2 / (samples - 1.0) / samples);
  w.formula = "monte-carlo E Psi*(G)";
  return w;
}

}  // namespace

WidthEstimate estimate_mean_width_mc(const Regularizer& reg, const Shape& shape, long samples,
                                     std::uint64_t seed) {
  return width_mc_impl(reg, shape, samples, seed, nullptr);
}

WidthEstimate estimate_mean_width_mc(const Regularizer& reg, const DesignSpec& design,
                                     long samples, std::uint64_t seed) {
  if (design.isotropic()) return width_mc_impl(reg, design.shape, samples, seed, nullptr);
  const int D = design.shape.ambient_dim();
  Eigen::MatrixXd chol =
      Eigen::LLT<Eigen::MatrixXd>(design.sigma + 1e-12 * Eigen::MatrixXd::Identity(D, D))
          .matrixL();
  return width_mc_impl(reg, design.shape, samples, seed, &chol);
}

WidthEstimate ellipsoid_width(const Shape& shape) {
  WidthEstimate w;
  w.value = std::sqrt(static_cast<double>(shape.ambient_dim()));
  w.method = WidthEstimate::Method::closed_form;
  w.formula = "sqrt(D) bound on the ellipsoid width";
  return w;
}

// --- fixed point and lambda --------------------------------------------------------

FixedPointResult fixed_point_r(const Regularizer& reg, const Shape& shape, double rho, int N,
                               const CalibrationConstants& constants,
                               std::optional<WidthEstimate> width_K,
                               std::optional<WidthEstimate> width_E) {
  if (rho < 0.0) throw std::invalid_argument("fixed_point_r: rho must be >= 0");
  if (N < 1) throw std::invalid_argument("fixed_point_r: N must be >= 1");
  const WidthEstimate wK = width_K ? *width_K : mean_width_formula(reg, shape);
  const WidthEstimate wE = width_E ? *width_E : ellipsoid_width(shape);

  const double Lambda = rho * wK.value / std::sqrt(static_cast<double>(N));
  FixedPointResult out;
  if (!constants.beta_defined) {
    // Noise-free: the multiplier fixed point vanishes, keep the quadratic
    // branch only.
    out.r_squared = (Lambda * Lambda) / (constants.alpha * constants.alpha);
    out.regime = "quadratic-only (noise-free)";
    return out;
  }
  const double linear = Lambda / constants.beta;
  const double threshold = wE.value / constants.alpha;
  if (static_cast<double>(N) >= threshold * threshold) {
    out.r_squared = linear;
    out.regime = "multiplier-dominated (large-N)";
    return out;
  }
  const double quad = (Lambda * Lambda) / (constants.alpha * constants.alpha);
  if (quad > linear) {
    out.r_squared = quad;
    out.regime = "quadratic-dominated";
  } else {
    out.r_squared = linear;
    out.regime = "multiplier-dominated";
  }
  return out;
}

LambdaResult lambda_rerm(const Regularizer& reg, const Shape& shape, int N, double sigma_q,
                         const CalibrationConstants& constants, LambdaTrack track, double M,
                         std::optional<WidthEstimate> width_K) {
  if (N < 1) throw std::invalid_argument("lambda_rerm: N must be >= 1");
  LambdaResult out;
  if (sigma_q == 0.0) {
    out.value = 0.0;
    out.noise_free = true;
    out.track = "noise-free (any lambda > 0 works; reported as 0+)";
    return out;
  }
  if (track == LambdaTrack::l1_limited_moment) {
    if (reg.kind != RegKind::l1)
      throw std::invalid_argument("lambda_rerm: the limited-moment track is l1-specific");
    const int d = shape.ambient_dim();
    if (d < 2) throw std::invalid_argument("lambda_rerm: limited-moment track needs d >= 2");
    out.value = constants.c_user * sigma_q * M *
                std::sqrt(std::log(static_cast<double>(d)) / static_cast<double>(N));
    out.track = "l1-limited-moment";
    return out;
  }
  const WidthEstimate wK = width_K ? *width_K : mean_width_formula(reg, shape);
  const double gamma = constants.eta * constants.eta * constants.eta * sigma_q;
  out.value = constants.c_user * gamma * wK.value / std::sqrt(static_cast<double>(N));
  out.track = "subgaussian-width";
  return out;
}

// --- small ball --------------------------------------------------------------------

SmallBallReport estimate_small_ball(const Eigen::MatrixXd& samples, double kappa, int directions,
                                    std::uint64_t seed, const Eigen::MatrixXd* sigma) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw std::invalid_argument("estimate_small_ball: kappa must be in (0,1]");
  if (directions < 1) throw std::invalid_argument("estimate_small_ball: directions must be >= 1");
  const int n = static_cast<int>(samples.rows());
  const int D = static_cast<int>(samples.cols());
  if (n < 1000)
    throw std::invalid_argument("estimate_small_ball: need at least 10^3 samples per direction");

  rng::Stream stream(rng::derive_seed(seed, 0xd13));
  SmallBallReport rep;
  rep.kappa = kappa;
  rep.eps_hat = 1.0;
  rep.directions_tested = 0;

  Eigen::VectorXd t(D), proj(n);
  for (int k = 0; k < directions; ++k) {
    for (int j = 0; j < D; ++j) t(j) = stream.normal();
    const double nrm = t.norm();
    if (nrm == 0.0) continue;
    t /= nrm;
    double l2sq;
    if (sigma)
      l2sq = t.dot(*sigma * t);
    else {
      proj = samples * t;
      l2sq = proj.squaredNorm() / n;  // empirical second moment
    }
    if (l2sq <= 0.0) {
      std::cerr << "estimate_small_ball: degenerate direction excluded (zero variance)\n";
      continue;
    }
    if (sigma) proj = samples * t;
    const double thr = kappa * std::sqrt(l2sq);
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(proj(i)) >= thr) ++count;
    const double freq = static_cast<double>(count) / n;
    ++rep.directions_tested;
    if (freq < rep.eps_hat) {
      rep.eps_hat = freq;
      rep.min_direction = t;
    }
  }
  if (rep.directions_tested == 0)
    throw std::invalid_argument("estimate_small_ball: all directions degenerate");
  return rep;
}

SmallBallReport estimate_small_ball(const DesignSpec& design, double kappa, int directions,
                                    int samples, std::uint64_t seed) {
  const Eigen::MatrixXd X = sample_design(design, samples, seed);
  const Eigen::MatrixXd sigma = design.covariance();
  return estimate_small_ball(X, kappa, directions, rng::derive_seed(seed, 0xd12ec), &sigma);
}

// --- moment growth -----------------------------------------------------------------

MomentGrowthReport moment_growth_diagnostic(const Eigen::MatrixXd& samples, double p0,
                                            double threshold) {
  if (!(p0 > 2.0)) throw std::invalid_argument("moment_growth_diagnostic: p0 must be > 2");
  const int n = static_cast<int>(samples.rows());
  const int D = static_cast<int>(samples.cols());
  if (n < 2) throw std::invalid_argument("moment_growth_diagnostic: need samples");

  MomentGrowthReport rep;
  rep.p0 = p0;
  rep.threshold = threshold;
  rep.reliable = static_cast<double>(n) >= 10.0 * std::exp(p0);
  rep.per_coordinate_ratio.resize(D);

  // Geometric grid keeps 20 points between 2 and p0; the ratio is smooth in p.
  const int grid_n = 20;
  std::vector<double> grid(grid_n);
  for (int i = 0; i < grid_n; ++i)
    grid[i] = 2.0 * std::pow(p0 / 2.0, static_cast<double>(i) / (grid_n - 1));

  rep.M = 0.0;
  rep.kappa0_hat = 0.0;
  for (int j = 0; j < D; ++j) {
    const Eigen::VectorXd col = samples.col(j).cwiseAbs();
    const double scale = col.maxCoeff();
    if (scale == 0.0) {
      rep.per_coordinate_ratio(j) = 0.0;
      continue;
    }
    const Eigen::VectorXd a = col / scale;
    const double l2 = scale * std::sqrt(a.squaredNorm() / n);
    rep.M = std::max(rep.M, l2);
    double best = 0.0;
    for (double p : grid) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += std::pow(a(i), p);
      const double lp = scale * std::pow(acc / n, 1.0 / p);
      best = std::max(best, lp / (std::sqrt(p) * l2));
    }
    rep.per_coordinate_ratio(j) = best;
    rep.kappa0_hat = std::max(rep.kappa0_hat, best);
  }
  rep.violated = rep.kappa0_hat > threshold;
  return rep;
}

// --- decomposition -----------------------------------------------------------------

LossDecomposition excess_loss_decomposition(const ProblemInstance& inst, const Eigen::VectorXd& t,
                                            const Eigen::VectorXd& t_star) {
  if (t.size() != inst.dim() || t_star.size() != inst.dim())
    throw std::invalid_argument("excess_loss_decomposition: dimension mismatch");
  const int N = inst.n_samples();
  const Eigen::VectorXd diff_proj = inst.X * (t - t_star);
  const Eigen::VectorXd xi = inst.Y - inst.X * t_star;
  LossDecomposition d;
  d.PN_Q = diff_proj.squaredNorm() / N;
  d.PN_M = xi.dot(diff_proj) / N;
  d.PN_L = d.PN_Q - 2.0 * d.PN_M;
  return d;
}

CalibrationResult calibrate(const Regularizer& reg, const Shape& shape, int N, double sigma_q,
                            const CalibrationConstants& constants, LambdaTrack track, double M) {
  CalibrationResult res;
  res.width_K = mean_width_formula(reg, shape);
  res.width_E = ellipsoid_width(shape);
  res.constants = constants;
  res.N = N;
  res.lambda = lambda_rerm(reg, shape, N, sigma_q, constants, track, M, res.width_K);
  res.note =
      "lambda_0 (quantile of the localized multiplier supremum) replaced by its "
      "mean-width upper bound gamma * width_K / sqrt(N); intersection widths bounded "
      "by min{rho l*(K), r l*(E)}";
  return res;
}

}  // namespace rerm
