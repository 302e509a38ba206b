#include "rerm/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

#include "rerm/gauge.hpp"
#include "rerm/rng.hpp"
#include "rerm/stats.hpp"

namespace rerm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// |v| sorted descending together with the sorting permutation (stable, so
// ties resolve to the lowest original index).
void sorted_abs_desc(const Eigen::VectorXd& v, Eigen::VectorXd& mag, std::vector<int>& order) {
  const int n = static_cast<int>(v.size());
  order.resize(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(v(a)) > std::abs(v(b)); });
  mag.resize(n);
  for (int i = 0; i < n; ++i) mag(i) = std::abs(v(order[i]));
}

double soft(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double lp_norm(const Eigen::VectorXd& t, double p) {
  if (p == kInf) return t.size() ? t.cwiseAbs().maxCoeff() : 0.0;
  if (p == 1.0) return t.cwiseAbs().sum();
  if (p == 2.0) return t.norm();
  const double scale = t.size() ? t.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) acc += std::pow(std::abs(t(i)) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

double conjugate_exponent(double p) {
  if (p == 1.0) return kInf;
  if (p == kInf) return 1.0;
  return p / (p - 1.0);
}

// --- SLOPE ----------------------------------------------------------------

double slope_value(const Eigen::VectorXd& weights, const Eigen::VectorXd& t) {
  Eigen::VectorXd mag;
  std::vector<int> order;
  sorted_abs_desc(t, mag, order);
  return weights.dot(mag);
}

double slope_dual(const Eigen::VectorXd& weights, const Eigen::VectorXd& g, int* best_k = nullptr) {
  Eigen::VectorXd mag;
  std::vector<int> order;
  sorted_abs_desc(g, mag, order);
  double cg = 0.0, cl = 0.0, best = 0.0;
  int argk = 1;
  for (int k = 0; k < mag.size(); ++k) {
    cg += mag(k);
    cl += weights(k);
    const double val = cg / cl;
    if (val > best + 1e-15) {
      best = val;
      argk = k + 1;
    }
  }
  if (best_k) *best_k = argk;
  return best;
}

// Stack-based pool-adjacent-violators on |v| sorted descending; signs and
// permutation restored afterwards. Exact, O(d log d).
Eigen::VectorXd slope_prox(const Eigen::VectorXd& weights, const Eigen::VectorXd& v, double tau) {
  const int n = static_cast<int>(v.size());
  Eigen::VectorXd mag;
  std::vector<int> order;
  sorted_abs_desc(v, mag, order);

  std::vector<int> blk_lo(n), blk_hi(n);
  std::vector<double> blk_sum(n), blk_avg(n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    blk_lo[k] = i;
    blk_hi[k] = i;
    blk_sum[k] = mag(i) - tau * weights(i);
    blk_avg[k] = blk_sum[k];
    while (k > 0 && blk_avg[k - 1] <= blk_avg[k]) {
      --k;
      blk_hi[k] = i;
      blk_sum[k] += blk_sum[k + 1];
      blk_avg[k] = blk_sum[k] / (i - blk_lo[k] + 1);
    }
    ++k;
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int b = 0; b < k; ++b) {
    const double d = std::max(blk_avg[b], 0.0);
    for (int i = blk_lo[b]; i <= blk_hi[b]; ++i) x(order[i]) = d * sign_of(v(order[i]));
  }
  return x;
}

// --- MMP cone norms ---------------------------------------------------------

double group_value(const std::vector<std::vector<int>>& groups, const Eigen::VectorXd& t) {
  double acc = 0.0;
  for (const auto& g : groups) {
    double sq = 0.0;
    for (int j : g) sq += t(j) * t(j);
    acc += std::sqrt(static_cast<double>(g.size())) * std::sqrt(sq);
  }
  return acc;
}

double group_dual(const std::vector<std::vector<int>>& groups, const Eigen::VectorXd& g,
                  int* best_group = nullptr) {
  double best = 0.0;
  int arg = 0;
  for (int l = 0; l < static_cast<int>(groups.size()); ++l) {
    double sq = 0.0;
    for (int j : groups[l]) sq += g(j) * g(j);
    const double val = std::sqrt(sq / static_cast<double>(groups[l].size()));
    if (val > best + 1e-15) {
      best = val;
      arg = l;
    }
  }
  if (best_group) *best_group = arg;
  return best;
}

// --- max-norm (sign-matrix hull) -------------------------------------------

// max over u in {+-1}^m, v in {+-1}^T of u' G v = max_u ||G'u||_1, enumerating
// the smaller side with a Gray code. u_0 is fixed to +1 (the objective is
// symmetric under global sign flip).
double max_norm_dual_impl(const Eigen::MatrixXd& G, Eigen::VectorXd* out_u,
                          Eigen::VectorXd* out_v) {
  const bool flip = G.rows() > G.cols();
  const Eigen::MatrixXd H = flip ? Eigen::MatrixXd(G.transpose()) : G;
  const int m = static_cast<int>(H.rows());
  Eigen::VectorXd w = H.colwise().sum();
  double best = w.cwiseAbs().sum();
  std::uint64_t best_code = 0;
  const std::uint64_t n_codes = (m >= 1) ? (1ULL << (m - 1)) : 1;
  for (std::uint64_t code = 1; code < n_codes; ++code) {
    const int bit = __builtin_ctzll(code);
    const std::uint64_t gray = code ^ (code >> 1);
    const double s = (gray >> bit) & 1ULL ? -2.0 : 2.0;
    w += s * H.row(bit + 1).transpose();
    const double val = w.cwiseAbs().sum();
    if (val > best + 1e-12) {
      best = val;
      best_code = code;
    }
  }
  if (out_u || out_v) {
    const std::uint64_t gray = best_code ^ (best_code >> 1);
    Eigen::VectorXd u(m);
    u(0) = 1.0;
    for (int i = 1; i < m; ++i) u(i) = (gray >> (i - 1)) & 1ULL ? -1.0 : 1.0;
    Eigen::VectorXd wb = H.transpose() * u;
    Eigen::VectorXd v(wb.size());
    for (Eigen::Index j = 0; j < wb.size(); ++j) v(j) = wb(j) < 0.0 ? -1.0 : 1.0;
    if (flip) {
      if (out_u) *out_u = v;
      if (out_v) *out_v = u;
    } else {
      if (out_u) *out_u = u;
      if (out_v) *out_v = v;
    }
  }
  return best;
}

// All sign-matrix vertices u v^T (u_0 = +1; the other half are the
// negations via -v, so the column set is closed under negation).
Eigen::MatrixXd sign_matrix_vertices(int m, int T) {
  const std::uint64_t nu = 1ULL << (m - 1);
  const std::uint64_t nv = 1ULL << T;
  Eigen::MatrixXd V(m * T, static_cast<Eigen::Index>(nu * nv));
  Eigen::Index col = 0;
  Eigen::VectorXd u(m), v(T);
  for (std::uint64_t a = 0; a < nu; ++a) {
    u(0) = 1.0;
    for (int i = 1; i < m; ++i) u(i) = (a >> (i - 1)) & 1ULL ? -1.0 : 1.0;
    for (std::uint64_t b = 0; b < nv; ++b) {
      for (int j = 0; j < T; ++j) v(j) = (b >> j) & 1ULL ? -1.0 : 1.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < T; ++j) V(i * T + j, col) = u(i) * v(j);
      ++col;
    }
  }
  return V;
}

// --- Schatten ---------------------------------------------------------------

struct Svd {
  Eigen::MatrixXd U, V;
  Eigen::VectorXd s;
};

Svd svd_of(const Eigen::VectorXd& t, const Shape& shape) {
  Eigen::MatrixXd M = to_matrix(t, shape);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

Eigen::VectorXd rebuild(const Svd& f, const Eigen::VectorXd& s, const Shape& shape) {
  Eigen::MatrixXd M = f.U * s.asDiagonal() * f.V.transpose();
  return to_vector(M);
}

// Prox of the vector lp *norm* (not its p-th power), nonnegative inputs stay
// nonnegative (a norm prox is a shrinkage).
Eigen::VectorXd lp_norm_prox(const Eigen::VectorXd& v, double p, double tau);

}  // namespace

// --- projections -------------------------------------------------------------

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& x, double radius) {
  if (radius < 0.0) throw std::invalid_argument("project_l1_ball: radius must be >= 0");
  if (x.cwiseAbs().sum() <= radius) return x;
  Eigen::VectorXd mag;
  std::vector<int> order;
  sorted_abs_desc(x, mag, order);
  double csum = 0.0, theta = 0.0;
  for (int k = 0; k < mag.size(); ++k) {
    csum += mag(k);
    const double cand = (csum - radius) / (k + 1);
    if (k + 1 == mag.size() || mag(k + 1) <= cand) {
      theta = cand;
      break;
    }
  }
  Eigen::VectorXd z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) z(i) = sign_of(x(i)) * std::max(std::abs(x(i)) - theta, 0.0);
  return z;
}

Eigen::VectorXd project_lq_ball(const Eigen::VectorXd& x, double q, double radius) {
  if (radius < 0.0) throw std::invalid_argument("project_lq_ball: radius must be >= 0");
  if (radius == 0.0) return Eigen::VectorXd::Zero(x.size());
  if (q == kInf) return x.cwiseMax(-radius).cwiseMin(radius);
  if (q == 1.0) return project_l1_ball(x, radius);
  if (q == 2.0) {
    const double n = x.norm();
    return n <= radius ? x : Eigen::VectorXd((radius / n) * x);
  }
  if (q < 1.0) throw std::invalid_argument("project_lq_ball: q must be >= 1");

  Eigen::VectorXd a = x.cwiseAbs() / radius;
  if (lp_norm(a, q) <= 1.0) return x;

  // KKT per coordinate: z + mu*q*z^{q-1} = a_j with z in [0, a_j]; the map is
  // increasing in z and ||z(mu)||_q is decreasing in mu. Inner Newton-free
  // bisection, outer bisection on mu to 1e-12 relative.
  auto z_of = [&](double mu, Eigen::VectorXd& z) {
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      const double aj = a(j);
      if (aj == 0.0) {
        z(j) = 0.0;
        continue;
      }
      double lo = 0.0, hi = aj;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = mid + mu * q * std::pow(mid, q - 1.0) - aj;
        (f > 0.0 ? hi : lo) = mid;
        if (hi - lo <= 1e-15 * aj) break;
      }
      z(j) = 0.5 * (lo + hi);
    }
  };

  Eigen::VectorXd z(a.size());
  double mu_lo = 0.0, mu_hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    z_of(mu_hi, z);
    if (lp_norm(z, q) < 1.0) break;
    mu_hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mu = 0.5 * (mu_lo + mu_hi);
    z_of(mu, z);
    (lp_norm(z, q) > 1.0 ? mu_lo : mu_hi) = mu;
    if (mu_hi - mu_lo <= 1e-12 * std::max(1.0, mu_hi)) break;
  }
  z_of(mu_hi, z);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out(j) = sign_of(x(j)) * z(j) * radius;
  return out;
}

namespace {

Eigen::VectorXd lp_norm_prox(const Eigen::VectorXd& v, double p, double tau) {
  if (p == 1.0) {
    Eigen::VectorXd x(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) x(i) = soft(v(i), tau);
    return x;
  }
  if (p == 2.0) {
    const double n = v.norm();
    if (n <= tau) return Eigen::VectorXd::Zero(v.size());
    return (1.0 - tau / n) * v;
  }
  // Moreau: prox_{tau Psi}(v) = v - tau * Proj_{dual ball}(v / tau).
  const double pd = conjugate_exponent(p);
  return v - tau * project_lq_ball(v / tau, pd, 1.0);
}

}  // namespace

// --- factories ---------------------------------------------------------------

Regularizer Regularizer::l1() {
  Regularizer r;
  r.kind = RegKind::l1;
  r.p = 1.0;
  r.caps = {true, true, true};
  return r;
}

Regularizer Regularizer::lp(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("Regularizer::lp: p must be >= 1");
  Regularizer r;
  r.kind = RegKind::lp;
  r.p = p;
  r.caps = {true, true, true};
  return r;
}

Regularizer Regularizer::weak_lp(double p, double eta) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("Regularizer::weak_lp: p must be in (0,1]");
  if (!(eta >= 1.0)) throw std::invalid_argument("Regularizer::weak_lp: eta must be >= 1");
  Regularizer r;
  r.kind = RegKind::weak_lp;
  r.p = p;
  r.eta = eta;
  r.caps = {false, true, true};
  return r;
}

Regularizer Regularizer::slope(Eigen::VectorXd weights) {
  if (weights.size() < 1) throw std::invalid_argument("Regularizer::slope: empty weights");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) > 0.0))
      throw std::invalid_argument("Regularizer::slope: weights must be strictly positive");
    if (i > 0 && weights(i) > weights(i - 1) + 1e-15)
      throw std::invalid_argument("Regularizer::slope: weights must be nonincreasing");
  }
  Regularizer r;
  r.kind = RegKind::slope;
  r.weights = std::move(weights);
  r.caps = {true, true, true};
  return r;
}

Regularizer Regularizer::mmp_orthant() {
  Regularizer r;
  r.kind = RegKind::mmp_cone;
  r.cone = ConeKind::nonneg_orthant;
  r.caps = {true, true, true};
  return r;
}

Regularizer Regularizer::mmp_groups(std::vector<std::vector<int>> groups, int dim) {
  if (dim < 1) throw std::invalid_argument("Regularizer::mmp_groups: dim must be >= 1");
  std::vector<bool> seen(dim, false);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("Regularizer::mmp_groups: empty group");
    for (int j : g) {
      if (j < 0 || j >= dim || seen[j])
        throw std::invalid_argument("Regularizer::mmp_groups: groups must partition 0..dim-1");
      seen[j] = true;
    }
  }
  for (bool s : seen)
    if (!s) throw std::invalid_argument("Regularizer::mmp_groups: groups must cover 0..dim-1");
  Regularizer r;
  r.kind = RegKind::mmp_cone;
  r.cone = ConeKind::group_partition;
  r.groups = std::move(groups);
  r.shape = Shape::vector(dim);
  r.caps = {true, true, true};
  return r;
}

Regularizer Regularizer::schatten(double p, Shape shape) {
  if (!(p >= 1.0)) throw std::invalid_argument("Regularizer::schatten: p must be >= 1");
  if (!shape.is_matrix())
    throw std::invalid_argument("Regularizer::schatten: requires a matrix shape");
  if (shape.rows > 200 || shape.cols > 200)
    throw std::invalid_argument("Regularizer::schatten: desk-scale cap is 200 per side");
  Regularizer r;
  r.kind = RegKind::schatten;
  r.p = p;
  r.shape = shape;
  r.caps = {true, true, true};
  return r;
}

Regularizer Regularizer::max_norm(Shape shape) {
  if (!shape.is_matrix())
    throw std::invalid_argument("Regularizer::max_norm: requires a matrix shape");
  Regularizer r;
  r.kind = RegKind::max_norm;
  r.shape = shape;
  r.caps = {false, true, true};
  return r;
}

Regularizer Regularizer::atomic(Eigen::MatrixXd atoms, Shape shape) {
  if (atoms.cols() < 1) throw std::invalid_argument("Regularizer::atomic: empty atom set");
  if (atoms.rows() != shape.ambient_dim())
    throw std::invalid_argument("Regularizer::atomic: atom dimension mismatch");
  // The gauge is a norm only for a symmetric atom set; require closure under
  // negation.
  for (Eigen::Index i = 0; i < atoms.cols(); ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < atoms.cols() && !found; ++j)
      found = ((atoms.col(i) + atoms.col(j)).lpNorm<Eigen::Infinity>() <= 1e-12);
    if (!found)
      throw std::invalid_argument("Regularizer::atomic: atom set must be closed under negation");
  }
  Regularizer r;
  r.kind = RegKind::atomic;
  r.shape = shape;
  r.atoms = std::move(atoms);
  r.caps = {false, true, false};
  return r;
}

std::string Regularizer::name() const {
  switch (kind) {
    case RegKind::l1: return "l1";
    case RegKind::lp: return "lp(" + std::to_string(p) + ")";
    case RegKind::weak_lp: return "weak-lp(" + std::to_string(p) + ")";
    case RegKind::slope: return "slope";
    case RegKind::mmp_cone:
      return cone == ConeKind::nonneg_orthant ? "mmp-orthant" : "mmp-groups";
    case RegKind::schatten: return "schatten(" + std::to_string(p) + ")";
    case RegKind::max_norm: return "max-norm";
    case RegKind::atomic: return "atomic";
  }
  return "?";
}

int Regularizer::required_dim() const {
  switch (kind) {
    case RegKind::slope: return static_cast<int>(weights.size());
    case RegKind::mmp_cone:
      return cone == ConeKind::group_partition ? shape.ambient_dim() : 0;
    case RegKind::schatten:
    case RegKind::max_norm:
    case RegKind::atomic: return shape.ambient_dim();
    default: return 0;
  }
}

void Regularizer::check_dim(Eigen::Index n) const {
  const int req = required_dim();
  if (req > 0 && n != req)
    throw std::invalid_argument(name() + ": input has dimension " + std::to_string(n) +
                                ", expected " + std::to_string(req));
}

// --- psi ----------------------------------------------------------------------

double psi_value(const Regularizer& reg, const Eigen::VectorXd& t) {
  reg.check_dim(t.size());
  switch (reg.kind) {
    case RegKind::l1: return t.cwiseAbs().sum();
    case RegKind::lp: return lp_norm(t, reg.p);
    case RegKind::weak_lp: {
      Eigen::VectorXd mag;
      std::vector<int> order;
      sorted_abs_desc(t, mag, order);
      double best = 0.0;
      for (int j = 0; j < mag.size(); ++j)
        best = std::max(best, std::pow(j + 1.0, 1.0 / reg.p) * mag(j));
      return best;
    }
    case RegKind::slope: return slope_value(reg.weights, t);
    case RegKind::mmp_cone:
      return reg.cone == ConeKind::nonneg_orthant ? t.cwiseAbs().sum()
                                                  : group_value(reg.groups, t);
    case RegKind::schatten: return lp_norm(svd_of(t, reg.shape).s, reg.p);
    case RegKind::max_norm: {
      const int m = reg.shape.rows, T = reg.shape.cols;
      if (m + T > 16)
        throw unsupported_capability(
            "max-norm psi: gauge LP over 2^(m+T-1) sign-matrix vertices is "
            "limited to m+T <= 16 (requested m+T = " + std::to_string(m + T) + ")");
      return polytope_gauge(sign_matrix_vertices(m, T), t);
    }
    case RegKind::atomic: return polytope_gauge(reg.atoms, t);
  }
  return 0.0;
}

// --- dual norm ------------------------------------------------------------------

double dual_norm(const Regularizer& reg, const Eigen::VectorXd& g) {
  reg.check_dim(g.size());
  switch (reg.kind) {
    case RegKind::l1: return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    case RegKind::lp: return lp_norm(g, conjugate_exponent(reg.p));
    case RegKind::weak_lp:
      throw unsupported_capability("weak-lp: dual norm is not in the catalog");
    case RegKind::slope: return slope_dual(reg.weights, g);
    case RegKind::mmp_cone:
      return reg.cone == ConeKind::nonneg_orthant ? (g.size() ? g.cwiseAbs().maxCoeff() : 0.0)
                                                  : group_dual(reg.groups, g);
    case RegKind::schatten:
      return lp_norm(svd_of(g, reg.shape).s, conjugate_exponent(reg.p));
    case RegKind::max_norm: {
      const int m = reg.shape.rows, T = reg.shape.cols;
      if (m + T > reg.bruteforce_cap)
        throw unsupported_capability(
            "max-norm dual: brute force enumerates 2^(min(m,T)-1) sign patterns; "
            "m+T = " + std::to_string(m + T) + " exceeds the cap " +
            std::to_string(reg.bruteforce_cap));
      return max_norm_dual_impl(to_matrix(g, reg.shape), nullptr, nullptr);
    }
    case RegKind::atomic: {
      double best = -kInf;
      for (Eigen::Index i = 0; i < reg.atoms.cols(); ++i)
        best = std::max(best, g.dot(reg.atoms.col(i)));
      return best;
    }
  }
  return 0.0;
}

// --- prox -----------------------------------------------------------------------

Eigen::VectorXd prox(const Regularizer& reg, const Eigen::VectorXd& v, double tau) {
  reg.check_dim(v.size());
  if (!(tau > 0.0)) throw std::invalid_argument("prox: tau must be > 0");
  switch (reg.kind) {
    case RegKind::l1: {
      Eigen::VectorXd x(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) x(i) = soft(v(i), tau);
      return x;
    }
    case RegKind::lp: return lp_norm_prox(v, reg.p, tau);
    case RegKind::slope: return slope_prox(reg.weights, v, tau);
    case RegKind::mmp_cone: {
      if (reg.cone == ConeKind::nonneg_orthant) {
        Eigen::VectorXd x(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) x(i) = soft(v(i), tau);
        return x;
      }
      Eigen::VectorXd x = Eigen::VectorXd::Zero(v.size());
      for (const auto& grp : reg.groups) {
        double sq = 0.0;
        for (int j : grp) sq += v(j) * v(j);
        const double nrm = std::sqrt(sq);
        const double thr = tau * std::sqrt(static_cast<double>(grp.size()));
        if (nrm > thr) {
          const double scale = 1.0 - thr / nrm;
          for (int j : grp) x(j) = scale * v(j);
        }
      }
      return x;
    }
    case RegKind::schatten: {
      const Svd f = svd_of(v, reg.shape);
      return rebuild(f, lp_norm_prox(f.s, reg.p, tau), reg.shape);
    }
    case RegKind::weak_lp:
    case RegKind::max_norm:
    case RegKind::atomic:
      throw unsupported_capability(reg.name() + ": no prox; use the LMO path");
  }
  return v;
}

// --- LMO ------------------------------------------------------------------------

Eigen::VectorXd lmo(const Regularizer& reg, const Eigen::VectorXd& g, double radius) {
  reg.check_dim(g.size());
  if (radius < 0.0) throw std::invalid_argument("lmo: radius must be >= 0");
  const Eigen::Index n = g.size();
  if (radius == 0.0) return Eigen::VectorXd::Zero(n);
  switch (reg.kind) {
    case RegKind::l1: {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < n; ++i)
        if (std::abs(g(i)) > std::abs(g(best)) + 1e-15) best = i;
      Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
      const double s = sign_of(g(best));
      t(best) = radius * (s == 0.0 ? 1.0 : s);
      return t;
    }
    case RegKind::lp: {
      if (reg.p == 1.0) return lmo(Regularizer::l1(), g, radius);
      if (reg.p == kInf) {
        Eigen::VectorXd t(n);
        for (Eigen::Index i = 0; i < n; ++i) t(i) = radius * sign_of(g(i));
        return t;
      }
      const double pd = conjugate_exponent(reg.p);
      const double nrm = lp_norm(g, pd);
      if (nrm == 0.0) return Eigen::VectorXd::Zero(n);
      Eigen::VectorXd t(n);
      for (Eigen::Index i = 0; i < n; ++i)
        t(i) = radius * sign_of(g(i)) * std::pow(std::abs(g(i)) / nrm, pd - 1.0);
      return t;
    }
    case RegKind::weak_lp: {
      // Exchange argument: the j-th largest |g| gets magnitude radius*j^{-1/p}.
      Eigen::VectorXd mag;
      std::vector<int> order;
      sorted_abs_desc(g, mag, order);
      Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < n; ++j) {
        const double s = sign_of(g(order[j]));
        t(order[j]) = radius * std::pow(j + 1.0, -1.0 / reg.p) * (s == 0.0 ? 1.0 : s);
      }
      return t;
    }
    case RegKind::slope: {
      int k = 1;
      slope_dual(reg.weights, g, &k);
      Eigen::VectorXd mag;
      std::vector<int> order;
      sorted_abs_desc(g, mag, order);
      const double denom = reg.weights.head(k).sum();
      Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < k; ++j) {
        const double s = sign_of(g(order[j]));
        t(order[j]) = radius / denom * (s == 0.0 ? 1.0 : s);
      }
      return t;
    }
    case RegKind::mmp_cone: {
      if (reg.cone == ConeKind::nonneg_orthant) return lmo(Regularizer::l1(), g, radius);
      int l = 0;
      const double val = group_dual(reg.groups, g, &l);
      Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
      if (val == 0.0) return t;
      double sq = 0.0;
      for (int j : reg.groups[l]) sq += g(j) * g(j);
      const double nrm = std::sqrt(sq);
      const double scale = radius / (std::sqrt(static_cast<double>(reg.groups[l].size())) * nrm);
      for (int j : reg.groups[l]) t(j) = scale * g(j);
      return t;
    }
    case RegKind::schatten: {
      const Svd f = svd_of(g, reg.shape);
      Regularizer vec_lp = Regularizer::lp(reg.p);
      return rebuild(f, lmo(vec_lp, f.s, radius), reg.shape);
    }
    case RegKind::max_norm: {
      const int m = reg.shape.rows, T = reg.shape.cols;
      if (m + T > reg.bruteforce_cap)
        throw unsupported_capability(
            "max-norm lmo: brute force enumerates 2^(min(m,T)-1) sign patterns; "
            "m+T = " + std::to_string(m + T) + " exceeds the cap " +
            std::to_string(reg.bruteforce_cap));
      Eigen::VectorXd u, v;
      max_norm_dual_impl(to_matrix(g, reg.shape), &u, &v);
      Eigen::MatrixXd M = radius * (u * v.transpose());
      return to_vector(M);
    }
    case RegKind::atomic: {
      Eigen::Index best = 0;
      double bv = g.dot(reg.atoms.col(0));
      for (Eigen::Index i = 1; i < reg.atoms.cols(); ++i) {
        const double val = g.dot(reg.atoms.col(i));
        if (val > bv + 1e-15) {
          bv = val;
          best = i;
        }
      }
      return radius * reg.atoms.col(best);
    }
  }
  return Eigen::VectorXd::Zero(n);
}

// --- widths ----------------------------------------------------------------------

namespace {

WidthEstimate closed(double value, std::string formula) {
  WidthEstimate w;
  w.value = value;
  w.method = WidthEstimate::Method::closed_form;
  w.formula = std::move(formula);
  return w;
}

void require_d2(int d, const char* who) {
  if (d < 2)
    throw std::invalid_argument(std::string(who) +
                                ": log-width formula needs dimension >= 2");
}

}  // namespace

WidthEstimate mean_width_formula(const Regularizer& reg, const Shape& shape) {
  const int D = shape.ambient_dim();
  reg.check_dim(D);
  switch (reg.kind) {
    case RegKind::l1:
      require_d2(D, "l1 width");
      return closed(std::sqrt(std::log(M_E * D)), "sqrt(log(e d))");
    case RegKind::lp: {
      require_d2(D, "lp width");
      if (reg.p <= 1.0 + 1.0 / std::log(static_cast<double>(D)))
        return closed(std::sqrt(std::log(M_E * D)), "sqrt(log(e d)) [p <= 1+1/log d]");
      const double pd = conjugate_exponent(reg.p);
      return closed(std::sqrt(pd) * std::pow(static_cast<double>(D), 1.0 / pd),
                    "sqrt(p/(p-1)) d^((p-1)/p)");
    }
    case RegKind::weak_lp:
      require_d2(D, "weak-lp width");
      if (reg.p < 1.0)
        return closed(std::sqrt(std::log(static_cast<double>(D))) / (1.0 - reg.p),
                      "sqrt(log d)/(1-p)");
      return closed(std::pow(std::log(static_cast<double>(D)), 1.5), "(log d)^(3/2)");
    case RegKind::slope: {
      double best = 0.0;
      for (int j = 0; j < D; ++j)
        best = std::max(best, std::sqrt(std::log(M_E * D / (j + 1.0))) / reg.weights(j));
      return closed(best, "max_j lambda_j^{-1} sqrt(log(e d / j))");
    }
    case RegKind::mmp_cone: {
      if (reg.cone == ConeKind::nonneg_orthant)
        return closed(1.0 + std::sqrt(2.0 * std::log(static_cast<double>(D))),
                      "1 + sqrt(2 log |Ex|), |Ex| = d");
      double M = 0.0;
      for (const auto& g : reg.groups)
        M = std::max(M, 1.0 / std::sqrt(static_cast<double>(g.size())));
      const double ex = static_cast<double>(reg.groups.size());
      return closed(1.0 + M * std::sqrt(2.0 * std::log(ex)),
                    "1 + M sqrt(2 log |Ex|), |Ex| = #groups");
    }
    case RegKind::schatten: {
      const double mn = std::min(reg.shape.rows, reg.shape.cols);
      return closed(std::pow(mn, 1.0 - 1.0 / reg.p) *
                        std::sqrt(static_cast<double>(reg.shape.rows + reg.shape.cols)),
                    "min(m,T)^(1-1/p) sqrt(m+T)");
    }
    case RegKind::max_norm: {
      const double m = reg.shape.rows, T = reg.shape.cols;
      return closed(std::sqrt(m * T * (m + T)), "sqrt(mT(m+T))");
    }
    case RegKind::atomic: {
      // No closed form: seeded Monte Carlo over the atoms.
      const long samples = 20000;
      rng::Stream stream(0x5EEDBA5EULL);
      double mean = 0.0, m2 = 0.0;
      Eigen::VectorXd G(D);
      for (long i = 0; i < samples; ++i) {
        for (int j = 0; j < D; ++j) G(j) = stream.normal();
        double best = -kInf;
        for (Eigen::Index c = 0; c < reg.atoms.cols(); ++c)
          best = std::max(best, G.dot(reg.atoms.col(c)));
        const double delta = best - mean;
        mean += delta / (i + 1);
        m2 += delta * (best - mean);
      }
      WidthEstimate w;
      w.value = mean;
      w.method = WidthEstimate::Method::monte_carlo;
      w.samples = samples;
      w.std_error = std::sqrt(m2 / (samples - 1.0) / samples);
      w.formula = "monte-carlo E max_a <G,a>";
      return w;
    }
  }
  return closed(0.0, "?");
}

Eigen::VectorXd slope_weights_bhq(int d, double q) {
  if (d < 1) throw std::invalid_argument("slope_weights_bhq: d must be >= 1");
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("slope_weights_bhq: q must be in (0,1)");
  Eigen::VectorXd w(d);
  for (int i = 1; i <= d; ++i) {
    const double tail = i * q / (2.0 * d);
    if (!(tail < 0.5))
      throw std::invalid_argument("slope_weights_bhq: i q/(2d) must stay below 1/2");
    w(i - 1) = stats::normal_quantile(1.0 - tail);
    if (!(w(i - 1) > 0.0)) throw std::invalid_argument("slope_weights_bhq: nonpositive weight");
  }
  return w;
}

}  // namespace rerm
