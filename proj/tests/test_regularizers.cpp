#include "rerm/regularizer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "rerm/rng.hpp"

using namespace rerm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Eigen::VectorXd random_vec(rng::Stream& st, int d, double scale = 1.0) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = scale * st.normal();
  return v;
}

// +-e_i atoms plus one extra symmetric pair, d = 6.
Regularizer atomic_d6() {
  Eigen::MatrixXd atoms = Eigen::MatrixXd::Zero(6, 14);
  for (int i = 0; i < 6; ++i) {
    atoms(i, 2 * i) = 1.0;
    atoms(i, 2 * i + 1) = -1.0;
  }
  Eigen::VectorXd extra = vec({0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  atoms.col(12) = extra;
  atoms.col(13) = -extra;
  return Regularizer::atomic(atoms, Shape::vector(6));
}

// The whole catalog at ambient dimension 6 (matrix kinds use 2 x 3).
std::vector<Regularizer> catalog() {
  std::vector<Regularizer> regs;
  regs.push_back(Regularizer::l1());
  regs.push_back(Regularizer::lp(1.5));
  regs.push_back(Regularizer::lp(3.0));
  regs.push_back(Regularizer::lp(kInf));
  regs.push_back(Regularizer::weak_lp(0.7, std::pow(2.0, 1.0 / 0.7)));
  regs.push_back(Regularizer::slope(slope_weights_bhq(6, 0.2)));
  regs.push_back(Regularizer::mmp_orthant());
  regs.push_back(Regularizer::mmp_groups({{0, 1, 2}, {3, 4}, {5}}, 6));
  regs.push_back(Regularizer::schatten(1.0, Shape::matrix(2, 3)));
  regs.push_back(Regularizer::schatten(2.5, Shape::matrix(2, 3)));
  regs.push_back(Regularizer::max_norm(Shape::matrix(2, 3)));
  regs.push_back(atomic_d6());
  return regs;
}

double slope_psi(const Eigen::VectorXd& w, Eigen::VectorXd t) {
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = std::abs(t(i));
  std::sort(t.data(), t.data() + t.size(), std::greater<double>());
  return w.dot(t);
}

}  // namespace

// --- value examples --------------------------------------------------------------

TEST(Psi, Examples) {
  EXPECT_DOUBLE_EQ(psi_value(Regularizer::l1(), vec({1, -2, 3})), 6.0);
  EXPECT_NEAR(psi_value(Regularizer::slope(vec({2, 1})), vec({1, 3})), 7.0, 1e-12);
  const auto groups = Regularizer::mmp_groups({{0, 1}, {2}}, 3);
  EXPECT_NEAR(psi_value(groups, vec({3, 4, 5})), std::sqrt(2.0) * 5.0 + 5.0, 1e-12);
  EXPECT_DOUBLE_EQ(psi_value(Regularizer::lp(kInf), vec({1, -4, 2})), 4.0);
  // weak-l1 of (2,1): max(1*2, 2*1) = 2
  EXPECT_DOUBLE_EQ(psi_value(Regularizer::weak_lp(1.0, 2.0), vec({2, 1})), 2.0);
}

TEST(Psi, SpectralReductions) {
  rng::Stream st(3);
  // schatten p = 2 is the Frobenius norm of the entries
  const auto s2 = Regularizer::schatten(2.0, Shape::matrix(3, 3));
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd t = random_vec(st, 9);
    EXPECT_NEAR(psi_value(s2, t), t.norm(), 1e-10);
  }
  // schatten on diagonal matrices reduces to lp of the diagonal
  for (double p : {1.0, 1.7, 3.0}) {
    const auto sp = Regularizer::schatten(p, Shape::matrix(3, 3));
    const Eigen::VectorXd diag = vec({2.0, -1.0, 0.5});
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 3);
    M.diagonal() = diag;
    EXPECT_NEAR(psi_value(sp, to_vector(M)), psi_value(Regularizer::lp(p), diag), 1e-10);
  }
}

TEST(Psi, MaxNormGauge) {
  // A sign matrix has gauge exactly 1; so does the 2x2 identity
  // (I = (J + D)/2 for two sign matrices J, D).
  const auto mn = Regularizer::max_norm(Shape::matrix(2, 2));
  Eigen::MatrixXd sign(2, 2);
  sign << 1, -1, 1, -1;
  EXPECT_NEAR(psi_value(mn, to_vector(sign)), 1.0, 1e-9);
  EXPECT_NEAR(psi_value(mn, to_vector(Eigen::MatrixXd::Identity(2, 2))), 1.0, 1e-9);
  EXPECT_THROW(psi_value(Regularizer::max_norm(Shape::matrix(10, 10)),
                         Eigen::VectorXd::Zero(100).eval()),
               unsupported_capability);
}

TEST(Psi, AtomicIsL1ForSignedBasis) {
  Eigen::MatrixXd atoms = Eigen::MatrixXd::Zero(4, 8);
  for (int i = 0; i < 4; ++i) {
    atoms(i, 2 * i) = 1.0;
    atoms(i, 2 * i + 1) = -1.0;
  }
  const auto reg = Regularizer::atomic(atoms, Shape::vector(4));
  rng::Stream st(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd t = random_vec(st, 4);
    EXPECT_NEAR(psi_value(reg, t), t.cwiseAbs().sum(), 1e-9);
    EXPECT_NEAR(dual_norm(reg, t), t.cwiseAbs().maxCoeff(), 1e-12);
  }
  Eigen::MatrixXd asym(2, 1);
  asym << 1, 0;
  EXPECT_THROW(Regularizer::atomic(asym, Shape::vector(2)), std::invalid_argument);
}

// --- axioms ------------------------------------------------------------------------

TEST(Psi, RegularizationAxioms) {
  rng::Stream st(42);
  for (const auto& reg : catalog()) {
    EXPECT_DOUBLE_EQ(psi_value(reg, Eigen::VectorXd::Zero(6).eval()), 0.0) << reg.name();
    for (int rep = 0; rep < 40; ++rep) {
      const Eigen::VectorXd s = random_vec(st, 6);
      const Eigen::VectorXd t = random_vec(st, 6);
      const double ps = psi_value(reg, s), pt = psi_value(reg, t);
      EXPECT_NEAR(psi_value(reg, Eigen::VectorXd(-t)), pt, 1e-9 * (1.0 + pt)) << reg.name();
      for (double alpha : {0.0, 0.25, 0.6, 1.0})
        EXPECT_LE(psi_value(reg, Eigen::VectorXd(alpha * t)), alpha * pt + 1e-9) << reg.name();
      EXPECT_LE(psi_value(reg, Eigen::VectorXd(s + t)), reg.eta * (ps + pt) + 1e-8)
          << reg.name();
    }
  }
}

TEST(Psi, WeakLpBelowLp) {
  rng::Stream st(11);
  for (double p : {0.4, 0.7, 1.0}) {
    const auto wl = Regularizer::weak_lp(p, std::pow(2.0, 1.0 / p));
    for (int rep = 0; rep < 50; ++rep) {
      const Eigen::VectorXd t = random_vec(st, 8);
      double lpp = 0.0;  // quasi-norm ||t||_p for p <= 1, direct sum
      for (int i = 0; i < 8; ++i) lpp += std::pow(std::abs(t(i)), p);
      lpp = std::pow(lpp, 1.0 / p);
      EXPECT_LE(psi_value(wl, t), lpp + 1e-10);
    }
  }
}

// --- dual norms ----------------------------------------------------------------------

TEST(Dual, Examples) {
  EXPECT_DOUBLE_EQ(dual_norm(Regularizer::l1(), vec({1, -4, 2})), 4.0);
  EXPECT_DOUBLE_EQ(dual_norm(Regularizer::mmp_orthant(), vec({1, -4, 2})), 4.0);
  EXPECT_NEAR(dual_norm(Regularizer::slope(vec({2, 1})), vec({3, 3})), 2.0, 1e-12);
  EXPECT_THROW(dual_norm(Regularizer::weak_lp(0.5, 4.0), vec({1, 2})), unsupported_capability);
}

TEST(Dual, SlopeBruteForceGrid) {
  // Maximize <g,t> over a dense direction grid scaled to the SLOPE unit
  // sphere; the dual value must dominate every grid point and be attained.
  const auto reg = Regularizer::slope(vec({2, 1}));
  const Eigen::VectorXd g = vec({3, 3});
  const double dual = dual_norm(reg, g);
  double best = 0.0;
  const int steps = 2000;
  for (int k = 0; k < steps; ++k) {
    const double angle = 2.0 * M_PI * k / steps;
    Eigen::VectorXd dir = vec({std::cos(angle), std::sin(angle)});
    const double psi = psi_value(reg, dir);
    best = std::max(best, g.dot(dir) / psi);
  }
  EXPECT_NEAR(dual, best, 1e-5);
  EXPECT_GE(dual + 1e-12, best);
}

TEST(Dual, HoelderInequalityAndAttainment) {
  rng::Stream st(17);
  for (const auto& reg : catalog()) {
    if (reg.kind == RegKind::weak_lp) continue;
    for (int rep = 0; rep < 25; ++rep) {
      const Eigen::VectorXd g = random_vec(st, 6);
      const Eigen::VectorXd t = random_vec(st, 6);
      const double dual = dual_norm(reg, g);
      EXPECT_LE(g.dot(t), psi_value(reg, t) * dual + 1e-8) << reg.name();
      // duality attainment through the LMO
      const Eigen::VectorXd v = lmo(reg, g, 1.0);
      EXPECT_NEAR(g.dot(v), dual, 1e-10 * (1.0 + std::abs(dual))) << reg.name();
    }
  }
}

// --- prox ----------------------------------------------------------------------------

TEST(Prox, L1Example) {
  const Eigen::VectorXd x = prox(Regularizer::l1(), vec({3, -1, 0.5}), 1.0);
  EXPECT_TRUE(x.isApprox(vec({2, 0, 0}), 1e-14));

  // per-coordinate golden-section oracle for min 0.5 (x-v)^2 + tau |x|
  rng::Stream st(23);
  for (int rep = 0; rep < 30; ++rep) {
    const double v = 3.0 * st.normal();
    const double tau = 0.1 + std::abs(st.normal());
    auto obj = [&](double z) { return 0.5 * (z - v) * (z - v) + tau * std::abs(z); };
    double lo = -10.0, hi = 10.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    for (int it = 0; it < 200; ++it) {
      if (obj(a) < obj(b)) {
        hi = b;
        b = a;
        a = hi - gr * (hi - lo);
      } else {
        lo = a;
        a = b;
        b = lo + gr * (hi - lo);
      }
    }
    Eigen::VectorXd vv(1);
    vv << v;
    EXPECT_NEAR(prox(Regularizer::l1(), vv, tau)(0), 0.5 * (lo + hi), 1e-6);
  }
}

TEST(Prox, ZeroFixedPoint) {
  for (const auto& reg : catalog()) {
    if (!reg.caps.has_prox) continue;
    const Eigen::VectorXd x = prox(reg, Eigen::VectorXd::Zero(6).eval(), 0.7);
    EXPECT_NEAR(x.norm(), 0.0, 1e-12) << reg.name();
  }
}

namespace {

// Exact combinatorial oracle for the SLOPE prox at small d: the minimizer is
// block-constant on the sorted magnitudes, so enumerate every consecutive
// block partition, clamp block averages at zero, keep the best objective.
Eigen::VectorXd slope_prox_bruteforce(const Eigen::VectorXd& w, const Eigen::VectorXd& v,
                                      double tau) {
  const int d = static_cast<int>(v.size());
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(v(a)) > std::abs(v(b)); });
  Eigen::VectorXd mag(d);
  for (int i = 0; i < d; ++i) mag(i) = std::abs(v(order[i]));

  double best_obj = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(d);
  for (int mask = 0; mask < (1 << (d - 1)); ++mask) {
    Eigen::VectorXd x(d);
    int start = 0;
    for (int i = 0; i < d; ++i) {
      const bool boundary = (i == d - 1) || (mask & (1 << i));
      if (!boundary) continue;
      double s = 0.0;
      for (int j = start; j <= i; ++j) s += mag(j) - tau * w(j);
      const double val = std::max(s / (i - start + 1), 0.0);
      for (int j = start; j <= i; ++j) x(j) = val;
      start = i + 1;
    }
    const double obj = 0.5 * (x - mag).squaredNorm() + tau * slope_psi(w, x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i)
    out(order[i]) = best(i) * (v(order[i]) >= 0.0 ? 1.0 : -1.0);
  return out;
}

}  // namespace

TEST(Prox, SlopeExampleAndBruteForce) {
  const auto reg = Regularizer::slope(vec({2, 1}));
  EXPECT_TRUE(prox(reg, vec({5, 4}), 1.0).isApprox(vec({3, 3}), 1e-12));

  rng::Stream st(31);
  for (int d : {2, 3, 4, 5}) {
    Eigen::VectorXd w(d);
    for (int i = 0; i < d; ++i) w(i) = 2.0 - 1.5 * i / std::max(1, d - 1);
    const auto r = Regularizer::slope(w);
    for (int rep = 0; rep < 40; ++rep) {
      const Eigen::VectorXd v = random_vec(st, d, 2.0);
      const double tau = 0.2 + std::abs(st.normal());
      const Eigen::VectorXd fast = prox(r, v, tau);
      const Eigen::VectorXd slow = slope_prox_bruteforce(w, v, tau);
      EXPECT_LE((fast - slow).lpNorm<Eigen::Infinity>(), 1e-6)
          << "d=" << d << " v=" << v.transpose();
    }
  }
}

TEST(Prox, SubgradientCertificate) {
  // Psi(z) >= Psi(x) + <(v - x)/tau, z - x> for the prox output x.
  rng::Stream st(5);
  for (const auto& reg : catalog()) {
    if (!reg.caps.has_prox) continue;
    for (int rep = 0; rep < 60; ++rep) {
      const Eigen::VectorXd v = random_vec(st, 6, 2.0);
      const double tau = 0.1 + std::abs(st.normal());
      const Eigen::VectorXd x = prox(reg, v, tau);
      const Eigen::VectorXd sub = (v - x) / tau;
      for (int zrep = 0; zrep < 5; ++zrep) {
        const Eigen::VectorXd z = random_vec(st, 6, 2.0);
        EXPECT_GE(psi_value(reg, z) - psi_value(reg, x) - sub.dot(z - x), -1e-8)
            << reg.name();
      }
    }
  }
}

TEST(Prox, MoreauIdentityL1Independent) {
  // For l1 the dual-ball projection is a clamp, an independent code path.
  rng::Stream st(13);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::VectorXd v = random_vec(st, 7, 3.0);
    const double tau = 0.2 + std::abs(st.normal());
    const Eigen::VectorXd x = prox(Regularizer::l1(), v, tau);
    const Eigen::VectorXd proj = (v / tau).cwiseMax(-1.0).cwiseMin(1.0);
    EXPECT_LE((x + tau * proj - v).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(Prox, MoreauVariationalCharacterization) {
  // u = (v - prox)/tau must be the Euclidean projection of v/tau onto the
  // dual unit ball: dual feasible, and <v/tau - u, w - u> <= 0 for every
  // dual-feasible w.
  rng::Stream st(29);
  for (const auto& reg : catalog()) {
    if (!reg.caps.has_prox) continue;
    for (int rep = 0; rep < 25; ++rep) {
      const Eigen::VectorXd v = random_vec(st, 6, 2.0);
      const double tau = 0.2 + std::abs(st.normal());
      const Eigen::VectorXd u = (v - prox(reg, v, tau)) / tau;
      EXPECT_LE(dual_norm(reg, u), 1.0 + 1e-8) << reg.name();
      for (int wrep = 0; wrep < 20; ++wrep) {
        Eigen::VectorXd w = random_vec(st, 6, 1.5);
        const double dn = dual_norm(reg, w);
        if (dn > 1.0) w /= dn;
        EXPECT_LE((v / tau - u).dot(w - u), 1e-8) << reg.name();
      }
    }
  }
}

TEST(Prox, UnsupportedKinds) {
  EXPECT_THROW(prox(Regularizer::weak_lp(0.5, 4.0), vec({1, 2}), 1.0), unsupported_capability);
  EXPECT_THROW(prox(Regularizer::max_norm(Shape::matrix(2, 2)),
                    Eigen::VectorXd::Ones(4).eval(), 1.0),
               unsupported_capability);
}

// --- LMO -----------------------------------------------------------------------------

TEST(Lmo, L1Vertex) {
  EXPECT_TRUE(lmo(Regularizer::l1(), vec({1, -4, 2}), 2.0).isApprox(vec({0, -2, 0}), 1e-14));
  // lowest index wins on ties
  EXPECT_TRUE(lmo(Regularizer::l1(), vec({3, 3, -3}), 1.0).isApprox(vec({1, 0, 0}), 1e-14));
}

TEST(Lmo, WeakLpProfile) {
  const auto reg = Regularizer::weak_lp(1.0, 2.0);
  const Eigen::VectorXd g = vec({4, 3, 2, 1});
  const Eigen::VectorXd t = lmo(reg, g, 1.0);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(t(j), 1.0 / (j + 1), 1e-14);

  // exchange-argument brute force over all sign/permutation assignments, d=4
  rng::Stream st(37);
  for (double p : {0.5, 1.0}) {
    const auto r = Regularizer::weak_lp(p, std::pow(2.0, 1.0 / p));
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::VectorXd gg = random_vec(st, 4);
      const Eigen::VectorXd fast = lmo(r, gg, 1.0);
      std::vector<int> perm{0, 1, 2, 3};
      double best = -1e300;
      do {
        for (int signs = 0; signs < 16; ++signs) {
          double val = 0.0;
          for (int j = 0; j < 4; ++j) {
            const double mag = std::pow(j + 1.0, -1.0 / p);
            val += gg(perm[j]) * mag * ((signs >> j) & 1 ? -1.0 : 1.0);
          }
          best = std::max(best, val);
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      EXPECT_NEAR(gg.dot(fast), best, 1e-12);
    }
  }
}

TEST(Lmo, MaxNormBruteForce16) {
  const auto reg = Regularizer::max_norm(Shape::matrix(2, 2));
  const Eigen::VectorXd g = to_vector(Eigen::MatrixXd::Identity(2, 2));
  const Eigen::VectorXd t = lmo(reg, g, 1.0);
  EXPECT_NEAR(g.dot(t), 2.0, 1e-12);

  rng::Stream st(41);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd gg = random_vec(st, 4);
    const Eigen::VectorXd fast = lmo(reg, gg, 1.0);
    double best = -1e300;
    for (int us = 0; us < 4; ++us)
      for (int vs = 0; vs < 4; ++vs) {
        Eigen::MatrixXd M(2, 2);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            M(i, j) = ((us >> i) & 1 ? -1.0 : 1.0) * ((vs >> j) & 1 ? -1.0 : 1.0);
        best = std::max(best, gg.dot(to_vector(M)));
      }
    EXPECT_NEAR(gg.dot(fast), best, 1e-12);
  }
  EXPECT_THROW(lmo(Regularizer::max_norm(Shape::matrix(13, 13)),
                   Eigen::VectorXd::Ones(169).eval(), 1.0),
               unsupported_capability);
}

TEST(Lmo, FeasibilityAcrossCatalog) {
  rng::Stream st(43);
  for (const auto& reg : catalog()) {
    for (int rep = 0; rep < 15; ++rep) {
      const Eigen::VectorXd g = random_vec(st, 6);
      const double radius = 0.5 + std::abs(st.normal());
      const Eigen::VectorXd t = lmo(reg, g, radius);
      EXPECT_LE(psi_value(reg, t), radius * (1.0 + 1e-9)) << reg.name();
    }
    EXPECT_NEAR(lmo(reg, random_vec(st, 6), 0.0).norm(), 0.0, 0.0) << reg.name();
  }
}

// --- reductions -----------------------------------------------------------------------

TEST(Reductions, SlopeConstantWeightsIsScaledL1) {
  const double lam = 1.7;
  const auto sl = Regularizer::slope(Eigen::VectorXd::Constant(5, lam));
  const auto l1 = Regularizer::l1();
  rng::Stream st(51);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::VectorXd t = random_vec(st, 5, 2.0);
    EXPECT_NEAR(psi_value(sl, t), lam * psi_value(l1, t), 1e-10);
    EXPECT_NEAR(dual_norm(sl, t), dual_norm(l1, t) / lam, 1e-10);
    const double tau = 0.3 + std::abs(st.normal());
    EXPECT_LE((prox(sl, t, tau) - prox(l1, t, tau * lam)).lpNorm<Eigen::Infinity>(), 1e-10);
  }
}

TEST(Reductions, MmpOrthantIsL1) {
  const auto mmp = Regularizer::mmp_orthant();
  const auto l1 = Regularizer::l1();
  rng::Stream st(53);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::VectorXd t = random_vec(st, 6, 2.0);
    EXPECT_DOUBLE_EQ(psi_value(mmp, t), psi_value(l1, t));
    EXPECT_DOUBLE_EQ(dual_norm(mmp, t), dual_norm(l1, t));
    const double tau = 0.3 + std::abs(st.normal());
    EXPECT_TRUE(prox(mmp, t, tau) == prox(l1, t, tau));
    EXPECT_TRUE(lmo(mmp, t, 2.0) == lmo(l1, t, 2.0));
  }
}

// --- widths and weights ------------------------------------------------------------------

TEST(Width, ClosedForms) {
  const auto s1 = mean_width_formula(Regularizer::schatten(1.0, Shape::matrix(10, 10)),
                                     Shape::matrix(10, 10));
  EXPECT_NEAR(s1.value, 4.47213595499958, 1e-12);  // sqrt(20)
  const auto mn =
      mean_width_formula(Regularizer::max_norm(Shape::matrix(4, 4)), Shape::matrix(4, 4));
  EXPECT_NEAR(mn.value, 11.313708498984761, 1e-12);  // sqrt(16 * 8)
  const auto l1w = mean_width_formula(Regularizer::l1(), Shape::vector(100));
  EXPECT_NEAR(l1w.value, 2.3675240623884037, 1e-12);  // sqrt(log(100 e))
  EXPECT_THROW(mean_width_formula(Regularizer::l1(), Shape::vector(1)), std::invalid_argument);
  const auto wl = mean_width_formula(Regularizer::weak_lp(0.5, 4.0), Shape::vector(16));
  EXPECT_NEAR(wl.value, 3.3302184446307908, 1e-12);  // sqrt(log 16)/(1 - 0.5)
  EXPECT_EQ(l1w.method, WidthEstimate::Method::closed_form);
  const auto at = mean_width_formula(atomic_d6(), Shape::vector(6));
  EXPECT_EQ(at.method, WidthEstimate::Method::monte_carlo);
  EXPECT_GT(at.std_error, 0.0);
}

TEST(Width, LpBranches) {
  // p below the 1 + 1/log d threshold matches the l1 formula; above it uses
  // the conjugate-exponent expression.
  const int d = 100;
  const auto low = mean_width_formula(Regularizer::lp(1.01), Shape::vector(d));
  EXPECT_NEAR(low.value, std::sqrt(std::log(M_E * d)), 1e-12);
  const auto high = mean_width_formula(Regularizer::lp(2.0), Shape::vector(d));
  EXPECT_NEAR(high.value, std::sqrt(2.0) * std::pow(100.0, 0.5), 1e-12);
}

TEST(SlopeWeights, BhqExamples) {
  const Eigen::VectorXd w = slope_weights_bhq(2, 0.1);
  EXPECT_NEAR(w(0), 1.959963984540054, 1e-9);
  EXPECT_NEAR(w(1), 1.6448536269514722, 1e-9);
  EXPECT_NEAR(slope_weights_bhq(1, 0.5)(0), 0.6744897501960817, 1e-9);
  EXPECT_THROW(slope_weights_bhq(4, 1.0), std::invalid_argument);
  EXPECT_THROW(slope_weights_bhq(4, 0.0), std::invalid_argument);
  for (int d : {3, 10, 50})
    for (double q : {0.05, 0.3, 0.9}) {
      const Eigen::VectorXd v = slope_weights_bhq(d, q);
      for (int i = 1; i < d; ++i) EXPECT_LT(v(i), v(i - 1));
      EXPECT_GT(v(d - 1), 0.0);
    }
}

TEST(Projection, LqBallMembers) {
  rng::Stream st(61);
  for (double q : {1.0, 1.3, 2.0, 4.0, kInf}) {
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::VectorXd x = random_vec(st, 7, 3.0);
      const Eigen::VectorXd z = project_lq_ball(x, q, 1.0);
      EXPECT_LE(psi_value(q == kInf ? Regularizer::lp(kInf) : Regularizer::lp(q), z),
                1.0 + 1e-9);
      // projection optimality: <x - z, w - z> <= 0 for feasible w
      for (int wrep = 0; wrep < 10; ++wrep) {
        Eigen::VectorXd w = random_vec(st, 7);
        const double n = q == kInf ? w.cwiseAbs().maxCoeff() : psi_value(Regularizer::lp(q), w);
        if (n > 1.0) w /= n;
        EXPECT_LE((x - z).dot(w - z), 1e-8);
      }
    }
  }
}
