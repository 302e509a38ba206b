#include "rerm/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace rerm {

namespace {

double logd(int d) { return std::log(static_cast<double>(d)); }

}  // namespace

RateEstimate minimax_rate_l1(double rho, double sigma, int N, int d) {
  if (rho < 0.0) throw std::invalid_argument("minimax_rate_l1: rho must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("minimax_rate_l1: sigma must be > 0");
  if (N < 1 || d < 2) throw std::invalid_argument("minimax_rate_l1: need N >= 1, d >= 2");

  RateEstimate out;
  const double n = static_cast<double>(N);
  const double ld = logd(d);

  if (rho * rho * n <= sigma * sigma * ld) {
    out.value = rho * rho;
    out.regime = "degenerate-small-rho";
    out.formula_id = "rho^2 (rho <= sigma sqrt(log d / N))";
    return out;
  }

  double sM2;
  std::string m_branch;
  if (rho * rho * n >= sigma * sigma * static_cast<double>(d) * d) {
    sM2 = sigma * sigma * d / n;
    m_branch = "multiplier-dense";
  } else {
    sM2 = rho * sigma * std::sqrt(std::log(M_E * sigma * d / (rho * std::sqrt(n))) / n);
    m_branch = "multiplier-log";
  }

  // Quadratic term; the N ~ d crossover band [d/e, e d] has no precise
  // estimate, return the conservative adjacent value with an explicit label.
  double sQ2;
  std::string q_branch;
  if (n >= M_E * d) {
    sQ2 = 0.0;
    q_branch = "quadratic-vanishing";
  } else if (n > d / M_E) {
    sQ2 = rho * rho / d;
    q_branch = "imprecise-band(N~d)";
  } else {
    sQ2 = rho * rho / n * std::log(static_cast<double>(d) / n);
    q_branch = "quadratic-low-sample";
  }

  if (sM2 >= sQ2) {
    out.value = sM2;
    out.regime = m_branch + (q_branch == "imprecise-band(N~d)" ? "+imprecise-band" : "");
  } else {
    out.value = sQ2;
    out.regime = q_branch;
  }
  out.formula_id = "max{s_M^2, s_Q^2} over the l1 ball";
  return out;
}

RateEstimate complexity_rate(const RateQuery& query) {
  if (query.rho < 0.0) throw std::invalid_argument("complexity_rate: rho must be >= 0");
  if (query.N < 1) throw std::invalid_argument("complexity_rate: N must be >= 1");
  double width;
  std::string wformula;
  if (query.width_K) {
    width = *query.width_K;
    wformula = "supplied width";
  } else {
    const WidthEstimate w = mean_width_formula(query.reg, query.shape);
    width = w.value;
    wformula = w.formula;
  }
  const double n = static_cast<double>(query.N);
  const double Lambda = query.rho * width / std::sqrt(n);
  const double D = static_cast<double>(query.shape.ambient_dim());

  RateEstimate out;
  out.formula_id = query.reg.name() + ": Lambda = rho * [" + wformula + "] / sqrt(N)";
  if (n >= D) {
    out.value = query.sigma_q * Lambda;
    out.regime = "large-N: sigma_q * Lambda";
  } else {
    const double quad = Lambda * Lambda;
    const double lin = query.sigma_q * Lambda;
    out.value = std::max(lin, quad);
    out.regime = quad > lin ? "small-N: Lambda^2" : "small-N: sigma_q * Lambda";
  }
  return out;
}

RateEstimate combined_rate(int s, double rho, double sigma, int N, int d) {
  if (s < 1) throw std::invalid_argument("combined_rate: s must be >= 1");
  if (rho < 0.0) throw std::invalid_argument("combined_rate: rho must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("combined_rate: sigma must be > 0");
  if (N < 1 || d < 2) throw std::invalid_argument("combined_rate: need N >= 1, d >= 2");

  const double n = static_cast<double>(N);
  const double ld = logd(d);
  const double complexity =
      std::max(sigma * rho * std::sqrt(ld / n), rho * rho * ld / n);

  RateEstimate out;
  out.formula_id =
      "min{ s sigma^2 log d / N, max{ sigma rho sqrt(log d / N), rho^2 log d / N } }";

  const bool applicable = n >= s * std::log(static_cast<double>(d) / s);
  if (!applicable) {
    out.value = complexity;
    out.regime = "complexity-only (N < s log(d/s), sparsity term inapplicable)";
    return out;
  }

  const double sparsity = s * sigma * sigma * ld / n;
  if (sparsity <= complexity) {
    out.value = sparsity;
    out.regime = "sparsity-dominated";
  } else {
    out.value = complexity;
    out.regime = "complexity-dominated";
  }
  if (rho >= sigma * std::sqrt(n / ld) && rho <= sigma * std::sqrt(static_cast<double>(s)))
    out.regime += "+deterioration-band";
  return out;
}

}  // namespace rerm
