#pragma once

#include <optional>
#include <string>

#include "rerm/regularizer.hpp"

namespace rerm {

// Theoretical rate value with all unnamed absolute constants set to 1.
// Benchmarks use ratios and exponents against these, never absolute values.
struct RateEstimate {
  double value = 0.0;
  std::string regime;
  std::string formula_id;
  static constexpr const char* convention = "constants normalized to 1";
};

struct RateQuery {
  Regularizer reg;
  Shape shape = Shape::vector(1);
  int N = 1;
  double sigma_q = 0.0;
  double rho = 0.0;               // Psi(t*)
  std::optional<int> s;           // ||t*||_0 for combined rates
  std::optional<double> M;        // max coordinate L2 norm
  std::optional<double> width_K;  // override the formula width
};

/// Minimax rate over the l1 ball of radius rho: rho^2 in the degenerate
/// small-rho band, otherwise max{ s_M^2, s_Q^2 } with the piecewise branches
/// in N and rho (thresholds at constant 1). The N ~ d crossover, where no
/// precise estimate exists, returns the conservative adjacent value and an
/// "imprecise-band" regime note.
RateEstimate minimax_rate_l1(double rho, double sigma, int N, int d);

/// Complexity-dependent rate for any catalog penalty: with
/// Lambda = rho * width_K / sqrt(N),
///   value = sigma_q * Lambda              when N >= width_E^2 (= D),
///   value = max{ sigma_q*Lambda, Lambda^2 } otherwise.
RateEstimate complexity_rate(const RateQuery& query);

/// Combined sparsity/complexity rate
///   min{ s sigma^2 log d / N, max{ sigma rho sqrt(log d / N), rho^2 log d / N } },
/// valid when N >= s log(d/s); otherwise the complexity term alone with a
/// regime note. Flags the deterioration band
/// sigma sqrt(N/log d) <= rho <= sigma sqrt(s).
RateEstimate combined_rate(int s, double rho, double sigma, int N, int d);

}  // namespace rerm
