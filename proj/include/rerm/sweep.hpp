#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rerm/calibration.hpp"
#include "rerm/model.hpp"
#include "rerm/rates.hpp"
#include "rerm/solver.hpp"

namespace rerm {

// Regularizer recipe that can be instantiated at any sweep dimension.
// kind-specific fields mirror the Regularizer factories; "slope-bhq" builds
// BH-style weights per dimension from q.
struct RegularizerRecipe {
  std::string kind = "l1";  // l1 | lp | weak-lp | slope-bhq | mmp-orthant | schatten | max-norm
  double p = 1.0;
  double eta = 1.0;
  double bhq_q = 0.1;

  Regularizer build(const Shape& shape) const;
};

struct LambdaPolicy {
  enum class Kind { calibrated, fixed, grid };
  Kind kind = Kind::calibrated;
  double value = 0.0;                // fixed
  std::vector<double> values;        // grid: one lambda per N grid value
  double c_user = 1.0;               // calibrated
};

struct SweepConfig {
  std::vector<int> n_values;
  std::vector<int> dim_values;       // vector problems: d; matrix_cells: m = T = dim
  std::vector<double> rho_values;    // target rescaled so Psi(t*) = rho
  int trials_per_cell = 1;
  bool matrix_cells = false;

  RegularizerRecipe regularizer;
  DesignLaw design_law = DesignLaw::gaussian_isotropic;
  double design_dof = 0.0;
  TargetKind target_kind = TargetKind::dense_spread;
  int target_support = 1;
  int target_rank = 1;
  NoiseLaw noise_law = NoiseLaw::gaussian;
  double noise_scale = 1.0;
  double noise_q = 4.0;
  double noise_dof = 0.0;

  LambdaPolicy lambda_policy;
  std::uint64_t master_seed = 0;
  SolverConfig solver;
  int threads = 1;
  std::string stream_csv;  // when set, records stream here in canonical order

  void validate() const;
  int n_cells() const;
};

struct SweepRecord {
  int cell = 0;
  int trial = 0;
  int N = 0;
  int dim = 0;        // ambient dimension D
  double rho = 0.0;
  double lambda = 0.0;
  double error = 0.0;      // population_error(t_hat, t_star)
  double psi_t_star = 0.0;
  double obj_gap = 0.0;    // objective(t_hat) - objective(t_star)
  SolveStatus status = SolveStatus::failed;
  double wall_ms = 0.0;    // excluded from determinism guarantees
};

/// Runs |grid| x trials cells; deterministic under master_seed (cell seeds are
/// derived per (cell, trial)). Solver failures are recorded per-record with
/// status failed, never aborting the sweep. Output is in canonical order
/// (cell, then trial) regardless of thread count.
std::vector<SweepRecord> run_sweep(const SweepConfig& config);

enum class SweepAxis { N, rho };

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  int n_points = 0;
  int n_dropped = 0;  // cells with no usable (positive, finite) median error
};

/// OLS on (log x, log median cell error) over cells passing `filter`.
/// Throws std::invalid_argument with fewer than 2 distinct x values.
SlopeFit fit_scaling_exponent(const std::vector<SweepRecord>& records, SweepAxis axis,
                              const std::function<bool(const SweepRecord&)>& filter = {});

/// Per-cell medians/quartiles with the matching theoretical rate and the
/// measured/theoretical ratio (cells.csv), fitted slopes and constant
/// stability diagnostics (summary.json), and two-column plot data per curve
/// under curves/. `rates` must be indexed by cell (may be empty).
void emit_report(const std::vector<SweepRecord>& records, const std::vector<RateEstimate>& rates,
                 const std::string& out_dir);

}  // namespace rerm
