#include "rerm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "rerm/io.hpp"
#include "rerm/rng.hpp"

namespace rerm {

namespace fs = std::filesystem;

Regularizer RegularizerRecipe::build(const Shape& shape) const {
  if (kind == "l1") return Regularizer::l1();
  if (kind == "lp") return Regularizer::lp(p);
  if (kind == "weak-lp") return Regularizer::weak_lp(p, eta);
  if (kind == "slope-bhq") return Regularizer::slope(slope_weights_bhq(shape.ambient_dim(), bhq_q));
  if (kind == "mmp-orthant") return Regularizer::mmp_orthant();
  if (kind == "schatten") {
    if (!shape.is_matrix()) throw std::invalid_argument("recipe: schatten needs matrix cells");
    return Regularizer::schatten(p, shape);
  }
  if (kind == "max-norm") {
    if (!shape.is_matrix()) throw std::invalid_argument("recipe: max-norm needs matrix cells");
    return Regularizer::max_norm(shape);
  }
  throw std::invalid_argument("recipe: unknown regularizer kind '" + kind + "'");
}

void SweepConfig::validate() const {
  if (n_values.empty() || dim_values.empty() || rho_values.empty())
    throw std::invalid_argument("sweep: grid must be nonempty");
  if (trials_per_cell < 1) throw std::invalid_argument("sweep: trials_per_cell must be >= 1");
  for (int n : n_values)
    if (n < 1) throw std::invalid_argument("sweep: N values must be >= 1");
  for (int d : dim_values)
    if (d < 1) throw std::invalid_argument("sweep: dim values must be >= 1");
  for (double r : rho_values)
    if (!(r >= 0.0)) throw std::invalid_argument("sweep: rho values must be >= 0");
  if (lambda_policy.kind == LambdaPolicy::Kind::grid &&
      lambda_policy.values.size() != n_values.size())
    throw std::invalid_argument("sweep: lambda grid needs one value per N grid value");
  if (threads < 1) throw std::invalid_argument("sweep: threads must be >= 1");
}

int SweepConfig::n_cells() const {
  return static_cast<int>(n_values.size() * dim_values.size() * rho_values.size());
}

namespace {

struct Cell {
  int index;
  int N;
  int dim_value;
  double rho;
  int n_index;  // position in the N grid (lambda grid policy)
};

std::vector<Cell> enumerate_cells(const SweepConfig& cfg) {
  std::vector<Cell> cells;
  int idx = 0;
  for (std::size_t a = 0; a < cfg.n_values.size(); ++a)
    for (int d : cfg.dim_values)
      for (double rho : cfg.rho_values)
        cells.push_back({idx++, cfg.n_values[a], d, rho, static_cast<int>(a)});
  return cells;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

SweepRecord run_trial(const SweepConfig& cfg, const Cell& cell, int trial) {
  SweepRecord rec;
  rec.cell = cell.index;
  rec.trial = trial;
  rec.N = cell.N;
  rec.rho = cell.rho;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Shape shape = cfg.matrix_cells ? Shape::matrix(cell.dim_value, cell.dim_value)
                                         : Shape::vector(cell.dim_value);
    rec.dim = shape.ambient_dim();
    const Regularizer reg = cfg.regularizer.build(shape);

    DesignSpec design = DesignSpec::gaussian(shape);
    if (cfg.design_law == DesignLaw::rademacher) design = DesignSpec::rademacher(shape);
    if (cfg.design_law == DesignLaw::student_t)
      design = DesignSpec::student_t(shape, cfg.design_dof);

    NoiseSpec noise = NoiseSpec::none();
    if (cfg.noise_law == NoiseLaw::gaussian)
      noise = NoiseSpec::gaussian(cfg.noise_scale, cfg.noise_q);
    if (cfg.noise_law == NoiseLaw::student_t)
      noise = NoiseSpec::student_t(cfg.noise_scale, cfg.noise_dof, cfg.noise_q);

    // Base target rescaled so Psi(t*) = rho for this cell's penalty.
    TargetSpec base;
    switch (cfg.target_kind) {
      case TargetKind::sparse: base = TargetSpec::sparse(cfg.target_support, 1.0); break;
      case TargetKind::dense_spread: base = TargetSpec::dense_spread(1.0); break;
      case TargetKind::low_rank: base = TargetSpec::low_rank(cfg.target_rank, 1.0); break;
      default: throw std::invalid_argument("sweep: unsupported target kind");
    }
    const std::uint64_t cell_seed = rng::derive_seed(cfg.master_seed, cell.index, trial);
    Eigen::VectorXd t_base = base.materialize(shape, cell_seed);
    const double psi_base = psi_value(reg, t_base);
    Eigen::VectorXd t_star;
    if (cell.rho == 0.0) {
      t_star = Eigen::VectorXd::Zero(shape.ambient_dim());
    } else {
      if (psi_base <= 0.0) throw std::invalid_argument("sweep: base target has Psi = 0");
      t_star = (cell.rho / psi_base) * t_base;
    }

    ProblemInstance inst =
        generate_dataset(design, TargetSpec::explicit_vector(t_star), noise, cell.N, cell_seed);
    rec.psi_t_star = psi_value(reg, inst.t_star);

    double lambda = 0.0;
    switch (cfg.lambda_policy.kind) {
      case LambdaPolicy::Kind::fixed: lambda = cfg.lambda_policy.value; break;
      case LambdaPolicy::Kind::grid: lambda = cfg.lambda_policy.values[cell.n_index]; break;
      case LambdaPolicy::Kind::calibrated: {
        const double sigma_q = noise.sigma_q();
        CalibrationConstants constants =
            CalibrationConstants::defaults(reg.eta, sigma_q, cfg.lambda_policy.c_user);
        // l1 runs on the limited-moment track (M = 1 for unit-variance
        // coordinates); everything else on the width track.
        const LambdaTrack track = reg.kind == RegKind::l1 ? LambdaTrack::l1_limited_moment
                                                          : LambdaTrack::subgaussian_width;
        lambda = lambda_rerm(reg, shape, cell.N, sigma_q, constants, track).value;
        break;
      }
    }
    rec.lambda = lambda;

    const Solution sol = solve_rerm(inst, reg, lambda, cfg.solver);
    rec.status = sol.status;
    rec.error = population_error(sol.t_hat, inst.t_star, design);
    rec.obj_gap = rerm_objective(inst, reg, lambda, sol.t_hat) -
                  rerm_objective(inst, reg, lambda, inst.t_star);
  } catch (const std::exception& e) {
    rec.status = SolveStatus::failed;
    rec.error = std::numeric_limits<double>::quiet_NaN();
    std::cerr << "sweep: cell " << cell.index << " trial " << trial << " failed: " << e.what()
              << "\n";
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return rec;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<Cell> cells = enumerate_cells(cfg);
  const int total = static_cast<int>(cells.size()) * cfg.trials_per_cell;
  std::vector<SweepRecord> records(total);

  std::ofstream stream;
  if (!cfg.stream_csv.empty()) {
    stream.open(cfg.stream_csv);
    if (!stream) throw std::runtime_error("sweep: cannot open '" + cfg.stream_csv + "'");
    stream << io::records_csv_header();
  }

  // Work items complete in any order; records land in their canonical slot
  // and stream out in canonical order as the finished prefix grows.
  std::atomic<int> next{0};
  std::vector<char> done(total, 0);
  std::mutex stream_mtx;
  int streamed = 0;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= total) return;
      const Cell& cell = cells[i / cfg.trials_per_cell];
      const int trial = i % cfg.trials_per_cell;
      records[i] = run_trial(cfg, cell, trial);
      if (stream.is_open()) {
        std::lock_guard<std::mutex> lock(stream_mtx);
        done[i] = 1;
        while (streamed < total && done[streamed]) {
          stream << io::record_csv_line(records[streamed]);
          ++streamed;
        }
        stream.flush();
      }
    }
  };

  if (cfg.threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

SlopeFit fit_scaling_exponent(const std::vector<SweepRecord>& records, SweepAxis axis,
                              const std::function<bool(const SweepRecord&)>& filter) {
  // Per-cell median error, then OLS of log(median) on log(x).
  std::map<int, std::vector<double>> by_cell;
  std::map<int, double> cell_x;
  for (const auto& r : records) {
    if (filter && !filter(r)) continue;
    if (std::isfinite(r.error)) by_cell[r.cell].push_back(r.error);
    cell_x[r.cell] = axis == SweepAxis::N ? static_cast<double>(r.N) : r.rho;
  }
  std::vector<double> xs, ys;
  int dropped = 0;
  for (auto& [cell, errs] : by_cell) {
    const double med = median_of(errs);
    const double x = cell_x[cell];
    if (!(med > 0.0) || !std::isfinite(med) || !(x > 0.0)) {
      ++dropped;
      continue;
    }
    xs.push_back(std::log(x));
    ys.push_back(std::log(med));
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2)
    throw std::invalid_argument("fit_scaling_exponent: need >= 2 distinct x values");

  const int n = static_cast<int>(xs.size());
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.n_points = n;
  fit.n_dropped = dropped;
  if (n > 2) {
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double resid = ys[i] - my - fit.slope * (xs[i] - mx);
      rss += resid * resid;
    }
    fit.std_error = std::sqrt(rss / (n - 2) / sxx);
  }
  return fit;
}

void emit_report(const std::vector<SweepRecord>& records, const std::vector<RateEstimate>& rates,
                 const std::string& out_dir) {
  const fs::path dir(out_dir);
  const fs::path tmp = dir / ".report_tmp";
  std::error_code ec;
  fs::create_directories(tmp / "curves", ec);
  if (ec) throw std::runtime_error("emit_report: cannot create '" + tmp.string() + "'");

  struct CellAgg {
    int N = 0;
    int dim = 0;
    double rho = 0.0;
    std::vector<double> errors;
    int failed = 0;
  };
  std::map<int, CellAgg> cells;
  for (const auto& r : records) {
    auto& c = cells[r.cell];
    c.N = r.N;
    c.dim = r.dim;
    c.rho = r.rho;
    if (r.status == SolveStatus::failed || !std::isfinite(r.error))
      ++c.failed;
    else
      c.errors.push_back(r.error);
  }

  try {
    {
      std::ofstream f(tmp / "cells.csv");
      f << "cell,N,dim,rho,median_error,q25,q75,rate,rate_regime,ratio\n";
      f.precision(12);
      for (const auto& [idx, c] : cells) {
        const double med = median_of(c.errors);
        const double q25 = quantile_of(c.errors, 0.25);
        const double q75 = quantile_of(c.errors, 0.75);
        double rate = std::numeric_limits<double>::quiet_NaN();
        std::string regime;
        if (idx >= 0 && idx < static_cast<int>(rates.size())) {
          rate = rates[idx].value;
          regime = rates[idx].regime;
        }
        f << idx << ',' << c.N << ',' << c.dim << ',' << c.rho << ',' << med << ',' << q25 << ','
          << q75 << ',' << rate << ',' << regime << ',' << (rate > 0.0 ? med / rate : std::numeric_limits<double>::quiet_NaN())
          << '\n';
      }
    }

    // Two-column plot data, one curve per (dim, rho): N vs median error.
    std::map<std::pair<int, double>, std::map<int, double>> curves;
    for (const auto& [idx, c] : cells)
      curves[{c.dim, c.rho}][c.N] = median_of(c.errors);
    for (const auto& [key, pts] : curves) {
      std::ostringstream name;
      name << "curve_dim" << key.first << "_rho" << key.second << ".dat";
      std::ofstream f(tmp / "curves" / name.str());
      f.precision(12);
      for (const auto& [N, med] : pts) f << N << ' ' << med << '\n';
    }

    nlohmann::json summary;
    summary["n_records"] = records.size();
    int failed = 0;
    for (const auto& [idx, c] : cells) failed += c.failed;
    summary["n_failed"] = failed;
    summary["n_cells"] = cells.size();
    auto try_fit = [&](SweepAxis axis, const char* key) {
      try {
        const SlopeFit fit = fit_scaling_exponent(records, axis);
        summary[key] = {{"slope", fit.slope},
                        {"stderr", fit.std_error},
                        {"n_points", fit.n_points},
                        {"n_dropped", fit.n_dropped}};
      } catch (const std::exception&) {
        summary[key] = nullptr;
      }
    };
    try_fit(SweepAxis::N, "slope_vs_N");
    try_fit(SweepAxis::rho, "slope_vs_rho");

    // Constant stability: spread of measured/theoretical across cells.
    if (!rates.empty()) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& [idx, c] : cells) {
        if (idx >= static_cast<int>(rates.size())) continue;
        const double rate = rates[idx].value;
        const double med = median_of(c.errors);
        if (rate > 0.0 && med > 0.0) {
          lo = std::min(lo, med / rate);
          hi = std::max(hi, med / rate);
        }
      }
      if (hi > 0.0 && std::isfinite(lo))
        summary["ratio_stability"] = {{"min", lo}, {"max", hi}, {"max_over_min", hi / lo}};
    }
    {
      std::ofstream f(tmp / "summary.json");
      f << summary.dump(2) << '\n';
    }

    for (const auto& entry : fs::directory_iterator(tmp)) {
      const fs::path dest = dir / entry.path().filename();
      fs::remove_all(dest, ec);
      fs::rename(entry.path(), dest);
    }
    fs::remove_all(tmp, ec);
  } catch (...) {
    fs::remove_all(tmp, ec);  // partial writes cleaned up
    throw;
  }
}

}  // namespace rerm
