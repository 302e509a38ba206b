// Batch experiment runner: the only human-facing surface. Non-interactive;
// everything is driven by JSON configs (schemas in the README).
//
// Exit codes: 0 success, 2 config error, 3 partial solver failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rerm/calibration.hpp"
#include "rerm/io.hpp"
#include "rerm/model.hpp"
#include "rerm/rates.hpp"
#include "rerm/solver.hpp"
#include "rerm/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config '" + path + "'");
  json j;
  f >> j;
  return j;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
}

rerm::SolverConfig solver_from_json(const json& j) {
  rerm::SolverConfig cfg;
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    cfg.max_iter = s.value("max_iter", cfg.max_iter);
    cfg.rel_tol = s.value("rel_tol", cfg.rel_tol);
    cfg.monotone = s.value("monotone", cfg.monotone);
  }
  return cfg;
}

rerm::ProblemInstance instance_from_config(const json& cfg, std::uint64_t seed_override,
                                           bool has_seed_override) {
  const auto& p = cfg.at("problem");
  if (p.contains("instance_file")) {
    return rerm::io::instance_from_json(load_config(p.at("instance_file")));
  }
  const rerm::DesignSpec design = rerm::io::design_from_json(p.at("design"));
  const rerm::TargetSpec target = rerm::io::target_from_json(p.at("target"));
  const rerm::NoiseSpec noise = rerm::io::noise_from_json(p.at("noise"));
  const int N = p.at("N").get<int>();
  const std::uint64_t seed = has_seed_override ? seed_override : p.value("seed", 0ULL);
  return rerm::generate_dataset(design, target, noise, N, seed);
}

int cmd_solve(const json& cfg, const fs::path& out_dir, std::uint64_t seed, bool has_seed) {
  const rerm::ProblemInstance inst = instance_from_config(cfg, seed, has_seed);
  const rerm::Regularizer reg = rerm::io::regularizer_from_json(cfg.at("regularizer"));
  const rerm::SolverConfig scfg = solver_from_json(cfg);

  rerm::Solution sol;
  if (cfg.contains("radius")) {
    sol = rerm::solve_constrained(inst, reg, cfg.at("radius").get<double>(), scfg);
  } else {
    sol = rerm::solve_rerm(inst, reg, cfg.at("lambda").get<double>(), scfg);
  }

  json out{{"status", rerm::io::status_name(sol.status)},
           {"certificate", sol.certificate},
           {"outer_search", sol.outer_search},
           {"objective", sol.objective_trace.back()},
           {"iterations", sol.objective_trace.size() - 1},
           {"psi", rerm::psi_value(reg, sol.t_hat)}};
  json t = json::array();
  for (Eigen::Index i = 0; i < sol.t_hat.size(); ++i) t.push_back(sol.t_hat(i));
  out["t_hat"] = t;
  if (inst.t_star.size() == sol.t_hat.size())
    out["population_error"] = rerm::population_error(sol.t_hat, inst.t_star, inst.design);
  write_json(out, out_dir / "solution.json");
  rerm::io::write_trace_csv(sol.objective_trace, sol.certificate_trace,
                            (out_dir / "trace.csv").string());
  std::cout << "solution.json, trace.csv written to " << out_dir << "\n";
  return sol.status == rerm::SolveStatus::failed ? 3 : 0;
}

int cmd_calibrate(const json& cfg, const fs::path& out_dir, std::uint64_t seed, bool has_seed) {
  const rerm::Regularizer reg = rerm::io::regularizer_from_json(cfg.at("regularizer"));
  const rerm::Shape shape = rerm::io::shape_from_json(cfg.at("shape"));
  const int N = cfg.at("N").get<int>();

  double sigma_q = 0.0;
  if (cfg.contains("noise"))
    sigma_q = rerm::io::noise_from_json(cfg.at("noise")).sigma_q();
  else
    sigma_q = cfg.at("sigma_q").get<double>();

  double kappa = 0.5, eps = 2.0 * 0.30853753872598694;  // Gaussian pair at kappa = 1/2
  if (cfg.contains("small_ball")) {
    kappa = cfg.at("small_ball").value("kappa", kappa);
    eps = cfg.at("small_ball").value("eps", eps);
  }
  const double c_user = cfg.value("c_user", 1.0);
  const auto constants = rerm::CalibrationConstants::from_assumptions(kappa, eps, reg.eta,
                                                                      sigma_q, c_user);
  const auto track = cfg.value("track", std::string("subgaussian-width")) == "l1-limited-moment"
                         ? rerm::LambdaTrack::l1_limited_moment
                         : rerm::LambdaTrack::subgaussian_width;
  rerm::CalibrationResult result =
      rerm::calibrate(reg, shape, N, sigma_q, constants, track, cfg.value("M", 1.0));

  json out = rerm::io::to_json(result);
  if (cfg.contains("mc_samples")) {
    const long samples = cfg.at("mc_samples").get<long>();
    const auto mc = rerm::estimate_mean_width_mc(reg, shape, samples,
                                                 has_seed ? seed : cfg.value("seed", 1ULL));
    out["width_K_mc"] = rerm::io::to_json(mc);
  }
  if (cfg.contains("rho_grid")) {
    json rgrid = json::array();
    for (double rho : cfg.at("rho_grid").get<std::vector<double>>()) {
      const auto r = result.r_at(reg, shape, rho);
      rgrid.push_back({{"rho", rho}, {"r_squared", r.r_squared}, {"regime", r.regime}});
    }
    out["r_of_rho"] = rgrid;
  }
  write_json(out, out_dir / "calibration.json");

  // Optional formula-vs-Monte-Carlo width table across a dimension sweep
  // (vector kinds only: the descriptor must apply at every dimension).
  if (cfg.contains("width_table")) {
    const auto& wt = cfg.at("width_table");
    const long samples = wt.value("mc_samples", 5000L);
    std::vector<std::tuple<std::string, int, double, double, double>> rows;
    for (int d : wt.at("dims").get<std::vector<int>>()) {
      const rerm::Shape s = rerm::Shape::vector(d);
      const auto formula = rerm::mean_width_formula(reg, s);
      const auto mc = rerm::estimate_mean_width_mc(
          reg, s, samples, has_seed ? seed : cfg.value("seed", 1ULL));
      rows.emplace_back(reg.name(), d, formula.value, mc.value, mc.std_error);
    }
    rerm::io::write_width_table_csv(rows, (out_dir / "width_table.csv").string());
  }
  std::cout << "calibration.json written to " << out_dir << "\n";
  return 0;
}

int cmd_rates(const json& cfg, const fs::path& out_dir) {
  std::ofstream f(out_dir / "rates.csv");
  if (!f) throw std::runtime_error("cannot write rates.csv");
  f << "query,value,regime,formula_id\n";
  f.precision(12);
  for (const auto& q : cfg.at("queries")) {
    const std::string type = q.at("type").get<std::string>();
    rerm::RateEstimate est;
    if (type == "minimax-l1") {
      est = rerm::minimax_rate_l1(q.at("rho").get<double>(), q.at("sigma").get<double>(),
                                  q.at("N").get<int>(), q.at("d").get<int>());
    } else if (type == "complexity") {
      rerm::RateQuery query;
      query.reg = rerm::io::regularizer_from_json(q.at("regularizer"));
      query.shape = rerm::io::shape_from_json(q.at("shape"));
      query.N = q.at("N").get<int>();
      query.sigma_q = q.at("sigma_q").get<double>();
      query.rho = q.at("rho").get<double>();
      if (q.contains("width_K")) query.width_K = q.at("width_K").get<double>();
      est = rerm::complexity_rate(query);
    } else if (type == "combined") {
      est = rerm::combined_rate(q.at("s").get<int>(), q.at("rho").get<double>(),
                                q.at("sigma").get<double>(), q.at("N").get<int>(),
                                q.at("d").get<int>());
    } else {
      throw std::invalid_argument("rates: unknown query type '" + type + "'");
    }
    f << type << ',' << est.value << ',' << est.regime << ",\"" << est.formula_id << "\"\n";
  }
  std::cout << "rates.csv written to " << out_dir << "\n";
  return 0;
}

int cmd_diagnose(const json& cfg, const fs::path& out_dir, std::uint64_t seed, bool has_seed) {
  const rerm::DesignSpec design = rerm::io::design_from_json(cfg.at("design"));
  const int N = cfg.value("N", 100000);
  const std::uint64_t s = has_seed ? seed : cfg.value("seed", 1ULL);

  json out;
  if (cfg.contains("kappa")) {
    const double kappa = cfg.at("kappa").get<double>();
    const int directions = cfg.value("directions", 50);
    out["small_ball"] =
        rerm::io::to_json(rerm::estimate_small_ball(design, kappa, directions, N, s));
  }
  const double default_p0 = 4.0 * std::log(static_cast<double>(design.shape.ambient_dim()));
  const double p0 = cfg.value("p0", default_p0);
  const Eigen::MatrixXd X = rerm::sample_design(design, N, s);
  out["moment_growth"] = rerm::io::to_json(
      rerm::moment_growth_diagnostic(X, p0, cfg.value("moment_threshold", 1.0)));
  write_json(out, out_dir / "diagnostics.json");
  std::cout << "diagnostics.json written to " << out_dir << "\n";
  return 0;
}

int cmd_sweep(const json& cfg, const fs::path& out_dir, std::uint64_t seed, bool has_seed,
              int threads) {
  rerm::SweepConfig sweep = rerm::io::sweep_config_from_json(cfg);
  if (has_seed) sweep.master_seed = seed;
  if (threads > 0) sweep.threads = threads;
  if (sweep.stream_csv.empty()) sweep.stream_csv = (out_dir / "records.csv").string();

  const auto records = rerm::run_sweep(sweep);
  int failed = 0;
  for (const auto& r : records)
    if (r.status == rerm::SolveStatus::failed) ++failed;

  if (cfg.value("emit_report", true)) {
    std::vector<rerm::RateEstimate> rates;
    if (cfg.value("rates", true)) {
      // Complexity rate per cell, matching the sweep's own penalty and noise.
      for (const auto& r : records) {
        if (r.trial != 0) continue;
        rerm::RateQuery q;
        const rerm::Shape shape = sweep.matrix_cells
                                      ? rerm::Shape::matrix(static_cast<int>(std::sqrt(r.dim)),
                                                            static_cast<int>(std::sqrt(r.dim)))
                                      : rerm::Shape::vector(r.dim);
        q.reg = sweep.regularizer.build(shape);
        q.shape = shape;
        q.N = r.N;
        q.rho = r.rho;
        rerm::NoiseSpec noise = rerm::NoiseSpec::none();
        if (sweep.noise_law == rerm::NoiseLaw::gaussian)
          noise = rerm::NoiseSpec::gaussian(sweep.noise_scale, sweep.noise_q);
        if (sweep.noise_law == rerm::NoiseLaw::student_t)
          noise = rerm::NoiseSpec::student_t(sweep.noise_scale, sweep.noise_dof, sweep.noise_q);
        q.sigma_q = noise.sigma_q();
        rates.push_back(rerm::complexity_rate(q));
      }
    }
    rerm::emit_report(records, rates, out_dir.string());
  }
  std::cout << "records.csv";
  if (cfg.value("emit_report", true)) std::cout << ", cells.csv, summary.json, curves/";
  std::cout << " written to " << out_dir << " (" << records.size() << " records, " << failed
            << " failed)\n";
  return failed > 0 ? 3 : 0;
}

int cmd_report(const std::string& records_path, const json& cfg, const fs::path& out_dir) {
  const auto records = rerm::io::read_records_csv(records_path);
  std::vector<rerm::RateEstimate> rates;
  if (cfg.contains("rates_config")) {
    // One complexity query per cell, driven by the recorded cell parameters.
    const auto& rc = cfg.at("rates_config");
    for (const auto& r : records) {
      if (r.trial != 0) continue;
      rerm::RateQuery q;
      q.reg = rerm::io::regularizer_from_json(rc.at("regularizer"));
      q.shape = rerm::Shape::vector(r.dim);
      q.N = r.N;
      q.rho = r.rho;
      q.sigma_q = rc.at("sigma_q").get<double>();
      rates.push_back(rerm::complexity_rate(q));
    }
  }
  rerm::emit_report(records, rates, out_dir.string());
  std::cout << "report written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rermlab: regularized least-squares, width calibration, and rate benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string records_path;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int threads = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    if (needs_config)
      sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out-dir", out_dir, "output directory (default: .)");
    sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
      has_seed = true;
    });
    sub->add_option("--threads", threads, "worker threads (sweep)");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one RERM or constrained instance");
  add_common(solve);
  CLI::App* calibrate = app.add_subcommand("calibrate", "widths, lambda, fixed-point radii");
  add_common(calibrate);
  CLI::App* rates = app.add_subcommand("rates", "theoretical rate tables");
  add_common(rates);
  CLI::App* diagnose = app.add_subcommand("diagnose", "small-ball and moment-growth checks");
  add_common(diagnose);
  CLI::App* sweep = app.add_subcommand("sweep", "grid experiment, records to CSV");
  add_common(sweep);
  CLI::App* report = app.add_subcommand("report", "aggregate a records CSV into report files");
  add_common(report, false);
  report->add_option("--records", records_path, "records CSV")->required();
  report->add_option("--config", config_path, "optional report config");

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);

    json cfg;
    if (!config_path.empty()) cfg = load_config(config_path);

    if (solve->parsed()) return cmd_solve(cfg, out, seed, has_seed);
    if (calibrate->parsed()) return cmd_calibrate(cfg, out, seed, has_seed);
    if (rates->parsed()) return cmd_rates(cfg, out);
    if (diagnose->parsed()) return cmd_diagnose(cfg, out, seed, has_seed);
    if (sweep->parsed()) return cmd_sweep(cfg, out, seed, has_seed, threads);
    if (report->parsed()) return cmd_report(records_path, cfg, out);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
