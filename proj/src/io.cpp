#include "rerm/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rerm::io {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

}  // namespace

json to_json(const Shape& s) {
  if (s.is_matrix()) return json{{"kind", "matrix"}, {"m", s.rows}, {"T", s.cols}};
  return json{{"kind", "vector"}, {"d", s.d}};
}

Shape shape_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "vector") return Shape::vector(j.at("d").get<int>());
  if (kind == "matrix") return Shape::matrix(j.at("m").get<int>(), j.at("T").get<int>());
  throw std::invalid_argument("shape: unknown kind '" + kind + "'");
}

json to_json(const DesignSpec& d) {
  json j{{"shape", to_json(d.shape)}};
  switch (d.law) {
    case DesignLaw::gaussian_isotropic: j["law"] = "gaussian-isotropic"; break;
    case DesignLaw::rademacher: j["law"] = "rademacher"; break;
    case DesignLaw::student_t:
      j["law"] = "student-t";
      j["dof"] = d.dof;
      break;
    case DesignLaw::explicit_covariance: {
      j["law"] = "explicit-covariance";
      json rows = json::array();
      for (Eigen::Index r = 0; r < d.sigma.rows(); ++r) rows.push_back(vec_to_json(d.sigma.row(r)));
      j["sigma"] = rows;
      break;
    }
  }
  return j;
}

DesignSpec design_from_json(const json& j) {
  const Shape shape = shape_from_json(j.at("shape"));
  const std::string law = j.at("law").get<std::string>();
  if (law == "gaussian-isotropic") return DesignSpec::gaussian(shape);
  if (law == "rademacher") return DesignSpec::rademacher(shape);
  if (law == "student-t") return DesignSpec::student_t(shape, j.at("dof").get<double>());
  if (law == "explicit-covariance") {
    const auto& rows = j.at("sigma");
    const int D = static_cast<int>(rows.size());
    Eigen::MatrixXd sigma(D, D);
    for (int r = 0; r < D; ++r) sigma.row(r) = vec_from_json(rows[r]).transpose();
    return DesignSpec::with_covariance(shape, std::move(sigma));
  }
  throw std::invalid_argument("design: unknown law '" + law + "'");
}

json to_json(const NoiseSpec& n) {
  json j{{"scale", n.scale}, {"q", n.q}, {"sigma_q", n.sigma_q()}};
  switch (n.law) {
    case NoiseLaw::none: j["law"] = "none"; break;
    case NoiseLaw::gaussian: j["law"] = "gaussian"; break;
    case NoiseLaw::student_t:
      j["law"] = "student-t";
      j["dof"] = n.dof;
      break;
  }
  return j;
}

NoiseSpec noise_from_json(const json& j) {
  const std::string law = j.at("law").get<std::string>();
  if (law == "none") return NoiseSpec::none();
  const double scale = j.at("scale").get<double>();
  const double q = j.value("q", 4.0);
  if (law == "gaussian") return NoiseSpec::gaussian(scale, q);
  if (law == "student-t") return NoiseSpec::student_t(scale, j.at("dof").get<double>(), q);
  throw std::invalid_argument("noise: unknown law '" + law + "'");
}

json to_json(const TargetSpec& t) {
  switch (t.kind) {
    case TargetKind::sparse:
      return json{{"kind", "sparse"}, {"s", t.support}, {"magnitude", t.magnitude}};
    case TargetKind::dense_spread:
      return json{{"kind", "dense-spread"}, {"psi_budget", t.psi_budget}};
    case TargetKind::low_rank:
      return json{{"kind", "low-rank"}, {"rank", t.rank}, {"factor_scale", t.factor_scale}};
    case TargetKind::misspecified_quadratic:
      return json{{"kind", "misspecified-quadratic"}, {"t0", vec_to_json(t.t0)}};
    case TargetKind::explicit_vector:
      return json{{"kind", "explicit"}, {"t_star", vec_to_json(t.t0)}};
  }
  return {};
}

TargetSpec target_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sparse")
    return TargetSpec::sparse(j.at("s").get<int>(), j.at("magnitude").get<double>());
  if (kind == "dense-spread") return TargetSpec::dense_spread(j.at("psi_budget").get<double>());
  if (kind == "low-rank")
    return TargetSpec::low_rank(j.at("rank").get<int>(), j.at("factor_scale").get<double>());
  if (kind == "misspecified-quadratic")
    return TargetSpec::misspecified_quadratic(vec_from_json(j.at("t0")));
  if (kind == "explicit") return TargetSpec::explicit_vector(vec_from_json(j.at("t_star")));
  throw std::invalid_argument("target: unknown kind '" + kind + "'");
}

json to_json(const ProblemInstance& inst) {
  json x = json::array();
  for (Eigen::Index i = 0; i < inst.X.rows(); ++i)
    for (Eigen::Index j = 0; j < inst.X.cols(); ++j) x.push_back(inst.X(i, j));
  return json{{"shape", to_json(inst.design.shape)},
              {"design", to_json(inst.design)},
              {"target", to_json(inst.target)},
              {"noise", to_json(inst.noise)},
              {"N", inst.n_samples()},
              {"seed", inst.seed},
              {"t_star", vec_to_json(inst.t_star)},
              {"X", x},
              {"Y", vec_to_json(inst.Y)}};
}

ProblemInstance instance_from_json(const json& j) {
  ProblemInstance inst;
  inst.design = design_from_json(j.at("design"));
  inst.target = target_from_json(j.at("target"));
  inst.noise = noise_from_json(j.at("noise"));
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.t_star = vec_from_json(j.at("t_star"));
  const int N = j.at("N").get<int>();
  const int D = inst.design.shape.ambient_dim();
  const auto& x = j.at("X");
  if (static_cast<int>(x.size()) != N * D)
    throw std::invalid_argument("instance: X has wrong length");
  inst.X.resize(N, D);
  for (int i = 0; i < N; ++i)
    for (int c = 0; c < D; ++c) inst.X(i, c) = x[static_cast<std::size_t>(i) * D + c].get<double>();
  inst.Y = vec_from_json(j.at("Y"));
  if (inst.Y.size() != N) throw std::invalid_argument("instance: Y has wrong length");
  return inst;
}

json to_json(const Regularizer& reg) {
  switch (reg.kind) {
    case RegKind::l1: return json{{"kind", "l1"}};
    case RegKind::lp: return json{{"kind", "lp"}, {"p", reg.p}};
    case RegKind::weak_lp: return json{{"kind", "weak-lp"}, {"p", reg.p}, {"eta", reg.eta}};
    case RegKind::slope: return json{{"kind", "slope"}, {"weights", vec_to_json(reg.weights)}};
    case RegKind::mmp_cone: {
      if (reg.cone == ConeKind::nonneg_orthant)
        return json{{"kind", "mmp-cone"}, {"cone", "nonneg-orthant"}};
      json groups = json::array();
      for (const auto& g : reg.groups) groups.push_back(g);
      return json{{"kind", "mmp-cone"},
                  {"cone", "group-partition"},
                  {"groups", groups},
                  {"dim", reg.shape.ambient_dim()}};
    }
    case RegKind::schatten:
      return json{{"kind", "schatten"}, {"p", reg.p}, {"shape", to_json(reg.shape)}};
    case RegKind::max_norm: return json{{"kind", "max-norm"}, {"shape", to_json(reg.shape)}};
    case RegKind::atomic: {
      json atoms = json::array();
      for (Eigen::Index c = 0; c < reg.atoms.cols(); ++c) atoms.push_back(vec_to_json(reg.atoms.col(c)));
      return json{{"kind", "atomic"}, {"atoms", atoms}, {"shape", to_json(reg.shape)}};
    }
  }
  return {};
}

Regularizer regularizer_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "l1") return Regularizer::l1();
  if (kind == "lp") return Regularizer::lp(j.at("p").get<double>());
  if (kind == "weak-lp")
    return Regularizer::weak_lp(j.at("p").get<double>(), j.at("eta").get<double>());
  if (kind == "slope") {
    if (j.contains("weights_csv")) return Regularizer::slope(load_vector_csv(j.at("weights_csv")));
    return Regularizer::slope(vec_from_json(j.at("weights")));
  }
  if (kind == "mmp-cone") {
    const std::string cone = j.at("cone").get<std::string>();
    if (cone == "nonneg-orthant") return Regularizer::mmp_orthant();
    if (cone == "group-partition") {
      std::vector<std::vector<int>> groups;
      for (const auto& g : j.at("groups")) groups.push_back(g.get<std::vector<int>>());
      return Regularizer::mmp_groups(std::move(groups), j.at("dim").get<int>());
    }
    throw std::invalid_argument("mmp-cone: unknown cone '" + cone + "'");
  }
  if (kind == "schatten")
    return Regularizer::schatten(j.at("p").get<double>(), shape_from_json(j.at("shape")));
  if (kind == "max-norm") return Regularizer::max_norm(shape_from_json(j.at("shape")));
  if (kind == "atomic") {
    const Shape shape = shape_from_json(j.at("shape"));
    Eigen::MatrixXd atoms;
    if (j.contains("atoms_csv")) {
      const Eigen::MatrixXd rows = load_matrix_csv(j.at("atoms_csv"));
      atoms = rows.transpose();
    } else {
      const auto& a = j.at("atoms");
      atoms.resize(shape.ambient_dim(), static_cast<Eigen::Index>(a.size()));
      for (std::size_t c = 0; c < a.size(); ++c)
        atoms.col(static_cast<Eigen::Index>(c)) = vec_from_json(a[c]);
    }
    return Regularizer::atomic(std::move(atoms), shape);
  }
  throw std::invalid_argument("regularizer: unknown kind '" + kind + "'");
}

json to_json(const WidthEstimate& w) {
  json j{{"value", w.value}, {"convention", WidthEstimate::convention}, {"formula", w.formula}};
  if (w.method == WidthEstimate::Method::monte_carlo) {
    j["method"] = "monte-carlo";
    j["samples"] = w.samples;
    j["stderr"] = w.std_error;
  } else {
    j["method"] = "closed-form";
  }
  return j;
}

json to_json(const SmallBallReport& r) {
  return json{{"kappa", r.kappa},
              {"eps_hat", r.eps_hat},
              {"directions_tested", r.directions_tested},
              {"min_direction", vec_to_json(r.min_direction)}};
}

json to_json(const MomentGrowthReport& r) {
  return json{{"p0", r.p0},
              {"per_coordinate_ratio", vec_to_json(r.per_coordinate_ratio)},
              {"kappa0_hat", r.kappa0_hat},
              {"M", r.M},
              {"reliable", r.reliable},
              {"violated", r.violated},
              {"threshold", r.threshold}};
}

json to_json(const CalibrationResult& r) {
  return json{{"width_K", to_json(r.width_K)},
              {"width_E", to_json(r.width_E)},
              {"lambda", r.lambda.value},
              {"lambda_noise_free", r.lambda.noise_free},
              {"lambda_track", r.lambda.track},
              {"N", r.N},
              {"constants",
               json{{"alpha", r.constants.alpha},
                    {"beta", r.constants.beta},
                    {"beta_defined", r.constants.beta_defined},
                    {"gamma", r.constants.gamma},
                    {"theta", r.constants.theta},
                    {"tau", r.constants.tau},
                    {"c_user", r.constants.c_user},
                    {"kappa", r.constants.kappa},
                    {"eps", r.constants.eps},
                    {"eta", r.constants.eta},
                    {"sigma_q", r.constants.sigma_q}}},
              {"note", r.note}};
}

json to_json(const RateEstimate& r) {
  return json{{"value", r.value},
              {"regime", r.regime},
              {"formula_id", r.formula_id},
              {"convention", RateEstimate::convention}};
}

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig c;
  const auto& grid = j.at("grid");
  c.n_values = grid.at("N").get<std::vector<int>>();
  c.dim_values = grid.at("dim").get<std::vector<int>>();
  c.rho_values = grid.at("rho").get<std::vector<double>>();
  c.trials_per_cell = j.at("trials_per_cell").get<int>();
  c.matrix_cells = j.value("matrix_cells", false);

  const auto& reg = j.at("regularizer");
  c.regularizer.kind = reg.at("kind").get<std::string>();
  c.regularizer.p = reg.value("p", 1.0);
  c.regularizer.eta = reg.value("eta", 1.0);
  c.regularizer.bhq_q = reg.value("q", 0.1);

  const auto& design = j.at("design");
  const std::string dlaw = design.at("law").get<std::string>();
  if (dlaw == "gaussian-isotropic") c.design_law = DesignLaw::gaussian_isotropic;
  else if (dlaw == "rademacher") c.design_law = DesignLaw::rademacher;
  else if (dlaw == "student-t") {
    c.design_law = DesignLaw::student_t;
    c.design_dof = design.at("dof").get<double>();
  } else throw std::invalid_argument("sweep: unsupported design law '" + dlaw + "'");

  const auto& target = j.at("target");
  const std::string tkind = target.at("kind").get<std::string>();
  if (tkind == "sparse") {
    c.target_kind = TargetKind::sparse;
    c.target_support = target.value("s", 1);
  } else if (tkind == "dense-spread") {
    c.target_kind = TargetKind::dense_spread;
  } else if (tkind == "low-rank") {
    c.target_kind = TargetKind::low_rank;
    c.target_rank = target.value("rank", 1);
  } else throw std::invalid_argument("sweep: unsupported target kind '" + tkind + "'");

  const auto& noise = j.at("noise");
  const std::string nlaw = noise.at("law").get<std::string>();
  if (nlaw == "none") c.noise_law = NoiseLaw::none;
  else if (nlaw == "gaussian") c.noise_law = NoiseLaw::gaussian;
  else if (nlaw == "student-t") {
    c.noise_law = NoiseLaw::student_t;
    c.noise_dof = noise.at("dof").get<double>();
  } else throw std::invalid_argument("sweep: unknown noise law '" + nlaw + "'");
  if (c.noise_law != NoiseLaw::none) {
    c.noise_scale = noise.at("scale").get<double>();
    c.noise_q = noise.value("q", 4.0);
  } else {
    c.noise_scale = 0.0;
  }

  const auto& lp = j.at("lambda_policy");
  const std::string lkind = lp.at("kind").get<std::string>();
  if (lkind == "calibrated") {
    c.lambda_policy.kind = LambdaPolicy::Kind::calibrated;
    c.lambda_policy.c_user = lp.value("c_user", 1.0);
  } else if (lkind == "fixed") {
    c.lambda_policy.kind = LambdaPolicy::Kind::fixed;
    c.lambda_policy.value = lp.at("value").get<double>();
  } else if (lkind == "grid") {
    c.lambda_policy.kind = LambdaPolicy::Kind::grid;
    c.lambda_policy.values = lp.at("values").get<std::vector<double>>();
  } else throw std::invalid_argument("sweep: unknown lambda policy '" + lkind + "'");

  c.master_seed = j.value("master_seed", 0ULL);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    c.solver.max_iter = s.value("max_iter", c.solver.max_iter);
    c.solver.rel_tol = s.value("rel_tol", c.solver.rel_tol);
    c.solver.monotone = s.value("monotone", c.solver.monotone);
  }
  c.threads = j.value("threads", 1);
  c.stream_csv = j.value("stream_csv", std::string{});
  c.validate();
  return c;
}

// --- CSV ---------------------------------------------------------------------------

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_cap: return "iteration-cap";
    case SolveStatus::failed: return "failed";
  }
  return "?";
}

namespace {

SolveStatus status_from_name(const std::string& s) {
  if (s == "converged") return SolveStatus::converged;
  if (s == "iteration-cap") return SolveStatus::iteration_cap;
  if (s == "failed") return SolveStatus::failed;
  throw std::invalid_argument("unknown status '" + s + "'");
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string records_csv_header(bool include_wall) {
  std::string h = "cell,trial,N,dim,rho,lambda,error,psi_t_star,obj_gap,status";
  if (include_wall) h += ",wall_ms";
  return h + "\n";
}

std::string record_csv_line(const SweepRecord& r, bool include_wall) {
  std::ostringstream os;
  os << r.cell << ',' << r.trial << ',' << r.N << ',' << r.dim << ',' << fmt(r.rho) << ','
     << fmt(r.lambda) << ',' << fmt(r.error) << ',' << fmt(r.psi_t_star) << ','
     << fmt(r.obj_gap) << ',' << status_name(r.status);
  if (include_wall) os << ',' << fmt(r.wall_ms);
  os << '\n';
  return os.str();
}

void write_records_csv(const std::vector<SweepRecord>& records, const std::string& path,
                       bool include_wall) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << records_csv_header(include_wall);
  for (const auto& r : records) f << record_csv_line(r, include_wall);
}

std::vector<SweepRecord> read_records_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty records file");
  const bool has_wall = line.find("wall_ms") != std::string::npos;
  std::vector<SweepRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    SweepRecord r;
    auto next = [&]() {
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("short record line");
      return tok;
    };
    r.cell = std::stoi(next());
    r.trial = std::stoi(next());
    r.N = std::stoi(next());
    r.dim = std::stoi(next());
    r.rho = std::stod(next());
    r.lambda = std::stod(next());
    r.error = std::stod(next());
    r.psi_t_star = std::stod(next());
    r.obj_gap = std::stod(next());
    r.status = status_from_name(next());
    if (has_wall) r.wall_ms = std::stod(next());
    out.push_back(r);
  }
  return out;
}

Eigen::VectorXd load_vector_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<double> vals;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    vals.push_back(std::stod(line));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Eigen::Index>(i)) = vals[i];
  return v;
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged CSV in '" + path + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty CSV '" + path + "'");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return M;
}

void write_width_table_csv(
    const std::vector<std::tuple<std::string, int, double, double, double>>& rows,
    const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << "kind,dimension,formula,mc_estimate,mc_stderr\n";
  for (const auto& [kind, dim, formula, mc, se] : rows)
    f << kind << ',' << dim << ',' << fmt(formula) << ',' << fmt(mc) << ',' << fmt(se) << '\n';
}

void write_trace_csv(const std::vector<double>& trace, const std::vector<double>& certificates,
                     const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << "iteration,objective,certificate\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double cert = certificates.empty()
                            ? std::numeric_limits<double>::quiet_NaN()
                            : certificates[std::min(i, certificates.size() - 1)];
    f << i << ',' << fmt(trace[i]) << ',' << fmt(cert) << '\n';
  }
}

}  // namespace rerm::io
