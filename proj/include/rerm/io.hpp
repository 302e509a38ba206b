#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rerm/calibration.hpp"
#include "rerm/model.hpp"
#include "rerm/rates.hpp"
#include "rerm/regularizer.hpp"
#include "rerm/sweep.hpp"

// JSON records and CSV tables. Schemas are frozen and documented in the
// README; X is stored row-major.

namespace rerm::io {

nlohmann::json to_json(const Shape& s);
Shape shape_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DesignSpec& d);
DesignSpec design_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NoiseSpec& n);
NoiseSpec noise_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TargetSpec& t);
TargetSpec target_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Regularizer& reg);
Regularizer regularizer_from_json(const nlohmann::json& j);

nlohmann::json to_json(const WidthEstimate& w);
nlohmann::json to_json(const SmallBallReport& r);
nlohmann::json to_json(const MomentGrowthReport& r);
nlohmann::json to_json(const CalibrationResult& r);
nlohmann::json to_json(const RateEstimate& r);

SweepConfig sweep_config_from_json(const nlohmann::json& j);

// records CSV; column order frozen:
// cell,trial,N,dim,rho,lambda,error,psi_t_star,obj_gap,status,wall_ms
// wall_ms is excluded from determinism guarantees (drop it to compare runs).
std::string records_csv_header(bool include_wall = true);
std::string record_csv_line(const SweepRecord& r, bool include_wall = true);
void write_records_csv(const std::vector<SweepRecord>& records, const std::string& path,
                       bool include_wall = true);
std::vector<SweepRecord> read_records_csv(const std::string& path);

// one value per row
Eigen::VectorXd load_vector_csv(const std::string& path);
// one vector per row (atom sets)
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// width tables: kind,dimension,formula,mc_estimate,mc_stderr
void write_width_table_csv(const std::vector<std::tuple<std::string, int, double, double, double>>& rows,
                           const std::string& path);

// solver trace: iteration,objective,certificate (certificate column repeats
// its last value when the solver stopped between updates)
void write_trace_csv(const std::vector<double>& trace, const std::vector<double>& certificates,
                     const std::string& path);

std::string status_name(SolveStatus s);

}  // namespace rerm::io
