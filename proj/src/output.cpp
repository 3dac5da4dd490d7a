#include "driftsim/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace driftsim {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("output: cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("output: write failed for " + path);
}

}  // namespace

std::string timeseries_csv(const std::vector<TimeSeriesRecord>& records) {
  std::ostringstream out;
  out << "# driftsim time-series v1; angles in rad, forces in N, torques in N*m\n"
      << "# qp_status: 0 optimal, 1 max-iterations, 2 infeasible (command held)\n"
      << "# *_tire columns are realized tire-frame forces; *_util their magnitude over mu*F_z\n";
  out << "t,beta,omega,v,phi,x,y,"
         "e_d,e_phi,e_v,e_omega,omega_ref,s_ref,"
         "fxf_cmd,fxr_cmd,fyf_cmd,fyr_cmd,"
         "delta_f,delta_r,torque_f,torque_r,"
         "fxf_tire,fyf_tire,fxr_tire,fyr_tire,front_util,rear_util,"
         "qp_status,qp_iterations,qp_active,disturbance_norm,fallback,"
         "newton_iter_front,newton_iter_rear,newton_residual_front,newton_residual_rear,"
         "steer_saturated_front,steer_saturated_rear\n";
  for (const auto& r : records) {
    out << fmt(r.t) << ',' << fmt(r.state.beta) << ',' << fmt(r.state.omega) << ','
        << fmt(r.state.v) << ',' << fmt(r.state.phi) << ',' << fmt(r.state.x_pos) << ','
        << fmt(r.state.y_pos) << ',' << fmt(r.errors.e_d) << ',' << fmt(r.errors.e_phi) << ','
        << fmt(r.errors.e_v) << ',' << fmt(r.errors.e_omega) << ',' << fmt(r.omega_ref) << ','
        << fmt(r.s_ref) << ',' << fmt(r.u_cmd.fxf) << ',' << fmt(r.u_cmd.fxr) << ','
        << fmt(r.u_cmd.fyf) << ',' << fmt(r.u_cmd.fyr) << ',' << fmt(r.actuator.delta_f) << ','
        << fmt(r.actuator.delta_r) << ',' << fmt(r.actuator.t_f) << ',' << fmt(r.actuator.t_r)
        << ',' << fmt(r.front_tire.fx) << ',' << fmt(r.front_tire.fy) << ','
        << fmt(r.rear_tire.fx) << ',' << fmt(r.rear_tire.fy) << ',' << fmt(r.front_util) << ','
        << fmt(r.rear_util) << ',' << r.qp_status << ',' << r.qp_iterations << ','
        << r.qp_active << ',' << fmt(r.disturbance_norm) << ',' << (r.fallback ? 1 : 0) << ','
        << r.newton_iter_front << ',' << r.newton_iter_rear << ','
        << fmt(r.newton_residual_front) << ',' << fmt(r.newton_residual_rear) << ','
        << (r.steer_saturated_front ? 1 : 0) << ',' << (r.steer_saturated_rear ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string metrics_json(const RunMetrics& m, const std::string& scenario_name) {
  json j;
  j["schema_version"] = 1;
  j["scenario_name"] = scenario_name;
  j["steps"] = m.steps;
  j["sample_time_s"] = m.sample_time;
  j["aborted"] = m.aborted;
  j["abort_reason"] = m.abort_reason;
  j["max_abs_lateral_error_m"] = m.max_abs_lateral_error;
  j["rms_lateral_error_m"] = m.rms_lateral_error;
  j["steady_lateral_error_m"] = opt_json(m.steady_lateral_error);
  j["drift_onset_time_s"] = opt_json(m.drift_onset_time);
  j["steady_sideslip_deg"] = opt_json(m.steady_sideslip_deg);
  j["steady_yaw_rate_rad_per_s"] = opt_json(m.steady_yaw_rate);
  j["max_front_tire_utilization"] = m.max_front_utilization;
  j["max_rear_tire_utilization"] = m.max_rear_utilization;
  return j.dump(2) + "\n";
}

void emit(const RunResult& result, const Scenario& scenario, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("output: cannot create directory " + out_dir);
  write_file(out_dir + "/timeseries.csv", timeseries_csv(result.records));
  write_file(out_dir + "/metrics.json", metrics_json(result.metrics, scenario.name));
  write_file(out_dir + "/scenario.yaml", scenario.source_text);
}

RunMetrics metrics_from_csv(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("metrics: cannot open " + csv_path);

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) header.push_back(col);
    break;
  }
  if (header.empty()) throw std::runtime_error("metrics: " + csv_path + " has no header");

  std::map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) index[header[i]] = i;
  for (const char* required : {"t", "beta", "omega", "e_d", "e_phi", "e_v", "e_omega",
                               "front_util", "rear_util"}) {
    if (index.find(required) == index.end()) {
      throw std::runtime_error(std::string("metrics: missing column ") + required);
    }
  }

  std::vector<TimeSeriesRecord> records;
  std::vector<double> row(header.size());
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    for (size_t i = 0; i < header.size(); ++i) {
      if (!std::getline(ls, cell, ',')) {
        throw std::runtime_error("metrics: short row in " + csv_path);
      }
      row[i] = std::stod(cell);
    }
    TimeSeriesRecord r;
    r.t = row[index["t"]];
    r.state.beta = row[index["beta"]];
    r.state.omega = row[index["omega"]];
    r.errors.e_d = row[index["e_d"]];
    r.errors.e_phi = row[index["e_phi"]];
    r.errors.e_v = row[index["e_v"]];
    r.errors.e_omega = row[index["e_omega"]];
    r.front_util = row[index["front_util"]];
    r.rear_util = row[index["rear_util"]];
    records.push_back(r);
  }

  const double sample_time =
      records.size() >= 2 ? records[1].t - records[0].t : 0.0;
  return compute_metrics(records, sample_time, false, "");
}

std::string scenario_name_from_metrics(const std::string& metrics_path) {
  std::ifstream in(metrics_path);
  if (!in) throw std::runtime_error("metrics: cannot open " + metrics_path);
  json j;
  in >> j;
  return j.value("scenario_name", std::string{"unknown"});
}

}  // namespace driftsim
