#include "driftsim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include "driftsim/plant.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace driftsim {

namespace {

void reject_unknown_keys(const YAML::Node& node, const std::set<std::string>& known,
                         const std::string& context) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (known.find(key) == known.end()) {
      throw std::invalid_argument("scenario: unknown key '" + key + "' in " + context);
    }
  }
}

template <typename T>
void read_if(const YAML::Node& node, const char* key, T& out) {
  if (node[key]) out = node[key].as<T>();
}

void parse_path(const YAML::Node& node, PathSpec& spec) {
  reject_unknown_keys(node, {"type", "radius", "direction", "kappa_start", "kappa_end",
                             "arc_length"},
                      "path");
  const auto type = node["type"] ? node["type"].as<std::string>() : "circle";
  if (type == "circle") {
    spec.kind = PathKind::kCircle;
  } else if (type == "line") {
    spec.kind = PathKind::kLine;
  } else if (type == "linear_curvature") {
    spec.kind = PathKind::kLinearCurvature;
  } else {
    throw std::invalid_argument("scenario: unknown path type '" + type + "'");
  }
  read_if(node, "radius", spec.radius);
  read_if(node, "kappa_start", spec.kappa_start);
  read_if(node, "kappa_end", spec.kappa_end);
  read_if(node, "arc_length", spec.arc_length);
  if (node["direction"]) {
    const auto dir = node["direction"].as<std::string>();
    if (dir == "ccw") {
      spec.counterclockwise = true;
    } else if (dir == "cw") {
      spec.counterclockwise = false;
    } else {
      throw std::invalid_argument("scenario: direction must be 'ccw' or 'cw'");
    }
  }
}

void parse_controller(const YAML::Node& node, MpcConfig& cfg) {
  reject_unknown_keys(node,
                      {"np", "nc", "q", "r", "sample_time", "gamma", "dfx_max", "dfy_max",
                       "compensation", "filter_cutoff_hz", "k1", "k2", "corrected_a", "qp_tol",
                       "qp_max_iter"},
                      "controller");
  read_if(node, "np", cfg.np);
  read_if(node, "nc", cfg.nc);
  read_if(node, "sample_time", cfg.sample_time);
  read_if(node, "gamma", cfg.gamma);
  read_if(node, "dfx_max", cfg.dfx_max);
  read_if(node, "dfy_max", cfg.dfy_max);
  read_if(node, "compensation", cfg.compensation_enabled);
  read_if(node, "filter_cutoff_hz", cfg.filter_cutoff_hz);
  read_if(node, "k1", cfg.yaw_gains.k1);
  read_if(node, "k2", cfg.yaw_gains.k2);
  read_if(node, "corrected_a", cfg.couple_yaw_rate_error);
  read_if(node, "qp_tol", cfg.qp_tol);
  read_if(node, "qp_max_iter", cfg.qp_max_iter);
  if (node["q"]) {
    const auto w = node["q"].as<std::vector<double>>();
    if (w.size() != 4) throw std::invalid_argument("scenario: q needs 4 diagonal entries");
    cfg.q = Eigen::Vector4d{w[0], w[1], w[2], w[3]}.asDiagonal();
  }
  if (node["r"]) {
    const auto w = node["r"].as<std::vector<double>>();
    if (w.size() != 4) throw std::invalid_argument("scenario: r needs 4 diagonal entries");
    cfg.r = Eigen::Vector4d{w[0], w[1], w[2], w[3]}.asDiagonal();
  }
}

void parse_vehicle(const YAML::Node& node, VehicleParams& p, TireParams& t) {
  reject_unknown_keys(node, {"m", "i_z", "a", "b", "r", "mu", "g", "b_stiff", "c_shape"},
                      "vehicle");
  read_if(node, "m", p.m);
  read_if(node, "i_z", p.i_z);
  read_if(node, "a", p.a);
  read_if(node, "b", p.b);
  read_if(node, "r", p.r);
  read_if(node, "mu", p.mu);
  read_if(node, "g", p.g);
  read_if(node, "b_stiff", t.b_stiff);
  read_if(node, "c_shape", t.c_shape);
}

}  // namespace

Scenario load_scenario(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw std::runtime_error("scenario: cannot open " + file_path);
  std::ostringstream buf;
  buf << in.rdbuf();

  Scenario s;
  s.source_text = buf.str();

  YAML::Node root;
  try {
    root = YAML::Load(s.source_text);
  } catch (const YAML::Exception& e) {
    throw std::runtime_error("scenario: parse error in " + file_path + ": " + e.what());
  }
  reject_unknown_keys(root,
                      {"name", "path", "reference_speed", "duration", "initial_speed",
                       "controller", "vehicle", "actuator", "seed", "initial_beta_std",
                       "initial_omega_std"},
                      "scenario");
  read_if(root, "name", s.name);
  read_if(root, "reference_speed", s.reference_speed);
  read_if(root, "duration", s.duration);
  s.initial_speed = s.reference_speed;
  read_if(root, "initial_speed", s.initial_speed);
  read_if(root, "seed", s.seed);
  read_if(root, "initial_beta_std", s.initial_beta_std);
  read_if(root, "initial_omega_std", s.initial_omega_std);
  if (root["path"]) parse_path(root["path"], s.path);
  if (root["controller"]) parse_controller(root["controller"], s.controller);
  if (root["vehicle"]) parse_vehicle(root["vehicle"], s.vehicle, s.tire);
  if (root["actuator"]) {
    reject_unknown_keys(root["actuator"], {"tolerance", "max_iter", "delta_max_deg"},
                        "actuator");
    read_if(root["actuator"], "tolerance", s.newton_tolerance);
    read_if(root["actuator"], "max_iter", s.newton_max_iter);
    if (root["actuator"]["delta_max_deg"]) {
      s.delta_max = root["actuator"]["delta_max_deg"].as<double>() * M_PI / 180.0;
    }
  }
  validate(s);
  return s;
}

void validate(const Scenario& s) {
  if (s.duration <= 0.0) throw std::invalid_argument("scenario: duration must be positive");
  if (s.reference_speed <= 0.0) {
    throw std::invalid_argument("scenario: reference speed must be positive");
  }
  if (s.initial_speed < kVelocityFloor) {
    throw std::invalid_argument("scenario: initial speed below the model validity floor");
  }
  if (s.path.kind == PathKind::kCircle && s.path.radius <= 0.0) {
    throw std::invalid_argument("scenario: circle radius must be positive");
  }
  if (s.path.kind == PathKind::kLinearCurvature) {
    if (s.path.arc_length <= 0.0) {
      throw std::invalid_argument("scenario: arc_length must be positive");
    }
    if (s.path.kappa_start < 0.0 || s.path.kappa_end < 0.0) {
      throw std::invalid_argument("scenario: curvature magnitudes must be nonnegative");
    }
  }
  validate(s.vehicle);
  validate(s.tire);
  validate(s.controller);
  if (s.newton_tolerance <= 0.0 || s.newton_max_iter < 1 || s.delta_max <= 0.0) {
    throw std::invalid_argument("scenario: invalid actuator settings");
  }
}

std::shared_ptr<const ReferencePath> build_path(const Scenario& s) {
  // Generous tail so projection never reaches the parameterization end.
  const double travel = s.duration * s.reference_speed;
  const double extent = 1.5 * travel + 100.0;
  const double sign = s.path.counterclockwise ? -1.0 : 1.0;
  switch (s.path.kind) {
    case PathKind::kLine:
      return make_line_path({0.0, 0.0}, 0.0, extent, s.reference_speed);
    case PathKind::kCircle:
      return make_circle_path({0.0, 0.0}, 0.0, sign / s.path.radius, extent,
                              s.reference_speed);
    case PathKind::kLinearCurvature:
      return make_linear_curvature_path({0.0, 0.0}, 0.0, sign * s.path.kappa_start,
                                        sign * s.path.kappa_end, s.path.arc_length, extent,
                                        s.reference_speed);
  }
  throw std::logic_error("scenario: unhandled path kind");
}

VehicleState initial_state(const Scenario& s, const ReferencePath& path) {
  VehicleState state;
  const Eigen::Vector2d p0 = path.position(0.0);
  state.x_pos = p0.x();
  state.y_pos = p0.y();
  state.phi = path.heading(0.0);
  state.v = s.initial_speed;
  if (s.initial_beta_std > 0.0 || s.initial_omega_std > 0.0) {
    std::mt19937 rng(s.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    state.beta += s.initial_beta_std * unit(rng);
    state.omega += s.initial_omega_std * unit(rng);
  }
  return state;
}

InverseTireConfig actuator_config(const Scenario& s) {
  const AxleLoads loads = static_axle_loads(s.vehicle);
  InverseTireConfig cfg =
      default_inverse_tire_config(s.vehicle.mu * std::min(loads.f_zf, loads.f_zr));
  cfg.tolerance = s.newton_tolerance;
  cfg.max_iter = s.newton_max_iter;
  cfg.delta_max = s.delta_max;
  return cfg;
}

}  // namespace driftsim
