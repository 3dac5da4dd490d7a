#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "driftsim/actuator.hpp"
#include "driftsim/mpc.hpp"
#include "driftsim/path.hpp"
#include "driftsim/types.hpp"

namespace driftsim {

enum class PathKind { kLine, kCircle, kLinearCurvature };

/// Geometric path request. Curvature magnitudes are given unsigned; the
/// direction flag picks the turn sense (counterclockwise = positive yaw rate).
struct PathSpec {
  PathKind kind = PathKind::kCircle;
  double radius = 30.0;            // circle
  double kappa_start = 1.0 / 30.0; // linear-curvature blend, magnitude
  double kappa_end = 1.0 / 18.0;
  double arc_length = 240.0;
  bool counterclockwise = true;
};

struct Scenario {
  std::string name = "unnamed";
  PathSpec path;
  double reference_speed = 10.0;  // [m/s]
  double duration = 80.0;         // [s]
  double initial_speed = 10.0;    // [m/s]
  MpcConfig controller;
  VehicleParams vehicle;
  TireParams tire;
  double newton_tolerance = 1e-6;
  int newton_max_iter = 25;
  double delta_max = 35.0 * M_PI / 180.0;
  unsigned seed = 0;
  double initial_beta_std = 0.0;   // optional perturbation study knobs
  double initial_omega_std = 0.0;
  std::string source_text;         // verbatim scenario file, echoed into run outputs
};

/// Parse a scenario file (YAML). Unknown keys are rejected.
Scenario load_scenario(const std::string& file_path);

/// Check the cross-field invariants; throws std::invalid_argument on failure.
void validate(const Scenario& s);

/// Instantiate the reference path with enough tail for the whole run.
std::shared_ptr<const ReferencePath> build_path(const Scenario& s);

/// Start pose: on the path at s = 0, heading along the tangent, beta = omega = 0
/// (plus any seeded perturbation), at the configured initial speed.
VehicleState initial_state(const Scenario& s, const ReferencePath& path);

/// Steering solver configuration for the scenario; the saturation-proximity
/// threshold defaults from the rear-axle friction budget.
InverseTireConfig actuator_config(const Scenario& s);

}  // namespace driftsim
