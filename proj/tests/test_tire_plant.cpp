#include <doctest.h>

#include <cmath>
#include <random>

#include "driftsim/actuator.hpp"
#include "driftsim/plant.hpp"
#include "driftsim/tire.hpp"
#include "support/oracles.hpp"

using namespace driftsim;

namespace {
const VehicleParams kVp{};
const TireParams kTp{};

VehicleState random_state(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VehicleState s;
  s.beta = 0.6 * u(rng);
  s.omega = 0.8 * u(rng);
  s.v = 8.0 + 4.0 * u(rng);
  s.phi = 2.0 * u(rng);
  s.x_pos = 10.0 * u(rng);
  s.y_pos = 10.0 * u(rng);
  return s;
}
}  // namespace

TEST_CASE("lateral force curve: zero, golden value, saturation, oddness") {
  CHECK(lateral_tire_force(0.0, 9000.0, 1.0, kTp) == 0.0);

  // alpha = 0.05 rad, F_z = 9000 N, mu = 1: frozen from a 40-digit evaluation
  // of the curve formula.
  CHECK(lateral_tire_force(0.05, 9000.0, 1.0, kTp) ==
        doctest::Approx(-6741.22042850827).epsilon(1e-12));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> alpha_dist(-1.5, 1.5);
  for (int i = 0; i < 2000; ++i) {
    const double a = alpha_dist(rng);
    const double f = lateral_tire_force(a, 9000.0, 1.0, kTp);
    CHECK(std::abs(f) <= 9000.0 + 1e-9);
    CHECK(lateral_tire_force(-a, 9000.0, 1.0, kTp) == doctest::Approx(-f).epsilon(1e-12));
  }

  // The curve reaches the full friction budget at a finite slip angle.
  const double alpha_peak = std::tan(M_PI / (2.0 * kTp.c_shape)) / kTp.b_stiff;
  CHECK(lateral_tire_force(alpha_peak, 9000.0, 1.0, kTp) ==
        doctest::Approx(9000.0).epsilon(1e-12));
  CHECK(alpha_peak < 0.0);  // negative-stiffness sign convention
}

TEST_CASE("slip angles: straight rolling, golden kinematics, steering cancellation") {
  VehicleState s;
  s.v = 10.0;
  auto [af0, ar0] = slip_angles(s, {}, kVp);
  CHECK(af0 == 0.0);
  CHECK(ar0 == 0.0);

  s.omega = 0.33;
  auto [af, ar] = slip_angles(s, {}, kVp);
  // atan(a*omega/v), atan(-b*omega/v) frozen from a 40-digit evaluation.
  CHECK(af == doctest::Approx(0.033482482243981216).epsilon(1e-14));
  CHECK(ar == doctest::Approx(-0.062453673733205119).epsilon(1e-14));

  s.beta = 0.2;
  const double cancel = axle_velocity_angle(s, kVp.a);
  auto [af_c, ar_c] = slip_angles(s, {cancel, 0.0}, kVp);
  CHECK(af_c == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(ar_c != 0.0);

  s.v = 0.0;
  CHECK_THROWS_AS(slip_angles(s, {}, kVp), std::invalid_argument);
}

TEST_CASE("plant derivatives: force-free, pure longitudinal, yaw moment golden") {
  VehicleState s;
  s.v = 10.0;
  s.omega = 0.4;
  const StateDerivative d0 = plant_derivatives(s, {}, kVp);
  CHECK(d0.beta_dot == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(d0.omega_dot == 0.0);
  CHECK(d0.v_dot == 0.0);

  VehicleState s1;
  s1.v = 10.0;
  const StateDerivative d1 = plant_derivatives(s1, {800.0, 800.0, 0.0, 0.0}, kVp);
  CHECK(d1.v_dot == doctest::Approx(1.0).epsilon(1e-15));

  // (a*2000 - b*1000) / I_z, frozen from a 40-digit evaluation.
  const StateDerivative d2 = plant_derivatives(s1, {0.0, 0.0, 2000.0, 1000.0}, kVp);
  CHECK(d2.omega_dot == doctest::Approx(0.087850588924318345).epsilon(1e-14));

  VehicleState bad;
  bad.v = -1.0;
  CHECK_THROWS_AS(plant_derivatives(bad, {}, kVp), std::invalid_argument);
}

TEST_CASE("plant derivatives agree with finite differences of a fine integration") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> fu(-3000.0, 3000.0);
  for (int trial = 0; trial < 20; ++trial) {
    const VehicleState s = random_state(rng);
    const AxleForceCommand u{fu(rng), fu(rng), fu(rng), fu(rng)};
    const StateDerivative d = plant_derivatives(s, u, kVp);

    const double h = 1e-4;
    const VehicleState fwd = testing::integrate_fixed_forces(s, u, kVp, h, 20);
    const VehicleState bwd = testing::integrate_fixed_forces(s, u, kVp, -h, 20);
    auto central = [&](double a, double b) { return (a - b) / (2.0 * h); };

    CHECK(central(fwd.beta, bwd.beta) == doctest::Approx(d.beta_dot).epsilon(1e-6));
    CHECK(central(fwd.omega, bwd.omega) == doctest::Approx(d.omega_dot).epsilon(1e-6));
    CHECK(central(fwd.v, bwd.v) == doctest::Approx(d.v_dot).epsilon(1e-6));
    CHECK(central(fwd.phi, bwd.phi) == doctest::Approx(d.phi_dot).epsilon(1e-6));
    CHECK(central(fwd.x_pos, bwd.x_pos) == doctest::Approx(d.x_dot).epsilon(1e-6));
    CHECK(central(fwd.y_pos, bwd.y_pos) == doctest::Approx(d.y_dot).epsilon(1e-6));
  }
}

TEST_CASE("kinetic energy rate identity") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> fu(-5000.0, 5000.0);
  for (int trial = 0; trial < 50; ++trial) {
    const VehicleState s = random_state(rng);
    const AxleForceCommand u{fu(rng), fu(rng), fu(rng), fu(rng)};
    const StateDerivative d = plant_derivatives(s, u, kVp);
    const double energy_rate = kVp.m * s.v * d.v_dot;
    const double power = s.v * ((u.fxf + u.fxr) * std::cos(s.beta) +
                                (u.fyf + u.fyr) * std::sin(s.beta));
    CHECK(energy_rate == doctest::Approx(power).epsilon(1e-9));
  }
}

TEST_CASE("tire/body rotations: identity, quarter turn, round trip") {
  auto [fx0, fy0] = tire_to_body_forces(123.0, -456.0, 0.0);
  CHECK(fx0 == 123.0);
  CHECK(fy0 == -456.0);

  auto [fx1, fy1] = tire_to_body_forces(0.0, 1000.0, M_PI / 2.0);
  CHECK(fx1 == doctest::Approx(-1000.0).epsilon(1e-12));
  CHECK(fy1 == doctest::Approx(0.0).scale(1000.0).epsilon(1e-12));

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> f(-9000.0, 9000.0);
  std::uniform_real_distribution<double> ang(-M_PI / 2.0, M_PI / 2.0);
  for (int i = 0; i < 500; ++i) {
    const double fx = f(rng), fy = f(rng), delta = ang(rng);
    const auto [bx, by] = tire_to_body_forces(fx, fy, delta);
    const auto [tx, ty] = body_to_tire_forces(bx, by, delta);
    CHECK(tx == doctest::Approx(fx).scale(9000.0).epsilon(1e-12));
    CHECK(ty == doctest::Approx(fy).scale(9000.0).epsilon(1e-12));
  }
}

TEST_CASE("static axle loads: symmetry, golden split, force balance") {
  VehicleParams sym = kVp;
  sym.a = sym.b = 1.4;
  const AxleLoads eq = static_axle_loads(sym);
  CHECK(eq.f_zf == doctest::Approx(eq.f_zr).epsilon(1e-15));

  // m*g*b/(a+b) and m*g*a/(a+b), frozen from a 40-digit evaluation.
  const AxleLoads loads = static_axle_loads(kVp);
  CHECK(loads.f_zf == doctest::Approx(10221.27835051546).epsilon(1e-13));
  CHECK(loads.f_zr == doctest::Approx(5474.721649484536).epsilon(1e-13));
  CHECK(loads.f_zf + loads.f_zr == doctest::Approx(kVp.m * kVp.g).epsilon(1e-12));
  CHECK(loads.f_zf > 0.0);
  CHECK(loads.f_zr > 0.0);
}

TEST_CASE("realized forces stay on or inside the friction circle") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> steer(-0.6, 0.6);
  std::uniform_real_distribution<double> torque(-4000.0, 4000.0);
  const AxleLoads loads = static_axle_loads(kVp);
  for (int i = 0; i < 300; ++i) {
    const VehicleState s = random_state(rng);
    const RealizedForces rf = realized_axle_forces(s, {steer(rng), steer(rng)},
                                                   {torque(rng), torque(rng)}, kVp, kTp);
    CHECK(std::hypot(rf.front.fx, rf.front.fy) <= kVp.mu * loads.f_zf * (1.0 + 1e-9));
    CHECK(std::hypot(rf.rear.fx, rf.rear.fy) <= kVp.mu * loads.f_zr * (1.0 + 1e-9));
  }
}

TEST_CASE("step: coasting preserves speed exactly and tracks a straight line") {
  VehicleState s;
  s.v = 10.0;
  VehicleState next = s;
  for (int i = 0; i < 200; ++i) next = step(next, {}, {}, kVp, kTp, 0.005);
  CHECK(next.v == 10.0);
  CHECK(next.beta == 0.0);
  CHECK(next.omega == 0.0);
  CHECK(next.y_pos == 0.0);
  CHECK(next.x_pos == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("step: velocity floor crossing is diagnosed") {
  VehicleState s;
  s.v = 0.6;
  // Hard braking torque drives v through the floor within a few steps.
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 100; ++i) s = step(s, {}, {-500.0, -500.0}, kVp, kTp, 0.01);
      }(),
      ModelValidityError);
}

TEST_CASE("step: fourth-order convergence on a drift transient") {
  // Torque kept small enough that the friction-circle clip (a kink in the
  // force law) never engages over this window.
  auto simulate = [&](double dt) {
    VehicleState s;
    s.v = 10.0;
    const SteeringAngles st{6.0 * M_PI / 180.0, -6.0 * M_PI / 180.0};
    const AxleTorques tq{100.0, 100.0};
    const int n = static_cast<int>(std::round(1.0 / dt));
    for (int i = 0; i < n; ++i) s = step(s, st, tq, kVp, kTp, dt);
    return s;
  };
  const VehicleState a = simulate(0.01);
  const VehicleState b = simulate(0.005);
  const VehicleState c = simulate(0.0025);
  auto diff = [](const VehicleState& x, const VehicleState& y) {
    return std::sqrt(std::pow(x.beta - y.beta, 2) + std::pow(x.omega - y.omega, 2) +
                     std::pow(x.v - y.v, 2) + std::pow(x.phi - y.phi, 2) +
                     std::pow(x.x_pos - y.x_pos, 2) + std::pow(x.y_pos - y.y_pos, 2));
  };
  const double order = std::log2(diff(a, b) / diff(b, c));
  CHECK(order >= 3.5);
}

TEST_CASE("double-step maneuver: sideslip changes sign while yaw rate keeps sign") {
  VehicleState s;
  s.v = 10.0;
  const double dt = 0.005;
  double beta_max_phase1 = -1e9;
  double beta_final = 0.0;
  double omega_min_after_spinup = 1e9;
  bool spun_up = false;
  for (int k = 0; k < 1000; ++k) {
    const double t = k * dt;
    SteeringAngles st;
    AxleTorques tq;
    if (t >= 1.0) {
      st = {6.0 * M_PI / 180.0, -6.0 * M_PI / 180.0};
      tq = {300.0, 300.0};
    }
    if (t >= 2.5) st.delta_f = -3.0 * M_PI / 180.0;  // counter-steer
    s = step(s, st, tq, kVp, kTp, dt);
    if (t >= 1.0 && t < 2.5) beta_max_phase1 = std::max(beta_max_phase1, s.beta);
    if (s.omega > 0.05) spun_up = true;
    if (spun_up) omega_min_after_spinup = std::min(omega_min_after_spinup, s.omega);
    beta_final = s.beta;
  }
  CHECK(beta_max_phase1 > 1e-3);          // sideslip first swings positive...
  CHECK(beta_final < -0.05);              // ...then settles negative after counter-steer
  CHECK(omega_min_after_spinup > 0.0);    // while the yaw rate never flips
}
