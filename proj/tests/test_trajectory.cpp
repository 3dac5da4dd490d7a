#include <doctest.h>

#include <cmath>
#include <random>

#include "driftsim/path.hpp"
#include "driftsim/tracking.hpp"

using namespace driftsim;

namespace {
const VehicleParams kVp{};

// Brute-force projection over a 1 mm arc-length grid.
double grid_search_projection(const Eigen::Vector2d& p, const ReferencePath& path, double lo,
                              double hi) {
  double best_s = lo;
  double best_d = (path.position(lo) - p).squaredNorm();
  for (double s = lo; s <= hi; s += 1e-3) {
    const double d = (path.position(s) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  return best_s;
}
}  // namespace

TEST_CASE("projection: on-path point, concentric offsets, sign convention") {
  const auto cw = make_circle_path({0, 0}, 0.0, 1.0 / 30.0, 400.0, 10.0);

  const Eigen::Vector2d on_path = cw->position(10.0);
  const ReferencePoint rp = project(on_path, *cw, 9.0);
  CHECK(rp.s == doctest::Approx(10.0).epsilon(1e-7));
  CHECK((rp.position - on_path).norm() == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));

  // Clockwise circle: the center sits to the right of the tangent, so a point
  // at larger radius is left of the path and carries e_d = +1.
  const Eigen::Vector2d center =
      cw->position(0.0) + 30.0 * Eigen::Vector2d{std::sin(0.0), -std::cos(0.0)};
  const double polar = M_PI / 3.0;
  const Eigen::Vector2d outside =
      center + 31.0 * (cw->position(30.0 * M_PI / 3.0) - center).normalized();
  (void)polar;
  const ReferencePoint rp_out = project(outside, *cw, 30.0 * M_PI / 3.0);
  CHECK(lateral_offset(outside, rp_out) == doctest::Approx(1.0).epsilon(1e-7));

  const Eigen::Vector2d inside =
      center + 29.0 * (cw->position(30.0 * M_PI / 3.0) - center).normalized();
  const ReferencePoint rp_in = project(inside, *cw, 30.0 * M_PI / 3.0);
  CHECK(lateral_offset(inside, rp_in) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("projection matches a 1 mm grid search near a spiral") {
  const auto spiral =
      make_linear_curvature_path({0, 0}, 0.3, -1.0 / 30.0, -1.0 / 18.0, 240.0, 300.0, 10.0);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> s_dist(15.0, 230.0);
  std::uniform_real_distribution<double> off(-2.5, 2.5);
  for (int i = 0; i < 40; ++i) {
    const double s_true = s_dist(rng);
    const double heading = spiral->heading(s_true);
    const Eigen::Vector2d normal{-std::sin(heading), std::cos(heading)};
    const Eigen::Vector2d tangent{std::cos(heading), std::sin(heading)};
    const Eigen::Vector2d p =
        spiral->position(s_true) + off(rng) * normal + 0.3 * off(rng) * tangent;

    const double hint = s_true + 0.3 * off(rng);
    const ReferencePoint rp = project(p, *spiral, hint);
    const double s_oracle = grid_search_projection(p, *spiral, s_true - 8.0, s_true + 8.0);
    CHECK(rp.s == doctest::Approx(s_oracle).scale(1.0).epsilon(2e-3));

    // Connecting vector orthogonal to the tangent at the foot point.
    const Eigen::Vector2d d = p - rp.position;
    if (d.norm() > 1e-3) {
      const Eigen::Vector2d tan_foot{std::cos(rp.heading), std::sin(rp.heading)};
      CHECK(std::abs(tan_foot.dot(d)) / d.norm() < 1e-6);
    }
  }
}

TEST_CASE("projection failure outside the search window") {
  const auto line = make_line_path({0, 0}, 0.0, 1000.0, 10.0);
  // Point near s = 500 but hinted at s = 100: no interior minimum within 20 m.
  CHECK_THROWS_AS(project({500.0, 3.0}, *line, 100.0), std::runtime_error);
}

TEST_CASE("tracking errors: zero case, tangential arithmetic, drift alignment, wrap") {
  const auto line = make_line_path({0, 0}, 0.0, 1000.0, 10.0);
  VehicleState s;
  s.v = 10.0;
  s.x_pos = 50.0;
  const ReferencePoint rp = project({s.x_pos, s.y_pos}, *line, 49.0);
  const TrackingError e0 = tracking_errors(s, rp, 0.0);
  CHECK(e0.e_d == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(e0.e_phi == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(e0.e_v == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(e0.e_omega == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  VehicleState s1 = s;
  s1.phi = 0.1;
  s1.beta = -0.6;
  CHECK(tracking_errors(s1, rp, 0.0).e_phi == doctest::Approx(-0.5).epsilon(1e-12));

  // Large sideslip with matching heading offset: the body slides along the path.
  VehicleState s2 = s;
  s2.beta = -35.0 * M_PI / 180.0;
  s2.phi = 35.0 * M_PI / 180.0;
  CHECK(tracking_errors(s2, rp, 0.0).e_phi == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  VehicleState s3 = s1;
  s3.phi += 2.0 * M_PI;
  CHECK(tracking_errors(s3, rp, 0.0).e_phi ==
        doctest::Approx(tracking_errors(s1, rp, 0.0).e_phi).epsilon(1e-9));
}

TEST_CASE("desired yaw rate: feedforward, golden value, singularity, gradient") {
  ReferencePoint ref;
  ref.curvature = 1.0 / 30.0;
  ref.speed = 10.0;
  const YawRateGains gains;

  CHECK(desired_yaw_rate(0.0, 0.0, ref, gains) ==
        doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

  // e_d = 2, e_phi = 0.1: frozen from a 40-digit evaluation.
  CHECK(desired_yaw_rate(2.0, 0.1, ref, gains) ==
        doctest::Approx(-0.66535863045643777).epsilon(1e-14));

  ReferencePoint singular = ref;
  singular.curvature = 0.5;
  CHECK_THROWS_AS(desired_yaw_rate(2.0, 0.0, singular, gains), std::invalid_argument);

  // Lateral-error sensitivity against central differences.
  const double h = 1e-6;
  for (double e_d : {-1.5, -0.2, 0.4, 2.2}) {
    for (double e_phi : {-0.4, 0.0, 0.3}) {
      const double num = (desired_yaw_rate(e_d + h, e_phi, ref, gains) -
                          desired_yaw_rate(e_d - h, e_phi, ref, gains)) /
                         (2.0 * h);
      const double denom = 1.0 - e_d * ref.curvature;
      const double analytic = -ref.curvature * ref.curvature * ref.speed * std::cos(e_phi) /
                                  (denom * denom) -
                              gains.k1;
      CHECK(num == doctest::Approx(analytic).epsilon(1e-6));
    }
  }
}

TEST_CASE("linearize: beta = 0 rows, straight-path sparsity, golden matrices") {
  ReferencePoint ref;
  ref.curvature = 1.0 / 30.0;
  ref.speed = 10.0;

  const LinearModel m0 = linearize(ref, 0.0, 10.0, kVp, 0.05);
  const double mv = kVp.m * 10.0;
  CHECK(m0.b_d(1, 0) == 0.0);
  CHECK(m0.b_d(1, 2) == doctest::Approx(0.05 / mv).epsilon(1e-15));
  CHECK(m0.b_d(1, 3) == doctest::Approx(0.05 / mv).epsilon(1e-15));
  CHECK(m0.b_d(2, 0) == doctest::Approx(0.05 / kVp.m).epsilon(1e-15));
  CHECK(m0.b_d(2, 2) == 0.0);

  ReferencePoint straight;
  straight.curvature = 0.0;
  straight.speed = 10.0;
  const LinearModel ms = linearize(straight, 0.0, 10.0, kVp, 0.05);
  Eigen::Matrix4d a_cont = (ms.a_d - Eigen::Matrix4d::Identity()) / 0.05;
  CHECK(a_cont(0, 1) == doctest::Approx(10.0).epsilon(1e-12));
  a_cont(0, 1) = 0.0;
  CHECK(a_cont.cwiseAbs().maxCoeff() == 0.0);

  // Table values at v = 10, beta = -0.6, kappa = 1/30, T = 0.05, frozen from
  // a 40-digit evaluation.
  const LinearModel mg = linearize(ref, -0.6, 10.0, kVp, 0.05);
  Eigen::Matrix4d a_exp;
  a_exp << 1.0, 0.5, 0.0, 0.0,
      5.5555555555555556e-4, 1.0, -1.6666666666666667e-3, 0.0,
      0.0, 0.0, 1.0, 0.0,
      0.0, 0.0, 0.0, 1.0;
  Eigen::Matrix4d b_exp;
  b_exp << 0.0, 0.0, 0.0, 0.0,
      1.7645077293594855e-6, 1.7645077293594855e-6, 2.5791737965927447e-6,
      2.5791737965927447e-6,
      2.5791737965927447e-5, 2.5791737965927447e-5, -1.7645077293594855e-5,
      -1.7645077293594855e-5,
      0.0, 0.0, 3.3025313984512267e-5, -6.1658098522808616e-5;
  CHECK((mg.a_d - a_exp).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((mg.b_d - b_exp).cwiseAbs().maxCoeff() < 1e-18);

  // Euler consistency: recover the continuous matrices to machine precision.
  CHECK(((mg.a_d - Eigen::Matrix4d::Identity()) / 0.05 - (a_exp - Eigen::Matrix4d::Identity()) / 0.05)
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK_THROWS_AS(linearize(ref, 0.0, 0.0, kVp, 0.05), std::invalid_argument);

  // Optional yaw-rate-error coupling lands in the documented slot.
  const LinearModel mc = linearize(ref, 0.0, 10.0, kVp, 0.05, true);
  CHECK(mc.a_d(1, 3) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(m0.a_d(1, 3) == 0.0);
}

TEST_CASE("paths: circle geometry, linear-curvature profile, tail continuation") {
  // Counterclockwise circle (negative curvature in this convention).
  const auto ccw = make_circle_path({0, 0}, 0.0, -1.0 / 30.0, 400.0, 10.0);
  const double quarter = 30.0 * M_PI / 2.0;
  CHECK(ccw->heading(quarter) == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
  CHECK(ccw->position(quarter).x() == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(ccw->position(quarter).y() == doctest::Approx(30.0).epsilon(1e-12));

  const auto spiral =
      make_linear_curvature_path({0, 0}, 0.0, -1.0 / 30.0, -1.0 / 18.0, 240.0, 400.0, 10.0);
  CHECK(spiral->curvature(0.0) == doctest::Approx(-1.0 / 30.0).epsilon(1e-12));
  CHECK(spiral->curvature(120.0) ==
        doctest::Approx(-0.5 * (1.0 / 30.0 + 1.0 / 18.0)).epsilon(1e-12));
  CHECK(spiral->curvature(240.0) == doctest::Approx(-1.0 / 18.0).epsilon(1e-12));
  CHECK(spiral->curvature(300.0) == doctest::Approx(-1.0 / 18.0).epsilon(1e-12));

  // Position is continuous and consistent across the blend/tail switch.
  const Eigen::Vector2d just_before = spiral->position(240.0 - 1e-6);
  const Eigen::Vector2d just_after = spiral->position(240.0 + 1e-6);
  CHECK((just_after - just_before).norm() < 1e-7 + 3e-6);

  // Arc-length parameterization: |dp/ds| = 1 numerically.
  for (double s : {10.0, 100.0, 200.0, 280.0}) {
    const Eigen::Vector2d d = spiral->position(s + 5e-4) - spiral->position(s - 5e-4);
    CHECK(d.norm() / 1e-3 == doctest::Approx(1.0).epsilon(1e-6));
  }
}
