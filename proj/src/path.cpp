#include "driftsim/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace driftsim {

namespace {

// Displacement along a constant-curvature segment of length s starting with
// heading phi0 (heading'(s) = -kappa).
Eigen::Vector2d arc_displacement(double phi0, double kappa, double s) {
  if (std::abs(kappa) < 1e-12) {
    return {s * std::cos(phi0), s * std::sin(phi0)};
  }
  const double phi1 = phi0 - kappa * s;
  return {(std::sin(phi0) - std::sin(phi1)) / kappa, (std::cos(phi1) - std::cos(phi0)) / kappa};
}

class LinePath final : public ReferencePath {
 public:
  LinePath(Eigen::Vector2d origin, double heading0, double length, double speed)
      : origin_(std::move(origin)), heading0_(heading0), length_(length), speed_(speed) {}

  double length() const override { return length_; }
  double curvature(double) const override { return 0.0; }
  double heading(double) const override { return heading0_; }
  double speed(double) const override { return speed_; }
  Eigen::Vector2d position(double s) const override {
    return origin_ + s * Eigen::Vector2d{std::cos(heading0_), std::sin(heading0_)};
  }

 private:
  Eigen::Vector2d origin_;
  double heading0_, length_, speed_;
};

class CirclePath final : public ReferencePath {
 public:
  CirclePath(Eigen::Vector2d origin, double heading0, double kappa, double length, double speed)
      : origin_(std::move(origin)), heading0_(heading0), kappa_(kappa), length_(length),
        speed_(speed) {}

  double length() const override { return length_; }
  double curvature(double) const override { return kappa_; }
  double speed(double) const override { return speed_; }
  double heading(double s) const override { return heading0_ - kappa_ * s; }
  Eigen::Vector2d position(double s) const override {
    return origin_ + arc_displacement(heading0_, kappa_, s);
  }

 private:
  Eigen::Vector2d origin_;
  double heading0_, kappa_, length_, speed_;
};

// Linear curvature blend followed by a constant-curvature tail. Positions on
// the blend have no closed form; they are precomputed on a fine grid and the
// remainder integrated with Simpson's rule on the exact heading profile.
class LinearCurvaturePath final : public ReferencePath {
 public:
  LinearCurvaturePath(Eigen::Vector2d origin, double heading0, double kappa_start,
                      double kappa_end, double arc_length, double total_length, double speed)
      : origin_(std::move(origin)), heading0_(heading0), k0_(kappa_start), k1_(kappa_end),
        arc_length_(arc_length), length_(std::max(total_length, arc_length)), speed_(speed) {
    if (arc_length <= 0.0) {
      throw std::invalid_argument("linear curvature path needs a positive arc length");
    }
    const int n = static_cast<int>(std::ceil(arc_length_ / kGridStep));
    grid_step_ = arc_length_ / n;
    grid_.reserve(n + 1);
    grid_.push_back({0.0, 0.0});
    Eigen::Vector2d p{0.0, 0.0};
    for (int i = 0; i < n; ++i) {
      p += simpson_displacement(i * grid_step_, grid_step_);
      grid_.push_back(p);
    }
    tail_pos_ = origin_ + grid_.back();
    tail_heading_ = blend_heading(arc_length_);
  }

  double length() const override { return length_; }
  double speed(double) const override { return speed_; }

  double curvature(double s) const override {
    s = std::clamp(s, 0.0, arc_length_);
    return k0_ + (k1_ - k0_) * s / arc_length_;
  }

  double heading(double s) const override {
    if (s <= arc_length_) return blend_heading(std::max(s, 0.0));
    return tail_heading_ - k1_ * (s - arc_length_);
  }

  Eigen::Vector2d position(double s) const override {
    if (s <= 0.0) return origin_ + s * Eigen::Vector2d{std::cos(heading0_), std::sin(heading0_)};
    if (s >= arc_length_) {
      return tail_pos_ + arc_displacement(tail_heading_, k1_, s - arc_length_);
    }
    const int i = std::min(static_cast<int>(s / grid_step_), static_cast<int>(grid_.size()) - 2);
    return origin_ + grid_[i] + simpson_displacement(i * grid_step_, s - i * grid_step_);
  }

 private:
  static constexpr double kGridStep = 0.05;  // [m]

  // heading(s) on the blend: heading0 - integral of curvature.
  double blend_heading(double s) const {
    return heading0_ - (k0_ * s + 0.5 * (k1_ - k0_) * s * s / arc_length_);
  }

  Eigen::Vector2d simpson_displacement(double s0, double ds) const {
    const double h0 = blend_heading(s0);
    const double hm = blend_heading(s0 + 0.5 * ds);
    const double h1 = blend_heading(s0 + ds);
    return ds / 6.0 *
           Eigen::Vector2d{std::cos(h0) + 4.0 * std::cos(hm) + std::cos(h1),
                           std::sin(h0) + 4.0 * std::sin(hm) + std::sin(h1)};
  }

  Eigen::Vector2d origin_;
  double heading0_, k0_, k1_, arc_length_, length_, speed_;
  double grid_step_ = kGridStep;
  std::vector<Eigen::Vector2d> grid_;
  Eigen::Vector2d tail_pos_{0.0, 0.0};
  double tail_heading_ = 0.0;
};

}  // namespace

std::shared_ptr<const ReferencePath> make_line_path(Eigen::Vector2d origin, double heading0,
                                                    double length, double speed) {
  return std::make_shared<LinePath>(std::move(origin), heading0, length, speed);
}

std::shared_ptr<const ReferencePath> make_circle_path(Eigen::Vector2d origin, double heading0,
                                                      double curvature, double length,
                                                      double speed) {
  return std::make_shared<CirclePath>(std::move(origin), heading0, curvature, length, speed);
}

std::shared_ptr<const ReferencePath> make_linear_curvature_path(
    Eigen::Vector2d origin, double heading0, double kappa_start, double kappa_end,
    double arc_length, double total_length, double speed) {
  return std::make_shared<LinearCurvaturePath>(std::move(origin), heading0, kappa_start,
                                               kappa_end, arc_length, total_length, speed);
}

ReferencePoint project(const Eigen::Vector2d& position, const ReferencePath& path,
                       double s_hint) {
  constexpr double kWindow = 20.0;
  constexpr double kCoarseStep = 0.5;

  const double lo = std::max(0.0, s_hint - kWindow);
  const double hi = std::min(path.length(), s_hint + kWindow);
  if (lo >= hi) {
    throw std::runtime_error("project: search hint outside the path extent");
  }

  auto dist2 = [&](double s) { return (path.position(s) - position).squaredNorm(); };

  const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / kCoarseStep)));
  const double h = (hi - lo) / n;
  int best = 0;
  double best_d = dist2(lo);
  for (int i = 1; i <= n; ++i) {
    const double d = dist2(lo + i * h);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }

  const bool at_path_start = (best == 0 && lo == 0.0);
  const bool at_path_end = (best == n && hi == path.length());
  if ((best == 0 || best == n) && !at_path_start && !at_path_end) {
    throw std::runtime_error("project: no distance minimum bracketed within 20 m of the hint");
  }

  double sa = lo + (best - 1) * h;
  double sb = lo + best * h;
  double sc = lo + (best + 1) * h;
  if (at_path_start) sa = sb;
  if (at_path_end) sc = sb;

  // Parabolic refinement through (sa, sb, sc); falls back to a golden-style
  // shrink when the parabola degenerates.
  double fa = dist2(sa), fb = dist2(sb), fc = dist2(sc);
  for (int it = 0; it < 80 && sc - sa > 1e-9; ++it) {
    const double denom = (sa - sb) * (fb - fc) - (sb - sc) * (fa - fb);
    double sm;
    if (std::abs(denom) > 1e-30) {
      sm = sb + 0.5 *
                    ((sb - sa) * (sb - sa) * (fb - fc) - (sb - sc) * (sb - sc) * (fb - fa)) /
                    ((sb - sa) * (fb - fc) + (sb - sc) * (fb - fa));
    } else {
      sm = 0.5 * (sa + sc);
    }
    if (!(sm > sa && sm < sc) || sm == sb) {
      sm = (sb - sa > sc - sb) ? 0.5 * (sa + sb) : 0.5 * (sb + sc);
    }
    const double fm = dist2(sm);
    if (fm <= fb) {
      if (sm < sb) {
        sc = sb;
        fc = fb;
      } else {
        sa = sb;
        fa = fb;
      }
      sb = sm;
      fb = fm;
    } else {
      if (sm < sb) {
        sa = sm;
        fa = fm;
      } else {
        sc = sm;
        fc = fm;
      }
    }
  }
  return path.point(sb);
}

double lateral_offset(const Eigen::Vector2d& position, const ReferencePoint& ref) {
  const Eigen::Vector2d left_normal{-std::sin(ref.heading), std::cos(ref.heading)};
  return left_normal.dot(position - ref.position);
}

}  // namespace driftsim
