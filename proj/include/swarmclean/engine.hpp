#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swarmclean/controller.hpp"
#include "swarmclean/cue_field.hpp"
#include "swarmclean/geometry.hpp"
#include "swarmclean/metrics.hpp"
#include "swarmclean/rng.hpp"

namespace swarmclean {

struct SimConfig {
  int n_robots = 30;
  ControllerParams controller{};

  double arena_cm = 285.0;
  double cells_per_cm = 1.0;
  double cue_radius_cm = 111.35;
  double cue_peak = 255.0;

  long duration_s = 4000;
  double dt = 0.1;
  std::uint64_t seed = 1;

  double body_radius_cm = 4.0;
  double wheel_base_cm = 8.0;
  /// Linear speed per wheel unit; 6 units give 8 cm/s.
  double cm_per_s_per_unit = 4.0 / 3.0;
  /// Centre-to-centre robot detection distance.
  double contact_range_cm = 10.0;
  /// Body-edge-to-wall detection distance.
  double wall_range_cm = 2.0;
  double metric_radius_cm = 70.0;

  /// Whole seconds at which a copy of the field is kept.
  std::vector<long> snapshot_times{};

  Vec2 cue_center() const { return {arena_cm / 2.0, arena_cm / 2.0}; }

  long ticks_per_second() const { return std::lround(1.0 / dt); }

  void validate() const {
    controller.validate();
    if (n_robots < 0) throw std::invalid_argument("n_robots must be >= 0");
    if (!(dt > 0.0 && dt <= 1.0)) throw std::invalid_argument("dt must lie in (0, 1]");
    if (std::abs(1.0 / dt - static_cast<double>(ticks_per_second())) > 1e-9)
      throw std::invalid_argument("dt must divide one second evenly");
    if (duration_s < 0) throw std::invalid_argument("duration_s must be >= 0");
    if (!(body_radius_cm > 0.0)) throw std::invalid_argument("body_radius_cm must be > 0");
    if (!(arena_cm > 2.0 * body_radius_cm)) throw std::invalid_argument("arena too small for one robot");
    if (!(wheel_base_cm > 0.0)) throw std::invalid_argument("wheel_base_cm must be > 0");
    if (!(cm_per_s_per_unit > 0.0)) throw std::invalid_argument("cm_per_s_per_unit must be > 0");
    if (!(contact_range_cm >= 0.0 && wall_range_cm >= 0.0)) throw std::invalid_argument("ranges must be >= 0");
    if (!(metric_radius_cm >= 0.0)) throw std::invalid_argument("metric_radius_cm must be >= 0");
    if (!(cue_radius_cm > 0.0)) throw std::invalid_argument("cue_radius_cm must be > 0");
    if (!(cue_peak > 0.0 && cue_peak <= kMaxIntensity)) throw std::invalid_argument("cue_peak must lie in (0, 255]");
    for (long t : snapshot_times)
      if (t < 0 || t > duration_s) throw std::invalid_argument("snapshot time outside [0, duration]");
  }
};

struct Pose {
  Vec2 position;
  double heading = 0.0;  ///< radians in (-pi, pi], 0 along +x

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Robot {
  int id = 0;
  Pose pose;
  FsmState state = Forward{};
  WheelCommand command{};
  double refractory_s = 0.0;
  long cleanings = 0;
  Rng rng{0};
};

struct Motion {
  double linear_cm_s = 0.0;
  double angular_rad_s = 0.0;
};

/// Unicycle mapping from wheel units to body velocities.
inline Motion speed_conversion(WheelCommand cmd, double cm_per_s_per_unit, double wheel_base_cm) {
  return {cm_per_s_per_unit * (cmd.left + cmd.right) / 2.0,
          cm_per_s_per_unit * (cmd.right - cmd.left) / wheel_base_cm};
}

inline Motion speed_conversion(WheelCommand cmd, const SimConfig& cfg) {
  return speed_conversion(cmd, cfg.cm_per_s_per_unit, cfg.wheel_base_cm);
}

/// Ground sensors beneath the left and right wheels.
inline std::pair<Vec2, Vec2> sensor_positions(const Pose& pose, double wheel_base_cm) {
  const Vec2 lateral{-std::sin(pose.heading), std::cos(pose.heading)};
  const Vec2 offset = (wheel_base_cm / 2.0) * lateral;
  return {pose.position + offset, pose.position - offset};
}

inline SensorReading read_sensors(const CueField& field, const Pose& pose, double wheel_base_cm) {
  const auto [left, right] = sensor_positions(pose, wheel_base_cm);
  return {field.sample(left), field.sample(right)};
}

inline Vec2 clamp_to_arena(Vec2 p, double arena_cm, double body_radius_cm) {
  return {std::clamp(p.x, body_radius_cm, arena_cm - body_radius_cm),
          std::clamp(p.y, body_radius_cm, arena_cm - body_radius_cm)};
}

/// Frontal contact sensing. Another robot counts when its centre is within
/// contact range and no more than 90 degrees off the heading; a wall counts
/// when the body edge is closer than the wall range and the robot faces it.
/// Robot contacts are suppressed while the refractory timer runs.
inline ContactEvents detect_events(const Robot& self, std::span<const Robot> robots, const SimConfig& cfg) {
  ContactEvents ev;
  const Vec2 facing = unit_from_heading(self.pose.heading);
  if (self.refractory_s <= 0.0) {
    for (const Robot& other : robots) {
      if (other.id == self.id) continue;
      const Vec2 rel = other.pose.position - self.pose.position;
      if (norm(rel) <= cfg.contact_range_cm && dot(rel, facing) >= 0.0) {
        ev.robot = true;
        break;
      }
    }
  }
  const Vec2 p = self.pose.position;
  const double r = cfg.body_radius_cm;
  const double w = cfg.arena_cm;
  struct Wall {
    double edge_gap;
    Vec2 outward;
  };
  const Wall walls[] = {{p.x - r, {-1.0, 0.0}}, {w - r - p.x, {1.0, 0.0}}, {p.y - r, {0.0, -1.0}},
                        {w - r - p.y, {0.0, 1.0}}};
  for (const Wall& wall : walls) {
    if (wall.edge_gap < cfg.wall_range_cm && dot(facing, wall.outward) > 0.0) {
      ev.wall = true;
      break;
    }
  }
  return ev;
}

/// Explicit Euler step of the unicycle model followed by the arena clamp.
/// `extra_turn_rad` carries kinematic in-place rotation.
inline Pose integrate(const Pose& pose, WheelCommand cmd, double dt, const SimConfig& cfg,
                      double extra_turn_rad = 0.0) {
  const Motion m = speed_conversion(cmd, cfg);
  Pose next = pose;
  next.position.x += m.linear_cm_s * std::cos(pose.heading) * dt;
  next.position.y += m.linear_cm_s * std::sin(pose.heading) * dt;
  next.heading = wrap_angle(pose.heading + m.angular_rad_s * dt + extra_turn_rad);
  next.position = clamp_to_arena(next.position, cfg.arena_cm, cfg.body_radius_cm);
  return next;
}

/// Pushes overlapping bodies apart along their centre line, half each.
inline void separate_overlaps(std::span<Robot> robots, const SimConfig& cfg) {
  const double min_gap = 2.0 * cfg.body_radius_cm;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    for (std::size_t j = i + 1; j < robots.size(); ++j) {
      Vec2& a = robots[i].pose.position;
      Vec2& b = robots[j].pose.position;
      const Vec2 rel = b - a;
      const double d = norm(rel);
      if (d >= min_gap) continue;
      const Vec2 dir = d > 0.0 ? (1.0 / d) * rel : Vec2{1.0, 0.0};
      const double push = (min_gap - d) / 2.0;
      a = clamp_to_arena(a - push * dir, cfg.arena_cm, cfg.body_radius_cm);
      b = clamp_to_arena(b + push * dir, cfg.arena_cm, cfg.body_radius_cm);
    }
  }
}

/// Uniform non-overlapping placement with uniform headings, drawn from the
/// placement substream of `cfg.seed`.
inline std::vector<Robot> place_robots(const SimConfig& cfg) {
  constexpr int kMaxAttempts = 100000;
  Rng placement(cfg.seed, kPlacementStream);
  std::vector<Robot> robots;
  robots.reserve(static_cast<std::size_t>(cfg.n_robots));
  const double lo = cfg.body_radius_cm;
  const double hi = cfg.arena_cm - cfg.body_radius_cm;
  for (int i = 0; i < cfg.n_robots; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Vec2 p{placement.uniform(lo, hi), placement.uniform(lo, hi)};
      const bool clear = std::none_of(robots.begin(), robots.end(), [&](const Robot& r) {
        return distance(r.pose.position, p) < 2.0 * cfg.body_radius_cm;
      });
      if (!clear) continue;
      Robot robot;
      robot.id = i;
      robot.pose = {p, wrap_angle(placement.uniform(-std::numbers::pi, std::numbers::pi))};
      robot.rng = Rng(cfg.seed, kRobotStreamBase + static_cast<std::uint64_t>(i));
      robots.push_back(std::move(robot));
      placed = true;
    }
    if (!placed)
      throw std::invalid_argument("cannot place " + std::to_string(cfg.n_robots) + " robots without overlap");
  }
  return robots;
}

struct Snapshot {
  long t = 0;
  CueField field;
};

/// Whole simulation state advanced in fixed ticks.
///
/// Each tick reads sensors, detects contacts on the pre-tick poses, steps every
/// controller, then integrates. On each whole-second boundary every waiting
/// robot cleans once and a metrics record is appended.
class World {
 public:
  explicit World(SimConfig cfg)
      : cfg_(std::move(cfg)),
        field_((cfg_.validate(), init_circular_gradient(cfg_.arena_cm, cfg_.arena_cm, cfg_.cue_center(),
                                                        cfg_.cue_radius_cm, cfg_.cue_peak, cfg_.cells_per_cm))),
        robots_(place_robots(cfg_)),
        ticks_per_second_(cfg_.ticks_per_second()) {
    initial_ = measure(0);
    maybe_snapshot(0);
  }

  const SimConfig& config() const { return cfg_; }
  const CueField& field() const { return field_; }
  std::span<const Robot> robots() const { return robots_; }
  long ticks() const { return ticks_; }
  long seconds() const { return ticks_ / ticks_per_second_; }
  bool finished() const { return seconds() >= cfg_.duration_s; }
  const MetricsRecord& initial() const { return initial_; }
  const MetricsSeries& series() const { return series_; }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }

  std::vector<Vec2> positions() const {
    std::vector<Vec2> out;
    out.reserve(robots_.size());
    for (const Robot& r : robots_) out.push_back(r.pose.position);
    return out;
  }

  MetricsRecord measure(long t) const {
    const auto pos = positions();
    return {t, field_.mean_intensity(), ratio_within(pos, cfg_.cue_center(), cfg_.metric_radius_cm),
            coherency(pos)};
  }

  void tick() {
    const std::size_t n = robots_.size();
    readings_.resize(n);
    events_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      readings_[i] = read_sensors(field_, robots_[i].pose, cfg_.wheel_base_cm);
      events_[i] = detect_events(robots_[i], robots_, cfg_);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Robot& r = robots_[i];
      ControlOutput out = step_fsm(r.state, readings_[i], events_[i], cfg_.dt, r.rng, cfg_.controller);
      r.state = out.state;
      r.command = out.wheels;
      r.refractory_s = std::max(0.0, r.refractory_s - cfg_.dt);
      if (out.wait_ended) r.refractory_s = cfg_.controller.refractory_s;
      r.pose = integrate(r.pose, r.command, cfg_.dt, cfg_, out.heading_change_rad);
    }
    separate_overlaps(robots_, cfg_);
    ++ticks_;
    if (ticks_ % ticks_per_second_ == 0) on_second(ticks_ / ticks_per_second_);
  }

  void run() {
    while (!finished()) tick();
  }

 private:
  void on_second(long t) {
    for (Robot& r : robots_) {
      if (is_waiting(r.state)) {
        field_.apply_cleaning(r.pose.position);
        ++r.cleanings;
      }
    }
    series_.push_back(measure(t));
    maybe_snapshot(t);
  }

  void maybe_snapshot(long t) {
    if (std::find(cfg_.snapshot_times.begin(), cfg_.snapshot_times.end(), t) != cfg_.snapshot_times.end())
      snapshots_.push_back({t, field_});
  }

  SimConfig cfg_;
  CueField field_;
  std::vector<Robot> robots_;
  long ticks_per_second_;
  long ticks_ = 0;
  MetricsRecord initial_{};
  MetricsSeries series_;
  std::vector<Snapshot> snapshots_;
  std::vector<SensorReading> readings_;
  std::vector<ContactEvents> events_;
};

struct SimResult {
  MetricsRecord initial;
  MetricsSeries series;
  CueField final_field;
  std::vector<Snapshot> snapshots;
};

inline SimResult run_simulation(const SimConfig& cfg) {
  World world(cfg);
  world.run();
  return {world.initial(), world.series(), world.field(), world.snapshots()};
}

}  // namespace swarmclean
