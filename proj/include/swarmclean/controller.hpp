#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <variant>

#include "swarmclean/geometry.hpp"
#include "swarmclean/rng.hpp"

namespace swarmclean {

/// Which closed form turns the sensed cue into a waiting time.
enum class WaitingFormula {
  Squared,  ///< omega_max * c^2 / (c^2 + 25000), peaks at 21.67 s for c = 255
  Literal,  ///< omega_max * c / (c^2 + 25000), peaks below 0.1 s
};

struct ControllerParams {
  double alpha = 2.0;
  double beta = 6.0;
  double omega_max = 30.0;
  double turn_min_deg = 90.0;
  double turn_max_deg = 180.0;
  double wheel_min = 0.0;
  double wheel_max = 10.0;
  /// Robot contacts are ignored for this long after a wait ends.
  double refractory_s = 2.0;
  /// Kinematic heading rate while turning in place.
  double turn_rate_deg_s = 180.0;
  WaitingFormula waiting_formula = WaitingFormula::Squared;

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (!(beta >= 0.0 && beta <= 10.0)) throw std::invalid_argument("beta must lie in [0, 10]");
    if (!(omega_max > 0.0)) throw std::invalid_argument("omega_max must be > 0");
    if (!(turn_min_deg >= 0.0 && turn_min_deg <= turn_max_deg))
      throw std::invalid_argument("turn range must satisfy 0 <= min <= max");
    if (!(wheel_min <= wheel_max)) throw std::invalid_argument("wheel clamp must satisfy min <= max");
    if (!(refractory_s >= 0.0)) throw std::invalid_argument("refractory_s must be >= 0");
    if (!(turn_rate_deg_s > 0.0)) throw std::invalid_argument("turn_rate_deg_s must be > 0");
  }
};

struct SensorReading {
  double left = 0.0;
  double right = 0.0;

  double mean() const { return 0.5 * (left + right); }
};

struct WheelCommand {
  double left = 0.0;
  double right = 0.0;

  friend bool operator==(const WheelCommand&, const WheelCommand&) = default;
};

// Controller states. Turn angles are signed degrees, positive counter-clockwise.
struct Forward {
  friend bool operator==(const Forward&, const Forward&) = default;
};
struct AvoidWall {
  double remaining_turn_deg = 0.0;
  friend bool operator==(const AvoidWall&, const AvoidWall&) = default;
};
struct Waiting {
  double remaining_s = 0.0;
  friend bool operator==(const Waiting&, const Waiting&) = default;
};
struct PostWaitTurn {
  double remaining_turn_deg = 0.0;
  friend bool operator==(const PostWaitTurn&, const PostWaitTurn&) = default;
};

using FsmState = std::variant<Forward, AvoidWall, Waiting, PostWaitTurn>;

struct ContactEvents {
  bool robot = false;
  bool wall = false;

  friend bool operator==(const ContactEvents&, const ContactEvents&) = default;
};

struct ControlOutput {
  FsmState state;
  WheelCommand wheels;
  /// In-place heading change applied this tick (radians, CCW positive).
  double heading_change_rad = 0.0;
  /// True on the tick a Waiting state expires.
  bool wait_ended = false;
};

inline double waiting_time(double mean_cue, const ControllerParams& params) {
  const double c = std::clamp(mean_cue, 0.0, 255.0);
  const double denom = c * c + 25000.0;
  switch (params.waiting_formula) {
    case WaitingFormula::Literal:
      return params.omega_max * c / denom;
    case WaitingFormula::Squared:
      break;
  }
  return params.omega_max * c * c / denom;
}

/// Differential steering toward the brighter sensor. Before clamping the two
/// wheels always sum to 2 * beta.
inline WheelCommand wheel_speeds(const SensorReading& reading, const ControllerParams& params) {
  const double diff = (reading.left - reading.right) / params.alpha;
  return {std::clamp(params.beta - diff, params.wheel_min, params.wheel_max),
          std::clamp(params.beta + diff, params.wheel_min, params.wheel_max)};
}

/// Signed turn in degrees: magnitude uniform in the configured range, direction
/// a fair coin drawn independently.
inline double random_turn(Rng& rng, const ControllerParams& params) {
  const double magnitude = rng.uniform(params.turn_min_deg, params.turn_max_deg);
  return rng.coin() ? magnitude : -magnitude;
}

namespace detail {

template <class TurnState>
ControlOutput continue_turn(const TurnState& turn, double dt, const ControllerParams& params) {
  const double step = params.turn_rate_deg_s * dt;
  const double remaining = turn.remaining_turn_deg;
  ControlOutput out;
  if (std::abs(remaining) <= step) {
    out.state = Forward{};
    out.heading_change_rad = deg_to_rad(remaining);
  } else {
    const double applied = std::copysign(step, remaining);
    out.state = TurnState{remaining - applied};
    out.heading_change_rad = deg_to_rad(applied);
  }
  return out;
}

}  // namespace detail

/// Advances one robot's behaviour by `dt` seconds.
///
/// Only Forward reacts to contacts; robot contact wins over wall contact.
/// Waiting and turning robots never translate. The waiting time is frozen at
/// the cue sensed when the contact happens.
inline ControlOutput step_fsm(const FsmState& state, const SensorReading& reading, ContactEvents events, double dt,
                              Rng& rng, const ControllerParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_fsm: dt must be > 0");
  return std::visit(
      [&](const auto& s) -> ControlOutput {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Forward>) {
          if (events.robot) return {Waiting{waiting_time(reading.mean(), params)}, {}, 0.0, false};
          if (events.wall) return {AvoidWall{random_turn(rng, params)}, {}, 0.0, false};
          return {Forward{}, wheel_speeds(reading, params), 0.0, false};
        } else if constexpr (std::is_same_v<S, Waiting>) {
          const double left = s.remaining_s - dt;
          if (left > 0.0) return {Waiting{left}, {}, 0.0, false};
          return {PostWaitTurn{random_turn(rng, params)}, {}, 0.0, true};
        } else {
          return detail::continue_turn(s, dt, params);
        }
      },
      state);
}

inline bool is_waiting(const FsmState& s) { return std::holds_alternative<Waiting>(s); }

}  // namespace swarmclean
