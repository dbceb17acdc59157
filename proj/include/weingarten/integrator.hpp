// Arclength integration of rotational profile curves.
//
// The profile gamma(s) = (sin x, 0, cos x, t) is integrated in angle form
//
//   x' = cos(theta),  t' = sin(theta),  theta' = f(lambda),
//   lambda = sin(theta) cot(x),
//
// which is regular at the vertical-tangent curve Gamma and at the equator
// x = pi/2. The (x, lambda) phase orbit is derived from the samples.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "weingarten/errors.hpp"
#include "weingarten/ode.hpp"
#include "weingarten/phasespace.hpp"
#include "weingarten/relation.hpp"

namespace weingarten {

struct ProfileState {
  double s = 0.0;      ///< arclength
  double x = 0.0;      ///< colatitude
  double t = 0.0;      ///< height
  double theta = 0.0;  ///< tangent angle: x' = cos(theta), t' = sin(theta)

  /// lambda = sin(theta) cos(x) / sin(x); no tan, so finite at x = pi/2.
  double lambda() const { return std::sin(theta) * std::cos(x) / std::sin(x); }
  /// Sign of x' (the direction of the phase orbit).
  int epsilon() const { return std::cos(theta) >= 0.0 ? 1 : -1; }
  PhasePoint phase() const { return {x, lambda()}; }
};

/// (dx, dt, dtheta)/ds.
struct ProfileDerivative {
  double dx = 0.0;
  double dt = 0.0;
  double dtheta = 0.0;
};

/// Right-hand side of the profile system. Throws CurvatureDomainError when
/// lambda <= b and DomainError when x leaves (0, pi).
inline ProfileDerivative rhs(const ProfileState& st, const FoldedRelation& f) {
  if (!(st.x > 0.0 && st.x < std::numbers::pi)) throw DomainError("profile left (0, pi)");
  const double lam = st.lambda();
  if (!(lam > f.b())) throw CurvatureDomainError("lambda <= b");
  double mu;
  try {
    mu = f(lam);
  } catch (const OutOfRange& e) {
    throw CurvatureDomainError(e.what());
  }
  return {std::cos(st.theta), std::sin(st.theta), mu};
}

/// Angle reduced to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

enum class EventType {
  Gamma,                 ///< vertical tangent away from the equator (phase-space bounce)
  Equator,               ///< regular passage through x = pi/2
  GammaEquatorTangency,  ///< vertical tangent at the equator; left unclassified
  AxisNorth,
  AxisSouth,
  LambdaBlowUp,
  CurveSingularity,
};

inline const char* to_string(EventType e) {
  switch (e) {
    case EventType::Gamma: return "gamma";
    case EventType::Equator: return "equator";
    case EventType::GammaEquatorTangency: return "gamma_equator_tangency";
    case EventType::AxisNorth: return "axis_north";
    case EventType::AxisSouth: return "axis_south";
    case EventType::LambdaBlowUp: return "lambda_blowup";
    case EventType::CurveSingularity: return "curve_singularity";
  }
  return "?";
}

inline bool is_gamma(EventType e) { return e == EventType::Gamma || e == EventType::GammaEquatorTangency; }

/// Why integration stopped.
enum class Termination {
  AxisNorth,
  AxisSouth,
  LambdaBlowUp,
  CurveSingularity,
  Periodic,
  GammaLimit,
  BudgetExhausted,
  StepSizeUnderflow,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::AxisNorth: return "axis_north";
    case Termination::AxisSouth: return "axis_south";
    case Termination::LambdaBlowUp: return "lambda_blowup";
    case Termination::CurveSingularity: return "curve_singularity";
    case Termination::Periodic: return "periodic";
    case Termination::GammaLimit: return "gamma_limit";
    case Termination::BudgetExhausted: return "budget_exhausted";
    case Termination::StepSizeUnderflow: return "step_size_underflow";
  }
  return "?";
}

struct OrbitEvent {
  EventType type;
  ProfileState state;
};

struct IntegratorControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double delta_axis = 1e-7;   ///< axis approach: x < delta or x > pi - delta
  double lambda_max = 1e6;    ///< curvature blow-up threshold (|lambda| or f(lambda))
  double delta_b = 1e-7;      ///< curve-singularity approach: lambda - b < delta
  double s_budget = 1e3;      ///< maximum arclength
  double h_init = 1e-4;
  double h_min = 1e-14;
  double event_tol = 1e-12;   ///< event localization in s
  double closed_tol = 1e-8;   ///< periodicity match at Gamma events
  bool detect_periodic = true;
  int max_gamma_events = 0;   ///< stop after this many Gamma events (0 = never)
  std::size_t max_steps = 5'000'000;
};

/// A sampled profile curve. Samples are the accepted step endpoints (plus
/// the truncated terminal state); `steps` keeps the dense interpolant of
/// every accepted step so the curve can be evaluated at any s.
struct Orbit {
  std::vector<ProfileState> samples;
  std::vector<OrbitEvent> events;
  std::vector<ode::DenseStep<3>> steps;
  Termination termination = Termination::BudgetExhausted;

  const ProfileState& start() const { return samples.front(); }
  const ProfileState& terminal() const { return samples.back(); }
  bool empty() const { return samples.empty(); }

  std::optional<ProfileState> state_at(double s) const {
    if (samples.empty() || s < start().s || s > terminal().s) return std::nullopt;
    if (steps.empty()) return start();
    auto it = std::upper_bound(steps.begin(), steps.end(), s,
                               [](double v, const ode::DenseStep<3>& st) { return v < st.s0; });
    if (it != steps.begin()) --it;
    const auto y = it->eval(s);
    return ProfileState{s, y[0], y[1], y[2]};
  }

  std::vector<PhasePoint> phase_trace() const {
    std::vector<PhasePoint> out;
    out.reserve(samples.size());
    for (const auto& st : samples) out.push_back(st.phase());
    return out;
  }

  std::vector<OrbitEvent> gamma_events() const {
    std::vector<OrbitEvent> out;
    for (const auto& e : events) {
      if (is_gamma(e.type)) out.push_back(e);
    }
    return out;
  }
};

enum class Pole { North, South };

/// Series germ of the profile leaving `pole` orthogonally to the axis, at
/// arclength s0: x = s0, theta = alpha s0, t = alpha s0^2 / 2 (mirrored for
/// the South pole). Truncation error is O(s0^3).
inline ProfileState axis_start(const FoldedRelation& f, Pole pole, double s0 = 1e-6) {
  const double a = f.alpha();
  if (pole == Pole::North) return {s0, s0, 0.5 * a * s0 * s0, a * s0};
  return {s0, std::numbers::pi - s0, -0.5 * a * s0 * s0, std::numbers::pi + a * s0};
}

namespace detail {

struct EventSpec {
  EventType type;
  bool terminal;
};

inline ode::Vec<3> to_vec(const ProfileState& st) { return {st.x, st.t, st.theta}; }

inline double lambda_of(const ode::Vec<3>& y) {
  const double s = std::sin(y[0]);
  return std::sin(y[2]) * std::cos(y[0]) / s;
}

class EventSet {
 public:
  EventSet(const FoldedRelation& f, const IntegratorControls& c) : f_(f), c_(c) {
    specs_ = {{EventType::Gamma, false},
              {EventType::Equator, false},
              {EventType::AxisNorth, true},
              {EventType::AxisSouth, true},
              {EventType::LambdaBlowUp, true}};
    if (f.relation().finite_b()) specs_.push_back({EventType::CurveSingularity, true});
  }

  const std::vector<EventSpec>& specs() const { return specs_; }

  double value(std::size_t i, const ode::Vec<3>& y) const {
    constexpr double pi = std::numbers::pi;
    switch (specs_[i].type) {
      case EventType::Gamma: return std::cos(y[2]);
      case EventType::Equator: return y[0] - pi / 2;
      case EventType::AxisNorth: return y[0] - c_.delta_axis;
      case EventType::AxisSouth: return (pi - c_.delta_axis) - y[0];
      case EventType::LambdaBlowUp: {
        if (!(std::sin(y[0]) > 0.0)) return -1.0;
        return c_.lambda_max - std::abs(lambda_of(y));
      }
      case EventType::CurveSingularity: {
        if (!(std::sin(y[0]) > 0.0)) return 1.0;
        const double lam = lambda_of(y);
        if (!(lam > f_.b())) return -1.0;
        double mu;
        try {
          mu = f_(lam);
        } catch (const Error&) {
          return -1.0;
        }
        return std::min(lam - f_.b() - c_.delta_b, c_.lambda_max - mu);
      }
      default: return 1.0;
    }
  }

  std::vector<double> values(const ode::Vec<3>& y) const {
    std::vector<double> v(specs_.size());
    for (std::size_t i = 0; i < specs_.size(); ++i) v[i] = value(i, y);
    return v;
  }

 private:
  const FoldedRelation& f_;
  const IntegratorControls& c_;
  std::vector<EventSpec> specs_;
};

}  // namespace detail

/// Integrates the profile system from `start` with adaptive Dormand-Prince
/// 5(4) steps, logging Gamma/equator events and stopping at the first
/// terminal condition (axis approach, curvature blow-up, curve singularity,
/// periodic return, Gamma-event limit, or arclength budget).
inline Orbit integrate(const ProfileState& start, const FoldedRelation& f, const IntegratorControls& c = {}) {
  constexpr double pi = std::numbers::pi;
  Orbit orbit;
  orbit.samples.push_back(start);

  auto ode_rhs = [&f](double, const ode::Vec<3>& y, ode::Vec<3>& dy) {
    const ProfileDerivative d = rhs({0.0, y[0], y[1], y[2]}, f);
    dy = {d.dx, d.dt, d.dtheta};
  };
  ode::StepControls sc;
  sc.rtol = c.rtol;
  sc.atol = c.atol;
  sc.h_min = c.h_min;

  detail::EventSet ev(f, c);
  ode::Vec<3> y = detail::to_vec(start);
  ode::Vec<3> k1;
  ode_rhs(start.s, y, k1);
  std::vector<double> prev = ev.values(y);

  double s = start.s;
  const double s_end = start.s + c.s_budget;
  double h = c.h_init;
  int gamma_count = 0;

  struct Found {
    double s;
    std::size_t idx;
  };

  for (std::size_t n = 0;; ++n) {
    if (n >= c.max_steps || s >= s_end) {
      orbit.termination = Termination::BudgetExhausted;
      return orbit;
    }
    h = std::min(h, s_end - s);
    const auto tr = ode::dopri5_trial<3>(ode_rhs, s, y, k1, h, sc);
    if (!tr.ok || tr.err > 1.0) {
      h = tr.ok ? ode::next_step(h, tr.err, false) : 0.25 * h;
      if (h < c.h_min) {
        orbit.termination = Termination::StepSizeUnderflow;
        return orbit;
      }
      continue;
    }

    const std::vector<double> cur = ev.values(tr.y1);
    std::vector<Found> found;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double v0 = prev[i], v1 = cur[i];
      const bool terminal = ev.specs()[i].terminal;
      const bool crossed = terminal ? (v0 > 0.0 && v1 <= 0.0)
                                    : ((v0 > 0.0 && v1 <= 0.0) || (v0 < 0.0 && v1 >= 0.0));
      if (!crossed) continue;
      double lo = s, hi = s + h;
      while (hi - lo > c.event_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double vm = ev.value(i, tr.dense.eval(mid));
        const bool same_side = terminal ? vm > 0.0 : ((vm > 0.0) == (v0 > 0.0) && vm != 0.0);
        (same_side ? lo : hi) = mid;
      }
      found.push_back({terminal ? hi : 0.5 * (lo + hi), i});
    }
    std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.s < b.s; });

    std::optional<std::pair<double, Termination>> stop;
    for (const Found& fe : found) {
      const auto yy = tr.dense.eval(fe.s);
      const ProfileState st{fe.s, yy[0], yy[1], yy[2]};
      EventType type = ev.specs()[fe.idx].type;
      if (!ev.specs()[fe.idx].terminal) {
        if (type == EventType::Gamma && std::abs(st.x - pi / 2) < 1e-6) type = EventType::GammaEquatorTangency;
        if (type == EventType::Equator && std::abs(std::cos(st.theta)) < 1e-6) type = EventType::GammaEquatorTangency;
        if (is_gamma(type)) {
          ++gamma_count;
          if (c.detect_periodic) {
            for (const auto& pe : orbit.events) {
              if (is_gamma(pe.type) && std::abs(pe.state.x - st.x) <= c.closed_tol &&
                  std::abs(wrap_angle(pe.state.theta - st.theta)) <= c.closed_tol) {
                stop = {fe.s, Termination::Periodic};
                break;
              }
            }
          }
          if (!stop && c.max_gamma_events > 0 && gamma_count >= c.max_gamma_events) {
            stop = {fe.s, Termination::GammaLimit};
          }
        }
        orbit.events.push_back({type, st});
        if (stop) break;
        continue;
      }
      orbit.events.push_back({type, st});
      Termination t = Termination::BudgetExhausted;
      switch (type) {
        case EventType::AxisNorth: t = Termination::AxisNorth; break;
        case EventType::AxisSouth: t = Termination::AxisSouth; break;
        case EventType::LambdaBlowUp: t = Termination::LambdaBlowUp; break;
        case EventType::CurveSingularity: t = Termination::CurveSingularity; break;
        default: break;
      }
      stop = {fe.s, t};
      break;
    }

    orbit.steps.push_back(tr.dense);
    if (stop) {
      const auto yy = tr.dense.eval(stop->first);
      orbit.samples.push_back({stop->first, yy[0], yy[1], yy[2]});
      orbit.termination = stop->second;
      return orbit;
    }
    s += h;
    y = tr.y1;
    k1 = tr.k7;
    prev = cur;
    orbit.samples.push_back({s, y[0], y[1], y[2]});
    h = std::min(ode::next_step(h, tr.err, true), 0.1);
  }
}

/// The antipodal-axis image: x -> pi - x, t -> -t, theta -> theta + pi.
/// It keeps lambda and solves the same system.
inline ProfileState mirror(const ProfileState& st) {
  return {st.s, std::numbers::pi - st.x, -st.t, st.theta + std::numbers::pi};
}

inline Orbit mirror(const Orbit& o) {
  constexpr double pi = std::numbers::pi;
  Orbit m;
  m.samples.reserve(o.samples.size());
  for (const auto& st : o.samples) m.samples.push_back(mirror(st));
  for (const auto& e : o.events) {
    EventType t = e.type;
    if (t == EventType::AxisNorth) t = EventType::AxisSouth;
    else if (t == EventType::AxisSouth) t = EventType::AxisNorth;
    m.events.push_back({t, mirror(e.state)});
  }
  m.steps = o.steps;
  for (auto& d : m.steps) {
    d.r[0][0] = pi - d.r[0][0];
    d.r[0][1] = -d.r[0][1];
    d.r[0][2] = d.r[0][2] + pi;
    for (int k = 1; k < 5; ++k) {
      d.r[k][0] = -d.r[k][0];
      d.r[k][1] = -d.r[k][1];
    }
  }
  m.termination = o.termination;
  if (o.termination == Termination::AxisNorth) m.termination = Termination::AxisSouth;
  else if (o.termination == Termination::AxisSouth) m.termination = Termination::AxisNorth;
  return m;
}

}  // namespace weingarten
