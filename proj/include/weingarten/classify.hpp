// Orbit endpoint taxonomy, the canonical axis-meeting example, boundedness
// certification over sweeps of rotational orbits, and the sphere verdict.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "weingarten/errors.hpp"
#include "weingarten/integrator.hpp"
#include "weingarten/linearcmp.hpp"
#include "weingarten/relation.hpp"

namespace weingarten {

enum class EndpointClass {
  RegularAxis,
  AxisBlowUp,
  CurveSingularity,
  GammaBounce,
  EquatorCrossing,
  Periodic,
  BudgetExhausted,
};

inline const char* to_string(EndpointClass c) {
  switch (c) {
    case EndpointClass::RegularAxis: return "regular_axis";
    case EndpointClass::AxisBlowUp: return "axis_blowup";
    case EndpointClass::CurveSingularity: return "curve_singularity";
    case EndpointClass::GammaBounce: return "gamma_bounce";
    case EndpointClass::EquatorCrossing: return "equator_crossing";
    case EndpointClass::Periodic: return "periodic";
    case EndpointClass::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

inline constexpr double kRegularAxisTol = 1e-4;

namespace detail {

/// Distance of x to the nearer pole.
inline double pole_distance(double x) { return std::min(x, std::numbers::pi - x); }

/// Least-squares slope of log|lambda - alpha| against log(pole distance)
/// over the last decade of pole distance, read from the dense output at 17
/// log-spaced distances. NaN when the orbit does not cover the decade.
inline double last_decade_slope(const Orbit& o, double alpha) {
  const ProfileState& end = o.terminal();
  const double d_end = pole_distance(end.x);
  const double speed = std::max(std::abs(std::cos(end.theta)), 1e-3);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = 0; k <= 16; ++k) {
    const double target = d_end * std::pow(10.0, k / 16.0);
    const auto st = k == 0 ? std::optional<ProfileState>(end) : o.state_at(end.s - (target - d_end) / speed);
    if (!st) break;
    const double d = pole_distance(st->x);
    const double dl = std::abs(st->lambda() - alpha);
    if (!(d > 0.0) || !(dl > 0.0)) continue;
    const double lx = std::log(d), ly = std::log(dl);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

inline EndpointClass axis_blowup_checked(const ProfileState& end, const WeingartenRelation& rel) {
  if (end.lambda() < 0.0 && rel.finite_b()) {
    throw Unclassified("lambda -> -inf at the axis with finite b");
  }
  return EndpointClass::AxisBlowUp;
}

}  // namespace detail

/// Maps an integrator termination and the terminal asymptotics to an
/// endpoint class. Throws Unclassified rather than guessing.
inline EndpointClass classify_termination(const Orbit& orbit, const WeingartenRelation& rel) {
  if (orbit.empty()) throw EmptyOrbit("cannot classify an empty orbit");
  const ProfileState& end = orbit.terminal();
  const double lam = end.lambda();
  switch (orbit.termination) {
    case Termination::AxisNorth:
    case Termination::AxisSouth: {
      if (std::abs(lam - rel.alpha()) < kRegularAxisTol) return EndpointClass::RegularAxis;
      if (rel.finite_b() && std::abs(lam - rel.b()) < kRegularAxisTol) {
        throw Unclassified("lambda -> b at an axis");
      }
      const double slope = detail::last_decade_slope(orbit, rel.alpha());
      if (std::isfinite(slope) && slope <= -0.5) return detail::axis_blowup_checked(end, rel);
      throw Unclassified("axis approach with lambda = " + expr::detail::format_number(lam) +
                         " neither umbilic nor blowing up");
    }
    case Termination::LambdaBlowUp: {
      if (detail::pole_distance(end.x) >= 1e-2) throw Unclassified("curvature blow-up away from the axis");
      return detail::axis_blowup_checked(end, rel);
    }
    case Termination::CurveSingularity: {
      if (!rel.finite_b()) throw Unclassified("curve singularity without a finite b");
      if (detail::pole_distance(end.x) < 1e-2) throw Unclassified("lambda -> b at an axis");
      return EndpointClass::CurveSingularity;
    }
    case Termination::Periodic: return EndpointClass::Periodic;
    case Termination::GammaLimit: return EndpointClass::GammaBounce;
    case Termination::BudgetExhausted: return EndpointClass::BudgetExhausted;
    case Termination::StepSizeUnderflow: throw Unclassified("step size underflow");
  }
  throw Unclassified("unknown termination");
}

struct CanonicalExample {
  Orbit orbit;                       ///< from the North pole up to the first Gamma hit or terminal event
  std::optional<EndpointClass> endpoint;
  std::string endpoint_note;         ///< Unclassified diagnostic, if any
  bool compact = false;
  bool singular = false;
  bool gamma_closed = false;         ///< closed by reflection at a Gamma hit
  double closure_gap = std::numeric_limits<double>::infinity();
  double sup_lambda = 0.0;
  double sup_mu = 0.0;
  double sup_t = 0.0;
  double umbilic_constant = 0.0;     ///< max |lambda - alpha| / s^2 on s <= 0.01
  double terminal_s = 0.0;
};

namespace detail {

inline void fill_suprema(const Orbit& o, const FoldedRelation& f, double& sup_l, double& sup_m, double& sup_t) {
  for (const auto& st : o.samples) {
    const double l = st.lambda();
    sup_l = std::max(sup_l, std::abs(l));
    if (l > f.b()) sup_m = std::max(sup_m, std::abs(f(l)));
    sup_t = std::max(sup_t, std::abs(st.t));
  }
}

/// Residual of the reflection identity across the Gamma point at sg:
/// x(sg + d) = x(sg - d), t(sg + d) + t(sg - d) = 2 t(sg),
/// theta(sg + d) = pi - theta(sg - d), over the part of the incoming orbit
/// with x at least half of x(sg) away from the axis.
inline double gamma_reflection_residual(const Orbit& incoming, const FoldedRelation& f, const IntegratorControls& c,
                                        int probes = 64) {
  const ProfileState g = incoming.terminal();
  const double dg = pole_distance(g.x);
  double window = 0.0;
  for (auto it = incoming.samples.rbegin(); it != incoming.samples.rend(); ++it) {
    if (pole_distance(it->x) < 0.5 * dg) break;
    window = g.s - it->s;
  }
  if (!(window > 0.0)) return std::numeric_limits<double>::infinity();
  IntegratorControls cc = c;
  cc.max_gamma_events = 0;
  cc.detect_periodic = false;
  cc.s_budget = window;
  const Orbit out = integrate(g, f, cc);
  const double reach = out.terminal().s - g.s;
  double worst = 0.0;
  for (int i = 1; i <= probes; ++i) {
    const double d = std::min(window, reach) * i / probes;
    const auto a = incoming.state_at(g.s - d);
    const auto b = out.state_at(g.s + d);
    if (!a || !b) return std::numeric_limits<double>::infinity();
    worst = std::max({worst, std::abs(b->x - a->x), std::abs(b->t + a->t - 2.0 * g.t),
                      std::abs(wrap_angle(b->theta - (std::numbers::pi - a->theta)))});
  }
  return worst;
}

}  // namespace detail

/// The rotational profile leaving the North pole orthogonally, integrated
/// to its first Gamma hit (where the reflected double closes it up at the
/// same axis) or to a terminal event.
inline CanonicalExample build_canonical(const WeingartenRelation& rel, IntegratorControls c = {}) {
  const FoldedRelation f(rel);
  c.max_gamma_events = 1;
  c.detect_periodic = false;
  CanonicalExample ex;
  ex.orbit = integrate(axis_start(f, Pole::North), f, c);
  detail::fill_suprema(ex.orbit, f, ex.sup_lambda, ex.sup_mu, ex.sup_t);
  ex.terminal_s = ex.orbit.terminal().s;
  for (const auto& st : ex.orbit.samples) {
    if (st.s > 0.01) break;
    ex.umbilic_constant = std::max(ex.umbilic_constant, std::abs(st.lambda() - rel.alpha()) / (st.s * st.s));
  }

  try {
    ex.endpoint = classify_termination(ex.orbit, rel);
  } catch (const Unclassified& e) {
    ex.endpoint_note = e.what();
  }
  if (ex.orbit.termination == Termination::GammaLimit) {
    ex.gamma_closed = true;
    ex.closure_gap = detail::gamma_reflection_residual(ex.orbit, f, c);
    ex.compact = ex.closure_gap < 1e-6;
  } else if (ex.endpoint == EndpointClass::RegularAxis && ex.orbit.termination == Termination::AxisSouth) {
    // Arrival at the South pole along the umbilic germ theta = -alpha (pi - x).
    const ProfileState& e = ex.orbit.terminal();
    const double x_gap = std::numbers::pi - e.x;
    ex.closure_gap = std::max(std::abs(e.lambda() - rel.alpha()), std::abs(wrap_angle(e.theta + rel.alpha() * x_gap)));
    ex.compact = ex.closure_gap < 1e-6;
  }
  ex.singular = ex.endpoint == EndpointClass::AxisBlowUp || ex.endpoint == EndpointClass::CurveSingularity;
  return ex;
}

/// The whole profile of a compact canonical example: the integrated arc
/// followed by its reflection across the Gamma point when the example closes
/// there. Other examples return the integrated samples unchanged.
inline std::vector<ProfileState> closed_profile(const CanonicalExample& ex) {
  std::vector<ProfileState> out = ex.orbit.samples;
  if (!ex.gamma_closed || out.empty()) return out;
  const ProfileState g = out.back();
  for (std::size_t i = out.size() - 1; i-- > 0;) {
    const ProfileState& p = ex.orbit.samples[i];
    out.push_back({2.0 * g.s - p.s, p.x, 2.0 * g.t - p.t, std::numbers::pi - p.theta});
  }
  return out;
}

// --- Sweeps ----------------------------------------------------------------

/// Initial conditions of a sweep, one rotational orbit each.
struct Sweep {
  std::vector<ProfileState> starts;

  /// x0 = k pi / (nx + 1), k = 1..nx; theta0 = -pi + (j + 1/2) 2 pi / ntheta.
  static Sweep grid(int nx = 10, int ntheta = 5) {
    Sweep s;
    for (int k = 1; k <= nx; ++k) {
      for (int j = 0; j < ntheta; ++j) {
        const double x = std::numbers::pi * k / (nx + 1);
        const double th = -std::numbers::pi + (j + 0.5) * 2.0 * std::numbers::pi / ntheta;
        s.starts.push_back({0.0, x, 0.0, th});
      }
    }
    std::sort(s.starts.begin(), s.starts.end(), [](const ProfileState& a, const ProfileState& b) {
      return a.x != b.x ? a.x < b.x : a.theta < b.theta;
    });
    return s;
  }
};

/// Worker count: WEINGARTEN_THREADS if set and positive, else the hardware
/// concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("WEINGARTEN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on worker_count() threads. Exceptions are
/// rethrown for the lowest failing index.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SweepOrbit {
  ProfileState start;
  Termination termination = Termination::BudgetExhausted;
  std::optional<EndpointClass> endpoint;
  std::string note;
  double sup_lambda = 0.0;
  double sup_mu = 0.0;
  double terminal_s = 0.0;
  int gamma_events = 0;
  int envelope_branches = 0;
  double envelope_worst = -std::numeric_limits<double>::infinity();
  bool envelope_pass = true;
};

struct CertificationReport {
  std::string relation;
  std::vector<SweepOrbit> orbits;
  double sup_lambda = 0.0;
  double sup_mu = 0.0;
  int envelope_branches = 0;
  double envelope_worst = -std::numeric_limits<double>::infinity();
  bool certified = false;
  std::vector<std::string> failures;
};

namespace detail {

/// Maximal runs of samples in the upper hemisphere along which x decreases
/// with s, stopping at the first crossing of lambda = alpha seen from the
/// run's far end. Returns (first, last) index pairs; first has the largest x.
inline std::vector<std::pair<std::size_t, std::size_t>> descending_branches(const Orbit& o, double alpha,
                                                                            std::size_t min_len = 5) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& sm = o.samples;
  std::size_t i = 0;
  while (i + 1 < sm.size()) {
    if (!(sm[i + 1].x < sm[i].x && sm[i].x < std::numbers::pi / 2)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < sm.size() && sm[j + 1].x < sm[j].x) ++j;
    // Keep the tail that stays on one side of alpha.
    std::size_t first = i;
    const bool end_above = sm[j].lambda() > alpha;
    for (std::size_t k = j; k > i; --k) {
      if ((sm[k - 1].lambda() > alpha) != end_above || sm[k - 1].lambda() == alpha) {
        first = k;
        break;
      }
    }
    if (j - first + 1 >= min_len && sm[first].lambda() != alpha) out.emplace_back(first, j);
    i = j + 1;
  }
  return out;
}

/// Orbit restricted to samples [first, last].
inline Orbit slice_orbit(const Orbit& o, std::size_t first, std::size_t last) {
  Orbit s;
  s.samples.assign(o.samples.begin() + static_cast<std::ptrdiff_t>(first),
                   o.samples.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  s.termination = o.termination;
  return s;
}

}  // namespace detail

struct CertifyOptions {
  IntegratorControls controls{};
  double near_axis = std::numbers::pi / 4;  ///< branches reaching x below this get an envelope check
  double envelope_slack = 1e-9;
  /// Sweep orbits are integrated with rtol at most this (atol 1e-2 times
  /// smaller). Affine relations sit exactly on their envelope, so the check
  /// only has the integrator's global error as headroom.
  double max_rtol = 1e-13;
};

/// Integrates every start of the sweep and records, per orbit, the endpoint
/// class, curvature suprema and the affine comparison envelope check of its
/// near-axis branches. `certified` is set when no orbit ends in an axis
/// blow-up or curve singularity, every orbit is classified and every
/// envelope holds.
inline CertificationReport certify_sweep(const WeingartenRelation& rel, const Sweep& sweep = Sweep::grid(),
                                         const CertifyOptions& opt = {}) {
  if (!rel.uniformly_elliptic()) throw NotElliptic("certification needs a uniformly elliptic relation");
  const FoldedRelation f(rel);
  const SlopeBounds sb = *rel.ellipticity();
  CertificationReport rep;
  rep.relation = rel.description();
  rep.orbits.resize(sweep.starts.size());
  IntegratorControls ctl = opt.controls;
  ctl.rtol = std::min(ctl.rtol, opt.max_rtol);
  ctl.atol = std::min(ctl.atol, 1e-2 * opt.max_rtol);

  parallel_for(sweep.starts.size(), [&](std::size_t i) {
    SweepOrbit& so = rep.orbits[i];
    so.start = sweep.starts[i];
    const Orbit o = integrate(so.start, f, ctl);
    so.termination = o.termination;
    so.terminal_s = o.terminal().s;
    so.gamma_events = static_cast<int>(o.gamma_events().size());
    double sup_t = 0.0;
    detail::fill_suprema(o, f, so.sup_lambda, so.sup_mu, sup_t);
    try {
      so.endpoint = classify_termination(o, rel);
    } catch (const Unclassified& e) {
      so.note = e.what();
    }
    for (const auto& [first, last] : detail::descending_branches(o, rel.alpha())) {
      if (!(o.samples[last].x < opt.near_axis)) continue;
      const Orbit branch = detail::slice_orbit(o, first, last);
      const EnvelopeReport er =
          envelope_report(f, branch, sb.lower, sb.upper, o.samples[first].phase(), opt.envelope_slack);
      ++so.envelope_branches;
      so.envelope_worst = std::max(so.envelope_worst, er.worst_excess);
      so.envelope_pass = so.envelope_pass && er.pass;
    }
  });

  for (const SweepOrbit& so : rep.orbits) {
    rep.sup_lambda = std::max(rep.sup_lambda, so.sup_lambda);
    rep.sup_mu = std::max(rep.sup_mu, so.sup_mu);
    rep.envelope_branches += so.envelope_branches;
    rep.envelope_worst = std::max(rep.envelope_worst, so.envelope_worst);
    std::ostringstream tag;
    tag.precision(17);
    tag << "start (x=" << so.start.x << ", theta=" << so.start.theta << "): ";
    if (!so.endpoint) {
      rep.failures.push_back(tag.str() + "unclassified: " + so.note);
    } else if (*so.endpoint == EndpointClass::AxisBlowUp || *so.endpoint == EndpointClass::CurveSingularity) {
      rep.failures.push_back(tag.str() + to_string(*so.endpoint));
    }
    if (!so.envelope_pass) {
      std::ostringstream m;
      m.precision(17);
      m << tag.str() << "envelope violated by " << so.envelope_worst;
      rep.failures.push_back(m.str());
    }
  }
  rep.certified = rep.failures.empty() && std::isfinite(rep.sup_lambda) && std::isfinite(rep.sup_mu);
  return rep;
}

/// certify_sweep that throws CertificationFailed listing offending orbits.
inline CertificationReport certify_bounded(const WeingartenRelation& rel, const Sweep& sweep = Sweep::grid(),
                                           const CertifyOptions& opt = {}) {
  CertificationReport rep = certify_sweep(rel, sweep, opt);
  if (!rep.certified) {
    std::string msg = "certification failed for " + rep.relation + ":";
    for (const auto& s : rep.failures) msg += "\n  " + s;
    throw CertificationFailed(msg);
  }
  return rep;
}

// --- Sphere verdict ----------------------------------------------------------

enum class Verdict { UniqueSphere, NoSphere };

inline const char* to_string(Verdict v) { return v == Verdict::UniqueSphere ? "UniqueSphere" : "NoSphere"; }

struct HopfReport {
  Verdict verdict = Verdict::NoSphere;
  CanonicalExample canonical;
  bool slice = false;                ///< the canonical example is S^2 x {0}
  bool dichotomy_holds = false;      ///< ends at (pi, alpha) or hits Gamma at finite s
  std::string dichotomy;             ///< "south_pole_umbilic", "gamma_hit" or "neither"
  std::optional<CertificationReport> certification;
};

struct HopfOptions {
  bool certify = true;
  CertifyOptions certify_options{};
};

/// Builds the canonical example of a uniformly elliptic relation and reports
/// UniqueSphere when it closes up, NoSphere otherwise. With certify set the
/// boundedness sweep runs first and its failure propagates.
inline HopfReport hopf_check(const WeingartenRelation& rel, const HopfOptions& opt = {}) {
  if (!rel.uniformly_elliptic()) throw NotElliptic("sphere verdict needs a uniformly elliptic relation");
  HopfReport rep;
  if (opt.certify) rep.certification = certify_bounded(rel, Sweep::grid(), opt.certify_options);
  rep.canonical = build_canonical(rel, opt.certify_options.controls);
  const CanonicalExample& c = rep.canonical;
  const bool budget_left = c.terminal_s < opt.certify_options.controls.s_budget;
  if (c.orbit.termination == Termination::AxisSouth && c.endpoint == EndpointClass::RegularAxis) {
    rep.dichotomy = "south_pole_umbilic";
    rep.dichotomy_holds = true;
  } else if (c.orbit.termination == Termination::GammaLimit && budget_left) {
    rep.dichotomy = "gamma_hit";
    rep.dichotomy_holds = true;
  } else {
    rep.dichotomy = "neither";
  }
  rep.slice = c.compact && c.sup_lambda < 1e-8 && c.sup_t < 1e-8;
  rep.verdict = c.compact && rep.dichotomy_holds ? Verdict::UniqueSphere : Verdict::NoSphere;
  return rep;
}

}  // namespace weingarten
