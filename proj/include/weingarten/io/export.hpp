// Exporters: orbit CSV, phase portrait SVG, surface mesh OBJ and JSON
// reports. Every float is written with 17 significant digits so identical
// runs produce identical bytes.
#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "weingarten/classify.hpp"
#include "weingarten/errors.hpp"
#include "weingarten/integrator.hpp"
#include "weingarten/linearcmp.hpp"
#include "weingarten/phasespace.hpp"

namespace weingarten::io {

/// Shortest decimal form that reads back to the same double.
inline std::string fmt_shortest(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// --- CSV ---------------------------------------------------------------------

/// Samples and events merged by arclength; event rows carry the event name.
inline void write_orbit_csv(std::ostream& os, const std::vector<ProfileState>& samples,
                            const std::vector<OrbitEvent>& events, const FoldedRelation& f) {
  os << "s,x,t,theta,lambda,mu,event_flag\n";
  auto row = [&](const ProfileState& st, const char* flag) {
    const double lam = st.lambda();
    const double mu = lam > f.b() ? f(lam) : std::nan("");
    os << fmt_shortest(st.s) << ',' << fmt_shortest(st.x) << ',' << fmt_shortest(st.t) << ',' << fmt_shortest(st.theta) << ',' << fmt_shortest(lam)
       << ',' << fmt_shortest(mu) << ',' << flag << '\n';
  };
  std::size_t e = 0;
  for (const auto& st : samples) {
    while (e < events.size() && events[e].state.s <= st.s) {
      row(events[e].state, to_string(events[e].type));
      ++e;
    }
    row(st, "");
  }
  for (; e < events.size(); ++e) row(events[e].state, to_string(events[e].type));
}

inline void write_envelope_csv(std::ostream& os, const EnvelopeReport& rep) {
  os << "y,lambda_numeric,lambda_lower,lambda_upper\n";
  for (const auto& s : rep.samples) {
    os << fmt_shortest(s.y) << ',' << fmt_shortest(s.lambda) << ',' << fmt_shortest(s.lower) << ',' << fmt_shortest(s.upper) << '\n';
  }
}

/// dlambda/dx on an nx-by-nl grid of (0, pi) x [-lambda_view, lambda_view],
/// restricted to points strictly inside the phase space.
inline void write_slope_field_csv(std::ostream& os, const FoldedRelation& f, int nx, int nl, double lambda_view) {
  os << "x,lambda,slope\n";
  for (int i = 1; i <= nx; ++i) {
    const double x = std::numbers::pi * i / (nx + 1);
    for (int j = 0; j < nl; ++j) {
      const double lam = -lambda_view + 2.0 * lambda_view * j / std::max(nl - 1, 1);
      const Region r = classify_point({x, lam}, f.b());
      if (r != Region::R0 && r != Region::R0star) continue;
      os << fmt_shortest(x) << ',' << fmt_shortest(lam) << ',' << fmt_shortest(slope_field(f, {x, lam})) << '\n';
    }
  }
}

// --- SVG ---------------------------------------------------------------------

struct PortraitView {
  double lambda_view = 5.0;
  int width = 800;
  int height = 600;
};

namespace detail {

class SvgCanvas {
 public:
  explicit SvgCanvas(PortraitView v) : v_(v) {}

  bool inside(double x, double lam) const {
    return x >= 0.0 && x <= std::numbers::pi && std::abs(lam) <= v_.lambda_view;
  }
  double px(double x) const { return x / std::numbers::pi * v_.width; }
  double py(double lam) const { return 0.5 * v_.height * (1.0 - lam / v_.lambda_view); }

  /// Path through the in-view points; leaving the view starts a new subpath.
  std::string path(const std::vector<std::pair<double, double>>& pts) const {
    std::string d;
    bool pen = false;
    for (const auto& [x, lam] : pts) {
      if (!std::isfinite(lam) || !inside(x, lam)) {
        pen = false;
        continue;
      }
      d += pen ? " L" : (d.empty() ? "M" : " M");
      d += fmt_shortest(px(x)) + ' ' + fmt_shortest(py(lam));
      pen = true;
    }
    return d;
  }

 private:
  PortraitView v_;
};

}  // namespace detail

/// Phase portrait in the (x, lambda) plane with x in [0, pi] and lambda in
/// [-lambda_view, lambda_view]: both Gamma branches (lambda = +-cot x),
/// Upsilon, the umbilic line lambda = alpha, and the given orbits.
inline std::string portrait_svg(const FoldedRelation& f, const std::vector<Orbit>& orbits, PortraitView view = {},
                                int upsilon_samples = 400) {
  const detail::SvgCanvas cv(view);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << view.width << "\" height=\"" << view.height
     << "\" viewBox=\"0 0 " << view.width << ' ' << view.height << "\">\n";
  os << "<title>" << f.relation().description() << "</title>\n";
  os << "<desc>x in [0, pi], lambda in [" << fmt_shortest(-view.lambda_view) << ", " << fmt_shortest(view.lambda_view)
     << "]</desc>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const int n = std::max(upsilon_samples, 2);
  for (int sign : {1, -1}) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= n; ++i) {
      const double x = std::numbers::pi * i / (n + 1);
      pts.emplace_back(x, sign * std::cos(x) / std::sin(x));
    }
    os << "<path class=\"gamma\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" d=\"" << cv.path(pts)
       << "\"/>\n";
  }
  {
    const UpsilonCurve ups(f);
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, h] : ups.sample(n)) pts.emplace_back(x, h);
    os << "<path class=\"upsilon\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\" d=\""
       << cv.path(pts) << "\"/>\n";
  }
  os << "<path class=\"umbilic\" fill=\"none\" stroke=\"#7f8c8d\" stroke-width=\"0.75\" d=\""
     << cv.path({{0.0, f.alpha()}, {std::numbers::pi, f.alpha()}}) << "\"/>\n";
  for (const auto& o : orbits) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& st : o.samples) pts.emplace_back(st.x, st.lambda());
    os << "<path class=\"orbit\" fill=\"none\" stroke=\"#2471a3\" stroke-width=\"0.75\" d=\"" << cv.path(pts)
       << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// --- Mesh --------------------------------------------------------------------

enum class Chart {
  Cylinder,  ///< (sin x cos phi, sin x sin phi, t): drops the cos x coordinate
  Exp,       ///< e^t (sin x cos phi, sin x sin phi, cos x): a diffeomorphism onto R^3 \ {0}
};

struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> faces;  ///< 0-based
  bool degenerate = false;                ///< the chart image is flat (t = 0 everywhere in the cylinder chart)
  int caps = 0;                           ///< rings closed because they sit on an axis
};

/// Surface of revolution of a profile: one ring of `resolution` vertices
/// per sample. End rings within `cap_tol` of an axis are closed with a
/// triangulation of the ring itself, so no vertices are added.
inline Mesh build_mesh(const std::vector<ProfileState>& profile, int resolution, Chart chart = Chart::Cylinder,
                       double cap_tol = 1e-4) {
  if (profile.empty()) throw EmptyOrbit("cannot mesh an empty orbit");
  if (resolution < 3) throw OutOfRange("mesh resolution must be at least 3");
  Mesh m;
  const int r = resolution;
  const int n = static_cast<int>(profile.size());
  m.vertices.reserve(static_cast<std::size_t>(n) * r);
  bool flat = true;
  for (const auto& st : profile) {
    if (std::abs(st.t) > 1e-12) flat = false;
    for (int j = 0; j < r; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / r;
      const double rho = std::sin(st.x);
      if (chart == Chart::Cylinder) {
        m.vertices.push_back({rho * std::cos(phi), rho * std::sin(phi), st.t});
      } else {
        const double e = std::exp(st.t);
        m.vertices.push_back({e * rho * std::cos(phi), e * rho * std::sin(phi), e * std::cos(st.x)});
      }
    }
  }
  m.degenerate = chart == Chart::Cylinder && flat;
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < r; ++j) {
      const int a = i * r + j, b = i * r + (j + 1) % r, c = (i + 1) * r + j, d = (i + 1) * r + (j + 1) % r;
      m.faces.push_back({a, b, d});
      m.faces.push_back({a, d, c});
    }
  }
  auto on_axis = [&](const ProfileState& st) { return weingarten::detail::pole_distance(st.x) < cap_tol; };
  if (n >= 2 && on_axis(profile.front())) {
    for (int j = 1; j + 1 < r; ++j) m.faces.push_back({0, j + 1, j});
    ++m.caps;
  }
  if (n >= 2 && on_axis(profile.back())) {
    const int base = (n - 1) * r;
    for (int j = 1; j + 1 < r; ++j) m.faces.push_back({base, base + j, base + j + 1});
    ++m.caps;
  }
  return m;
}

struct MeshTopology {
  long vertices = 0;
  long edges = 0;
  long faces = 0;
  long boundary_edges = 0;    ///< edges with a single incident face
  long nonmanifold_edges = 0;  ///< edges with more than two incident faces
  long euler() const { return vertices - edges + faces; }
  bool closed() const { return boundary_edges == 0 && nonmanifold_edges == 0; }
};

inline MeshTopology topology(const Mesh& m) {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& f : m.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  MeshTopology t;
  t.vertices = static_cast<long>(m.vertices.size());
  t.faces = static_cast<long>(m.faces.size());
  t.edges = static_cast<long>(edges.size());
  for (const auto& [e, count] : edges) {
    if (count == 1) ++t.boundary_edges;
    if (count > 2) ++t.nonmanifold_edges;
  }
  return t;
}

inline void write_obj(std::ostream& os, const Mesh& m, const std::string& comment = {}) {
  if (!comment.empty()) os << "# " << comment << '\n';
  for (const auto& v : m.vertices) os << "v " << fmt_shortest(v[0]) << ' ' << fmt_shortest(v[1]) << ' ' << fmt_shortest(v[2]) << '\n';
  for (const auto& f : m.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

// --- JSON --------------------------------------------------------------------

using nlohmann::json;

inline json state_json(const ProfileState& st) {
  return {{"s", st.s}, {"x", st.x}, {"t", st.t}, {"theta", st.theta}, {"lambda", st.lambda()}};
}

inline json events_json(const std::vector<OrbitEvent>& events) {
  json a = json::array();
  for (const auto& e : events) {
    json j = state_json(e.state);
    j["type"] = to_string(e.type);
    a.push_back(j);
  }
  return a;
}

inline json canonical_json(const CanonicalExample& ex, const WeingartenRelation& rel) {
  json j;
  j["relation"] = rel.description();
  j["alpha"] = rel.alpha();
  j["termination"] = to_string(ex.orbit.termination);
  j["endpoint"] = ex.endpoint ? json(to_string(*ex.endpoint)) : json(nullptr);
  if (!ex.endpoint_note.empty()) j["note"] = ex.endpoint_note;
  j["compact"] = ex.compact;
  j["singular"] = ex.singular;
  j["closure"] = ex.gamma_closed ? "gamma_reflection" : "axis";
  j["closure_gap"] = ex.closure_gap;
  j["sup_lambda"] = ex.sup_lambda;
  j["sup_mu"] = ex.sup_mu;
  j["sup_t"] = ex.sup_t;
  j["umbilic_constant"] = ex.umbilic_constant;
  j["terminal"] = state_json(ex.orbit.terminal());
  j["events"] = events_json(ex.orbit.events);
  return j;
}

inline json certification_json(const CertificationReport& rep) {
  json j;
  j["relation"] = rep.relation;
  j["certified"] = rep.certified;
  j["sup_lambda"] = rep.sup_lambda;
  j["sup_mu"] = rep.sup_mu;
  j["envelope_branches"] = rep.envelope_branches;
  j["envelope_worst_excess"] = rep.envelope_branches > 0 ? json(rep.envelope_worst) : json(nullptr);
  j["failures"] = rep.failures;
  json orbits = json::array();
  for (const auto& o : rep.orbits) {
    json oj;
    oj["x0"] = o.start.x;
    oj["theta0"] = o.start.theta;
    oj["termination"] = to_string(o.termination);
    oj["endpoint"] = o.endpoint ? json(to_string(*o.endpoint)) : json(nullptr);
    if (!o.note.empty()) oj["note"] = o.note;
    oj["sup_lambda"] = o.sup_lambda;
    oj["sup_mu"] = o.sup_mu;
    oj["terminal_s"] = o.terminal_s;
    oj["gamma_events"] = o.gamma_events;
    oj["envelope_branches"] = o.envelope_branches;
    orbits.push_back(oj);
  }
  j["orbits"] = orbits;
  return j;
}

inline json hopf_json(const HopfReport& rep, const WeingartenRelation& rel) {
  json j;
  j["relation"] = rel.description();
  j["verdict"] = to_string(rep.verdict);
  j["slice"] = rep.slice;
  j["dichotomy"] = rep.dichotomy;
  j["sup_lambda"] = rep.canonical.sup_lambda;
  j["sup_mu"] = rep.canonical.sup_mu;
  j["closure_gap"] = rep.canonical.closure_gap;
  j["events"] = events_json(rep.canonical.orbit.events);
  if (rep.certification) {
    j["certified"] = rep.certification->certified;
    j["sweep_sup_lambda"] = rep.certification->sup_lambda;
    j["sweep_sup_mu"] = rep.certification->sup_mu;
  }
  return j;
}

inline json envelope_json(const EnvelopeReport& rep, const WeingartenRelation& rel, PhasePoint anchor) {
  json j;
  j["relation"] = rel.description();
  j["pass"] = rep.pass;
  j["anchor"] = {{"x", anchor.x}, {"lambda", anchor.lambda}};
  j["upper"] = {{"M", rep.upper_orbit.M}, {"A", rep.upper_orbit.A}, {"C", rep.upper_orbit.C}};
  j["lower"] = {{"M", rep.lower_orbit.M}, {"A", rep.lower_orbit.A}, {"C", rep.lower_orbit.C}};
  j["samples"] = rep.samples.size();
  j["worst_excess"] = rep.worst_excess;
  j["worst_y"] = rep.worst_y;
  j["side_violations"] = rep.side_violations;
  return j;
}

}  // namespace weingarten::io
