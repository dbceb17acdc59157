// Run configuration: INI-style sections of key = value pairs with a strict
// schema. Every key is listed in schema(); anything else is rejected before
// computation starts.
#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "weingarten/classify.hpp"
#include "weingarten/errors.hpp"
#include "weingarten/expr.hpp"
#include "weingarten/relation.hpp"

namespace weingarten::io {

struct RelationSpec {
  std::string family = "cmc";  ///< cmc | affine | expasymptote | tanh | dsl
  double H = 1.0;
  double alpha = 0.0;
  double slope = -1.0;
  double b0 = -1.0;
  double c = 1.5;
  double d = 1.0;
  std::string expression;
  std::optional<double> dsl_alpha;
  std::optional<double> dsl_b;
  std::string domain = "halfline";  ///< halfline | finitecut
  double bracket_lo = -10.0;
  double bracket_hi = 10.0;
  expr::Params params;
};

struct OrbitSpec {
  std::string start = "north";  ///< north | south | point
  double x0 = 1.0;
  double theta0 = 0.0;
  double t0 = 0.0;
};

struct PortraitSpec {
  double lambda_view = 5.0;
  int nx = 10;
  int ntheta = 5;
  int width = 800;
  int height = 600;
  int upsilon_samples = 400;
  double s_budget = 20.0;
};

struct SweepSpec {
  int nx = 10;
  int ntheta = 5;
  double near_axis = std::numbers::pi / 4;
  double slack = 1e-9;
};

struct MeshSpec {
  std::string source = "canonical";  ///< canonical | orbit
  std::string chart = "cylinder";    ///< cylinder | exp
  int resolution = 128;
};

struct RunConfig {
  RelationSpec relation;
  IntegratorControls integrator;
  OrbitSpec orbit;
  PortraitSpec portrait;
  SweepSpec sweep;
  MeshSpec mesh;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>, std::less<>>& schema() {
  static const std::map<std::string, std::set<std::string>, std::less<>> s = {
      {"relation",
       {"family", "H", "alpha", "slope", "b0", "c", "d", "expression", "b", "domain", "bracket_lo", "bracket_hi"}},
      {"params", {}},
      {"integrator",
       {"rtol", "atol", "delta_axis", "lambda_max", "delta_b", "s_budget", "h_init", "h_min", "event_tol",
        "closed_tol", "detect_periodic", "max_gamma_events", "max_steps"}},
      {"orbit", {"start", "x0", "theta0", "t0"}},
      {"portrait", {"lambda_view", "nx", "ntheta", "width", "height", "upsilon_samples", "s_budget"}},
      {"sweep", {"nx", "ntheta", "near_axis", "slack"}},
      {"mesh", {"source", "chart", "resolution"}},
  };
  return s;
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) throw ConfigError(key + ": not a finite number: '" + v + "'");
  return out;
}

inline long to_int(const std::string& key, const std::string& v) {
  long out = 0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

inline double positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(key + " must be positive");
  return v;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) return false;
  }
  return s != "k";
}

}  // namespace detail

/// Parses configuration text. Throws ConfigError on syntax errors, unknown
/// sections or keys, and invalid values.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  const auto& sch = detail::schema();
  for (const auto& [section, body] : tree) {
    const auto sit = sch.find(section);
    if (sit == sch.end()) throw ConfigError("unknown section or top-level key '" + section + "'");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const std::string v = node.get_value<std::string>();
      if (section == "params") {
        if (!detail::is_identifier(key)) throw ConfigError(full + ": not a parameter name");
        cfg.relation.params[key] = detail::to_double(full, v);
        continue;
      }
      if (!sit->second.count(key)) throw ConfigError("unknown key '" + full + "'");
      auto num = [&] { return detail::to_double(full, v); };
      auto pos = [&] { return detail::positive(full, num()); };
      auto count = [&](long lo) {
        const long n = detail::to_int(full, v);
        if (n < lo) throw ConfigError(full + " must be at least " + std::to_string(lo));
        return n;
      };
      auto choice = [&](std::initializer_list<const char*> allowed) {
        for (const char* a : allowed) {
          if (v == a) return v;
        }
        throw ConfigError(full + ": unsupported value '" + v + "'");
      };

      if (section == "relation") {
        auto& r = cfg.relation;
        if (key == "family") r.family = choice({"cmc", "affine", "expasymptote", "tanh", "dsl"});
        else if (key == "H") r.H = num();
        else if (key == "alpha") r.alpha = num(), r.dsl_alpha = r.alpha;
        else if (key == "slope") r.slope = num();
        else if (key == "b0") r.b0 = num();
        else if (key == "c") r.c = num();
        else if (key == "d") r.d = num();
        else if (key == "expression") r.expression = v;
        else if (key == "b") r.dsl_b = num();
        else if (key == "domain") r.domain = choice({"halfline", "finitecut"});
        else if (key == "bracket_lo") r.bracket_lo = num();
        else if (key == "bracket_hi") r.bracket_hi = num();
      } else if (section == "integrator") {
        auto& c = cfg.integrator;
        if (key == "rtol") c.rtol = pos();
        else if (key == "atol") c.atol = pos();
        else if (key == "delta_axis") c.delta_axis = pos();
        else if (key == "lambda_max") c.lambda_max = pos();
        else if (key == "delta_b") c.delta_b = pos();
        else if (key == "s_budget") c.s_budget = pos();
        else if (key == "h_init") c.h_init = pos();
        else if (key == "h_min") c.h_min = pos();
        else if (key == "event_tol") c.event_tol = pos();
        else if (key == "closed_tol") c.closed_tol = pos();
        else if (key == "detect_periodic") c.detect_periodic = choice({"true", "false"}) == "true";
        else if (key == "max_gamma_events") c.max_gamma_events = static_cast<int>(count(0));
        else if (key == "max_steps") c.max_steps = static_cast<std::size_t>(count(1));
      } else if (section == "orbit") {
        auto& o = cfg.orbit;
        if (key == "start") o.start = choice({"north", "south", "point"});
        else if (key == "x0") o.x0 = num();
        else if (key == "theta0") o.theta0 = num();
        else if (key == "t0") o.t0 = num();
      } else if (section == "portrait") {
        auto& p = cfg.portrait;
        if (key == "lambda_view") p.lambda_view = pos();
        else if (key == "nx") p.nx = static_cast<int>(count(0));
        else if (key == "ntheta") p.ntheta = static_cast<int>(count(0));
        else if (key == "width") p.width = static_cast<int>(count(1));
        else if (key == "height") p.height = static_cast<int>(count(1));
        else if (key == "upsilon_samples") p.upsilon_samples = static_cast<int>(count(2));
        else if (key == "s_budget") p.s_budget = pos();
      } else if (section == "sweep") {
        auto& s = cfg.sweep;
        if (key == "nx") s.nx = static_cast<int>(count(1));
        else if (key == "ntheta") s.ntheta = static_cast<int>(count(1));
        else if (key == "near_axis") s.near_axis = pos();
        else if (key == "slack") s.slack = pos();
      } else if (section == "mesh") {
        auto& m = cfg.mesh;
        if (key == "source") m.source = choice({"canonical", "orbit"});
        else if (key == "chart") m.chart = choice({"cylinder", "exp"});
        else if (key == "resolution") m.resolution = static_cast<int>(count(3));
      }
    }
  }
  if (cfg.orbit.start == "point" && !(cfg.orbit.x0 > 0.0 && cfg.orbit.x0 < std::numbers::pi)) {
    throw ConfigError("orbit.x0 must lie in (0, pi)");
  }
  return cfg;
}

/// Builds the relation a RelationSpec describes. Relation-level failures
/// (no fixed point, not elliptic, malformed expression) propagate as the
/// library's own errors.
inline WeingartenRelation build_relation(const RelationSpec& r) {
  if (r.family == "cmc") return affine_relation(r.H, -1.0);
  if (r.family == "affine") return affine_relation(r.alpha, r.slope);
  if (r.family == "expasymptote") return expasymptote_relation(r.alpha, r.b0);
  if (r.family == "tanh") return tanh_relation(r.alpha, r.c, r.d);
  if (r.expression.empty()) throw ConfigError("relation.expression is required for the dsl family");
  RelationOptions opt;
  opt.alpha = r.dsl_alpha;
  opt.b = r.dsl_b;
  opt.bracket_lo = r.bracket_lo;
  opt.bracket_hi = r.bracket_hi;
  opt.domain_case = r.domain == "finitecut" ? DomainCase::FiniteCut : DomainCase::HalfLine;
  return dsl_relation(r.expression, r.params, opt);
}

}  // namespace weingarten::io
