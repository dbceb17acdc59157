// Command dispatch shared by the executable and the tests.
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "weingarten/classify.hpp"
#include "weingarten/errors.hpp"
#include "weingarten/io/config.hpp"
#include "weingarten/io/export.hpp"
#include "weingarten/linearcmp.hpp"

namespace weingarten::io {

enum class Command { Orbit, Portrait, Canonical, Certify, Hopf, Compare, Mesh };

inline std::optional<Command> parse_command(std::string_view s) {
  if (s == "orbit") return Command::Orbit;
  if (s == "portrait") return Command::Portrait;
  if (s == "canonical") return Command::Canonical;
  if (s == "certify") return Command::Certify;
  if (s == "hopf") return Command::Hopf;
  if (s == "compare") return Command::Compare;
  if (s == "mesh") return Command::Mesh;
  return std::nullopt;
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << content;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline ProfileState configured_start(const OrbitSpec& o, const FoldedRelation& f) {
  if (o.start == "north") return axis_start(f, Pole::North);
  if (o.start == "south") return axis_start(f, Pole::South);
  const ProfileState st{0.0, o.x0, o.t0, o.theta0};
  if (!(st.lambda() > f.b())) throw ConfigError("orbit start has lambda <= b");
  return st;
}

inline std::string orbit_csv(const Orbit& o, const FoldedRelation& f) {
  std::ostringstream os;
  write_orbit_csv(os, o.samples, o.events, f);
  return os.str();
}

inline Sweep configured_sweep(const SweepSpec& s) { return Sweep::grid(s.nx, s.ntheta); }

inline CertifyOptions certify_options(const RunConfig& cfg) {
  CertifyOptions opt;
  opt.controls = cfg.integrator;
  opt.near_axis = cfg.sweep.near_axis;
  opt.envelope_slack = cfg.sweep.slack;
  return opt;
}

}  // namespace detail

/// Runs one command, writing artifacts into `out_dir`. Returns the exit
/// status: 0 success, 1 classification or certification failure, 2
/// configuration error. Diagnostics go to `err`, summaries to `log`.
inline int run(Command cmd, const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
               std::ostream& err) {
  WeingartenRelation rel;
  try {
    rel = build_relation(cfg.relation);
  } catch (const ParseError& e) {
    err << "error: malformed expression at offset " << e.offset() << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: invalid relation: " << e.what() << '\n';
    return kExitConfig;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    err << "error: cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return kExitConfig;
  }
  const FoldedRelation f(rel);
  log << "relation: " << rel.description() << " alpha=" << fmt_shortest(rel.alpha()) << " b=" << fmt_shortest(rel.b())
      << (rel.uniformly_elliptic() ? " (uniformly elliptic)" : "") << '\n';

  try {
    switch (cmd) {
      case Command::Orbit: {
        const Orbit o = integrate(detail::configured_start(cfg.orbit, f), f, cfg.integrator);
        detail::write_file(out_dir / "orbit.csv", detail::orbit_csv(o, f));
        json j;
        j["relation"] = rel.description();
        j["termination"] = to_string(o.termination);
        j["events"] = events_json(o.events);
        j["terminal"] = state_json(o.terminal());
        int status = kExitOk;
        try {
          const EndpointClass c = classify_termination(o, rel);
          j["endpoint"] = to_string(c);
          log << "endpoint: " << to_string(c) << '\n';
        } catch (const Unclassified& e) {
          j["endpoint"] = nullptr;
          j["note"] = e.what();
          err << "unclassified: " << e.what() << '\n';
          status = kExitFailure;
        }
        detail::write_file(out_dir / "orbit.json", detail::dump(j));
        return status;
      }
      case Command::Portrait: {
        std::vector<Orbit> orbits;
        IntegratorControls c = cfg.integrator;
        c.s_budget = cfg.portrait.s_budget;
        if (cfg.portrait.nx > 0 && cfg.portrait.ntheta > 0) {
          for (const auto& st : Sweep::grid(cfg.portrait.nx, cfg.portrait.ntheta).starts) {
            if (st.lambda() > f.b()) orbits.push_back(integrate(st, f, c));
          }
        }
        orbits.push_back(integrate(axis_start(f, Pole::North), f, c));
        const PortraitView view{cfg.portrait.lambda_view, cfg.portrait.width, cfg.portrait.height};
        detail::write_file(out_dir / "portrait.svg", portrait_svg(f, orbits, view, cfg.portrait.upsilon_samples));
        {
          const UpsilonCurve ups(f);
          std::ostringstream hs;
          hs << "x,h\n";
          for (const auto& [x, h] : ups.sample(cfg.portrait.upsilon_samples)) hs << fmt_shortest(x) << ',' << fmt_shortest(h) << '\n';
          detail::write_file(out_dir / "upsilon.csv", hs.str());
          std::ostringstream sf;
          write_slope_field_csv(sf, f, 40, 41, cfg.portrait.lambda_view);
          detail::write_file(out_dir / "slope_field.csv", sf.str());
        }
        log << "portrait: " << orbits.size() << " orbits\n";
        return kExitOk;
      }
      case Command::Canonical: {
        const CanonicalExample ex = build_canonical(rel, cfg.integrator);
        detail::write_file(out_dir / "canonical.csv", detail::orbit_csv(ex.orbit, f));
        detail::write_file(out_dir / "canonical.json", detail::dump(canonical_json(ex, rel)));
        log << "canonical: " << (ex.compact ? "compact" : "non-compact") << (ex.singular ? ", singular" : "")
            << ", closure gap " << fmt_shortest(ex.closure_gap) << '\n';
        if (!ex.endpoint) {
          err << "unclassified: " << ex.endpoint_note << '\n';
          return kExitFailure;
        }
        return kExitOk;
      }
      case Command::Certify: {
        const CertificationReport rep =
            certify_sweep(rel, detail::configured_sweep(cfg.sweep), detail::certify_options(cfg));
        detail::write_file(out_dir / "certify.json", detail::dump(certification_json(rep)));
        log << "certify: " << (rep.certified ? "certified" : "FAILED") << ", sup|lambda| " << fmt_shortest(rep.sup_lambda)
            << ", sup|mu| " << fmt_shortest(rep.sup_mu) << '\n';
        for (const auto& s : rep.failures) err << "  " << s << '\n';
        return rep.certified ? kExitOk : kExitFailure;
      }
      case Command::Hopf: {
        HopfOptions opt;
        opt.certify_options = detail::certify_options(cfg);
        opt.certify = true;
        HopfReport rep;
        {
          // Run the sweep without throwing so the report is still written.
          const CertificationReport cert = certify_sweep(rel, detail::configured_sweep(cfg.sweep), opt.certify_options);
          opt.certify = false;
          rep = hopf_check(rel, opt);
          rep.certification = cert;
        }
        detail::write_file(out_dir / "hopf.json", detail::dump(hopf_json(rep, rel)));
        log << "verdict: " << to_string(rep.verdict) << (rep.slice ? " (slice)" : "") << ", dichotomy "
            << rep.dichotomy << '\n';
        if (!rep.certification->certified) {
          for (const auto& s : rep.certification->failures) err << "  " << s << '\n';
          return kExitFailure;
        }
        return kExitOk;
      }
      case Command::Compare: {
        if (!rel.uniformly_elliptic()) throw NotElliptic("comparison envelopes need a uniformly elliptic relation");
        const Orbit o = integrate(detail::configured_start(cfg.orbit, f), f, cfg.integrator);
        const auto branches = weingarten::detail::descending_branches(o, rel.alpha());
        if (branches.empty()) {
          err << "compare: the orbit has no branch descending towards the axis on one side of alpha\n";
          return kExitFailure;
        }
        auto pick = branches.front();
        for (const auto& br : branches) {
          if (o.samples[br.second].x < cfg.sweep.near_axis) {
            pick = br;
            break;
          }
        }
        const PhasePoint anchor = o.samples[pick.first].phase();
        const SlopeBounds sb = *rel.ellipticity();
        const EnvelopeReport rep = envelope_report(f, weingarten::detail::slice_orbit(o, pick.first, pick.second), sb.lower,
                                                   sb.upper, anchor, cfg.sweep.slack);
        std::ostringstream csv;
        write_envelope_csv(csv, rep);
        detail::write_file(out_dir / "compare.csv", csv.str());
        detail::write_file(out_dir / "compare.json", detail::dump(envelope_json(rep, rel, anchor)));
        log << "envelope: " << (rep.pass ? "pass" : "FAIL") << ", worst excess " << fmt_shortest(rep.worst_excess)
            << " over " << rep.samples.size() << " samples\n";
        return rep.pass ? kExitOk : kExitFailure;
      }
      case Command::Mesh: {
        std::vector<ProfileState> profile;
        if (cfg.mesh.source == "canonical") {
          profile = closed_profile(build_canonical(rel, cfg.integrator));
        } else {
          profile = integrate(detail::configured_start(cfg.orbit, f), f, cfg.integrator).samples;
        }
        const Chart chart = cfg.mesh.chart == "exp" ? Chart::Exp : Chart::Cylinder;
        const Mesh m = build_mesh(profile, cfg.mesh.resolution, chart);
        const MeshTopology t = topology(m);
        std::ostringstream os;
        write_obj(os, m, rel.description());
        detail::write_file(out_dir / "mesh.obj", os.str());
        log << "mesh: " << t.vertices << " vertices, " << t.faces << " faces, euler characteristic " << t.euler()
            << (t.closed() ? ", closed" : ", open") << '\n';
        if (m.degenerate) err << "warning: degenerate mesh (t = 0 everywhere, flat disk pair in this chart)\n";
        return kExitOk;
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace weingarten::io
