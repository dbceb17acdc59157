#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "weingarten/io/run.hpp"

using namespace weingarten;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("weingarten_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code;
  std::string log, err;
};

RunResult run_text(io::Command cmd, const std::string& config, const fs::path& out) {
  std::ostringstream log, err;
  const int code = io::run(cmd, io::parse_config(config), out, log, err);
  return {code, log.str(), err.str()};
}

int spawn(const std::string& args) {
  const std::string cmd = std::string(WEINGARTEN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesEverySection) {
  const auto cfg = io::parse_config(
      "[relation]\nfamily = tanh\nalpha = 0.7\nc = 1.5\nd = 1\n"
      "[integrator]\nrtol = 1e-9\ndetect_periodic = false\nmax_gamma_events = 2\n"
      "[orbit]\nstart = point\nx0 = 0.8\ntheta0 = 0.3\n"
      "[portrait]\nnx = 3\nlambda_view = 4\n[sweep]\nnx = 5\nslack = 1e-8\n"
      "[mesh]\nchart = exp\nresolution = 16\n");
  EXPECT_EQ(cfg.relation.family, "tanh");
  EXPECT_EQ(cfg.relation.alpha, 0.7);
  EXPECT_EQ(cfg.integrator.rtol, 1e-9);
  EXPECT_FALSE(cfg.integrator.detect_periodic);
  EXPECT_EQ(cfg.integrator.max_gamma_events, 2);
  EXPECT_EQ(cfg.orbit.start, "point");
  EXPECT_EQ(cfg.orbit.x0, 0.8);
  EXPECT_EQ(cfg.portrait.nx, 3);
  EXPECT_EQ(cfg.sweep.slack, 1e-8);
  EXPECT_EQ(cfg.mesh.chart, "exp");
  EXPECT_EQ(cfg.mesh.resolution, 16);
  const auto dsl = io::parse_config("[relation]\nfamily = dsl\nexpression = a - k\n[params]\na = 2\n");
  EXPECT_EQ(dsl.relation.params.at("a"), 2.0);
}

TEST(Config, StrictSchema) {
  EXPECT_THROW(io::parse_config("[relation]\nfamly = cmc\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[relaton]\nfamily = cmc\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[relation]\nfamily = quartic\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[relation]\nH = one\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[integrator]\nrtol = -1\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[sweep]\nnx = 2.5\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[mesh]\nresolution = 2\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[params]\nk = 1\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[orbit]\nstart = point\nx0 = 4\n"), ConfigError);
  EXPECT_THROW(io::parse_config("stray = 1\n"), ConfigError);
  EXPECT_THROW(io::parse_config("[relation\n"), ConfigError);
}

TEST(Run, HopfMinimalSlice) {
  const auto out = scratch("hopf");
  const auto r = run_text(io::Command::Hopf, "[relation]\nfamily = dsl\nexpression = -k\nalpha = 0\n", out);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.log.find("UniqueSphere"), std::string::npos);
  EXPECT_NE(r.log.find("(slice)"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(out / "hopf.json"));
  EXPECT_EQ(j["verdict"], "UniqueSphere");
}

TEST(Run, PortraitCmc) {
  const auto out = scratch("portrait");
  const auto r = run_text(io::Command::Portrait, "[relation]\nfamily = cmc\nH = 1\n[portrait]\nnx = 3\nntheta = 2\n", out);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = slurp(out / "portrait.svg");
  EXPECT_NE(svg.find("class=\"gamma\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"upsilon\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"orbit\""), std::string::npos);
  std::istringstream csv(slurp(out / "upsilon.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "x,h");
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma)), h = std::stod(line.substr(comma + 1));
    if (std::abs(x - std::numbers::pi / 2) > 1e-9) {
      EXPECT_NEAR(h, oracle::cmc_upsilon(1.0, x), 1e-12) << x;
    }
    ++rows;
  }
  EXPECT_EQ(rows, 400);
  EXPECT_TRUE(fs::exists(out / "slope_field.csv"));
}

TEST(Run, MalformedExpressionReportsOffset) {
  const auto out = scratch("malformed");
  const auto r = run_text(io::Command::Canonical, "[relation]\nfamily = dsl\nexpression = k +\n", out);
  EXPECT_EQ(r.code, io::kExitConfig);
  EXPECT_NE(r.err.find("offset 3"), std::string::npos) << r.err;
}

TEST(Run, CanonicalSingularRelation) {
  const auto out = scratch("singular");
  const auto r = run_text(io::Command::Canonical, "[relation]\nfamily = expasymptote\nalpha = 0.3\nb0 = -0.2\n", out);
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(out / "canonical.json"));
  EXPECT_EQ(j["compact"], false);
  EXPECT_EQ(j["singular"], true);
  EXPECT_EQ(j["endpoint"], "curve_singularity");
}

TEST(Run, CompareTanh) {
  const auto out = scratch("compare");
  const auto r = run_text(io::Command::Compare,
                          "[relation]\nfamily = tanh\nalpha = 0.7\nc = 1.5\nd = 1\n"
                          "[orbit]\nstart = point\nx0 = 0.7\ntheta0 = 0.9\n",
                          out);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(out / "compare.csv").find("y,lambda_numeric,lambda_lower,lambda_upper"), std::string::npos);
}

TEST(Run, CertifyRejectsNonUniform) {
  const auto out = scratch("nonuniform");
  const auto r = run_text(io::Command::Certify, "[relation]\nfamily = dsl\nexpression = 1/k\nalpha = 1\nb = 0\n", out);
  EXPECT_EQ(r.code, io::kExitFailure);
  EXPECT_NE(r.err.find("uniformly elliptic"), std::string::npos) << r.err;
}

TEST(Mesh, CmcSphereIsClosed) {
  const auto out = scratch("mesh_cmc");
  const auto r = run_text(io::Command::Mesh, "[relation]\nfamily = cmc\nH = 1\n[mesh]\nresolution = 24\n", out);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.log.find("euler characteristic 2, closed"), std::string::npos) << r.log;
  EXPECT_TRUE(r.err.empty()) << r.err;
}

TEST(Mesh, SliceIsDegenerateInCylinderChart) {
  const auto out = scratch("mesh_slice");
  const auto r = run_text(io::Command::Mesh, "[relation]\nfamily = affine\nalpha = 0\nslope = -1\n", out);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("degenerate"), std::string::npos);
  const auto e = run_text(io::Command::Mesh, "[relation]\nfamily = affine\nalpha = 0\n[mesh]\nchart = exp\n", out);
  EXPECT_TRUE(e.err.empty()) << e.err;
  EXPECT_NE(e.log.find("euler characteristic 2, closed"), std::string::npos) << e.log;
}

TEST(Mesh, MinimalResolution) {
  const std::vector<ProfileState> prof = {{0.0, 1.0, 0.0, 0.0}, {0.1, 1.1, 0.0, 0.0}};
  const io::Mesh m = io::build_mesh(prof, 3);
  EXPECT_EQ(m.vertices.size(), 6u);
  EXPECT_EQ(m.faces.size(), 6u);
  EXPECT_THROW(io::build_mesh(prof, 2), OutOfRange);
  EXPECT_THROW(io::build_mesh({}, 8), EmptyOrbit);
}

TEST(Run, ArtifactsAreDeterministic) {
  const std::string cfg = "[relation]\nfamily = tanh\nalpha = 0.7\nc = 1.5\nd = 1\n[sweep]\nnx = 4\nntheta = 3\n";
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (auto cmd : {io::Command::Canonical, io::Command::Certify}) {
    EXPECT_EQ(run_text(cmd, cfg, a).code, 0);
    EXPECT_EQ(run_text(cmd, cfg, b).code, 0);
  }
  for (const char* f : {"canonical.csv", "canonical.json", "certify.json"}) {
    EXPECT_FALSE(slurp(a / f).empty()) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Binary, ExitCodes) {
  const auto out = scratch("binary");
  const fs::path good = out / "good.ini", bad = out / "bad.ini", inv = out / "inverse.ini";
  std::ofstream(good) << "[relation]\nfamily = cmc\nH = 0.5\n";
  std::ofstream(bad) << "[relation]\nfamily = cmc\nunknown = 1\n";
  std::ofstream(inv) << "[relation]\nfamily = dsl\nexpression = 1/k\nalpha = 1\nb = 0\n";
  const std::string o = " --out " + out.string();
  EXPECT_EQ(spawn("canonical --config " + good.string() + o), 0);
  EXPECT_TRUE(fs::exists(out / "canonical.json"));
  EXPECT_EQ(spawn("canonical --config " + bad.string() + o), 2);
  EXPECT_EQ(spawn("canonical --config " + (out / "missing.ini").string() + o), 2);
  EXPECT_EQ(spawn("frobnicate" + o), 2);
  EXPECT_EQ(spawn("canonical --g-expr 'k +'" + o), 2);
  EXPECT_EQ(spawn("certify --config " + inv.string() + o), 1);
  EXPECT_EQ(spawn("hopf --g-expr=-k" + o), 0);
  EXPECT_EQ(spawn("--help"), 0);
}
