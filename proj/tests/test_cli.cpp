#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvwork/cli/commands.hpp"
#include "curvwork/cli/config.hpp"
#include "curvwork/cli/table.hpp"
#include "curvwork/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace curvwork;
using namespace curvwork::cli;
namespace fs = std::filesystem;

namespace {

RunConfig config_from(const std::string& text, Overrides o = {}) {
  return make_run_config(parse_config_text(text, "test.json"), o);
}

std::string error_of(const std::string& text) {
  try {

    auto cfg = config_from(text);
    run_command(cfg);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("curvwork_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string("\"") + CURVWORK_TOOL_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kCoherentMap = R"({
  "command": "curvature-map",
  "model": {"mode": "coherent", "gamma": 1.0, "p": 1.0},
  "grid": {"omega": [-1, 1, 21], "g": [-1, 1, 21]}
})";

}  // namespace

TEST_CASE("syntax errors report line and column") {
  try {
    parse_config_text("{\n  \"command\": \"cycle-work\",\n  \"model\": {,}\n}", "bad.json");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).rfind("bad.json:3:", 0) == 0);
  }
}

TEST_CASE("validation errors name the JSON pointer") {
  CHECK(error_of(R"({"command": "nope"})").find("/command") != std::string::npos);
  CHECK(error_of(R"({"command": "cycle-work", "extra": 1})").find("/extra") != std::string::npos);
  CHECK(error_of(R"({"command": "curvature-map", "model": {"mode": "coherent", "gamma": 1, "p": 2},
                     "grid": {"omega": [0, 1, 3], "g": [0, 1, 3]}})")
            .find("/model/p") != std::string::npos);
  CHECK(error_of(R"({"command": "curvature-map", "model": {"mode": "coherent", "gamma": 1, "p": 1},
                     "grid": {"omega": [1, 0, 3], "g": [0, 1, 3]}})")
            .find("/grid/omega") != std::string::npos);
  CHECK(error_of(R"({"command": "curvature-map", "model": {"mode": "coherent", "gamma": 1, "p": 1, "gamma_down": 1},
                     "grid": {"omega": [0, 1, 3], "g": [0, 1, 3]}})")
            .find("/model") != std::string::npos);
  CHECK(error_of(R"({"command": "sde-ensemble", "connection": {"type": "constant", "value": [1, 0]}})")
            .find("/numeric/seed") != std::string::npos);
  CHECK(error_of(R"({"command": "cycle-work", "model": {"mode": "thermal", "beta": 1},
                     "protocol": {"type": "circle", "center": [1, 1], "radius": -0.5}})")
            .find("/protocol/radius") != std::string::npos);
}

TEST_CASE("command line overrides") {
  Overrides o;
  o.seed = 42;
  o.threads = 3;
  const auto cfg = config_from(R"({"command": "sde-ensemble"})", o);
  CHECK(cfg.seed.value() == 42);
  CHECK(cfg.threads == 3);
  CHECK(!config_from(R"({"command": "fp-solve"})").seed);
  o.command = "fp-solve";
  CHECK_THROWS_AS(config_from(R"({"command": "sde-ensemble"})", o), ValidationError);
}

TEST_CASE("config hash ignores thread count and output location") {
  const auto a = config_from(R"({"command": "selfcheck", "numeric": {"threads": 1}, "output": {"dir": "x"}})");
  const auto b = config_from(R"({"command": "selfcheck", "numeric": {"threads": 4}})");
  const auto c = config_from(R"({"command": "selfcheck", "numeric": {"tolerance": 1e-3}})");
  CHECK(a.config_hash == b.config_hash);
  CHECK(a.config_hash != c.config_hash);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("table formatting") {
  ResultTable t({{"x", "energy"}, {"y", ""}});
  t.add_row({0.1, 2.0});
  CHECK_THROWS_AS(t.add_row({1.0}), DimensionMismatch);
  t.set_meta("a", "1");
  t.set_meta("b", "2");
  t.set_meta("a", "3");
  CHECK(t.to_csv() == "# a: 3\n# b: 2\nx [energy],y\n0.1,2\n");
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("coherent curvature map values") {
  auto cfg = config_from(kCoherentMap);
  const auto res = run_command(cfg);
  const auto& t = res.outputs.at(0).table;
  const auto om = t.column("omega");
  const auto g = t.column("g");
  const auto cv = t.column("curvature");
  const std::size_t n = 21;
  for (std::size_t k = 0; k < om.size(); ++k) {
    // Closed form g (g^2 + 1) / (2 w^2 + g^2 + 1/2)^2 at gamma = p = 1.
    const double d = 2 * om[k] * om[k] + g[k] * g[k] + 0.5;
    CHECK(cv[k] == doctest::Approx(g[k] * (g[k] * g[k] + 1) / (d * d)).epsilon(1e-12));
    // Odd in g: row-major in g, so the mirrored node sits at the mirrored g row.
    const std::size_t ig = k / n, io = k % n;
    CHECK(cv[(n - 1 - ig) * n + io] == doctest::Approx(-cv[k]).epsilon(1e-12));
  }
  const std::size_t centre = 20 * n + 10;  // omega = 0, g = 1
  CHECK(cv[centre] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("thermal baseline map is constant on circles") {
  auto cfg = config_from(R"({
    "command": "curvature-map",
    "model": {"mode": "thermal", "beta": 2.0},
    "grid": {"omega": [-1, 1, 5], "g": [-1, 1, 5]}
  })");
  const auto t = run_command(cfg).outputs.at(0).table;
  const auto om = t.column("omega");
  const auto g = t.column("g");
  const auto base = t.column("baseline");
  for (std::size_t i = 0; i < om.size(); ++i) {
    for (std::size_t j = 0; j < om.size(); ++j) {
      if (std::abs(std::hypot(om[i], g[i]) - std::hypot(om[j], g[j])) < 1e-14) {
        CHECK(base[i] == doctest::Approx(base[j]).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("outputs carry metadata and are byte-identical across runs") {
  const auto dir1 = scratch("a");
  const auto dir2 = scratch("b");
  const std::string text = R"({
    "command": "sde-ensemble",
    "connection": {"type": "constant", "value": [1, 0]},
    "sde": {"diffusion": 0.5, "t_final": 0.5, "dt": 0.01},
    "ensemble": {"samples": 500},
    "numeric": {"seed": 7}
  })";
  Overrides o;
  o.out_dir = dir1.string();
  o.threads = 1;
  auto c1 = config_from(text, o);
  auto r1 = run_command(c1);
  const auto files = write_outputs(r1, c1);
  o.out_dir = dir2.string();
  o.threads = 4;
  auto c2 = config_from(text, o);
  auto r2 = run_command(c2);
  write_outputs(r2, c2);
  REQUIRE(!files.empty());
  for (const auto& f : files) {
    const fs::path name = fs::path(f).filename();
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }
  const std::string csv = slurp(files.front());
  CHECK(csv.rfind("# tool: curvwork\n", 0) == 0);
  CHECK(csv.find("# seed: 7\n") != std::string::npos);
  CHECK(csv.find("# config_hash: " + c1.config_hash + "\n") != std::string::npos);
}

TEST_CASE("tool exit codes") {
  const auto dir = scratch("tool");
  const fs::path good = dir / "good.json";
  const fs::path bad = dir / "bad.json";
  const fs::path broken = dir / "broken.json";
  std::ofstream(good) << kCoherentMap;
  std::ofstream(bad) << R"({"command": "curvature-map", "model": {"mode": "coherent"}})";
  std::ofstream(broken) << "{ \"command\": ";
  CHECK(run_tool("--version") == 0);
  CHECK(run_tool("--config " + good.string() + " --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "curvature_map.csv"));
  CHECK(run_tool("--config " + bad.string()) == 1);
  CHECK(run_tool("--config " + broken.string()) == 1);
  CHECK(run_tool("--config " + (dir / "missing.json").string()) == 1);
  CHECK(run_tool("--bogus-flag") == 1);
  CHECK(run_tool("sde-ensemble") == 1);
}
