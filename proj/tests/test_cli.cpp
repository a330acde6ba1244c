#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("TEDG_CLI");
  REQUIRE(p != nullptr);
  return p;
}

std::string presets_dir() {
  const char* p = std::getenv("TEDG_PRESETS");
  REQUIRE(p != nullptr);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >cli_stdout.log 2>cli_stderr.log";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  REQUIRE(out.good());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::stringstream ss(csv);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

double csv_field(const std::string& line, int index) {
  std::stringstream ss(line);
  std::string cell;
  for (int i = 0; i <= index; ++i) REQUIRE(std::getline(ss, cell, ','));
  return std::stod(cell);
}

} // namespace

TEST_CASE("mesh-info reports counts and honors overrides", "[cli]") {
  const fs::path dir = fresh_dir("mesh_info");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, R"({
    "mesh": {"n_per_side": 2},
    "output": {"directory": ")" + (dir / "out").string() + R"("}
  })");

  REQUIRE(run_cli("mesh-info --config " + cfg.string()) == 0);
  const std::string csv = slurp(dir / "out" / "mesh_info.csv");
  const auto rows = data_lines(csv);
  REQUIRE(rows.size() == 1);
  REQUIRE(csv_field(rows[0], 0) == 8.0);  // elements
  REQUIRE(csv_field(rows[0], 1) == 9.0);  // vertices
  REQUIRE(csv_field(rows[0], 2) == 8.0);  // boundary faces
  REQUIRE(csv_field(rows[0], 3) == csv_field(rows[0], 4)); // uniform mesh
  REQUIRE(fs::exists(dir / "out" / "config.effective.json"));

  // the override must land in both the run and the effective dump
  REQUIRE(run_cli("mesh-info --config " + cfg.string() + " --set mesh.n_per_side=3 --set " +
                  "output.directory=" + (dir / "out3").string()) == 0);
  const auto rows3 = data_lines(slurp(dir / "out3" / "mesh_info.csv"));
  REQUIRE(csv_field(rows3[0], 0) == 18.0);
  const std::string effective = slurp(dir / "out3" / "config.effective.json");
  REQUIRE(effective.find("\"n_per_side\": 3") != std::string::npos);
}

TEST_CASE("refinement studies write deterministic tables", "[cli]") {
  const fs::path dir = fresh_dir("space_study");
  const auto config_for = [&](const std::string& out) {
    return std::string(R"({
      "scenario": {"name": "manufactured"},
      "order": 1,
      "scheme": {"mode": "predictor_corrector", "alpha": 1.0, "dt": 0.002},
      "time": {"t_final": 0.02},
      "convergence": {"resolutions": [2, 3, 4]},
      "output": {"directory": ")") + out + R"("}
    })";
  };
  const fs::path cfg_a = dir / "a.json";
  const fs::path cfg_b = dir / "b.json";
  write_file(cfg_a, config_for((dir / "out_a").string()));
  write_file(cfg_b, config_for((dir / "out_b").string()));

  REQUIRE(run_cli("convergence-space --config " + cfg_a.string()) == 0);
  REQUIRE(run_cli("convergence-space --config " + cfg_b.string()) == 0);

  const std::string errors_a = slurp(dir / "out_a" / "errors.csv");
  REQUIRE(errors_a.rfind("h,dt,N,alpha,scheme,err_Ex,err_Ey,err_Hz\n", 0) == 0);
  REQUIRE(data_lines(errors_a).size() == 3);

  const std::string rates_a = slurp(dir / "out_a" / "rates.csv");
  REQUIRE(rates_a.rfind("axis,field,N,alpha,scheme,slope,intercept,residual,samples\n", 0) == 0);
  const auto rate_rows = data_lines(rates_a);
  REQUIRE(rate_rows.size() == 3); // Ex, Ey, Hz for the single family
  for (const auto& row : rate_rows) REQUIRE(row.rfind("h,", 0) == 0);

  // identical configs must reproduce the tables byte for byte
  REQUIRE(errors_a == slurp(dir / "out_b" / "errors.csv"));
  REQUIRE(rates_a == slurp(dir / "out_b" / "rates.csv"));
}

TEST_CASE("refinement study validation failures exit with the config code", "[cli]") {
  const fs::path dir = fresh_dir("study_invalid");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, R"({
    "scheme": {"dt": 0.002},
    "convergence": {"resolutions": [4, 8]},
    "output": {"directory": ")" + (dir / "out").string() + R"("}
  })");
  REQUIRE(run_cli("convergence-space --config " + cfg.string()) == 2);

  // a time study needs dt values
  const fs::path cfg2 = dir / "config2.json";
  write_file(cfg2, R"({
    "convergence": {"dts": [0.01, 0.005]},
    "output": {"directory": ")" + (dir / "out2").string() + R"("}
  })");
  REQUIRE(run_cli("convergence-time --config " + cfg2.string()) == 2);
}

TEST_CASE("single runs work from a stability-derived step size", "[cli]") {
  const fs::path dir = fresh_dir("single_run");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, R"({
    "mesh": {"n_per_side": 3},
    "order": 2,
    "scheme": {"cfl_safety": 0.5},
    "time": {"t_final": 0.05},
    "output": {"directory": ")" + (dir / "out").string() + R"("}
  })");
  REQUIRE(run_cli("run --config " + cfg.string()) == 0);

  const std::string summary = slurp(dir / "out" / "summary.csv");
  REQUIRE(summary.rfind("step,t,max_intensity,energy\n", 0) == 0);
  REQUIRE(data_lines(summary).size() >= 2);
  REQUIRE(fs::exists(dir / "out" / "snapshot_000000.vtk"));
  REQUIRE(fs::exists(dir / "out" / "errors.csv")); // manufactured has an exact solution

  // the effective dump must round-trip through the parser unchanged
  const fs::path eff = dir / "out" / "config.effective.json";
  REQUIRE(run_cli("run --config " + eff.string() + " --set output.directory=" +
                  (dir / "out_rt").string()) == 0);
  const std::string summary_rt = slurp(dir / "out_rt" / "summary.csv");
  REQUIRE(summary == summary_rt);
}

TEST_CASE("conflicting or missing step-size settings are rejected", "[cli]") {
  const fs::path dir = fresh_dir("step_conflicts");
  const fs::path both = dir / "both.json";
  write_file(both, R"({
    "scheme": {"dt": 0.001, "cfl_safety": 0.5},
    "output": {"directory": ")" + (dir / "out").string() + R"("}
  })");
  REQUIRE(run_cli("run --config " + both.string()) == 2);

  // with neither key the documented default safety factor applies
  const fs::path neither = dir / "neither.json";
  write_file(neither, R"({
    "time": {"t_final": 0.05},
    "output": {"directory": ")" + (dir / "out2").string() + R"("}
  })");
  REQUIRE(run_cli("run --config " + neither.string()) == 0);
  REQUIRE(slurp(dir / "out2" / "config.effective.json").find("cfl_safety") != std::string::npos);

  // the safety factor is a fraction of the stability estimate, never above 1
  const fs::path oversafe = dir / "oversafe.json";
  write_file(oversafe, R"({
    "scheme": {"cfl_safety": 2.0},
    "output": {"directory": ")" + (dir / "out3").string() + R"("}
  })");
  REQUIRE(run_cli("run --config " + oversafe.string()) == 2);
}

TEST_CASE("zero-contrast scattering stays numerically silent", "[cli]") {
  const fs::path dir = fresh_dir("scatter_zero");
  const fs::path cfg = dir / "config.json";
  write_file(cfg, R"({
    "scenario": {"name": "one_circle", "eps_inside": 1.0},
    "mesh": {"n_per_side": 6},
    "order": 2,
    "scheme": {"mode": "predictor_corrector", "alpha": 0.0, "dt": 0.002},
    "time": {"t_final": 0.04},
    "output": {"directory": ")" + (dir / "out").string() + R"(",
               "probes": [[0.75, 0.0]]}
  })");
  REQUIRE(run_cli("scatter --config " + cfg.string()) == 0);

  const std::string summary = slurp(dir / "out" / "summary.csv");
  for (const auto& row : data_lines(summary)) REQUIRE(csv_field(row, 2) < 1e-12);

  const std::string probes = slurp(dir / "out" / "probes.csv");
  REQUIRE(probes.rfind("t,Ex0,Ey0,Hz0,I0\n", 0) == 0);
  for (const auto& row : data_lines(probes))
    for (int c = 1; c <= 4; ++c) REQUIRE(std::abs(csv_field(row, c)) < 1e-12);
}

TEST_CASE("malformed inputs map to well-defined exit codes", "[cli]") {
  const fs::path dir = fresh_dir("bad_inputs");

  // unknown section key
  const fs::path unknown = dir / "unknown.json";
  write_file(unknown, R"({"tyme": {"t_final": 1.0}})");
  REQUIRE(run_cli("run --config " + unknown.string()) == 2);

  // unknown key inside a section
  const fs::path inner = dir / "inner.json";
  write_file(inner, R"({"scheme": {"dt": 0.001, "omega": 2}})");
  REQUIRE(run_cli("run --config " + inner.string()) == 2);

  // JSON syntax error
  const fs::path syntax = dir / "syntax.json";
  write_file(syntax, R"({"mesh": )");
  REQUIRE(run_cli("run --config " + syntax.string()) == 2);

  // missing config file
  REQUIRE(run_cli("run --config " + (dir / "missing.json").string()) == 5);

  // mesh file that fails validation
  const fs::path badmesh = dir / "bad.mesh";
  write_file(badmesh, "3 1\n0 0\n1 0\n2 0\n0 1 2 0\n"); // collinear vertices
  const fs::path meshcfg = dir / "meshcfg.json";
  write_file(meshcfg, R"({
    "mesh": {"source": "file", "path": ")" + badmesh.string() + R"("},
    "output": {"directory": ")" + (dir / "out").string() + R"("}
  })");
  REQUIRE(run_cli("mesh-info --config " + meshcfg.string()) == 2);

  // mesh file that does not exist
  const fs::path nomesh = dir / "nomesh.json";
  write_file(nomesh, R"({
    "mesh": {"source": "file", "path": ")" + (dir / "absent.mesh").string() + R"("},
    "output": {"directory": ")" + (dir / "out").string() + R"("}
  })");
  REQUIRE(run_cli("mesh-info --config " + nomesh.string()) == 5);

  // scatter refuses the manufactured scenario
  const fs::path wrong = dir / "wrong.json";
  write_file(wrong, R"({
    "scenario": {"name": "manufactured"},
    "scheme": {"dt": 0.001},
    "output": {"directory": ")" + (dir / "out").string() + R"("}
  })");
  REQUIRE(run_cli("scatter --config " + wrong.string()) == 2);

  // command-line misuse
  REQUIRE(run_cli("run") == 2);
  REQUIRE(run_cli("frobnicate --config x.json") == 2);
}

TEST_CASE("shipped preset configs drive the solver", "[cli]") {
  const std::string presets = presets_dir();
  const fs::path dir = fresh_dir("presets");

  REQUIRE(run_cli("scatter --config " + presets + "/scatter_one_circle.json" +
                  " --set mesh.n_per_side=4 --set order=1 --set time.t_final=0.02" +
                  " --set output.directory=" + (dir / "one").string()) == 0);
  REQUIRE(fs::exists(dir / "one" / "summary.csv"));

  REQUIRE(run_cli("scatter --config " + presets + "/scatter_three_circles.json" +
                  " --set mesh.n_per_side=4 --set order=1 --set time.t_final=0.02" +
                  " --set output.directory=" + (dir / "three").string()) == 0);

  REQUIRE(run_cli("convergence-space --config " + presets + "/convergence_space.json" +
                  " --set 'convergence.resolutions=[2,3,4]' --set 'convergence.orders=[1]'" +
                  " --set scheme.dt=0.002 --set time.t_final=0.02" +
                  " --set output.directory=" + (dir / "space").string()) == 0);
  REQUIRE(fs::exists(dir / "space" / "rates.csv"));

  REQUIRE(run_cli("convergence-time --config " + presets + "/convergence_time.json" +
                  " --set 'convergence.dts=[0.004,0.002,0.001]'" +
                  " --set mesh.n_per_side=2 --set order=1 --set time.t_final=0.04" +
                  " --set output.directory=" + (dir / "time").string()) == 0);
  REQUIRE(fs::exists(dir / "time" / "rates.csv"));

  REQUIRE(run_cli("run --config " + presets + "/run_demo.json" +
                  " --set mesh.n_per_side=3 --set time.t_final=0.05" +
                  " --set output.directory=" + (dir / "demo").string()) == 0);
}
