#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(V2X_SWEEP_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("v2x_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static inline int counter = 0;
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kQuickConfig =
    "mode = analytic\n"
    "sim.total_slots = 10000\n";

}  // namespace

TEST_CASE("cli: successful analytic run writes sweep.csv and summary.txt") {
  TempDir tmp;
  write(tmp.path / "run.cfg", kQuickConfig);
  const int code = run_cli("--config " + (tmp.path / "run.cfg").string() + " --out " +
                           (tmp.path / "out").string());
  REQUIRE(code == 0);
  REQUIRE(fs::exists(tmp.path / "out" / "sweep.csv"));
  REQUIRE(fs::exists(tmp.path / "out" / "summary.txt"));
  const std::string csv = slurp(tmp.path / "out" / "sweep.csv");
  REQUIRE(csv.rfind("threshold,", 0) == 0);
}

TEST_CASE("cli: identical configs and seeds give byte-identical csv") {
  TempDir tmp;
  write(tmp.path / "run.cfg", kQuickConfig);
  REQUIRE(run_cli("--config " + (tmp.path / "run.cfg").string() + " --out " +
                  (tmp.path / "a").string()) == 0);
  REQUIRE(run_cli("--config " + (tmp.path / "run.cfg").string() + " --out " +
                  (tmp.path / "b").string()) == 0);
  REQUIRE(slurp(tmp.path / "a" / "sweep.csv") == slurp(tmp.path / "b" / "sweep.csv"));
}

TEST_CASE("cli: split metrics mode writes one csv per metric family") {
  TempDir tmp;
  write(tmp.path / "run.cfg", kQuickConfig);
  REQUIRE(run_cli("--config " + (tmp.path / "run.cfg").string() + " --out " +
                  (tmp.path / "out").string() + " --split-metrics") == 0);
  for (const char* name : {"pdr.csv", "throughput.csv", "total_delay_us.csv",
                           "busy_probability.csv", "collision_probability.csv"})
    REQUIRE(fs::exists(tmp.path / "out" / name));
}

TEST_CASE("cli: scenario dump round-trips through the documented format") {
  TempDir tmp;
  write(tmp.path / "run.cfg", kQuickConfig);
  REQUIRE(run_cli("--config " + (tmp.path / "run.cfg").string() + " --out " +
                  (tmp.path / "out").string() + " --dump-scenario") == 0);
  const std::string text = slurp(tmp.path / "out" / "scenario.txt");
  REQUIRE(text.rfind("# v2x scenario v1", 0) == 0);
}

TEST_CASE("cli: seed override changes montecarlo output") {
  TempDir tmp;
  write(tmp.path / "run.cfg", "mode = montecarlo\nsim.total_slots = 20000\nthresholds = 400\n");
  REQUIRE(run_cli("--config " + (tmp.path / "run.cfg").string() + " --out " +
                  (tmp.path / "a").string() + " --seed 100") == 0);
  REQUIRE(run_cli("--config " + (tmp.path / "run.cfg").string() + " --out " +
                  (tmp.path / "b").string() + " --seed 101") == 0);
  REQUIRE(slurp(tmp.path / "a" / "sweep.csv") != slurp(tmp.path / "b" / "sweep.csv"));

  // every montecarlo sweep point also leaves its full simulator report
  const std::string report = slurp(tmp.path / "a" / "simreport_400m.txt");
  REQUIRE(report.rfind("# v2x simreport v1", 0) == 0);
  REQUIRE(report.find("rng=mt19937_64") != std::string::npos);
}

TEST_CASE("cli exit codes: usage, parse, validation, io are distinct") {
  TempDir tmp;
  REQUIRE(run_cli("--no-such-flag") == 1);

  write(tmp.path / "bad_syntax.cfg", "mode both\n");
  REQUIRE(run_cli("--config " + (tmp.path / "bad_syntax.cfg").string()) == 2);

  write(tmp.path / "bad_value.cfg", "thresholds = -5\n");
  REQUIRE(run_cli("--config " + (tmp.path / "bad_value.cfg").string()) == 3);

  REQUIRE(run_cli("--config " + (tmp.path / "missing.cfg").string()) == 4);

  write(tmp.path / "ok.cfg", kQuickConfig);
  REQUIRE(run_cli("--config " + (tmp.path / "ok.cfg").string() + " --out /proc/v2x_forbidden") == 4);
}
