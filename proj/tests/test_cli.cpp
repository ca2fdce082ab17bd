#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = 0;
  std::string out;
};

Result run(const std::string& args) {
  fs::path capture = fs::temp_directory_path() / "stochimc_cli_capture.txt";
  std::string cmd = std::string(STOCHIMC_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  int raw = std::system(cmd.c_str());
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(raw), ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

struct TempDir {
  fs::path path = fs::temp_directory_path() / "stochimc_cli_runs";
  TempDir() {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("op runs are reproducible") {
  TempDir tmp;
  auto a = run("op mult --bl 256 --seed 7 --out " + tmp.path.string());
  auto b = run("op mult --bl 256 --seed 7 --out " + tmp.path.string());
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  fs::path da = first_line(a.out), db = first_line(b.out);
  CHECK(da != db);
  CHECK(da.filename().string().ends_with("-s7"));
  CHECK(slurp(da / "report.json") == slurp(db / "report.json"));
  CHECK(fs::exists(da / "wear.csv"));
  CHECK(fs::exists(da / "schedule.txt"));

  auto report = run("report " + da.string());
  CHECK(report.status == 0);
  CHECK(report.out == slurp(da / "summary.csv"));
}

TEST_CASE("app writes one row per grid point") {
  TempDir tmp;
  auto r = run("app ol --grid 64 --out " + tmp.path.string());
  REQUIRE(r.status == 0);
  auto csv = slurp(fs::path(first_line(r.out)) / "results.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4097);
}

TEST_CASE("schedule and sweep") {
  TempDir tmp;
  fs::path netlist = tmp.path / "mult.net";
  std::ofstream(netlist) << "PI a\nPI b\nPO y\n1 AND a,b -> y\n";
  auto s = run("schedule " + netlist.string() + " --out " + tmp.path.string());
  REQUIRE(s.status == 0);
  CHECK(s.out.find("AND") != std::string::npos);

  auto sw = run("sweep flip-rate --app ol --grid 4 --rates 0,5,10,15,20 --trials 30 --out " + tmp.path.string());
  REQUIRE(sw.status == 0);
  fs::path dir = sw.out.substr(sw.out.rfind('\n', sw.out.size() - 2) + 1);
  dir = first_line(dir.string());
  auto csv = slurp(dir / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(fs::exists(dir / "long.csv"));
}

TEST_CASE("exit codes") {
  TempDir tmp;
  CHECK(run("frobnicate").status == 2);
  CHECK(run("op").status == 2);
  CHECK(run("op mult --set bogus=1 --out " + tmp.path.string()).status == 3);
  CHECK(run("op mult --set n=0 --out " + tmp.path.string()).status == 3);
  CHECK(run("schedule /nonexistent/file.net --out " + tmp.path.string()).status == 1);
  auto schema = run("report --schema");
  CHECK(schema.status == 0);
  CHECK(schema.out.find("abs_error") != std::string::npos);
}
