#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SHORTTIME_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / ("shorttime_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("calibrate") {
  auto r = run("calibrate order3-discrete");
  CHECK(r.status == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["result"]["constants"][0].get<double>() - 2.720699046) < 1e-8);
  CHECK(j["pass"].get<bool>());
  CHECK(j["command"] == "calibrate");
  CHECK(j.contains("config"));

  auto r4 = run("calibrate order4-continuous");
  CHECK(r4.status == 0);
  auto j4 = nlohmann::json::parse(r4.out);
  CHECK(std::abs(j4["result"]["constants"][0].get<double>() - 5.768064999) < 1e-7);
  CHECK(std::abs(j4["result"]["constants"][1].get<double>() - 13.49214669) < 1e-7);

  CHECK(run("calibrate bogus").status == 2);
}

TEST_CASE("verify") {
  auto r = run("verify trotter --nu 3");
  CHECK(r.status == 1);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"]["violated"].size() == 4);
  CHECK_FALSE(j["pass"].get<bool>());
  CHECK(run("verify order4-discrete --nu 4").status == 0);
  CHECK(run("verify order3-continuous --nu 1").status == 0);
  CHECK(run("verify nonsense").status == 2);
}

TEST_CASE("usage errors") {
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("verify trotter --no-such-flag 1").status == 2);
  CHECK(run("order --potential nowhere --m-max 2").status == 2);
  auto dir = scratch_dir();
  std::ofstream(dir / "bad.cfg") << "colour = blue\n";
  CHECK(run("verify trotter --config " + (dir / "bad.cfg").string()).status == 2);
  fs::remove_all(dir);
}

TEST_CASE("config files, overrides and echo") {
  auto dir = scratch_dir();
  std::ofstream(dir / "v.cfg") << "# verify run\nnu = 2\ntol = 1e-9\n";
  auto r = run("verify trotter --config " + (dir / "v.cfg").string());
  CHECK(r.status == 0);  // Trotter passes the mu <= 2 identities.
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["config"]["nu"] == 2);
  CHECK(j["config"]["tol"].get<double>() == 1e-9);
  const std::string echoed = j["config_text"];
  // The echo is itself a valid config that reproduces the run.
  std::ofstream(dir / "echo.cfg") << echoed;
  auto again = run("verify trotter --config " + (dir / "echo.cfg").string());
  CHECK(nlohmann::json::parse(again.out)["config"] == j["config"]);

  auto over = run("verify trotter --config " + (dir / "v.cfg").string() + " --nu 3");
  CHECK(over.status == 1);
  CHECK(nlohmann::json::parse(over.out)["config"]["nu"] == 3);
  fs::remove_all(dir);
}

TEST_CASE("outputs are deterministic and carry headers") {
  auto dir = scratch_dir();
  const std::string common =
      "--potential quartic --beta 1 --grid-m 120 --levels 1 --samples 4000 --seed 9";
  auto a = run("mc-check order4-discrete " + common + " --out " + (dir / "a").string());
  const std::string first = slurp(dir / "a.json");
  auto a2 = run("mc-check order4-discrete " + common + " --out " + (dir / "a").string());
  CHECK((a.status == 0 || a.status == 1));
  CHECK(a.out == a2.out);
  CHECK(first == slurp(dir / "a.json"));
  auto b = run("mc-check order4-discrete " + common + " --out " + (dir / "b").string());
  const std::string ja = slurp(dir / "a.json"), jb = slurp(dir / "b.json");
  CHECK(!ja.empty());
  CHECK(ja.find("\"out\"") != std::string::npos);
  // Only the output prefix differs.
  auto pa = nlohmann::json::parse(ja), pb = nlohmann::json::parse(jb);
  pa["config"].erase("out");
  pb["config"].erase("out");
  pa.erase("config_text");
  pb.erase("config_text");
  CHECK(pa == pb);

  auto o = run("order trotter --potential harmonic --grid-m 120 --m-max 6 --n-ref 63 --out " +
               (dir / "ord").string());
  CHECK((o.status == 0 || o.status == 1));
  const std::string csv = slurp(dir / "ord.csv");
  std::istringstream lines(csv);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header.find("alpha_m (dimensionless)") != std::string::npos);
  int rows = 0;
  while (std::getline(lines, row)) ++rows;
  CHECK(rows >= 6);
  auto jo = nlohmann::json::parse(slurp(dir / "ord.json"));
  CHECK(jo["result"].contains("slope"));
  CHECK(jo["config"]["m_max"] == 6);
  fs::remove_all(dir);
}

TEST_CASE("free particle has no Trotter constant") {
  auto r = run("trotter-constant --potential free --grid-m 120 --m-max 3 --n-ref 63");
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["result"]["c_th"].get<double>() == 0.0);
}
