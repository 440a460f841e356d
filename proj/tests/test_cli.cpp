#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PHOTOBIO_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("photobio_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config(const std::string& name) { return std::string(PHOTOBIO_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(Cli, TaxisReportsChiForDefaultCriticalIntensity) {
  const auto dir = scratch("taxis");
  const auto r = run("taxis --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(slurp(dir / "taxis.json"));
  EXPECT_EQ(j["metadata"]["schema"], "photobio.taxis/1");
  EXPECT_NEAR(j["data"]["G_c"].get<double>(), 0.68, 1e-12);
  EXPECT_TRUE(j["data"]["in_calibrated_range"].get<bool>());
}

TEST(Cli, CsvHeaderCarriesSchemaVersionAndConfigEcho) {
  const auto dir = scratch("header");
  ASSERT_EQ(run("basic-state --out " + dir.string()).code, 0);
  std::ifstream in(dir / "basic_state.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# schema: photobio.basic_state/1");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# code_version: ", 0), 0u);
  bool saw_config = false, saw_assumption = false;
  while (std::getline(in, line) && line[0] == '#') {
    saw_config = saw_config || line == "# config.G_c: 0.68";
    saw_assumption = saw_assumption || line == "# assumption.cell_rate: unit";
  }
  EXPECT_TRUE(saw_config);
  EXPECT_TRUE(saw_assumption);
  EXPECT_EQ(line, "x3,n_b,G_b,T_b,temp_b");
}

TEST(Cli, NoSwimmingGivesUniformConcentration) {
  const auto dir = scratch("uniform");
  ASSERT_EQ(run("basic-state --U_s 0 --out " + dir.string()).code, 0);
  std::ifstream in(dir / "basic_state.csv");
  std::string line;
  while (std::getline(in, line) && line[0] == '#') {
  }
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string x, n;
    std::getline(ss, x, ',');
    std::getline(ss, n, ',');
    EXPECT_DOUBLE_EQ(std::stod(n), 1.0) << "at x3 = " << x;
    ++rows;
  }
  EXPECT_EQ(rows, 2001);
}

TEST(Cli, RerunIsByteIdentical) {
  const auto a = scratch("idem_a"), b = scratch("idem_b");
  const std::string args = "dispersion --config " + config("fig09_critical.ini") + " --a 1.9 --Ra 80 --gamma-im 13";
  ASSERT_EQ(run(args + " --out " + a.string()).code, 0);
  ASSERT_EQ(run(args + " --out " + b.string()).code, 0);
  auto strip_dir = [](std::string s, const fs::path& d) {
    for (auto pos = s.find(d.string()); pos != std::string::npos; pos = s.find(d.string())) s.erase(pos, d.string().size());
    return s;
  };
  EXPECT_EQ(strip_dir(slurp(a / "dispersion.csv"), a), strip_dir(slurp(b / "dispersion.csv"), b));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = scratch("override");
  ASSERT_EQ(run("taxis --config " + config("fig05_neutral.ini") + " --G_c 0.65 --out " + dir.string()).code, 0);
  const auto j = json::parse(slurp(dir / "taxis.json"));
  EXPECT_NEAR(j["data"]["G_c"].get<double>(), 0.65, 1e-12);
  EXPECT_EQ(j["metadata"]["config"]["U_s"], "15");
}

TEST(Cli, UnknownFlagIsInvalidConfig) { EXPECT_EQ(run("taxis --nonsense 1 --out " + scratch("e1").string()).code, 2); }

TEST(Cli, UnknownConfigKeyIsInvalidConfig) {
  const auto dir = scratch("e2");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ini") << "hbar = 0.5\nwavenumber = 2\n";
  const auto r = run("taxis --config " + (dir / "bad.ini").string() + " --out " + dir.string());
  EXPECT_EQ(r.code, 2);
  const auto err = json::parse(slurp(dir / "error.json"));
  EXPECT_EQ(err["error"]["kind"], "invalid_config");
  EXPECT_EQ(err["error"]["exit_code"], 2);
}

TEST(Cli, MalformedValueIsInvalidConfig) {
  EXPECT_EQ(run("basic-state --U_s fast --out " + scratch("e3").string()).code, 2);
  EXPECT_EQ(run("basic-state --chi 0.1 --G_c 0.7 --out " + scratch("e4").string()).code, 2);
}

TEST(Cli, SolverFailureWritesErrorJson) {
  const auto dir = scratch("e5");
  const auto r = run("phase --mode given --growth neutral --a 2 --Ra 100 --gamma-im 5 --out " + dir.string());
  EXPECT_EQ(r.code, 3);
  const auto err = json::parse(slurp(dir / "error.json"));
  EXPECT_EQ(err["error"]["exit_code"], 3);
  EXPECT_EQ(err["error"]["command"], "phase");
}

TEST(Cli, CriticalReproducesOscillatoryOnset) {
  const auto dir = scratch("critical");
  const auto r = run("critical --config " + config("fig09_critical.ini") + " --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["kind"], "oscillatory");
  EXPECT_NEAR(j["a_c"].get<double>(), 1.9, 0.1);
  EXPECT_NEAR(j["Ra_c"].get<double>(), 79.78, 0.02 * 79.78);
  EXPECT_NEAR(j["omega_c"].get<double>(), 12.98, 0.05 * 12.98);
  EXPECT_TRUE(fs::exists(dir / "critical.json"));
}
