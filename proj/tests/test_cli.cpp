#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvp_cli.hpp"

using namespace cvp;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "cvp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("cvp_test_" + name)).string();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const std::vector<std::string> kQuick{"--restarts", "2", "--steps-per-temp", "60", "--cooling", "0.9"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, ExactChain) {
  const auto r = call({"exact", "chain", "--tau", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["m0"], 10);
  EXPECT_NEAR(j["action"].get<double>(), 7.9686, 1e-4);
  EXPECT_EQ(j["certificate"]["classification"], "SingularCandidate");
}

TEST(Cli, ExactOctahedronAndDensity) {
  const json j = json::parse(call({"exact", "octahedron", "--tau", "1.2"}).out);
  EXPECT_NEAR(j["action"].get<double>(), 2.9952, 1e-12);
  EXPECT_EQ(j["certificate"]["classification"], "GenericallyTimelike");
  const json d = json::parse(call({"exact", "density", "--tau", "1.001"}).out);
  EXPECT_NEAR(d["action"].get<double>(), d["nu0"].get<double>(), 1e-6);
  const json u = json::parse(call({"exact", "uniform", "--tau", "1.3", "--m", "4"}).out);
  EXPECT_NEAR(u["action"].get<double>(), u["nu0"].get<double>(), 1e-12);
}

TEST(Cli, FlagCheck) {
  const auto r = call({"flag-check", "--f", "3", "--tau", "2", "--eps", "0.01"});
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_LT(j["det"].get<double>(), 0.0);
  EXPECT_NEAR(j["threshold"].get<double>(), 1.9390, 5e-5);
  EXPECT_NEAR(j["gram"][0][1].get<double>(), j["kernel_gram"][0][1].get<double>(), 1e-10);
}

TEST(Cli, HypothesisAndDomainErrorsExitTwo) {
  const auto r = call({"exact", "chain", "--tau", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sqrt(3 + sqrt(10))"), std::string::npos);
  EXPECT_EQ(call({"exact", "chain", "--tau", "2", "--force"}).code, 0);
  EXPECT_EQ(call({"flag-check", "--f", "2", "--tau", "2"}).code, 2);
  EXPECT_EQ(call({"minimize", "--manifold", "torus"}).code, 2);
  EXPECT_EQ(call({"minimize", "--tau", "0.5"}).code, 2);
  EXPECT_EQ(call({"bogus"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"minimize", "--m", "many"}).code, 2);
  EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Cli, IoErrorsExitThree) {
  EXPECT_EQ(call({"certify", "--measure", "/nonexistent/m.json"}).code, 3);
  EXPECT_EQ(call({"minimize", "--config", "/nonexistent/c.json"}).code, 3);
  EXPECT_EQ(call(cat({"minimize", "--m", "3", "-o", "/nonexistent/dir/out.json"}, kQuick)).code, 3);
}

TEST(Cli, ConfigRejectsUnknownKeys) {
  const std::string path = tmp_path("bad_config.json");
  write(path, R"({"manifold": "circle", "colour": "red"})");
  const auto r = call({"minimize", "--config", path});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("colour"), std::string::npos);
  write(path, R"({"schedule": {"speed": 1}})");
  EXPECT_EQ(call({"minimize", "--config", path}).code, 2);
  write(path, "{not json");
  EXPECT_EQ(call({"minimize", "--config", path}).code, 2);
}

TEST(Cli, FlagsOverrideConfig) {
  const std::string path = tmp_path("config.json");
  write(path, R"({"manifold": "sphere", "tau": 1.2, "m": 6, "seed": 4,
                  "schedule": {"restarts": 2, "steps_per_temp": 60, "cooling": 0.9}})");
  const auto a = call({"minimize", "--config", path});
  ASSERT_EQ(a.code, 0) << a.err;
  const json ja = json::parse(a.out);
  EXPECT_EQ(ja["measure"]["manifold"], "sphere");
  EXPECT_EQ(ja["measure"]["tau"], 1.2);
  EXPECT_EQ(ja["anneal"]["restarts"], 2);
  const json jb = json::parse(call({"minimize", "--config", path, "--tau", "1.1"}).out);
  EXPECT_EQ(jb["measure"]["tau"], 1.1);
  EXPECT_EQ(jb["anneal"]["m"], 6);
}

TEST(Cli, MinimizeIsByteIdentical) {
  const auto args = cat({"minimize", "--manifold", "circle", "--tau", "3", "--m", "12", "--seed", "9"}, kQuick);
  const auto a = call(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, call(args).out);
  ::setenv("CVP_THREADS", "3", 1);
  const auto b = call(args);
  ::unsetenv("CVP_THREADS");
  EXPECT_EQ(a.out, b.out);
  const json j = json::parse(a.out);
  EXPECT_NEAR(j["certificate"]["action"].get<double>(), 7.9686, 0.01 * 7.9686);
}

TEST(Cli, EmittedMeasureRoundTrips) {
  const std::string path = tmp_path("measure.json");
  const auto r = call(cat({"minimize", "--manifold", "flag", "--f", "3", "--tau", "1.5", "--m", "5", "-o", path}, kQuick));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const json saved = read_json_file(path);
  const auto c = call({"certify", "--measure", path});
  ASSERT_EQ(c.code, 0) << c.err;
  const double before = saved["certificate"]["action"].get<double>();
  const double after = json::parse(c.out)["certificate"]["action"].get<double>();
  EXPECT_LT(std::abs(before - after), 1e-12);
}

TEST(Cli, Bounds) {
  const std::string oct = std::string(CVP_DATA_DIR) + "/packings/octahedron.txt";
  const auto r = call({"bounds", "--tau", "2", "--packing", oct, "--packing", "/nonexistent/p.txt"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("skipped"), std::string::npos);
  const json j = json::parse(r.out);
  EXPECT_LE(j["tammes_upper"].get<double>(), 16.0 / 3 + 1e-12);
  EXPECT_EQ(j["tammes"].size(), 1u);
  EXPECT_TRUE(j["sandwich"].get<bool>());
  EXPECT_GT(j["heat_kernel"]["S_K"].get<double>(), 0.0);
  EXPECT_EQ(call({"bounds", "--manifold", "circle", "--tau", "2"}).code, 2);

  const json one = json::parse(call({"bounds", "--tau", "1"}).out);
  EXPECT_NEAR(one["volume_upper"].get<double>(), 8.0 / 3, 1e-12);
  EXPECT_NEAR(one["nu0"]["value"].get<double>(), 8.0 / 3, 1e-12);
}

TEST(Cli, ScanCsvAndEmptyGrid) {
  const auto empty = call({"scan", "--tau-min", "2", "--tau-max", "1"});
  EXPECT_EQ(empty.code, 0);
  EXPECT_EQ(empty.out, "tau,m,action,support_size,classification,el_residual\n");
  const auto args = cat({"scan", "--tau-min", "1.1", "--tau-max", "1.2", "--step", "0.05", "--m", "6"}, kQuick);
  const auto a = call(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, call(args).out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 4);
  const auto js = call(cat(args, {"--format", "json"}));
  EXPECT_EQ(json::parse(js.out).size(), 3u);
  EXPECT_EQ(call(cat(args, {"--format", "xml"})).code, 2);
}
