// Runs the cgw binary as a subprocess.

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

#include "cgw/path.hpp"
#include "cgw/rng.hpp"
#include "cgw/tree.hpp"

#ifndef CGW_CLI_PATH
#error "CGW_CLI_PATH must point at the cgw executable"
#endif

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(CGW_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("cgw_cli_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, SampleStructure) {
  const auto r = run("sample --law geometric --n 5 --count 3 --seed 7");
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4U);
  EXPECT_EQ(ls[0].rfind("# cgw-results/1", 0), 0U);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto xi = nlohmann::json::parse(ls[i]).get<std::vector<std::int64_t>>();
    EXPECT_EQ(xi.size(), 5U);
    EXPECT_EQ(std::accumulate(xi.begin(), xi.end(), std::int64_t{0}), 4);
  }
}

TEST(Cli, SampleCsv) {
  const auto r = run("sample --law poisson --n 6 --count 2 --seed 1 --format csv");
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4U);
  EXPECT_EQ(ls[1], "replicate,size,height,xi");
}

TEST(Cli, SampleRoundTrip) {
  cgw::Rng rng = cgw::RngStream(71, 0).engine();
  const std::vector<std::string> laws{"geometric", "poisson", "binary", "zeta"};
  for (int i = 0; i < 100; ++i) {
    const auto& law = laws[static_cast<std::size_t>(i) % laws.size()];
    std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 40);
    if (law == "binary" && n % 2 == 0) ++n;
    const auto seed = rng() % 100000;
    const auto r = run("sample --law " + law + " --n " + std::to_string(n) + " --count 2 --seed " + std::to_string(seed));
    ASSERT_EQ(r.code, 0) << law << " " << n;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 3U);
    for (std::size_t j = 1; j < ls.size(); ++j) {
      const auto tree = cgw::tree_from_json(nlohmann::json::parse(ls[j]));
      EXPECT_EQ(static_cast<std::int64_t>(tree.size()), n);
      EXPECT_TRUE(cgw::encode_tree(tree).is_excursion());
    }
  }
}

TEST(Cli, Enumerate) {
  const auto r = run("enumerate --law geometric --n 3");
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4U);
  for (std::size_t i = 2; i < 4; ++i) {
    const auto comma = ls[i].find(',');
    EXPECT_EQ(std::stod(ls[i].substr(comma + 1)), 0.03125);
  }
  EXPECT_EQ(run("enumerate --law geometric --n 13").code, 2);
}

TEST(Cli, TransformPsi) {
  const auto dir = temp_dir();
  const auto f = dir / "f.json";
  std::ofstream(f) << R"({"breakpoints":[0],"values":[2],"domain_end":1})";
  const auto r = run("transform --op psi --in " + f.string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("result").at("breakpoints"), nlohmann::json::parse("[0.0,0.5]"));
  EXPECT_EQ(j.at("result").at("values"), nlohmann::json::parse("[2.0,0.0]"));
  const auto phi = nlohmann::json::parse(run("transform --op phi --in " + f.string()).out);
  EXPECT_EQ(phi.at("result").at("values"), nlohmann::json::parse("[0.0,1.0]"));
  EXPECT_EQ(run("transform --op psi --in " + (dir / "missing.json").string()).code, 1);
  std::filesystem::remove_all(dir);
}

TEST(Cli, Limit) {
  const auto r = run("limit --law geometric --N 200 --samples 4 --statistic max_h --seed 3");
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 6U);
  EXPECT_EQ(ls[1], "replicate,value,rescaled_height");
  EXPECT_EQ(run("limit --N 50").code, 2);
  EXPECT_EQ(run("limit --statistic mode").code, 2);
}

TEST(Cli, OutputDirectoryAndSidecar) {
  const auto dir = temp_dir();
  const std::string env = "CGW_OUT_DIR=" + dir.string() + " ";
  const std::string cmd = env + CGW_CLI_PATH + " limit --source bessel --N 100 --samples 3 --out res.csv";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "res.csv"));
  std::ifstream meta(dir / "res.csv.meta.json");
  const auto j = nlohmann::json::parse(meta);
  EXPECT_EQ(j.at("version"), "cgw-results/1");
  EXPECT_EQ(j.at("seed"), 1);
  EXPECT_EQ(j.at("spec_hash").get<std::string>().size(), 16U);
  std::filesystem::remove_all(dir);
}

TEST(Cli, Converge) {
  const auto dir = temp_dir();
  std::ofstream(dir / "a.json") << R"({"law":{"kind":"geometric"},"n":50,"samples":300,"statistic":"height","seed":1})";
  std::ofstream(dir / "b.json") << R"({"law":{"kind":"geometric"},"n":50,"samples":300,"statistic":"height","seed":2})";
  const auto r = run("converge --spec-a " + (dir / "a.json").string() + " --spec-b " + (dir / "b.json").string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LT(j.at("statistic").get<double>(), j.at("threshold").get<double>());
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(run("converge --spec-a " + (dir / "none.json").string() + " --spec-b " + (dir / "b.json").string()).code, 1);
  std::filesystem::remove_all(dir);
}

TEST(Cli, Check) {
  const auto r = run("check --name local_limit --law poisson --n 10000");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* k : {"check", "n", "statistic", "threshold", "pass"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_TRUE(nlohmann::json::parse(run("check --name dwass --law binary --n 7").out).at("pass").get<bool>());
  EXPECT_EQ(run("check --name local_limit --law zeta --n 100").code, 1);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("sample").code, 2);
  EXPECT_EQ(run("sample --law nope --n 3").code, 2);
  EXPECT_EQ(run("sample --n 0").code, 2);
  EXPECT_EQ(run("sample --n abc").code, 2);
  EXPECT_EQ(run("sample --law binary --n 4").code, 2);
  EXPECT_EQ(run("sample --law table --pmf 0.5,0.4 --n 3").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, SeedsReproduceAcrossWorkers) {
  const auto a = run("sample --law zeta --n 300 --count 40 --seed 11 --workers 1");
  const auto b = run("sample --law zeta --n 300 --count 40 --seed 11 --workers 8");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run("sample --law zeta --n 300 --count 40 --seed 12").out);
}
