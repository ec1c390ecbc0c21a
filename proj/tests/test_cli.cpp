#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "physim_cli.hpp"

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "physim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = physim::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << contents;
  return p;
}

}  // namespace

TEST(CliFlow, SafeThresholdsPass) {
  const auto r = cli({"flow", "--n", "16", "--seed", "1", "--safe-thresholds"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).back(), "PASS");
}

TEST(CliFlow, LargeDeltaIsFalsified) {
  const auto r = cli({"flow", "--n", "16", "--delta", "0.2", "--trials", "100", "--format", "json"});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["verification"]["status"], "FALSIFIED");
  EXPECT_GT(j["verification"]["details"]["misrounded_trials"].get<int>(), 0);
}

TEST(CliFlow, ZeroSizeIsUsageError) { EXPECT_EQ(cli({"flow", "--n", "0"}).code, 2); }

TEST(CliFlow, IntegerMatrixFiles) {
  const auto a = temp_file("physim_cli_a.txt", "2\n3 1\n0 2\n");
  const auto b = temp_file("physim_cli_b.txt", "2\n1 2\n3 1\n");
  const auto r = cli({"flow", "--a", a.string(), "--b", b.string(), "--safe-thresholds", "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["verification"]["status"], "PASS");
  EXPECT_EQ(cli({"flow", "--a", a.string()}).code, 2);
  EXPECT_EQ(cli({"flow", "--a", "/nonexistent/a", "--b", b.string()}).code, 2);
}

TEST(CliKinetic, BothModelsPass) {
  const auto k = cli({"kinetic", "--n", "32", "--model", "kinetic", "--seed", "7"});
  EXPECT_EQ(k.code, 0);
  EXPECT_NE(k.out.find("pi^2/6 margin"), std::string::npos);
  const auto o = cli({"kinetic", "--n", "32", "--model", "optical"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("d,channel,absorbed,bound_1_over_8d,margin"), std::string::npos);
}

TEST(CliKinetic, ExhaustiveTwo) {
  const auto r = cli({"kinetic", "--n", "2", "--exhaustive", "--format", "json"});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["verification"]["details"]["instances"], 256);
  EXPECT_EQ(j["verification"]["details"]["failures"], 0);
  EXPECT_EQ(cli({"kinetic", "--n", "4", "--exhaustive"}).code, 2);
}

TEST(CliAlpha, MatmulCopyAndBrokenRotation) {
  const auto m = cli({"alpha", "matmul", "--n", "16", "--alpha", "1"});
  EXPECT_EQ(m.code, 0);
  EXPECT_NE(m.out.find("energy_over_n2: 4.0"), std::string::npos);

  const auto c = cli({"alpha", "copy", "--n", "4096", "--alpha", "2", "--s", "0.2", "--format", "json"});
  EXPECT_EQ(c.code, 0);
  const auto j = nlohmann::json::parse(c.out);
  EXPECT_NEAR(j["verification"]["details"]["predicted_time_exponent"].get<double>(), 0.6, 1e-12);
  EXPECT_EQ(j["verification"]["details"]["closed_form_agrees"], true);

  const auto bad = cli({"alpha", "matmul", "--n", "4", "--break-rotation"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("conflict"), std::string::npos);
  EXPECT_EQ(cli({"alpha", "copy", "--n", "64", "--shared-block"}).code, 1);
  EXPECT_EQ(cli({"alpha", "subquadratic", "--n", "30"}).code, 2);
}

TEST(CliGadget, OrAndDiffuse) {
  EXPECT_EQ(cli({"gadget", "or", "--bits", "0100", "--v", "1"}).code, 0);
  EXPECT_EQ(cli({"gadget", "or", "--bits", "01x0"}).code, 2);
  EXPECT_EQ(cli({"gadget", "diffuse", "--side", "4"}).code, 0);
  EXPECT_EQ(cli({"gadget", "diffuse", "--side", "8", "--eps", "1e-9", "--max-steps", "3"}).code, 1);
}

TEST(CliSweep, FlowMatmulCsvShape) {
  const auto r = cli({"sweep", "--target", "flow-matmul", "--n", "8,16,32,64"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 7u);
  EXPECT_EQ(l[0], "label,n,seed,time,energy");
  EXPECT_EQ(l[5], "label,exponent_time,exponent_energy,r2_time,r2_energy");
  EXPECT_EQ(l[6].rfind("flow-matmul,", 0), 0u);
}

TEST(CliSweep, EllipsisDoublingAndExponent) {
  const auto r = cli({"sweep", "--target", "alpha-copy", "--alpha", "1", "--s", "0.3333", "--n", "1024,...,65536",
                      "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["samples"].size(), 7u);
  EXPECT_NEAR(j["fit"]["time"]["exponent"].get<double>(), 2.0 / 3.0, 0.05);
}

TEST(CliSweep, InvalidTargetIsUsageError) {
  EXPECT_EQ(cli({"sweep", "--target", "nope", "--n", "8,16"}).code, 2);
  EXPECT_EQ(cli({"sweep", "--target", "flow-matmul", "--n", "8,x"}).code, 2);
  EXPECT_EQ(cli({"bogus"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
}

TEST(CliParseN, Forms) {
  using physim::cli::parse_n_values;
  EXPECT_EQ(parse_n_values({"8", "16"}), (std::vector<std::uint64_t>{8, 16}));
  EXPECT_EQ(parse_n_values({"8", "...", "64"}), (std::vector<std::uint64_t>{8, 16, 32, 64}));
  EXPECT_EQ(parse_n_values({"2", "6", "...", "54"}), (std::vector<std::uint64_t>{2, 6, 18, 54}));
  EXPECT_THROW(parse_n_values({"...", "8"}), physim::cli::usage_error);
}

TEST(CliDeterminism, RepeatedRunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"flow", "--n", "12", "--delta", "0.05", "--eps", "0.01", "--trials", "3", "--format", "json"},
      {"flow", "--n", "12", "--delta", "0.05", "--eps", "0.01", "--format", "csv"},
      {"kinetic", "--n", "12", "--model", "optical", "--format", "json"},
      {"alpha", "copy", "--n", "500", "--format", "csv"},
      {"sweep", "--target", "kinetic-matmul", "--n", "4,8,16"},
      {"sweep", "--target", "flow-matvec", "--n", "4,8,16", "--format", "json"},
  };
  for (const auto& c : commands) {
    auto with_seed = c;
    with_seed.insert(with_seed.end(), {"--seed", "99"});
    const auto a = cli(with_seed), b = cli(with_seed);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out) << c[0];
  }
}

TEST(CliSeed, EnvironmentDefault) {
  const std::vector<std::string> cmd{"flow", "--n", "8", "--delta", "0.1", "--eps", "0.01", "--format", "json"};
  ::setenv("PHYSIM_SEED", "5", 1);
  const auto env = cli(cmd);
  ::unsetenv("PHYSIM_SEED");
  auto explicit_seed = cmd;
  explicit_seed.insert(explicit_seed.end(), {"--seed", "5"});
  EXPECT_EQ(env.out, cli(explicit_seed).out);
  ::setenv("PHYSIM_SEED", "abc", 1);
  EXPECT_EQ(cli(cmd).code, 2);
  ::unsetenv("PHYSIM_SEED");
}

TEST(CliOutput, WritesFile) {
  const auto path = std::filesystem::temp_directory_path() / "physim_cli_out.csv";
  const auto r = cli({"alpha", "matmul", "--n", "4", "--format", "csv", "--output", path.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "label,time,energy");
}
