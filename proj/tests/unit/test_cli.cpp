#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

using namespace ncst;
using namespace ncst::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "ncst_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ParamArgs base_params() { return {"1,2", "4,0;0,1", "3,3", 3.0}; }

int code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const CliError& e) {
    return e.code();
  } catch (const ncst::Error& e) {
    return exit_code_for(e);
  }
  return 0;
}

}  // namespace

TEST(Parse, VectorsAndMatrices) {
  EXPECT_EQ(parse_vector("1, 2.5,-3", "x"), (Vector(3) << 1, 2.5, -3).finished());
  const Matrix m = parse_matrix("4,0; 0,1", "Omega");
  EXPECT_EQ(m, (Matrix(2, 2) << 4, 0, 0, 1).finished());
  EXPECT_EQ(code_of([] { parse_vector("1,a", "xi"); }), kInputError);
  EXPECT_EQ(code_of([] { parse_matrix("1,2;3", "Omega"); }), kInputError);
}

TEST(Sample, SingleRowAndHeader) {
  SampleArgs a;
  a.params = base_params();
  a.n = 1;
  a.seed = 7;
  const auto dm = sample_matrix(a);
  EXPECT_EQ(dm.rows(), 1);
  EXPECT_EQ(dm.labels, (std::vector<std::string>{"t1", "t2"}));
}

TEST(Sample, ValidationMessages) {
  SampleArgs a;
  a.params = base_params();
  a.params.r = 0.0;
  a.n = 5;
  a.seed = 1;
  try {
    sample_matrix(a);
    FAIL();
  } catch (const CliError& e) {
    EXPECT_EQ(e.code(), kInputError);
    EXPECT_NE(std::string(e.what()).find("r must be positive"), std::string::npos);
  }
  a.params.r = 3.0;
  a.params.alpha = "1,2,3";
  EXPECT_EQ(code_of([&] { sample_matrix(a); }), kInputError);
  a.params.alpha = "1,2";
  a.seed.reset();
  EXPECT_EQ(code_of([&] { sample_matrix(a); }), kInputError);
}

TEST(Sample, RerunIsByteIdentical) {
  SampleArgs a;
  a.params = base_params();
  a.n = 500;
  a.seed = 11;
  a.out = scratch("s1.csv").string();
  cmd_sample(a, {});
  const std::string first = slurp(a.out);
  cmd_sample(a, {});
  EXPECT_EQ(first, slurp(a.out));
  EXPECT_TRUE(std::filesystem::exists(a.out + ".manifest.json"));
  const auto manifest = json::parse(slurp(a.out + ".manifest.json"));
  EXPECT_EQ(manifest["seed"], 11);
  EXPECT_EQ(manifest["command"], "sample");
  EXPECT_TRUE(manifest.contains("timestamp"));
}

TEST(Density, SkewNormalModeValue) {
  const auto pts = scratch("pts.csv");
  std::ofstream(pts) << "t1,t2\n1,2\n";
  DensityArgs a;
  a.dist = "sn";
  a.params = {"1,2", "4,0;0,1", "0,0", std::nullopt};
  a.points = pts.string();
  const auto v = density_values(a, read_csv(a.points));
  EXPECT_NEAR(v[0], -0.5 * (2.0 * std::log(2.0 * std::numbers::pi) + std::log(4.0)), 1e-14);
  std::ofstream(pts) << "t1\n1\n";
  EXPECT_EQ(code_of([&] { density_values(a, read_csv(a.points)); }), kInputError);
}

TEST(Quadform, NonIdempotentExitsThree) {
  QuadformArgs a;
  a.params = {"1,2", "", "3,3", 3.0};
  a.w = "1,1;1,1";
  a.seed = 1;
  a.n = 100;
  EXPECT_EQ(code_of([&] { run_quadform(a, nullptr, {}); }), kConditionFailure);
}

TEST(Fit, UnknownModelListsValidNames) {
  try {
    parse_models({"MVN,foo"});
    FAIL();
  } catch (const CliError& e) {
    EXPECT_EQ(e.code(), kInputError);
    EXPECT_NE(std::string(e.what()).find("AZZALINI_ST"), std::string::npos);
  }
  EXPECT_EQ(parse_models({}).size(), 4u);
  EXPECT_EQ(parse_models({"sn", "MVN"}).size(), 2u);
}

TEST(Wdbc, MissingColumnExitsTwo) {
  const auto f = scratch("bad_wdbc.csv");
  std::ofstream(f) << "id,concavity_se,symmetry_se\n1,0.1,0.2\n";
  WdbcArgs a{f.string(), ""};
  try {
    cmd_wdbc_matrix(a);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(exit_code_for(e), kInputError);
    EXPECT_NE(std::string(e.what()).find("fractal_dimension_se"), std::string::npos);
  }
}
