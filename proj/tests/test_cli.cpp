#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "santalo/cli.hpp"

using namespace santalo;
using nlohmann::json;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "santalo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.status = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("santalo_cli_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) rows.push_back(cli::split(line, ','));
  return rows;
}

}  // namespace

TEST(Cli, VerifyFunctionalGaussian) {
  const CliRun r = run({"verify", "functional", "--instance", "gaussian", "--dim", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["theorem"], "Thm2");
  EXPECT_NEAR(j[0]["product"].get<double>(), 6.2832, 1e-4);
  EXPECT_NEAR(j[0]["bound"].get<double>(), 2.0 * kPi, 1e-12);
  EXPECT_TRUE(j[0]["passed"].get<bool>());
  for (const char* key : {"theorem", "product", "bound", "margin", "lambda", "grid_meta", "passed", "flags"})
    EXPECT_TRUE(j[0].contains(key)) << key;
}

TEST(Cli, VerifyStarCube) {
  const CliRun r = run({"verify", "star", "--instance", "cube", "--dim", "2"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_GE(j.size(), 1u);
  EXPECT_NEAR(j[0]["product"].get<double>(), 8.0, 1e-3);
  EXPECT_NEAR(j[0]["bound"].get<double>(), kPi * kPi, 1e-12);
}

TEST(Cli, VerifySplitExponential) {
  const CliRun r = run({"verify", "split", "--instance", "exponential", "--lambda", "0.5"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j[0]["product"].get<double>(), 2.885, 1e-2);
  EXPECT_NEAR(j[0]["bound"].get<double>(), 2.0 * kPi, 1e-3);
  EXPECT_NEAR(j[0]["lambda"].get<double>(), 0.5, 1e-4);
}

TEST(Cli, OtherVerifiers) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"verify", "median", "--instance", "gaussian", "--dim", "2"},
        {"verify", "lemma", "--instance", "gaussian"},
        {"verify", "shift", "--instance", "scaled_gaussian:a=2", "--lambda", "0.3"},
        {"search", "santalo-point", "--instance", "exponential"},
        {"verify", "split", "--instance", "logconcave_mixture:seed=11", "--dim", "2"}}) {
    const CliRun r = run(args);
    EXPECT_EQ(r.status, 0) << args[1] << " " << r.err << r.out;
  }
}

TEST(Cli, MedianCoversEveryAxis) {
  const json j = json::parse(run({"verify", "median", "--instance", "gaussian", "--dim", "2"}).out);
  EXPECT_EQ(j.size(), 2u);
}

TEST(Cli, ConfigErrorsNameTheField) {
  struct Case {
    std::vector<std::string> args;
    std::string field;
  };
  for (const Case& c : std::vector<Case>{
           {{"verify", "functional", "--instance", "nope"}, "--instance"},
           {{"verify", "functional", "--instance", "scaled_gaussian:a=-1"}, "parameter a"},
           {{"verify", "functional", "--instance", "scaled_gaussian"}, "parameter a"},
           {{"verify", "functional", "--instance", "gaussian:b=1"}, "unknown parameter 'b'"},
           {{"verify", "functional", "--instance", "logconcave_mixture:components=0"}, "parameter components"},
           {{"verify", "functional", "--instance", "gaussian", "--dim", "4"}, "dim"},
           {{"verify", "split", "--instance", "gaussian", "--lambda", "1.2"}, "--lambda"},
           {{"verify", "functional"}, "--instance"},
           {{"verify", "star", "--instance", "gaussian"}, "--instance"},
           {{"verify", "functional", "--instance", "gaussian", "--format", "xml"}, "--format"},
           {{"verify", "functional", "--instance", "gaussian", "--box", "1:0"}, "--box"},
           {{"verify", "functional", "--instance", "gaussian", "--resolution", "1"}, "--resolution"},
           {{"generate", "--family", "gaussian"}, "--family"},
           {{"verify", "functional", "--bogus"}, ""},
       }) {
    const CliRun r = run(c.args);
    EXPECT_EQ(r.status, 2) << c.args.back();
    EXPECT_NE(r.err.find(c.field), std::string::npos) << r.err;
  }
}

TEST(Cli, InstanceErrorsBecomeFailedReports) {
  const CliRun r = run({"verify", "functional", "--instance", "gaussian", "--instance", "indicator_interval:lo=5,hi=6",
                     "--instance", "grid_file:path=/nonexistent.grid"});
  EXPECT_EQ(r.status, 1);
  const json j = json::parse(r.out);
  ASSERT_EQ(j.size(), 3u);
  EXPECT_TRUE(j[0]["passed"].get<bool>());
  for (int i : {1, 2}) {
    EXPECT_FALSE(j[i]["passed"].get<bool>());
    bool has_error = false;
    for (const auto& f : j[i]["flags"]) has_error = has_error || f.get<std::string>().rfind("error:", 0) == 0;
    EXPECT_TRUE(has_error);
  }
}

TEST(Cli, ExitStatusTracksPassed) {
  const CliRun ok = run({"verify", "functional", "--instance", "gaussian", "--instance", "logconcave_mixture"});
  EXPECT_EQ(ok.status, 0);
  for (const auto& rep : json::parse(ok.out)) EXPECT_TRUE(rep["passed"].get<bool>());
}

TEST(Cli, DeterministicAcrossRunsAndThreads) {
  const std::vector<std::string> base = {"verify", "median", "--instance", "logconcave_mixture", "--instance",
                                         "logconcave_mixture", "--instance", "gaussian", "--dim", "2", "--seed", "40"};
  auto with = [&](const char* threads) {
    auto a = base;
    a.insert(a.end(), {"--threads", threads});
    return run(a).out;
  };
  const std::string one = with("1");
  EXPECT_EQ(one, with("4"));
  EXPECT_EQ(one, with("4"));
  const json j = json::parse(one);
  // seeds default to global_seed + index
  const CliRun csv = run({"verify", "median", "--instance", "logconcave_mixture", "--instance", "logconcave_mixture",
                       "--dim", "2", "--seed", "40", "--format", "csv"});
  const auto rows = csv_rows(csv.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"theorem", "seed", "product", "bound", "margin", "passed"}));
  EXPECT_EQ(rows[1][1], "40");
  EXPECT_EQ(rows[3][1], "41");
  EXPECT_NE(j[0]["product"], j[2]["product"]);
}

TEST(Cli, WritesJsonAndCsvFiles) {
  const auto dir = temp_dir("out");
  const std::string base = (dir / "run").string();
  const CliRun r = run({"verify", "functional", "--instance", "gaussian", "--out", base, "--format", "json,csv"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(detail::read_all(base + ".json")).size(), 1u);
  EXPECT_EQ(csv_rows(detail::read_all(base + ".csv")).size(), 2u);
}

TEST(Cli, ConfigFileWithFlagOverrides) {
  const auto dir = temp_dir("config");
  const std::string cfg = (dir / "c.json").string();
  detail::write_all(cfg, json{{"command", "verify median"}, {"instances", {"gaussian"}}, {"dim", 2}, {"format", "csv"}}.dump());
  const CliRun a = run({"--config", cfg});
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(csv_rows(a.out).size(), 3u);
  const CliRun b = run({"verify", "median", "--config", cfg, "--dim", "1"});
  ASSERT_EQ(b.status, 0) << b.err;
  EXPECT_EQ(csv_rows(b.out).size(), 2u);
  detail::write_all(cfg, json{{"command", "verify median"}, {"instances", {"gaussian"}}, {"lambda", 3}}.dump());
  EXPECT_EQ(run({"--config", cfg}).status, 2);
}

TEST(Cli, GenerateIsDeterministic) {
  const auto d1 = temp_dir("gen1"), d2 = temp_dir("gen2");
  ASSERT_EQ(run({"generate", "--family", "logconcave_mixture", "--seed", "7", "--count", "1", "--out", d1.string()}).status, 0);
  ASSERT_EQ(run({"generate", "--family", "logconcave_mixture", "--seed", "7", "--count", "1", "--out", d2.string()}).status, 0);
  const std::string name = "logconcave_mixture_d1_s7.grid";
  EXPECT_EQ(detail::read_all((d1 / name).string()), detail::read_all((d2 / name).string()));
  const json meta = json::parse(detail::read_all((d1 / "logconcave_mixture_d1_s7.json").string()));
  EXPECT_EQ(meta["seed"], 7);
}

TEST(Cli, GenerateSeedSensitivity) {
  const auto d = temp_dir("gen3");
  const CliRun r = run({"generate", "--family", "logconcave_mixture", "--seed", "7", "--count", "2", "--out", d.string()});
  ASSERT_EQ(r.status, 0);
  const GridFunction a = read_grid((d / "logconcave_mixture_d1_s7.grid").string());
  const GridFunction b = read_grid((d / "logconcave_mixture_d1_s8.grid").string());
  double m = 0.0;
  for (std::size_t i = 0; i < a.logvals.size(); ++i)
    m = std::max(m, std::abs(std::exp(a.logvals[i]) - std::exp(b.logvals[i])));
  EXPECT_GT(m, 1e-3);
}

TEST(Cli, GeneratedInstancesVerify) {
  const auto d = temp_dir("gen4");
  const CliRun g = run({"generate", "--family", "random-star", "--dim", "2", "--seed", "3", "--count", "2", "--out", d.string()});
  ASSERT_EQ(g.status, 0);
  std::vector<std::string> args = {"verify", "star", "--dim", "2"};
  for (const auto& item : json::parse(g.out)) {
    args.push_back("--instance");
    args.push_back(item["instance"].get<std::string>());
  }
  const CliRun v = run(args);
  EXPECT_EQ(v.status, 0) << v.err << v.out;
  EXPECT_EQ(json::parse(detail::read_all((d / "random-star_d2_s3.json").string()))["seed"], 3);
}

TEST(Cli, PlotDataLambdaSweep) {
  const CliRun r = run({"plot-data", "--instance", "gaussian", "--dim", "2", "--lambda", "0.25,0.5"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "product", "bound", "margin"}));
  const double cap = 4.0 * kPi * kPi;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double lam = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][2]), cap / (4.0 * lam * (1.0 - lam)), 1e-12 * cap);
  }
  EXPECT_NEAR(std::stod(rows[1][0]), 0.25, 1e-4);
  EXPECT_NEAR(std::stod(rows[2][2]), cap, 1e-6);
  EXPECT_NEAR(std::stod(rows[1][2]), cap / 0.75, 1e-3);
}

TEST(Cli, PlotDataResolutionSweepShrinks) {
  const CliRun r = run({"plot-data", "--instance", "gaussian", "--sweep", "resolution"});
  // the coarsest grids overshoot the bound, so not every point passes
  EXPECT_EQ(r.status, 1) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_GE(rows.size(), 4u);
  int shrinking = 0, steps = 0;
  for (std::size_t i = 2; i < rows.size(); ++i, ++steps)
    if (std::abs(std::stod(rows[i][3])) < std::abs(std::stod(rows[i - 1][3]))) ++shrinking;
  EXPECT_GE(shrinking, 0.8 * steps);
}

TEST(Cli, TransformPolarWritesGrid) {
  const auto d = temp_dir("polar");
  const std::string path = (d / "p.grid").string();
  const CliRun r = run({"transform", "polar", "--instance", "gaussian", "--out", path});
  ASSERT_EQ(r.status, 0) << r.err;
  const GridFunction g = read_grid(path);
  EXPECT_NEAR(integrate(g), std::sqrt(2.0 * kPi), 1e-6);
  EXPECT_EQ(json::parse(r.out)[0]["path"], path);
}

TEST(Cli, ExplicitPolarBox) {
  const CliRun r = run({"verify", "functional", "--instance", "gaussian", "--polar-box", "-3:3"});
  ASSERT_EQ(r.status, 0);
  const json j = json::parse(r.out);
  EXPECT_LT(j[0]["product"].get<double>(), 2.0 * kPi * 0.999);
}

TEST(Cli, Help) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("verify"), std::string::npos);
}

TEST(Cli, InstanceSpecParsing) {
  const cli::InstanceSpec s = cli::parse_instance("cosine_perturbed:amplitude=0.2,mode=3,dim=3", 2);
  EXPECT_EQ(s.family, "cosine-perturbed");
  EXPECT_EQ(s.dim, 3u);
  EXPECT_EQ(s.params.at("mode"), "3");
  EXPECT_TRUE(s.is_body());
  EXPECT_EQ(cli::parse_instance(s.text(), 3).text(), s.text());
  EXPECT_THROW(cli::parse_instance("ellipsoid:axes", 2), Error);
}
