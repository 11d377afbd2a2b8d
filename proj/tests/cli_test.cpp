#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

#include "cdint/cdint.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "cdint_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  ++counter;
  fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
  fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
  std::string cmd = std::string(CDINT_CLI_PATH) + " " + args + " > " +
                    out.string() + " 2> " + err.string();
  int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

std::string write_model(const std::string& name, const std::string& text) {
  fs::path path = scratch_dir() / name;
  std::ofstream out(path);
  out << text;
  return path.string();
}

std::string path3_table_file() {
  static std::string path = write_model("path3_table.json", R"({
    "vertices": 3,
    "edges": [
      {"vertices": [0, 1],
       "potential": {"family": "table", "values": [1, 1, 1, 1.01]}},
      {"vertices": [1, 2],
       "potential": {"family": "table", "values": [1, 1, 1, 1.01]}}
    ],
    "N": 2,
    "delta": 0.2
  })");
  return path;
}

std::string path3_exp_file() {
  static std::string path = write_model("path3_exp.json", R"({
    "vertices": ["a", "b", "c"],
    "edges": [
      {"vertices": ["a", "b"],
       "potential": {"family": "exp-bilinear", "c": 1.0, "epsilon": 0.039}},
      {"vertices": ["b", "c"],
       "potential": {"family": "exp-bilinear", "c": 1.0, "epsilon": 0.039}}
    ],
    "delta": 0.2
  })");
  return path;
}

std::string cycle10_exp_file() {
  static std::string path = [] {
    std::ostringstream text;
    text << R"({"vertices": 10, "edges": [)";
    for (int v = 0; v < 10; ++v) {
      if (v) text << ", ";
      text << R"({"vertices": [)" << v << ", " << (v + 1) % 10
           << R"(], "potential": {"family": "exp-bilinear", "c": 1.0, )"
           << R"("epsilon": 0.02}})";
    }
    text << R"(], "delta": 0.2})";
    return write_model("cycle10_exp.json", text.str());
  }();
  return path;
}

TEST(CliCheck, ValidModelPasses) {
  auto r = run_cli("check " + path3_table_file());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_EQ(report["subcommand"], "check");
  EXPECT_TRUE(report["pass"].get<bool>());
  EXPECT_EQ(report["vertex_count"], 3);
  EXPECT_EQ(report["max_degree"], 2);
  EXPECT_EQ(report["num_levels"], 2);
  EXPECT_EQ(report["delta"], 0.2);
  EXPECT_NEAR(report["window"].get<double>(), 1.0416079, 1e-6);
  EXPECT_EQ(report["edges"].size(), 2u);
  for (const auto& edge : report["edges"])
    EXPECT_TRUE(edge["pass"].get<bool>());
  std::string digest = report["input_digest"];
  EXPECT_EQ(digest.rfind("fnv1a64:", 0), 0u);
  EXPECT_NE(r.err.find("admissible"), std::string::npos);
}

TEST(CliCheck, WideSpreadFailsAdmissibility) {
  std::string file = write_model("wide_spread.json", R"({
    "vertices": 3,
    "edges": [
      {"vertices": [0, 1],
       "potential": {"family": "exp-bilinear", "c": 1.0, "epsilon": 0.2}},
      {"vertices": [1, 2],
       "potential": {"family": "exp-bilinear", "c": 1.0, "epsilon": 0.2}}
    ],
    "N": 2,
    "delta": 0.2
  })");
  auto r = run_cli("check " + file);
  EXPECT_EQ(r.exit_code, 1);
  json report = json::parse(r.out);
  EXPECT_FALSE(report["pass"].get<bool>());
  EXPECT_NE(r.err.find("NOT admissible"), std::string::npos);
  EXPECT_NE(r.err.find("exceeds window"), std::string::npos);
}

TEST(CliCheck, EdgelessModelWarns) {
  std::string file = write_model("edgeless.json",
                                 R"({"vertices": 1, "edges": [],
                                     "N": 2, "delta": 0.1})");
  auto r = run_cli("check " + file);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.err.find("trivial product model"), std::string::npos);
}

TEST(CliCheck, LevelOverrideMismatchFails) {
  auto r = run_cli("check " + path3_table_file() + " --N 3");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("validation error"), std::string::npos);
}

TEST(CliOracle, ExactPartitionFunction) {
  auto r = run_cli("oracle " + path3_table_file());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_NEAR(report["z"].get<double>(), 8.0401, 1e-9);
  EXPECT_NEAR(report["log_z"].get<double>(), std::log(8.0401), 1e-12);
  EXPECT_EQ(report["free_vertices"], 3);
  EXPECT_EQ(report["enumerated"], 8.0);
}

TEST(CliOracle, RestrictionsAndMarginals) {
  auto r = run_cli("oracle " + path3_table_file() +
                   " --beta \"1=0\" --marginal 0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_NEAR(report["z"].get<double>(), 4.0, 1e-12);
  EXPECT_EQ(report["beta"]["1"], 0);
  EXPECT_EQ(report["marginal"]["vertex"], 0);
  EXPECT_NEAR(report["marginal"]["values"][0].get<double>(), 0.5, 1e-12);

  auto unrestricted = run_cli("oracle " + path3_table_file() +
                              " --marginal 1");
  json u = json::parse(unrestricted.out);
  EXPECT_NEAR(u["marginal"]["values"][0].get<double>(), 4.0 / 8.0401, 1e-12);
}

TEST(CliOracle, BudgetRefusal) {
  auto r = run_cli("oracle " + path3_table_file() + " --budget 4");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("budget exceeded"), std::string::npos);
}

TEST(CliOracle, QuadratureWithoutALevelCount) {
  auto r = run_cli("oracle " + path3_exp_file() + " --quadrature 64");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_FALSE(report.contains("z"));
  EXPECT_FALSE(report.contains("N"));
  EXPECT_EQ(report["quadrature"]["refinement"], 64);
  EXPECT_NEAR(report["quadrature"]["value"].get<double>(), 1.0197995, 1e-6);
  double value = report["quadrature"]["value"].get<double>();
  double refined = report["quadrature"]["refined_value"].get<double>();
  EXPECT_NEAR(refined, value, 1e-6);

  auto bad = run_cli("oracle " + path3_exp_file() +
                     " --quadrature 16 --marginal b");
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.err.find("marginals need a level count"), std::string::npos);
}

TEST(CliEstimateZ, MatchesTheOracleAtFullDepth) {
  auto r = run_cli("estimate-z " + path3_table_file() + " --depth 3");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_NEAR(report["z"].get<double>(), 8.0401, 1e-9);
  EXPECT_EQ(report["depth"], 3);
  EXPECT_EQ(report["delta"], 0.2);
  EXPECT_TRUE(report["error_bound_rel"].is_null());

  auto deep = run_cli("estimate-z " + path3_table_file() + " --depth 15");
  json deep_report = json::parse(deep.out);
  ASSERT_TRUE(deep_report["error_bound_rel"].is_number());
  double bound = deep_report["error_bound_rel"].get<double>();
  EXPECT_GT(bound, 0.0);
  EXPECT_LT(bound, 1.0);
  EXPECT_NEAR(deep_report["z"].get<double>(), 8.0401, bound * 8.0401);
}

TEST(CliEstimateZ, AutoDeltaDerivesFromTheWindow) {
  std::string file = write_model("path3_104.json", R"({
    "vertices": 3,
    "edges": [
      {"vertices": [0, 1],
       "potential": {"family": "table", "values": [1, 1, 1, 1.04]}},
      {"vertices": [1, 2],
       "potential": {"family": "table", "values": [1, 1, 1, 1.04]}}
    ],
    "N": 2,
    "delta": 0.1
  })");
  auto with_file_delta = run_cli("estimate-z " + file + " --depth 3");
  EXPECT_EQ(json::parse(with_file_delta.out)["delta"], 0.1);

  auto with_auto = run_cli("estimate-z " + file + " --depth 3 --delta auto");
  EXPECT_NEAR(json::parse(with_auto.out)["delta"].get<double>(),
              0.2049283668, 1e-6);
}

TEST(CliEstimateZ, ParseFailuresExitThree) {
  auto missing = run_cli("estimate-z /nonexistent/model.json");
  EXPECT_EQ(missing.exit_code, 3);
  EXPECT_NE(missing.err.find("parse error"), std::string::npos);

  std::string broken = write_model("broken.json", "{\"vertices\": 3,");
  auto malformed = run_cli("estimate-z " + broken);
  EXPECT_EQ(malformed.exit_code, 3);

  auto unknown = run_cli("estimate-q " + path3_table_file());
  EXPECT_EQ(unknown.exit_code, 3);
}

TEST(CliEstimateZ, FlagValidationExitsOne) {
  auto bad_depth = run_cli("estimate-z " + path3_table_file() +
                           " --depth xyz");
  EXPECT_EQ(bad_depth.exit_code, 1);
  EXPECT_NE(bad_depth.err.find("--depth expects"), std::string::npos);

  auto bad_cache = run_cli("estimate-z " + path3_table_file() +
                           " --cache maybe");
  EXPECT_EQ(bad_cache.exit_code, 1);
  EXPECT_NE(bad_cache.err.find("--cache expects"), std::string::npos);
}

TEST(CliEstimateZ, FeasibilityGuardAndForce) {
  auto refused = run_cli("estimate-z " + cycle10_exp_file() +
                         " --N 3 --depth 35");
  EXPECT_EQ(refused.exit_code, 2);
  EXPECT_NE(refused.err.find("--force"), std::string::npos);

  auto forced = run_cli("estimate-z " + cycle10_exp_file() +
                        " --N 3 --depth 35 --force");
  ASSERT_EQ(forced.exit_code, 0) << forced.err;
  json report = json::parse(forced.out);
  EXPECT_GT(report["z"].get<double>(), 0.0);
  EXPECT_GT(report["predicted_calls"].get<double>(), 1e9);
}

TEST(CliEstimateIntegral, EdgelessModelIsExactlyOne) {
  std::string file = write_model("single_vertex.json",
                                 R"({"vertices": 1, "edges": [],
                                     "N": 2, "delta": 0.1})");
  auto r = run_cli("estimate-integral " + file);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_EQ(report["integral"], 1.0);
  EXPECT_EQ(report["N"], 1);
  EXPECT_LE(report["combined_lower"].get<double>(), 1.0);
  EXPECT_GE(report["combined_upper"].get<double>(), 1.0);
}

TEST(CliEstimateIntegral, BracketContainsTheQuadrature) {
  auto r = run_cli("estimate-integral " + path3_exp_file() + " --N 4");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_EQ(report["N"], 4);
  EXPECT_NEAR(report["k"].get<double>(),
              cdint::Potential::exp_bilinear(2, 1.0, 0.039).gradient_bound(),
              1e-12);

  cdint::Hypergraph g(3, {{0, 1}, {1, 2}});
  std::vector<cdint::Potential> pots(
      2, cdint::Potential::exp_bilinear(2, 1.0, 0.039));
  cdint::Model reference(g, pots, 1, 0.2);
  double quad = cdint::integral_reference(reference, 48).refined_value;

  EXPECT_LE(report["combined_lower"].get<double>() - 1e-9, quad);
  EXPECT_GE(report["combined_upper"].get<double>() + 1e-9, quad);
  EXPECT_NEAR(report["integral"].get<double>(),
              std::exp(report["log_integral"].get<double>()), 1e-12);
}

TEST(CliEstimateIntegral, TableModelsAreRejected) {
  auto r = run_cli("estimate-integral " + path3_table_file());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("validation error"), std::string::npos);
  EXPECT_NE(r.err.find("table"), std::string::npos);
}

TEST(CliCompare, SweepsDepthsAndWritesCsv) {
  fs::path csv_path = scratch_dir() / "compare.csv";
  auto r = run_cli("compare " + path3_table_file() + " --depth 6 --csv " +
                   csv_path.string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json report = json::parse(r.out);
  EXPECT_EQ(report["max_depth"], 6);
  EXPECT_NEAR(report["log_z_exact"].get<double>(), std::log(8.0401), 1e-12);
  ASSERT_EQ(report["rows"].size(), 7u);
  EXPECT_FALSE(report["rows"][0].contains("z_rel_error"));
  for (const auto& row : report["rows"]) {
    double err = row["max_marginal_abs_error"].get<double>();
    double bound = row["marginal_error_bound"].get<double>();
    EXPECT_LE(err, bound + 1e-9);
    if (row.contains("z_rel_error_bound") &&
        row["z_rel_error_bound"].is_number())
      EXPECT_LE(row["z_rel_error"].get<double>(),
                row["z_rel_error_bound"].get<double>() + 1e-12);
  }
  EXPECT_TRUE(report["rows"][6]["z_rel_error_bound"].is_number());
  EXPECT_TRUE(report["rows"][1]["z_rel_error_bound"].is_null());

  std::ifstream csv(csv_path);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header,
            "depth,max_marginal_abs_error,marginal_error_bound,z_rel_error,"
            "z_rel_error_bound,recursive_calls");
  int rows = 0;
  std::string line;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 7);
}

TEST(CliCompare, OracleInfeasibleModelsAreRefused) {
  auto r = run_cli("compare " + path3_table_file() + " --budget 4");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("use estimate-z instead"), std::string::npos);
}

TEST(CliDeterminism, RepeatedRunsAreByteIdentical) {
  std::string args = "estimate-z " + path3_exp_file() + " --N 3 --depth 4";
  auto first = run_cli(args);
  auto second = run_cli(args);
  ASSERT_EQ(first.exit_code, 0);
  ASSERT_EQ(second.exit_code, 0);
  json a = json::parse(first.out);
  json b = json::parse(second.out);
  a["wall_seconds"] = 0.0;
  b["wall_seconds"] = 0.0;
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(CliDeterminism, WorkerCountAndCacheDoNotChangeResults) {
  std::string base = "estimate-z " + path3_exp_file() + " --N 3 --depth 4";
  json reports[3] = {json::parse(run_cli(base).out),
                     json::parse(run_cli(base + " --threads 8").out),
                     json::parse(run_cli(base + " --cache on").out)};
  for (int i = 1; i < 3; ++i) {
    EXPECT_EQ(reports[0]["log_z"], reports[i]["log_z"]);
    EXPECT_EQ(reports[0]["z"], reports[i]["z"]);
    EXPECT_EQ(reports[0]["calls"], reports[i]["calls"]);
  }
}

TEST(CliHelp, ExitsZero) {
  EXPECT_EQ(run_cli("--help").exit_code, 0);
  EXPECT_EQ(run_cli("estimate-integral --help").exit_code, 0);
}

}  // namespace
