#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dbqite/experiment.hpp"

using namespace dbqite;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_config(const fs::path& dir) {
  return json{{"name", "small"},
              {"output_dir", dir.string()},
              {"model", {{"L", 4}, {"J", 1.0}, {"B", 0.5}}},
              {"steps", 3},
              {"methods", json::array({{{"kind", "dbqite"}, {"formula", "gc"}},
                                       {{"kind", "dbqite"}, {"formula", "hopf"}},
                                       {{"kind", "ite"}}})},
              {"tau_points", 11},
              {"tau_max", 2.0}};
}

}  // namespace

TEST(ExperimentConfig, DefaultsMaterialized) {
  const auto c = parse_experiment_config(json::object(), false);
  EXPECT_EQ(c.model.L, 10);
  EXPECT_EQ(c.model.boundary, Boundary::open);
  ASSERT_EQ(c.methods.size(), 2u);
  EXPECT_EQ(c.methods[1].step.formula, Formula::hopf);
  EXPECT_EQ(c.tracked, (std::vector<int>{0, 1}));
  const auto j = to_json(c);
  const auto again = parse_experiment_config(j, false);
  EXPECT_EQ(to_json(again), j);

  const auto s = parse_experiment_config(json::object(), true);
  ASSERT_EQ(s.initial_states.size(), 3u);
  EXPECT_EQ(s.tracked, (std::vector<int>{0, 1, 2, 4}));
  EXPECT_EQ(s.methods.front().kind, MethodSpec::Kind::ite);
}

TEST(ExperimentConfig, RejectsInvalid) {
  EXPECT_THROW(parse_experiment_config(json{{"bogus", 1}}, false), ParseError);
  EXPECT_THROW(parse_experiment_config(json{{"model", {{"L", 20}}}}, false), ParseError);
  EXPECT_THROW(parse_experiment_config(json{{"model", {{"L", 4}}}, {"tracked", {16}}}, false), ParseError);
  EXPECT_THROW(parse_experiment_config(json{{"initial_state", {{"type", "file"}, {"path", "/no/such"}}}}, false),
               ParseError);
  EXPECT_THROW(parse_experiment_config(json{{"methods", {{{"kind", "dbqite"}, {"grid_points", 0}}}}}, false),
               std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(json{{"steps", "five"}}, false), ParseError);
  EXPECT_THROW(parse_experiment_config(json{{"model", {{"L", 5}}}}, false), ParseError);
}

TEST(Experiment, RowsAreConsistent) {
  const auto dir = fs::temp_directory_path() / "dbqite_exp_rows";
  const auto cfg = parse_experiment_config(small_config(dir), false);
  const auto res = run_experiment(cfg);
  ASSERT_EQ(res.runs.size(), 3u);
  const double lo = res.spectrum["lambda_min"], hi = res.spectrum["lambda_max"];
  for (const auto& run : res.runs) {
    for (const auto& row : run.rows) {
      EXPECT_GE(row.variance, 0.0);
      EXPECT_GE(row.energy, lo - 1e-12);
      EXPECT_LE(row.energy, hi + 1e-12);
    }
  }
  const auto& gc = res.runs[0];
  ASSERT_EQ(gc.rows.size(), 4u);
  for (std::size_t k = 0; k < gc.rows.size(); ++k) {
    ASSERT_TRUE(gc.rows[k].gates.has_value());
    EXPECT_EQ(gc.rows[k].gates->u0_queries, static_cast<std::int64_t>(std::pow(3, k)));
  }
  EXPECT_EQ(res.runs[2].rows.size(), 11u);
  EXPECT_FALSE(res.runs[2].rows.front().gates.has_value());
}

TEST(Experiment, OutputsAreByteDeterministic) {
  const auto dir = fs::temp_directory_path() / "dbqite_exp_det";
  fs::remove_all(dir);
  const auto cfg = parse_experiment_config(small_config(dir), false);
  const auto f1 = write_experiment(cfg, run_experiment(cfg), "convergence");
  const std::string csv = slurp(f1.csv), meta = slurp(f1.meta), summary = slurp(f1.summary);
  const auto f2 = write_experiment(cfg, run_experiment(cfg), "convergence");
  EXPECT_EQ(slurp(f2.csv), csv);
  EXPECT_EQ(slurp(f2.meta), meta);
  EXPECT_EQ(slurp(f2.summary), summary);
  EXPECT_FALSE(fs::exists(f1.csv.string() + ".tmp"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "init,method,step,tau,s_k,E,V,F0,F1,improved,u3,cx,depth,u0_queries");
  const auto s = json::parse(summary);
  EXPECT_EQ(s["runs"].size(), 3u);
  EXPECT_TRUE(s["runs"][0].contains("count_ratio_fit"));
}

TEST(Report, EmptyRunListGivesEmptyObject) { EXPECT_EQ(emit_report({}).dump(), "{}"); }

TEST(Report, MonotoneFlagsAndSchedule) {
  RunRecord r;
  r.init = "x";
  r.method = "dbqite-gc";
  r.tracked = {0};
  r.rows.push_back({0, 0.0, 0.1, -1.0, 1.0, {0.5}, true, std::nullopt});
  r.rows.push_back({1, 0.1, std::nullopt, -2.0, 0.5, {0.4}, std::nullopt, std::nullopt});
  const auto j = emit_report({r});
  const auto& run = j["runs"][0];
  EXPECT_TRUE(run["energy_strictly_decreasing"].get<bool>());
  EXPECT_FALSE(run["F0_strictly_increasing"].get<bool>());
  EXPECT_EQ(run["schedule"].size(), 1u);
  EXPECT_DOUBLE_EQ(run["energy_gains"][0].get<double>(), 1.0);
}

TEST(Report, GrowthRatioFit) {
  std::vector<Real> c;
  for (int k = 0; k <= 5; ++k) c.push_back(10 * std::pow(3.0, k) + 4);
  EXPECT_NEAR(fit_growth_ratio(c, 3), 3.0, 0.03);
  EXPECT_NEAR(fit_growth_ratio(c, 0), 2.5, 0.5);
  EXPECT_TRUE(std::isnan(fit_growth_ratio({1.0}, 0)));
}
