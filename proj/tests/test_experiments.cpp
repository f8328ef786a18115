#include <cmath>

#include "doctest.h"
#include "json.hpp"

#include "covergap/experiments.hpp"

using namespace covergap;

TEST_CASE("csv quoting and line ends") {
  Table t;
  t.header = {"a", "b,c"};
  t.rows.push_back({std::int64_t{-3}, std::string("say \"hi\"")});
  t.rows.push_back({Cell{}, true});
  t.rows.push_back({std::uint64_t{18446744073709551615ULL}, std::string("two\nlines")});
  t.rows.push_back({0.1, std::string("plain")});
  CHECK(to_csv(t) ==
        "a,\"b,c\"\r\n-3,\"say \"\"hi\"\"\"\r\n,true\r\n18446744073709551615,\"two\nlines\"\r\n"
        "0.10000000000000001,plain\r\n");
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 3.4122762652849024, 1e300}) {
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("records json uses null for empty cells") {
  Table t;
  t.header = {"x", "y"};
  t.rows.push_back({Cell{}, 2.5});
  const nlohmann::json j = to_records_json(t);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["x"].is_null());
  CHECK(j[0]["y"] == 2.5);
}

TEST_CASE("derive_seed against an independent SplitMix64") {
  CHECK(derive_seed(1, 4, 0) == 6777408662354021374ULL);
  CHECK(derive_seed(12345, 16, 199) == 12638653517550629040ULL);
  CHECK(derive_seed(1, 4, 1) != derive_seed(1, 4, 0));
  CHECK(derive_seed(1, 4, 0) != derive_seed(1, 0, 4));
}

TEST_CASE("config parsing and validation") {
  ExperimentConfig cfg;
  apply_json(cfg, nlohmann::json::parse(R"({"n_list": [2, 3], "samples_per_n": 5, "seed": 42, "t": 0.5})"));
  CHECK(cfg.n_list == std::vector<int>{2, 3});
  CHECK(cfg.samples_per_n == 5);
  CHECK(cfg.seed == 42);
  CHECK_NOTHROW(validate(cfg, Command::GapSweep));

  ExperimentConfig echo;
  apply_json(echo, to_json(cfg));
  CHECK(to_json(echo) == to_json(cfg));

  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"n_list": "4"})")), ConfigError);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"seed": -1})")), ConfigError);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse("[1]")), ConfigError);

  auto invalid = [](auto edit, Command c) {
    ExperimentConfig x;
    edit(x);
    CHECK_THROWS_AS(validate(x, c), ConfigError);
  };
  invalid([](ExperimentConfig& x) { x.n_list = {8, 4}; }, Command::GapSweep);
  invalid([](ExperimentConfig& x) { x.n_list = {32}; }, Command::GapSweep);
  invalid([](ExperimentConfig& x) { x.t = 3.0; }, Command::StrongConvergence);
  invalid([](ExperimentConfig& x) { x.grid_m = 10; }, Command::TruncationStudy);
  invalid([](ExperimentConfig& x) { x.format = "xml"; }, Command::SelbergTable);
  invalid([](ExperimentConfig& x) { x.n_max = 5; }, Command::SamplerValidate);
  invalid([](ExperimentConfig& x) { x.radii = {4, 2}; }, Command::LatticeCount);
}

TEST_CASE("slopes") {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  REQUIRE(log_log_slope(x, y).has_value());
  CHECK(*log_log_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(linear_slope(x, {1, 3, 7, 15}) == doctest::Approx(2.0));
  CHECK_FALSE(log_log_slope(x, {0, 0, 0, 1}).has_value());
}

TEST_CASE("small gap campaign: records, summary and exceedance") {
  ExperimentConfig cfg;
  cfg.grid_m = 64;
  cfg.n_list = {2, 3};
  cfg.samples_per_n = 3;
  cfg.require_transitive = true;
  const GapCampaign c = run_gap_campaign(cfg, 2);
  REQUIRE_FALSE(c.failure);
  REQUIRE(c.records.size() == 6);
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const GapRecord& r = c.records[i];
    CHECK(r.n == cfg.n_list[i / 3]);
    CHECK(r.index == static_cast<int>(i % 3));
    CHECK(r.transitive);
    CHECK(r.seed == derive_seed(cfg.seed, static_cast<std::uint64_t>(r.n), static_cast<std::uint64_t>(r.index)));
    CHECK(r.estimate.lambda_lower_bound <= 0.25);
    CHECK(r.estimate.op_norm <= c.constant_eigenvalue + 1e-8);
  }
  const auto gaps = summarize_gaps(c, cfg);
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0].transitive == 3);
  CHECK(gaps[0].median_deficit >= 0.0);

  cfg.eps_list = {0.0, 10.0};
  const auto rows = exceedance_table(c, cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& e : rows) {
    if (e.epsilon == 10.0) CHECK(e.exceedances == 0);
    CHECK(e.fraction == doctest::Approx(static_cast<double>(e.exceedances) / e.transitive));
  }
  CHECK(nonincreasing_in_n(rows, 10.0));
}

TEST_CASE("commands report the expected shapes") {
  ExperimentConfig cfg;
  cfg.t_list = {1.0};
  cfg.a_points = 3;
  cfg.r_list = {0.0};
  const RunResult sel = cmd_selberg_table(cfg, 1);
  CHECK(sel.table.rows.size() == 4);
  CHECK(sel.summary["per_t"][0]["value_at_a_half"].get<double>() == doctest::Approx(2 * M_PI * (std::cosh(1.0) - 1)));

  cfg.radii = {2, 4, 6};
  cfg.support_t_list = {1.0};
  const RunResult lat = cmd_lattice_count(cfg, 1);
  CHECK(lat.summary["strictly_increasing_at_2_4_6"] == true);
  CHECK(std::get<std::int64_t>(lat.table.rows.back()[2]) == 49);

  cfg.n_max = 2;
  cfg.draws = 1000;
  const RunResult samp = cmd_sampler_validate(cfg, 1);
  REQUIRE(samp.table.rows.size() == 1);
  CHECK(std::get<std::int64_t>(samp.table.rows[0][1]) == 16);
  CHECK_FALSE(samp.failure);
}

TEST_CASE("numerical failure keeps completed rows only") {
  ExperimentConfig cfg;
  cfg.grid_m = 64;
  cfg.n_list = {4};
  cfg.samples_per_n = 2;
  cfg.lanczos_subspace = 4;
  cfg.lanczos_max_restarts = 0;
  const RunResult r = cmd_gap_sweep(cfg, 1);
  REQUIRE(r.failure);
  CHECK(r.table.rows.empty());
}
