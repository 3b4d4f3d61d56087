#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "v2x/sweep.hpp"

using namespace v2x;

TEST_CASE("parse_config: empty text resolves to the documented defaults") {
  const RunConfig cfg = parse_config(std::string(""));
  REQUIRE(cfg.mode == RunMode::both);
  REQUIRE(cfg.thresholds_m == std::vector<double>{200.0, 400.0, 600.0});
  REQUIRE(cfg.n_vehicles == 50);
  REQUIRE(cfg.road_length_m == 1000.0);
  REQUIRE(cfg.lane_separation_m == 4.0);
  REQUIRE(cfg.seed == kDefaultSeed);
  REQUIRE(cfg.dcf.cw_min == 7);
  REQUIRE(cfg.dcf.max_stage_m == 5);
  REQUIRE(cfg.timing.difs_us == 65.0);
  REQUIRE(cfg.timing.sifs_us == 35.0);
  REQUIRE(cfg.timing.slot_us == 15.0);
  REQUIRE(cfg.timing.propagation_delta_us == 1.0);
  REQUIRE(cfg.timing.payload_bytes == 1100.0);
  REQUIRE(cfg.total_slots == 1000000);
}

TEST_CASE("parse_config: negative threshold fails validation") {
  try {
    parse_config(std::string("thresholds = -5"));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.field == "thresholds");
  }
}

TEST_CASE("parse_config: overriding one knob keeps the rest at defaults") {
  const RunConfig cfg = parse_config(std::string("dcf.cw_min = 15\n"));
  REQUIRE(cfg.dcf.cw_min == 15);
  REQUIRE(cfg.dcf.max_stage_m == 5);
  REQUIRE(cfg.n_vehicles == 50);
  REQUIRE(cfg.thresholds_m.size() == 3);
}

TEST_CASE("parse_config: unknown keys and malformed lines are rejected with line info") {
  try {
    parse_config(std::string("mode = both\nnot_a_key = 3\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line == 2);
  }
  REQUIRE_THROWS_AS(parse_config(std::string("mode both")), ParseError);
  REQUIRE_THROWS_AS(parse_config(std::string("thresholds = 200,,400")), ParseError);
  REQUIRE_THROWS_AS(parse_config(std::string("sim.total_slots = 1.5")), ParseError);
  REQUIRE_THROWS_AS(parse_config(std::string("mode = sometimes")), ParseError);
}

TEST_CASE("parse_config: comments, spacing, threshold lists") {
  const RunConfig cfg = parse_config(std::string(
      "# sweep study\n"
      "  mode   =  analytic   # inline comment\n"
      "thresholds = 100, 250.5 ,900\n"
      "scenario.seed = 7\n"));
  REQUIRE(cfg.mode == RunMode::analytic);
  REQUIRE(cfg.thresholds_m == std::vector<double>{100.0, 250.5, 900.0});
  REQUIRE(cfg.seed == 7);
}

TEST_CASE("parse_config: dcf slot duration follows the timing profile") {
  const RunConfig cfg = parse_config(std::string("timing.slot = 9\n"));
  REQUIRE(cfg.dcf.slot_duration_us == 9.0);
}

namespace {

RunConfig small_config(const std::string& extra = "") {
  return parse_config(std::string("sim.total_slots = 20000\n") + extra);
}

}  // namespace

TEST_CASE("run_sweep: analytic mode emits one row per threshold, counts monotone") {
  RunConfig cfg = small_config("mode = analytic\n");
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 3);
  int prev = 0;
  for (const auto& row : rows) {
    REQUIRE(row.source == "analytic");
    REQUIRE(row.active_transmitters >= prev);  // sorted by ascending threshold
    prev = row.active_transmitters;
    REQUIRE(row.pdr.has_value());
    REQUIRE(row.busy_probability.has_value());
  }
}

TEST_CASE("run_sweep: both modes interleave sorted by threshold then source") {
  RunConfig cfg = small_config();
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 6);
  for (size_t i = 0; i < rows.size(); i += 2) {
    REQUIRE(rows[i].threshold_m == rows[i + 1].threshold_m);
    REQUIRE(rows[i].source == "analytic");
    REQUIRE(rows[i + 1].source == "montecarlo");
  }
}

TEST_CASE("run_sweep: zero authorized transmitters yields an absent-metric row") {
  RunConfig cfg = small_config(
      "scenario.n_vehicles = 2\n"
      "thresholds = 1\n"
      "scenario.seed = 1\n");
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    REQUIRE(row.active_transmitters == 0);
    REQUIRE_FALSE(row.pdr.has_value());
    REQUIRE_FALSE(row.throughput.has_value());
  }
}

TEST_CASE("run_sweep: montecarlo metrics differ across config seeds but honor invariants") {
  RunConfig a = small_config("mode = montecarlo\nthresholds = 400\n");
  RunConfig b = a;
  b.seed = a.seed + 1;
  const auto rows_a = run_sweep(a);
  const auto rows_b = run_sweep(b);
  REQUIRE(rows_a.size() == 1);
  REQUIRE(rows_b.size() == 1);
  REQUIRE(*rows_a[0].pdr != *rows_b[0].pdr);
  for (const auto& rows : {rows_a, rows_b}) {
    REQUIRE(*rows[0].pdr >= 0.0);
    REQUIRE(*rows[0].pdr <= 1.0);
    REQUIRE(*rows[0].busy_probability >= 0.0);
    REQUIRE(*rows[0].busy_probability <= 1.0);
    REQUIRE(*rows[0].throughput >= 0.0);
    REQUIRE(*rows[0].throughput <= 1.0);
  }
}

TEST_CASE("emit_csv: header plus one line per row, stable bytes") {
  RunConfig cfg = small_config("mode = analytic\n");
  const auto rows = run_sweep(cfg);

  std::ostringstream first, second;
  emit_csv(rows, first);
  emit_csv(run_sweep(cfg), second);
  REQUIRE(first.str() == second.str());

  std::istringstream lines(first.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  REQUIRE(count == 4);
  REQUIRE(first.str().rfind("threshold,active_transmitters,pdr,throughput,total_delay_us,"
                            "busy_probability,collision_probability,source\n", 0) == 0);
}

TEST_CASE("emit_csv: absent metrics rendered as NA") {
  SweepRow row;
  row.threshold_m = 5.0;
  row.active_transmitters = 0;
  row.source = "analytic";
  std::ostringstream out;
  emit_csv({row}, out);
  REQUIRE(out.str().find("5,0,NA,NA,NA,NA,NA,analytic") != std::string::npos);
}

TEST_CASE("emit_csv: refuses an empty row set") {
  std::ostringstream out;
  REQUIRE_THROWS_AS(emit_csv(std::vector<SweepRow>{}, out), std::domain_error);
}

TEST_CASE("emit_metric_csv: one value column per metric family") {
  RunConfig cfg = small_config("mode = analytic\nthresholds = 200\n");
  const auto rows = run_sweep(cfg);
  std::ostringstream out;
  emit_metric_csv(rows, "pdr", out);
  REQUIRE(out.str().rfind("threshold,active_transmitters,pdr,source\n", 0) == 0);
  std::ostringstream bad;
  REQUIRE_THROWS_AS(emit_metric_csv(rows, "nope", bad), std::domain_error);
}

TEST_CASE("summary text echoes the resolved configuration and one line per row") {
  RunConfig cfg = small_config("mode = analytic\n");
  const auto rows = run_sweep(cfg);
  const std::string text = summary_text(cfg, rows);
  REQUIRE(text.find("mode=analytic") != std::string::npos);
  REQUIRE(text.find("cw_min=7") != std::string::npos);
  REQUIRE(text.find("threshold=200") != std::string::npos);
  REQUIRE(text.find("threshold=600") != std::string::npos);
}
