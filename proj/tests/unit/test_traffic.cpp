#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lerkit/error.hpp"
#include "lerkit/traffic.hpp"

using namespace lerkit;
using namespace lerkit::traffic;

namespace {

/// Two ids sampled every `dt` seconds over [0, duration] at fixed separation.
EncounterTrace pair_trace(double separation, double duration, double dt = 1.0) {
  std::vector<TraceRow> rows;
  for (double t = 0.0; t <= duration; t += dt) {
    rows.push_back({t, "a", {0, 0}});
    rows.push_back({t, "b", {separation, 0}});
  }
  return make_trace(std::move(rows));
}

RecoveryConfig unit_config(std::size_t T, double t) {
  RecoveryConfig c;
  c.weights = WeightFunction::uniform(T);
  c.threshold = t;
  c.provenance = {0.0, 7.0, T, 1000};
  return c;
}

int parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_trace(in);
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

}  // namespace

TEST_SUITE("traffic") {
  TEST_CASE("parse a valid trace and write it back") {
    const std::string text = "t_sec,vehicle_id,x_m,y_m\n0,a,0,0\n0,b,1.5,2\n2,a,3,4\n";
    std::istringstream in(text);
    const auto trace = parse_trace(in);
    CHECK(trace.rows.size() == 3);
    CHECK(trace.sample_dt == 2.0);
    CHECK(trace.ids() == std::vector<std::string>{"a", "b"});
    CHECK(trace.rows[1].position == Coordinates{1.5, 2, 0});
    std::ostringstream out;
    write_trace_csv(out, trace);
    CHECK(out.str() == text);
  }

  TEST_CASE("parse errors") {
    CHECK(parse_error_line("t_sec,vehicle_id,x_m,y_m\n0,a,0,0\nzz,a,0,0\n") == 3);
    CHECK(parse_error_line("t_sec,vehicle_id,x_m,y_m\n5,a,0,0\n4,b,0,0\n") == 3);
    CHECK(parse_error_line("t_sec,vehicle_id,x_m,y_m\n0,a,0\n") == 2);
    CHECK(parse_error_line("time,id,x,y\n") == 1);
    CHECK(parse_error_line("t_sec,vehicle_id,x_m,y_m\n1,a,0,0\n1,a,2,0\n") == 3);
    std::ifstream bad(std::string(LERKIT_FIXTURES) + "/bad_number.csv");
    try {
      parse_trace(bad);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    std::ifstream order(std::string(LERKIT_FIXTURES) + "/bad_order.csv");
    try {
      parse_trace(order);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
      CHECK(e.reason().find("ordering") != std::string::npos);
    }
  }

  TEST_CASE("encounters are deduplicated per key period") {
    CHECK(encounters(pair_trace(50, 300), "a").events.size() == 1);
    const auto long_run = encounters(pair_trace(50, 1300), "a");
    REQUIRE(long_run.events.size() == 3);
    CHECK(long_run.events[0] == Encounter{0.0, "b"});
    CHECK(long_run.events[1].time == 600.0);
    CHECK(long_run.events[2].time == 1200.0);
    CHECK(encounters(pair_trace(150, 300), "a").events.empty());
    CHECK(encounters(pair_trace(100, 10), "a").events.size() == 1);  // range is inclusive
    CHECK_THROWS_AS(encounters(pair_trace(50, 10), "nobody"), UnknownEntity);
  }

  TEST_CASE("one encounter per second detects at the seventh") {
    std::vector<TraceRow> rows;
    for (int s = 0; s <= 20; ++s) {
      rows.push_back({double(s), "focal", {0, 0}});
      if (s >= 1) rows.push_back({double(s), "p" + std::to_string(s), {10, 0}});
    }
    const auto trace = make_trace(rows);
    RandomSource src(1);
    const auto r = time_to_detection(trace, "focal", unit_config(10, 6.5), 0.0, 0.0, {}, src);
    CHECK(r.status == DetectionStatus::Detected);
    REQUIRE(r.latency_s.has_value());
    CHECK(*r.latency_s == 7.0);
    CHECK(r.encounters_used == 7);
  }

  TEST_CASE("fixture trace: one peer every ten seconds") {
    const auto trace = load_trace(std::string(LERKIT_FIXTURES) + "/delta10.csv");
    RandomSource src(1);
    const auto r = time_to_detection(trace, "focal", unit_config(7, 6.5), 0.0, 0.0, {}, src);
    CHECK(r.status == DetectionStatus::Detected);
    CHECK(*r.latency_s == 70.0);

    RandomSource src2(1);
    const auto late = time_to_detection(trace, "focal", unit_config(7, 6.5), 0.0, 70.0, {}, src2);
    CHECK(late.status == DetectionStatus::NotDetected);
    CHECK_FALSE(late.latency_s.has_value());
    CHECK(late.encounters_used == 6);
  }

  TEST_CASE("recovery before spoofing is a false alarm") {
    const auto trace = load_trace(std::string(LERKIT_FIXTURES) + "/delta10.csv");
    RandomSource src(2);
    // Every pre-spoof peer disagrees when p = 1.
    const auto r = time_to_detection(trace, "focal", unit_config(7, 0.5), 1.0, 110.0, {}, src);
    CHECK(r.status == DetectionStatus::FalseAlarm);
    CHECK(*r.mode_change_at == 10.0);
    CHECK(to_string(r.status) == "false-alarm");
  }

  TEST_CASE("spoof start outside the trace is rejected") {
    RandomSource src(1);
    CHECK_THROWS_AS(
        time_to_detection(pair_trace(10, 50), "a", unit_config(3, 0.5), 0.0, 51.0, {}, src),
        InvalidParam);
  }

  TEST_CASE("active counts per bin") {
    CHECK(active_counts(EncounterTrace{}, 60).empty());
    std::vector<TraceRow> rows;
    for (int i = 0; i < 3; ++i) rows.push_back({10.0, "m" + std::to_string(i), {}});
    for (int i = 0; i < 5; ++i) rows.push_back({70.0, "n" + std::to_string(i), {}});
    const auto counts = active_counts(make_trace(rows), 60);
    REQUIRE(counts.size() == 2);
    CHECK(counts[0] == std::pair<double, std::size_t>{0.0, 3});
    CHECK(counts[1] == std::pair<double, std::size_t>{60.0, 5});
  }

  TEST_CASE("synthetic traces") {
    CHECK(synth_trace(0, {}, 10, 60, 1, RandomSource(1)).empty());
    const auto a = synth_trace(2, {}, 10, 60, 1, RandomSource(3));
    CHECK(a.rows.size() == 122);
    for (const auto& r : a.rows) {
      CHECK(r.position.x >= 0.0);
      CHECK(r.position.x <= 1000.0);
    }
    const auto b = synth_trace(2, {}, 10, 60, 1, RandomSource(3));
    std::ostringstream sa, sb;
    write_trace_csv(sa, a);
    write_trace_csv(sb, b);
    CHECK(sa.str() == sb.str());
  }

  TEST_CASE("poisson meetings arrive at the requested rate") {
    const double rate = 0.5;
    const auto trace = poisson_encounter_trace(rate, 20'000, RandomSource(4));
    const auto seq = encounters(trace, "focal");
    const double n = static_cast<double>(seq.events.size());
    CHECK(std::abs(n - rate * 20'000) <= 4.0 * std::sqrt(rate * 20'000));
  }

  TEST_CASE("latency csv") {
    DetectionResult hit;
    hit.status = DetectionStatus::Detected;
    hit.latency_s = 70.0;
    hit.encounters_used = 7;
    DetectionResult miss;
    miss.encounters_used = 2;
    std::ostringstream out;
    write_latency_csv(out, {{"a", 0.0, hit}, {"b", 30.0, miss}});
    CHECK(out.str() == "focal_id,spoof_start_s,detect_s,encounters_used\na,0,70,7\nb,30,NA,2\n");
  }
}
