#include <sstream>

#include "doctest.h"
#include "lerkit/error.hpp"
#include "lerkit/random.hpp"
#include "lerkit/recovery.hpp"
#include "oracles.hpp"

using namespace lerkit;
using namespace lerkit::recovery;

namespace {

VerificationOutcome out(std::uint8_t v, double at = 0.0, std::string peer = "") {
  return {std::move(peer), v, at};
}

RecoveryConfig config_of(std::vector<double> w, double t) {
  RecoveryConfig c;
  c.weights = WeightFunction(std::move(w));
  c.threshold = t;
  c.provenance.T = c.weights.size();
  return c;
}

}  // namespace

TEST_SUITE("recovery") {
  TEST_CASE("push fills then evicts the least recent entry") {
    SlidingWindow w(3);
    w = push(w, out(1));
    CHECK(w.size() == 1);
    CHECK(w.at(1).v == 1);

    SlidingWindow full(3);
    for (const char* id : {"c", "b", "a"}) full.push(out(0, 0, id));
    const auto next = push(full, out(0, 0, "d"));
    REQUIRE(next.size() == 3);
    CHECK(next.at(1).peer_id == "d");
    CHECK(next.at(2).peer_id == "a");
    CHECK(next.at(3).peer_id == "b");
    CHECK(full.at(1).peer_id == "a");  // value form leaves the input alone
    CHECK_THROWS_AS(SlidingWindow(0), InvalidParam);
  }

  TEST_CASE("evicted outcomes never reach the score") {
    // Exhaustive over all T+1 length sequences for small T: only the last
    // T pushes matter.
    for (std::size_t T = 1; T <= 6; ++T) {
      std::vector<double> w(T);
      for (std::size_t i = 0; i < T; ++i) w[i] = static_cast<double>(1U << i);
      const WeightFunction weights(w);
      for (std::size_t code = 0; code < (std::size_t{1} << (T + 1)); ++code) {
        SlidingWindow win(T);
        std::vector<int> last(T);
        for (std::size_t k = 0; k <= T; ++k) {
          const int v = static_cast<int>((code >> k) & 1U);
          win.push(out(static_cast<std::uint8_t>(v)));
          if (k >= 1) last[T - k] = v;  // most recent first
        }
        REQUIRE(score(win, weights) == oracle::weighted_sum(w, last));
      }
    }
  }

  TEST_CASE("score examples") {
    const WeightFunction w({3, 2, 1});
    SlidingWindow win(3);
    CHECK(score(win, w) == 0.0);
    for (std::uint8_t v : {1, 0, 1}) win.push(out(v));  // most recent ends up first
    CHECK(score(win, w) == 4.0);
    CHECK(score_mask(win.mask(), w.values()) == 4.0);

    SlidingWindow zeros(3);
    for (int i = 0; i < 5; ++i) zeros.push(out(0));
    CHECK(score(zeros, w) == 0.0);

    SlidingWindow uniform(8);
    for (int i = 0; i < 8; ++i) uniform.push(out(i % 3 == 0));
    CHECK(score(uniform, WeightFunction::uniform(8)) == 3.0);

    CHECK_THROWS_AS(score(uniform, w), CapacityMismatch);
  }

  TEST_CASE("score_mask agrees with the explicit sum and is monotone in v") {
    RandomSource src(9);
    for (int trial = 0; trial < 2000; ++trial) {
      const std::size_t T = 1 + src() % 64;
      std::vector<double> w(T);
      for (auto& x : w) x = src.uniform() * 10.0;
      const std::uint64_t mask = src();
      std::vector<int> v(T);
      for (std::size_t i = 0; i < T; ++i) v[i] = static_cast<int>((mask >> i) & 1U);
      const double d = score_mask(mask, w);
      REQUIRE(d == doctest::Approx(oracle::weighted_sum(w, v)));
      const std::size_t flip = src() % T;
      REQUIRE(score_mask(mask | (std::uint64_t{1} << flip), w) >= d);
    }
  }

  TEST_CASE("decide is strict at the threshold") {
    CHECK(decide(5.0, 5.0) == Mode::Normal);
    CHECK(decide(0.0, 0.0) == Mode::Normal);
    CHECK(decide(5.0 + 1e-12, 5.0) == Mode::Recovery);
    CHECK(decide(std::nextafter(0.0, 1.0), 0.0) == Mode::Recovery);
  }

  TEST_CASE("step enters recovery once and latches") {
    const auto config = config_of({1, 1, 1}, 1.5);
    ModeState state;
    SlidingWindow win(3);
    auto r = step(state, win, out(1, 1.0), config);
    CHECK(r.state.mode == Mode::Normal);
    r = step(r.state, r.window, out(1, 2.0), config);
    CHECK(r.state.mode == Mode::Recovery);
    REQUIRE(r.state.entered_at.has_value());
    CHECK(*r.state.entered_at == 2.0);
    for (int i = 0; i < 5; ++i) r = step(r.state, r.window, out(0, 3.0 + i), config);
    CHECK(r.state.mode == Mode::Recovery);
    CHECK(*r.state.entered_at == 2.0);
    CHECK(r.state.score_history.size() == 7);

    r.state.reset();
    CHECK(r.state.mode == Mode::Normal);
    CHECK_FALSE(r.state.entered_at.has_value());

    std::ostringstream csv;
    write_score_history(csv, r.state);
    CHECK(csv.str().rfind("step,D,mode\n1,1,Normal\n2,2,Recovery\n", 0) == 0);
  }

  TEST_CASE("all-zero outcomes never trigger") {
    const auto config = config_of({1, 1, 1, 1}, 0.0);
    ModeState state;
    SlidingWindow win(4);
    for (int i = 0; i < 10'000; ++i) step_in_place(state, win, out(0, i), config);
    CHECK(state.mode == Mode::Normal);
  }
}
