#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lerkit/error.hpp"
#include "lerkit/verify.hpp"
#include "oracles.hpp"

using namespace lerkit;
using namespace lerkit::verify;

namespace {

Script load(const std::string& name) {
  std::ifstream in(std::string(LERKIT_FIXTURES) + "/" + name);
  REQUIRE(in.good());
  return parse_script(in);
}

Bits bits_of(std::uint64_t code, std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>((code >> i) & 1U);
  return b;
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("xor recovery identities") {
    const Bits zero(16, 0);
    const Bits s = bits_of(0xBEEF, 16);
    CHECK(recover_signature(s, s) == zero);
    CHECK(recover_signature(zero, s) == s);
    CHECK_THROWS_AS(recover_signature(zero, Bits(15, 0)), LengthMismatch);
  }

  TEST_CASE("xor linking holds for every short string pair") {
    for (std::uint64_t m = 0; m < 64; ++m) {
      for (std::uint64_t sig = 0; sig < 64; ++sig) {
        const Bits m1 = bits_of(m, 6);
        const Bits s = bits_of(sig, 6);
        REQUIRE(recover_signature(m1, recover_signature(m1, s)) == s);
      }
    }
    RandomSource src(4);
    for (int i = 0; i < 10'000; ++i) {
      const Bits m1 = bits_of(src(), 64);
      const Bits s = bits_of(src(), 64);
      REQUIRE(recover_signature(m1, recover_signature(m1, s)) == s);
    }
  }

  TEST_CASE("honest exchange measures the geometric distance") {
    const auto a = Entity::at("A", {0, 0});
    const auto b = Entity::at("B", {300, 0});
    RandomSource src(1);
    const auto s = run_exchange(a, b, {}, {}, src);
    CHECK(s.verifier_distance() == doctest::Approx(300.0).epsilon(1e-9));
    CHECK(s.verifier_distance() == s.prover_distance());
    CHECK(s.verifier_distance() == s.true_distance_m);
    CHECK(s.m1.size() == kMessageBits);
    CHECK(recover_signature(s.m1, s.m2) == s.response_signature);
    for (std::size_t i = 1; i < 6; ++i) CHECK(s.t[i] > s.t[i - 1]);

    KeyDirectory dir;
    dir.issue(a);
    dir.issue(b);
    CHECK(data_validate(s, dir, 0.0));
    CHECK(distance_validate(s, a.reported_position, b.reported_position, {}).v == 0);
  }

  TEST_CASE("expired keys refuse to range") {
    auto a = Entity::at("A", {0, 0});
    const auto b = Entity::at("B", {10, 0});
    RandomSource src(1);
    CHECK_THROWS_AS(run_exchange(a, b, {}, {}, src, 600.0), KeyExpired);
    a.key_valid_from = 600.0;
    CHECK_THROWS_AS(run_exchange(a, b, {}, {}, src, 10.0), KeyExpired);
  }

  TEST_CASE("distance fraud is capped") {
    const auto a = Entity::at("A", {0, 0});
    const auto b = Entity::at("B", {1000, 0});
    AdversaryModel adv;
    adv.kind = AdversaryKind::DistanceFraud;
    RandomSource src(2);
    const auto s = run_exchange(a, b, {}, adv, src);
    CHECK(s.shortening_m() <= adv.max_shortening_m);
    CHECK(s.shortening_m() > adv.max_shortening_m - 1e-6);

    CHECK(adv.symbol_shortening_bound_m() == doctest::Approx(468.3).epsilon(1e-3));
    const auto wide = adv.with_symbol_bound_cap();
    const auto s2 = run_exchange(a, b, {}, wide, src);
    CHECK(s2.shortening_m() <= wide.symbol_shortening_bound_m());
    CHECK(s2.shortening_m() > 468.0);

    adv.requested_shortening_m = 50.0;
    const auto s3 = run_exchange(a, b, {}, adv, src);
    CHECK(s3.shortening_m() == doctest::Approx(50.0).epsilon(1e-6));

    AdversaryModel enlarge;
    enlarge.kind = AdversaryKind::DistanceFraud;
    enlarge.requested_shortening_m = 0.0;
    enlarge.enlargement_m = 700.0;
    const auto s4 = run_exchange(a, b, {}, enlarge, src);
    CHECK(s4.enlargement_flag);
    CHECK(s4.shortening_m() == doctest::Approx(-700.0).epsilon(1e-6));
  }

  TEST_CASE("mafia fraud success rate stays near its bound") {
    const auto a = Entity::at("A", {0, 0});
    const auto b = Entity::at("B", {500, 0});
    AdversaryModel adv;
    adv.kind = AdversaryKind::MafiaFraud;
    const RandomSource root(3);
    std::size_t accepted = 0;
    const std::size_t n = 100'000;
    for (std::size_t i = 0; i < n; ++i) {
      RandomSource src = root.derive(i);
      const auto s = run_exchange(a, b, {}, adv, src);
      if (mtac_check(s, {}, src)) ++accepted;
    }
    CHECK(static_cast<double>(accepted) / n <= 2e-4);
  }

  TEST_CASE("mtac acceptance follows the binomial tail") {
    const auto a = Entity::at("A", {0, 0});
    const auto b = Entity::at("B", {50, 0});
    RandomSource src(5);
    const auto s = run_exchange(a, b, {}, {}, src);

    ChannelModel perfect;
    CHECK(mtac_check(s, perfect, src));
    ChannelModel broken;
    broken.bit_error_rate = 1.0;
    broken.max_bit_errors_accepted = 0;
    CHECK_FALSE(mtac_check(s, broken, src));

    ChannelModel noisy;
    noisy.bit_error_rate = 0.01;
    const double q = oracle::binomial_cdf(128, 4, 0.01);
    const std::size_t n = 100'000;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) ok += mtac_check(s, noisy, src) ? 1 : 0;
    const double rate = static_cast<double>(ok) / n;
    CHECK(std::abs(rate - q) <= 3.0 * std::sqrt(q * (1 - q) / n));
  }

  TEST_CASE("first contact only within a key period") {
    auto a = Entity::at("A", {0, 0});
    auto b = Entity::at("B", {100, 0});
    KeyDirectory dir;
    dir.issue(a);
    dir.issue(b);
    RandomSource src(6);
    const auto s1 = run_exchange(a, b, {}, {}, src, 10.0);
    CHECK(data_validate(s1, dir, 10.0));
    const auto s2 = run_exchange(a, b, {}, {}, src, 20.0);
    CHECK_FALSE(data_validate(s2, dir, 20.0));
    REQUIRE(dir.discarded().size() == 1);
    CHECK(dir.discarded()[0].peer == "B");

    CHECK(dir.rotate("A", 700.0));
    CHECK(dir.rotate("B", 700.0));
    CHECK_FALSE(dir.rotate("B", 701.0));
    a.key_valid_from = dir.key("A").valid_from;
    b.key_valid_from = dir.key("B").valid_from;
    CHECK(a.key_valid_from == 600.0);
    const auto s3 = run_exchange(a, b, {}, {}, src, 700.0);
    CHECK(data_validate(s3, dir, 700.0));
    CHECK_THROWS_AS(dir.key("nobody"), UnknownId);
  }

  TEST_CASE("distance validation boundary is inclusive") {
    const auto a = Entity::at("A", {0, 0});
    const auto b = Entity::at("B", {300, 0});
    RandomSource src(7);
    const auto s = run_exchange(a, b, {}, {}, src);
    ChannelModel chan;
    const double measured = s.verifier_distance();
    CHECK(distance_validate(s, {0, 0}, {measured, 0}, chan).v == 0);
    CHECK(distance_validate(s, {0, 0}, {measured + 3.0, 0}, chan).v == 0);
    CHECK(distance_validate(s, {0, 0}, {measured + 3.001, 0}, chan).v == 1);
    CHECK(distance_validate(s, {0, 0}, {500, 0}, chan).v == 1);
  }

  TEST_CASE("scripts: honest, duplicate and fraud scenarios") {
    const auto honest = run_script(load("honest.script"), {}, {}, RandomSource(1));
    REQUIRE(honest.exchanges.size() == 2);
    for (const auto& row : honest.exchanges) {
      CHECK(row.status == ExchangeStatus::Accepted);
      CHECK(row.v == 0);
    }

    const auto dup = run_script(load("duplicate.script"), {}, {}, RandomSource(1));
    REQUIRE(dup.exchanges.size() == 3);
    CHECK(dup.exchanges[0].status == ExchangeStatus::Accepted);
    CHECK(dup.exchanges[1].status == ExchangeStatus::Duplicate);
    CHECK(dup.exchanges[2].status == ExchangeStatus::Accepted);
    CHECK(dup.discarded.size() == 1);

    const auto fraud = run_script(load("fraud.script"), {}, {}, RandomSource(1));
    REQUIRE(fraud.exchanges.size() == 5);
    CHECK(fraud.exchanges[0].status == ExchangeStatus::Accepted);
    CHECK(fraud.exchanges[0].shortening_m <= 200.0);
    CHECK(fraud.exchanges[0].v == 1);
    CHECK(fraud.exchanges[1].status == ExchangeStatus::DataFailed);
    CHECK(fraud.exchanges[2].status == ExchangeStatus::Accepted);
    CHECK(fraud.exchanges[2].v == 1);
    CHECK(fraud.exchanges[3].status == ExchangeStatus::DataFailed);
    CHECK(fraud.exchanges[4].status == ExchangeStatus::MtacFailed);

    std::ostringstream csv;
    write_report_csv(csv, dup);
    CHECK(csv.str().rfind("time_s,verifier,prover,adversary,true_m,measured_m,shortening_m,status,v\n"
                          "0,A,B,none,130,",
                          0) == 0);
  }

  TEST_CASE("script parse errors carry the line") {
    try {
      load("bad.script");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream order("entity A 0 0\nentity B 1 0\n5 A B none\n4 A B none\n");
    CHECK_THROWS_AS(parse_script(order), ParseError);
    std::istringstream proxy("entity A 0 0\nentity B 1 0\n0 A B terrorist\n");
    CHECK_THROWS_AS(parse_script(proxy), ParseError);
    std::istringstream kind("entity A 0 0\nentity B 1 0\n0 A B sneaky\n");
    CHECK_THROWS_AS(parse_script(kind), ParseError);
  }

  TEST_CASE("adversary names") {
    for (auto kind : {AdversaryKind::None, AdversaryKind::MafiaFraud, AdversaryKind::DistanceFraud,
                      AdversaryKind::TerroristFraud, AdversaryKind::DistanceHijacking}) {
      CHECK(parse_adversary_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(parse_adversary_kind("bogus"), InvalidParam);
  }
}
