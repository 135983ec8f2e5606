#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "lerkit/error.hpp"
#include "lerkit/geometry.hpp"
#include "lerkit/random.hpp"

using namespace lerkit;
using namespace lerkit::geometry;

TEST_SUITE("geometry") {
  TEST_CASE("two circles cross at two points") {
    const auto pts = circle_intersections({{0, 0}, 5}, {{8, 0}, 5});
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == doctest::Approx(4.0));
    CHECK(pts[0].y == doctest::Approx(3.0));
    CHECK(pts[1].x == doctest::Approx(4.0));
    CHECK(pts[1].y == doctest::Approx(-3.0));
  }

  TEST_CASE("tangent, disjoint, nested and coincident circles") {
    const auto tangent = circle_intersections({{0, 0}, 5}, {{10, 0}, 5});
    REQUIRE(tangent.size() == 1);
    CHECK(tangent[0].x == doctest::Approx(5.0));
    CHECK(circle_intersections({{0, 0}, 1}, {{10, 0}, 1}).empty());
    CHECK(circle_intersections({{0, 0}, 10}, {{1, 0}, 1}).empty());
    CHECK_THROWS_AS(circle_intersections({{2, 2}, 1}, {{2, 2}, 3}), CoincidentCenters);
  }

  TEST_CASE("intersection points lie on both circles") {
    RandomSource src(3);
    for (int i = 0; i < 1000; ++i) {
      const Anchor a{{src.uniform() * 100, src.uniform() * 100}, 10 + src.uniform() * 60};
      const Anchor b{{src.uniform() * 100, src.uniform() * 100}, 10 + src.uniform() * 60};
      for (const auto& p : circle_intersections(a, b)) {
        REQUIRE(std::abs(distance(p, a.position) - a.distance) < 1e-6);
        REQUIRE(std::abs(distance(p, b.position) - b.distance) < 1e-6);
      }
    }
  }

  TEST_CASE("three honest anchors pin the position") {
    const Coordinates truth{30, 40};
    std::vector<Anchor> anchors;
    for (Coordinates c : {Coordinates{0, 0}, Coordinates{100, 0}, Coordinates{0, 100}}) {
      anchors.push_back({c, distance(c, truth)});
    }
    const auto pos = consistent_positions(anchors);
    REQUIRE(pos.size() == 1);
    CHECK(distance(pos[0], truth) < 1e-6);

    // Two anchors leave the mirror ambiguity.
    CHECK(consistent_positions(std::span(anchors).first(2)).size() == 2);
    CHECK_THROWS_AS(consistent_positions(std::span(anchors).first(1)), InvalidParam);
  }

  TEST_CASE("spoofing rule") {
    CHECK(spoof_feasible(0, 0) == true);
    CHECK(spoof_feasible(2, 0) == true);
    CHECK(spoof_feasible(3, 0) == false);
    CHECK(spoof_feasible(5, 1) == false);
    CHECK(spoof_feasible(4, 1) == true);
    CHECK(spoof_feasible(9, 3) == false);
    CHECK(spoof_feasible(8, 3) == true);
    CHECK_THROWS_AS(spoof_feasible(2, 3), InvalidParam);
  }

  TEST_CASE("constructive search agrees with the rule on random layouts") {
    RandomSource src(1);
    for (std::size_t n = 1; n <= 8; ++n) {
      for (std::size_t k = 0; k <= n; ++k) {
        int checked = 0;
        for (int attempt = 0; checked < 10 && attempt < 200; ++attempt) {
          const Coordinates truth{500, 500};
          std::vector<Coordinates> honest;
          for (std::size_t i = 0; i < n - k; ++i) {
            honest.push_back({src.uniform() * 1000, src.uniform() * 1000});
          }
          const auto search = search_spoof(honest, truth, k, 0.01);
          if (search.degenerate) continue;
          ++checked;
          REQUIRE(search.feasible == spoof_feasible(n, k));
          if (search.feasible) {
            CHECK(distance(search.fake, truth) >= 10.0);
            CHECK(search.fake_support >= search.true_support);
          }
        }
        CHECK(checked == 10);
      }
    }
  }
}
