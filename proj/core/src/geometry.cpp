#include "lerkit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "lerkit/error.hpp"

namespace lerkit::geometry {

std::vector<Coordinates> circle_intersections(const Anchor& a, const Anchor& b, double eps) {
  const double dx = b.position.x - a.position.x;
  const double dy = b.position.y - a.position.y;
  const double d = std::hypot(dx, dy);
  if (d <= eps) throw CoincidentCenters();
  const double r1 = a.distance;
  const double r2 = b.distance;
  if (d > r1 + r2 + eps || d < std::abs(r1 - r2) - eps) return {};

  const double along = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
  const double h2 = r1 * r1 - along * along;
  const Coordinates base{a.position.x + along * dx / d, a.position.y + along * dy / d, 0.0};
  if (h2 <= eps * eps) return {base};
  const double h = std::sqrt(h2);
  return {Coordinates{base.x - h * dy / d, base.y + h * dx / d, 0.0},
          Coordinates{base.x + h * dy / d, base.y - h * dx / d, 0.0}};
}

namespace {

double residual(const Coordinates& x, const Anchor& a) {
  const Coordinates flat{a.position.x, a.position.y, 0.0};
  return std::abs(distance(x, flat) - a.distance);
}

}  // namespace

std::vector<Coordinates> consistent_positions(std::span<const Anchor> anchors, double delta) {
  if (anchors.size() < 2) throw InvalidParam("anchors", "need at least two anchors");
  if (!(delta >= 0.0)) throw InvalidParam("delta", "must be >= 0");

  struct Candidate {
    Coordinates point;
    double worst;
  };
  std::vector<Candidate> found;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      std::vector<Coordinates> points;
      try {
        points = circle_intersections(anchors[i], anchors[j]);
      } catch (const CoincidentCenters&) {
        continue;
      }
      for (const auto& x : points) {
        double worst = 0.0;
        for (const auto& a : anchors) worst = std::max(worst, residual(x, a));
        if (worst <= delta) found.push_back({x, worst});
      }
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const Candidate& l, const Candidate& r) { return l.worst < r.worst; });
  std::vector<Coordinates> kept;
  for (const auto& c : found) {
    const bool near = std::any_of(kept.begin(), kept.end(), [&](const Coordinates& k) {
      return distance(k, c.point) <= std::max(delta, 1e-9);
    });
    if (!near) kept.push_back(c.point);
  }
  return kept;
}

bool spoof_feasible(std::size_t n, std::size_t k) {
  if (k > n) throw InvalidParam("k", "malicious count cannot exceed anchor count");
  return n < 2 * k + 3;
}

SpoofSearch search_spoof(std::span<const Coordinates> honest, const Coordinates& truth,
                         std::size_t k, double delta, double min_offset) {
  std::vector<Anchor> anchors;
  anchors.reserve(honest.size());
  for (const auto& h : honest) anchors.push_back({h, distance(h, truth), true});

  const auto honest_support = [&](const Coordinates& x) {
    return static_cast<std::size_t>(std::count_if(
        anchors.begin(), anchors.end(), [&](const Anchor& a) { return residual(x, a) <= delta; }));
  };

  SpoofSearch result;
  result.true_support = honest_support(truth);

  // Any point off the truth; then the antipode of the truth on the first
  // honest circle; then every point where two honest circles meet.
  std::vector<Coordinates> candidates{{truth.x + 2.0 * min_offset, truth.y, 0.0}};
  if (!anchors.empty()) {
    const Coordinates& c = anchors.front().position;
    candidates.push_back({2.0 * c.x - truth.x, 2.0 * c.y - truth.y, 0.0});
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      std::vector<Coordinates> points;
      try {
        points = circle_intersections(anchors[i], anchors[j]);
      } catch (const CoincidentCenters&) {
        result.degenerate = true;
        continue;
      }
      if (points.size() == 1) result.degenerate = true;
      if (points.size() == 2 && distance(points[0], points[1]) < min_offset) {
        result.degenerate = true;
      }
      candidates.insert(candidates.end(), points.begin(), points.end());
    }
  }

  bool have = false;
  for (const auto& x : candidates) {
    if (distance(x, truth) < min_offset) continue;
    const std::size_t support = honest_support(x);
    if (support >= 3) result.degenerate = true;
    if (!have || support + k > result.fake_support) {
      result.fake = x;
      result.fake_support = support + k;
      have = true;
    }
  }
  result.feasible = have && result.fake_support >= result.true_support;
  return result;
}

}  // namespace lerkit::geometry
