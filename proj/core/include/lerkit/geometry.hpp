#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lerkit/model.hpp"

namespace lerkit::geometry {

/// Neighbor that reported `position` and whose ranging gave `distance`.
struct Anchor {
  Coordinates position;
  double distance = 0.0;
  bool honest = true;
};

/// Default circle-membership slack, meters; matches the verification delta.
inline constexpr double kDefaultDelta = 3.0;

/// Planar intersection of the circles around a and b (z is ignored).
/// Circles within `eps` of touching yield a single tangent point.
/// Throws CoincidentCenters.
std::vector<Coordinates> circle_intersections(const Anchor& a, const Anchor& b,
                                              double eps = 1e-9);

/// Points within `delta` of every anchor's circle, taken from pairwise
/// intersections. Points closer than `delta` to a better-fitting point are
/// merged into it; results are ordered by worst residual. Throws
/// InvalidParam for fewer than two anchors.
std::vector<Coordinates> consistent_positions(std::span<const Anchor> anchors,
                                              double delta = kDefaultDelta);

/// n < 2k + 3. Throws InvalidParam unless k <= n.
bool spoof_feasible(std::size_t n, std::size_t k);

/// Largest number of anchors that agree with a candidate position.
struct SpoofSearch {
  bool feasible = false;
  Coordinates fake;
  /// Anchors consistent with `fake`: every malicious anchor plus the
  /// honest circles passing within delta of it.
  std::size_t fake_support = 0;
  /// Honest anchors consistent with the true position.
  std::size_t true_support = 0;
  /// A non-true point lies on three or more honest circles, or two honest
  /// circles touch or cross within min_offset of each other (anchors
  /// nearly collinear with the truth); such draws are outside the
  /// generic-position claim.
  bool degenerate = false;
};

/// Constructive search for a fake position at least `min_offset` away from
/// `truth` that k malicious anchors (distances freely chosen) can make at
/// least as well supported as the truth. Honest anchors measure their exact
/// distance to `truth`.
SpoofSearch search_spoof(std::span<const Coordinates> honest, const Coordinates& truth,
                         std::size_t k, double delta = kDefaultDelta, double min_offset = 10.0);

}  // namespace lerkit::geometry
