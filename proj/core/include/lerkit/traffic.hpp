#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lerkit/model.hpp"
#include "lerkit/random.hpp"

namespace lerkit::traffic {

struct TraceRow {
  double t = 0.0;
  std::string id;
  Coordinates position;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// Position samples sorted by time; each (time, id) appears once.
struct EncounterTrace {
  std::vector<TraceRow> rows;
  /// Smallest gap between consecutive distinct timestamps (0 with fewer than two).
  double sample_dt = 0.0;

  bool empty() const noexcept { return rows.empty(); }
  double start() const { return rows.empty() ? 0.0 : rows.front().t; }
  double end() const { return rows.empty() ? 0.0 : rows.back().t; }
  bool contains(const std::string& id) const;
  /// Distinct ids in first-appearance order.
  std::vector<std::string> ids() const;
};

/// Validates ordering and uniqueness and fills sample_dt. Throws ParseError.
EncounterTrace make_trace(std::vector<TraceRow> rows);

/// CSV with header `t_sec,vehicle_id,x_m,y_m`. Throws ParseError(line, reason).
EncounterTrace parse_trace(std::istream& in);
EncounterTrace load_trace(const std::string& path);
void write_trace_csv(std::ostream& out, const EncounterTrace& trace);

struct Encounter {
  double time = 0.0;
  std::string peer;

  friend bool operator==(const Encounter&, const Encounter&) = default;
};

/// First contacts of one focal entity, ordered by (time, peer).
struct EncounterSequence {
  std::string focal;
  std::vector<Encounter> events;
};

inline constexpr double kDefaultRange = 100.0;
inline constexpr double kDefaultKeyPeriod = 600.0;

/// Event for peer q at time tau iff q is within range_m of the focal entity
/// at a shared sample time and q produced no event in (tau - t_k, tau).
/// Throws UnknownEntity.
EncounterSequence encounters(const EncounterTrace& trace, const std::string& focal,
                             double range_m = kDefaultRange, double t_k = kDefaultKeyPeriod);

struct DetectionOptions {
  double range_m = kDefaultRange;
  double t_k = kDefaultKeyPeriod;
  /// Chance an encounter is actually ranged.
  double ranging_probability = 1.0;
  /// Factor (>= 1) applied to ranging_probability while in recovery mode.
  double recovery_rate_multiplier = 1.0;
};

enum class DetectionStatus { Detected, NotDetected, FalseAlarm };
std::string to_string(DetectionStatus status);

struct DetectionResult {
  DetectionStatus status = DetectionStatus::NotDetected;
  /// Seconds from spoof start to recovery entry; set only when Detected.
  std::optional<double> latency_s;
  /// Time recovery mode was entered (Detected or FalseAlarm).
  std::optional<double> mode_change_at;
  /// Verifications fed to the window from spoof start on.
  std::size_t encounters_used = 0;
};

/// Walks the focal entity's encounters through the recovery engine. Before
/// spoof_start each peer disagrees (v = 1) with probability p; from
/// spoof_start on each peer disagrees unless malicious, i.e. with
/// probability 1 - p. Recovery before spoof_start is reported as FalseAlarm.
DetectionResult time_to_detection(const EncounterTrace& trace, const std::string& focal,
                                  const RecoveryConfig& config, double p, double spoof_start,
                                  const DetectionOptions& options, RandomSource& src);

/// Same, over a precomputed encounter sequence.
DetectionResult time_to_detection(const EncounterSequence& sequence, const RecoveryConfig& config,
                                  double p, double spoof_start, const DetectionOptions& options,
                                  RandomSource& src);

/// Distinct ids per contiguous bin [k*bin, (k+1)*bin), from the first
/// occupied bin to the last.
std::vector<std::pair<double, std::size_t>> active_counts(const EncounterTrace& trace,
                                                          double bin);

struct Area {
  double width = 1000.0;
  double height = 1000.0;
};

/// Random-waypoint mobility for ids v0..v{n-1}, sampled at 0, dt, ... up to
/// duration. Entity i draws from src.derive(i).
EncounterTrace synth_trace(std::size_t n_entities, Area area, double speed, double duration,
                           double sample_dt, const RandomSource& src);

/// Focal entity "focal" meeting a fresh peer at Poisson(rate) times in
/// [0, duration]; each meeting is a shared sample with the peer 10 m away.
EncounterTrace poisson_encounter_trace(double rate, double duration, const RandomSource& src);

struct LatencyRow {
  std::string focal;
  double spoof_start = 0.0;
  DetectionResult result;
};

/// CSV `focal_id,spoof_start_s,detect_s,encounters_used`; detect_s is NA
/// unless the spoofing was detected.
void write_latency_csv(std::ostream& out, const std::vector<LatencyRow>& rows);

}  // namespace lerkit::traffic
