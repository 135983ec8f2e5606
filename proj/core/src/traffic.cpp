#include "lerkit/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lerkit/error.hpp"
#include "lerkit/recovery.hpp"

namespace lerkit::traffic {

namespace {

constexpr const char* kHeader = "t_sec,vehicle_id,x_m,y_m";

double parse_field(const std::string& text, std::size_t line, const char* name) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ParseError(line, std::string("non-numeric ") + name + " '" + text + "'");
  }
  return value;
}

// Indices [begin, end) of rows sharing one timestamp, in order.
template <typename Fn>
void for_each_timestamp(const EncounterTrace& trace, Fn&& fn) {
  const auto& rows = trace.rows;
  for (std::size_t begin = 0; begin < rows.size();) {
    std::size_t end = begin + 1;
    while (end < rows.size() && rows[end].t == rows[begin].t) ++end;
    fn(begin, end);
    begin = end;
  }
}

}  // namespace

bool EncounterTrace::contains(const std::string& id) const {
  return std::any_of(rows.begin(), rows.end(), [&](const TraceRow& r) { return r.id == id; });
}

std::vector<std::string> EncounterTrace::ids() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (seen.insert(r.id).second) out.push_back(r.id);
  }
  return out;
}

EncounterTrace make_trace(std::vector<TraceRow> rows) {
  EncounterTrace trace;
  trace.rows = std::move(rows);
  std::set<std::string> ids_at_time;
  double gap = 0.0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto& r = trace.rows[i];
    if (i > 0) {
      const double prev = trace.rows[i - 1].t;
      if (r.t < prev) throw ParseError(i + 1, "ordering: rows must be sorted by t_sec");
      if (r.t > prev) {
        ids_at_time.clear();
        if (gap == 0.0 || r.t - prev < gap) gap = r.t - prev;
      }
    }
    if (!ids_at_time.insert(r.id).second) {
      throw ParseError(i + 1, "duplicate row for vehicle '" + r.id + "' at t_sec " +
                                  format_number(r.t));
    }
  }
  trace.sample_dt = gap;
  return trace;
}

EncounterTrace parse_trace(std::istream& in) {
  std::string raw;
  std::size_t line = 0;
  if (!std::getline(in, raw)) throw ParseError(1, "missing header");
  ++line;
  if (!raw.empty() && raw.back() == '\r') raw.pop_back();
  if (raw != kHeader) throw ParseError(1, std::string("header must be '") + kHeader + "'");

  std::vector<TraceRow> rows;
  std::set<std::string> ids_at_time;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(raw);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (raw.back() == ',') fields.emplace_back();
    if (fields.size() != 4) throw ParseError(line, "expected 4 fields");
    TraceRow row;
    row.t = parse_field(fields[0], line, "t_sec");
    row.id = fields[1];
    if (row.id.empty()) throw ParseError(line, "empty vehicle_id");
    row.position = {parse_field(fields[2], line, "x_m"), parse_field(fields[3], line, "y_m"), 0.0};
    if (!rows.empty()) {
      if (row.t < rows.back().t) throw ParseError(line, "ordering: t_sec decreases");
      if (row.t > rows.back().t) ids_at_time.clear();
    }
    if (!ids_at_time.insert(row.id).second) {
      throw ParseError(line, "duplicate row for vehicle '" + row.id + "'");
    }
    rows.push_back(std::move(row));
  }
  return make_trace(std::move(rows));
}

EncounterTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParam("trace", "cannot open '" + path + "'");
  return parse_trace(in);
}

void write_trace_csv(std::ostream& out, const EncounterTrace& trace) {
  out << kHeader << '\n';
  for (const auto& r : trace.rows) {
    out << format_number(r.t) << ',' << r.id << ',' << format_number(r.position.x) << ','
        << format_number(r.position.y) << '\n';
  }
}

EncounterSequence encounters(const EncounterTrace& trace, const std::string& focal,
                             double range_m, double t_k) {
  if (!(range_m >= 0.0)) throw InvalidParam("range_m", "must be >= 0");
  if (!(t_k > 0.0)) throw InvalidParam("t_k", "must be positive");
  if (!trace.contains(focal)) throw UnknownEntity(focal);

  EncounterSequence seq;
  seq.focal = focal;
  std::map<std::string, double> last_event;
  for_each_timestamp(trace, [&](std::size_t begin, std::size_t end) {
    const TraceRow* self = nullptr;
    for (std::size_t i = begin; i < end; ++i) {
      if (trace.rows[i].id == focal) self = &trace.rows[i];
    }
    if (self == nullptr) return;
    std::vector<Encounter> here;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& r = trace.rows[i];
      if (&r == self || distance(r.position, self->position) > range_m) continue;
      auto it = last_event.find(r.id);
      if (it != last_event.end() && r.t - it->second < t_k) continue;
      last_event[r.id] = r.t;
      here.push_back({r.t, r.id});
    }
    std::sort(here.begin(), here.end(),
              [](const Encounter& a, const Encounter& b) { return a.peer < b.peer; });
    seq.events.insert(seq.events.end(), here.begin(), here.end());
  });
  return seq;
}

std::string to_string(DetectionStatus status) {
  switch (status) {
    case DetectionStatus::Detected:
      return "detected";
    case DetectionStatus::NotDetected:
      return "not-detected";
    case DetectionStatus::FalseAlarm:
      return "false-alarm";
  }
  return "not-detected";
}

DetectionResult time_to_detection(const EncounterSequence& sequence, const RecoveryConfig& config,
                                  double p, double spoof_start, const DetectionOptions& options,
                                  RandomSource& src) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParam("p", "must lie in [0, 1]");
  if (!(options.ranging_probability >= 0.0 && options.ranging_probability <= 1.0)) {
    throw InvalidParam("ranging_probability", "must lie in [0, 1]");
  }
  if (!(options.recovery_rate_multiplier >= 1.0)) {
    throw InvalidParam("recovery_rate_multiplier", "must be >= 1");
  }
  validate_config(config);

  recovery::SlidingWindow window(config.window());
  recovery::ModeState state;
  DetectionResult result;
  for (const auto& e : sequence.events) {
    double ranging = options.ranging_probability;
    if (state.mode == recovery::Mode::Recovery) {
      ranging = std::min(1.0, ranging * options.recovery_rate_multiplier);
    }
    if (ranging < 1.0 && !bernoulli(src, ranging)) continue;
    const bool spoofed = e.time >= spoof_start;
    const bool disagree = bernoulli(src, spoofed ? 1.0 - p : p);
    if (spoofed) ++result.encounters_used;
    recovery::step_in_place(state, window, {e.peer, static_cast<std::uint8_t>(disagree), e.time},
                            config);
    if (state.mode == recovery::Mode::Recovery) {
      result.mode_change_at = e.time;
      if (spoofed) {
        result.status = DetectionStatus::Detected;
        result.latency_s = e.time - spoof_start;
      } else {
        result.status = DetectionStatus::FalseAlarm;
      }
      return result;
    }
  }
  return result;
}

DetectionResult time_to_detection(const EncounterTrace& trace, const std::string& focal,
                                  const RecoveryConfig& config, double p, double spoof_start,
                                  const DetectionOptions& options, RandomSource& src) {
  if (!trace.empty() && (spoof_start < trace.start() || spoof_start > trace.end())) {
    throw InvalidParam("spoof_start", "must lie within the trace span");
  }
  return time_to_detection(encounters(trace, focal, options.range_m, options.t_k), config, p,
                           spoof_start, options, src);
}

std::vector<std::pair<double, std::size_t>> active_counts(const EncounterTrace& trace,
                                                          double bin) {
  if (!(bin > 0.0)) throw InvalidParam("bin", "must be positive");
  std::vector<std::pair<double, std::size_t>> out;
  if (trace.empty()) return out;
  const auto index = [&](double t) { return static_cast<long long>(std::floor(t / bin)); };
  const long long first = index(trace.start());
  const long long last = index(trace.end());
  std::vector<std::set<std::string>> seen(static_cast<std::size_t>(last - first + 1));
  for (const auto& r : trace.rows) seen[static_cast<std::size_t>(index(r.t) - first)].insert(r.id);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    out.emplace_back(static_cast<double>(first + static_cast<long long>(i)) * bin, seen[i].size());
  }
  return out;
}

EncounterTrace synth_trace(std::size_t n_entities, Area area, double speed, double duration,
                           double sample_dt, const RandomSource& src) {
  if (!(area.width > 0.0 && area.height > 0.0)) throw InvalidParam("area", "must be positive");
  if (!(speed > 0.0)) throw InvalidParam("speed", "must be positive");
  if (!(duration > 0.0)) throw InvalidParam("duration", "must be positive");
  if (!(sample_dt > 0.0)) throw InvalidParam("sample_dt", "must be positive");

  const auto samples = static_cast<std::size_t>(std::floor(duration / sample_dt + 1e-9)) + 1;
  std::vector<std::vector<Coordinates>> paths(n_entities);
  for (std::size_t i = 0; i < n_entities; ++i) {
    RandomSource rng = src.derive(i);
    const auto draw = [&] {
      return Coordinates{rng.uniform() * area.width, rng.uniform() * area.height, 0.0};
    };
    Coordinates pos = draw();
    Coordinates target = draw();
    auto& path = paths[i];
    path.reserve(samples);
    path.push_back(pos);
    for (std::size_t s = 1; s < samples; ++s) {
      double travel = speed * sample_dt;
      while (travel > 0.0) {
        const double left = distance(pos, target);
        if (left <= travel) {
          travel -= left;
          pos = target;
          target = draw();
        } else {
          pos.x += (target.x - pos.x) * travel / left;
          pos.y += (target.y - pos.y) * travel / left;
          travel = 0.0;
        }
      }
      path.push_back(pos);
    }
  }

  std::vector<TraceRow> rows;
  rows.reserve(samples * n_entities);
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = static_cast<double>(s) * sample_dt;
    for (std::size_t i = 0; i < n_entities; ++i) {
      rows.push_back({t, "v" + std::to_string(i), paths[i][s]});
    }
  }
  return make_trace(std::move(rows));
}

EncounterTrace poisson_encounter_trace(double rate, double duration, const RandomSource& src) {
  if (!(rate > 0.0)) throw InvalidParam("rate", "must be positive");
  if (!(duration > 0.0)) throw InvalidParam("duration", "must be positive");
  RandomSource rng = src;
  std::vector<TraceRow> rows{{0.0, "focal", {0.0, 0.0, 0.0}}};
  double t = 0.0;
  for (std::size_t k = 0;; ++k) {
    t += -std::log1p(-rng.uniform()) / rate;
    if (t > duration) break;
    if (t == rows.back().t) continue;
    rows.push_back({t, "focal", {0.0, 0.0, 0.0}});
    rows.push_back({t, "p" + std::to_string(k), {10.0, 0.0, 0.0}});
  }
  return make_trace(std::move(rows));
}

void write_latency_csv(std::ostream& out, const std::vector<LatencyRow>& rows) {
  out << "focal_id,spoof_start_s,detect_s,encounters_used\n";
  for (const auto& row : rows) {
    out << row.focal << ',' << format_number(row.spoof_start) << ',';
    if (row.result.latency_s) {
      out << format_number(*row.result.latency_s);
    } else {
      out << "NA";
    }
    out << ',' << row.result.encounters_used << '\n';
  }
}

}  // namespace lerkit::traffic
