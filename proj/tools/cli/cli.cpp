#include "cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lerkit/error.hpp"
#include "lerkit/evaluate.hpp"
#include "lerkit/geometry.hpp"
#include "lerkit/meta.hpp"
#include "lerkit/parallel.hpp"
#include "lerkit/traffic.hpp"
#include "lerkit/verify.hpp"

namespace lerkit::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Raised for bad flag combinations discovered after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool strict = false;
  bool verbose = false;
};

std::uint64_t resolve_seed(const Common& common, std::ostream& out) {
  if (common.seed) return *common.seed;
  if (common.strict) throw UsageError("--strict requires an explicit --seed");
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  out << "seed " << seed << " (generated)\n";
  return seed;
}

std::string file_name(const std::string& path) { return fs::path(path).filename().string(); }

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::ofstream open_output(const std::string& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

/// Writes `<path>` describing one run. Paths are recorded by file name
/// and worker counts are omitted, so manifests compare byte-for-byte
/// across output directories and worker settings.
void write_manifest(const std::string& path, const std::string& subcommand, Json parameters,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
  Json doc;
  doc["subcommand"] = subcommand;
  doc["parameters"] = std::move(parameters);
  doc["master_seed"] = seed;
  Json files = Json::array();
  for (const auto& o : outputs) files.push_back(file_name(o));
  doc["outputs"] = files;
  doc["tool_version"] = kToolVersion;
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

std::string replace_extension(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  p.replace_extension();
  return p.string() + suffix;
}

// --- optimize ---------------------------------------------------------------

struct OptimizeArgs {
  double p = 0.3;
  double E = 10.0;
  std::size_t T = 30;
  std::size_t N = 10'000;
  std::string out = "config.json";
  std::string bounds;
  std::size_t rounds = 4;
  std::string sweep = "sequential";
};

int cmd_optimize(const OptimizeArgs& a, const Common& common, std::ostream& out,
                 std::ostream& err) {
  const ScenarioParams params = validate_params({a.p, a.E, a.T, a.N});
  if (a.rounds < 1) throw InvalidParam("rounds", "must be >= 1");
  const std::uint64_t seed = resolve_seed(common, out);
  meta::OptimizeOptions options;
  options.rounds = a.rounds;
  options.sweep = a.sweep == "independent" ? meta::Sweep::Independent : meta::Sweep::Sequential;
  if (common.verbose) {
    options.on_index = [&err](std::size_t sweep, std::size_t index, const meta::Interval& iv) {
      err << "sweep " << sweep << " index " << index << " [" << format_number(iv.lower) << ", "
          << format_number(iv.upper) << "]\n";
    };
  }
  const auto report = meta::optimize_weights(params, RandomSource(seed), options);
  const RecoveryConfig config = meta::to_config(report, params);
  const auto remeasured = meta::estimate_detection_steps(config.weights, config.threshold, a.p,
                                                         a.N, RandomSource(seed, 1));

  const std::string bounds = a.bounds.empty() ? replace_extension(a.out, ".bounds.csv") : a.bounds;
  ensure_parent(a.out);
  save_config(config, a.out);
  {
    auto f = open_output(bounds);
    meta::write_bounds_csv(f, report);
  }
  Json params_json;
  params_json["p"] = a.p;
  params_json["E"] = a.E;
  params_json["T"] = a.T;
  params_json["N"] = a.N;
  params_json["rounds"] = a.rounds;
  params_json["sweep"] = a.sweep;
  write_manifest(a.out + ".manifest.json", "optimize", params_json, seed, {a.out, bounds});

  out << "qual " << format_number(report.qual) << '\n'
      << "t_opt " << format_number(report.threshold) << '\n'
      << "initial_threshold " << format_number(report.initial_threshold) << '\n'
      << "sweeps " << report.rounds_run << '\n'
      << "remeasured_steps " << format_number(remeasured.mean) << " +- "
      << format_number(remeasured.std_error) << '\n'
      << "wrote " << a.out << ", " << bounds << '\n';
  return kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string config;
  std::vector<double> actual_p;
  std::optional<std::size_t> steps;
  std::size_t N = 10'000;
  std::vector<double> sweep_p{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
  std::vector<std::string> e_configs;
  std::string out_dir = ".";
};

int cmd_evaluate(const EvaluateArgs& a, const Common& common, std::ostream& out) {
  const RecoveryConfig config = load_config(a.config);
  if (a.N < 1) throw InvalidParam("N", "must be >= 1");
  const std::uint64_t seed = resolve_seed(common, out);
  const RandomSource src(seed);
  const std::vector<double> actual =
      a.actual_p.empty() ? std::vector<double>{config.provenance.p} : a.actual_p;
  const std::size_t steps =
      a.steps.value_or(static_cast<std::size_t>(std::ceil(4.0 * config.provenance.E)));
  if (steps < 1) throw InvalidParam("steps", "must be >= 1");
  const auto& prov = config.provenance;

  std::vector<std::string> written;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const auto curve = evaluate::detection_curve(config, actual[i], a.N, steps, src.derive(i));
    if (!std::is_sorted(curve.cumulative.begin(), curve.cumulative.end())) {
      throw std::logic_error("detection curve is not monotone");
    }
    const std::string path =
        (fs::path(a.out_dir) / evaluate::artifact_name("detection", actual[i], prov.E, prov.T))
            .string();
    auto f = open_output(path);
    evaluate::write_curve_csv(f, curve);
    written.push_back(path);
    out << "detection p=" << format_number(actual[i]) << " P(<=" << steps
        << ")=" << format_number(curve.at(steps)) << '\n';
  }

  const auto sweep = evaluate::qual_sweep_over_p(config, a.sweep_p, a.N, src.derive(1'000'000));
  {
    const std::string path =
        (fs::path(a.out_dir) / evaluate::artifact_name("qual", prov.p, prov.E, prov.T)).string();
    auto f = open_output(path);
    evaluate::write_sweep_csv(f, sweep);
    written.push_back(path);
  }
  for (const auto& pt : sweep.points) {
    out << "qual p=" << format_number(pt.x) << " " << format_number(pt.qual) << '\n';
  }

  if (!a.e_configs.empty()) {
    std::vector<RecoveryConfig> configs;
    double max_e = 0.0;
    for (const auto& path : a.e_configs) {
      configs.push_back(load_config(path));
      max_e = std::max(max_e, configs.back().provenance.E);
    }
    const auto by_e = evaluate::qual_sweep_over_e(configs, a.N, src.derive(1'000'001));
    const std::string path =
        (fs::path(a.out_dir) / evaluate::artifact_name("qualE", prov.p, max_e, prov.T)).string();
    auto f = open_output(path);
    evaluate::write_sweep_csv(f, by_e);
    written.push_back(path);
  }

  Json params;
  params["config"] = file_name(a.config);
  params["actual_p"] = actual;
  params["steps"] = steps;
  params["N"] = a.N;
  params["sweep_p"] = a.sweep_p;
  Json e_files = Json::array();
  for (const auto& c : a.e_configs) e_files.push_back(file_name(c));
  params["e_configs"] = e_files;
  write_manifest((fs::path(a.out_dir) / "evaluate.manifest.json").string(), "evaluate", params,
                 seed, written);
  out << "wrote " << written.size() << " files to " << a.out_dir << '\n';
  return kExitOk;
}

// --- traffic ----------------------------------------------------------------

struct TrafficArgs {
  std::string trace;
  std::string synth;
  std::string config;
  std::optional<double> p;
  std::optional<double> spoof_start;
  double range = traffic::kDefaultRange;
  double tk = traffic::kDefaultKeyPeriod;
  std::vector<std::string> focal;
  std::string out = "latency.csv";
  std::string counts_out;
  double bin = 60.0;
  std::optional<std::size_t> meet;
  std::string meet_out;
  std::string trace_out;
};

std::map<std::string, double> parse_key_values(const std::string& text) {
  std::map<std::string, double> kv;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--synth expects key=value pairs, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(key);
      kv[key] = v;
    } catch (const std::exception&) {
      throw UsageError("--synth value for '" + key + "' is not a number");
    }
  }
  return kv;
}

int cmd_traffic(const TrafficArgs& a, const Common& common, std::ostream& out) {
  if (a.trace.empty() == a.synth.empty()) {
    throw UsageError("give exactly one of --trace or --synth");
  }
  const RecoveryConfig config = load_config(a.config);
  const double p = a.p.value_or(config.provenance.p);
  const std::uint64_t seed = resolve_seed(common, out);
  const RandomSource src(seed);

  Json params;
  traffic::EncounterTrace trace;
  if (!a.trace.empty()) {
    trace = traffic::load_trace(a.trace);
    params["trace"] = file_name(a.trace);
  } else {
    auto kv = parse_key_values(a.synth);
    const std::set<std::string> known{"n", "duration", "width", "height", "speed", "dt"};
    for (const auto& [k, v] : kv) {
      if (!known.contains(k)) throw UsageError("--synth: unknown key '" + k + "'");
    }
    const auto get = [&](const char* k, double d) { return kv.contains(k) ? kv[k] : d; };
    const double n = get("n", 50);
    if (!(n >= 0.0) || n != std::floor(n)) throw InvalidParam("n", "must be a whole number");
    trace = traffic::synth_trace(static_cast<std::size_t>(n), {get("width", 1000), get("height", 1000)},
                                 get("speed", 14.0), get("duration", 600), get("dt", 1.0),
                                 src.derive(1'000'000));
    params["synth"] = a.synth;
  }
  if (trace.empty()) throw UsageError("trace has no rows");
  if (!a.trace_out.empty()) {
    auto f = open_output(a.trace_out);
    traffic::write_trace_csv(f, trace);
  }

  const std::vector<std::string> focal = a.focal.empty() ? trace.ids() : a.focal;
  const double spoof_start = a.spoof_start.value_or(trace.start());
  traffic::DetectionOptions options;
  options.range_m = a.range;
  options.t_k = a.tk;

  std::vector<traffic::LatencyRow> rows;
  std::vector<double> latencies;
  std::size_t false_alarms = 0;
  std::size_t undetected = 0;
  for (std::size_t i = 0; i < focal.size(); ++i) {
    RandomSource rng = src.derive(i);
    const auto result =
        traffic::time_to_detection(trace, focal[i], config, p, spoof_start, options, rng);
    if (result.latency_s) latencies.push_back(*result.latency_s);
    if (result.status == traffic::DetectionStatus::FalseAlarm) ++false_alarms;
    if (result.status == traffic::DetectionStatus::NotDetected) ++undetected;
    rows.push_back({focal[i], spoof_start, result});
  }
  std::vector<std::string> written{a.out};
  {
    auto f = open_output(a.out);
    traffic::write_latency_csv(f, rows);
  }
  if (!a.counts_out.empty()) {
    auto f = open_output(a.counts_out);
    f << "bin_start_s,active\n";
    for (const auto& [start, count] : traffic::active_counts(trace, a.bin)) {
      f << format_number(start) << ',' << count << '\n';
    }
    written.push_back(a.counts_out);
  }
  if (a.meet) {
    const std::string path = a.meet_out.empty() ? replace_extension(a.out, ".meet.csv") : a.meet_out;
    auto f = open_output(path);
    f << "focal_id,encounters,duration_s\n";
    for (const auto& id : focal) {
      const auto seq = traffic::encounters(trace, id, a.range, a.tk);
      f << id << ',' << *a.meet << ',';
      if (*a.meet >= 1 && seq.events.size() >= *a.meet) {
        f << format_number(seq.events[*a.meet - 1].time - trace.start());
      } else {
        f << "NA";
      }
      f << '\n';
    }
    written.push_back(path);
  }
  if (!a.trace_out.empty()) written.push_back(a.trace_out);

  params["config"] = file_name(a.config);
  params["p"] = p;
  params["spoof_start"] = spoof_start;
  params["range"] = a.range;
  params["tk"] = a.tk;
  params["focal"] = focal.size() == trace.ids().size() && a.focal.empty() ? Json("all") : Json(focal);
  params["bin"] = a.bin;
  write_manifest(a.out + ".manifest.json", "traffic", params, seed, written);

  out << "focal " << focal.size() << " detected " << latencies.size() << " false_alarm "
      << false_alarms << " not_detected " << undetected << '\n';
  if (!latencies.empty()) {
    std::vector<double> sorted = latencies;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double l : sorted) sum += l;
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0;
    out << "latency_mean_s " << format_number(sum / static_cast<double>(m)) << '\n'
        << "latency_median_s " << format_number(median) << '\n';
  }
  return kExitOk;
}

// --- verify-demo ------------------------------------------------------------

struct VerifyArgs {
  std::string script;
  std::string out;
  double ber = 0.0;
  std::size_t max_bit_errors = 4;
  double delta = 3.0;
  std::optional<double> cap;
  std::string cap_preset = "operating";
  double mafia_prob = 1e-4;
  std::optional<double> shortening;
  double enlargement = 0.0;
};

int cmd_verify_demo(const VerifyArgs& a, const Common& common, std::ostream& out) {
  verify::Script script;
  {
    std::ifstream in(a.script);
    if (!in) throw UsageError("cannot open script '" + a.script + "'");
    script = verify::parse_script(in);
  }
  const std::uint64_t seed = resolve_seed(common, out);
  verify::ChannelModel chan;
  chan.bit_error_rate = a.ber;
  chan.max_bit_errors_accepted = a.max_bit_errors;
  chan.delta_m = a.delta;
  verify::AdversaryModel adv;
  adv.mafia_success_prob = a.mafia_prob;
  if (a.cap_preset == "symbol") adv = adv.with_symbol_bound_cap();
  if (a.cap) adv.max_shortening_m = *a.cap;
  if (a.shortening) adv.requested_shortening_m = *a.shortening;
  adv.enlargement_m = a.enlargement;

  const auto report = verify::run_script(script, chan, adv, RandomSource(seed));
  for (const auto& row : report.exchanges) {
    out << format_number(row.exchange.time) << ' ' << row.exchange.verifier << " -> "
        << row.exchange.prover << " [" << verify::to_string(row.exchange.kind) << "] "
        << verify::to_string(row.status);
    if (row.status == verify::ExchangeStatus::Accepted) out << " v=" << int{row.v};
    out << " measured=" << format_number(row.measured_m)
        << " shortening=" << format_number(row.shortening_m);
    if (row.enlargement_flag) out << " enlargement-flagged";
    out << '\n';
  }
  for (const auto& d : report.discarded) {
    out << "discarded duplicate " << d.observer << " <- " << d.peer << " at "
        << format_number(d.at_time) << '\n';
  }
  out << "shortening_cap_m " << format_number(adv.max_shortening_m) << '\n';
  if (!a.out.empty()) {
    {
      auto f = open_output(a.out);
      verify::write_report_csv(f, report);
    }
    Json params;
    params["script"] = file_name(a.script);
    params["ber"] = a.ber;
    params["max_bit_errors"] = a.max_bit_errors;
    params["delta"] = a.delta;
    params["shortening_cap"] = adv.max_shortening_m;
    params["mafia_prob"] = a.mafia_prob;
    params["enlargement"] = a.enlargement;
    write_manifest(a.out + ".manifest.json", "verify-demo", params, seed, {a.out});
  }
  return kExitOk;
}

// --- geometry ---------------------------------------------------------------

struct GeometryArgs {
  std::size_t max_n = 8;
  std::size_t instances = 100;
  double delta = 0.01;
  std::string anchors;
  std::string out;
};

int cmd_geometry(const GeometryArgs& a, const Common& common, std::ostream& out) {
  if (!a.anchors.empty()) {
    std::vector<geometry::Anchor> anchors;
    std::stringstream ss(a.anchors);
    for (std::string item; std::getline(ss, item, ';');) {
      std::stringstream fs_(item);
      std::vector<double> v;
      for (std::string x; std::getline(fs_, x, ',');) {
        try {
          v.push_back(std::stod(x));
        } catch (const std::exception&) {
          throw UsageError("--anchors expects x,y,d triples separated by ';'");
        }
      }
      if (v.size() != 3) throw UsageError("--anchors expects x,y,d triples separated by ';'");
      anchors.push_back({{v[0], v[1], 0.0}, v[2], true});
    }
    for (const auto& x : geometry::consistent_positions(anchors, a.delta)) {
      out << format_number(x.x) << ',' << format_number(x.y) << '\n';
    }
    return kExitOk;
  }

  const std::uint64_t seed = resolve_seed(common, out);
  const RandomSource src(seed);
  std::ostringstream csv;
  csv << "n,k,rule,feasible,instances,resampled\n";
  std::size_t disagreements = 0;
  for (std::size_t n = 1; n <= a.max_n; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      RandomSource rng = src.derive(n * 64 + k);
      const bool rule = geometry::spoof_feasible(n, k);
      std::size_t feasible = 0;
      std::size_t resampled = 0;
      for (std::size_t i = 0; i < a.instances; ++i) {
        for (;;) {
          const auto point = [&] { return Coordinates{rng.uniform() * 1000.0, rng.uniform() * 1000.0, 0.0}; };
          const Coordinates truth = point();
          std::vector<Coordinates> honest(n - k);
          for (auto& h : honest) h = point();
          const auto search = geometry::search_spoof(honest, truth, k, a.delta);
          if (search.degenerate) {
            ++resampled;
            continue;
          }
          if (search.feasible) ++feasible;
          break;
        }
      }
      if ((feasible == a.instances) != rule || (feasible == 0) == rule) ++disagreements;
      csv << n << ',' << k << ',' << (rule ? 1 : 0) << ',' << feasible << ',' << a.instances
          << ',' << resampled << '\n';
    }
  }
  out << csv.str();
  out << "disagreements " << disagreements << '\n';
  if (!a.out.empty()) {
    {
      auto f = open_output(a.out);
      f << csv.str();
    }
    Json params;
    params["max_n"] = a.max_n;
    params["instances"] = a.instances;
    params["delta"] = a.delta;
    write_manifest(a.out + ".manifest.json", "geometry", params, seed, {a.out});
  }
  return disagreements == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Location verification, spoofing recovery and meta-protocol experiments",
               "lerkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  Common common;
  app.add_option("--seed", common.seed, "Master seed for every random stream");
  app.add_option("--workers", common.workers,
                 "Worker threads (default: $LERKIT_WORKERS or 1); results do not depend on it")
      ->check(CLI::PositiveNumber);
  app.add_flag("--strict", common.strict, "Refuse to run randomized commands without --seed");
  app.add_flag("-v,--verbose", common.verbose, "Progress on stderr");

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Run the meta-protocol for (p, E, T, N)");
  optimize->add_option("--p", opt.p, "Assumed malicious fraction")->required();
  optimize->add_option("--E", opt.E, "Target expected detection steps")->required();
  optimize->add_option("--T", opt.T, "Window size")->required();
  optimize->add_option("--N", opt.N, "Monte Carlo trials")->capture_default_str();
  optimize->add_option("--out", opt.out, "Config JSON path")->capture_default_str();
  optimize->add_option("--bounds", opt.bounds, "Bounds CSV path (default: <out>.bounds.csv)");
  optimize->add_option("--rounds", opt.rounds, "Maximum sweeps")->capture_default_str();
  optimize->add_option("--sweep", opt.sweep, "sequential or independent")
      ->check(CLI::IsMember({"sequential", "independent"}))
      ->capture_default_str();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Detection curves and qual sweeps for a config");
  evaluate->add_option("--config", ev.config, "Config JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--actual-p", ev.actual_p, "Malicious fractions for detection curves")
      ->delimiter(',');
  evaluate->add_option("--steps", ev.steps, "Curve length (default 4E)");
  evaluate->add_option("--N", ev.N, "Monte Carlo trials")->capture_default_str();
  evaluate->add_option("--sweep-p", ev.sweep_p, "Fractions for the qual sweep")->delimiter(',');
  evaluate->add_option("--e-configs", ev.e_configs, "Configs for a qual-vs-E sweep")
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out-dir", ev.out_dir, "Output directory")->capture_default_str();

  TrafficArgs tr;
  auto* traffic_cmd = app.add_subcommand("traffic", "Detection latency over a mobility trace");
  traffic_cmd->add_option("--trace", tr.trace, "Trace CSV")->check(CLI::ExistingFile);
  traffic_cmd->add_option("--synth", tr.synth,
                          "Synthetic trace, e.g. n=50,duration=600[,width,height,speed,dt]");
  traffic_cmd->add_option("--config", tr.config, "Config JSON")->required()->check(CLI::ExistingFile);
  traffic_cmd->add_option("--p", tr.p, "Actual malicious fraction (default: config p)");
  traffic_cmd->add_option("--spoof-start", tr.spoof_start, "Spoofing onset (default: trace start)");
  traffic_cmd->add_option("--range", tr.range, "Communication range, m")->capture_default_str();
  traffic_cmd->add_option("--tk", tr.tk, "Key period T_k, s")->capture_default_str();
  traffic_cmd->add_option("--focal", tr.focal, "Focal ids (default: all)")->delimiter(',');
  traffic_cmd->add_option("--out", tr.out, "Latency CSV")->capture_default_str();
  traffic_cmd->add_option("--counts-out", tr.counts_out, "Active-vehicle counts CSV");
  traffic_cmd->add_option("--bin", tr.bin, "Count bin, s")->capture_default_str();
  traffic_cmd->add_option("--meet", tr.meet, "Also report time to meet this many peers");
  traffic_cmd->add_option("--meet-out", tr.meet_out, "CSV for --meet (default: <out>.meet.csv)");
  traffic_cmd->add_option("--trace-out", tr.trace_out, "Write the trace used");

  VerifyArgs vf;
  auto* verify_cmd = app.add_subcommand("verify-demo", "Run a scripted ranging scenario");
  verify_cmd->add_option("--script", vf.script, "Scenario script")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--out", vf.out, "Report CSV");
  verify_cmd->add_option("--ber", vf.ber, "Bit error rate")->capture_default_str();
  verify_cmd->add_option("--max-bit-errors", vf.max_bit_errors, "Accepted MTAC bit errors")
      ->capture_default_str();
  verify_cmd->add_option("--delta", vf.delta, "Distance slack, m")->capture_default_str();
  verify_cmd->add_option("--cap", vf.cap, "Distance-fraud shortening cap, m");
  verify_cmd->add_option("--cap-preset", vf.cap_preset, "operating (200 m) or symbol (3/4 T_sym c)")
      ->check(CLI::IsMember({"operating", "symbol"}))
      ->capture_default_str();
  verify_cmd->add_option("--mafia-prob", vf.mafia_prob, "Mafia-fraud success probability")
      ->capture_default_str();
  verify_cmd->add_option("--shortening", vf.shortening, "Requested distance-fraud shortening, m");
  verify_cmd->add_option("--enlargement", vf.enlargement, "Distance-fraud enlargement, m");

  GeometryArgs geo;
  auto* geometry_cmd = app.add_subcommand("geometry", "Check the n < 2k+3 spoofing rule");
  geometry_cmd->add_option("--max-n", geo.max_n, "Largest anchor count")->capture_default_str();
  geometry_cmd->add_option("--instances", geo.instances, "Instances per (n, k)")
      ->capture_default_str();
  geometry_cmd->add_option("--delta", geo.delta, "Circle membership slack, m")
      ->capture_default_str();
  geometry_cmd->add_option("--anchors", geo.anchors,
                           "Print consistent positions for x,y,d;x,y,d;... instead");
  geometry_cmd->add_option("--out", geo.out, "Agreement table CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (common.workers) set_workers(*common.workers);
    if (*optimize) return cmd_optimize(opt, common, out, err);
    if (*evaluate) return cmd_evaluate(ev, common, out);
    if (*traffic_cmd) return cmd_traffic(tr, common, out);
    if (*verify_cmd) return cmd_verify_demo(vf, common, out);
    if (*geometry_cmd) return cmd_geometry(geo, common, out);
  } catch (const Unachievable& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InfeasibleMonotoneFit& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Nonterminating& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ParseError& e) {
    err << "parse error at line " << e.line() << ": " << e.reason() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("lerkit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lerkit::cli
