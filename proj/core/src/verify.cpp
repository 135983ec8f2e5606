#include "lerkit/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "lerkit/error.hpp"

namespace lerkit::verify {

namespace {

// Session timestamps live on a 2^-50 s grid; every sum of a few of them
// is then exact in double precision.
constexpr int kGridExponent = 50;

double quantize(double seconds) {
  return std::ldexp(std::round(std::ldexp(seconds, kGridExponent)), -kGridExponent);
}

double quantize_down(double seconds) {
  return std::ldexp(std::floor(std::ldexp(seconds, kGridExponent)), -kGridExponent);
}

constexpr double kGridStep = 0x1.0p-50;

class Fnv {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ = (hash_ ^ p[i]) * 0x100000001b3ULL;
    }
  }
  void text(const std::string& s) {
    bytes(s.data(), s.size());
    bytes("\0", 1);
  }
  void number(double v) {
    const auto raw = std::bit_cast<std::uint64_t>(v);
    bytes(&raw, sizeof raw);
  }
  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

Bits random_bits(RandomSource& src, std::size_t n) {
  Bits out(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = src();
    out[i] = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
  }
  return out;
}

bool needs_proxy(AdversaryKind kind) {
  return kind == AdversaryKind::TerroristFraud || kind == AdversaryKind::DistanceHijacking;
}

}  // namespace

Entity Entity::at(std::string id, Coordinates position) {
  Entity e;
  e.id = std::move(id);
  e.true_position = position;
  e.reported_position = position;
  return e;
}

bool Entity::key_live(double now) const noexcept {
  return now >= key_valid_from && now < key_valid_from + key_valid_for;
}

std::string to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::None:
      return "none";
    case AdversaryKind::MafiaFraud:
      return "mafia";
    case AdversaryKind::DistanceFraud:
      return "distance";
    case AdversaryKind::TerroristFraud:
      return "terrorist";
    case AdversaryKind::DistanceHijacking:
      return "hijacking";
  }
  return "none";
}

AdversaryKind parse_adversary_kind(const std::string& text) {
  if (text == "none" || text == "None") return AdversaryKind::None;
  if (text == "mafia" || text == "MafiaFraud") return AdversaryKind::MafiaFraud;
  if (text == "distance" || text == "DistanceFraud") return AdversaryKind::DistanceFraud;
  if (text == "terrorist" || text == "TerroristFraud") return AdversaryKind::TerroristFraud;
  if (text == "hijacking" || text == "DistanceHijacking") return AdversaryKind::DistanceHijacking;
  throw InvalidParam("adversary_kind", "unknown kind '" + text + "'");
}

double AdversaryModel::symbol_shortening_bound_m() const noexcept {
  return 0.75 * symbol_duration_s() * kSpeedOfLight;
}

AdversaryModel AdversaryModel::with_symbol_bound_cap() const {
  AdversaryModel copy = *this;
  copy.max_shortening_m = symbol_shortening_bound_m();
  return copy;
}

void validate_adversary(const AdversaryModel& adv) {
  if (!(adv.mafia_success_prob >= 0.0 && adv.mafia_success_prob <= 1.0)) {
    throw InvalidParam("mafia_success_prob", "must lie in [0, 1]");
  }
  if (adv.subcarriers < 1) throw InvalidParam("subcarriers", "must be >= 1");
  if (!(adv.subcarrier_spacing_hz > 0.0)) {
    throw InvalidParam("subcarrier_spacing", "must be positive");
  }
  if (!(adv.clock_skew_theta_s >= 0.0)) throw InvalidParam("clock_skew_theta", "must be >= 0");
  if (!(adv.max_shortening_m >= 0.0)) throw InvalidParam("max_shortening_m", "must be >= 0");
  if (!(adv.requested_shortening_m >= 0.0)) {
    throw InvalidParam("requested_shortening_m", "must be >= 0");
  }
  if (!(adv.enlargement_m >= 0.0) || !std::isfinite(adv.enlargement_m)) {
    throw InvalidParam("enlargement_m", "must be finite and >= 0");
  }
  if (!(adv.mafia_shift_m >= 0.0)) throw InvalidParam("mafia_shift_m", "must be >= 0");
  if (needs_proxy(adv.kind) && !adv.proxy) {
    throw InvalidParam("proxy", to_string(adv.kind) + " needs a proxy entity");
  }
}

void validate_channel(const ChannelModel& chan) {
  if (!(chan.bit_error_rate >= 0.0 && chan.bit_error_rate <= 1.0)) {
    throw InvalidParam("bit_error_rate", "must lie in [0, 1]");
  }
  if (!(chan.delta_m >= 0.0)) throw InvalidParam("delta", "must be >= 0");
  if (chan.code_bits < 1) throw InvalidParam("code_bits", "must be >= 1");
}

double RangingSession::verifier_distance() const noexcept {
  return (t[3] - t[0] - processing_time) / 2.0 * kSpeedOfLight;
}

double RangingSession::prover_distance() const noexcept {
  return (t[5] - t[2] - processing_time) / 2.0 * kSpeedOfLight;
}

Bits recover_signature(const Bits& m1, const Bits& m2) {
  if (m1.size() != m2.size()) throw LengthMismatch(m1.size(), m2.size());
  Bits out(m1.size());
  for (std::size_t i = 0; i < m1.size(); ++i) out[i] = m1[i] ^ m2[i];
  return out;
}

Bits sign(const std::string& id, double key_valid_from, const Bits& message,
          const std::string& verifier_id, const std::string& prover_id,
          const Coordinates& position) {
  Fnv key;
  key.text(id);
  key.number(key_valid_from);
  Fnv digest;
  digest.bytes(message.data(), message.size());
  digest.text(verifier_id);
  digest.text(prover_id);
  digest.number(position.x);
  digest.number(position.y);
  digest.number(position.z);
  std::uint64_t mixed = digest.value();
  std::uint64_t state = key.value() ^ splitmix64(mixed);
  Bits out(message.size());
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i % 64 == 0) word = splitmix64(state);
    out[i] = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
  }
  return out;
}

RangingSession run_exchange(const Entity& verifier, const Entity& prover, const ChannelModel& chan,
                            const AdversaryModel& adv, RandomSource& src, double now) {
  validate_channel(chan);
  validate_adversary(adv);
  if (!verifier.key_live(now)) throw KeyExpired(verifier.id);
  if (!prover.key_live(now)) throw KeyExpired(prover.id);

  RangingSession s;
  s.verifier_id = verifier.id;
  s.prover_id = prover.id;
  s.at_time = now;
  s.adversary = adv.kind;
  s.verifier_reported = verifier.reported_position;
  s.prover_reported = prover.reported_position;

  // Who is physically answering and whose key signs the response.
  const Entity* responder = &prover;
  std::string signer = prover.id;
  double signer_from = prover.key_valid_from;
  std::string claimed = prover.id;
  Coordinates claimed_position = prover.reported_position;
  if (adv.kind == AdversaryKind::TerroristFraud) {
    responder = &*adv.proxy;
    if (prover.te_intact) {
      signer = adv.proxy->id;
      signer_from = adv.proxy->key_valid_from;
    }
  } else if (adv.kind == AdversaryKind::DistanceHijacking) {
    responder = &*adv.proxy;
    signer = adv.proxy->id;
    signer_from = adv.proxy->key_valid_from;
    claimed = adv.proxy->id;
    claimed_position = adv.proxy->reported_position;
  }
  s.responder_id = responder->id;

  const double tof = quantize(distance(verifier.true_position, responder->true_position) /
                              kSpeedOfLight);
  const double tp = quantize(s.processing_time);
  s.processing_time = tp;
  s.true_distance_m = tof * kSpeedOfLight;

  // Response advance (positive) or delay (negative) on the prover side.
  double advance = 0.0;
  if (adv.kind == AdversaryKind::DistanceFraud) {
    const double wanted =
        std::min({adv.requested_shortening_m, adv.max_shortening_m, s.true_distance_m});
    advance = quantize_down(2.0 * wanted / kSpeedOfLight);
    const auto shortening = [&](double a) {
      return tof * kSpeedOfLight - (tof - a / 2.0) * kSpeedOfLight;
    };
    while (advance > 0.0 && shortening(advance) > adv.max_shortening_m) advance -= kGridStep;
    if (adv.enlargement_m > 0.0) {
      advance -= quantize(2.0 * adv.enlargement_m / kSpeedOfLight);
      s.enlargement_flag = true;
    }
  } else if (adv.kind == AdversaryKind::MafiaFraud) {
    if (bernoulli(src, adv.mafia_success_prob)) {
      s.mafia_success = true;
      advance = quantize(2.0 * std::min(adv.mafia_shift_m, s.true_distance_m) / kSpeedOfLight);
    } else {
      s.integrity_flag = true;
    }
  }

  s.t[0] = 0.0;
  s.t[1] = tof;
  s.t[2] = s.t[1] + tp - advance;
  s.t[3] = s.t[2] + tof;
  s.t[4] = s.t[3] + tp;
  s.t[5] = s.t[4] + tof;

  s.m1 = random_bits(src, kMessageBits);
  s.c1 = s.m1;
  s.response_signature = sign(signer, signer_from, s.m1, verifier.id, claimed, claimed_position);
  s.m2 = recover_signature(s.m1, s.response_signature);
  s.c2 = s.m2;
  s.m3 = recover_signature(s.m2, sign(verifier.id, verifier.key_valid_from, s.m2, verifier.id,
                                      prover.id, verifier.reported_position));
  s.c3 = s.m3;
  return s;
}

bool mtac_check(const RangingSession& session, const ChannelModel& chan, RandomSource& src) {
  validate_channel(chan);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < chan.code_bits; ++i) {
    if (bernoulli(src, chan.bit_error_rate)) ++errors;
  }
  return !session.integrity_flag && errors <= chan.max_bit_errors_accepted;
}

void KeyDirectory::issue(const Entity& entity) {
  if (!(entity.key_valid_for > 0.0)) throw InvalidParam("key_valid_for", "must be positive");
  keys_[entity.id] = Key{entity.key_valid_from, entity.key_valid_for, next_generation_++};
}

bool KeyDirectory::rotate(const std::string& id, double now) {
  auto it = keys_.find(id);
  if (it == keys_.end()) throw UnknownId(id);
  Key& k = it->second;
  if (now < k.valid_from || now < k.valid_from + k.valid_for) return false;
  const double epochs = std::floor((now - k.valid_from) / k.valid_for);
  k.valid_from += epochs * k.valid_for;
  k.generation = next_generation_++;
  return true;
}

const KeyDirectory::Key& KeyDirectory::key(const std::string& id) const {
  auto it = keys_.find(id);
  if (it == keys_.end()) throw UnknownId(id);
  return it->second;
}

bool KeyDirectory::live(const std::string& id, double now) const {
  const Key& k = key(id);
  return now >= k.valid_from && now < k.valid_from + k.valid_for;
}

bool KeyDirectory::first_contact(const std::string& observer, const std::string& peer,
                                 double now) {
  if (contacts_.emplace(observer, peer, key(peer).generation).second) return true;
  discarded_.push_back({observer, peer, now});
  return false;
}

bool data_validate(const RangingSession& session, KeyDirectory& dir, double now) {
  const auto& vk = dir.key(session.verifier_id);
  const auto& pk = dir.key(session.prover_id);
  if (!dir.live(session.verifier_id, now) || !dir.live(session.prover_id, now)) return false;
  const Bits expected_response = sign(session.prover_id, pk.valid_from, session.m1,
                                      session.verifier_id, session.prover_id,
                                      session.prover_reported);
  if (recover_signature(session.m1, session.m2) != expected_response) return false;
  const Bits expected_final = sign(session.verifier_id, vk.valid_from, session.m2,
                                   session.verifier_id, session.prover_id,
                                   session.verifier_reported);
  if (recover_signature(session.m2, session.m3) != expected_final) return false;
  return dir.first_contact(session.verifier_id, session.prover_id, now);
}

VerificationOutcome distance_validate(const RangingSession& session,
                                      const Coordinates& reported_a,
                                      const Coordinates& reported_b, const ChannelModel& chan) {
  const double claimed = distance(reported_a, reported_b);
  const bool match = std::abs(session.verifier_distance() - claimed) <= chan.delta_m;
  return VerificationOutcome{session.prover_id, static_cast<std::uint8_t>(match ? 0 : 1),
                             session.at_time};
}

// --- scenario scripts -------------------------------------------------------

namespace {

double parse_double(const std::string& token, std::size_t line, const char* what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(value)) {
    throw ParseError(line, std::string("invalid ") + what + " '" + token + "'");
  }
  return value;
}

}  // namespace

Script parse_script(std::istream& in) {
  Script script;
  std::string raw;
  std::size_t line = 0;
  double last_time = -std::numeric_limits<double>::infinity();
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    if (tok[0] == "entity") {
      if (tok.size() < 4) throw ParseError(line, "entity needs <id> <x> <y>");
      Entity e = Entity::at(tok[1], {parse_double(tok[2], line, "x"),
                                     parse_double(tok[3], line, "y"), 0.0});
      for (std::size_t i = 4; i < tok.size(); ++i) {
        const auto need = [&](std::size_t n) {
          if (i + n >= tok.size()) throw ParseError(line, "'" + tok[i] + "' needs a value");
        };
        if (tok[i] == "reported") {
          need(2);
          e.reported_position = {parse_double(tok[i + 1], line, "rx"),
                                 parse_double(tok[i + 2], line, "ry"), 0.0};
          i += 2;
        } else if (tok[i] == "tk") {
          need(1);
          e.key_valid_for = parse_double(tok[++i], line, "tk");
          if (!(e.key_valid_for > 0.0)) throw ParseError(line, "tk must be positive");
        } else if (tok[i] == "from") {
          need(1);
          e.key_valid_from = parse_double(tok[++i], line, "from");
        } else if (tok[i] == "leaked") {
          e.te_intact = false;
        } else if (tok[i] == "malicious") {
          e.role_honest = false;
        } else {
          throw ParseError(line, "unknown entity attribute '" + tok[i] + "'");
        }
      }
      if (!script.entities.emplace(e.id, e).second) {
        throw ParseError(line, "entity '" + e.id + "' declared twice");
      }
      continue;
    }

    if (tok.size() < 4 || tok.size() > 5) {
      throw ParseError(line, "expected <time_s> <verifier> <prover> <adversary_kind> [proxy]");
    }
    ScriptExchange ex;
    ex.line = line;
    ex.time = parse_double(tok[0], line, "time");
    if (ex.time < last_time) throw ParseError(line, "exchange times must be non-decreasing");
    last_time = ex.time;
    ex.verifier = tok[1];
    ex.prover = tok[2];
    try {
      ex.kind = parse_adversary_kind(tok[3]);
    } catch (const InvalidParam&) {
      throw ParseError(line, "unknown adversary kind '" + tok[3] + "'");
    }
    if (tok.size() == 5) ex.proxy = tok[4];
    for (const auto* id : {&ex.verifier, &ex.prover}) {
      if (!script.entities.contains(*id)) throw ParseError(line, "undeclared entity '" + *id + "'");
    }
    if (ex.verifier == ex.prover) throw ParseError(line, "verifier and prover must differ");
    if (needs_proxy(ex.kind) && !ex.proxy) {
      throw ParseError(line, to_string(ex.kind) + " needs a proxy entity");
    }
    if (ex.proxy && !script.entities.contains(*ex.proxy)) {
      throw ParseError(line, "undeclared entity '" + *ex.proxy + "'");
    }
    script.exchanges.push_back(std::move(ex));
  }
  return script;
}

std::string to_string(ExchangeStatus status) {
  switch (status) {
    case ExchangeStatus::Accepted:
      return "accepted";
    case ExchangeStatus::Duplicate:
      return "duplicate";
    case ExchangeStatus::MtacFailed:
      return "mtac-failed";
    case ExchangeStatus::DataFailed:
      return "data-failed";
  }
  return "accepted";
}

ScriptReport run_script(const Script& script, const ChannelModel& chan,
                        const AdversaryModel& base, const RandomSource& src) {
  std::map<std::string, Entity> entities = script.entities;
  KeyDirectory dir;
  for (const auto& [id, e] : entities) dir.issue(e);
  const auto refresh = [&](const std::string& id, double now) -> const Entity& {
    Entity& e = entities.at(id);
    if (now >= e.key_valid_from && dir.rotate(id, now)) e.key_valid_from = dir.key(id).valid_from;
    return e;
  };

  ScriptReport report;
  for (std::size_t i = 0; i < script.exchanges.size(); ++i) {
    const ScriptExchange& ex = script.exchanges[i];
    const Entity& a = refresh(ex.verifier, ex.time);
    const Entity& b = refresh(ex.prover, ex.time);
    AdversaryModel adv = base;
    adv.kind = ex.kind;
    adv.proxy.reset();
    if (ex.proxy) adv.proxy = refresh(*ex.proxy, ex.time);

    RandomSource rng = src.derive(i);
    const RangingSession session = run_exchange(a, b, chan, adv, rng, ex.time);
    ExchangeReport row;
    row.exchange = ex;
    row.true_distance_m = distance(a.true_position, b.true_position);
    row.measured_m = session.verifier_distance();
    row.shortening_m = session.shortening_m();
    row.enlargement_flag = session.enlargement_flag;

    const std::size_t discards_before = dir.discarded().size();
    if (!mtac_check(session, chan, rng)) {
      row.status = ExchangeStatus::MtacFailed;
    } else if (!data_validate(session, dir, ex.time)) {
      row.status = dir.discarded().size() > discards_before ? ExchangeStatus::Duplicate
                                                            : ExchangeStatus::DataFailed;
    } else {
      row.status = ExchangeStatus::Accepted;
      row.v = distance_validate(session, session.verifier_reported, session.prover_reported, chan).v;
    }
    report.exchanges.push_back(std::move(row));
  }
  report.discarded = dir.discarded();
  return report;
}

void write_report_csv(std::ostream& out, const ScriptReport& report) {
  out << "time_s,verifier,prover,adversary,true_m,measured_m,shortening_m,status,v\n";
  for (const auto& row : report.exchanges) {
    out << format_number(row.exchange.time) << ',' << row.exchange.verifier << ','
        << row.exchange.prover << ',' << to_string(row.exchange.kind) << ','
        << format_number(row.true_distance_m) << ',' << format_number(row.measured_m) << ','
        << format_number(row.shortening_m) << ',' << to_string(row.status) << ',';
    if (row.status == ExchangeStatus::Accepted) {
      out << static_cast<int>(row.v);
    } else {
      out << "NA";
    }
    out << '\n';
  }
}

}  // namespace lerkit::verify
