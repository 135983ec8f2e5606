#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lerkit/model.hpp"
#include "lerkit/random.hpp"

namespace lerkit::verify {

/// One bit per element (0 or 1).
using Bits = std::vector<std::uint8_t>;

inline constexpr std::size_t kMessageBits = 128;

/// A road user, RSU or base station taking part in ranging.
struct Entity {
  std::string id;
  double key_valid_from = 0.0;
  /// T_k: lifetime of the (ID, key) pair, seconds.
  double key_valid_for = 600.0;
  Coordinates true_position;
  /// What the entity's GNSS receiver reports; differs from true_position under spoofing.
  Coordinates reported_position;
  bool role_honest = true;
  /// False when the trusted environment leaked its key to colluders.
  bool te_intact = true;

  /// Honest entity placed at `position` with an unspoofed receiver.
  static Entity at(std::string id, Coordinates position);
  bool key_live(double now) const noexcept;
};

enum class AdversaryKind { None, MafiaFraud, DistanceFraud, TerroristFraud, DistanceHijacking };

std::string to_string(AdversaryKind kind);
/// Accepts "none", "mafia", "distance", "terrorist", "hijacking" and the full enum names.
AdversaryKind parse_adversary_kind(const std::string& text);

struct AdversaryModel {
  AdversaryKind kind = AdversaryKind::None;
  double mafia_success_prob = 1e-4;
  /// How far a successful mafia-fraud attacker moves the measured distance (positive shortens).
  double mafia_shift_m = 100.0;
  std::size_t subcarriers = 4096;
  double subcarrier_spacing_hz = 480e3;
  /// Processing-time skew the prover's clock can introduce, seconds.
  double clock_skew_theta_s = 300e-9;
  /// Upper bound on distance-fraud shortening, meters.
  double max_shortening_m = 200.0;
  /// Shortening the fraudulent prover attempts; clamped to the cap and to the true distance.
  double requested_shortening_m = std::numeric_limits<double>::infinity();
  /// Distance-fraud enlargement; not bounded, but flagged on the session.
  double enlargement_m = 0.0;
  /// Entity that actually answers for terrorist fraud (the local colluder)
  /// and distance hijacking (the exploited honest prover).
  std::optional<Entity> proxy;

  double symbol_duration_s() const noexcept { return 1.0 / subcarrier_spacing_hz; }
  /// 3/4 of a symbol duration converted to meters.
  double symbol_shortening_bound_m() const noexcept;
  /// Same model with the cap set to symbol_shortening_bound_m().
  AdversaryModel with_symbol_bound_cap() const;
};

void validate_adversary(const AdversaryModel& adv);

struct ChannelModel {
  std::size_t code_bits = kMessageBits;
  double bit_error_rate = 0.0;
  std::size_t max_bit_errors_accepted = 4;
  /// Allowed distance-validation slack, meters.
  double delta_m = 3.0;
};

void validate_channel(const ChannelModel& chan);

/// One two-way ranging between verifier A and prover B. Timestamps are on
/// A's session clock (T1 = 0) and quantized so sums of them are exact.
struct RangingSession {
  std::string verifier_id;
  std::string prover_id;
  /// Entity whose trusted environment produced the response.
  std::string responder_id;
  double at_time = 0.0;
  /// T1..T6.
  std::array<double, 6> t{};
  double processing_time = 1e-6;
  Bits m1, m2, m3;
  /// MTAC codes transmitted with m1..m3.
  Bits c1, c2, c3;
  /// sign(r1) as embedded by the responder; m1 xor m2 must give it back.
  Bits response_signature;
  Coordinates verifier_reported;
  Coordinates prover_reported;
  AdversaryKind adversary = AdversaryKind::None;
  /// The physical-layer integrity check caught tampering.
  bool integrity_flag = false;
  bool mafia_success = false;
  bool enlargement_flag = false;
  double true_distance_m = 0.0;

  /// (T4 - T1 - Tp) / 2 * c.
  double verifier_distance() const noexcept;
  /// (T6 - T3 - Tp) / 2 * c.
  double prover_distance() const noexcept;
  /// true distance minus the verifier's measurement; negative means enlargement.
  double shortening_m() const noexcept { return true_distance_m - verifier_distance(); }
};

/// Bitwise XOR; throws LengthMismatch.
Bits recover_signature(const Bits& m1, const Bits& m2);

/// MAC-like token an entity's trusted environment attaches to `message`.
/// Keys are bound to (id, key_valid_from).
Bits sign(const std::string& id, double key_valid_from, const Bits& message,
          const std::string& verifier_id, const std::string& prover_id,
          const Coordinates& position);

/// Executes the three-message exchange. Throws KeyExpired when either key
/// window does not cover `now`.
RangingSession run_exchange(const Entity& verifier, const Entity& prover, const ChannelModel& chan,
                            const AdversaryModel& adv, RandomSource& src, double now = 0.0);

/// Bit errors ~ Binomial(code_bits, ber); accepts when they stay within
/// the limit and no integrity flag was raised.
bool mtac_check(const RangingSession& session, const ChannelModel& chan, RandomSource& src);

/// Live key records plus the per-observer first-contact log.
class KeyDirectory {
 public:
  struct Key {
    double valid_from = 0.0;
    double valid_for = 0.0;
    std::uint64_t generation = 0;
  };
  struct Discard {
    std::string observer;
    std::string peer;
    double at_time;
  };

  /// Registers or replaces the key of `entity.id`.
  void issue(const Entity& entity);
  /// Replaces the key of `id` with the epoch that contains `now`.
  /// Returns true when the key changed.
  bool rotate(const std::string& id, double now);

  bool contains(const std::string& id) const { return keys_.contains(id); }
  /// Throws UnknownId.
  const Key& key(const std::string& id) const;
  bool live(const std::string& id, double now) const;

  /// True the first time `observer` counts `peer` under the peer's current key.
  bool first_contact(const std::string& observer, const std::string& peer, double now);
  const std::vector<Discard>& discarded() const noexcept { return discarded_; }

 private:
  std::map<std::string, Key> keys_;
  std::set<std::tuple<std::string, std::string, std::uint64_t>> contacts_;
  std::vector<Discard> discarded_;
  std::uint64_t next_generation_ = 1;
};

/// Signature, key-window and first-contact checks. A repeat peer within
/// T_k returns false and lands in dir.discarded(). Throws UnknownId.
bool data_validate(const RangingSession& session, KeyDirectory& dir, double now);

/// v = 0 iff |measured - |reportedA - reportedB|| <= delta.
VerificationOutcome distance_validate(const RangingSession& session,
                                      const Coordinates& reported_a,
                                      const Coordinates& reported_b, const ChannelModel& chan);

// --- scenario scripts -------------------------------------------------------

struct ScriptExchange {
  double time = 0.0;
  std::string verifier;
  std::string prover;
  AdversaryKind kind = AdversaryKind::None;
  std::optional<std::string> proxy;
  std::size_t line = 0;
};

struct Script {
  std::map<std::string, Entity> entities;
  std::vector<ScriptExchange> exchanges;
};

/// Line format:
///   entity <id> <x> <y> [reported <rx> <ry>] [tk <s>] [from <s>] [leaked] [malicious]
///   <time_s> <verifier> <prover> <adversary_kind> [<proxy_id>]
/// `#` starts a comment. Throws ParseError.
Script parse_script(std::istream& in);

enum class ExchangeStatus { Accepted, Duplicate, MtacFailed, DataFailed };
std::string to_string(ExchangeStatus status);

struct ExchangeReport {
  ScriptExchange exchange;
  ExchangeStatus status = ExchangeStatus::Accepted;
  double true_distance_m = 0.0;
  double measured_m = 0.0;
  double shortening_m = 0.0;
  bool enlargement_flag = false;
  /// Only meaningful when status is Accepted.
  std::uint8_t v = 0;
};

struct ScriptReport {
  std::vector<ExchangeReport> exchanges;
  std::vector<KeyDirectory::Discard> discarded;
};

/// Runs every exchange in order. Keys that lapsed are rotated to the
/// epoch containing the exchange time before ranging. Exchange i draws
/// from src.derive(i).
ScriptReport run_script(const Script& script, const ChannelModel& chan,
                        const AdversaryModel& base, const RandomSource& src);

/// CSV `time_s,verifier,prover,adversary,true_m,measured_m,shortening_m,status,v`.
void write_report_csv(std::ostream& out, const ScriptReport& report);

}  // namespace lerkit::verify
