#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "infoshare/agents.hpp"
#include "infoshare/game.hpp"

// Session runner: pairs participants, plays the four treatments in sequence,
// and emits a flat per-player-per-round log. Every random draw comes from a
// stream derived from (seed, treatment, pair, role), so logs are reproducible
// byte for byte regardless of evaluation order or thread count.

namespace infoshare::session {

// How one participant behaves. `calibrated` resolves to the treatment's
// default conditional coefficients (with optional per-treatment overrides);
// the other kinds use one fixed policy in every treatment.
struct AgentSpec {
    enum class Kind { calibrated, static_nash, uniform_random, conditional };
    Kind kind = Kind::calibrated;
    int share_n = 0;   // static_nash
    bool trust = true; // static_nash
    agents::ReactionCoefficients coeffs; // conditional
    std::map<char, agents::ReactionCoefficients> overrides; // calibrated

    agents::AgentPolicy policy_for(const TreatmentSpec& treatment) const;
};

enum class Sequence { ABCD, BADC };
std::string to_string(Sequence s);
Sequence sequence_from_string(const std::string& s); // throws on anything else
std::array<TreatmentSpec, 4> treatments_for(Sequence s);

struct SessionConfig {
    std::uint64_t seed = 0;
    int participants = 2; // even, >= 2
    Sequence sequence = Sequence::ABCD;
    std::vector<AgentSpec> roster; // one entry, or one per participant
    Conventions conventions;
    bool carryover_lags = false; // seed each treatment from the previous one's last round
    std::string session_id;      // defaults to "s<seed>"
    int threads = 1;
    bool eval_player2_first = false; // decision-order probe; must not affect the log
    std::map<char, agents::LaggedState> initial_lag_overrides;

    std::string effective_session_id() const {
        return session_id.empty() ? "s" + std::to_string(seed) : session_id;
    }
    AgentSpec roster_entry(int participant) const;
    void validate() const; // throws std::invalid_argument with the offending field
};

// One treatment's pairing, as (low id, high id) pairs sorted by low id.
struct Pairing {
    std::vector<std::pair<int, int>> pairs;
    friend bool operator==(const Pairing&, const Pairing&) = default;
};

// Uniform random perfect matching of participants 0..n-1. When `previous`
// is given and n >= 4, matchings repeating any previous pair are rejected
// and redrawn; with n == 2 the repeat is unavoidable and a warning is
// written to stderr.
Pairing make_pairs(int participants, Rng& rng, const Pairing* previous = nullptr);

// A player's standing state while a treatment runs.
struct PlayerContext {
    int participant = 0;
    agents::AgentPolicy policy;
    agents::LaggedState state;
    Rng rng;
};

// Plays one simultaneous round for a pair and updates both lag states.
// env_rng drives the database draw, endowments and settlement; each player's
// decisions consume only that player's stream. Pair/session metadata in the
// returned records is filled in by the caller.
std::array<RoundRecord, 2> run_round(PlayerContext& p1, PlayerContext& p2,
                                     const TreatmentSpec& treatment,
                                     const Conventions& conventions, Rng& env_rng,
                                     bool eval_player2_first = false);

struct SessionLog {
    std::string session_id;
    Sequence sequence = Sequence::ABCD;
    std::vector<RoundRecord> records;
    std::vector<Pairing> pairings; // one per treatment, sequence order
    int paid_round = 1;            // uniform over 1..64, reporting only
};

SessionLog run_session(const SessionConfig& config);

// CSV interface. Fixed header, one row per player per round, flags as 0/1.
inline constexpr const char* kLogHeader =
    "session_id,sequence,treatment,pair_id,round,player_id,endowment_size,"
    "unique_count,shared_count,falsified,distrust_observed,accuracy,"
    "bonus_cents,cost_cents,net_cents";

std::string render_log_csv(const SessionLog& log);
void export_log(const SessionLog& log, const std::filesystem::path& path);

// Parses a log CSV (possibly several sessions concatenated). Throws
// std::invalid_argument naming the offending column or row on any mismatch.
std::vector<RoundRecord> import_records(const std::filesystem::path& path);
std::vector<RoundRecord> parse_records_csv(const std::string& text);

} // namespace infoshare::session
