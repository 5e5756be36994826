#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infoshare/rng.hpp"

// Core rules of the two-player information-sharing stage game.
//
// A round is played against a four-row database mapping each binary cue
// profile (x1, x2) to a binary target y. Players hold partial endowments of
// true database rows, may pass rows (truthful or not) to each other at a
// per-row cost, and are paid for submitting an accurate view of the full
// database. All money is integer cents.

namespace infoshare {

using Cents = int;

struct CueProfile {
    bool x1 = false;
    bool x2 = false;

    constexpr int index() const { return (x1 ? 2 : 0) + (x2 ? 1 : 0); }
    static constexpr CueProfile from_index(int i) {
        return CueProfile{(i & 2) != 0, (i & 1) != 0};
    }
    friend constexpr bool operator==(CueProfile, CueProfile) = default;
};

inline constexpr int kNumCueProfiles = 4;

constexpr std::array<CueProfile, kNumCueProfiles> all_cue_profiles() {
    return {CueProfile::from_index(0), CueProfile::from_index(1),
            CueProfile::from_index(2), CueProfile::from_index(3)};
}

// One database row: a cue profile plus the target it maps to. A row passed
// between players is also represented this way; nothing marks it as true.
struct DatabaseEntry {
    CueProfile cue;
    bool target = false;
    friend constexpr bool operator==(DatabaseEntry, DatabaseEntry) = default;
};

// Ground truth for a round: one target bit per cue profile.
class CompleteDatabase {
public:
    CompleteDatabase() = default;
    explicit CompleteDatabase(std::array<bool, kNumCueProfiles> targets)
        : targets_(targets) {}

    bool target_of(CueProfile cue) const { return targets_[cue.index()]; }
    DatabaseEntry entry_of(CueProfile cue) const { return {cue, target_of(cue)}; }
    std::array<bool, kNumCueProfiles> targets() const { return targets_; }
    std::vector<DatabaseEntry> entries() const;

    friend bool operator==(const CompleteDatabase&, const CompleteDatabase&) = default;

private:
    std::array<bool, kNumCueProfiles> targets_{};
};

// Builds a database from an explicit list of rows. Every cue profile must
// appear exactly once; throws std::invalid_argument otherwise.
CompleteDatabase build_database(std::span<const DatabaseEntry> entries);

// Draws each target independently and uniformly.
CompleteDatabase random_database(Rng& rng);

enum class EndowmentMode {
    partition,        // the four rows are split evenly between the players
    with_replacement, // each player draws four rows iid with replacement
};

// The true rows a player starts the round with. Entries may repeat in
// with_replacement mode; unique_count() is the number of distinct rows.
struct Endowment {
    std::vector<DatabaseEntry> entries;
    EndowmentMode mode = EndowmentMode::partition;

    int size() const { return static_cast<int>(entries.size()); }
    int unique_count() const;
    bool contains(const DatabaseEntry& e) const;
    bool covers(CueProfile cue) const;
    // Target this endowment records for `cue`; only meaningful when covers(cue).
    bool target_for(CueProfile cue) const;
};

// Draws both players' endowments. partition: a uniformly random 2/2 split of
// the four rows. with_replacement: four iid row draws per player.
std::pair<Endowment, Endowment> draw_endowments(const CompleteDatabase& db,
                                                EndowmentMode mode, Rng& rng);

enum class IncentiveKind {
    cooperative, // both players paid if either view is accurate
    tournament,  // first/unique accurate view wins; tie splits by coin flip
};

// Parameters of one treatment cell. Defaults are the experiment's values.
struct TreatmentSpec {
    char id = 'A';
    IncentiveKind incentive = IncentiveKind::cooperative;
    EndowmentMode endowment_mode = EndowmentMode::partition;
    Cents coop_bonus = 1200;
    Cents tournament_bonus = 2400;
    Cents share_cost = 100;
    int rounds = 16;

    int endowment_size() const {
        return endowment_mode == EndowmentMode::partition ? 2 : 4;
    }
    int max_shared() const { return endowment_size(); }

    // A: cooperative/partition,      B: tournament/partition,
    // C: cooperative/with_replacement, D: tournament/with_replacement.
    static TreatmentSpec for_id(char id);
};

// Rows a player chooses to pass to the partner this round.
struct ShareDecision {
    std::vector<DatabaseEntry> shared;
    int count() const { return static_cast<int>(shared.size()); }
};

// A player's end-of-round claim about the full database.
struct AccuracySubmission {
    std::array<bool, kNumCueProfiles> guesses{};

    bool guess_for(CueProfile cue) const { return guesses[cue.index()]; }
    void set_guess(CueProfile cue, bool y) { guesses[cue.index()] = y; }
    friend bool operator==(const AccuracySubmission&, const AccuracySubmission&) = default;
};

// True iff at least one shared row is not a member of the sharer's endowment.
// Membership is by value, so a row that happens to be true still counts as
// falsified when the sharer does not hold it.
bool detect_falsification(const Endowment& endowment, const ShareDecision& decision);

// True iff the submission reproduces the database exactly.
bool evaluate_submission(const AccuracySubmission& submission,
                         const CompleteDatabase& db);

// Behavioral distrust: the submission contradicts the target of at least one
// received row. Receiving nothing can never register as distrust.
bool detect_behavioral_distrust(std::span<const DatabaseEntry> received,
                                const AccuracySubmission& submission);

enum class TieBreak {
    random,     // tournament tie resolved by fair coin
    player_one, // deterministic alternative for sensitivity runs
};

struct Settlement {
    Cents bonus = 0;
    Cents cost = 0;
    Cents net = 0;
};

// Pays bonuses per the treatment's incentive and charges sharing costs.
// Cooperative: both receive coop_bonus if either is accurate. Tournament:
// a unique accurate player takes tournament_bonus; a tie is settled whole,
// one player taking the full bonus.
std::array<Settlement, 2> settle_round(const TreatmentSpec& treatment,
                                       std::array<int, 2> shared_counts,
                                       std::array<bool, 2> accurate, Rng& rng,
                                       TieBreak tie = TieBreak::random);

// Falsified rows passed to the partner: flipped copies of held rows
// ("deceptive") or uniform draws from the rows the sharer does not hold
// ("fabricate"). Fabricated rows can be accidentally true.
enum class FalsifyConvention { deceptive, fabricate };

// Behavioural conventions a whole run commits to.
struct Conventions {
    FalsifyConvention falsify = FalsifyConvention::deceptive;
    TieBreak tie_break = TieBreak::random;
};

// One player's row in the session log, also the CSV row schema.
struct RoundRecord {
    std::string session_id;
    std::string sequence;
    char treatment = 'A';
    int pair_id = 0;
    int round = 1; // 1-based within the treatment
    int player_id = 0;
    int endowment_size = 0;
    int unique_count = 0;
    int shared_count = 0;
    bool falsified = false;
    bool distrust_observed = false;
    bool accuracy = false;
    Cents bonus = 0;
    Cents cost = 0;
    Cents net = 0;

    friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

std::string to_string(EndowmentMode mode);
std::string to_string(IncentiveKind kind);
std::string to_string(FalsifyConvention convention);

} // namespace infoshare
