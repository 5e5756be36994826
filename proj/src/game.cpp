#include "infoshare/game.hpp"

#include <algorithm>
#include <stdexcept>

namespace infoshare {

std::vector<DatabaseEntry> CompleteDatabase::entries() const {
    std::vector<DatabaseEntry> out;
    out.reserve(kNumCueProfiles);
    for (CueProfile cue : all_cue_profiles()) out.push_back(entry_of(cue));
    return out;
}

CompleteDatabase build_database(std::span<const DatabaseEntry> entries) {
    if (entries.size() != kNumCueProfiles)
        throw std::invalid_argument("build_database: need exactly 4 entries, got " +
                                    std::to_string(entries.size()));
    std::array<bool, kNumCueProfiles> targets{};
    std::array<bool, kNumCueProfiles> seen{};
    for (const DatabaseEntry& e : entries) {
        if (seen[e.cue.index()])
            throw std::invalid_argument("build_database: duplicate cue profile at index " +
                                        std::to_string(e.cue.index()));
        seen[e.cue.index()] = true;
        targets[e.cue.index()] = e.target;
    }
    return CompleteDatabase(targets);
}

CompleteDatabase random_database(Rng& rng) {
    std::uniform_int_distribution<int> bit(0, 1);
    std::array<bool, kNumCueProfiles> targets{};
    for (bool& t : targets) t = bit(rng) == 1;
    return CompleteDatabase(targets);
}

int Endowment::unique_count() const {
    int n = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        bool dup = false;
        for (std::size_t j = 0; j < i; ++j)
            if (entries[j] == entries[i]) dup = true;
        if (!dup) ++n;
    }
    return n;
}

bool Endowment::contains(const DatabaseEntry& e) const {
    return std::find(entries.begin(), entries.end(), e) != entries.end();
}

bool Endowment::covers(CueProfile cue) const {
    return std::any_of(entries.begin(), entries.end(),
                       [&](const DatabaseEntry& e) { return e.cue == cue; });
}

bool Endowment::target_for(CueProfile cue) const {
    for (const DatabaseEntry& e : entries)
        if (e.cue == cue) return e.target;
    throw std::invalid_argument("Endowment::target_for: cue not covered");
}

std::pair<Endowment, Endowment> draw_endowments(const CompleteDatabase& db,
                                                EndowmentMode mode, Rng& rng) {
    Endowment a, b;
    a.mode = b.mode = mode;
    if (mode == EndowmentMode::partition) {
        std::array<int, kNumCueProfiles> idx{0, 1, 2, 3};
        std::shuffle(idx.begin(), idx.end(), rng);
        a.entries = {db.entry_of(CueProfile::from_index(idx[0])),
                     db.entry_of(CueProfile::from_index(idx[1]))};
        b.entries = {db.entry_of(CueProfile::from_index(idx[2])),
                     db.entry_of(CueProfile::from_index(idx[3]))};
    } else {
        std::uniform_int_distribution<int> pick(0, kNumCueProfiles - 1);
        a.entries.reserve(4);
        b.entries.reserve(4);
        for (int i = 0; i < 4; ++i)
            a.entries.push_back(db.entry_of(CueProfile::from_index(pick(rng))));
        for (int i = 0; i < 4; ++i)
            b.entries.push_back(db.entry_of(CueProfile::from_index(pick(rng))));
    }
    return {std::move(a), std::move(b)};
}

TreatmentSpec TreatmentSpec::for_id(char id) {
    TreatmentSpec t;
    t.id = id;
    switch (id) {
        case 'A':
            t.incentive = IncentiveKind::cooperative;
            t.endowment_mode = EndowmentMode::partition;
            break;
        case 'B':
            t.incentive = IncentiveKind::tournament;
            t.endowment_mode = EndowmentMode::partition;
            break;
        case 'C':
            t.incentive = IncentiveKind::cooperative;
            t.endowment_mode = EndowmentMode::with_replacement;
            break;
        case 'D':
            t.incentive = IncentiveKind::tournament;
            t.endowment_mode = EndowmentMode::with_replacement;
            break;
        default:
            throw std::invalid_argument(std::string("unknown treatment id '") + id + "'");
    }
    return t;
}

bool detect_falsification(const Endowment& endowment, const ShareDecision& decision) {
    return std::any_of(decision.shared.begin(), decision.shared.end(),
                       [&](const DatabaseEntry& e) { return !endowment.contains(e); });
}

bool evaluate_submission(const AccuracySubmission& submission,
                         const CompleteDatabase& db) {
    return submission.guesses == db.targets();
}

bool detect_behavioral_distrust(std::span<const DatabaseEntry> received,
                                const AccuracySubmission& submission) {
    return std::any_of(received.begin(), received.end(), [&](const DatabaseEntry& e) {
        return submission.guess_for(e.cue) != e.target;
    });
}

std::array<Settlement, 2> settle_round(const TreatmentSpec& treatment,
                                       std::array<int, 2> shared_counts,
                                       std::array<bool, 2> accurate, Rng& rng,
                                       TieBreak tie) {
    for (int c : shared_counts)
        if (c < 0 || c > treatment.max_shared())
            throw std::invalid_argument("settle_round: shared count " + std::to_string(c) +
                                        " outside [0, " +
                                        std::to_string(treatment.max_shared()) + "]");

    std::array<Settlement, 2> out{};
    if (treatment.incentive == IncentiveKind::cooperative) {
        if (accurate[0] || accurate[1])
            for (Settlement& s : out) s.bonus = treatment.coop_bonus;
    } else {
        if (accurate[0] != accurate[1]) {
            out[accurate[0] ? 0 : 1].bonus = treatment.tournament_bonus;
        } else if (accurate[0] && accurate[1]) {
            int winner = 0;
            if (tie == TieBreak::random) {
                std::uniform_int_distribution<int> coin(0, 1);
                winner = coin(rng);
            }
            out[winner].bonus = treatment.tournament_bonus;
        }
    }
    for (int i = 0; i < 2; ++i) {
        out[i].cost = treatment.share_cost * shared_counts[i];
        out[i].net = out[i].bonus - out[i].cost;
    }
    return out;
}

std::string to_string(EndowmentMode mode) {
    return mode == EndowmentMode::partition ? "partition" : "with_replacement";
}

std::string to_string(IncentiveKind kind) {
    return kind == IncentiveKind::cooperative ? "cooperative" : "tournament";
}

std::string to_string(FalsifyConvention convention) {
    return convention == FalsifyConvention::deceptive ? "deceptive" : "fabricate";
}

} // namespace infoshare
