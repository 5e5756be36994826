#include "infoshare/equilibrium.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace infoshare::equilibrium {

std::array<StageStrategy, kNumStrategies> enumerate_strategies() {
    std::array<StageStrategy, kNumStrategies> out;
    int i = 0;
    for (ShareAction a : {ShareAction::S0, ShareAction::S1, ShareAction::S2,
                          ShareAction::F1, ShareAction::F2})
        for (Response r : {Response::trust, Response::distrust}) out[i++] = {a, r};
    return out;
}

int strategy_index(StageStrategy s) {
    return static_cast<int>(s.share) * 2 + (s.response == Response::distrust ? 1 : 0);
}

std::string to_string(StageStrategy s) {
    static const char* kShare[] = {"S0", "S1", "S2", "F1", "F2"};
    return std::string(kShare[static_cast<int>(s.share)]) +
           (s.response == Response::trust ? ":trust" : ":distrust");
}

namespace {

int shared_row_count(ShareAction a) {
    switch (a) {
        case ShareAction::S0: return 0;
        case ShareAction::S1:
        case ShareAction::F1: return 1;
        case ShareAction::S2:
        case ShareAction::F2: return 2;
    }
    return 0;
}

// Every content the sender might pass, uniformly likely within an action.
std::vector<std::vector<DatabaseEntry>> sent_variants(ShareAction action,
                                                      const Endowment& sender,
                                                      FalsifyConvention convention) {
    const DatabaseEntry& e0 = sender.entries[0];
    const DatabaseEntry& e1 = sender.entries[1];
    auto flip = [](DatabaseEntry e) { return DatabaseEntry{e.cue, !e.target}; };

    switch (action) {
        case ShareAction::S0: return {{}};
        case ShareAction::S1: return {{e0}, {e1}};
        case ShareAction::S2: return {{e0, e1}};
        case ShareAction::F1:
        case ShareAction::F2: break;
    }

    if (convention == FalsifyConvention::deceptive) {
        if (action == ShareAction::F1) return {{flip(e0)}, {flip(e1)}};
        return {{flip(e0), flip(e1)}};
    }
    std::vector<DatabaseEntry> pool;
    for (CueProfile cue : all_cue_profiles())
        for (bool y : {false, true}) {
            DatabaseEntry e{cue, y};
            if (!sender.contains(e)) pool.push_back(e);
        }
    std::vector<std::vector<DatabaseEntry>> out;
    if (action == ShareAction::F1) {
        for (const DatabaseEntry& e : pool) out.push_back({e});
    } else {
        for (std::size_t i = 0; i < pool.size(); ++i)
            for (std::size_t j = i + 1; j < pool.size(); ++j)
                out.push_back({pool[i], pool[j]});
    }
    return out;
}

// 16 x the receiver's accuracy probability, given what was actually trusted.
// Own rows are certain; a uniquely claimed unknown profile follows the claim;
// anything else is a fair coin.
int accuracy16(const CompleteDatabase& db, const Endowment& receiver,
               std::span<const DatabaseEntry> trusted) {
    int p16 = 16;
    for (CueProfile cue : all_cue_profiles()) {
        if (receiver.covers(cue)) continue;
        bool claim_true = false, claim_false = false;
        for (const DatabaseEntry& e : trusted)
            if (e.cue == cue) (e.target ? claim_true : claim_false) = true;
        if (claim_true != claim_false) {
            if (claim_true != db.target_of(cue)) return 0;
        } else {
            p16 /= 2;
        }
    }
    return p16;
}

struct AccuracyStats {
    Payoff p_row;    // E[row accurate]
    Payoff p_col;    // E[col accurate]
    Payoff p_joint;  // E[both accurate]
};

AccuracyStats accuracy_statistics(StageStrategy row, StageStrategy col,
                                  const TreatmentSpec& treatment,
                                  FalsifyConvention convention) {
    if (treatment.endowment_mode != EndowmentMode::partition)
        throw std::invalid_argument(
            "stage-game solver supports the partition treatments only");

    long long sum_row = 0, sum_col = 0, sum_joint = 0, leaves = 0;
    static const std::vector<DatabaseEntry> kNothing;

    for (int dbbits = 0; dbbits < 16; ++dbbits) {
        std::array<bool, 4> targets{};
        for (int i = 0; i < 4; ++i) targets[i] = ((dbbits >> i) & 1) != 0;
        CompleteDatabase db(targets);

        // Row player holds profiles {p, q}, column player the complement.
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) {
                Endowment erow, ecol;
                erow.mode = ecol.mode = EndowmentMode::partition;
                for (int i = 0; i < 4; ++i) {
                    DatabaseEntry e = db.entry_of(CueProfile::from_index(i));
                    (i == p || i == q ? erow : ecol).entries.push_back(e);
                }

                auto row_sent = sent_variants(row.share, erow, convention);
                auto col_sent = sent_variants(col.share, ecol, convention);
                for (const auto& rc : row_sent)
                    for (const auto& cc : col_sent) {
                        int pr = accuracy16(
                            db, erow, row.response == Response::trust ? cc : kNothing);
                        int pc = accuracy16(
                            db, ecol, col.response == Response::trust ? rc : kNothing);
                        sum_row += pr;
                        sum_col += pc;
                        sum_joint += static_cast<long long>(pr) * pc;
                        ++leaves;
                    }
            }
    }
    return {Payoff(sum_row, 16 * leaves), Payoff(sum_col, 16 * leaves),
            Payoff(sum_joint, 256 * leaves)};
}

} // namespace

std::pair<Payoff, Payoff> accuracy_probabilities(StageStrategy row, StageStrategy col,
                                                 const TreatmentSpec& treatment,
                                                 FalsifyConvention convention) {
    AccuracyStats st = accuracy_statistics(row, col, treatment, convention);
    return {st.p_row, st.p_col};
}

Cell expected_payoffs(StageStrategy row, StageStrategy col,
                      const TreatmentSpec& treatment, FalsifyConvention convention) {
    AccuracyStats st = accuracy_statistics(row, col, treatment, convention);
    Payoff cost_row = Payoff(treatment.share_cost) * shared_row_count(row.share);
    Payoff cost_col = Payoff(treatment.share_cost) * shared_row_count(col.share);

    if (treatment.incentive == IncentiveKind::cooperative) {
        Payoff either = st.p_row + st.p_col - st.p_joint;
        Payoff bonus = Payoff(treatment.coop_bonus) * either;
        return {bonus - cost_row, bonus - cost_col};
    }
    // Tournament: sole accurate player wins; a tie is a fair coin.
    Payoff half(1, 2);
    Payoff u_row = Payoff(treatment.tournament_bonus) * (st.p_row - half * st.p_joint);
    Payoff u_col = Payoff(treatment.tournament_bonus) * (st.p_col - half * st.p_joint);
    return {u_row - cost_row, u_col - cost_col};
}

Bimatrix build_bimatrix(const TreatmentSpec& treatment, FalsifyConvention convention) {
    Bimatrix m;
    m.treatment = treatment;
    m.convention = convention;
    m.grid.rows = m.grid.cols = kNumStrategies;
    m.grid.cells.resize(kNumStrategies * kNumStrategies);

    auto strategies = enumerate_strategies();
    for (int i = 0; i < kNumStrategies; ++i)
        for (int j = i; j < kNumStrategies; ++j) {
            Cell cell = expected_payoffs(strategies[i], strategies[j], treatment, convention);
            m.grid.at(i, j) = cell;
            m.grid.at(j, i) = {cell.second, cell.first}; // the game is symmetric
        }
    return m;
}

std::vector<std::pair<int, int>> find_pure_nash(const PayoffGrid& grid) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) {
            bool stable = true;
            for (int k = 0; k < grid.rows && stable; ++k)
                if (grid.at(k, j).first > grid.at(i, j).first) stable = false;
            for (int k = 0; k < grid.cols && stable; ++k)
                if (grid.at(i, k).second > grid.at(i, j).second) stable = false;
            if (stable) out.emplace_back(i, j);
        }
    return out;
}

std::vector<std::pair<int, int>> pareto_frontier(const PayoffGrid& grid) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) {
            const Cell& cell = grid.at(i, j);
            bool dominated = false;
            for (int a = 0; a < grid.rows && !dominated; ++a)
                for (int b = 0; b < grid.cols && !dominated; ++b) {
                    const Cell& other = grid.at(a, b);
                    if (other.first >= cell.first && other.second >= cell.second &&
                        (other.first > cell.first || other.second > cell.second))
                        dominated = true;
                }
            if (!dominated) out.emplace_back(i, j);
        }
    return out;
}

EquilibriumReport analyze(const Bimatrix& matrix) {
    EquilibriumReport report;
    report.pure_nash = find_pure_nash(matrix.grid);
    report.pareto_optimal = pareto_frontier(matrix.grid);

    auto strategies = enumerate_strategies();
    for (int j = 0; j < kNumStrategies; ++j) {
        Payoff best = matrix.grid.at(0, j).first;
        for (int i = 1; i < kNumStrategies; ++i)
            best = std::max(best, matrix.grid.at(i, j).first);
        for (int i = 0; i < kNumStrategies; ++i)
            if (matrix.grid.at(i, j).first == best) report.best_responses[j].push_back(i);
    }

    for (int j = 0; j < kNumStrategies; ++j) {
        if (report.best_responses[j].size() != 1) continue;
        int i = report.best_responses[j].front();
        bool falsifies = strategies[i].share == ShareAction::F1 ||
                         strategies[i].share == ShareAction::F2;
        if (falsifies) {
            report.falsify_strict_best_response = true;
            report.falsify_witnesses.emplace_back(i, j);
        }
    }
    return report;
}

std::string payoff_to_string(const Payoff& p) {
    if (p.denominator() == 1) return std::to_string(p.numerator());
    return std::to_string(p.numerator()) + "/" + std::to_string(p.denominator());
}

std::string report_json(const Bimatrix& matrix, const EquilibriumReport& report) {
    using json = nlohmann::ordered_json;
    auto strategies = enumerate_strategies();
    auto name = [&](int i) { return to_string(strategies[i]); };
    auto profile = [&](std::pair<int, int> p) {
        return json::array({name(p.first), name(p.second)});
    };

    json j;
    j["treatment"] = std::string(1, matrix.treatment.id);
    j["incentive"] = infoshare::to_string(matrix.treatment.incentive);
    j["convention"] = infoshare::to_string(matrix.convention);
    j["strategies"] = json::array();
    for (int i = 0; i < kNumStrategies; ++i) j["strategies"].push_back(name(i));

    json cells = json::array();
    for (int i = 0; i < kNumStrategies; ++i) {
        json row = json::array();
        for (int k = 0; k < kNumStrategies; ++k) {
            const Cell& cell = matrix.grid.at(i, k);
            row.push_back(json::array(
                {payoff_to_string(cell.first), payoff_to_string(cell.second)}));
        }
        cells.push_back(row);
    }
    j["payoffs_cents"] = cells;

    j["pure_nash"] = json::array();
    for (auto p : report.pure_nash) j["pure_nash"].push_back(profile(p));
    j["pareto_optimal"] = json::array();
    for (auto p : report.pareto_optimal) j["pareto_optimal"].push_back(profile(p));

    json best = json::object();
    for (int k = 0; k < kNumStrategies; ++k) {
        json replies = json::array();
        for (int i : report.best_responses[k]) replies.push_back(name(i));
        best[name(k)] = replies;
    }
    j["best_responses_to_column"] = best;

    json falsify;
    falsify["strict_best_response_exists"] = report.falsify_strict_best_response;
    falsify["witnesses"] = json::array();
    for (auto p : report.falsify_witnesses) falsify["witnesses"].push_back(profile(p));
    j["falsification"] = falsify;

    return j.dump(2) + "\n";
}

} // namespace infoshare::equilibrium
