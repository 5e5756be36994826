#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "infoshare/game.hpp"

// Stage-game solver for the partition treatments.
//
// The tractable strategy space per player: share 0, 1 or 2 truthful rows,
// or falsify 1 or 2 rows, crossed with trusting or distrusting whatever the
// partner sends. Payoffs are exact expected cents, enumerated over every
// source of randomness (database draw, endowment split, falsified-row draw,
// guessing, tie-break).

namespace infoshare::equilibrium {

enum class ShareAction { S0, S1, S2, F1, F2 };
enum class Response { trust, distrust };

struct StageStrategy {
    ShareAction share = ShareAction::S0;
    Response response = Response::trust;
    friend bool operator==(StageStrategy, StageStrategy) = default;
};

inline constexpr int kNumStrategies = 10;

// Fixed order: S0,S1,S2,F1,F2, each trust before distrust.
std::array<StageStrategy, kNumStrategies> enumerate_strategies();
int strategy_index(StageStrategy s);
std::string to_string(StageStrategy s);

// Exact expected payoff in cents.
using Payoff = boost::rational<long long>;
using Cell = std::pair<Payoff, Payoff>; // (row player, column player)

// A general bimatrix: rows index the row player's strategies.
struct PayoffGrid {
    int rows = 0;
    int cols = 0;
    std::vector<Cell> cells;

    const Cell& at(int r, int c) const { return cells[r * cols + c]; }
    Cell& at(int r, int c) { return cells[r * cols + c]; }
};

struct Bimatrix {
    TreatmentSpec treatment;
    FalsifyConvention convention = FalsifyConvention::deceptive;
    PayoffGrid grid; // kNumStrategies x kNumStrategies
};

// Exact accuracy probabilities (row, column) for a strategy pair, and the
// full expected-payoff cell. Only partition treatments are supported;
// with_replacement treatments throw std::invalid_argument.
std::pair<Payoff, Payoff> accuracy_probabilities(StageStrategy row, StageStrategy col,
                                                 const TreatmentSpec& treatment,
                                                 FalsifyConvention convention);
Cell expected_payoffs(StageStrategy row, StageStrategy col,
                      const TreatmentSpec& treatment, FalsifyConvention convention);

Bimatrix build_bimatrix(const TreatmentSpec& treatment, FalsifyConvention convention);

// All pure-strategy Nash equilibria (no strictly improving unilateral
// deviation), as (row index, column index) pairs in row-major order.
std::vector<std::pair<int, int>> find_pure_nash(const PayoffGrid& grid);

// Pareto-optimal profiles: no other profile weakly improves both payoffs
// with at least one strict improvement.
std::vector<std::pair<int, int>> pareto_frontier(const PayoffGrid& grid);

struct EquilibriumReport {
    std::vector<std::pair<int, int>> pure_nash;
    std::vector<std::pair<int, int>> pareto_optimal;
    // Best replies of the row player to each column strategy.
    std::array<std::vector<int>, kNumStrategies> best_responses;
    // Whether some falsifying strategy is the unique best reply to some
    // column strategy, with the witnesses (falsifier, opponent).
    bool falsify_strict_best_response = false;
    std::vector<std::pair<int, int>> falsify_witnesses;
};

EquilibriumReport analyze(const Bimatrix& matrix);

// Serialization used by the CLI and the golden-matrix regression files.
// Exact cents are rendered as reduced fraction strings ("525", "1050/7").
std::string payoff_to_string(const Payoff& p);
std::string report_json(const Bimatrix& matrix, const EquilibriumReport& report);

} // namespace infoshare::equilibrium
