#pragma once

#include <map>
#include <span>
#include <variant>
#include <vector>

#include "infoshare/game.hpp"

// Round-to-round behaviour of simulated players.
//
// The workhorse is the conditional reaction-function agent: sharing responds
// linearly to both players' lagged play, with Gaussian noise on the latent
// count, a base-rate falsification hazard, and per-row probabilistic trust
// in received information. Static equilibrium players and a uniform-random
// baseline share the same interface.

namespace infoshare::agents {

// What a player saw at the end of the previous round. Lag counts are kept as
// doubles so calibration can seed them at non-integer stationary values.
struct LaggedState {
    double own_shared_lag = 0;
    bool own_falsified_lag = false;
    double other_shared_lag = 0;
    bool other_falsified_lag = false;
    bool own_accuracy_lag = false;
    bool other_accuracy_lag = false;
    double own_unique_lag = 0;
    double other_unique_lag = 0;
    bool first_round = true;
};

// One linear equation over the lagged state.
struct EquationWeights {
    double intercept = 0;
    double own_shared = 0;
    double own_falsified = 0;
    double other_shared = 0;
    double other_falsified = 0;
    double own_accuracy = 0;
    double other_accuracy = 0;
    double own_unique = 0;
    double other_unique = 0;
};

double linear_predictor(const EquationWeights& w, const LaggedState& s);

// How the latent share count becomes an integer. randomized keeps the
// conditional mean exactly linear and exists for sensitivity runs.
enum class Rounding { nearest, randomized };

struct ReactionCoefficients {
    EquationWeights share;   // latent shared-count equation
    EquationWeights falsify; // added to falsify_base on the probability scale
    double noise_scale = 0;  // sd of the Gaussian disturbance on the latent count
    double trust_prob = 1;   // per-row probability of taking received rows at face value
    double falsify_base = 0; // base falsification probability
    Rounding rounding = Rounding::nearest;
};

struct StaticNash {
    int share_n = 0;
    bool trust = true;
};

struct Conditional {
    ReactionCoefficients coeffs;
};

struct UniformRandom {};

using AgentPolicy = std::variant<StaticNash, Conditional, UniformRandom>;

// Chooses the rows to pass this round. Shared rows are a uniform subset of
// endowment slots; when the falsification hazard fires (and the count is at
// least one), the first shared slot carries the falsified row built per the
// convention. static_nash shares min(share_n, endowment size) truthful rows;
// uniform_random draws the count uniformly from [0, endowment size].
ShareDecision decide_share(const AgentPolicy& policy, const LaggedState& state,
                           const Endowment& endowment, FalsifyConvention convention,
                           Rng& rng);

// Per-row trust flags for the received rows. static_nash applies its trust
// flag to every row; conditional trusts each row independently with
// trust_prob; uniform_random flips a fair coin per row.
std::vector<bool> decide_trust(const AgentPolicy& policy,
                               std::span<const DatabaseEntry> received, Rng& rng);

// Fills the four-profile submission: own endowment first, then any uniquely
// claimed target among trusted received rows, then fair coin flips. A trusted
// row contradicting the endowment is ignored (the endowment wins); if
// trusted rows conflict with each other on a profile the claim is discarded
// and the profile is guessed. conflict_detected, when given, reports whether
// a trusted row contradicted the player's own endowment.
AccuracySubmission complete_submission(const Endowment& endowment,
                                       std::span<const DatabaseEntry> trusted_received,
                                       Rng& rng, bool* conflict_detected = nullptr);

// Solves the symmetric stationarity condition
//   m = intercept + (w_own + w_other) m + (w_own_acc + w_other_acc) a
// for the share-equation intercept and returns the adjusted coefficients.
// Throws std::invalid_argument when the slope sum makes the fixed point
// undefined (w_own + w_other within 1e-9 of 1).
ReactionCoefficients calibrate_intercepts(ReactionCoefficients coeffs,
                                          double target_share_mean,
                                          double target_accuracy_mean);

// Reference summary statistics the default roster is calibrated against.
struct CalibrationTargets {
    double mean_shared = 0;     // per-player mean rows shared per round
    double both_zero_rate = 0;  // share of pair-rounds where nobody shared
    double accuracy_rate = 0;   // per-player accuracy rate
};

CalibrationTargets calibration_targets(char treatment_id);

// The calibrated conditional parameter set for one treatment: published
// reaction slopes where available, intercept/noise/falsification/trust
// levels fitted by simulation against calibration_targets.
ReactionCoefficients default_coefficients(const TreatmentSpec& treatment);

// First-round lag seeds: the treatment's static prediction (cooperative
// seeds full sharing and accuracy, tournament seeds zero sharing), with
// unique-count lags at their expected draw values.
LaggedState default_initial_lags(const TreatmentSpec& treatment);

} // namespace infoshare::agents
