#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "infoshare/game.hpp"

// Panel construction and the estimators used on session logs: pooled OLS
// linear probability / count models with cluster-robust (CR1) standard
// errors, Wald equality tests across treatments, and the summary tables.

namespace infoshare::econ {

// Regressor labels as they appear in reports. "Constant" is implicit and
// always leads the design matrix.
inline const std::vector<std::string> kLagRegressors = {
    "Own_#Shared_Lag",      "Own_Falsified_Lag",   "Other's_#Shared_Lag",
    "Other's_Falsified_Lag", "Own_Accuracy_Lag",    "Other's_Accuracy_Lag",
    "Own_Unique_Lag",        "Other's_Unique_Lag"};

// Default specification: the six lag terms, plus the unique-count lags in
// the with_replacement treatments where endowments vary.
std::vector<std::string> default_regressors(char treatment_id);

enum class Outcome { shared, falsified, accuracy };
std::string to_string(Outcome o);

struct PanelDataset {
    char treatment = 'A';
    std::vector<std::string> regressor_names; // excludes the constant
    Eigen::MatrixXd X;                        // n x (1 + k), constant first
    Eigen::MatrixXd outcomes;                 // n x 3: shared, falsified, accuracy
    std::vector<int> cluster_ids;             // one pair = one cluster

    int n() const { return static_cast<int>(X.rows()); }
    int n_clusters() const;
    Eigen::VectorXd y(Outcome o) const { return outcomes.col(static_cast<int>(o)); }
};

// Builds the rounds-2..16 panel for one treatment from a session log (or
// several concatenated logs). Throws std::invalid_argument when the
// treatment is absent or pair-rounds are incomplete.
PanelDataset build_panel(std::span<const RoundRecord> records, char treatment_id);
PanelDataset build_panel(std::span<const RoundRecord> records, char treatment_id,
                         const std::vector<std::string>& regressors);

// Plain OLS coefficients. Throws std::invalid_argument naming the offending
// column when the design matrix is rank deficient.
Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// CR1 cluster-robust covariance:
//   (X'X)^-1 (sum_g X_g' e_g e_g' X_g) (X'X)^-1 * G/(G-1) * (n-1)/(n-k).
// With every observation its own cluster this is exactly HC1.
Eigen::MatrixXd cluster_robust_cov(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& residuals,
                                   std::span<const int> cluster_ids);

struct RegressionResult {
    std::vector<std::string> names; // "Constant" first
    Eigen::VectorXd coef;
    Eigen::MatrixXd vcov;
    int n = 0;
    int n_clusters = 0;

    Eigen::VectorXd se() const;
    int index_of(const std::string& name) const; // throws when unknown
};

RegressionResult fit_clustered(const PanelDataset& panel, Outcome outcome);

struct WaldResult {
    double statistic = 0;
    int df = 0;
    double p_value = 1;
};

// Equality of one coefficient (by index) or, with index -1, of the full
// coefficient vectors across two independently estimated equations.
WaldResult wald_equality(const Eigen::VectorXd& b1, const Eigen::MatrixXd& v1,
                         const Eigen::VectorXd& b2, const Eigen::MatrixXd& v2,
                         int index = -1);

struct TreatmentSummary {
    char treatment = 'A';
    int records = 0;
    double mean_shared = 0;
    double falsification_rate = 0;
    double accuracy_rate = 0;
    double both_zero_rate = 0; // pair-rounds where neither player shared
};

std::vector<TreatmentSummary> summarize_treatments(std::span<const RoundRecord> records);

struct OrderEffectRow {
    char treatment = 'A';
    double mean_abcd = 0;
    double mean_badc = 0;
    WaldResult equality; // clustered test of equal means across sequences
};

// Per-treatment sequence comparison. Throws std::invalid_argument when a
// sequence is missing from the records.
std::vector<OrderEffectRow> order_effect_summary(std::span<const RoundRecord> records);

} // namespace infoshare::econ
