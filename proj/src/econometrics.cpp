#include "infoshare/econometrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace infoshare::econ {

std::vector<std::string> default_regressors(char treatment_id) {
    TreatmentSpec spec = TreatmentSpec::for_id(treatment_id);
    std::vector<std::string> out(kLagRegressors.begin(), kLagRegressors.begin() + 6);
    // Partition endowments are constant, so the unique-count lags only enter
    // where they vary.
    if (spec.endowment_mode == EndowmentMode::with_replacement) {
        out.push_back(kLagRegressors[6]);
        out.push_back(kLagRegressors[7]);
    }
    return out;
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::shared: return "shared";
        case Outcome::falsified: return "falsified";
        case Outcome::accuracy: return "accuracy";
    }
    return "?";
}

int PanelDataset::n_clusters() const {
    return static_cast<int>(std::set<int>(cluster_ids.begin(), cluster_ids.end()).size());
}

namespace {

double lag_value(const std::string& name, const RoundRecord& own,
                 const RoundRecord& other) {
    if (name == kLagRegressors[0]) return own.shared_count;
    if (name == kLagRegressors[1]) return own.falsified ? 1 : 0;
    if (name == kLagRegressors[2]) return other.shared_count;
    if (name == kLagRegressors[3]) return other.falsified ? 1 : 0;
    if (name == kLagRegressors[4]) return own.accuracy ? 1 : 0;
    if (name == kLagRegressors[5]) return other.accuracy ? 1 : 0;
    if (name == kLagRegressors[6]) return own.unique_count;
    if (name == kLagRegressors[7]) return other.unique_count;
    throw std::invalid_argument("unknown regressor: " + name);
}

// Per-round records of one pair, low player first.
struct PairRounds {
    std::vector<std::array<const RoundRecord*, 2>> rounds; // index 0 = round 1
};

std::map<std::pair<std::string, int>, PairRounds> group_pairs(
    std::span<const RoundRecord> records, char treatment_id) {
    std::map<std::pair<std::string, int>, std::map<int, std::vector<const RoundRecord*>>>
        grouped;
    for (const RoundRecord& rec : records)
        if (rec.treatment == treatment_id)
            grouped[{rec.session_id, rec.pair_id}][rec.round].push_back(&rec);
    if (grouped.empty())
        throw std::invalid_argument(std::string("no records for treatment ") +
                                    treatment_id);

    std::map<std::pair<std::string, int>, PairRounds> out;
    for (const auto& [key, by_round] : grouped) {
        std::string label = key.first + "/" + treatment_id + "/pair " +
                            std::to_string(key.second);
        int last_round = by_round.rbegin()->first;
        PairRounds pair;
        for (int round = 1; round <= last_round; ++round) {
            auto it = by_round.find(round);
            if (it == by_round.end())
                throw std::invalid_argument(label + " is missing round " +
                                            std::to_string(round));
            const auto& recs = it->second;
            if (recs.size() != 2 || recs[0]->player_id == recs[1]->player_id)
                throw std::invalid_argument(label + " needs two distinct players in round " +
                                            std::to_string(round));
            auto [low, high] = std::minmax(recs[0], recs[1], [](auto* a, auto* b) {
                return a->player_id < b->player_id;
            });
            pair.rounds.push_back({low, high});
        }
        if (pair.rounds.size() < 2)
            throw std::invalid_argument(label + " has fewer than two rounds");
        for (std::size_t r = 1; r < pair.rounds.size(); ++r)
            for (int s = 0; s < 2; ++s)
                if (pair.rounds[r][s]->player_id != pair.rounds[0][s]->player_id)
                    throw std::invalid_argument(label + " changes players in round " +
                                                std::to_string(r + 1));
        out.emplace(key, std::move(pair));
    }
    return out;
}

// Shared backbone for ols() and fit_clustered(): name the offending column
// when the regression cannot identify every coefficient.
Eigen::VectorXd solve_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const std::vector<std::string>* names) {
    if (X.rows() != y.size())
        throw std::invalid_argument("design matrix and outcome lengths differ");
    if (X.rows() < X.cols())
        throw std::invalid_argument("fewer observations than coefficients");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        // Blame the first column, in user order, that adds no new direction
        // to the columns before it.
        int offending = 0;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> probe(X.leftCols(1));
        if (probe.rank() > 0)
            for (int j = 1; j < X.cols(); ++j) {
                probe.compute(X.leftCols(j + 1));
                if (probe.rank() <= j) {
                    offending = j;
                    break;
                }
            }
        std::string what = names != nullptr && offending < static_cast<int>(names->size())
                               ? "regressor " + (*names)[offending]
                               : "column " + std::to_string(offending);
        throw std::invalid_argument("design matrix is rank deficient: " + what +
                                    " is collinear");
    }
    return qr.solve(y);
}

} // namespace

PanelDataset build_panel(std::span<const RoundRecord> records, char treatment_id) {
    return build_panel(records, treatment_id, default_regressors(treatment_id));
}

PanelDataset build_panel(std::span<const RoundRecord> records, char treatment_id,
                         const std::vector<std::string>& regressors) {
    auto pairs = group_pairs(records, treatment_id);

    int rows = 0;
    for (const auto& [key, pair] : pairs)
        rows += 2 * (static_cast<int>(pair.rounds.size()) - 1);

    PanelDataset panel;
    panel.treatment = treatment_id;
    panel.regressor_names = regressors;
    panel.X.resize(rows, 1 + static_cast<int>(regressors.size()));
    panel.outcomes.resize(rows, 3);
    panel.cluster_ids.reserve(rows);

    int row = 0, cluster = 0;
    for (const auto& [key, pair] : pairs) {
        for (std::size_t r = 1; r < pair.rounds.size(); ++r)
            for (int s = 0; s < 2; ++s) {
                const RoundRecord& now = *pair.rounds[r][s];
                const RoundRecord& own_lag = *pair.rounds[r - 1][s];
                const RoundRecord& other_lag = *pair.rounds[r - 1][1 - s];

                panel.X(row, 0) = 1.0;
                for (std::size_t c = 0; c < regressors.size(); ++c)
                    panel.X(row, 1 + c) = lag_value(regressors[c], own_lag, other_lag);
                panel.outcomes(row, 0) = now.shared_count;
                panel.outcomes(row, 1) = now.falsified ? 1 : 0;
                panel.outcomes(row, 2) = now.accuracy ? 1 : 0;
                panel.cluster_ids.push_back(cluster);
                ++row;
            }
        ++cluster;
    }
    return panel;
}

Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return solve_ols(X, y, nullptr);
}

Eigen::MatrixXd cluster_robust_cov(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& residuals,
                                   std::span<const int> cluster_ids) {
    const int n = static_cast<int>(X.rows());
    const int k = static_cast<int>(X.cols());
    if (residuals.size() != n ||
        static_cast<int>(cluster_ids.size()) != n)
        throw std::invalid_argument("residuals and cluster ids must match the rows");
    if (n <= k)
        throw std::invalid_argument("too few observations for a covariance estimate");

    std::map<int, Eigen::VectorXd> scores;
    for (int i = 0; i < n; ++i) {
        auto [it, inserted] = scores.try_emplace(cluster_ids[i], Eigen::VectorXd::Zero(k));
        it->second += X.row(i).transpose() * residuals(i);
    }
    const int groups = static_cast<int>(scores.size());
    if (groups < 2) throw std::invalid_argument("need at least two clusters");

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [id, score] : scores) meat += score * score.transpose();

    Eigen::MatrixXd bread = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    double dof = (double(groups) / (groups - 1)) * (double(n - 1) / (n - k));
    return bread * meat * bread * dof;
}

Eigen::VectorXd RegressionResult::se() const {
    return vcov.diagonal().array().max(0.0).sqrt().matrix();
}

int RegressionResult::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("unknown coefficient: " + name);
    return static_cast<int>(it - names.begin());
}

RegressionResult fit_clustered(const PanelDataset& panel, Outcome outcome) {
    RegressionResult result;
    result.names.reserve(1 + panel.regressor_names.size());
    result.names.push_back("Constant");
    result.names.insert(result.names.end(), panel.regressor_names.begin(),
                        panel.regressor_names.end());

    Eigen::VectorXd y = panel.y(outcome);
    result.coef = solve_ols(panel.X, y, &result.names);
    Eigen::VectorXd residuals = y - panel.X * result.coef;
    result.vcov = cluster_robust_cov(panel.X, residuals, panel.cluster_ids);
    result.n = panel.n();
    result.n_clusters = panel.n_clusters();
    return result;
}

WaldResult wald_equality(const Eigen::VectorXd& b1, const Eigen::MatrixXd& v1,
                         const Eigen::VectorXd& b2, const Eigen::MatrixXd& v2,
                         int index) {
    if (b1.size() != b2.size())
        throw std::invalid_argument("coefficient vectors differ in length");
    if (v1.rows() != b1.size() || v2.rows() != b2.size())
        throw std::invalid_argument("covariance dimensions do not match coefficients");

    WaldResult result;
    if (index >= 0) {
        if (index >= b1.size())
            throw std::invalid_argument("coefficient index out of range");
        double variance = v1(index, index) + v2(index, index);
        if (!(variance > 0))
            throw std::invalid_argument("nonpositive variance in Wald test");
        double diff = b1(index) - b2(index);
        result.statistic = diff * diff / variance;
        result.df = 1;
    } else {
        Eigen::VectorXd diff = b1 - b2;
        Eigen::MatrixXd pooled = v1 + v2;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(pooled);
        if (!lu.isInvertible())
            throw std::invalid_argument("singular pooled covariance in Wald test");
        result.statistic = diff.dot(lu.solve(diff));
        result.df = static_cast<int>(b1.size());
    }
    boost::math::chi_squared_distribution<double> dist(result.df);
    result.p_value = boost::math::cdf(boost::math::complement(dist, std::max(0.0, result.statistic)));
    return result;
}

std::vector<TreatmentSummary> summarize_treatments(std::span<const RoundRecord> records) {
    std::map<char, TreatmentSummary> by_treatment;
    std::map<std::tuple<std::string, char, int, int>, std::pair<int, int>> pair_rounds;

    for (const RoundRecord& rec : records) {
        TreatmentSummary& s = by_treatment[rec.treatment];
        s.treatment = rec.treatment;
        s.records += 1;
        s.mean_shared += rec.shared_count;
        s.falsification_rate += rec.falsified ? 1 : 0;
        s.accuracy_rate += rec.accuracy ? 1 : 0;
        auto& [players, shared] =
            pair_rounds[{rec.session_id, rec.treatment, rec.pair_id, rec.round}];
        players += 1;
        shared += rec.shared_count;
    }

    std::map<char, std::pair<int, int>> zero_counts; // (pair-rounds, both-zero)
    for (const auto& [key, counts] : pair_rounds) {
        auto& [total, zero] = zero_counts[std::get<1>(key)];
        total += 1;
        if (counts.second == 0) zero += 1;
    }

    std::vector<TreatmentSummary> out;
    for (auto& [id, s] : by_treatment) {
        s.mean_shared /= s.records;
        s.falsification_rate /= s.records;
        s.accuracy_rate /= s.records;
        auto [total, zero] = zero_counts[id];
        s.both_zero_rate = total > 0 ? double(zero) / total : 0;
        out.push_back(s);
    }
    return out;
}

std::vector<OrderEffectRow> order_effect_summary(std::span<const RoundRecord> records) {
    // Intercept-only regressions of the shared count per (treatment,
    // sequence), clustered by pair, compared with a Wald test.
    struct Group {
        std::vector<double> y;
        std::vector<int> clusters;
        std::map<std::pair<std::string, int>, int> cluster_ids;
    };
    std::map<char, std::map<std::string, Group>> groups;
    for (const RoundRecord& rec : records) {
        Group& g = groups[rec.treatment][rec.sequence];
        auto [it, inserted] = g.cluster_ids.try_emplace(
            std::pair{rec.session_id, rec.pair_id},
            static_cast<int>(g.cluster_ids.size()));
        g.y.push_back(rec.shared_count);
        g.clusters.push_back(it->second);
    }

    auto fit_mean = [](const Group& g) {
        Eigen::MatrixXd X = Eigen::MatrixXd::Ones(static_cast<int>(g.y.size()), 1);
        Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(g.y.data(), g.y.size());
        Eigen::VectorXd coef = ols(X, y);
        Eigen::MatrixXd vcov = cluster_robust_cov(X, y - X * coef, g.clusters);
        return std::pair{coef, vcov};
    };

    std::vector<OrderEffectRow> out;
    for (const auto& [treatment, by_sequence] : groups) {
        for (const char* sequence : {"ABCD", "BADC"})
            if (by_sequence.find(sequence) == by_sequence.end())
                throw std::invalid_argument(std::string("treatment ") + treatment +
                                            " has no " + sequence + " records");
        auto [b1, v1] = fit_mean(by_sequence.at("ABCD"));
        auto [b2, v2] = fit_mean(by_sequence.at("BADC"));
        OrderEffectRow row;
        row.treatment = treatment;
        row.mean_abcd = b1(0);
        row.mean_badc = b2(0);
        row.equality = wald_equality(b1, v1, b2, v2, 0);
        out.push_back(row);
    }
    return out;
}

} // namespace infoshare::econ
