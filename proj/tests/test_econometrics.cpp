#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <functional>
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "infoshare/econometrics.hpp"
#include "infoshare/session.hpp"

using namespace infoshare;
using namespace infoshare::econ;

namespace {

Eigen::MatrixXd random_design(int n, int k, Rng& rng) {
    std::normal_distribution<double> normal(0, 1);
    Eigen::MatrixXd X(n, k);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (int j = 1; j < k; ++j) X(i, j) = normal(rng);
    }
    return X;
}

session::SessionLog default_log(std::uint64_t seed, int participants) {
    session::SessionConfig config;
    config.seed = seed;
    config.participants = participants;
    return session::run_session(config);
}

void expect_message(const std::function<void()>& fn, const char* needle) {
    try {
        fn();
        FAIL_CHECK("expected an exception mentioning " << needle);
    } catch (const std::invalid_argument& e) {
        INFO(std::string(e.what()));
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

} // namespace

TEST_CASE("OLS matches the normal equations") {
    Rng rng = make_rng(601);
    std::normal_distribution<double> normal(0, 1);
    Eigen::MatrixXd X = random_design(60, 4, rng);
    Eigen::VectorXd y(60);
    for (int i = 0; i < 60; ++i) y(i) = normal(rng);

    Eigen::VectorXd direct = (X.transpose() * X).inverse() * X.transpose() * y;
    Eigen::VectorXd fitted = ols(X, y);
    CHECK((fitted - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("OLS recovers an exact linear relationship") {
    Eigen::MatrixXd X(5, 2);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) {
        X(i, 0) = 1;
        X(i, 1) = i;
        y(i) = 2.0 + 3.0 * i;
    }
    Eigen::VectorXd coef = ols(X, y);
    CHECK(coef(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(coef(1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK((y - X * coef).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank-deficient designs are rejected with the column named") {
    Rng rng = make_rng(602);
    Eigen::MatrixXd X = random_design(30, 3, rng);
    X.col(2) = 2.0 * X.col(1); // exact collinearity
    Eigen::VectorXd y = X.col(1);
    expect_message([&] { ols(X, y); }, "rank deficient");
    expect_message([&] { ols(X, y); }, "column");
}

TEST_CASE("CR1 covariance on a worked example") {
    // Intercept-only, y = (1,2,3,4), clusters {0,0},{1,1}. Mean 2.5,
    // residuals (-1.5,-.5,.5,1.5), cluster scores -2 and 2, meat 8,
    // bread 1/4, dof (2/1)((4-1)/(4-1)) = 2, so variance (1/16)*8*2 = 1.
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 1);
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    std::vector<int> clusters = {0, 0, 1, 1};

    Eigen::VectorXd coef = ols(X, y);
    CHECK(coef(0) == doctest::Approx(2.5));
    Eigen::MatrixXd vcov = cluster_robust_cov(X, y - X * coef, clusters);
    CHECK(vcov(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("singleton clusters reduce CR1 to HC1") {
    Rng rng = make_rng(603);
    std::normal_distribution<double> normal(0, 1);
    const int n = 80, k = 3;
    Eigen::MatrixXd X = random_design(n, k, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = 1.0 + X(i, 1) - X(i, 2) + normal(rng);

    Eigen::VectorXd coef = ols(X, y);
    Eigen::VectorXd e = y - X * coef;
    std::vector<int> singleton(n);
    std::iota(singleton.begin(), singleton.end(), 0);

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < n; ++i)
        meat += e(i) * e(i) * X.row(i).transpose() * X.row(i);
    Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    Eigen::MatrixXd hc1 = bread * meat * bread * (double(n) / (n - k));

    Eigen::MatrixXd cr1 = cluster_robust_cov(X, e, singleton);
    CHECK((cr1 - hc1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance estimates are symmetric and positive semidefinite") {
    Rng rng = make_rng(604);
    std::normal_distribution<double> normal(0, 1);
    const int n = 90;
    Eigen::MatrixXd X = random_design(n, 4, rng);
    Eigen::VectorXd y(n);
    std::vector<int> clusters(n);
    for (int i = 0; i < n; ++i) {
        y(i) = X(i, 1) + normal(rng);
        clusters[i] = i / 6;
    }
    Eigen::VectorXd coef = ols(X, y);
    Eigen::MatrixXd vcov = cluster_robust_cov(X, y - X * coef, clusters);

    CHECK((vcov - vcov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(vcov);
    CHECK(solver.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("clustering widens the intercept variance under cluster correlation") {
    Rng rng = make_rng(605);
    std::normal_distribution<double> normal(0, 1);
    const int groups = 30, per_group = 10, n = groups * per_group;
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
    Eigen::VectorXd y(n);
    std::vector<int> clusters(n);
    for (int g = 0; g < groups; ++g) {
        double shared = normal(rng) * std::sqrt(0.8);
        for (int i = 0; i < per_group; ++i) {
            int row = g * per_group + i;
            y(row) = 1.0 + shared + normal(rng) * std::sqrt(0.2);
            clusters[row] = g;
        }
    }
    Eigen::VectorXd coef = ols(X, y);
    Eigen::VectorXd e = y - X * coef;
    double classical = e.squaredNorm() / (n - 1) / n;
    Eigen::MatrixXd robust = cluster_robust_cov(X, e, clusters);
    CHECK(robust(0, 0) > 2.0 * classical);
}

TEST_CASE("covariance input validation") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 1);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    std::vector<int> one_cluster = {0, 0, 0, 0};
    CHECK_THROWS_AS(cluster_robust_cov(X, e, one_cluster), std::invalid_argument);
    std::vector<int> short_ids = {0, 1};
    CHECK_THROWS_AS(cluster_robust_cov(X, e, short_ids), std::invalid_argument);
}

TEST_CASE("panel construction wires lags to the previous round") {
    session::SessionLog log = default_log(701, 4);
    PanelDataset panel = build_panel(log.records, 'A');

    CHECK(panel.treatment == 'A');
    CHECK(panel.regressor_names == default_regressors('A'));
    CHECK(panel.X.cols() == 7);
    CHECK(panel.n() == 2 * 15 * 2);
    CHECK(panel.n_clusters() == 2);
    CHECK(panel.outcomes.rows() == panel.n());

    // Re-derive one pair's rows by hand from the raw records.
    std::vector<const RoundRecord*> pair0[17][2]; // [round][slot]
    for (const RoundRecord& rec : log.records)
        if (rec.treatment == 'A' && rec.pair_id == 0)
            pair0[rec.round][rec.player_id == log.pairings[0].pairs[0].first ? 0 : 1]
                .push_back(&rec);

    // Panel rows for pair 0 come first: (round 2, slot 0), (round 2, slot 1), ...
    for (int round = 2; round <= 16; ++round)
        for (int slot = 0; slot < 2; ++slot) {
            int row = (round - 2) * 2 + slot;
            const RoundRecord& now = *pair0[round][slot][0];
            const RoundRecord& own = *pair0[round - 1][slot][0];
            const RoundRecord& other = *pair0[round - 1][1 - slot][0];
            CHECK(panel.X(row, 0) == 1.0);
            CHECK(panel.X(row, 1) == own.shared_count);
            CHECK(panel.X(row, 2) == (own.falsified ? 1 : 0));
            CHECK(panel.X(row, 3) == other.shared_count);
            CHECK(panel.X(row, 4) == (other.falsified ? 1 : 0));
            CHECK(panel.X(row, 5) == (own.accuracy ? 1 : 0));
            CHECK(panel.X(row, 6) == (other.accuracy ? 1 : 0));
            CHECK(panel.outcomes(row, 0) == now.shared_count);
            CHECK(panel.outcomes(row, 2) == (now.accuracy ? 1 : 0));
            CHECK(panel.cluster_ids[row] == 0);
        }
}

TEST_CASE("sampled-endowment panels include the unique-count lags") {
    session::SessionLog log = default_log(702, 4);
    PanelDataset panel = build_panel(log.records, 'C');
    CHECK(panel.X.cols() == 9);
    CHECK(panel.regressor_names.back() == "Other's_Unique_Lag");

    // Partition endowments make the unique lag constant, which the fit
    // rejects as collinear with the constant, naming the regressor.
    std::vector<std::string> bad = default_regressors('A');
    bad.push_back("Own_Unique_Lag");
    PanelDataset degenerate = build_panel(log.records, 'A', bad);
    expect_message([&] { fit_clustered(degenerate, Outcome::shared); },
                   "Own_Unique_Lag");
}

TEST_CASE("panel validation names the gap") {
    session::SessionLog log = default_log(703, 4);
    expect_message([&] { build_panel(log.records, 'E'); }, "treatment");

    std::vector<RoundRecord> truncated;
    for (const RoundRecord& rec : log.records)
        if (!(rec.treatment == 'A' && rec.pair_id == 1 && rec.round == 7))
            truncated.push_back(rec);
    expect_message([&] { build_panel(truncated, 'A'); }, "missing round 7");

    std::vector<RoundRecord> unbalanced = log.records;
    unbalanced.push_back(unbalanced.front()); // round 1 of A/pair 0 triplicated
    expect_message([&] { build_panel(unbalanced, 'A'); }, "two distinct players");

    expect_message([&] { build_panel(log.records, 'A', {"Own_Shared"}); },
                   "unknown regressor");
}

TEST_CASE("clustered panel fit is internally consistent") {
    session::SessionLog log = default_log(704, 20);
    PanelDataset panel = build_panel(log.records, 'A');
    RegressionResult fit = fit_clustered(panel, Outcome::shared);

    REQUIRE(fit.names.size() == 7);
    CHECK(fit.names.front() == "Constant");
    CHECK(fit.n == 10 * 15 * 2);
    CHECK(fit.n_clusters == 10);
    CHECK(fit.index_of("Other's_#Shared_Lag") == 3);
    CHECK_THROWS_AS(fit.index_of("nope"), std::invalid_argument);

    // OLS residuals are orthogonal to the design.
    Eigen::VectorXd residuals = panel.y(Outcome::shared) - panel.X * fit.coef;
    CHECK((panel.X.transpose() * residuals).cwiseAbs().maxCoeff() < 1e-8);

    Eigen::VectorXd se = fit.se();
    for (int i = 0; i < se.size(); ++i) CHECK(se(i) > 0);
}

TEST_CASE("Wald equality arithmetic") {
    Eigen::VectorXd b1(2), b2(2);
    b1 << 1.0, 2.0;
    b2 << 1.0, 2.0;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(2, 2) * 0.25;

    WaldResult same = wald_equality(b1, v, b2, v);
    CHECK(same.statistic == doctest::Approx(0.0));
    CHECK(same.df == 2);
    CHECK(same.p_value == doctest::Approx(1.0));

    // Single coefficient: z^2 = (1.0)^2 / (0.25 + 0.25) = 2.
    b2(1) = 3.0;
    WaldResult single = wald_equality(b1, v, b2, v, 1);
    CHECK(single.df == 1);
    CHECK(single.statistic == doctest::Approx(2.0));

    // Known chi-squared(1) critical value.
    Eigen::VectorXd c1(1), c2(1);
    c1 << std::sqrt(3.841458820694124);
    c2 << 0.0;
    Eigen::MatrixXd half = Eigen::MatrixXd::Identity(1, 1) * 0.5;
    WaldResult critical = wald_equality(c1, half, c2, half, 0);
    CHECK(critical.p_value == doctest::Approx(0.05).epsilon(1e-6));

    // Joint test with diagonal covariance is the sum of the single-term
    // statistics.
    WaldResult joint = wald_equality(b1, v, b2, v);
    CHECK(joint.statistic == doctest::Approx(2.0));
    CHECK(joint.df == 2);

    Eigen::VectorXd wrong(3);
    wrong << 1, 2, 3;
    CHECK_THROWS_AS(wald_equality(b1, v, wrong, v), std::invalid_argument);
    CHECK_THROWS_AS(wald_equality(b1, v, b2, v, 5), std::invalid_argument);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(wald_equality(b1, zero, b2, zero, 0), std::invalid_argument);
    CHECK_THROWS_AS(wald_equality(b1, zero, b2, zero), std::invalid_argument);
}

TEST_CASE("Wald test keeps its size under the null") {
    // Two independent estimates of the same scalar with known variance.
    Rng rng = make_rng(606);
    std::normal_distribution<double> normal(0, 1);
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(1, 1);
    int rejections = 0;
    const int kTrials = 4000;
    for (int t = 0; t < kTrials; ++t) {
        Eigen::VectorXd b1(1), b2(1);
        b1 << normal(rng);
        b2 << normal(rng);
        Eigen::MatrixXd half = v * 1.0;
        if (wald_equality(b1, half, b2, half, 0).p_value < 0.05) ++rejections;
    }
    double rate = rejections / double(kTrials);
    CHECK(rate > 0.035);
    CHECK(rate < 0.065);
}

TEST_CASE("treatment summaries from synthetic records") {
    std::vector<RoundRecord> records;
    auto add = [&](char treatment, int pair, int round, int player, int shared,
                   bool falsified, bool accurate) {
        RoundRecord rec;
        rec.session_id = "s1";
        rec.sequence = "ABCD";
        rec.treatment = treatment;
        rec.pair_id = pair;
        rec.round = round;
        rec.player_id = player;
        rec.shared_count = shared;
        rec.falsified = falsified;
        rec.accuracy = accurate;
        records.push_back(rec);
    };
    add('A', 0, 1, 0, 2, false, true);
    add('A', 0, 1, 1, 0, false, true);
    add('A', 0, 2, 0, 0, false, false);
    add('A', 0, 2, 1, 0, false, true);
    add('B', 0, 1, 0, 1, true, false);
    add('B', 0, 1, 1, 1, false, false);

    auto summaries = summarize_treatments(records);
    REQUIRE(summaries.size() == 2);
    const TreatmentSummary& a = summaries[0];
    CHECK(a.treatment == 'A');
    CHECK(a.records == 4);
    CHECK(a.mean_shared == doctest::Approx(0.5));
    CHECK(a.falsification_rate == doctest::Approx(0.0));
    CHECK(a.accuracy_rate == doctest::Approx(0.75));
    CHECK(a.both_zero_rate == doctest::Approx(0.5)); // round 2 only
    const TreatmentSummary& b = summaries[1];
    CHECK(b.treatment == 'B');
    CHECK(b.mean_shared == doctest::Approx(1.0));
    CHECK(b.falsification_rate == doctest::Approx(0.5));
    CHECK(b.both_zero_rate == doctest::Approx(0.0));
}

TEST_CASE("summaries agree between live records and a CSV round trip") {
    session::SessionLog log = default_log(705, 6);
    auto direct = summarize_treatments(log.records);
    auto parsed_records = session::parse_records_csv(session::render_log_csv(log));
    auto from_csv = summarize_treatments(parsed_records);

    REQUIRE(direct.size() == from_csv.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(direct[i].treatment == from_csv[i].treatment);
        CHECK(direct[i].records == from_csv[i].records);
        CHECK(direct[i].mean_shared == doctest::Approx(from_csv[i].mean_shared));
        CHECK(direct[i].both_zero_rate == doctest::Approx(from_csv[i].both_zero_rate));
    }
}

TEST_CASE("order-effect rows compare sequences and keep the null") {
    // Same uniform-random behavior under both sequences: means close, the
    // equality test far from a strong rejection.
    std::vector<RoundRecord> records;
    for (int s = 0; s < 6; ++s) {
        session::SessionConfig config;
        config.seed = 800 + s;
        config.participants = 8;
        config.sequence = s % 2 == 0 ? session::Sequence::ABCD : session::Sequence::BADC;
        config.roster = {session::AgentSpec{session::AgentSpec::Kind::uniform_random}};
        config.session_id = "ord" + std::to_string(s);
        auto log = session::run_session(config);
        records.insert(records.end(), log.records.begin(), log.records.end());
    }

    auto rows = order_effect_summary(records);
    REQUIRE(rows.size() == 4);
    for (const OrderEffectRow& row : rows) {
        INFO("treatment " << row.treatment);
        double scale = TreatmentSpec::for_id(row.treatment).endowment_size() / 2.0;
        CHECK(std::abs(row.mean_abcd - scale) < 0.25);
        CHECK(std::abs(row.mean_badc - scale) < 0.25);
        CHECK(row.equality.df == 1);
        CHECK(row.equality.p_value > 0.001);
    }

    // Missing sequence is reported.
    std::vector<RoundRecord> abcd_only;
    for (const RoundRecord& rec : records)
        if (rec.sequence == "ABCD") abcd_only.push_back(rec);
    expect_message([&] { order_effect_summary(abcd_only); }, "BADC");
}
