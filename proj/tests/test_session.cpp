#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "infoshare/session.hpp"

using namespace infoshare;
using namespace infoshare::session;

namespace {

AgentSpec static_spec(int share_n, bool trust = true) {
    AgentSpec spec;
    spec.kind = AgentSpec::Kind::static_nash;
    spec.share_n = share_n;
    spec.trust = trust;
    return spec;
}

SessionConfig base_config(std::uint64_t seed, int participants = 2) {
    SessionConfig config;
    config.seed = seed;
    config.participants = participants;
    config.roster = {static_spec(0)};
    return config;
}

PlayerContext make_context(int participant, const AgentSpec& spec,
                           const TreatmentSpec& treatment, std::uint64_t seed) {
    return PlayerContext{participant, spec.policy_for(treatment),
                         agents::default_initial_lags(treatment),
                         make_rng(seed, {static_cast<std::uint64_t>(participant)})};
}

} // namespace

TEST_CASE("sequences name their treatments") {
    CHECK(to_string(Sequence::ABCD) == "ABCD");
    CHECK(to_string(Sequence::BADC) == "BADC");
    CHECK(sequence_from_string("BADC") == Sequence::BADC);
    CHECK_THROWS_AS(sequence_from_string("ACBD"), std::invalid_argument);

    auto treatments = treatments_for(Sequence::BADC);
    CHECK(treatments[0].id == 'B');
    CHECK(treatments[1].id == 'A');
    CHECK(treatments[2].id == 'D');
    CHECK(treatments[3].id == 'C');
}

TEST_CASE("config validation names the offending field") {
    auto expect_message = [](SessionConfig config, const char* needle) {
        try {
            config.validate();
            FAIL_CHECK("expected validation to throw for " << needle);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    SessionConfig odd = base_config(1);
    odd.participants = 3;
    expect_message(odd, "participants");

    SessionConfig roster = base_config(1, 6);
    roster.roster = {static_spec(0), static_spec(1)};
    expect_message(roster, "roster");

    SessionConfig threads = base_config(1);
    threads.threads = 0;
    expect_message(threads, "threads");

    SessionConfig trust = base_config(1);
    trust.roster[0].kind = AgentSpec::Kind::conditional;
    trust.roster[0].coeffs.trust_prob = 1.5;
    expect_message(trust, "trust_prob");

    SessionConfig id = base_config(1);
    id.session_id = "a,b";
    expect_message(id, "session_id");

    SessionConfig ok = base_config(1);
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.effective_session_id() == "s1");
}

TEST_CASE("pair matching is a sorted perfect matching") {
    Rng rng = make_rng(7);
    Pairing p = make_pairs(6, rng);
    REQUIRE(p.pairs.size() == 3);
    std::set<int> seen;
    for (auto [low, high] : p.pairs) {
        CHECK(low < high);
        seen.insert(low);
        seen.insert(high);
    }
    CHECK(seen == std::set<int>{0, 1, 2, 3, 4, 5});
    CHECK(std::is_sorted(p.pairs.begin(), p.pairs.end()));

    CHECK_THROWS_AS(make_pairs(3, rng), std::invalid_argument);
    CHECK_THROWS_AS(make_pairs(0, rng), std::invalid_argument);
}

TEST_CASE("pair matching is uniform over the three 4-player matchings") {
    Rng rng = make_rng(11);
    std::map<std::vector<std::pair<int, int>>, int> counts;
    const int kDraws = 30000;
    for (int i = 0; i < kDraws; ++i) counts[make_pairs(4, rng).pairs]++;
    REQUIRE(counts.size() == 3);
    for (const auto& [pairs, count] : counts)
        CHECK(std::abs(count / double(kDraws) - 1.0 / 3) < 0.01);
}

TEST_CASE("rematching avoids every immediately previous pair") {
    Rng rng = make_rng(13);
    Pairing previous = make_pairs(6, rng);
    for (int trial = 0; trial < 2000; ++trial) {
        Pairing next = make_pairs(6, rng, &previous);
        for (const auto& pair : next.pairs)
            CHECK(std::find(previous.pairs.begin(), previous.pairs.end(), pair) ==
                  previous.pairs.end());
        previous = next;
    }
}

TEST_CASE("two participants always rematch") {
    Rng rng = make_rng(17);
    Pairing previous{{{0, 1}}};
    Pairing next = make_pairs(2, rng, &previous);
    REQUIRE(next.pairs.size() == 1);
    CHECK(next.pairs[0] == std::pair{0, 1});
}

TEST_CASE("full mutual sharing round in the cooperative partition game") {
    auto treatment = TreatmentSpec::for_id('A');
    auto p1 = make_context(0, static_spec(2), treatment, 101);
    auto p2 = make_context(1, static_spec(2), treatment, 102);
    Rng env = make_rng(103);

    auto records = run_round(p1, p2, treatment, Conventions{}, env);
    for (const RoundRecord& rec : records) {
        CHECK(rec.endowment_size == 2);
        CHECK(rec.unique_count == 2);
        CHECK(rec.shared_count == 2);
        CHECK_FALSE(rec.falsified);
        CHECK_FALSE(rec.distrust_observed);
        CHECK(rec.accuracy);
        CHECK(rec.bonus == 1200);
        CHECK(rec.cost == 200);
        CHECK(rec.net == 1000);
    }
    CHECK_FALSE(p1.state.first_round);
    CHECK(p1.state.own_shared_lag == 2);
    CHECK(p1.state.other_shared_lag == 2);
    CHECK(p1.state.own_accuracy_lag);
}

TEST_CASE("no sharing leaves accuracy at the guessing rates") {
    // Partition: two unknown profiles, so 1/4 each and 1/16 jointly.
    auto treatment = TreatmentSpec::for_id('A');
    auto p1 = make_context(0, static_spec(0), treatment, 201);
    auto p2 = make_context(1, static_spec(0), treatment, 202);
    Rng env = make_rng(203);

    const int kRounds = 40000;
    int acc1 = 0, joint = 0;
    for (int i = 0; i < kRounds; ++i) {
        auto records = run_round(p1, p2, treatment, Conventions{}, env);
        acc1 += records[0].accuracy;
        joint += records[0].accuracy && records[1].accuracy;
    }
    CHECK(std::abs(acc1 / double(kRounds) - 0.25) < 0.01);
    CHECK(std::abs(joint / double(kRounds) - 1.0 / 16) < 0.006);
}

TEST_CASE("sampled endowments raise the guessing rate to the coverage mean") {
    // Four draws with replacement cover U distinct profiles; accuracy with
    // no receipts is E[2^-(4-U)] = 117.5/256.
    auto treatment = TreatmentSpec::for_id('C');
    auto p1 = make_context(0, static_spec(0), treatment, 301);
    auto p2 = make_context(1, static_spec(0), treatment, 302);
    Rng env = make_rng(303);

    const int kRounds = 60000;
    int acc = 0;
    double unique_sum = 0;
    for (int i = 0; i < kRounds; ++i) {
        auto records = run_round(p1, p2, treatment, Conventions{}, env);
        acc += records[0].accuracy;
        unique_sum += records[0].unique_count;
        CHECK(records[0].endowment_size == 4);
    }
    CHECK(std::abs(acc / double(kRounds) - 117.5 / 256) < 0.01);
    CHECK(std::abs(unique_sum / kRounds - 175.0 / 64) < 0.01);
}

TEST_CASE("distrust shows up behaviorally against an honest sharer") {
    // The distrusting receiver coin-flips both uncovered profiles, so it
    // contradicts at least one of the two received true rows w.p. 3/4.
    auto treatment = TreatmentSpec::for_id('B');
    auto sharer = make_context(0, static_spec(2), treatment, 401);
    auto skeptic = make_context(1, static_spec(0, false), treatment, 402);
    Rng env = make_rng(403);

    const int kRounds = 20000;
    int distrust = 0;
    for (int i = 0; i < kRounds; ++i) {
        auto records = run_round(sharer, skeptic, treatment, Conventions{}, env);
        CHECK_FALSE(records[0].distrust_observed);
        distrust += records[1].distrust_observed;
    }
    CHECK(std::abs(distrust / double(kRounds) - 0.75) < 0.01);
}

TEST_CASE("session log layout is complete and ordered") {
    SessionConfig config = base_config(42, 6);
    SessionLog log = run_session(config);

    CHECK(log.session_id == "s42");
    CHECK(log.pairings.size() == 4);
    REQUIRE(log.records.size() == 4u * 3 * 16 * 2);
    CHECK(log.paid_round >= 1);
    CHECK(log.paid_round <= 64);

    std::string ids = "ABCD";
    std::size_t i = 0;
    for (int t = 0; t < 4; ++t)
        for (int pair = 0; pair < 3; ++pair)
            for (int round = 1; round <= 16; ++round)
                for (int slot = 0; slot < 2; ++slot, ++i) {
                    const RoundRecord& rec = log.records[i];
                    CHECK(rec.treatment == ids[t]);
                    CHECK(rec.pair_id == pair);
                    CHECK(rec.round == round);
                    CHECK(rec.session_id == "s42");
                    CHECK(rec.sequence == "ABCD");
                    int low = log.pairings[t].pairs[pair].first;
                    int high = log.pairings[t].pairs[pair].second;
                    CHECK(rec.player_id == (slot == 0 ? low : high));
                }
}

TEST_CASE("session accounting identities hold") {
    SessionConfig config = base_config(43, 8);
    config.roster = {};
    SessionLog log = run_session(config);

    for (std::size_t i = 0; i < log.records.size(); i += 2) {
        const RoundRecord& a = log.records[i];
        const RoundRecord& b = log.records[i + 1];
        CHECK(a.net == a.bonus - a.cost);
        CHECK(b.net == b.bonus - b.cost);
        auto spec = TreatmentSpec::for_id(a.treatment);
        CHECK(a.cost == a.shared_count * spec.share_cost);
        if (spec.incentive == IncentiveKind::cooperative) {
            CHECK(a.bonus == b.bonus);
            CHECK((a.bonus == 0 || a.bonus == spec.coop_bonus));
        } else {
            CHECK((a.bonus + b.bonus == 0 || a.bonus + b.bonus == spec.tournament_bonus));
        }
        if (!a.accuracy && !b.accuracy) CHECK(a.bonus + b.bonus == 0);
    }
}

TEST_CASE("identical configurations reproduce the log byte for byte") {
    SessionConfig config = base_config(44, 4);
    config.roster = {};
    std::string first = render_log_csv(run_session(config));
    std::string second = render_log_csv(run_session(config));
    CHECK(first == second);

    SessionConfig reseeded = config;
    reseeded.seed = 45;
    CHECK(render_log_csv(run_session(reseeded)) != first);
}

TEST_CASE("evaluation order and thread count never touch the log") {
    SessionConfig config = base_config(46, 8);
    config.roster = {};
    std::string reference = render_log_csv(run_session(config));

    SessionConfig swapped = config;
    swapped.eval_player2_first = true;
    CHECK(render_log_csv(run_session(swapped)) == reference);

    SessionConfig threaded = config;
    threaded.threads = 4;
    CHECK(render_log_csv(run_session(threaded)) == reference);

    SessionConfig both = config;
    both.threads = 3;
    both.eval_player2_first = true;
    CHECK(render_log_csv(run_session(both)) == reference);
}

TEST_CASE("initial lag overrides only touch their own treatment") {
    SessionConfig config = base_config(47, 4);
    config.roster = {};

    SessionConfig tweaked = config;
    agents::LaggedState hot;
    hot.own_shared_lag = hot.other_shared_lag = 2;
    hot.own_accuracy_lag = hot.other_accuracy_lag = true;
    hot.own_unique_lag = hot.other_unique_lag = 2;
    tweaked.initial_lag_overrides['B'] = hot;

    SessionLog base = run_session(config);
    SessionLog changed = run_session(tweaked);
    REQUIRE(base.records.size() == changed.records.size());

    bool b_differs = false;
    for (std::size_t i = 0; i < base.records.size(); ++i) {
        if (base.records[i].treatment == 'B') {
            b_differs = b_differs || !(base.records[i] == changed.records[i]);
        } else {
            CHECK(base.records[i] == changed.records[i]);
        }
    }
    CHECK(b_differs);
}

TEST_CASE("carrying lags across treatments changes later behavior only") {
    SessionConfig config = base_config(48, 4);
    config.roster = {};

    SessionConfig carrying = config;
    carrying.carryover_lags = true;

    SessionLog fresh = run_session(config);
    SessionLog carried = run_session(carrying);
    REQUIRE(fresh.records.size() == carried.records.size());
    CHECK(fresh.pairings == carried.pairings);

    bool later_differs = false;
    for (std::size_t i = 0; i < fresh.records.size(); ++i) {
        if (fresh.records[i].treatment == 'A') {
            CHECK(fresh.records[i] == carried.records[i]);
        } else {
            later_differs = later_differs || !(fresh.records[i] == carried.records[i]);
        }
    }
    CHECK(later_differs);
}

TEST_CASE("per-treatment overrides pick their coefficients up") {
    SessionConfig config = base_config(49, 2);
    AgentSpec spec;
    spec.kind = AgentSpec::Kind::calibrated;
    agents::ReactionCoefficients mute;
    mute.share.intercept = 0;
    mute.trust_prob = 1;
    for (char id : {'A', 'B', 'C', 'D'}) spec.overrides[id] = mute;
    config.roster = {spec};

    SessionLog log = run_session(config);
    for (const RoundRecord& rec : log.records) {
        CHECK(rec.shared_count == 0);
        CHECK_FALSE(rec.falsified);
    }
}

TEST_CASE("uniform random agents stay inside the sharing bounds") {
    SessionConfig config = base_config(50, 2);
    config.roster[0].kind = AgentSpec::Kind::uniform_random;
    SessionLog log = run_session(config);

    std::map<char, std::set<int>> seen;
    for (const RoundRecord& rec : log.records) {
        CHECK(rec.shared_count >= 0);
        CHECK(rec.shared_count <= rec.endowment_size);
        seen[rec.treatment].insert(rec.shared_count);
    }
    // 16 rounds x 2 players per treatment make a constant count vanishingly
    // unlikely under a uniform draw.
    for (const auto& [id, counts] : seen) CHECK(counts.size() > 1);
}

TEST_CASE("paid round is uniform over the session's 64 rounds") {
    const int kSessions = 10000;
    std::array<int, 64> counts{};
    for (int seed = 0; seed < kSessions; ++seed) {
        SessionConfig config = base_config(9000 + seed, 2);
        counts[run_session(config).paid_round - 1]++;
    }
    double statistic = 0;
    double expected = kSessions / 64.0;
    for (int count : counts) {
        double diff = count - expected;
        statistic += diff * diff / expected;
    }
    boost::math::chi_squared_distribution<double> dist(63);
    CHECK(statistic < boost::math::quantile(dist, 0.9999));
}

TEST_CASE("CSV round-trips through render and parse") {
    SessionConfig config = base_config(51, 4);
    config.roster = {};
    config.sequence = Sequence::BADC;
    SessionLog log = run_session(config);

    std::string csv = render_log_csv(log);
    std::vector<RoundRecord> parsed = parse_records_csv(csv);
    REQUIRE(parsed.size() == log.records.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) CHECK(parsed[i] == log.records[i]);

    // Two logs concatenated, repeated header included, parse as one batch.
    std::vector<RoundRecord> doubled = parse_records_csv(csv + csv);
    CHECK(doubled.size() == 2 * log.records.size());
}

TEST_CASE("CSV export and import through a file") {
    namespace fs = std::filesystem;
    SessionConfig config = base_config(52, 2);
    SessionLog log = run_session(config);

    fs::path path = fs::temp_directory_path() / "infoshare_test_log.csv";
    export_log(log, path);
    std::vector<RoundRecord> parsed = import_records(path);
    REQUIRE(parsed.size() == log.records.size());
    CHECK(parsed.front() == log.records.front());
    CHECK(parsed.back() == log.records.back());
    fs::remove(path);

    CHECK_THROWS_AS(import_records(path), std::invalid_argument);
}

TEST_CASE("CSV parse errors name the row and column") {
    auto expect_message = [](const std::string& text, const char* needle) {
        try {
            parse_records_csv(text);
            FAIL_CHECK("expected parse to throw for " << needle);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    std::string header = kLogHeader;
    std::string good = "s1,ABCD,A,0,1,0,2,2,1,0,0,1,1200,100,1100";

    expect_message(good + "\n", "expected header");
    expect_message(header + "\nx,y\n", "expected 15 fields");
    expect_message(header + "\ns1,ABCD,E,0,1,0,2,2,1,0,0,1,1200,100,1100\n", "treatment");
    expect_message(header + "\ns1,ACBD,A,0,1,0,2,2,1,0,0,1,1200,100,1100\n", "sequence");
    expect_message(header + "\ns1,ABCD,A,0,1,0,2,2,one,0,0,1,1200,100,1100\n",
                   "shared_count");
    expect_message(header + "\ns1,ABCD,A,0,1,0,2,2,1,2,0,1,1200,100,1100\n", "falsified");
    expect_message(header + "\ns1,ABCD,A,0,0,0,2,2,1,0,0,1,1200,100,1100\n", "round");
    expect_message(header + "\n" + good + "\nbroken\n", "row 3");

    CHECK(parse_records_csv(header + "\n" + good + "\r\n").size() == 1);
}
