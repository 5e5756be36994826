#include "infoshare/session.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace infoshare::session {

namespace {

// Stream tags keeping every consumer of randomness on its own substream.
constexpr std::uint64_t kTagPairing = 0x70A1;
constexpr std::uint64_t kTagPaidRound = 0xFA1D;
constexpr std::uint64_t kTagEnvironment = 0x0E27;
constexpr std::uint64_t kTagPlayer = 0xA6E2;

void check_probability(double value, const char* field) {
    if (!(value >= 0.0 && value <= 1.0))
        throw std::invalid_argument(std::string(field) + " must lie in [0, 1]");
}

void check_coefficients(const agents::ReactionCoefficients& coeffs) {
    if (!(coeffs.noise_scale >= 0))
        throw std::invalid_argument("noise_scale must be nonnegative");
    check_probability(coeffs.trust_prob, "trust_prob");
    check_probability(coeffs.falsify_base, "falsify_base");
}

} // namespace

agents::AgentPolicy AgentSpec::policy_for(const TreatmentSpec& treatment) const {
    switch (kind) {
        case Kind::static_nash: return agents::StaticNash{share_n, trust};
        case Kind::uniform_random: return agents::UniformRandom{};
        case Kind::conditional: return agents::Conditional{coeffs};
        case Kind::calibrated: break;
    }
    auto it = overrides.find(treatment.id);
    if (it != overrides.end()) return agents::Conditional{it->second};
    return agents::Conditional{agents::default_coefficients(treatment)};
}

std::string to_string(Sequence s) { return s == Sequence::ABCD ? "ABCD" : "BADC"; }

Sequence sequence_from_string(const std::string& s) {
    if (s == "ABCD") return Sequence::ABCD;
    if (s == "BADC") return Sequence::BADC;
    throw std::invalid_argument("unknown sequence: " + s);
}

std::array<TreatmentSpec, 4> treatments_for(Sequence s) {
    std::string ids = to_string(s);
    return {TreatmentSpec::for_id(ids[0]), TreatmentSpec::for_id(ids[1]),
            TreatmentSpec::for_id(ids[2]), TreatmentSpec::for_id(ids[3])};
}

AgentSpec SessionConfig::roster_entry(int participant) const {
    if (roster.empty()) return AgentSpec{};
    if (roster.size() == 1) return roster.front();
    return roster.at(static_cast<std::size_t>(participant));
}

void SessionConfig::validate() const {
    if (participants < 2 || participants % 2 != 0)
        throw std::invalid_argument("participants must be an even count of at least 2");
    if (!roster.empty() && roster.size() != 1 &&
        roster.size() != static_cast<std::size_t>(participants))
        throw std::invalid_argument(
            "roster must be empty, a single spec, or one spec per participant");
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
    if (session_id.find(',') != std::string::npos ||
        session_id.find('\n') != std::string::npos)
        throw std::invalid_argument("session_id must not contain commas or newlines");
    for (const AgentSpec& spec : roster) {
        if (spec.kind == AgentSpec::Kind::static_nash &&
            (spec.share_n < 0 || spec.share_n > 4))
            throw std::invalid_argument("share_n must be between 0 and 4");
        if (spec.kind == AgentSpec::Kind::conditional) check_coefficients(spec.coeffs);
        for (const auto& [id, coeffs] : spec.overrides) check_coefficients(coeffs);
    }
}

Pairing make_pairs(int participants, Rng& rng, const Pairing* previous) {
    if (participants < 2 || participants % 2 != 0)
        throw std::invalid_argument("participants must be an even count of at least 2");

    std::vector<int> ids(participants);
    std::iota(ids.begin(), ids.end(), 0);
    auto draw = [&] {
        std::shuffle(ids.begin(), ids.end(), rng);
        Pairing p;
        for (int i = 0; i < participants; i += 2)
            p.pairs.emplace_back(std::min(ids[i], ids[i + 1]),
                                 std::max(ids[i], ids[i + 1]));
        std::sort(p.pairs.begin(), p.pairs.end());
        return p;
    };

    Pairing out = draw();
    if (previous == nullptr) return out;
    if (participants == 2) {
        if (!previous->pairs.empty())
            std::cerr << "warning: two participants admit only one pairing; "
                         "the previous pair repeats\n";
        return out;
    }
    auto repeats = [&](const Pairing& p) {
        for (const auto& pair : p.pairs)
            if (std::find(previous->pairs.begin(), previous->pairs.end(), pair) !=
                previous->pairs.end())
                return true;
        return false;
    };
    while (repeats(out)) out = draw();
    return out;
}

std::array<RoundRecord, 2> run_round(PlayerContext& p1, PlayerContext& p2,
                                     const TreatmentSpec& treatment,
                                     const Conventions& conventions, Rng& env_rng,
                                     bool eval_player2_first) {
    CompleteDatabase db = random_database(env_rng);
    auto endowments = draw_endowments(db, treatment.endowment_mode, env_rng);
    const Endowment& e1 = endowments.first;
    const Endowment& e2 = endowments.second;

    // Decisions are simultaneous: each call consumes only that player's
    // stream, so the evaluation order cannot leak into the outcome.
    ShareDecision d1, d2;
    auto decide1 = [&] {
        d1 = agents::decide_share(p1.policy, p1.state, e1, conventions.falsify, p1.rng);
    };
    auto decide2 = [&] {
        d2 = agents::decide_share(p2.policy, p2.state, e2, conventions.falsify, p2.rng);
    };
    eval_player2_first ? (decide2(), decide1()) : (decide1(), decide2());

    auto respond = [&](PlayerContext& self, const Endowment& own,
                       const ShareDecision& incoming) {
        std::vector<bool> flags = agents::decide_trust(self.policy, incoming.shared, self.rng);
        std::vector<DatabaseEntry> trusted;
        for (std::size_t i = 0; i < incoming.shared.size(); ++i)
            if (flags[i]) trusted.push_back(incoming.shared[i]);
        return agents::complete_submission(own, trusted, self.rng);
    };
    AccuracySubmission s1, s2;
    if (eval_player2_first) {
        s2 = respond(p2, e2, d1);
        s1 = respond(p1, e1, d2);
    } else {
        s1 = respond(p1, e1, d2);
        s2 = respond(p2, e2, d1);
    }

    std::array<bool, 2> accurate{evaluate_submission(s1, db), evaluate_submission(s2, db)};
    auto settlements = settle_round(treatment, {d1.count(), d2.count()}, accurate,
                                    env_rng, conventions.tie_break);

    std::array<RoundRecord, 2> out{};
    const Endowment* endows[2] = {&e1, &e2};
    const ShareDecision* decisions[2] = {&d1, &d2};
    const AccuracySubmission* submissions[2] = {&s1, &s2};
    std::array<bool, 2> falsified{detect_falsification(e1, d1),
                                  detect_falsification(e2, d2)};
    for (int s = 0; s < 2; ++s) {
        RoundRecord& rec = out[s];
        rec.endowment_size = endows[s]->size();
        rec.unique_count = endows[s]->unique_count();
        rec.shared_count = decisions[s]->count();
        rec.falsified = falsified[s];
        rec.distrust_observed =
            detect_behavioral_distrust(decisions[1 - s]->shared, *submissions[s]);
        rec.accuracy = accurate[s];
        rec.bonus = settlements[s].bonus;
        rec.cost = settlements[s].cost;
        rec.net = settlements[s].net;
    }

    auto update = [&](agents::LaggedState& state, int self, int other) {
        state.own_shared_lag = decisions[self]->count();
        state.own_falsified_lag = falsified[self];
        state.other_shared_lag = decisions[other]->count();
        state.other_falsified_lag = falsified[other];
        state.own_accuracy_lag = accurate[self];
        state.other_accuracy_lag = accurate[other];
        state.own_unique_lag = endows[self]->unique_count();
        state.other_unique_lag = endows[other]->unique_count();
        state.first_round = false;
    };
    update(p1.state, 0, 1);
    update(p2.state, 1, 0);
    return out;
}

SessionLog run_session(const SessionConfig& config) {
    config.validate();

    SessionLog log;
    log.session_id = config.effective_session_id();
    log.sequence = config.sequence;

    auto treatments = treatments_for(config.sequence);
    int total_rounds = 0;
    for (const TreatmentSpec& t : treatments) total_rounds += t.rounds;
    Rng paid_rng = make_rng(config.seed, {kTagPaidRound});
    log.paid_round = std::uniform_int_distribution<int>(1, total_rounds)(paid_rng);

    const int pair_count = config.participants / 2;
    std::vector<std::size_t> offsets;
    std::size_t total_records = 0;
    for (const TreatmentSpec& t : treatments) {
        offsets.push_back(total_records);
        total_records += static_cast<std::size_t>(pair_count) * t.rounds * 2;
    }
    log.records.resize(total_records);

    Rng pairing_rng = make_rng(config.seed, {kTagPairing});
    std::vector<agents::LaggedState> carried(config.participants);
    const std::string sequence_str = to_string(config.sequence);

    for (std::size_t t_idx = 0; t_idx < treatments.size(); ++t_idx) {
        const TreatmentSpec& treatment = treatments[t_idx];
        const Pairing* previous =
            (t_idx > 0 && config.participants >= 4) ? &log.pairings.back() : nullptr;
        log.pairings.push_back(make_pairs(config.participants, pairing_rng, previous));
        const Pairing& pairing = log.pairings.back();

        auto initial_state = [&](int participant) {
            if (config.carryover_lags && t_idx > 0) return carried[participant];
            auto it = config.initial_lag_overrides.find(treatment.id);
            if (it != config.initial_lag_overrides.end()) return it->second;
            return agents::default_initial_lags(treatment);
        };

        std::vector<agents::LaggedState> finals(config.participants);
        auto run_pair = [&](int pair_idx) {
            auto [low, high] = pairing.pairs[pair_idx];
            PlayerContext p1{low, config.roster_entry(low).policy_for(treatment),
                             initial_state(low),
                             make_rng(config.seed, {kTagPlayer, t_idx,
                                                    static_cast<std::uint64_t>(pair_idx), 0})};
            PlayerContext p2{high, config.roster_entry(high).policy_for(treatment),
                             initial_state(high),
                             make_rng(config.seed, {kTagPlayer, t_idx,
                                                    static_cast<std::uint64_t>(pair_idx), 1})};
            Rng env_rng = make_rng(
                config.seed,
                {kTagEnvironment, t_idx, static_cast<std::uint64_t>(pair_idx)});

            std::size_t base =
                offsets[t_idx] + static_cast<std::size_t>(pair_idx) * treatment.rounds * 2;
            for (int round = 1; round <= treatment.rounds; ++round) {
                auto records = run_round(p1, p2, treatment, config.conventions, env_rng,
                                         config.eval_player2_first);
                for (int s = 0; s < 2; ++s) {
                    RoundRecord& rec = records[s];
                    rec.session_id = log.session_id;
                    rec.sequence = sequence_str;
                    rec.treatment = treatment.id;
                    rec.pair_id = pair_idx;
                    rec.round = round;
                    rec.player_id = s == 0 ? low : high;
                    log.records[base + static_cast<std::size_t>(round - 1) * 2 + s] =
                        std::move(rec);
                }
            }
            finals[low] = p1.state;
            finals[high] = p2.state;
        };

        int workers = std::min(config.threads, pair_count);
        if (workers <= 1) {
            for (int pair_idx = 0; pair_idx < pair_count; ++pair_idx) run_pair(pair_idx);
        } else {
            // Pairs write disjoint record and state slots, so striping them
            // across threads preserves the byte-exact log.
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    for (int pair_idx = w; pair_idx < pair_count; pair_idx += workers)
                        run_pair(pair_idx);
                });
            for (std::thread& t : pool) t.join();
        }
        carried = std::move(finals);
    }
    return log;
}

std::string render_log_csv(const SessionLog& log) {
    std::string out = kLogHeader;
    out += '\n';
    for (const RoundRecord& rec : log.records) {
        out += rec.session_id;
        out += ',';
        out += rec.sequence;
        out += ',';
        out += rec.treatment;
        out += ',';
        out += std::to_string(rec.pair_id);
        out += ',';
        out += std::to_string(rec.round);
        out += ',';
        out += std::to_string(rec.player_id);
        out += ',';
        out += std::to_string(rec.endowment_size);
        out += ',';
        out += std::to_string(rec.unique_count);
        out += ',';
        out += std::to_string(rec.shared_count);
        out += ',';
        out += rec.falsified ? '1' : '0';
        out += ',';
        out += rec.distrust_observed ? '1' : '0';
        out += ',';
        out += rec.accuracy ? '1' : '0';
        out += ',';
        out += std::to_string(rec.bonus);
        out += ',';
        out += std::to_string(rec.cost);
        out += ',';
        out += std::to_string(rec.net);
        out += '\n';
    }
    return out;
}

void export_log(const SessionLog& log, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << render_log_csv(log);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

[[noreturn]] void fail_row(std::size_t row, const std::string& what) {
    throw std::invalid_argument("row " + std::to_string(row) + ": " + what);
}

int parse_int(std::string_view field, const char* column, std::size_t row) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        fail_row(row, std::string("column ") + column + " is not an integer: '" +
                          std::string(field) + "'");
    return value;
}

bool parse_flag(std::string_view field, const char* column, std::size_t row) {
    if (field == "0") return false;
    if (field == "1") return true;
    fail_row(row, std::string("column ") + column + " must be 0 or 1, got '" +
                      std::string(field) + "'");
}

} // namespace

std::vector<RoundRecord> parse_records_csv(const std::string& text) {
    std::vector<RoundRecord> out;
    std::size_t row = 0;
    bool saw_header = false;

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        ++row;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        // Concatenated logs repeat the header; accept it anywhere.
        if (line == kLogHeader) {
            saw_header = true;
            continue;
        }
        if (!saw_header)
            fail_row(row, std::string("expected header '") + kLogHeader + "'");

        auto fields = split_fields(line);
        if (fields.size() != 15)
            fail_row(row, "expected 15 fields, got " + std::to_string(fields.size()));

        RoundRecord rec;
        rec.session_id = std::string(fields[0]);
        rec.sequence = std::string(fields[1]);
        if (rec.sequence != "ABCD" && rec.sequence != "BADC")
            fail_row(row, "column sequence must be ABCD or BADC, got '" + rec.sequence + "'");
        if (fields[2].size() != 1 || fields[2][0] < 'A' || fields[2][0] > 'D')
            fail_row(row, "column treatment must be one of A,B,C,D, got '" +
                              std::string(fields[2]) + "'");
        rec.treatment = fields[2][0];
        rec.pair_id = parse_int(fields[3], "pair_id", row);
        rec.round = parse_int(fields[4], "round", row);
        rec.player_id = parse_int(fields[5], "player_id", row);
        rec.endowment_size = parse_int(fields[6], "endowment_size", row);
        rec.unique_count = parse_int(fields[7], "unique_count", row);
        rec.shared_count = parse_int(fields[8], "shared_count", row);
        rec.falsified = parse_flag(fields[9], "falsified", row);
        rec.distrust_observed = parse_flag(fields[10], "distrust_observed", row);
        rec.accuracy = parse_flag(fields[11], "accuracy", row);
        rec.bonus = parse_int(fields[12], "bonus_cents", row);
        rec.cost = parse_int(fields[13], "cost_cents", row);
        rec.net = parse_int(fields[14], "net_cents", row);
        if (rec.round < 1) fail_row(row, "column round must be at least 1");
        if (rec.pair_id < 0 || rec.player_id < 0 || rec.endowment_size < 0 ||
            rec.unique_count < 0 || rec.shared_count < 0)
            fail_row(row, "count columns must be nonnegative");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<RoundRecord> import_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open log file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_records_csv(buf.str());
}

} // namespace infoshare::session
