#include "infoshare/config.hpp"

#include <fstream>

namespace infoshare::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& context, const std::string& what) {
    throw std::invalid_argument(context.empty() ? what : context + ": " + what);
}

void require_object(const json& j, const std::string& context) {
    if (!j.is_object()) fail(context, "expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* name : allowed) known = known || key == name;
        if (!known) fail(context, "unknown key '" + key + "'");
    }
}

double get_number(const json& j, const char* key, double fallback,
                  const std::string& context) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) fail(context + "." + key, "must be a number");
    return v.get<double>();
}

bool get_bool(const json& j, const char* key, bool fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(context + "." + key, "must be a boolean");
    return v.get<bool>();
}

int get_int(const json& j, const char* key, int fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(context + "." + key, "must be an integer");
    return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback,
                       const std::string& context) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) fail(context + "." + key, "must be a string");
    return v.get<std::string>();
}

const std::initializer_list<const char*> kWeightKeys = {
    "intercept",       "own_shared",   "own_falsified", "other_shared",
    "other_falsified", "own_accuracy", "other_accuracy", "own_unique",
    "other_unique"};

json weights_to_json(const agents::EquationWeights& w) {
    return json{{"intercept", w.intercept},
                {"own_shared", w.own_shared},
                {"own_falsified", w.own_falsified},
                {"other_shared", w.other_shared},
                {"other_falsified", w.other_falsified},
                {"own_accuracy", w.own_accuracy},
                {"other_accuracy", w.other_accuracy},
                {"own_unique", w.own_unique},
                {"other_unique", w.other_unique}};
}

agents::EquationWeights weights_from_json(const json& j, const std::string& context) {
    require_object(j, context);
    check_keys(j, kWeightKeys, context);
    agents::EquationWeights w;
    w.intercept = get_number(j, "intercept", 0, context);
    w.own_shared = get_number(j, "own_shared", 0, context);
    w.own_falsified = get_number(j, "own_falsified", 0, context);
    w.other_shared = get_number(j, "other_shared", 0, context);
    w.other_falsified = get_number(j, "other_falsified", 0, context);
    w.own_accuracy = get_number(j, "own_accuracy", 0, context);
    w.other_accuracy = get_number(j, "other_accuracy", 0, context);
    w.own_unique = get_number(j, "own_unique", 0, context);
    w.other_unique = get_number(j, "other_unique", 0, context);
    return w;
}

json lags_to_json(const agents::LaggedState& s) {
    return json{{"own_shared_lag", s.own_shared_lag},
                {"own_falsified_lag", s.own_falsified_lag},
                {"other_shared_lag", s.other_shared_lag},
                {"other_falsified_lag", s.other_falsified_lag},
                {"own_accuracy_lag", s.own_accuracy_lag},
                {"other_accuracy_lag", s.other_accuracy_lag},
                {"own_unique_lag", s.own_unique_lag},
                {"other_unique_lag", s.other_unique_lag},
                {"first_round", s.first_round}};
}

agents::LaggedState lags_from_json(const json& j, const std::string& context) {
    require_object(j, context);
    check_keys(j,
               {"own_shared_lag", "own_falsified_lag", "other_shared_lag",
                "other_falsified_lag", "own_accuracy_lag", "other_accuracy_lag",
                "own_unique_lag", "other_unique_lag", "first_round"},
               context);
    agents::LaggedState s;
    s.own_shared_lag = get_number(j, "own_shared_lag", 0, context);
    s.own_falsified_lag = get_bool(j, "own_falsified_lag", false, context);
    s.other_shared_lag = get_number(j, "other_shared_lag", 0, context);
    s.other_falsified_lag = get_bool(j, "other_falsified_lag", false, context);
    s.own_accuracy_lag = get_bool(j, "own_accuracy_lag", false, context);
    s.other_accuracy_lag = get_bool(j, "other_accuracy_lag", false, context);
    s.own_unique_lag = get_number(j, "own_unique_lag", 0, context);
    s.other_unique_lag = get_number(j, "other_unique_lag", 0, context);
    s.first_round = get_bool(j, "first_round", true, context);
    return s;
}

char treatment_key(const std::string& key, const std::string& context) {
    if (key.size() != 1 || key[0] < 'A' || key[0] > 'D')
        fail(context, "key '" + key + "' must be one of A,B,C,D");
    return key[0];
}

const char* kind_name(session::AgentSpec::Kind kind) {
    switch (kind) {
        case session::AgentSpec::Kind::calibrated: return "calibrated";
        case session::AgentSpec::Kind::static_nash: return "static_nash";
        case session::AgentSpec::Kind::uniform_random: return "uniform_random";
        case session::AgentSpec::Kind::conditional: return "conditional";
    }
    return "?";
}

json agent_to_json(const session::AgentSpec& spec) {
    json j{{"kind", kind_name(spec.kind)}};
    switch (spec.kind) {
        case session::AgentSpec::Kind::static_nash:
            j["share_n"] = spec.share_n;
            j["trust"] = spec.trust;
            break;
        case session::AgentSpec::Kind::conditional:
            j["coefficients"] = coefficients_to_json(spec.coeffs);
            break;
        case session::AgentSpec::Kind::calibrated:
            if (!spec.overrides.empty()) {
                json overrides = json::object();
                for (const auto& [id, coeffs] : spec.overrides)
                    overrides[std::string(1, id)] = coefficients_to_json(coeffs);
                j["overrides"] = overrides;
            }
            break;
        case session::AgentSpec::Kind::uniform_random: break;
    }
    return j;
}

session::AgentSpec agent_from_json(const json& j, const std::string& context) {
    require_object(j, context);
    check_keys(j, {"kind", "share_n", "trust", "coefficients", "overrides"}, context);

    session::AgentSpec spec;
    std::string kind = get_string(j, "kind", "calibrated", context);
    if (kind == "calibrated") {
        spec.kind = session::AgentSpec::Kind::calibrated;
    } else if (kind == "static_nash") {
        spec.kind = session::AgentSpec::Kind::static_nash;
    } else if (kind == "uniform_random") {
        spec.kind = session::AgentSpec::Kind::uniform_random;
    } else if (kind == "conditional") {
        spec.kind = session::AgentSpec::Kind::conditional;
    } else {
        fail(context + ".kind", "unknown agent kind '" + kind + "'");
    }

    spec.share_n = get_int(j, "share_n", 0, context);
    spec.trust = get_bool(j, "trust", true, context);
    if (j.contains("coefficients"))
        spec.coeffs = coefficients_from_json(j.at("coefficients"), context + ".coefficients");
    if (j.contains("overrides")) {
        const json& overrides = j.at("overrides");
        require_object(overrides, context + ".overrides");
        for (const auto& [key, value] : overrides.items()) {
            char id = treatment_key(key, context + ".overrides");
            spec.overrides[id] =
                coefficients_from_json(value, context + ".overrides." + key);
        }
    }
    return spec;
}

} // namespace

json coefficients_to_json(const agents::ReactionCoefficients& c) {
    return json{{"share", weights_to_json(c.share)},
                {"falsify", weights_to_json(c.falsify)},
                {"noise_scale", c.noise_scale},
                {"trust_prob", c.trust_prob},
                {"falsify_base", c.falsify_base},
                {"rounding", c.rounding == agents::Rounding::nearest ? "nearest"
                                                                     : "randomized"}};
}

agents::ReactionCoefficients coefficients_from_json(const json& j,
                                                    const std::string& context) {
    require_object(j, context);
    check_keys(j, {"share", "falsify", "noise_scale", "trust_prob", "falsify_base",
                   "rounding"},
               context);
    agents::ReactionCoefficients c;
    if (j.contains("share")) c.share = weights_from_json(j.at("share"), context + ".share");
    if (j.contains("falsify"))
        c.falsify = weights_from_json(j.at("falsify"), context + ".falsify");
    c.noise_scale = get_number(j, "noise_scale", 0, context);
    c.trust_prob = get_number(j, "trust_prob", 1, context);
    c.falsify_base = get_number(j, "falsify_base", 0, context);
    std::string rounding = get_string(j, "rounding", "nearest", context);
    if (rounding == "nearest") {
        c.rounding = agents::Rounding::nearest;
    } else if (rounding == "randomized") {
        c.rounding = agents::Rounding::randomized;
    } else {
        fail(context + ".rounding", "must be 'nearest' or 'randomized'");
    }
    return c;
}

json session_config_to_json(const session::SessionConfig& config) {
    json j{{"seed", config.seed},
           {"participants", config.participants},
           {"sequence", session::to_string(config.sequence)},
           {"session_id", config.session_id},
           {"threads", config.threads},
           {"eval_player2_first", config.eval_player2_first},
           {"carryover_lags", config.carryover_lags},
           {"conventions",
            {{"falsify", to_string(config.conventions.falsify)},
             {"tie_break", config.conventions.tie_break == TieBreak::random
                               ? "random"
                               : "player_one"}}}};
    json roster = json::array();
    for (const session::AgentSpec& spec : config.roster) roster.push_back(agent_to_json(spec));
    j["roster"] = roster;
    if (!config.initial_lag_overrides.empty()) {
        json lags = json::object();
        for (const auto& [id, state] : config.initial_lag_overrides)
            lags[std::string(1, id)] = lags_to_json(state);
        j["initial_lag_overrides"] = lags;
    }
    return j;
}

session::SessionConfig session_config_from_json(const json& j) {
    require_object(j, "config");
    check_keys(j,
               {"seed", "participants", "sequence", "session_id", "threads",
                "eval_player2_first", "carryover_lags", "conventions", "roster",
                "initial_lag_overrides"},
               "config");

    session::SessionConfig config;
    if (j.contains("seed")) {
        const json& seed = j.at("seed");
        if (!seed.is_number_integer() ||
            (seed.is_number_integer() && !seed.is_number_unsigned() &&
             seed.get<std::int64_t>() < 0))
            fail("config.seed", "must be a nonnegative integer");
        config.seed = seed.get<std::uint64_t>();
    }
    config.participants = get_int(j, "participants", config.participants, "config");
    if (j.contains("sequence")) {
        std::string sequence = get_string(j, "sequence", "", "config");
        try {
            config.sequence = session::sequence_from_string(sequence);
        } catch (const std::invalid_argument&) {
            fail("config.sequence", "must be 'ABCD' or 'BADC'");
        }
    }
    config.session_id = get_string(j, "session_id", "", "config");
    config.threads = get_int(j, "threads", config.threads, "config");
    config.eval_player2_first =
        get_bool(j, "eval_player2_first", config.eval_player2_first, "config");
    config.carryover_lags = get_bool(j, "carryover_lags", config.carryover_lags, "config");

    if (j.contains("conventions")) {
        const json& conv = j.at("conventions");
        require_object(conv, "config.conventions");
        check_keys(conv, {"falsify", "tie_break"}, "config.conventions");
        std::string falsify = get_string(conv, "falsify", "deceptive", "config.conventions");
        if (falsify == "deceptive") {
            config.conventions.falsify = FalsifyConvention::deceptive;
        } else if (falsify == "fabricate") {
            config.conventions.falsify = FalsifyConvention::fabricate;
        } else {
            fail("config.conventions.falsify", "must be 'deceptive' or 'fabricate'");
        }
        std::string tie = get_string(conv, "tie_break", "random", "config.conventions");
        if (tie == "random") {
            config.conventions.tie_break = TieBreak::random;
        } else if (tie == "player_one") {
            config.conventions.tie_break = TieBreak::player_one;
        } else {
            fail("config.conventions.tie_break", "must be 'random' or 'player_one'");
        }
    }

    if (j.contains("roster")) {
        const json& roster = j.at("roster");
        if (!roster.is_array()) fail("config.roster", "expected an array");
        for (std::size_t i = 0; i < roster.size(); ++i)
            config.roster.push_back(agent_from_json(
                roster[i], "config.roster[" + std::to_string(i) + "]"));
    }

    if (j.contains("initial_lag_overrides")) {
        const json& lags = j.at("initial_lag_overrides");
        require_object(lags, "config.initial_lag_overrides");
        for (const auto& [key, value] : lags.items()) {
            char id = treatment_key(key, "config.initial_lag_overrides");
            config.initial_lag_overrides[id] =
                lags_from_json(value, "config.initial_lag_overrides." + key);
        }
    }
    return config;
}

session::SessionConfig load_session_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
    return session_config_from_json(j);
}

} // namespace infoshare::config
