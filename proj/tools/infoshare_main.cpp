#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infoshare/config.hpp"
#include "infoshare/digest.hpp"
#include "infoshare/econometrics.hpp"
#include "infoshare/equilibrium.hpp"
#include "infoshare/session.hpp"

// Command line front end. Subcommands: simulate (run one session and write
// the round log), equilibrium (exact stage-game report), analyze (summaries
// and clustered regressions over round logs), replicate (multi-seed batch
// with the calibration checklist). Exit codes: 0 success, 1 rejected input
// (arguments, config, malformed logs), 2 any other failure.

namespace {

namespace econ = infoshare::econ;
namespace eqm = infoshare::equilibrium;
namespace sess = infoshare::session;
using json = nlohmann::ordered_json;

std::string percent(double x) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << 100 * x << '%';
    return out.str();
}

std::string fixed3(double x) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << x;
    return out.str();
}

infoshare::FalsifyConvention parse_falsify(const std::string& s) {
    if (s == "deceptive") return infoshare::FalsifyConvention::deceptive;
    if (s == "fabricate") return infoshare::FalsifyConvention::fabricate;
    throw std::invalid_argument("falsify: expected deceptive or fabricate, got '" + s + "'");
}

// Report destination shared by the non-simulate subcommands.
void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << text) || !out.flush())
        throw std::runtime_error("cannot write output file: " + out_path);
}

std::string summary_line(const econ::TreatmentSummary& s) {
    std::ostringstream out;
    out << "treatment " << s.treatment << ": mean shared " << fixed3(s.mean_shared)
        << ", falsified " << percent(s.falsification_rate) << ", accuracy "
        << percent(s.accuracy_rate) << ", both-zero " << percent(s.both_zero_rate)
        << " (" << s.records << " records)";
    return out.str();
}

json summary_json(const econ::TreatmentSummary& s) {
    return json{{"treatment", std::string(1, s.treatment)},
                {"records", s.records},
                {"mean_shared", s.mean_shared},
                {"falsification_rate", s.falsification_rate},
                {"accuracy_rate", s.accuracy_rate},
                {"both_zero_rate", s.both_zero_rate}};
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    int participants = 0;
    std::string sequence;
    std::string session_id;
    std::string falsify;
    int threads = 0;
    bool carryover = false;
    bool print_config = false;
    std::string out_path;
    std::string format = "text";
    CLI::Option* seed_opt = nullptr;
    CLI::Option* participants_opt = nullptr;
    CLI::Option* sequence_opt = nullptr;
    CLI::Option* session_id_opt = nullptr;
    CLI::Option* falsify_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

sess::SessionConfig effective_config(const SimulateOptions& opt) {
    sess::SessionConfig config;
    if (!opt.config_path.empty())
        config = infoshare::config::load_session_config(opt.config_path);
    if (opt.seed_opt->count() > 0) config.seed = opt.seed;
    if (opt.participants_opt->count() > 0) config.participants = opt.participants;
    if (opt.sequence_opt->count() > 0) config.sequence = sess::sequence_from_string(opt.sequence);
    if (opt.session_id_opt->count() > 0) config.session_id = opt.session_id;
    if (opt.falsify_opt->count() > 0) config.conventions.falsify = parse_falsify(opt.falsify);
    if (opt.threads_opt->count() > 0) config.threads = opt.threads;
    if (opt.carryover) config.carryover_lags = true;
    return config;
}

int cmd_simulate(const SimulateOptions& opt) {
    sess::SessionConfig config = effective_config(opt);
    if (opt.print_config) {
        std::cout << infoshare::config::session_config_to_json(config).dump(2) << '\n';
        return 0;
    }

    sess::SessionLog log = sess::run_session(config);
    std::string csv = sess::render_log_csv(log);
    std::string digest = "fnv1a64:" + infoshare::fnv1a64_hex(csv);
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path, std::ios::binary);
        if (!out || !(out << csv) || !out.flush())
            throw std::runtime_error("cannot write log file: " + opt.out_path);
    }

    std::vector<econ::TreatmentSummary> summaries = econ::summarize_treatments(log.records);
    if (opt.format == "json") {
        json report{{"session_id", log.session_id},
                    {"seed", config.seed},
                    {"participants", config.participants},
                    {"sequence", sess::to_string(log.sequence)},
                    {"paid_round", log.paid_round},
                    {"records", log.records.size()},
                    {"treatments", json::array()},
                    {"digest", digest}};
        for (const econ::TreatmentSummary& s : summaries)
            report["treatments"].push_back(summary_json(s));
        if (!opt.out_path.empty()) report["log_path"] = opt.out_path;
        std::cout << report.dump(2) << '\n';
        return 0;
    }

    std::cout << "session " << log.session_id << ": seed " << config.seed << ", "
              << config.participants << " participants, sequence "
              << sess::to_string(log.sequence) << ", " << log.records.size()
              << " records, paid round " << log.paid_round << '\n';
    for (const econ::TreatmentSummary& s : summaries) std::cout << summary_line(s) << '\n';
    if (!opt.out_path.empty()) std::cout << "log written: " << opt.out_path << '\n';
    std::cout << "digest: " << digest << '\n';
    return 0;
}

// -------------------------------------------------------------- equilibrium

struct EquilibriumOptions {
    std::string treatment = "A";
    std::string convention = "deceptive";
    std::string format = "text";
    std::string out_path;
};

std::string equilibrium_text(const eqm::Bimatrix& matrix, const eqm::EquilibriumReport& report) {
    const auto strategies = eqm::enumerate_strategies();
    auto profile = [&](std::pair<int, int> rc) {
        const eqm::Cell& cell = matrix.grid.at(rc.first, rc.second);
        return "(" + eqm::to_string(strategies[rc.first]) + ", " +
               eqm::to_string(strategies[rc.second]) + ") -> (" +
               eqm::payoff_to_string(cell.first) + ", " + eqm::payoff_to_string(cell.second) +
               ")";
    };

    std::ostringstream out;
    out << "stage game, treatment " << matrix.treatment.id << " ("
        << infoshare::to_string(matrix.treatment.incentive) << ", "
        << infoshare::to_string(matrix.treatment.endowment_mode)
        << "), falsification convention " << infoshare::to_string(matrix.convention) << '\n';
    out << "pure Nash equilibria (" << report.pure_nash.size() << "):\n";
    for (auto rc : report.pure_nash) out << "  " << profile(rc) << '\n';
    out << "Pareto-optimal profiles (" << report.pareto_optimal.size() << "):\n";
    for (auto rc : report.pareto_optimal) out << "  " << profile(rc) << '\n';
    out << "falsifying strict best response: "
        << (report.falsify_strict_best_response ? "yes" : "no") << '\n';
    for (auto [falsifier, opponent] : report.falsify_witnesses)
        out << "  " << eqm::to_string(strategies[falsifier]) << " against "
            << eqm::to_string(strategies[opponent]) << '\n';

    // Payoff table, columns sized to their widest cell.
    std::vector<std::string> labels;
    for (auto s : strategies) labels.push_back(eqm::to_string(s));
    std::size_t label_width = 0;
    for (const std::string& l : labels) label_width = std::max(label_width, l.size());
    std::vector<std::vector<std::string>> cells(eqm::kNumStrategies);
    std::vector<std::size_t> widths(eqm::kNumStrategies);
    for (int c = 0; c < eqm::kNumStrategies; ++c) widths[c] = labels[c].size();
    for (int r = 0; r < eqm::kNumStrategies; ++r) {
        for (int c = 0; c < eqm::kNumStrategies; ++c) {
            const eqm::Cell& cell = matrix.grid.at(r, c);
            cells[r].push_back("(" + eqm::payoff_to_string(cell.first) + ", " +
                               eqm::payoff_to_string(cell.second) + ")");
            widths[c] = std::max(widths[c], cells[r][c].size());
        }
    }
    out << "expected payoffs in cents (row, column):\n";
    out << std::string(label_width + 2, ' ');
    for (int c = 0; c < eqm::kNumStrategies; ++c)
        out << std::setw(static_cast<int>(widths[c]) + 2) << labels[c];
    out << '\n';
    for (int r = 0; r < eqm::kNumStrategies; ++r) {
        out << std::setw(static_cast<int>(label_width) + 2) << labels[r];
        for (int c = 0; c < eqm::kNumStrategies; ++c)
            out << std::setw(static_cast<int>(widths[c]) + 2) << cells[r][c];
        out << '\n';
    }
    return out.str();
}

int cmd_equilibrium(const EquilibriumOptions& opt) {
    infoshare::TreatmentSpec treatment = infoshare::TreatmentSpec::for_id(opt.treatment[0]);
    infoshare::FalsifyConvention convention = parse_falsify(opt.convention);
    eqm::Bimatrix matrix = eqm::build_bimatrix(treatment, convention);
    eqm::EquilibriumReport report = eqm::analyze(matrix);
    if (opt.format == "json")
        emit(eqm::report_json(matrix, report), opt.out_path);
    else
        emit(equilibrium_text(matrix, report), opt.out_path);
    return 0;
}

// ------------------------------------------------------------------ analyze

struct AnalyzeOptions {
    std::vector<std::string> logs;
    std::string outcome = "shared";
    std::string format = "text";
    std::string out_path;
};

econ::Outcome parse_outcome(const std::string& s) {
    if (s == "shared") return econ::Outcome::shared;
    if (s == "falsified") return econ::Outcome::falsified;
    if (s == "accuracy") return econ::Outcome::accuracy;
    throw std::invalid_argument("outcome: expected shared, falsified or accuracy, got '" + s +
                                "'");
}

std::vector<infoshare::RoundRecord> load_logs(const std::vector<std::string>& paths) {
    std::vector<infoshare::RoundRecord> records;
    for (const std::string& path : paths) {
        try {
            std::vector<infoshare::RoundRecord> part = sess::import_records(path);
            records.insert(records.end(), part.begin(), part.end());
        } catch (const std::invalid_argument& e) {
            std::string what = e.what();
            if (what.rfind("cannot open", 0) == 0) throw;
            throw std::invalid_argument(path + ": " + what);
        }
    }
    return records;
}

int cmd_analyze(const AnalyzeOptions& opt) {
    std::vector<infoshare::RoundRecord> records = load_logs(opt.logs);
    econ::Outcome outcome = parse_outcome(opt.outcome);

    std::set<std::string> sessions;
    std::set<std::string> sequences;
    for (const infoshare::RoundRecord& rec : records) {
        sessions.insert(rec.session_id);
        sequences.insert(rec.sequence);
    }
    std::vector<econ::TreatmentSummary> summaries = econ::summarize_treatments(records);

    struct Fit {
        char treatment;
        econ::RegressionResult result;
        std::string error; // set when the fit was refused
    };
    std::vector<Fit> fits;
    for (const econ::TreatmentSummary& s : summaries) {
        try {
            econ::PanelDataset panel = econ::build_panel(records, s.treatment);
            fits.push_back({s.treatment, econ::fit_clustered(panel, outcome), ""});
        } catch (const std::invalid_argument& e) {
            fits.push_back({s.treatment, {}, e.what()});
        }
    }
    std::vector<econ::OrderEffectRow> order_effects;
    if (sequences.size() == 2) order_effects = econ::order_effect_summary(records);

    if (opt.format == "json") {
        json report{{"records", records.size()},
                    {"sessions", json::array()},
                    {"treatments", json::array()},
                    {"regressions", json::array()}};
        for (const std::string& id : sessions) report["sessions"].push_back(id);
        for (const econ::TreatmentSummary& s : summaries)
            report["treatments"].push_back(summary_json(s));
        for (const Fit& fit : fits) {
            json entry{{"treatment", std::string(1, fit.treatment)},
                       {"outcome", econ::to_string(outcome)}};
            if (!fit.error.empty()) {
                entry["error"] = fit.error;
            } else {
                entry["n"] = fit.result.n;
                entry["clusters"] = fit.result.n_clusters;
                entry["coefficients"] = json::array();
                Eigen::VectorXd se = fit.result.se();
                for (std::size_t i = 0; i < fit.result.names.size(); ++i)
                    entry["coefficients"].push_back(json{{"name", fit.result.names[i]},
                                                         {"estimate", fit.result.coef[i]},
                                                         {"se", se[i]}});
            }
            report["regressions"].push_back(entry);
        }
        if (!order_effects.empty()) {
            report["order_effects"] = json::array();
            for (const econ::OrderEffectRow& row : order_effects)
                report["order_effects"].push_back(
                    json{{"treatment", std::string(1, row.treatment)},
                         {"mean_abcd", row.mean_abcd},
                         {"mean_badc", row.mean_badc},
                         {"wald", json{{"statistic", row.equality.statistic},
                                       {"df", row.equality.df},
                                       {"p_value", row.equality.p_value}}}});
        }
        emit(report.dump(2) + "\n", opt.out_path);
        return 0;
    }

    std::ostringstream out;
    out << "parsed " << records.size() << " records from " << opt.logs.size() << " file"
        << (opt.logs.size() == 1 ? "" : "s") << " (" << sessions.size() << " session"
        << (sessions.size() == 1 ? "" : "s") << ")\n";
    for (const econ::TreatmentSummary& s : summaries) out << summary_line(s) << '\n';
    for (const Fit& fit : fits) {
        out << "reaction function for " << econ::to_string(outcome) << " outcome, treatment "
            << fit.treatment;
        if (!fit.error.empty()) {
            out << ": not estimated (" << fit.error << ")\n";
            continue;
        }
        out << " (n = " << fit.result.n << ", clusters = " << fit.result.n_clusters << "):\n";
        std::size_t name_width = 0;
        for (const std::string& name : fit.result.names)
            name_width = std::max(name_width, name.size());
        Eigen::VectorXd se = fit.result.se();
        for (std::size_t i = 0; i < fit.result.names.size(); ++i) {
            out << "  " << std::left << std::setw(static_cast<int>(name_width) + 2)
                << fit.result.names[i] << std::right << std::fixed << std::setprecision(4)
                << std::setw(9) << fit.result.coef[i] << "  (se "
                << std::setprecision(4) << se[i] << ")\n";
            out.unsetf(std::ios::floatfield);
        }
    }
    if (!order_effects.empty()) {
        out << "order effects (mean shared per sequence):\n";
        for (const econ::OrderEffectRow& row : order_effects)
            out << "  treatment " << row.treatment << ": ABCD " << fixed3(row.mean_abcd)
                << ", BADC " << fixed3(row.mean_badc) << ", Wald chi2("
                << row.equality.df << ") = " << std::setprecision(4)
                << row.equality.statistic << ", p = " << std::setprecision(4)
                << row.equality.p_value << '\n';
    } else {
        out << "order effects: skipped (single sequence in the logs)\n";
    }
    emit(out.str(), opt.out_path);
    return 0;
}

// ---------------------------------------------------------------- replicate

struct ReplicateOptions {
    int seeds = 10;
    std::uint64_t base_seed = 1;
    int participants = 100;
    int threads = 1;
    std::string out_dir;
    std::string format = "text";
    std::string out_path;
};

struct Check {
    std::string name;
    bool ok = false;
    std::string detail;
};

// Averages per-treatment summaries over equally sized runs and scores them
// against the calibration targets.
std::vector<Check> checklist(const std::map<char, econ::TreatmentSummary>& averages) {
    std::vector<Check> checks;
    auto value = [&](char id, auto member) { return averages.at(id).*member; };
    for (char id : {'A', 'B', 'C', 'D'}) {
        infoshare::agents::CalibrationTargets t = infoshare::agents::calibration_targets(id);
        double mean = value(id, &econ::TreatmentSummary::mean_shared);
        checks.push_back({std::string("mean shared ") + id,
                          std::abs(mean - t.mean_shared) <= 0.15,
                          fixed3(mean) + " vs target " + fixed3(t.mean_shared) +
                              " (tolerance 0.15)"});
    }
    auto shared = [&](char id) { return value(id, &econ::TreatmentSummary::mean_shared); };
    checks.push_back({"share ordering A > B", shared('A') > shared('B'),
                      fixed3(shared('A')) + " vs " + fixed3(shared('B'))});
    checks.push_back({"share ordering C > D", shared('C') > shared('D'),
                      fixed3(shared('C')) + " vs " + fixed3(shared('D'))});
    for (char id : {'A', 'B', 'C', 'D'}) {
        infoshare::agents::CalibrationTargets t = infoshare::agents::calibration_targets(id);
        double rate = value(id, &econ::TreatmentSummary::both_zero_rate);
        checks.push_back({std::string("both-zero rate ") + id,
                          std::abs(rate - t.both_zero_rate) <= 0.05,
                          percent(rate) + " vs target " + percent(t.both_zero_rate) +
                              " (tolerance 5.0pp)"});
    }
    auto zero = [&](char id) { return value(id, &econ::TreatmentSummary::both_zero_rate); };
    checks.push_back({"both-zero ordering A < B < C < D",
                      zero('A') < zero('B') && zero('B') < zero('C') && zero('C') < zero('D'),
                      percent(zero('A')) + " < " + percent(zero('B')) + " < " +
                          percent(zero('C')) + " < " + percent(zero('D'))});
    auto acc = [&](char id) { return value(id, &econ::TreatmentSummary::accuracy_rate); };
    double coop = (acc('A') + acc('C')) / 2;
    double tournament = (acc('B') + acc('D')) / 2;
    checks.push_back({"cooperative vs tournament accuracy gap",
                      coop - tournament >= 0.10,
                      percent(coop) + " vs " + percent(tournament) + " (gap " +
                          percent(coop - tournament) + ", need 10.0%)"});
    checks.push_back({"tournament accuracy level", tournament >= 0.40 && tournament <= 0.60,
                      percent(tournament) + " within [40.0%, 60.0%]"});
    return checks;
}

int cmd_replicate(const ReplicateOptions& opt) {
    namespace fs = std::filesystem;
    if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);

    struct Run {
        std::uint64_t seed;
        sess::Sequence sequence;
        std::size_t records;
        std::string digest;
    };
    std::vector<Run> runs;
    std::map<char, econ::TreatmentSummary> totals;
    for (int i = 0; i < opt.seeds; ++i) {
        sess::SessionConfig config;
        config.seed = opt.base_seed + static_cast<std::uint64_t>(i);
        config.participants = opt.participants;
        config.sequence = i % 2 == 0 ? sess::Sequence::ABCD : sess::Sequence::BADC;
        config.threads = opt.threads;
        sess::SessionLog log = sess::run_session(config);
        std::string csv = sess::render_log_csv(log);
        runs.push_back({config.seed, config.sequence, log.records.size(),
                        "fnv1a64:" + infoshare::fnv1a64_hex(csv)});
        if (!opt.out_dir.empty()) {
            fs::path path = fs::path(opt.out_dir) /
                            (log.session_id + "_" + sess::to_string(log.sequence) + ".csv");
            std::ofstream out(path, std::ios::binary);
            if (!out || !(out << csv) || !out.flush())
                throw std::runtime_error("cannot write log file: " + path.string());
        }
        for (const econ::TreatmentSummary& s : econ::summarize_treatments(log.records)) {
            econ::TreatmentSummary& total = totals[s.treatment];
            total.treatment = s.treatment;
            total.records += s.records;
            total.mean_shared += s.mean_shared;
            total.falsification_rate += s.falsification_rate;
            total.accuracy_rate += s.accuracy_rate;
            total.both_zero_rate += s.both_zero_rate;
        }
    }
    std::map<char, econ::TreatmentSummary> averages = totals;
    for (auto& [id, s] : averages) {
        s.mean_shared /= opt.seeds;
        s.falsification_rate /= opt.seeds;
        s.accuracy_rate /= opt.seeds;
        s.both_zero_rate /= opt.seeds;
    }
    std::vector<Check> checks;
    if (averages.size() == 4) checks = checklist(averages);
    std::size_t ok_count = 0;
    for (const Check& c : checks) ok_count += c.ok ? 1 : 0;

    if (opt.format == "json") {
        json report{{"seeds", opt.seeds},
                    {"base_seed", opt.base_seed},
                    {"participants", opt.participants},
                    {"runs", json::array()},
                    {"averages", json::array()},
                    {"checks", json::array()}};
        for (const Run& run : runs)
            report["runs"].push_back(json{{"seed", run.seed},
                                          {"sequence", sess::to_string(run.sequence)},
                                          {"records", run.records},
                                          {"digest", run.digest}});
        for (const auto& [id, s] : averages) report["averages"].push_back(summary_json(s));
        for (const Check& c : checks)
            report["checks"].push_back(json{{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
        report["checks_passed"] = ok_count;
        emit(report.dump(2) + "\n", opt.out_path);
        return 0;
    }

    std::ostringstream out;
    out << "replication batch: " << opt.seeds << " seeds from " << opt.base_seed << ", "
        << opt.participants << " participants per session\n";
    for (const Run& run : runs)
        out << "run seed " << run.seed << " " << sess::to_string(run.sequence) << ": "
            << run.records << " records, digest " << run.digest << '\n';
    out << "averages over " << opt.seeds << " runs:\n";
    for (const auto& [id, s] : averages) out << summary_line(s) << '\n';
    if (!checks.empty()) {
        out << "calibration checklist:\n";
        for (const Check& c : checks)
            out << (c.ok ? "[ok]  " : "[off] ") << c.name << ": " << c.detail << '\n';
        out << "checklist: " << ok_count << " of " << checks.size() << " ok\n";
    }
    emit(out.str(), opt.out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"costly information sharing: simulator, stage-game solver and log analytics"};
    app.require_subcommand(1);

    SimulateOptions sim;
    CLI::App* simulate = app.add_subcommand("simulate", "run one session and write the round log");
    simulate->add_option("--config", sim.config_path, "session config JSON; flags override it");
    sim.seed_opt = simulate->add_option("--seed", sim.seed, "master seed");
    sim.participants_opt =
        simulate->add_option("--participants", sim.participants, "participant count (even)");
    sim.sequence_opt =
        simulate->add_option("--sequence", sim.sequence, "treatment order: ABCD or BADC");
    sim.session_id_opt = simulate->add_option("--session-id", sim.session_id, "log session id");
    sim.falsify_opt = simulate->add_option("--falsify", sim.falsify,
                                           "falsified-row convention: deceptive or fabricate");
    sim.threads_opt = simulate->add_option("--threads", sim.threads, "worker threads");
    simulate->add_flag("--carryover", sim.carryover,
                       "seed each treatment's lags from the previous one");
    simulate->add_flag("--print-config", sim.print_config,
                       "print the effective config JSON and exit");
    simulate->add_option("--out", sim.out_path, "write the round log CSV here");
    simulate->add_option("--format", sim.format, "summary format")
        ->check(CLI::IsMember({"text", "json"}));

    EquilibriumOptions eq;
    CLI::App* equilibrium =
        app.add_subcommand("equilibrium", "exact stage-game equilibrium report");
    equilibrium->add_option("--treatment", eq.treatment, "treatment id (partition: A or B)")
        ->check(CLI::IsMember({"A", "B", "C", "D"}));
    equilibrium->add_option("--convention", eq.convention,
                            "falsified-row convention: deceptive or fabricate");
    equilibrium->add_option("--format", eq.format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    equilibrium->add_option("--out", eq.out_path, "write the report here instead of stdout");

    AnalyzeOptions ana;
    CLI::App* analyze =
        app.add_subcommand("analyze", "summaries and clustered regressions over round logs");
    analyze->add_option("logs", ana.logs, "round log CSV files")->required();
    analyze->add_option("--outcome", ana.outcome,
                        "regression outcome: shared, falsified or accuracy");
    analyze->add_option("--format", ana.format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    analyze->add_option("--out", ana.out_path, "write the report here instead of stdout");

    ReplicateOptions rep;
    CLI::App* replicate =
        app.add_subcommand("replicate", "multi-seed batch with the calibration checklist");
    replicate->add_option("--seeds", rep.seeds, "number of sessions")
        ->check(CLI::PositiveNumber);
    replicate->add_option("--base-seed", rep.base_seed, "first seed; runs use consecutive seeds");
    replicate->add_option("--participants", rep.participants, "participants per session");
    replicate->add_option("--threads", rep.threads, "worker threads per session");
    replicate->add_option("--out-dir", rep.out_dir, "write each run's round log CSV here");
    replicate->add_option("--format", rep.format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    replicate->add_option("--out", rep.out_path, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*equilibrium) return cmd_equilibrium(eq);
        if (*analyze) return cmd_analyze(ana);
        if (*replicate) return cmd_replicate(rep);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
