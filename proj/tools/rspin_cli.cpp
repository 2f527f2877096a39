// Command-line front end for the exact r-spin engine: compute single
// correlators through either pipeline, dump potential correlator tables
// and recursion base tables, and run the full verification suite.
//
// Exit codes: 0 success, 1 check/value failure, 2 usage error.

#include <rspin/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace rspin;

/// Post-parse argument problems (malformed keys, out-of-range twists,
/// weight overflow).  Mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything the commands consume.  The operator window floor is not a
/// knob: it is fixed at -W-r-2, deep enough for every computation the
/// weight bound allows, and the suite checks results are stable under
/// deepening it further.
struct Config {
    int r = 2;
    int g = 0;
    bool ext = false;
    std::vector<std::string> ins;
    int k = 0;
    long weight = 0;      // 0 = per-r default
    long fit_weight = 0;  // 0 = weight + r
    std::string base_table;
    std::string format = "json";
    std::string pipeline = "A";
    std::string out;
    std::string report;
    std::string fault = "none";
    std::vector<int> rs{2, 3};
    int threads = 1;

    long resolved_weight() const {
        return weight > 0 ? weight : default_weight(r);
    }
    long resolved_fit_weight() const {
        const long W = resolved_weight();
        const long fitW = fit_weight > 0 ? fit_weight : default_fit_weight(r, W);
        if (fitW < W)
            throw UsageError("--fit-weight must be at least the weight bound");
        return fitW;
    }
};

std::pair<int, int> parse_insertion(const std::string& s) {
    const auto bad = [&]() {
        return UsageError("insertion must be 'a:d' with integers, got '" + s +
                          "'");
    };
    const auto pos = s.find(':');
    if (pos == std::string::npos || pos == 0 || pos + 1 == s.size())
        throw bad();
    try {
        std::size_t used = 0;
        const int a = std::stoi(s, &used);
        if (used != pos) throw bad();
        const std::string dpart = s.substr(pos + 1);
        const int d = std::stoi(dpart, &used);
        if (used != dpart.size()) throw bad();
        return {a, d};
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw bad();
    }
}

CorrelatorKey build_key(const Config& cfg) {
    std::vector<std::pair<int, int>> ins;
    ins.reserve(cfg.ins.size());
    for (const auto& s : cfg.ins) ins.push_back(parse_insertion(s));
    for (const auto& [a, d] : ins) {
        const int lo = cfg.ext ? -1 : 0;
        if (a < lo || a > cfg.r - 1)
            throw UsageError("twist " + std::to_string(a) +
                             " out of range for r=" + std::to_string(cfg.r));
        if (d < 0) throw UsageError("negative psi power");
    }
    if (cfg.ext) {
        if (cfg.g != 0)
            throw UsageError("extended-sector keys are genus 0");
        if (cfg.k != 0)
            throw UsageError("extended-sector keys carry no boundary points");
        return ext_key(std::move(ins));
    }
    if (cfg.g < 0 || cfg.g > 1)
        throw UsageError("--g must be 0 or 1");
    return open_key(cfg.g, std::move(ins), cfg.k);
}

/// Recursion base table: pipeline-A psi-free seeds plus the fitted
/// extended primaries, everything up to the fit weight.
CorrelatorTable internal_base_table(const GDSolution& sol, long fitW) {
    auto F0 = open_potential(sol, 0);
    auto fit = fit_extended_primaries(F0, fitW);
    CorrelatorTable table;
    seed_primaries(table, F0, fitW);
    table.merge(fit.primaries);
    return table;
}

void print_value(const Rat& v, const std::string& pipeline, long weight) {
    std::cout << rat_to_string(v) << "  [pipeline " << pipeline << ", weight "
              << weight << "]\n";
}

int run_correlator(const Config& cfg) {
    CorrelatorKey key = build_key(cfg);
    const long W = cfg.resolved_weight();

    bool gate = false;
    try {
        gate = dimension_gate(key, cfg.r);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!gate) {
        std::cout << "0 (dimension gate)\n";
        return 0;
    }
    if (key.weight(cfg.r) > W)
        throw UsageError("key weight " + std::to_string(key.weight(cfg.r)) +
                         " exceeds the reliable weight " + std::to_string(W) +
                         "; raise --weight");

    const bool want_a = cfg.pipeline == "A" || cfg.pipeline == "both";
    const bool want_b = cfg.pipeline == "B" || cfg.pipeline == "both";
    if (cfg.ext && want_a)
        throw UsageError(
            "extended-sector keys have no potential to extract from; use "
            "--pipeline B");

    std::optional<Rat> value_a, value_b;
    long weight_a = W, weight_b = W;

    // Pipeline B from a stored base table needs no hierarchy solve at all.
    const bool external_b = want_b && !cfg.base_table.empty();
    std::optional<GDSolution> sol;
    if (want_a || (want_b && !external_b)) {
        const long solveW = (want_b && !external_b)
                                ? cfg.resolved_fit_weight()
                                : W;
        sol.emplace(solve_gd(cfg.r, solveW));
        weight_a = weight_b = solveW;
    }

    if (want_a) {
        auto F = open_potential(*sol, key.g);
        value_a = extract_open(F, key.ins, key.k);
        print_value(*value_a, "A", weight_a);
    }
    if (want_b) {
        CorrelatorTable table = external_b
                                    ? load_base_table(cfg.base_table, cfg.r)
                                    : internal_base_table(*sol, weight_b);
        Evaluator ev(cfg.r, std::move(table));
        try {
            value_b = ev.eval(key);
        } catch (const NeedsBaseError& e) {
            std::cerr << "error: the base table cannot support this key: "
                      << e.what() << "\n";
            return 1;
        }
        print_value(*value_b, "B", weight_b);
    }
    if (value_a && value_b && *value_a != *value_b) {
        std::cerr << "error: pipeline mismatch on " << key.str() << ": A="
                  << rat_to_string(*value_a) << " B=" << rat_to_string(*value_b)
                  << "\n";
        return 1;
    }
    return 0;
}

void write_or_print(const std::string& out, const std::string& body) {
    if (out.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out + " for writing");
    f << body;
    if (!f) throw std::runtime_error("write to " + out + " failed");
}

int run_potential(const Config& cfg, long weight_arg) {
    if (cfg.g < 0 || cfg.g > 1) throw UsageError("--g must be 0 or 1");
    const long W = weight_arg < 0 ? default_weight(cfg.r) : weight_arg;

    std::vector<CorrelatorKey> keys;
    std::optional<OpenPotential> F;
    if (W > 0) {
        auto sol = solve_gd(cfg.r, W);
        F = open_potential(sol, cfg.g);
        keys = all_open_keys(cfg.r, cfg.g, W, true);
    }

    std::ostringstream body;
    if (cfg.format == "csv") {
        body << "g,ins,k,weight,value\n";
        for (const auto& key : keys) {
            body << key.g << ",";
            for (std::size_t i = 0; i < key.ins.size(); ++i) {
                if (i) body << " ";
                body << key.ins[i].first << ":" << key.ins[i].second;
            }
            body << "," << key.k << "," << key.weight(cfg.r) << ","
                 << rat_to_string(extract_open(*F, key.ins, key.k)) << "\n";
        }
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& key : keys) {
            nlohmann::ordered_json row;
            row["g"] = key.g;
            auto ins = nlohmann::ordered_json::array();
            for (const auto& [a, d] : key.ins) ins.push_back({a, d});
            row["ins"] = std::move(ins);
            row["k"] = key.k;
            row["weight"] = key.weight(cfg.r);
            row["value"] = rat_to_string(extract_open(*F, key.ins, key.k));
            arr.push_back(std::move(row));
        }
        body << arr.dump(2) << "\n";
    }
    write_or_print(cfg.out, body.str());
    return 0;
}

int run_verify(const Config& cfg) {
    VerifyOptions opts;
    opts.rs = cfg.rs;
    for (int r : opts.rs)
        if (r < 2) throw UsageError("--r entries must be >= 2");
    opts.weight = cfg.weight;
    opts.fit_weight = cfg.fit_weight;
    if (opts.weight > 0 && opts.fit_weight > 0 &&
        opts.fit_weight < opts.weight)
        throw UsageError("--fit-weight must be at least the weight bound");
    try {
        opts.fault = fault_from_string(cfg.fault);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    opts.threads = cfg.threads;

    VerifyReport rep = run_suite(opts);

    std::size_t failed = 0;
    for (const auto& c : rep.checks) {
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << "  ("
                  << c.parameters << ")  " << c.millis << "ms\n";
        if (!c.pass) {
            ++failed;
            std::cout << "       counterexample: " << c.counterexample << "\n";
        }
    }
    std::cout << rep.checks.size() << " checks, " << failed << " failed\n";
    if (!cfg.report.empty()) {
        std::ofstream f(cfg.report);
        if (!f)
            throw std::runtime_error("cannot open " + cfg.report +
                                     " for writing");
        f << rep.to_json().dump(2) << "\n";
    }
    return rep.all_pass() ? 0 : 1;
}

int run_dump(const Config& cfg) {
    const long fitW = cfg.resolved_fit_weight();
    auto sol = solve_gd(cfg.r, fitW);
    CorrelatorTable table = internal_base_table(sol, fitW);
    save_base_table(table, cfg.out);
    std::cout << "wrote " << table.size() << " base entries to " << cfg.out
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "exact open and closed r-spin intersection numbers: hierarchy "
        "extraction (pipeline A) and recursion closure (pipeline B)"};
    app.require_subcommand(1);
    Config cfg;
    long pot_weight = -1;  // sentinel: distinguish absent from an explicit 0

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--r", cfg.r, "spin parameter (>= 2)")
            ->required()
            ->check(CLI::Range(2, 16));
        cmd->add_option("--weight", cfg.weight,
                        "weight bound (default: r=2 -> 10, r=3 -> 9, else 8)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--fit-weight", cfg.fit_weight,
                        "recursion-instance bound for the extended fit "
                        "(default: max(weight + r, 12))")
            ->check(CLI::PositiveNumber);
    };

    auto* corr = app.add_subcommand(
        "correlator", "print one exact correlator value with provenance");
    add_common(corr);
    corr->add_option("--g", cfg.g, "genus (0 or 1)")->check(CLI::Range(0, 1));
    corr->add_flag("--ext", cfg.ext,
                   "extended closed sector (genus 0, no boundary)");
    corr->add_option("--ins", cfg.ins,
                     "insertion tau^a_d as 'a:d' (repeatable)");
    corr->add_option("--k", cfg.k, "boundary-point count")
        ->check(CLI::NonNegativeNumber);
    corr->add_option("--pipeline", cfg.pipeline,
                     "A (extraction), B (recursion), or both")
        ->check(CLI::IsMember({"A", "B", "both"}));
    corr->add_option("--base-table", cfg.base_table,
                     "base-table file for pipeline B (JSON lines)")
        ->envname("RSPIN_BASE_TABLE");

    auto* pot = app.add_subcommand(
        "potential", "write the full correlator table of one potential");
    pot->add_option("--r", cfg.r, "spin parameter (>= 2)")
        ->required()
        ->check(CLI::Range(2, 16));
    pot->add_option("--g", cfg.g, "genus (0 or 1)")
        ->required()
        ->check(CLI::Range(0, 1));
    pot->add_option("--weight", pot_weight,
                    "weight bound; 0 gives an empty table (default: per r)")
        ->check(CLI::NonNegativeNumber);
    pot->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    pot->add_option("--out", cfg.out, "output path (default: stdout)");

    auto* ver = app.add_subcommand(
        "verify", "run the full property suite and cross-check");
    ver->add_option("--r", cfg.rs, "spin parameters, e.g. 2,3")
        ->delimiter(',');
    ver->add_option("--weight", cfg.weight,
                    "weight bound for every r (default: per r)")
        ->check(CLI::PositiveNumber);
    ver->add_option("--fit-weight", cfg.fit_weight,
                    "recursion-instance bound for the extended fit "
                    "(default: max(weight + r, 12))")
        ->check(CLI::PositiveNumber);
    ver->add_option("--threads", cfg.threads,
                    "worker threads for the cross-check (results are "
                    "thread-count independent)")
        ->check(CLI::PositiveNumber);
    ver->add_option("--fault-inject", cfg.fault,
                    "deliberately corrupt an internal datum: none or flow")
        ->check(CLI::IsMember({"none", "flow"}));
    ver->add_option("--report", cfg.report, "write the JSON report here");

    auto* dump = app.add_subcommand(
        "dump", "write the recursion base table (seeds + fitted extended "
                "primaries) as JSON lines");
    add_common(dump);
    dump->add_option("--out", cfg.out, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (corr->parsed()) return run_correlator(cfg);
        if (pot->parsed()) return run_potential(cfg, pot_weight);
        if (ver->parsed()) return run_verify(cfg);
        if (dump->parsed()) return run_dump(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
