#pragma once

#include "budgeted/arm_io.hpp"
#include "budgeted/evaluator.hpp"
#include "budgeted/oracle.hpp"
#include "budgeted/policies.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace budgeted {

enum class NumericMode { exact, floating };

inline std::string format_number(const Rational& q, NumericMode m) {
    return m == NumericMode::exact ? to_string(q) : format_double(to_double(q));
}

enum class RunMode { budgeted, horizon, discounted };

inline std::string run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::budgeted: return "budgeted";
        case RunMode::horizon: return "horizon";
        case RunMode::discounted: return "discounted";
    }
    return "?";
}

struct ExperimentConfig {
    std::vector<ArmDag> arms;
    std::vector<std::string> arm_sources;  ///< "inline[i]" or the file path, for diagnostics
    RunMode mode = RunMode::budgeted;
    std::vector<int> h;  ///< budgets, horizons, or evaluation horizons (discounted)
    std::optional<DiscountSequence> discount;
    std::vector<StrategyKind> strategies;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    NumericMode numeric = NumericMode::exact;
    bool oracle = false;
    std::string out;
};

/// Parses an experiment config; relative arm paths resolve against base_dir.
inline ExperimentConfig parse_config(const json& j, const std::string& base_dir = ".") {
    if (!j.is_object()) throw ParseError("<root>", "config must be an object");
    ExperimentConfig c;

    const json& arms = required(j, "arms", "");
    if (!arms.is_array() || arms.empty()) throw ParseError("arms", "expected a nonempty array");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const std::string where = "arms[" + std::to_string(i) + "]";
        if (arms[i].is_string()) {
            std::filesystem::path p = arms[i].get<std::string>();
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            c.arms.push_back(load_arm(p.string()));
            c.arm_sources.push_back(p.string());
        } else {
            c.arms.push_back(arm_from_json(arms[i], where));
            c.arm_sources.push_back(where);
        }
    }

    const std::string mode = j.value("mode", std::string("budgeted"));
    if (mode == "budgeted")
        c.mode = RunMode::budgeted;
    else if (mode == "horizon")
        c.mode = RunMode::horizon;
    else if (mode == "discounted")
        c.mode = RunMode::discounted;
    else
        throw ParseError("mode", "expected budgeted, horizon or discounted");

    const json& h = c.mode == RunMode::discounted ? required(j, "eval_horizon", "") : required(j, "h", "");
    const std::string hname = c.mode == RunMode::discounted ? "eval_horizon" : "h";
    if (h.is_array()) {
        for (std::size_t i = 0; i < h.size(); ++i)
            c.h.push_back(static_cast<int>(integer_field(h[i], hname + "[" + std::to_string(i) + "]")));
    } else {
        c.h.push_back(static_cast<int>(integer_field(h, hname)));
    }
    if (c.h.empty()) throw ParseError(hname, "no values");
    for (int v : c.h)
        if (v < 0) throw ParseError(hname, "must be nonnegative");

    if (c.mode == RunMode::discounted) {
        const json& d = required(j, "discount", "");
        try {
            if (d.contains("geometric"))
                c.discount = DiscountSequence::geometric(to_double(rational_field(d["geometric"], "discount.geometric")));
            else if (d.contains("horizon"))
                c.discount = DiscountSequence::horizon(static_cast<int>(integer_field(d["horizon"], "discount.horizon")));
            else if (d.contains("explicit")) {
                std::vector<double> v;
                for (std::size_t i = 0; i < d["explicit"].size(); ++i)
                    v.push_back(to_double(rational_field(d["explicit"][i], "discount.explicit[" + std::to_string(i) + "]")));
                c.discount = DiscountSequence::explicit_values(std::move(v));
            } else {
                throw ParseError("discount", "expected geometric, horizon or explicit");
            }
        } catch (const std::invalid_argument& e) {
            throw ParseError("discount", e.what());
        }
    }

    const json& strategies = required(j, "strategies", "");
    if (!strategies.is_array() || strategies.empty()) throw ParseError("strategies", "expected a nonempty array");
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const std::string where = "strategies[" + std::to_string(i) + "]";
        const json& s = strategies[i];
        const std::string name = s.is_string() ? s.get<std::string>() : required(s, "kind", where).get<std::string>();
        try {
            c.strategies.push_back(parse_strategy_kind(name));
        } catch (const std::invalid_argument& e) {
            throw ParseError(where, e.what());
        }
    }

    if (j.contains("trials")) {
        const long t = integer_field(j["trials"], "trials");
        if (t < 1) throw ParseError("trials", "must be >= 1");
        c.trials = static_cast<std::size_t>(t);
    }
    if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(integer_field(j["seed"], "seed"));
    if (j.contains("workers")) c.workers = static_cast<unsigned>(std::max(1L, integer_field(j["workers"], "workers")));
    if (j.contains("numeric")) {
        const std::string n = j["numeric"].is_string() ? j["numeric"].get<std::string>() : "";
        if (n == "exact")
            c.numeric = NumericMode::exact;
        else if (n == "float")
            c.numeric = NumericMode::floating;
        else
            throw ParseError("numeric", "expected exact or float");
    }
    if (j.contains("oracle")) {
        if (!j["oracle"].is_boolean()) throw ParseError("oracle", "expected true or false");
        c.oracle = j["oracle"].get<bool>();
    }
    if (j.contains("out")) {
        if (!j["out"].is_string()) throw ParseError("out", "expected a path");
        c.out = j["out"].get<std::string>();
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = parse_json_exact(text);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.location(), std::string(e.what()).substr(e.location().size() + 2));
    }
    return parse_config(j, std::filesystem::path(path).parent_path().string());
}

/// Validation problems of the configured arms, one message per violation.
inline std::vector<std::string> config_violations(const ExperimentConfig& c) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < c.arms.size(); ++i)
        for (const auto& v : validate(c.arms[i]).entries) out.push_back(c.arm_sources[i] + ": " + v.message);
    return out;
}

/**
 * Runs every (strategy, h) pair and returns the CSV table. With `timing`
 * false the seconds column is 0 so repeated runs are byte-identical.
 */
inline std::string simulate_csv(const ExperimentConfig& c, bool timing = true) {
    const ArmSet arms = share_arms(c.arms);
    std::ostringstream csv;
    csv << "strategy,mode,h,trials,seed,mean,stderr,seconds";
    const bool oracle = c.oracle && c.mode != RunMode::discounted;
    if (oracle) csv << ",exact,optimum,ratio";
    csv << '\n';

    for (StrategyKind kind : c.strategies) {
        for (int h : c.h) {
            const auto start = std::chrono::steady_clock::now();
            const AnyStrategy strategy = make_strategy(kind, arms, h);
            SimulationResult r;
            if (c.mode == RunMode::discounted)
                r = discounted_value(strategy, arms, *c.discount, h, c.trials, c.seed, c.workers);
            else
                r = simulate(strategy, arms, {c.mode == RunMode::budgeted ? Mode::budgeted : Mode::horizon, h}, c.trials,
                             c.seed, c.workers);
            const double seconds =
                timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
            csv << strategy_name(kind) << ',' << run_mode_name(c.mode) << ',' << h << ',' << c.trials << ',' << c.seed
                << ',' << format_double(r.mean) << ',' << format_double(r.standard_error()) << ','
                << format_double(seconds);
            if (oracle) {
                const Mode m = c.mode == RunMode::budgeted ? Mode::budgeted : Mode::horizon;
                const Rational exact = exact_policy_value(strategy, arms, h, m);
                const Rational best =
                    m == Mode::budgeted ? optimal_budgeted_value(arms, h) : optimal_finite_horizon_value(arms, h);
                csv << ',' << format_number(exact, c.numeric) << ',' << format_number(best, c.numeric) << ',';
                if (best == 0)
                    csv << "nan";
                else
                    csv << format_number(exact / best, c.numeric);
            }
            csv << '\n';
        }
    }
    return csv.str();
}

}  // namespace budgeted
