#pragma once

#include "budgeted/budgeted.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace budgeted::cli {

enum ExitCode { ok = 0, certification_failed = 1, input_error = 2 };

struct Options {
    std::string mode = "exact";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
    std::optional<unsigned> workers;

    NumericMode numeric() const { return mode == "float" ? NumericMode::floating : NumericMode::exact; }
};

inline void emit(const Options& o, const std::string& text, std::ostream& out) {
    if (o.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw ParseError(o.out, "cannot write output file");
    f << text;
}

inline NodeId pick_state(const ArmDag& dag, const std::string& id) {
    if (id.empty()) return dag.root();
    auto s = dag.find(id);
    if (!s) throw ParseError("--state", "no state with id " + id);
    return *s;
}

inline std::string cmd_index(const Options& o, const std::string& path, int h, const std::string& state, bool gittins) {
    const NumericMode m = o.numeric();
    const ArmDag dag = load_arm(path);
    if (auto report = validate(dag); !report.ok()) throw ParseError(path, report.entries.front().message);
    const NodeId u = pick_state(dag, state);
    const CurveMap curves = compute_all_curves(dag, h, o.workers.value_or(1));
    const ProfitCurve& c = curves.at(u);

    json corners = json::array();
    for (const auto& k : c.corners) {
        json alloc = json::object();
        for (const auto& [v, b] : k.allocations) alloc[dag.node(v).id] = format_number(b, m);
        corners.push_back({{"cost", format_number(k.cost, m)}, {"profit", format_number(k.profit, m)}, {"allocations", alloc}});
    }
    json policy = json::object();
    for (const auto& [v, l] : extract_ratio_policy(dag, curves, u).labels) policy[dag.node(v).id] = label_name(l);

    json out{{"state", dag.node(u).id},
             {"h", h},
             {"ratio_index", format_number(ratio_index(c), m)},
             {"corners", corners},
             {"policy", policy}};
    if (gittins) {
        if (h < 2) throw ParseError("--gittins", "needs h >= 2 so that theta = 1 - 1/h lies in (0,1)");
        const double theta = 1.0 - 1.0 / h;
        out["gittins"] = {{"theta", format_number(make_rational(h - 1, h), m)},
                          {"index", format_double(gittins_index({dag, u, theta}))}};
    }
    return out.dump(2) + "\n";
}

inline std::string cmd_gittins(const std::string& path, std::optional<std::string> theta_text, std::optional<int> h,
                               const std::string& state, double tolerance) {
    const ArmDag dag = load_arm(path);
    if (auto report = validate(dag); !report.ok()) throw ParseError(path, report.entries.front().message);
    double theta;
    if (theta_text) {
        try {
            theta = to_double(parse_rational(*theta_text));
        } catch (const std::invalid_argument& e) {
            throw ParseError("--theta", e.what());
        }
    } else if (h) {
        if (*h < 2) throw ParseError("--h", "needs h >= 2");
        theta = 1.0 - 1.0 / *h;
    } else {
        throw ParseError("gittins", "give --theta or --h");
    }
    if (!(theta > 0 && theta < 1)) throw ParseError("--theta", "must lie in (0,1)");
    if (!(tolerance > 0)) throw ParseError("--tolerance", "must be positive");

    std::ostringstream out;
    out << "state,zeta,gittins_index\n";
    auto row = [&](NodeId u) {
        out << dag.node(u).id << ',' << to_string(dag.zeta(u)) << ','
            << format_double(gittins_index({dag, u, theta, tolerance})) << '\n';
    };
    if (!state.empty())
        row(pick_state(dag, state));
    else
        for (NodeId u = 0; u < dag.size(); ++u) row(u);
    return out.str();
}

inline int cmd_validate(const Options& o, const std::string& path, std::ostream& out) {
    const ArmDag dag = load_arm(path);
    const ValidationReport report = validate(dag);
    std::ostringstream text;
    if (report.ok())
        text << "ok: " << dag.size() << " states, depth bound " << dag.depth_bound() << '\n';
    for (const auto& v : report.entries) text << v.message << '\n';
    emit(o, text.str(), out);
    return report.ok() ? ok : input_error;
}

inline ExperimentConfig apply_overrides(ExperimentConfig c, const Options& o) {
    if (o.seed) c.seed = *o.seed;
    if (o.trials) c.trials = *o.trials;
    if (o.workers) c.workers = *o.workers;
    if (o.mode == "float") c.numeric = NumericMode::floating;
    if (!o.out.empty()) c.out = o.out;
    return c;
}

inline int cmd_simulate(const Options& o, const std::string& config, bool timing, std::ostream& out, std::ostream& err) {
    ExperimentConfig c = apply_overrides(load_config(config), o);
    if (const auto bad = config_violations(c); !bad.empty()) {
        for (const auto& b : bad) err << "invalid arm: " << b << '\n';
        return input_error;
    }
    if (c.trials < 1) throw ParseError("--trials", "must be >= 1");
    const std::string csv = simulate_csv(c, timing);
    Options target = o;
    target.out = c.out;
    emit(target, csv, out);
    return ok;
}

inline SuiteOptions suite_from_json(const json& j, const std::string& base_dir, std::ostream& err, bool& valid) {
    SuiteOptions s;
    valid = true;
    auto count = [&](const char* key, std::size_t& field) {
        if (j.contains(key)) {
            const long v = integer_field(j[key], key);
            if (v < 0) throw ParseError(key, "must be nonnegative");
            field = static_cast<std::size_t>(v);
        }
    };
    if (j.contains("seed")) s.seed = static_cast<std::uint64_t>(integer_field(j["seed"], "seed"));
    count("curve_instances", s.curve_instances);
    count("system_instances", s.system_instances);
    count("restart_instances", s.restart_instances);
    count("mc_trials", s.mc_trials);
    if (j.contains("tapes")) s.tapes = static_cast<int>(integer_field(j["tapes"], "tapes"));
    if (j.contains("arms")) {
        std::vector<ArmDag> arms;
        const json& ja = j["arms"];
        if (!ja.is_array() || ja.empty()) throw ParseError("arms", "expected a nonempty array");
        for (std::size_t i = 0; i < ja.size(); ++i) {
            std::string where = "arms[" + std::to_string(i) + "]";
            if (ja[i].is_string()) {
                std::filesystem::path p = ja[i].get<std::string>();
                if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
                arms.push_back(load_arm(p.string()));
                where = p.string();
            } else {
                arms.push_back(arm_from_json(ja[i], where));
            }
            for (const auto& v : validate(arms.back()).entries) {
                err << "validation failure in " << where << ": " << v.message << '\n';
                valid = false;
            }
        }
        if (valid) s.extra_systems.emplace_back("config arms", share_arms(std::move(arms)));
    }
    return s;
}

inline std::string suite_report(const std::vector<CriterionResult>& results) {
    std::ostringstream out;
    out << "criterion,claim,instance,lhs,rhs,result\n";
    for (const auto& r : results)
        for (const auto& row : r.rows)
            out << r.id << ',' << row.claim << ",\"" << row.instance << "\",\"" << row.lhs << "\",\"" << row.rhs << "\","
                << (row.pass ? "pass" : "FAIL") << '\n';
    out << '\n';
    for (const auto& r : results) {
        out << "# " << r.id << ' ' << (r.pass ? "PASS" : "FAIL") << ' ' << r.title << " (" << r.checks << " checks)";
        if (!r.note.empty()) out << ": " << r.note;
        out << '\n';
    }
    return out.str();
}

inline int cmd_certify(const Options& o, const std::string& config, std::ostream& out, std::ostream& err) {
    SuiteOptions s;
    if (!config.empty()) {
        const std::string text = read_file(config);
        json j;
        try {
            j = parse_json_exact(text);
        } catch (const ParseError& e) {
            throw ParseError(config + ": " + e.location(), std::string(e.what()).substr(e.location().size() + 2));
        }
        bool valid = true;
        s = suite_from_json(j, std::filesystem::path(config).parent_path().string(), err, valid);
        if (!valid) {
            err << "certification not run: fix the instance first\n";
            return input_error;
        }
    }
    if (o.seed) s.seed = *o.seed;
    if (o.trials) s.mc_trials = *o.trials;
    s.numeric = o.numeric();
    const auto results = run_claim_suite(s);
    emit(o, suite_report(results), out);
    bool pass = true;
    for (const auto& r : results) pass = pass && r.pass;
    return pass ? ok : certification_failed;
}

/// Entry point shared by the executable and the tests.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Budgeted learning and bandit index toolkit"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print this help message and exit");
    Options o;
    app.add_option("--mode", o.mode, "Number format: exact rationals or 17-digit floats")
        ->check(CLI::IsMember({"exact", "float"}));
    app.add_option("--seed", o.seed, "Random seed");
    app.add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "Write the result to this path instead of stdout");
    app.add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);

    auto subcommand = [&](const std::string& name, const std::string& description) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->set_help_flag("--help", "Print this help message and exit");
        sub->fallthrough();
        return sub;
    };

    std::string arm_path, config_path, state;
    int h = 1;
    bool with_gittins = false, no_timing = false;
    std::optional<std::string> theta;
    std::optional<int> gh;
    double tolerance = 1e-9;

    auto* index = subcommand("index", "Ratio index, profit curve and ratio policy of a state");
    index->add_option("arm", arm_path, "Arm spec file")->required();
    index->add_option("--h", h, "Budget h")->required()->check(CLI::PositiveNumber);
    index->add_option("--state", state, "State id (default: root)");
    index->add_flag("--gittins", with_gittins, "Also print the Gittins index at theta = 1 - 1/h");

    auto* gittins = subcommand("gittins", "Gittins indices of the states of an arm");
    gittins->add_option("arm", arm_path, "Arm spec file")->required();
    gittins->add_option("--theta", theta, "Discount factor in (0,1)");
    gittins->add_option("--h", gh, "Use theta = 1 - 1/h");
    gittins->add_option("--state", state, "Only this state");
    gittins->add_option("--tolerance", tolerance, "Bisection tolerance");

    auto* val = subcommand("validate", "Check the arm invariants");
    val->add_option("arm", arm_path, "Arm spec file")->required();

    auto* sim = subcommand("simulate", "Monte Carlo evaluation of strategies from a config file");
    sim->add_option("config", config_path, "Experiment config")->required();
    sim->add_flag("--no-timing", no_timing, "Write 0 in the seconds column");

    auto* cert = subcommand("certify", "Run the claim suite");
    cert->add_option("config", config_path, "Optional suite config");


    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    }

    try {
        if (*index) {
            emit(o, cmd_index(o, arm_path, h, state, with_gittins), out);
        } else if (*gittins) {
            emit(o, cmd_gittins(arm_path, theta, gh, state, tolerance), out);
        } else if (*val) {
            return cmd_validate(o, arm_path, out);
        } else if (*sim) {
            return cmd_simulate(o, config_path, !no_timing, out, err);
        } else if (*cert) {
            return cmd_certify(o, config_path, out, err);
        }
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const OracleBoundError& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << '\n';
        return input_error;
    }
    return ok;
}

}  // namespace budgeted::cli
