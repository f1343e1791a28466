#pragma once

#include "budgeted/experiment.hpp"
#include "budgeted/gittins.hpp"
#include "budgeted/oracle.hpp"
#include "budgeted/policies.hpp"
#include "budgeted/profit_curve.hpp"
#include "budgeted/random_instances.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace budgeted {

/// Approximation factors checked by the claim suite.
namespace factors {
inline const Rational greedy = make_rational(22, 100);
inline const Rational halving = make_rational(17, 100);
inline const Rational ratio_switch = make_rational(187, 10000);  // 0.5 * 0.22 * 0.17, rounded down
// Gittins chain: index ratio at least (1-1/h)^h / 18 >= 1/72, greedy analysis with that ratio.
inline const double gittins_greedy = -std::expm1(-1.0 / 288.0);
inline const double gittins_switch = 0.5 * gittins_greedy * 0.17;
}  // namespace factors

struct ClaimRow {
    std::string claim;
    std::string instance;
    std::string lhs;
    std::string rhs;
    bool pass = true;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = true;
    std::size_t checks = 0;
    std::string note;
    std::vector<ClaimRow> rows;

    void add(ClaimRow row) {
        pass = pass && row.pass;
        ++checks;
        rows.push_back(std::move(row));
    }
};

struct SuiteOptions {
    std::uint64_t seed = 20240607;
    std::size_t curve_instances = 600;
    std::size_t system_instances = 120;
    std::size_t restart_instances = 100;
    int tapes = 8;
    std::size_t mc_trials = 20000;
    NumericMode numeric = NumericMode::exact;
    std::vector<std::pair<std::string, ArmSet>> extra_systems;
};

namespace detail {

inline std::string fmt4(const Rational& q) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", to_double(q));
    return buf;
}

inline std::string curve_text(const std::vector<CurveCorner>& corners, NumericMode m) {
    std::string s = "[";
    for (std::size_t i = 0; i < corners.size(); ++i) {
        if (i) s += ' ';
        s += "(" + format_number(corners[i].cost, m) + "," + format_number(corners[i].profit, m) + ")";
    }
    return s + "]";
}

inline bool same_points(const ProfitCurve& a, const ProfitCurve& b) {
    if (a.corners.size() != b.corners.size()) return false;
    for (std::size_t i = 0; i < a.corners.size(); ++i)
        if (a.corners[i].cost != b.corners[i].cost || a.corners[i].profit != b.corners[i].profit) return false;
    return true;
}

inline ArmDag curve_sweep_instance(std::mt19937_64& rng, std::size_t i) {
    if (i % 7 == 6) {
        const int a = std::uniform_int_distribution<int>(1, 5)(rng);
        const int b = std::uniform_int_distribution<int>(1, 5)(rng);
        return beta_bernoulli_arm(a, b, 1 + static_cast<int>(i / 5 % 3));
    }
    RandomDagShape shape;
    shape.depth = 1 + static_cast<int>(i % 3);
    shape.zero_leaf = i % 3 ? 0.6 : 0.0;
    shape.min_branching = i % 2 ? 2 : 1;
    return random_martingale_dag(rng, shape);
}

inline bool is_prefix(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

inline std::string seq_text(const std::vector<std::size_t>& v) {
    std::string s;
    for (auto x : v) s += std::to_string(x);
    return s.empty() ? "-" : s;
}

}  // namespace detail

/// Exact counterexample showing that no index can be optimal.
inline CriterionResult check_counterexample(NumericMode m = NumericMode::exact) {
    CriterionResult res{1, "no-exact-index counterexample"};
    const auto t0 = std::chrono::steady_clock::now();
    const ArmSet two = share_arms({beta_bernoulli_arm(5, 4, 1), beta_bernoulli_arm(28, 19, 1)});
    const ArmSet three = share_arms({beta_bernoulli_arm(5, 4, 1), beta_bernoulli_arm(28, 19, 1), beta_bernoulli_arm(28, 19, 1)});

    const Rational b28 = make_rational(28, 47);
    const Rational want2 = make_rational(5, 9) * make_rational(6, 10) + make_rational(4, 9) * b28;
    const Rational want3 = b28 * make_rational(29, 48) + make_rational(19, 47) * b28;

    const OptimalSolution s2 = solve_budgeted(two, initial_state(two, 1).arm_states, 1);
    const OptimalSolution s3 = solve_budgeted(three, initial_state(three, 1).arm_states, 1);
    OracleOptions plain;
    plain.canonicalize_twins = false;
    const OptimalSolution s3p = solve_budgeted(three, initial_state(three, 1).arm_states, 1, plain);

    res.add({"optimum_two_arms", "{A,B} h=1", format_number(s2.value, m), format_number(want2, m), s2.value == want2});
    res.add({"first_action_two_arms", "{A,B} h=1", to_string(s2.first_action), "Explore(0)",
             s2.first_action == Action::explore(0)});
    res.add({"optimum_three_arms", "{A,B,C} h=1", format_number(s3.value, m), format_number(want3, m), s3.value == want3});
    res.add({"first_action_three_arms", "{A,B,C} h=1", to_string(s3.first_action), "Explore(1)",
             s3.first_action == Action::explore(1)});
    res.add({"twin_canonicalization_off", "{A,B,C} h=1", format_number(s3p.value, m), format_number(s3.value, m),
             s3p.value == s3.value && s3p.first_action == s3.first_action});
    res.add({"decimal_exploit_B", "B", detail::fmt4(b28), "0.5957", detail::fmt4(b28) == "0.5957"});
    res.add({"decimal_two_arms", "{A,B}", detail::fmt4(s2.value), "0.5981", detail::fmt4(s2.value) == "0.5981"});
    res.add({"decimal_three_arms", "{A,B,C}", detail::fmt4(s3.value), "0.6008", detail::fmt4(s3.value) == "0.6008"});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.add({"runtime_seconds", "both", format_double(secs), "1", secs < 1.0});
    return res;
}

struct CurveSweepResults {
    CriterionResult equivalence{2, "profit curves equal the enumeration envelope"};
    CriterionResult segments{3, "corner count at most twice the sub-DAG size"};
    CriterionResult ratio_policy{11, "ratio policies: cost at most 1 and threshold ordering"};
};

/// One sweep of random single-arm instances feeding the curve checks.
inline CurveSweepResults check_curve_sweep(const SuiteOptions& opt) {
    CurveSweepResults out;
    std::mt19937_64 rng(opt.seed);
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t states = 0;
    for (std::size_t i = 0; i < opt.curve_instances; ++i) {
        const ArmDag dag = detail::curve_sweep_instance(rng, i);
        const int h = 1 + static_cast<int>(i % 5);
        const std::string name = "curve#" + std::to_string(i) + " h=" + std::to_string(h);
        const CurveMap curves = compute_all_curves(dag, h);

        bool equal = true, ratio_ok = true, bound_ok = true, cost_ok = true, order_ok = true, corner_ok = true;
        std::string first_mismatch;
        std::size_t worst_corners = 0, worst_bound = 1;
        Rational worst_cost = 0;
        for (NodeId u = 0; u < dag.size(); ++u) {
            ++states;
            const ProfitCurve& c = curves.at(u);
            const auto points = enumerate_policies(dag, u, h);
            const ProfitCurve env = envelope_curve(points, u, h);
            if (!detail::same_points(c, env) && equal) {
                equal = false;
                first_mismatch = dag.node(u).id + ": " + detail::curve_text(c.corners, opt.numeric) + " vs " +
                                 detail::curve_text(env.corners, opt.numeric);
            }
            const Rational r = ratio_index(c);
            for (const auto& p : points)
                if (p.cost > 0 && p.profit / p.cost > r) ratio_ok = false;

            const std::size_t sigma = sub_dag_size(dag, u);
            if (c.corners.size() > 2 * sigma) bound_ok = false;
            if (c.corners.size() * worst_bound > worst_corners * 2 * sigma) {
                worst_corners = c.corners.size();
                worst_bound = 2 * sigma;
            }

            const SingleArmPolicy pol = extract_ratio_policy(dag, curves, u);
            const PolicyValue pv = evaluate_policy(dag, pol, h);
            if (pv.cost > 1) cost_ok = false;
            if (pv.cost > worst_cost) worst_cost = pv.cost;
            if (pv.cost != c.corners.front().cost || pv.profit != c.corners.front().profit) corner_ok = false;
            for (const auto& [v, w] : pv.w) {
                if (w == 0) continue;
                const Rational rv = ratio_index(curves.at(v));
                const Label l = pol.at(v);
                if (rv > r && l == Label::abandon) order_ok = false;
                if (rv < r && l != Label::abandon) order_ok = false;
            }
        }
        out.equivalence.add({"curve_equals_envelope", name, equal ? "equal" : first_mismatch,
                             std::to_string(dag.size()) + " states", equal});
        out.equivalence.add({"first_corner_ratio_is_max", name, ratio_ok ? "max" : "exceeded", "max", ratio_ok});
        out.segments.add({"segment_bound", name, std::to_string(worst_corners), std::to_string(worst_bound), bound_ok});
        out.ratio_policy.add({"ratio_policy_cost", name, format_number(worst_cost, opt.numeric), "1", cost_ok});
        out.ratio_policy.add({"ratio_policy_first_corner", name, corner_ok ? "match" : "mismatch", "match", corner_ok});
        out.ratio_policy.add({"ratio_policy_ordering", name, order_ok ? "ordered" : "violated", "ordered", order_ok});
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.equivalence.note = std::to_string(opt.curve_instances) + " instances, " + std::to_string(states) +
                           " states, " + format_double(secs) + " s";
    out.equivalence.add({"runtime_seconds", "sweep", format_double(secs), "60", secs < 60.0});
    out.segments.note = out.equivalence.note;
    out.ratio_policy.note = out.equivalence.note;
    return out;
}

/// Gittins index bracketed by the ratio index on every state of the curve sweep, h in 2..5.
inline CriterionResult check_gittins_sandwich(const SuiteOptions& opt) {
    CriterionResult res{7, "Gittins index within the ratio-index sandwich"};
    std::mt19937_64 rng(opt.seed);
    double min_low_ratio = std::numeric_limits<double>::infinity(), max_high_ratio = 0.0;
    for (std::size_t i = 0; i < opt.curve_instances; ++i) {
        const ArmDag dag = detail::curve_sweep_instance(rng, i);
        for (int h = 2; h <= 5; ++h) {
            const double theta = 1.0 - 1.0 / h;
            const double shrink = std::pow(theta, h);
            const CurveMap curves = compute_all_curves(dag, h);
            const std::vector<double> rho = gittins_indices_all(dag, theta);
            bool ok = true;
            double tightest = std::numeric_limits<double>::infinity();
            std::string lhs, rhs;
            for (NodeId u = 0; u < dag.size(); ++u) {
                const double r = to_double(ratio_index(curves.at(u)));
                const double lower = r * shrink - 1e-6;
                const double upper = 18.0 * r + 1e-6;
                if (rho[u] < lower || rho[u] > upper) ok = false;
                if (rho[u] - lower < tightest || lhs.empty()) {
                    tightest = rho[u] - lower;
                    lhs = format_double(rho[u]);
                    rhs = "[" + format_double(lower) + ", " + format_double(upper) + "]";
                }
                if (r > 0) {
                    min_low_ratio = std::min(min_low_ratio, rho[u] / (r * shrink));
                    max_high_ratio = std::max(max_high_ratio, rho[u] / (18.0 * r));
                }
            }
            res.add({"gittins_ratio_sandwich", "curve#" + std::to_string(i) + " h=" + std::to_string(h), lhs, rhs, ok});
        }
    }
    res.note = "min index/lower bound = " + format_double(min_low_ratio) +
               ", max index/upper bound = " + format_double(max_high_ratio);
    return res;
}

struct SystemSweepResults {
    CriterionResult greedy{4, "greedy at least 0.22 of the budgeted optimum"};
    CriterionResult halving{5, "half the budget keeps 0.17 of the optimum"};
    CriterionResult persistent{6, "greedy dominates persistent; prefix under coupling"};
    CriterionResult horizon{8, "finite-horizon optimum sandwich"};
    CriterionResult switching{9, "switch and scale strategies against the horizon optimum"};
};

inline std::vector<std::pair<std::string, ArmSet>> system_sweep_instances(const SuiteOptions& opt) {
    std::vector<std::pair<std::string, ArmSet>> out;
    out.emplace_back("A,B depth1", share_arms({beta_bernoulli_arm(5, 4, 1), beta_bernoulli_arm(28, 19, 1)}));
    out.emplace_back("A,B,C depth1",
                     share_arms({beta_bernoulli_arm(5, 4, 1), beta_bernoulli_arm(28, 19, 1), beta_bernoulli_arm(28, 19, 1)}));
    out.emplace_back("A,B depth4", share_arms({beta_bernoulli_arm(5, 4, 4), beta_bernoulli_arm(28, 19, 4)}));
    out.emplace_back("A,B,C depth4",
                     share_arms({beta_bernoulli_arm(5, 4, 4), beta_bernoulli_arm(28, 19, 4), beta_bernoulli_arm(28, 19, 4)}));
    for (const auto& e : opt.extra_systems) out.push_back(e);
    std::mt19937_64 rng(opt.seed ^ 0x5157u);
    for (std::size_t i = 0; i < opt.system_instances; ++i)
        out.emplace_back("system#" + std::to_string(i), random_system(rng, 4));
    return out;
}

inline SystemSweepResults check_system_sweep(const SuiteOptions& opt) {
    SystemSweepResults out;
    const NumericMode m = opt.numeric;
    const Rational gg_factor(factors::gittins_greedy);
    const Rational gs_factor(factors::gittins_switch);
    struct Minimum {
        double value = std::numeric_limits<double>::infinity();
        void take(const Rational& num, const Rational& den) {
            if (den > 0) value = std::min(value, to_double(num / den));
        }
    };
    Minimum greedy_min, gg_min, rs_min, rsc_min, gs_min, gsc_min, halving_min;

    std::uint64_t tape_seed = opt.seed * 7919u;
    for (const auto& [name, arms] : system_sweep_instances(opt)) {
        std::vector<Rational> B;
        for (int h = 0; h <= 6; ++h) B.push_back(optimal_budgeted_value(arms, h));

        for (int h = 1; h <= 4; ++h) {
            const std::string inst = name + " h=" + std::to_string(h);
            const GreedyRatio greedy(arms, h);
            const Persistent persistent(arms, h);
            const Rational g = exact_policy_value(greedy, arms, h, Mode::budgeted);
            const Rational p = exact_policy_value(persistent, arms, h, Mode::budgeted);
            const Rational gg = exact_policy_value(GittinsGreedy(arms, h), arms, h, Mode::budgeted);
            greedy_min.take(g, B[h]);
            gg_min.take(gg, B[h]);
            halving_min.take(B[h / 2], B[h]);

            out.greedy.add({"greedy_factor", inst, format_number(g, m), format_number(factors::greedy * B[h], m),
                            g >= factors::greedy * B[h]});
            out.greedy.add({"gittins_greedy_factor", inst, format_number(gg, m), format_number(gg_factor * B[h], m),
                            gg >= gg_factor * B[h]});
            out.halving.add({"budget_halving", inst, format_number(B[h / 2], m), format_number(factors::halving * B[h], m),
                             B[h / 2] >= factors::halving * B[h]});
            out.persistent.add({"greedy_dominates_persistent", inst, format_number(g, m), format_number(p, m), g >= p});

            bool prefix = true;
            std::string lhs = "prefix", rhs = "prefix";
            for (int k = 0; k < opt.tapes; ++k) {
                const OutcomeTape tape = make_tape(arms.size(), h, ++tape_seed);
                const auto gs = explored_arms(run_on_tape(greedy, arms, {Mode::budgeted, h}, tape));
                const auto ps = explored_arms(run_on_tape(persistent, arms, {Mode::budgeted, h}, tape));
                if (!detail::is_prefix(ps, gs) && prefix) {
                    prefix = false;
                    lhs = detail::seq_text(ps);
                    rhs = detail::seq_text(gs);
                }
            }
            out.persistent.add({"persistent_prefix_of_greedy", inst, lhs, rhs, prefix});
        }

        for (int h = 1; h <= 6; ++h) {
            const std::string inst = name + " h=" + std::to_string(h);
            const Rational F = optimal_finite_horizon_value(arms, h);
            const Rational lower = Rational((h + 1) / 2) * B[h / 2];
            const Rational upper = Rational(h) * B[h];
            out.horizon.add({"horizon_lower", inst, format_number(lower, m), format_number(F, m), lower <= F});
            out.horizon.add({"horizon_upper", inst, format_number(F, m), format_number(upper, m), F <= upper});

            const Rational rs = exact_policy_value(RatioSwitch(arms, h), arms, h, Mode::horizon);
            const Rational rsc = exact_policy_value(RatioScale(arms, h), arms, h, Mode::horizon);
            const Rational gs = exact_policy_value(GittinsSwitch(arms, h), arms, h, Mode::horizon);
            const Rational gsc = exact_policy_value(GittinsScale(arms, h), arms, h, Mode::horizon);
            rs_min.take(rs, F);
            rsc_min.take(rsc, F);
            gs_min.take(gs, F);
            gsc_min.take(gsc, F);
            const Rational need = factors::ratio_switch * F, gneed = gs_factor * F;
            out.switching.add({"ratio_switch_factor", inst, format_number(rs, m), format_number(need, m), rs >= need});
            out.switching.add({"ratio_scale_factor", inst, format_number(rsc, m), format_number(need, m), rsc >= need});
            out.switching.add({"gittins_switch_factor", inst, format_number(gs, m), format_number(gneed, m), gs >= gneed});
            out.switching.add({"gittins_scale_factor", inst, format_number(gsc, m), format_number(gneed, m), gsc >= gneed});
        }
    }
    out.greedy.note = "min greedy/B* = " + format_double(greedy_min.value) +
                      ", min gittins_greedy/B* = " + format_double(gg_min.value) + " (factor " +
                      format_double(factors::gittins_greedy) + ")";
    out.halving.note = "min B*(h/2)/B*(h) = " + format_double(halving_min.value);
    out.switching.note = "min ratio to F*: ratio_switch " + format_double(rs_min.value) + ", ratio_scale " +
                         format_double(rsc_min.value) + ", gittins_switch " + format_double(gs_min.value) +
                         ", gittins_scale " + format_double(gsc_min.value) + " (gittins factor " +
                         format_double(factors::gittins_switch) + ")";
    return out;
}

/// Extra explorations up front never lower the expected optimum.
inline CriterionResult check_restart(const SuiteOptions& opt) {
    CriterionResult res{10, "restart property"};
    std::mt19937_64 rng(opt.seed ^ 0xa11ce);
    for (std::size_t i = 0; i < opt.restart_instances; ++i) {
        const ArmSet arms = random_system(rng, 3, 2);
        const int h = std::uniform_int_distribution<int>(1, 4)(rng);
        const int len = std::uniform_int_distribution<int>(0, 3)(rng);
        std::vector<std::size_t> prefix;
        for (int k = 0; k < len; ++k) prefix.push_back(std::uniform_int_distribution<std::size_t>(0, 1)(rng));
        const RestartCheck rc = restart_property_check(arms, h, prefix);
        res.add({"restart", "pair#" + std::to_string(i) + " h=" + std::to_string(h) + " prefix=" + detail::seq_text(prefix),
                 format_number(rc.expected_after, opt.numeric), format_number(rc.before, opt.numeric), rc.holds});
    }
    return res;
}

/// Monte Carlo against exact values, and worker-count independence of the simulate table.
inline CriterionResult check_simulation(const SuiteOptions& opt) {
    CriterionResult res{12, "simulation fidelity and determinism"};
    std::mt19937_64 rng(opt.seed ^ 0x51u);
    struct Case {
        std::string name;
        AnyStrategy strategy;
        ArmSet arms;
        EvalMode mode;
    };
    const ArmSet ab = share_arms({beta_bernoulli_arm(5, 4, 1), beta_bernoulli_arm(28, 19, 1)});
    const ArmSet coins = share_arms({beta_bernoulli_arm(1, 1, 4), beta_bernoulli_arm(1, 2, 4)});
    const ArmSet r1 = random_system(rng, 4);
    const ArmSet r2 = random_system(rng, 4);
    const ArmSet flat = share_arms({ArmDag({{"c", 0, make_rational(3, 7), {}}}, 0, 0)});
    std::vector<Case> cases;
    cases.push_back({"greedy {A,B} budgeted h=1", GreedyRatio(ab, 1), ab, {Mode::budgeted, 1}});
    cases.push_back({"persistent system budgeted h=3", Persistent(r1, 3), r1, {Mode::budgeted, 3}});
    cases.push_back({"gittins_greedy system budgeted h=4", GittinsGreedy(r2, 4), r2, {Mode::budgeted, 4}});
    cases.push_back({"ratio_switch coins horizon h=4", RatioSwitch(coins, 4), coins, {Mode::horizon, 4}});
    cases.push_back({"ratio_scale coins horizon h=6", RatioScale(coins, 6), coins, {Mode::horizon, 6}});
    cases.push_back({"gittins_scale system horizon h=5", GittinsScale(r1, 5), r1, {Mode::horizon, 5}});
    cases.push_back({"exploit_best absorbing horizon h=5", ExploitBest(flat), flat, {Mode::horizon, 5}});

    std::uint64_t seed = opt.seed;
    for (const auto& c : cases) {
        const Rational exact = exact_policy_value(c.strategy, c.arms, c.mode.h, c.mode.mode);
        const SimulationResult sim = simulate(c.strategy, c.arms, c.mode, opt.mc_trials, ++seed);
        const double diff = std::abs(sim.mean - to_double(exact));
        // floor for rounding noise in runs whose outcome is deterministic
        const double allowed = std::max(4.0 * sim.standard_error(), 1e-9 * std::max(1.0, std::abs(to_double(exact))));
        res.add({"monte_carlo_within_4_stderr", c.name, format_double(sim.mean),
                 format_number(exact, opt.numeric) + " +/- " + format_double(allowed), diff <= allowed});
    }

    ExperimentConfig cfg;
    cfg.arms = {beta_bernoulli_arm(1, 1, 4), beta_bernoulli_arm(2, 3, 4)};
    cfg.arm_sources = {"inline[0]", "inline[1]"};
    cfg.mode = RunMode::horizon;
    cfg.h = {1, 2, 3, 4, 5, 6};
    cfg.strategies = {StrategyKind::ratio_scale, StrategyKind::gittins_switch, StrategyKind::exploit_best};
    cfg.trials = 2000;
    cfg.seed = opt.seed;
    cfg.workers = 1;
    const std::string one = simulate_csv(cfg, false);
    cfg.workers = 8;
    const std::string eight = simulate_csv(cfg, false);
    const std::string again = simulate_csv(cfg, false);
    res.add({"identical_output_1_vs_8_workers", "coins horizon h=1..6", std::to_string(one.size()) + " bytes",
             std::to_string(eight.size()) + " bytes", one == eight});
    res.add({"identical_output_repeat", "coins horizon h=1..6", std::to_string(eight.size()) + " bytes",
             std::to_string(again.size()) + " bytes", eight == again});
    return res;
}

/// All criteria in order 1..12.
inline std::vector<CriterionResult> run_claim_suite(const SuiteOptions& opt) {
    std::vector<CriterionResult> out;
    out.push_back(check_counterexample(opt.numeric));
    CurveSweepResults curves = check_curve_sweep(opt);
    out.push_back(std::move(curves.equivalence));
    out.push_back(std::move(curves.segments));
    SystemSweepResults sys = check_system_sweep(opt);
    out.push_back(std::move(sys.greedy));
    out.push_back(std::move(sys.halving));
    out.push_back(std::move(sys.persistent));
    out.push_back(check_gittins_sandwich(opt));
    out.push_back(std::move(sys.horizon));
    out.push_back(std::move(sys.switching));
    out.push_back(check_restart(opt));
    out.push_back(std::move(curves.ratio_policy));
    out.push_back(check_simulation(opt));
    return out;
}

}  // namespace budgeted
