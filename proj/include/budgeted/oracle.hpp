#pragma once

#include "budgeted/profit_curve.hpp"
#include "budgeted/single_arm_policy.hpp"
#include "budgeted/system.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace budgeted {

/// A brute-force computation would exceed its configured size bound.
class OracleBoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PolicyPoint {
    Rational cost;
    Rational profit;
    SingleArmPolicy policy;
};

/**
 * Every deterministic single-arm pseudo-policy started at u, with exact cost
 * and profit. Labels of states the policy never reaches are canonicalized
 * away (treated as Abandon), so each distinct policy appears once.
 */
inline std::vector<PolicyPoint> enumerate_policies(const ArmDag& dag, NodeId u, int h, std::size_t max_states = 20,
                                                   std::size_t max_points = 5'000'000) {
    if (h < 1) throw std::invalid_argument("enumerate_policies: h must be >= 1");
    const std::vector<NodeId> order = dag.reachable_from(u);
    if (order.size() > max_states)
        throw OracleBoundError("enumerate_policies: sub-DAG of " + dag.node(u).id + " has " +
                               std::to_string(order.size()) + " states; the bound is " + std::to_string(max_states));

    std::vector<Rational> reach(dag.size());
    reach[u] = 1;
    std::vector<Label> labels(dag.size(), Label::abandon);
    std::vector<PolicyPoint> out;
    Rational cost = 0, profit = 0;
    const Rational explore_cost(1, h);

    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == order.size()) {
            if (out.size() >= max_points)
                throw OracleBoundError("enumerate_policies: more than " + std::to_string(max_points) + " policies");
            PolicyPoint pt{cost, profit, {u, {}}};
            for (NodeId v : order)
                if (reach[v] != 0) pt.policy.labels.emplace(v, labels[v]);
            out.push_back(std::move(pt));
            return;
        }
        const NodeId v = order[k];
        if (reach[v] == 0) return rec(k + 1);
        const Rational w = reach[v];

        labels[v] = Label::abandon;
        rec(k + 1);

        labels[v] = Label::exploit;
        cost += w;
        profit += w * dag.zeta(v);
        rec(k + 1);
        cost -= w;
        profit -= w * dag.zeta(v);

        if (!dag.is_leaf(v)) {
            labels[v] = Label::explore;
            cost += w * explore_cost;
            for (const auto& e : dag.node(v).edges) reach[e.to] += w * e.p;
            rec(k + 1);
            for (const auto& e : dag.node(v).edges) reach[e.to] -= w * e.p;
            cost -= w * explore_cost;
        }
        labels[v] = Label::abandon;
    };
    rec(0);
    return out;
}

/**
 * Upper concave envelope of the points over cost in [0,1], made nondecreasing
 * and closed with a corner at cost 1. Mixtures of two deterministic policies
 * realize the chords, so a point with cost above 1 can still lift the value
 * at cost 1.
 */
inline ProfitCurve envelope_curve(const std::vector<PolicyPoint>& points, NodeId owner = 0, int h = 1) {
    std::vector<std::pair<Rational, Rational>> pts{{0, 0}};
    for (const auto& p : points) pts.emplace_back(p.cost, p.profit);
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
    });

    std::vector<std::pair<Rational, Rational>> hull;
    for (const auto& p : pts) {
        if (!hull.empty() && hull.back().first == p.first) continue;  // keeps the highest point per cost
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull.back();
            // drop b unless it lies strictly above the chord a-p
            Rational cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
            if (cross >= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }

    // Stop at the leftmost maximum so the curve is nondecreasing.
    std::size_t top = 0;
    for (std::size_t i = 1; i < hull.size(); ++i)
        if (hull[i].second > hull[top].second) top = i;
    hull.resize(top + 1);

    ProfitCurve curve;
    curve.owner = owner;
    curve.horizon = h;
    for (std::size_t i = 1; i < hull.size(); ++i) {
        const auto& [c, p] = hull[i];
        if (c < 1) {
            curve.corners.push_back({c, p, {}});
            continue;
        }
        const auto& [c0, p0] = hull[i - 1];
        curve.corners.push_back({Rational(1), p0 + (p - p0) * (1 - c0) / (c - c0), {}});
        return curve;
    }
    curve.corners.push_back({Rational(1), hull.back().second, {}});
    return curve;
}

struct OracleOptions {
    std::size_t memo_bound = 1'000'000;
    /// Sort the states of structurally identical arms before memo lookup.
    bool canonicalize_twins = true;
};

struct OptimalSolution {
    Rational value;
    Action first_action;
};

namespace detail {

inline std::size_t joint_space_size(const ArmSet& arms, int h) {
    double product = h + 1.0;
    for (const auto& a : arms) product *= static_cast<double>(a->size());
    return product > 1e18 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(product);
}

// Memoized dynamic program over joint states for the budgeted and the
// finite-horizon objective.
class JointDP {
public:
    JointDP(const ArmSet& arms, int h, Mode mode, const OracleOptions& opt)
        : arms_(arms), mode_(mode), options_(opt), twin_(arms.size()) {
        if (arms_.empty()) throw std::invalid_argument("oracle: no arms");
        if (h < 0) throw std::invalid_argument("oracle: negative budget");
        if (joint_space_size(arms_, h) > options_.memo_bound)
            throw OracleBoundError("oracle: joint state space of " + std::to_string(joint_space_size(arms_, h)) +
                                   " entries exceeds the memo bound " + std::to_string(options_.memo_bound));
        for (std::size_t i = 0; i < arms_.size(); ++i) {
            twin_[i] = i;
            if (!options_.canonicalize_twins) continue;
            for (std::size_t j = 0; j < i; ++j)
                if (twin_[j] == j && (arms_[j] == arms_[i] || *arms_[j] == *arms_[i])) {
                    twin_[i] = j;
                    break;
                }
        }
    }

    Rational value(std::vector<NodeId>& s, int left) {
        const std::uint64_t k = key(s, left);
        if (auto it = memo_.find(k); it != memo_.end()) return it->second;
        Rational best = mode_ == Mode::budgeted ? best_exploit(s) : Rational(0);
        if (left > 0) {
            for (std::size_t i = 0; i < arms_.size(); ++i) {
                if (mode_ == Mode::budgeted && arms_[i]->is_leaf(s[i])) continue;
                Rational v = action_value(s, left, i);
                if (v > best) best = v;
            }
        }
        memo_.emplace(k, best);
        return best;
    }

    /// Value of exploring (budgeted) or playing (horizon) arm i once, then acting optimally.
    Rational action_value(std::vector<NodeId>& s, int left, std::size_t i) {
        const ArmDag& arm = *arms_[i];
        const NodeId u = s[i];
        Rational total = mode_ == Mode::horizon ? arm.zeta(u) : Rational(0);
        if (arm.is_leaf(u)) return total + value(s, left - 1);
        for (const auto& e : arm.node(u).edges) {
            if (e.p == 0) continue;
            s[i] = e.to;
            total += e.p * value(s, left - 1);
        }
        s[i] = u;
        return total;
    }

    Rational best_exploit(const std::vector<NodeId>& s) const {
        Rational best = arms_[0]->zeta(s[0]);
        for (std::size_t i = 1; i < arms_.size(); ++i)
            if (arms_[i]->zeta(s[i]) > best) best = arms_[i]->zeta(s[i]);
        return best;
    }

    OptimalSolution solve(std::vector<NodeId> s, int left) {
        OptimalSolution sol{0, Action::abandon()};
        bool have = false;
        if (left > 0) {
            for (std::size_t i = 0; i < arms_.size(); ++i) {
                if (mode_ == Mode::budgeted && arms_[i]->is_leaf(s[i])) continue;
                Rational v = action_value(s, left, i);
                if (!have || v > sol.value) {
                    sol = {v, Action::explore(i)};
                    have = true;
                }
            }
        }
        if (mode_ == Mode::budgeted) {
            for (std::size_t i = 0; i < arms_.size(); ++i)
                if (!have || arms_[i]->zeta(s[i]) > sol.value) {
                    sol = {arms_[i]->zeta(s[i]), Action::exploit(i)};
                    have = true;
                }
        }
        return sol;
    }

    std::size_t memo_size() const { return memo_.size(); }

private:
    std::uint64_t key(const std::vector<NodeId>& s, int left) const {
        std::vector<NodeId> c = s;
        if (options_.canonicalize_twins) {
            for (std::size_t i = 0; i < c.size(); ++i) {
                if (twin_[i] != i) continue;
                std::vector<std::size_t> group;
                for (std::size_t j = i; j < c.size(); ++j)
                    if (twin_[j] == i) group.push_back(j);
                if (group.size() < 2) continue;
                std::vector<NodeId> vals;
                for (auto j : group) vals.push_back(c[j]);
                std::sort(vals.begin(), vals.end());
                for (std::size_t g = 0; g < group.size(); ++g) c[group[g]] = vals[g];
            }
        }
        std::uint64_t k = static_cast<std::uint64_t>(left);
        for (std::size_t i = 0; i < c.size(); ++i) k = k * arms_[i]->size() + c[i];
        return k;
    }

    const ArmSet& arms_;
    Mode mode_;
    OracleOptions options_;
    std::vector<std::size_t> twin_;
    std::unordered_map<std::uint64_t, Rational> memo_;
};

}  // namespace detail

/// B*(h) from the given joint state, with the optimal first action (explore preferred on ties).
inline OptimalSolution solve_budgeted(const ArmSet& arms, const std::vector<NodeId>& start, int h,
                                      const OracleOptions& opt = {}) {
    detail::JointDP dp(arms, h, Mode::budgeted, opt);
    return dp.solve(start, h);
}

/// Optimal expected payoff of the exploited arm with at most h explorations: B*(h).
inline Rational optimal_budgeted_value(const ArmSet& arms, int h, const OracleOptions& opt = {}) {
    return solve_budgeted(arms, initial_state(arms, h).arm_states, h, opt).value;
}

/// F*(h) from the given joint state, with the optimal first play.
inline OptimalSolution solve_finite_horizon(const ArmSet& arms, const std::vector<NodeId>& start, int h,
                                            const OracleOptions& opt = {}) {
    detail::JointDP dp(arms, h, Mode::horizon, opt);
    if (h == 0) return {0, Action::abandon()};
    return dp.solve(start, h);
}

/// Optimal expected total reward over h plays: F*(h).
inline Rational optimal_finite_horizon_value(const ArmSet& arms, int h, const OracleOptions& opt = {}) {
    return solve_finite_horizon(arms, initial_state(arms, h).arm_states, h, opt).value;
}

namespace detail {

template <Strategy S>
Rational policy_value_rec(S strategy, const ArmSet& arms, SystemState state, Mode mode, std::size_t& visits,
                          std::size_t bound) {
    if (++visits > bound) throw OracleBoundError("exact_policy_value: outcome tree exceeds " + std::to_string(bound) + " nodes");
    if (mode == Mode::horizon && state.remaining_budget <= 0) return 0;
    const Action a = strategy.act(state);
    if (a.kind == Action::Kind::abandon) return 0;
    if (a.arm >= arms.size()) throw std::logic_error("strategy chose arm " + std::to_string(a.arm) + " out of range");
    const ArmDag& arm = *arms[a.arm];
    const NodeId u = state.arm_states[a.arm];

    if (mode == Mode::budgeted) {
        if (a.kind == Action::Kind::exploit) return arm.zeta(u);
        if (state.remaining_budget <= 0) throw std::logic_error("strategy explored with no budget left");
    }
    Rational total = mode == Mode::horizon ? arm.zeta(u) : Rational(0);
    SystemState next = state;
    --next.remaining_budget;
    ++next.step;
    if (arm.is_leaf(u)) return total + policy_value_rec(strategy, arms, next, mode, visits, bound);
    for (const auto& e : arm.node(u).edges) {
        if (e.p == 0) continue;
        next.arm_states[a.arm] = e.to;
        total += e.p * policy_value_rec(strategy, arms, next, mode, visits, bound);
    }
    return total;
}

}  // namespace detail

/**
 * Exact expected value of a strategy by traversing its whole outcome tree.
 * Budgeted mode returns the payoff of the exploited arm; horizon mode the
 * total expected reward of h plays (each play of state u earns zeta(u)).
 * Exploring a leaf consumes budget and leaves the arm unchanged.
 */
template <Strategy S>
Rational exact_policy_value(const S& strategy, const ArmSet& arms, int h, Mode mode, std::size_t bound = 5'000'000) {
    std::size_t visits = 0;
    return detail::policy_value_rec(strategy, arms, initial_state(arms, h), mode, visits, bound);
}

struct RestartCheck {
    bool holds = false;
    Rational expected_after;  ///< E_T[B*(h, T)]
    Rational before;          ///< B*(h, S)
};

/**
 * Compares the optimum after a fixed sequence of extra explorations (the arm
 * indices in `prefix`, applied from the initial state) with the optimum
 * without them, both with budget h.
 */
inline RestartCheck restart_property_check(const ArmSet& arms, int h, const std::vector<std::size_t>& prefix,
                                           const OracleOptions& opt = {}) {
    detail::JointDP dp(arms, h, Mode::budgeted, opt);
    std::vector<NodeId> s = initial_state(arms, h).arm_states;
    RestartCheck out;
    out.before = dp.value(s, h);

    std::function<Rational(std::vector<NodeId>&, std::size_t)> after = [&](std::vector<NodeId>& st, std::size_t k) -> Rational {
        if (k == prefix.size()) return dp.value(st, h);
        const std::size_t i = prefix[k];
        if (i >= arms.size()) throw std::invalid_argument("restart_property_check: arm index out of range");
        const NodeId u = st[i];
        if (arms[i]->is_leaf(u)) return after(st, k + 1);
        Rational total = 0;
        for (const auto& e : arms[i]->node(u).edges) {
            if (e.p == 0) continue;
            st[i] = e.to;
            total += e.p * after(st, k + 1);
        }
        st[i] = u;
        return total;
    };
    out.expected_after = after(s, 0);
    out.holds = out.expected_after >= out.before;
    return out;
}

}  // namespace budgeted
