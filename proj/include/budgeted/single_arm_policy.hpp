#pragma once

#include "budgeted/arm_model.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace budgeted {

enum class Label : char { abandon = 'A', explore = 'E', exploit = 'P' };

inline const char* label_name(Label l) {
    switch (l) {
        case Label::abandon: return "Abandon";
        case Label::explore: return "Explore";
        case Label::exploit: return "Exploit";
    }
    return "?";
}

/// Deterministic single-arm policy. States without a label are treated as Abandon.
struct SingleArmPolicy {
    NodeId start = 0;
    std::map<NodeId, Label> labels;

    Label at(NodeId v) const {
        auto it = labels.find(v);
        return it == labels.end() ? Label::abandon : it->second;
    }
    bool operator==(const SingleArmPolicy&) const = default;
};

/// Randomized single-arm policy: per state, explore with probability e and exploit with p.
struct RandomizedPolicy {
    struct Choice {
        Rational explore;
        Rational exploit;
    };
    NodeId start = 0;
    std::map<NodeId, Choice> choices;  ///< missing states abandon
};

/// Cost, profit and the visit vectors w (enter), x (exploit), z (explore) of a policy.
struct PolicyValue {
    Rational cost;
    Rational profit;
    std::map<NodeId, Rational> w, x, z;
};

/**
 * Exact forward propagation of reach probabilities.
 * cost = sum(z)/h + sum(x), profit = sum(x * zeta).
 */
inline PolicyValue evaluate_policy(const ArmDag& dag, const RandomizedPolicy& policy, int h) {
    if (h < 1) throw std::invalid_argument("evaluate_policy: h must be >= 1");
    PolicyValue out;
    out.w[policy.start] = 1;
    Rational explored = 0, exploited = 0;
    for (NodeId u : dag.reachable_from(policy.start)) {
        auto wit = out.w.find(u);
        if (wit == out.w.end() || wit->second == 0) continue;
        auto cit = policy.choices.find(u);
        if (cit == policy.choices.end()) continue;
        const auto& [e, p] = cit->second;
        if (e < 0 || p < 0 || e + p > 1) throw std::invalid_argument("evaluate_policy: invalid probabilities at " + dag.node(u).id);
        const Rational w = wit->second;
        if (p > 0) {
            out.x[u] = w * p;
            exploited += w * p;
            out.profit += w * p * dag.zeta(u);
        }
        if (e > 0) {
            if (dag.is_leaf(u)) throw std::invalid_argument("evaluate_policy: explores leaf " + dag.node(u).id);
            out.z[u] = w * e;
            explored += w * e;
            for (const auto& edge : dag.node(u).edges)
                if (edge.p != 0) out.w[edge.to] += w * e * edge.p;
        }
    }
    out.cost = explored / h + exploited;
    return out;
}

inline RandomizedPolicy to_randomized(const SingleArmPolicy& policy) {
    RandomizedPolicy r;
    r.start = policy.start;
    for (const auto& [v, l] : policy.labels) {
        if (l == Label::explore) r.choices[v] = {1, 0};
        if (l == Label::exploit) r.choices[v] = {0, 1};
    }
    return r;
}

inline PolicyValue evaluate_policy(const ArmDag& dag, const SingleArmPolicy& policy, int h) {
    return evaluate_policy(dag, to_randomized(policy), h);
}

}  // namespace budgeted
