#pragma once

#include "budgeted/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace budgeted {

using NodeId = std::size_t;

/// Realized outcome attached to an edge of an (alpha,beta) arm; `none` for generic arms.
enum class Outcome : std::uint8_t { none, success, failure };

struct ArmEdge {
    NodeId to = 0;
    Rational p;
    Outcome outcome = Outcome::none;

    bool operator==(const ArmEdge&) const = default;
};

struct ArmNode {
    std::string id;
    int layer = 0;
    Rational zeta;  ///< expected payoff of the state
    std::vector<ArmEdge> edges;

    bool operator==(const ArmNode&) const = default;
};

/**
 * State space of one arm as a layered DAG.
 *
 * Nodes are addressed by their index (NodeId). Construction only checks that
 * indices are in range; the semantic invariants (layering, stochastic rows,
 * martingale payoffs, reachability) are reported by validate().
 * Leaves are nodes without edges or nodes at the depth bound; they are
 * absorbing: playing them leaves the state unchanged.
 */
class ArmDag {
public:
    ArmDag() = default;

    ArmDag(std::vector<ArmNode> nodes, NodeId root, int depth_bound)
        : nodes_(std::move(nodes)), root_(root), depth_bound_(depth_bound) {
        if (nodes_.empty()) throw std::invalid_argument("arm has no nodes");
        if (root_ >= nodes_.size()) throw std::invalid_argument("root index out of range");
        if (depth_bound_ < 0) throw std::invalid_argument("negative depth bound");
        for (NodeId i = 0; i < nodes_.size(); ++i) {
            for (const auto& e : nodes_[i].edges)
                if (e.to >= nodes_.size())
                    throw std::invalid_argument("edge of node " + nodes_[i].id +
                                                " points outside the arm");
            if (!by_name_.emplace(nodes_[i].id, i).second)
                throw std::invalid_argument("duplicate node id " + nodes_[i].id);
        }
    }

    const std::vector<ArmNode>& nodes() const { return nodes_; }
    const ArmNode& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }
    NodeId root() const { return root_; }
    int depth_bound() const { return depth_bound_; }
    const Rational& zeta(NodeId id) const { return nodes_.at(id).zeta; }

    bool is_leaf(NodeId id) const {
        const auto& n = nodes_.at(id);
        return n.edges.empty() || n.layer >= depth_bound_;
    }

    std::optional<NodeId> find(std::string_view id) const {
        auto it = by_name_.find(std::string(id));
        if (it == by_name_.end()) return std::nullopt;
        return it->second;
    }

    /// True when every edge carries a success/failure outcome.
    bool has_outcomes() const {
        for (const auto& n : nodes_)
            for (const auto& e : n.edges)
                if (e.outcome == Outcome::none) return false;
        return true;
    }

    /// States of the sub-DAG rooted at `from`, sorted by (layer, id).
    std::vector<NodeId> reachable_from(NodeId from) const {
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<NodeId> stack{from}, out;
        seen.at(from) = 1;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            out.push_back(u);
            for (const auto& e : nodes_[u].edges)
                if (!seen[e.to]) {
                    seen[e.to] = 1;
                    stack.push_back(e.to);
                }
        }
        std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) {
            return std::pair(nodes_[a].layer, a) < std::pair(nodes_[b].layer, b);
        });
        return out;
    }

    bool operator==(const ArmDag& o) const {
        return root_ == o.root_ && depth_bound_ == o.depth_bound_ && nodes_ == o.nodes_;
    }

private:
    std::vector<ArmNode> nodes_;
    NodeId root_ = 0;
    int depth_bound_ = 0;
    std::unordered_map<std::string, NodeId> by_name_;
};

// ---------------------------------------------------------------------------
// (alpha,beta) arms

inline std::string beta_state_name(long a, long b) {
    return std::to_string(a) + "," + std::to_string(b);
}

/**
 * Posterior lattice of an (alpha,beta) Bernoulli arm truncated at `depth`.
 *
 * State (a,b) pays a/(a+b); success moves to (a+1,b) with probability
 * a/(a+b), failure to (a,b+1). Equal (a,b) states are merged, so layer j
 * holds j+1 nodes, ordered by decreasing number of successes.
 */
inline ArmDag beta_bernoulli_arm(long alpha, long beta, int depth) {
    if (alpha <= 0 || beta <= 0) throw std::invalid_argument("alpha and beta must be positive");
    if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
    auto index = [](long layer, long successes) {
        return static_cast<NodeId>(layer * (layer + 1) / 2 + (layer - successes));
    };
    std::vector<ArmNode> nodes;
    nodes.reserve(static_cast<std::size_t>((depth + 1) * (depth + 2) / 2));
    for (long j = 0; j <= depth; ++j) {
        for (long k = j; k >= 0; --k) {
            const long a = alpha + k, b = beta + (j - k);
            ArmNode n;
            n.id = beta_state_name(a, b);
            n.layer = static_cast<int>(j);
            n.zeta = make_rational(a, a + b);
            if (j < depth) {
                n.edges.push_back({index(j + 1, k + 1), make_rational(a, a + b), Outcome::success});
                n.edges.push_back({index(j + 1, k), make_rational(b, a + b), Outcome::failure});
            }
            nodes.push_back(std::move(n));
        }
    }
    return ArmDag(std::move(nodes), 0, depth);
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    enum class Kind { root_layer, layering, depth, negative_probability, stochasticity, martingale, reachability };
    Kind kind;
    NodeId node;
    std::string message;
    Rational residual;  ///< signed defect for stochasticity/martingale entries
};

struct ValidationReport {
    std::vector<Violation> entries;

    bool ok() const { return entries.empty(); }
    bool has(Violation::Kind k) const {
        return std::any_of(entries.begin(), entries.end(), [k](const Violation& v) { return v.kind == k; });
    }
};

/// Exact check of every ArmDag invariant; an empty report means the arm is valid.
inline ValidationReport validate(const ArmDag& dag) {
    ValidationReport report;
    auto add = [&](Violation::Kind k, NodeId u, std::string msg, Rational residual = 0) {
        report.entries.push_back({k, u, std::move(msg), std::move(residual)});
    };
    const auto& nodes = dag.nodes();

    if (nodes[dag.root()].layer != 0)
        add(Violation::Kind::root_layer, dag.root(), "root " + nodes[dag.root()].id + " is not at layer 0");

    for (NodeId u = 0; u < nodes.size(); ++u) {
        const ArmNode& n = nodes[u];
        if (n.layer < 0 || n.layer > dag.depth_bound())
            add(Violation::Kind::depth, u,
                "node " + n.id + " at layer " + std::to_string(n.layer) + " exceeds depth bound " +
                    std::to_string(dag.depth_bound()));
        if (n.edges.empty()) continue;

        Rational total = 0, mean = 0;
        for (const auto& e : n.edges) {
            const ArmNode& v = nodes[e.to];
            if (v.layer != n.layer + 1)
                add(Violation::Kind::layering, u,
                    "layering violation: edge " + n.id + " -> " + v.id + " goes from layer " +
                        std::to_string(n.layer) + " to layer " + std::to_string(v.layer));
            if (e.p < 0)
                add(Violation::Kind::negative_probability, u,
                    "negative probability " + to_string(e.p) + " on edge " + n.id + " -> " + v.id);
            total += e.p;
            mean += e.p * v.zeta;
        }
        if (total != 1)
            add(Violation::Kind::stochasticity, u,
                "stochasticity violation at node " + n.id + ": probabilities sum to " + to_string(total),
                total - 1);
        if (mean != n.zeta) {
            Rational residual = mean - n.zeta;
            add(Violation::Kind::martingale, u,
                "martingale violation at node " + n.id + ", residual " + to_string(residual), residual);
        }
    }

    std::vector<char> seen(nodes.size(), 0);
    for (NodeId v : dag.reachable_from(dag.root())) seen[v] = 1;
    for (NodeId u = 0; u < nodes.size(); ++u)
        if (!seen[u]) add(Violation::Kind::reachability, u, "node " + nodes[u].id + " is unreachable from the root");
    return report;
}

// ---------------------------------------------------------------------------
// Layering of general state graphs

template <class State>
struct Transition {
    State to;
    Rational p;
    Outcome outcome = Outcome::none;
};

/**
 * Unrolls a (possibly cyclic or infinite) state graph into a layered DAG of depth h.
 *
 * `successors(s)` returns the transitions of s (empty for terminal states),
 * `payoff(s)` its expected payoff and `name(s, layer)` the node id to use.
 * Copies of one state within a layer are merged. Nodes are numbered in
 * breadth-first discovery order. State must be ordered (operator<).
 */
template <class State, class Successors, class Payoff, class Name>
ArmDag layerize(const State& initial, Successors&& successors, Payoff&& payoff, int h, Name&& name) {
    if (h < 0) throw std::invalid_argument("layerize: negative depth");
    std::vector<ArmNode> nodes;
    std::vector<State> frontier{initial};
    std::vector<NodeId> frontier_ids{0};
    nodes.push_back({name(initial, 0), 0, payoff(initial), {}});
    for (int layer = 0; layer < h && !frontier.empty(); ++layer) {
        std::vector<State> next;
        std::vector<NodeId> next_ids;
        std::map<State, NodeId> index;
        for (std::size_t k = 0; k < frontier.size(); ++k) {
            std::vector<ArmEdge> edges;
            for (auto&& t : successors(frontier[k])) {
                auto [it, inserted] = index.try_emplace(t.to, nodes.size());
                if (inserted) {
                    nodes.push_back({name(t.to, layer + 1), layer + 1, payoff(t.to), {}});
                    next.push_back(t.to);
                    next_ids.push_back(it->second);
                }
                edges.push_back({it->second, t.p, t.outcome});
            }
            nodes[frontier_ids[k]].edges = std::move(edges);
        }
        frontier = std::move(next);
        frontier_ids = std::move(next_ids);
    }
    return ArmDag(std::move(nodes), 0, h);
}

/// Finite state graph given by named states and stochastic transition rows.
struct StateGraph {
    struct State {
        std::string name;
        Rational zeta;
        std::vector<std::pair<std::string, Rational>> transitions;  ///< empty = terminal
    };
    std::vector<State> states;
    std::string initial;
};

/**
 * Unrolls a finite state graph to depth h. Node ids are "name@layer".
 * Throws std::invalid_argument on dangling transitions, a missing initial
 * state or a non-stochastic row.
 */
inline ArmDag layerize(const StateGraph& g, int h) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < g.states.size(); ++i)
        if (!index.emplace(g.states[i].name, i).second)
            throw std::invalid_argument("layerize: duplicate state " + g.states[i].name);
    for (const auto& s : g.states) {
        Rational total = 0;
        for (const auto& [to, p] : s.transitions) {
            if (!index.count(to))
                throw std::invalid_argument("layerize: dangling transition " + s.name + " -> " + to);
            if (p < 0) throw std::invalid_argument("layerize: negative probability in row " + s.name);
            total += p;
        }
        if (!s.transitions.empty() && total != 1)
            throw std::invalid_argument("layerize: row " + s.name + " sums to " + to_string(total));
    }
    auto start = index.find(g.initial);
    if (start == index.end()) throw std::invalid_argument("layerize: unknown initial state " + g.initial);

    return layerize(
        start->second,
        [&](std::size_t s) {
            std::vector<Transition<std::size_t>> out;
            for (const auto& [to, p] : g.states[s].transitions) out.push_back({index.at(to), p});
            return out;
        },
        [&](std::size_t s) { return g.states[s].zeta; }, h,
        [&](std::size_t s, int layer) { return g.states[s].name + "@" + std::to_string(layer); });
}

/// Views an arm as a finite state graph (the inverse direction of layerize).
inline StateGraph to_state_graph(const ArmDag& dag) {
    StateGraph g;
    g.initial = dag.node(dag.root()).id;
    for (const auto& n : dag.nodes()) {
        StateGraph::State s{n.id, n.zeta, {}};
        for (const auto& e : n.edges) s.transitions.emplace_back(dag.node(e.to).id, e.p);
        g.states.push_back(std::move(s));
    }
    return g;
}

}  // namespace budgeted
