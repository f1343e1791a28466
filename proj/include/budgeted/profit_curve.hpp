#pragma once

#include "budgeted/arm_io.hpp"
#include "budgeted/arm_model.hpp"
#include "budgeted/single_arm_policy.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace budgeted {

/// Missing or inconsistent inputs to the curve construction.
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/**
 * End point of one segment of a profit curve.
 *
 * `allocations` holds the budget E_v handed to every immediate descendant v
 * (in v's own cost units) when the corner's policy explores the owner; it is
 * empty for the corner that exploits the owner immediately.
 */
struct CurveCorner {
    Rational cost;
    Rational profit;
    std::vector<std::pair<NodeId, Rational>> allocations;

    bool operator==(const CurveCorner&) const = default;
};

/**
 * Optimal single-arm profit as a function of the allowed cost, for one state.
 *
 * Concave and piecewise linear; the corners are listed left to right and are
 * implicitly preceded by (0,0). The last corner is always (1, zeta(owner)),
 * reached by exploiting the owner.
 */
struct ProfitCurve {
    NodeId owner = 0;
    int horizon = 1;
    std::vector<CurveCorner> corners;

    std::size_t segments() const { return corners.size(); }

    /// Slope of the segment that ends at corner i.
    Rational slope(std::size_t i) const {
        const Rational c0 = i == 0 ? Rational(0) : corners[i - 1].cost;
        const Rational p0 = i == 0 ? Rational(0) : corners[i - 1].profit;
        return (corners[i].profit - p0) / (corners[i].cost - c0);
    }

    /// Linear interpolation; constant past the last corner.
    Rational at(const Rational& cost) const {
        if (cost <= 0) return 0;
        Rational c0 = 0, p0 = 0;
        for (const auto& k : corners) {
            if (cost <= k.cost) return p0 + (k.profit - p0) * (cost - c0) / (k.cost - c0);
            c0 = k.cost;
            p0 = k.profit;
        }
        return p0;
    }
};

/// Best profit given that the owner is explored first, which costs 1/h up front.
struct ExplorationCurve {
    NodeId owner = 0;
    int horizon = 1;
    Rational fixed_cost;
    std::vector<CurveCorner> corners;
};

using CurveMap = std::map<NodeId, ProfitCurve>;

namespace detail {

// Positive-probability children of u, duplicates combined, in edge order.
inline std::vector<std::pair<NodeId, Rational>> live_children(const ArmDag& dag, NodeId u) {
    std::vector<std::pair<NodeId, Rational>> out;
    for (const auto& e : dag.node(u).edges) {
        if (e.p == 0) continue;
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& c) { return c.first == e.to; });
        if (it == out.end())
            out.emplace_back(e.to, e.p);
        else
            it->second += e.p;
    }
    return out;
}

}  // namespace detail

/**
 * Merges the segments of the descendants' profit curves in order of
 * decreasing slope, each scaled by its transition probability, starting from
 * the fixed exploration cost 1/h. Runs of equal slope produce one corner.
 */
inline ExplorationCurve compute_exploration_curve(const ArmDag& dag, NodeId u, const CurveMap& descendant_curves, int h) {
    if (h < 1) throw std::invalid_argument("compute_exploration_curve: h must be >= 1");
    const auto children = detail::live_children(dag, u);

    std::vector<const ProfitCurve*> curves;
    for (const auto& [v, p] : children) {
        auto it = descendant_curves.find(v);
        if (it == descendant_curves.end())
            throw StructuralError("missing profit curve for descendant " + dag.node(v).id + " of " + dag.node(u).id);
        curves.push_back(&it->second);
    }

    struct Segment {
        Rational slope;
        std::size_t child;
        std::size_t index;
    };
    // Highest slope first; ties go to the smaller descendant id, then the earlier segment.
    auto later = [&](const Segment& a, const Segment& b) {
        if (a.slope != b.slope) return a.slope < b.slope;
        if (children[a.child].first != children[b.child].first) return children[a.child].first > children[b.child].first;
        return a.index > b.index;
    };
    std::priority_queue<Segment, std::vector<Segment>, decltype(later)> heap(later);
    for (std::size_t c = 0; c < curves.size(); ++c)
        if (!curves[c]->corners.empty()) heap.push({curves[c]->slope(0), c, 0});

    ExplorationCurve x;
    x.owner = u;
    x.horizon = h;
    x.fixed_cost = make_rational(1, h);
    Rational cost = x.fixed_cost, profit = 0;
    std::vector<Rational> budget(children.size());

    while (!heap.empty()) {
        const Rational run_slope = heap.top().slope;
        while (!heap.empty() && heap.top().slope == run_slope) {
            Segment s = heap.top();
            heap.pop();
            const auto& k = curves[s.child]->corners;
            const Rational dc = k[s.index].cost - (s.index ? k[s.index - 1].cost : Rational(0));
            const Rational dp = k[s.index].profit - (s.index ? k[s.index - 1].profit : Rational(0));
            const Rational& prob = children[s.child].second;
            cost += prob * dc;
            profit += prob * dp;
            budget[s.child] += dc;
            if (s.index + 1 < k.size()) heap.push({curves[s.child]->slope(s.index + 1), s.child, s.index + 1});
        }
        CurveCorner corner{cost, profit, {}};
        for (std::size_t c = 0; c < children.size(); ++c) corner.allocations.emplace_back(children[c].first, budget[c]);
        x.corners.push_back(std::move(corner));
    }
    return x;
}

/**
 * Concave envelope of (0,0), the exploration corners and the exploitation
 * point (1, zeta_u).
 *
 * The first corner is the exploration corner with the best profit-to-cost
 * ratio (the last one on ties). If that ratio does not beat zeta_u the state
 * exploits immediately and the curve is the single segment to (1, zeta_u).
 */
inline ProfitCurve compute_profit_curve(NodeId u, const ExplorationCurve& x, const Rational& zeta_u) {
    ProfitCurve curve;
    curve.owner = u;
    curve.horizon = x.horizon;

    std::optional<std::size_t> best;
    Rational best_ratio;
    for (std::size_t j = 0; j < x.corners.size(); ++j) {
        if (x.corners[j].cost >= 1) break;
        Rational r = x.corners[j].profit / x.corners[j].cost;
        if (!best || r >= best_ratio) {
            best = j;
            best_ratio = r;
        }
    }

    if (best && best_ratio > zeta_u) {
        std::size_t j = *best;
        curve.corners.push_back(x.corners[j]);
        for (++j; j < x.corners.size() && x.corners[j].cost < 1; ++j) {
            const auto& prev = x.corners[j - 1];
            const Rational explore_slope = (x.corners[j].profit - prev.profit) / (x.corners[j].cost - prev.cost);
            const Rational exploit_slope = (zeta_u - prev.profit) / (1 - prev.cost);
            if (!(explore_slope > exploit_slope)) break;
            curve.corners.push_back(x.corners[j]);
        }
    }
    curve.corners.push_back({Rational(1), zeta_u, {}});
    return curve;
}

/// Profit curve of a state without live descendants: the line from (0,0) to (1, zeta).
inline ProfitCurve leaf_curve(NodeId u, const Rational& zeta, int h) {
    ProfitCurve c;
    c.owner = u;
    c.horizon = h;
    c.corners.push_back({Rational(1), zeta, {}});
    return c;
}

/**
 * Profit curves of every state, deepest layer first.
 *
 * With workers > 1 the states of one layer are split across threads; the
 * result does not depend on the number of workers.
 */
inline CurveMap compute_all_curves(const ArmDag& dag, int h, unsigned workers = 1) {
    if (h < 1) throw std::invalid_argument("compute_all_curves: h must be >= 1");
    std::map<int, std::vector<NodeId>, std::greater<>> layers;
    for (NodeId u = 0; u < dag.size(); ++u) layers[dag.node(u).layer].push_back(u);

    CurveMap curves;
    for (const auto& [layer, ids] : layers) {
        std::vector<ProfitCurve> done(ids.size());
        auto work = [&](std::size_t first, std::size_t stride) {
            for (std::size_t k = first; k < ids.size(); k += stride) {
                const NodeId u = ids[k];
                if (dag.is_leaf(u) || detail::live_children(dag, u).empty())
                    done[k] = leaf_curve(u, dag.zeta(u), h);
                else
                    done[k] = compute_profit_curve(u, compute_exploration_curve(dag, u, curves, h), dag.zeta(u));
            }
        };
        const std::size_t n = std::min<std::size_t>(std::max(1u, workers), ids.size());
        if (n <= 1) {
            work(0, 1);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
            for (auto& t : pool) t.join();
        }
        for (std::size_t k = 0; k < ids.size(); ++k) curves.emplace(ids[k], std::move(done[k]));
    }
    return curves;
}

/// Slope of the first segment: the best profit-to-cost ratio of any single-arm pseudo-policy.
inline Rational ratio_index(const ProfitCurve& curve) {
    if (curve.corners.empty()) throw std::invalid_argument("ratio_index: empty curve");
    return curve.corners.front().profit / curve.corners.front().cost;
}

/**
 * Deterministic ratio-index policy of state u: the policy realizing the first
 * corner of u's curve, recovered by following the corner allocations down the
 * DAG. A descendant given budget 0 is abandoned; budget equal to a corner of
 * its own curve continues with that corner's policy; the final corner means
 * exploit. Throws StructuralError if an allocation is not a corner cost or a
 * state would receive two different labels.
 */
inline SingleArmPolicy extract_ratio_policy(const ArmDag& dag, const CurveMap& curves, NodeId u) {
    SingleArmPolicy policy;
    policy.start = u;
    auto curve_of = [&](NodeId v) -> const ProfitCurve& {
        auto it = curves.find(v);
        if (it == curves.end()) throw StructuralError("no profit curve for state " + dag.node(v).id);
        return it->second;
    };
    auto assign = [&](NodeId v, Label l) {
        auto [it, inserted] = policy.labels.emplace(v, l);
        if (!inserted && it->second != l)
            throw StructuralError("conflicting labels for state " + dag.node(v).id);
        return inserted;
    };

    // (state, corner index) pairs still to expand
    std::vector<std::pair<NodeId, std::size_t>> pending{{u, 0}};
    std::map<NodeId, std::size_t> chosen_corner{{u, 0}};
    while (!pending.empty()) {
        auto [v, k] = pending.back();
        pending.pop_back();
        const ProfitCurve& c = curve_of(v);
        if (k + 1 == c.corners.size()) {
            assign(v, Label::exploit);
            continue;
        }
        assign(v, Label::explore);
        for (const auto& [child, budget] : c.corners[k].allocations) {
            if (budget == 0) {
                assign(child, Label::abandon);
                continue;
            }
            const ProfitCurve& cc = curve_of(child);
            auto hit = std::find_if(cc.corners.begin(), cc.corners.end(),
                                    [&](const CurveCorner& k2) { return k2.cost == budget; });
            if (hit == cc.corners.end())
                throw StructuralError("allocation " + to_string(budget) + " to " + dag.node(child).id +
                                      " is not a corner of its curve");
            const std::size_t idx = static_cast<std::size_t>(hit - cc.corners.begin());
            auto [it, inserted] = chosen_corner.emplace(child, idx);
            if (!inserted) {
                if (it->second != idx) throw StructuralError("state " + dag.node(child).id + " reached at two corners");
                continue;
            }
            pending.emplace_back(child, idx);
        }
    }
    return policy;
}

/// Number of states in the sub-DAG rooted at u.
inline std::size_t sub_dag_size(const ArmDag& dag, NodeId u) { return dag.reachable_from(u).size(); }

inline json curve_to_json(const ArmDag& dag, const ProfitCurve& curve) {
    json out = json::array();
    for (const auto& k : curve.corners) {
        json alloc = json::object();
        for (const auto& [v, b] : k.allocations) alloc[dag.node(v).id] = to_string(b);
        out.push_back({{"cost", to_string(k.cost)}, {"profit", to_string(k.profit)}, {"allocations", std::move(alloc)}});
    }
    return out;
}

}  // namespace budgeted
