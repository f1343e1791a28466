#pragma once

#include "budgeted/arm_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace budgeted {

struct GittinsQuery {
    const ArmDag& dag;
    NodeId state;
    double theta;
    double tolerance = 1e-9;
};

namespace detail {

inline void check_gittins_args(double theta, double tolerance) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("gittins: theta must lie in (0,1)");
    if (!(tolerance > 0.0)) throw std::invalid_argument("gittins: tolerance must be positive");
}

// Retirement-value recursion on one sub-DAG. `order` lists the states by
// increasing layer; values are filled deepest first.
class RetirementSolver {
public:
    RetirementSolver(const ArmDag& dag, NodeId u, double theta)
        : dag_(dag), theta_(theta), order_(dag.reachable_from(u)), zeta_(dag.size()), w_(dag.size()) {
        for (NodeId v : order_) zeta_[v] = to_double(dag.zeta(v));
        lo_ = hi_ = zeta_[u];
        for (NodeId v : order_) {
            lo_ = std::min(lo_, zeta_[v]);
            hi_ = std::max(hi_, zeta_[v]);
        }
    }

    bool absorbing(NodeId v) const {
        if (dag_.is_leaf(v)) return true;
        for (const auto& e : dag_.node(v).edges)
            if (e.p != 0) return false;
        return true;
    }

    /// Value at the start state of continuing once more, before the max with 0.
    double continuation(double lambda) {
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            const NodeId v = *it;
            double g;
            if (absorbing(v)) {
                g = (zeta_[v] - lambda) / (1.0 - theta_);
            } else {
                double next = 0.0;
                for (const auto& e : dag_.node(v).edges)
                    if (e.p != 0) next += to_double(e.p) * w_[e.to];
                g = zeta_[v] - lambda + theta_ * next;
            }
            w_[v] = it == order_.rend() - 1 ? g : std::max(0.0, g);
        }
        return w_[order_.front()];
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    const ArmDag& dag_;
    double theta_;
    std::vector<NodeId> order_;
    std::vector<double> zeta_, w_;
    double lo_, hi_;
};

}  // namespace detail

/**
 * Gittins index of one state for discount factor theta, by bisection on the
 * retirement reward lambda. Leaves of the DAG are absorbing: they pay zeta
 * forever.
 */
inline double gittins_index(const GittinsQuery& q) {
    detail::check_gittins_args(q.theta, q.tolerance);
    detail::RetirementSolver solver(q.dag, q.state, q.theta);
    if (solver.absorbing(q.state)) return to_double(q.dag.zeta(q.state));
    double lo = solver.lo(), hi = solver.hi();
    while (hi - lo > q.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (solver.continuation(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Index of every state, indexed by NodeId.
inline std::vector<double> gittins_indices_all(const ArmDag& dag, double theta, double tolerance = 1e-9) {
    detail::check_gittins_args(theta, tolerance);
    std::vector<double> out(dag.size());
    for (NodeId u = 0; u < dag.size(); ++u) out[u] = gittins_index({dag, u, theta, tolerance});
    return out;
}

}  // namespace budgeted
