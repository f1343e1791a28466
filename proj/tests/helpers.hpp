#pragma once

#include "budgeted/budgeted.hpp"

#include <ostream>
#include <string>

namespace budgeted {
inline void PrintTo(const Action& a, std::ostream* os) { *os << to_string(a); }
}  // namespace budgeted

namespace budgeted::testing {

inline Rational q(long n, long d = 1) { return make_rational(n, d); }

/// Root with payoff 1/2 and two leaves paying 1 and 0 with probability 1/2 each.
inline ArmDag two_outcome_arm() {
    return ArmDag({{"u", 0, q(1, 2), {{1, q(1, 2)}, {2, q(1, 2)}}}, {"v1", 1, q(1), {}}, {"v2", 1, q(0), {}}}, 0, 1);
}

inline ArmDag absorbing_arm(const Rational& zeta, const std::string& id = "c") {
    return ArmDag({{id, 0, zeta, {}}}, 0, 0);
}

/// Full binary tree of the given depth; leaf payoffs alternate 0 and 1.
inline ArmDag binary_tree(int depth) {
    std::vector<ArmNode> nodes;
    for (int j = 0; j <= depth; ++j)
        for (int k = 0; k < (1 << j); ++k) nodes.push_back({"t" + std::to_string(j) + "_" + std::to_string(k), j, 0, {}});
    auto idx = [](int j, int k) { return static_cast<NodeId>((1 << j) - 1 + k); };
    for (int j = depth; j >= 0; --j)
        for (int k = 0; k < (1 << j); ++k) {
            ArmNode& n = nodes[idx(j, k)];
            if (j == depth) {
                n.zeta = q(k % 2);
                continue;
            }
            n.edges = {{idx(j + 1, 2 * k), q(1, 2)}, {idx(j + 1, 2 * k + 1), q(1, 2)}};
            n.zeta = (nodes[idx(j + 1, 2 * k)].zeta + nodes[idx(j + 1, 2 * k + 1)].zeta) / 2;
        }
    return ArmDag(std::move(nodes), 0, depth);
}

inline std::string data_path(const std::string& name) { return std::string(DATA_DIR) + "/" + name; }

}  // namespace budgeted::testing
