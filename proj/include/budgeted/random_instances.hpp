#pragma once

#include "budgeted/system.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace budgeted {

struct RandomDagShape {
    int depth = 3;
    int max_width = 3;      ///< states per layer
    int min_branching = 1;  ///< children per state, when the next layer is wide enough
    int max_branching = 3;
    int zeta_denominator = 6;
    double early_leaf = 0.15;  ///< chance that a state above the last layer has no children
    double zero_leaf = 0.0;    ///< chance that a leaf pays 0, which makes exploring worth more
};

/**
 * Random layered DAG whose martingale holds by construction: leaf payoffs are
 * drawn, inner payoffs are the probability-weighted averages of their children.
 * States may share children, so the result is a DAG rather than a tree.
 */
inline ArmDag random_martingale_dag(std::mt19937_64& rng, const RandomDagShape& shape) {
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

    std::vector<int> width(shape.depth + 1);
    width[0] = 1;
    for (int j = 1; j <= shape.depth; ++j) width[j] = uniform_int(1, shape.max_width);

    // Provisional (layer, slot) nodes; unreachable ones are dropped below.
    struct Proto {
        std::vector<std::pair<int, Rational>> edges;  // slot in next layer, probability
        Rational zeta;
    };
    std::vector<std::vector<Proto>> layers(shape.depth + 1);
    for (int j = 0; j <= shape.depth; ++j) layers[j].resize(width[j]);

    for (int j = 0; j < shape.depth; ++j) {
        for (auto& node : layers[j]) {
            if (j > 0 && chance(shape.early_leaf)) continue;
            const int most = std::min(shape.max_branching, width[j + 1]);
            const int k = uniform_int(std::min(shape.min_branching, most), most);
            std::vector<int> slots(width[j + 1]);
            for (int s = 0; s < width[j + 1]; ++s) slots[s] = s;
            std::shuffle(slots.begin(), slots.end(), rng);
            std::vector<int> weight(k);
            int total = 0;
            for (auto& w : weight) total += (w = uniform_int(1, 4));
            for (int c = 0; c < k; ++c) node.edges.emplace_back(slots[c], make_rational(weight[c], total));
        }
    }
    for (int j = shape.depth; j >= 0; --j)
        for (auto& node : layers[j]) {
            if (node.edges.empty() && chance(shape.zero_leaf)) {
                node.zeta = 0;
            } else if (node.edges.empty()) {
                node.zeta = make_rational(uniform_int(0, shape.zeta_denominator), shape.zeta_denominator);
            } else {
                node.zeta = 0;
                for (const auto& [slot, p] : node.edges) node.zeta += p * layers[j + 1][slot].zeta;
            }
        }

    std::vector<std::vector<char>> reached(shape.depth + 1);
    for (int j = 0; j <= shape.depth; ++j) reached[j].assign(width[j], 0);
    reached[0][0] = 1;
    for (int j = 0; j < shape.depth; ++j)
        for (int s = 0; s < width[j]; ++s)
            if (reached[j][s])
                for (const auto& e : layers[j][s].edges) reached[j + 1][e.first] = 1;

    std::vector<std::vector<NodeId>> id(shape.depth + 1);
    std::vector<ArmNode> nodes;
    for (int j = 0; j <= shape.depth; ++j) {
        id[j].assign(width[j], 0);
        for (int s = 0; s < width[j]; ++s)
            if (reached[j][s]) {
                id[j][s] = nodes.size();
                nodes.push_back({"s" + std::to_string(j) + "_" + std::to_string(s), j, layers[j][s].zeta, {}});
            }
    }
    for (int j = 0; j < shape.depth; ++j)
        for (int s = 0; s < width[j]; ++s)
            if (reached[j][s])
                for (const auto& [slot, p] : layers[j][s].edges)
                    nodes[id[j][s]].edges.push_back({id[j + 1][slot], p, Outcome::none});
    return ArmDag(std::move(nodes), 0, shape.depth);
}

/// Either a random martingale DAG or a small (alpha,beta) arm, depth at most max_depth.
inline ArmDag random_arm(std::mt19937_64& rng, int max_depth) {
    const int depth = std::uniform_int_distribution<int>(1, max_depth)(rng);
    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
        const int a = std::uniform_int_distribution<int>(1, 4)(rng);
        const int b = std::uniform_int_distribution<int>(1, 4)(rng);
        return beta_bernoulli_arm(a, b, std::min(depth, 3));
    }
    RandomDagShape shape;
    shape.depth = depth;
    shape.zero_leaf = std::uniform_int_distribution<int>(0, 1)(rng) ? 0.5 : 0.0;
    shape.min_branching = std::uniform_int_distribution<int>(1, 2)(rng);
    return random_martingale_dag(rng, shape);
}

/// 2 or 3 random arms (or exactly `arms` when nonzero).
inline ArmSet random_system(std::mt19937_64& rng, int max_depth, int arms = 0) {
    const int n = arms > 0 ? arms : std::uniform_int_distribution<int>(2, 3)(rng);
    std::vector<ArmDag> out;
    for (int i = 0; i < n; ++i) out.push_back(random_arm(rng, max_depth));
    return share_arms(std::move(out));
}

}  // namespace budgeted
