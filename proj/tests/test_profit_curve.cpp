#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace budgeted;
using budgeted::testing::q;

namespace {

// Best profit of a mixture of at most two enumerated policies with expected cost <= c.
Rational best_mixture(const std::vector<PolicyPoint>& pts, const Rational& c) {
    Rational best = 0;
    for (const auto& a : pts) {
        if (a.cost > c) continue;
        if (a.profit > best) best = a.profit;
        for (const auto& b : pts) {
            if (b.cost <= c) continue;
            const Rational v = a.profit + (b.profit - a.profit) * (c - a.cost) / (b.cost - a.cost);
            if (v > best) best = v;
        }
    }
    return best;
}

void expect_matches_mixture_oracle(const ProfitCurve& curve, std::vector<PolicyPoint> pts, const std::string& what) {
    pts.push_back({0, 0, {}});
    std::set<Rational> probes{q(1), q(1, 2), q(1, 7), q(5, 6)};
    for (const auto& k : curve.corners) probes.insert(k.cost);
    for (const auto& p : pts)
        if (p.cost > 0 && p.cost <= 1) probes.insert(p.cost);
    for (const auto& c : probes) ASSERT_EQ(curve.at(c), best_mixture(pts, c)) << what << " at cost " << to_string(c);
}

void expect_concave_monotone(const ArmDag& dag, const ProfitCurve& c) {
    ASSERT_FALSE(c.corners.empty());
    EXPECT_EQ(c.corners.back().cost, 1);
    EXPECT_EQ(c.corners.back().profit, dag.zeta(c.owner));
    for (std::size_t i = 0; i < c.corners.size(); ++i) {
        if (i > 0) {
            EXPECT_GT(c.corners[i].cost, c.corners[i - 1].cost);
            EXPECT_GE(c.corners[i].profit, c.corners[i - 1].profit);
            EXPECT_LT(c.slope(i), c.slope(i - 1));
        }
    }
    EXPECT_GE(ratio_index(c), dag.zeta(c.owner));
}

}  // namespace

TEST(ExplorationCurve, TwoLeafChildren) {
    const ArmDag d = budgeted::testing::two_outcome_arm();
    CurveMap leaves{{1, leaf_curve(1, q(1), 4)}, {2, leaf_curve(2, q(0), 4)}};
    const ExplorationCurve x = compute_exploration_curve(d, 0, leaves, 4);
    EXPECT_EQ(x.fixed_cost, q(1, 4));
    ASSERT_EQ(x.corners.size(), 2u);
    EXPECT_EQ(x.corners[0].cost, q(3, 4));
    EXPECT_EQ(x.corners[0].profit, q(1, 2));
    EXPECT_EQ(x.corners[1].cost, q(5, 4));
    EXPECT_EQ(x.corners[1].profit, q(1, 2));
    // cumulative allocations: v1 gets its full unit first, then v2
    EXPECT_EQ(x.corners[0].allocations, (std::vector<std::pair<NodeId, Rational>>{{1, q(1)}, {2, q(0)}}));
    EXPECT_EQ(x.corners[1].allocations, (std::vector<std::pair<NodeId, Rational>>{{1, q(1)}, {2, q(1)}}));
}

TEST(ExplorationCurve, MissingDescendantCurveIsStructuralError) {
    const ArmDag d = budgeted::testing::two_outcome_arm();
    CurveMap partial{{1, leaf_curve(1, q(1), 4)}};
    EXPECT_THROW(compute_exploration_curve(d, 0, partial, 4), StructuralError);
}

TEST(ExplorationCurve, IdenticalChildrenMergeSegments) {
    // u -> a, b with equal payoffs and identical sub-DAGs below them.
    const ArmDag d({{"u", 0, q(1, 2), {{1, q(1, 2)}, {2, q(1, 2)}}},
                    {"a", 1, q(1, 2), {{3, q(1, 2)}, {4, q(1, 2)}}},
                    {"b", 1, q(1, 2), {{3, q(1, 2)}, {4, q(1, 2)}}},
                    {"x", 2, q(1), {}},
                    {"y", 2, q(0), {}}},
                   0, 2);
    const int h = 4;
    const CurveMap curves = compute_all_curves(d, h);
    const ExplorationCurve x = compute_exploration_curve(d, 0, curves, h);
    EXPECT_EQ(x.corners.size(), curves.at(1).corners.size());
    EXPECT_EQ(curves.at(1).corners, curves.at(2).corners);
}

TEST(ExplorationCurve, SingleChildShiftsByFixedCost) {
    const ArmDag d({{"u", 0, q(1, 2), {{1, q(1)}}}, {"v", 1, q(1, 2), {{2, q(1, 2)}, {3, q(1, 2)}}}, {"x", 2, q(1), {}},
                    {"y", 2, q(0), {}}},
                   0, 2);
    for (int h = 1; h <= 6; ++h) {
        const CurveMap curves = compute_all_curves(d, h);
        const ExplorationCurve x = compute_exploration_curve(d, 0, curves, h);
        const auto& child = curves.at(1).corners;
        ASSERT_EQ(x.corners.size(), child.size());
        for (std::size_t i = 0; i < child.size(); ++i) {
            EXPECT_EQ(x.corners[i].cost, child[i].cost + q(1, h));
            EXPECT_EQ(x.corners[i].profit, child[i].profit);
        }
    }
}

TEST(ProfitCurve, LeafIsSingleSegment) {
    const ArmDag d = budgeted::testing::absorbing_arm(q(3, 7));
    const CurveMap curves = compute_all_curves(d, 3);
    ASSERT_EQ(curves.at(0).corners.size(), 1u);
    EXPECT_EQ(curves.at(0).corners[0].cost, 1);
    EXPECT_EQ(curves.at(0).corners[0].profit, q(3, 7));
    EXPECT_EQ(ratio_index(curves.at(0)), q(3, 7));
    const SingleArmPolicy p = extract_ratio_policy(d, curves, 0);
    EXPECT_EQ(p.labels, (std::map<NodeId, Label>{{0, Label::exploit}}));
}

TEST(ProfitCurve, TwoOutcomeNodeAtH4) {
    const ArmDag d = budgeted::testing::two_outcome_arm();
    const CurveMap curves = compute_all_curves(d, 4);
    const ProfitCurve& c = curves.at(0);
    ASSERT_EQ(c.corners.size(), 2u);
    EXPECT_EQ(c.corners[0].cost, q(3, 4));
    EXPECT_EQ(c.corners[0].profit, q(1, 2));
    EXPECT_EQ(c.corners[1].cost, q(1));
    EXPECT_EQ(c.corners[1].profit, q(1, 2));
    EXPECT_EQ(c.slope(1), 0);
    EXPECT_EQ(ratio_index(c), q(2, 3));

    const SingleArmPolicy p = extract_ratio_policy(d, curves, 0);
    EXPECT_EQ(p.at(0), Label::explore);
    EXPECT_EQ(p.at(1), Label::exploit);
    EXPECT_EQ(p.at(2), Label::abandon);
    const PolicyValue v = evaluate_policy(d, p, 4);
    EXPECT_EQ(v.cost, q(3, 4));
    EXPECT_EQ(v.profit, q(1, 2));
}

TEST(ProfitCurve, TwoOutcomeNodeAtH1ExploitsImmediately) {
    const ArmDag d = budgeted::testing::two_outcome_arm();
    const CurveMap curves = compute_all_curves(d, 1);
    ASSERT_EQ(curves.at(0).corners.size(), 1u);
    EXPECT_EQ(curves.at(0).corners[0].profit, q(1, 2));
    EXPECT_EQ(extract_ratio_policy(d, curves, 0).at(0), Label::exploit);
}

TEST(ProfitCurve, RatioEqualToPayoffExploits) {
    ExplorationCurve x;
    x.horizon = 2;
    x.corners.push_back({q(1, 2), q(1, 6), {}});
    EXPECT_EQ(compute_profit_curve(0, x, q(1, 3)).corners.size(), 1u);
    EXPECT_EQ(compute_profit_curve(0, x, q(1, 4)).corners.size(), 2u);
}

TEST(ProfitCurve, CornersPastUnitCostAreDropped) {
    ExplorationCurve x;
    x.horizon = 1;
    x.corners.push_back({q(4, 3), q(1, 3), {}});
    EXPECT_EQ(compute_profit_curve(0, x, q(1, 5)).corners.size(), 1u);
}

TEST(ProfitCurve, BetaArmMatchesEnvelope) {
    const ArmDag d = beta_bernoulli_arm(1, 1, 1);
    const CurveMap curves = compute_all_curves(d, 2);
    const auto pts = enumerate_policies(d, 0, 2);
    expect_matches_mixture_oracle(curves.at(0), pts, "beta(1,1,1) h=2");
}

TEST(ProfitCurve, ArmBAtH1IsSingleCorner) {
    const ArmDag d = beta_bernoulli_arm(28, 19, 1);
    const CurveMap curves = compute_all_curves(d, 1);
    ASSERT_EQ(curves.at(0).corners.size(), 1u);
    EXPECT_EQ(curves.at(0).corners[0].profit, q(28, 47));
}

TEST(ProfitCurve, ConstantPayoffsGiveSingleSegments) {
    std::vector<ArmNode> nodes{{"r", 0, q(2, 5), {{1, q(1, 3)}, {2, q(2, 3)}}},
                               {"a", 1, q(2, 5), {{3, q(1)}}},
                               {"b", 1, q(2, 5), {{3, q(1, 2)}, {4, q(1, 2)}}},
                               {"c", 2, q(2, 5), {}},
                               {"d", 2, q(2, 5), {}}};
    const ArmDag d(std::move(nodes), 0, 2);
    ASSERT_TRUE(validate(d).ok());
    for (int h = 1; h <= 8; ++h) {
        const CurveMap curves = compute_all_curves(d, h);
        for (const auto& [u, c] : curves) {
            ASSERT_EQ(c.corners.size(), 1u);
            EXPECT_EQ(c.corners[0].profit, q(2, 5));
        }
    }
}

TEST(ProfitCurve, RandomInstancesMatchMixtureOracle) {
    std::mt19937_64 rng(404);
    int checked = 0, multi = 0;
    for (int i = 0; i < 80; ++i) {
        RandomDagShape shape;
        shape.depth = 1 + i % 2;
        shape.zero_leaf = 0.5;
        shape.min_branching = 2;
        const ArmDag d = random_martingale_dag(rng, shape);
        const int h = 1 + i % 6;
        const CurveMap curves = compute_all_curves(d, h);
        for (NodeId u = 0; u < d.size(); ++u) {
            const auto pts = enumerate_policies(d, u, h);
            if (pts.size() > 400) continue;
            expect_matches_mixture_oracle(curves.at(u), pts, "instance " + std::to_string(i));
            ++checked;
            if (curves.at(u).corners.size() > 1) ++multi;
        }
    }
    EXPECT_GT(checked, 150);
    EXPECT_GT(multi, 20);
}

TEST(ProfitCurve, LargerHorizonsMatchEnvelope) {
    const ArmDag d = beta_bernoulli_arm(1, 2, 3);
    for (int h = 1; h <= 10; ++h) {
        const CurveMap curves = compute_all_curves(d, h);
        for (NodeId u = 0; u < d.size(); ++u) {
            const ProfitCurve env = envelope_curve(enumerate_policies(d, u, h), u, h);
            std::set<Rational> probes{q(1)};
            for (const auto& k : env.corners) probes.insert(k.cost);
            for (const auto& k : curves.at(u).corners) probes.insert(k.cost);
            for (const auto& c : probes) EXPECT_EQ(curves.at(u).at(c), env.at(c)) << "h=" << h << " u=" << u;
        }
    }
}

TEST(ProfitCurve, ConcaveMonotoneAndBounded) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 150; ++i) {
        const ArmDag d = random_arm(rng, 4);
        const int h = 1 + i % 7;
        const CurveMap curves = compute_all_curves(d, h);
        for (const auto& [u, c] : curves) {
            expect_concave_monotone(d, c);
            EXPECT_LE(c.corners.size(), 2 * sub_dag_size(d, u));
        }
    }
}

TEST(ProfitCurve, AllocationsNondecreasingAlongCorners) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 150; ++i) {
        const ArmDag d = random_arm(rng, 4);
        const int h = 2 + i % 5;
        const CurveMap curves = compute_all_curves(d, h);
        for (NodeId u = 0; u < d.size(); ++u) {
            if (d.is_leaf(u)) continue;
            const ExplorationCurve x = compute_exploration_curve(d, u, curves, h);
            for (std::size_t k = 1; k < x.corners.size(); ++k)
                for (std::size_t c = 0; c < x.corners[k].allocations.size(); ++c) {
                    EXPECT_GE(x.corners[k].allocations[c].second, x.corners[k - 1].allocations[c].second);
                    EXPECT_LE(x.corners[k].allocations[c].second, 1);
                }
        }
    }
}

TEST(ProfitCurve, RatioPolicyRealizesFirstCorner) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 120; ++i) {
        const ArmDag d = random_arm(rng, 3);
        const int h = 1 + i % 5;
        const CurveMap curves = compute_all_curves(d, h);
        for (NodeId u = 0; u < d.size(); ++u) {
            const ProfitCurve& c = curves.at(u);
            const PolicyValue v = evaluate_policy(d, extract_ratio_policy(d, curves, u), h);
            EXPECT_EQ(v.cost, c.corners.front().cost);
            EXPECT_EQ(v.profit, c.corners.front().profit);
            EXPECT_LE(v.cost, 1);
        }
    }
}

TEST(ProfitCurve, WorkerCountDoesNotChangeCurves) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        RandomDagShape shape;
        shape.depth = 4;
        shape.max_width = 6;
        const ArmDag d = random_martingale_dag(rng, shape);
        const CurveMap one = compute_all_curves(d, 3, 1);
        const CurveMap four = compute_all_curves(d, 3, 4);
        ASSERT_EQ(one.size(), four.size());
        for (const auto& [u, c] : one) EXPECT_EQ(c.corners, four.at(u).corners);
    }
}

TEST(ProfitCurve, ExportUsesFractionStrings) {
    const ArmDag d = budgeted::testing::two_outcome_arm();
    const CurveMap curves = compute_all_curves(d, 4);
    const json j = curve_to_json(d, curves.at(0));
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["cost"], "3/4");
    EXPECT_EQ(j[0]["profit"], "1/2");
    EXPECT_EQ(j[0]["allocations"]["v1"], "1");
    EXPECT_EQ(j[0]["allocations"]["v2"], "0");
    EXPECT_TRUE(j[1]["allocations"].empty());
}

TEST(ProfitCurve, RejectsBadHorizon) {
    EXPECT_THROW(compute_all_curves(budgeted::testing::two_outcome_arm(), 0), std::invalid_argument);
}
