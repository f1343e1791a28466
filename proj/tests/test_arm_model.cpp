#include "helpers.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace budgeted;
using budgeted::testing::q;

TEST(BetaBernoulliArm, OneStepFromUniformPrior) {
    const ArmDag d = beta_bernoulli_arm(1, 1, 1);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d.zeta(d.root()), q(1, 2));
    const auto& edges = d.node(d.root()).edges;
    ASSERT_EQ(edges.size(), 2u);
    EXPECT_EQ(d.zeta(edges[0].to), q(2, 3));
    EXPECT_EQ(edges[0].p, q(1, 2));
    EXPECT_EQ(d.zeta(edges[1].to), q(1, 3));
    EXPECT_EQ(edges[1].p, q(1, 2));
}

TEST(BetaBernoulliArm, FiveFourSuccessChild) {
    const ArmDag d = beta_bernoulli_arm(5, 4, 1);
    EXPECT_EQ(d.zeta(d.root()), q(5, 9));
    EXPECT_EQ(d.zeta(d.node(d.root()).edges[0].to), q(6, 10));
    EXPECT_EQ(d.node(d.root()).edges[0].outcome, Outcome::success);
}

TEST(BetaBernoulliArm, DepthZeroIsSingleState) {
    const ArmDag d = beta_bernoulli_arm(7, 3, 0);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.zeta(0), q(7, 10));
    EXPECT_TRUE(d.node(0).edges.empty());
    EXPECT_TRUE(d.is_leaf(0));
}

TEST(BetaBernoulliArm, LatticeSizeAndMartingale) {
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b)
            for (int depth = 0; depth <= 6; ++depth) {
                const ArmDag d = beta_bernoulli_arm(a, b, depth);
                EXPECT_EQ(d.size(), static_cast<std::size_t>((depth + 1) * (depth + 2) / 2));
                for (NodeId u = 0; u < d.size(); ++u) {
                    if (d.node(u).edges.empty()) continue;
                    Rational mean = 0;
                    for (const auto& e : d.node(u).edges) mean += e.p * d.zeta(e.to);
                    EXPECT_EQ(mean, d.zeta(u));
                }
                EXPECT_TRUE(validate(d).ok());
            }
}

TEST(BetaBernoulliArm, RejectsBadParameters) {
    EXPECT_THROW(beta_bernoulli_arm(0, 1, 2), std::invalid_argument);
    EXPECT_THROW(beta_bernoulli_arm(1, 1, -1), std::invalid_argument);
}

TEST(Validate, GeneratedArmIsClean) { EXPECT_TRUE(validate(beta_bernoulli_arm(1, 1, 3)).ok()); }

TEST(Validate, ReportsStochasticity) {
    const ArmDag d({{"u", 0, q(1, 2), {{1, q(1, 2)}, {2, q(1, 3)}}}, {"a", 1, q(1, 2), {}}, {"b", 1, q(1, 2), {}}}, 0, 1);
    const ValidationReport r = validate(d);
    ASSERT_TRUE(r.has(Violation::Kind::stochasticity));
    bool found = false;
    for (const auto& v : r.entries)
        if (v.kind == Violation::Kind::stochasticity) {
            EXPECT_NE(v.message.find("stochasticity violation at node"), std::string::npos);
            EXPECT_EQ(v.residual, q(-1, 6));
            found = true;
        }
    EXPECT_TRUE(found);
}

TEST(Validate, ReportsMartingaleResidual) {
    const ArmDag d({{"u", 0, q(1, 2), {{1, q(1, 2)}, {2, q(1, 2)}}}, {"a", 1, q(1), {}}, {"b", 1, q(1, 4), {}}}, 0, 1);
    const ValidationReport r = validate(d);
    ASSERT_EQ(r.entries.size(), 1u);
    EXPECT_EQ(r.entries[0].kind, Violation::Kind::martingale);
    EXPECT_EQ(r.entries[0].residual, q(1, 8));
    EXPECT_NE(r.entries[0].message.find("martingale violation"), std::string::npos);
    EXPECT_NE(r.entries[0].message.find("residual 1/8"), std::string::npos);
}

TEST(Validate, ReportsLayeringDepthAndReachability) {
    // u -> w skips a layer; x is unreachable; w sits beyond the depth bound.
    const ArmDag d({{"u", 0, q(1), {{1, q(1)}}}, {"w", 2, q(1), {}}, {"x", 1, q(1), {}}}, 0, 1);
    const ValidationReport r = validate(d);
    EXPECT_TRUE(r.has(Violation::Kind::layering));
    EXPECT_TRUE(r.has(Violation::Kind::depth));
    EXPECT_TRUE(r.has(Violation::Kind::reachability));
    EXPECT_FALSE(r.has(Violation::Kind::martingale));
}

TEST(Validate, ReportsRootLayerAndNegativeProbability) {
    const ArmDag d({{"u", 1, q(1, 2), {{1, q(3, 2)}, {2, q(-1, 2)}}}, {"a", 2, q(1, 2), {}}, {"b", 2, q(1, 2), {}}}, 0, 2);
    const ValidationReport r = validate(d);
    EXPECT_TRUE(r.has(Violation::Kind::root_layer));
    EXPECT_TRUE(r.has(Violation::Kind::negative_probability));
}

TEST(Validate, SoundOnRandomCorruptions) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        RandomDagShape shape;
        shape.depth = 1 + i % 4;
        ArmDag clean = random_martingale_dag(rng, shape);
        ASSERT_TRUE(validate(clean).ok());
        // Perturb one payoff of a state with a parent: the martingale must break at that parent.
        std::vector<ArmNode> nodes = clean.nodes();
        NodeId target = nodes.size();
        for (NodeId u = 1; u < nodes.size(); ++u) target = u;
        if (target == nodes.size()) continue;
        nodes[target].zeta += q(1, 97);
        const ArmDag bad(std::move(nodes), clean.root(), clean.depth_bound());
        EXPECT_TRUE(validate(bad).has(Violation::Kind::martingale));
    }
}

TEST(Layerize, TwoStateCycleUnrollsToPath) {
    StateGraph g;
    g.states = {{"A", q(1, 3), {{"B", q(1)}}}, {"B", q(1, 3), {{"A", q(1)}}}};
    g.initial = "A";
    const ArmDag d = layerize(g, 3);
    ASSERT_EQ(d.size(), 4u);
    NodeId u = d.root();
    const char* expect[] = {"A@0", "B@1", "A@2", "B@3"};
    for (int j = 0; j <= 3; ++j) {
        EXPECT_EQ(d.node(u).id, expect[j]);
        EXPECT_EQ(d.node(u).layer, j);
        EXPECT_EQ(d.zeta(u), q(1, 3));
        if (j < 3) {
            ASSERT_EQ(d.node(u).edges.size(), 1u);
            u = d.node(u).edges[0].to;
        }
    }
    EXPECT_TRUE(d.is_leaf(u));
    EXPECT_TRUE(validate(d).ok());
}

TEST(Layerize, LayeredInputIsIsomorphic) {
    const ArmDag src = beta_bernoulli_arm(2, 3, 2);
    const ArmDag d = layerize(to_state_graph(src), 2);
    ASSERT_EQ(d.size(), src.size());
    for (NodeId u = 0; u < src.size(); ++u) {
        const auto v = d.find(src.node(u).id + "@" + std::to_string(src.node(u).layer));
        ASSERT_TRUE(v.has_value());
        EXPECT_EQ(d.zeta(*v), src.zeta(u));
        ASSERT_EQ(d.node(*v).edges.size(), src.node(u).edges.size());
        for (std::size_t k = 0; k < src.node(u).edges.size(); ++k) {
            EXPECT_EQ(d.node(*v).edges[k].p, src.node(u).edges[k].p);
            EXPECT_EQ(d.node(d.node(*v).edges[k].to).id,
                      src.node(src.node(u).edges[k].to).id + "@" + std::to_string(src.node(u).layer + 1));
        }
    }
}

TEST(Layerize, BetaRecurrenceMatchesGenerator) {
    using S = std::pair<long, long>;
    for (long a = 1; a <= 3; ++a)
        for (long b = 1; b <= 3; ++b) {
            const ArmDag d = layerize(
                S{a, b},
                [](const S& s) {
                    const long n = s.first + s.second;
                    return std::vector<Transition<S>>{{{s.first + 1, s.second}, q(s.first, n), Outcome::success},
                                                      {{s.first, s.second + 1}, q(s.second, n), Outcome::failure}};
                },
                [](const S& s) { return q(s.first, s.first + s.second); }, 2,
                [](const S& s, int) { return beta_state_name(s.first, s.second); });
            EXPECT_EQ(d, beta_bernoulli_arm(a, b, 2));
        }
}

TEST(Layerize, PreservesDepthPayoffsAndMartingale) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        RandomDagShape shape;
        shape.depth = 3;
        const ArmDag src = random_martingale_dag(rng, shape);
        for (int h = 1; h <= 5; ++h) {
            const ArmDag d = layerize(to_state_graph(src), h);
            EXPECT_LE(d.size(), src.size() * static_cast<std::size_t>(h + 1));
            EXPECT_TRUE(validate(d).ok());
            for (const auto& n : d.nodes()) {
                EXPECT_LE(n.layer, h);
                const std::string name = n.id.substr(0, n.id.find('@'));
                EXPECT_EQ(n.zeta, src.zeta(*src.find(name)));
            }
        }
    }
}

TEST(Layerize, NonMartingaleInputStaysNonMartingale) {
    StateGraph g;
    g.states = {{"u", q(1, 2), {{"a", q(1, 2)}, {"b", q(1, 2)}}}, {"a", q(1), {}}, {"b", q(1, 4), {}}};
    g.initial = "u";
    EXPECT_TRUE(validate(layerize(g, 2)).has(Violation::Kind::martingale));
}

TEST(Layerize, RejectsDanglingTransitions) {
    StateGraph g;
    g.states = {{"A", q(1), {{"missing", q(1)}}}};
    g.initial = "A";
    EXPECT_THROW(layerize(g, 2), std::invalid_argument);
    g.states = {{"A", q(1), {{"A", q(1, 2)}}}};
    EXPECT_THROW(layerize(g, 2), std::invalid_argument);
    g.states = {{"A", q(1), {}}};
    g.initial = "Z";
    EXPECT_THROW(layerize(g, 2), std::invalid_argument);
}

TEST(ArmIo, RoundTrip) {
    const ArmDag d = beta_bernoulli_arm(2, 3, 2);
    const auto path = std::filesystem::temp_directory_path() / "budgeted_roundtrip.json";
    serialize_arm(d, path.string());
    EXPECT_EQ(load_arm(path.string()), d);
    std::filesystem::remove(path);
}

TEST(ArmIo, RoundTripRandomDags) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 30; ++i) {
        const ArmDag d = random_martingale_dag(rng, {});
        EXPECT_EQ(parse_arm(arm_to_json(d).dump()), d);
    }
}

TEST(ArmIo, FractionStrings) {
    const ArmDag d = parse_arm(R"({"root":"u","nodes":[{"id":"u","layer":0,"zeta":"1/3","edges":[{"to":"v","p":"1/3"},{"to":"w","p":"2/3"}]},
        {"id":"v","layer":1,"zeta":"1"},{"id":"w","layer":1,"zeta":"0"}]})");
    EXPECT_EQ(d.node(0).edges[0].p, q(1, 3));
    EXPECT_TRUE(validate(d).ok());
}

TEST(ArmIo, DecimalLiteralsAreExact) {
    const ArmDag d = parse_arm(R"({"root":"u","nodes":[{"id":"u","layer":0,"zeta":0.1,"edges":[{"to":"v","p":"0.25"},{"to":"w","p":0.75}]},
        {"id":"v","layer":1,"zeta":"4e-1"},{"id":"w","layer":1,"zeta":0}]})");
    EXPECT_EQ(d.zeta(0), q(1, 10));
    EXPECT_EQ(d.node(0).edges[0].p, q(1, 4));
    EXPECT_EQ(d.zeta(1), q(2, 5));
    EXPECT_TRUE(validate(d).ok());
}

TEST(ArmIo, GeneratorShorthand) {
    EXPECT_EQ(parse_arm(R"({"beta_bernoulli": [5, 4], "depth": 1})"), beta_bernoulli_arm(5, 4, 1));
    EXPECT_EQ(load_arm(budgeted::testing::data_path("arm_A.json")), beta_bernoulli_arm(5, 4, 1));
}

TEST(ArmIo, ParseErrorsCarryLocations) {
    try {
        load_arm(budgeted::testing::data_path("malformed.json"));
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_NE(e.location().find("line 4"), std::string::npos) << e.what();
    }
    try {
        parse_arm(R"({"root":"u","nodes":[{"id":"u","layer":0,"zeta":"1/2","edges":[{"to":"v","p":"x"}]},{"id":"v","layer":1,"zeta":"1"}]})");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.location(), "nodes[0].edges[0].p");
    }
    EXPECT_THROW(parse_arm(R"({"root":"u","nodes":[{"id":"u","layer":0}]})"), ParseError);
    EXPECT_THROW(parse_arm(R"({"root":"q","nodes":[{"id":"u","layer":0,"zeta":1}]})"), ParseError);
    EXPECT_THROW(load_arm("/nonexistent/arm.json"), ParseError);
}

TEST(ArmIo, InvariantViolationsSurfaceThroughValidate) {
    const ArmDag d = load_arm(budgeted::testing::data_path("bad_martingale.json"));
    EXPECT_TRUE(validate(d).has(Violation::Kind::martingale));
}

TEST(RationalParsing, Forms) {
    EXPECT_EQ(parse_rational("6/10"), q(3, 5));
    EXPECT_EQ(parse_rational("-2/4"), q(-1, 2));
    EXPECT_EQ(parse_rational("0.125"), q(1, 8));
    EXPECT_EQ(parse_rational("2.5e-3"), q(1, 400));
    EXPECT_EQ(parse_rational("3E2"), q(300));
    EXPECT_EQ(to_string(parse_rational("6/10")), "3/5");
    EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
    EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
    EXPECT_THROW(parse_rational(""), std::invalid_argument);
}
