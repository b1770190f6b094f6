#include "spinnet/graph.hpp"
#include "spinnet/projector.hpp"
#include "support/builders.hpp"
#include "support/random_graphs.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace spinnet;
using spinnet::testkit::theta_graph;

namespace {

double contract_or_zero(const LabeledGraph& g) { return g.empty() ? 1.0 : contract_evaluate(g); }

bool structurally_equal(const LabeledGraph& a, const LabeledGraph& b) {
    if (a.names() != b.names() || a.edge_count() != b.edge_count()) return false;
    for (EdgeId e = 0; e < a.edge_count(); ++e) {
        const auto &x = a.edge(e), &y = b.edge(e);
        if (x.end0 != y.end0 || x.end1 != y.end1 || x.spin != y.spin) return false;
    }
    return true;
}

}  // namespace

TEST(Parse, TwoVerticesOneEdge) {
    auto g = parse_graph("v a\nv b\ne a b 2");
    EXPECT_EQ(g.vertex_count(), 2u);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.edge(0).spin, 2);
    EXPECT_EQ(g.name(g.edge(0).end1), "b");
}

TEST(Parse, LoopIsKept) {
    auto g = parse_graph("v a\ne a a 3");
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_TRUE(g.edge(0).is_loop());
    EXPECT_EQ(g.edge(0).spin, 3);
}

TEST(Parse, UnknownVertexReportsPosition) {
    try {
        parse_graph("e a b 2");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_EQ(e.column(), 3u);
        EXPECT_NE(e.reason().find("unknown vertex"), std::string::npos);
    }
}

TEST(Parse, CommentsBlankLinesAndCrlf) {
    auto g = parse_graph("# header\r\n\r\nv a\r\n\tv  b\r\ne a\tb 4\r\n");
    EXPECT_EQ(g.vertex_count(), 2u);
    EXPECT_EQ(g.edge(0).spin, 4);
}

TEST(Parse, Rejections) {
    EXPECT_THROW(parse_graph("v a\nv a"), ParseError);
    EXPECT_THROW(parse_graph("v a-b"), ParseError);
    EXPECT_THROW(parse_graph("v a\ne a a -1"), ParseError);
    EXPECT_THROW(parse_graph("v a\ne a a 1000001"), ParseError);
    EXPECT_THROW(parse_graph("v a\ne a a 2.0"), ParseError);
    EXPECT_THROW(parse_graph("v a\ne a a"), ParseError);
    EXPECT_THROW(parse_graph("x a"), ParseError);
    EXPECT_NO_THROW(parse_graph("v a\ne a a 1000000"));
    try {
        parse_graph("v a\nv b\ne a b 2\ne a c 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(Serialize, Examples) {
    EXPECT_EQ(serialize_graph(parse_graph("v a\nv b\ne a b 2")), "v a\nv b\ne a b 2\n");
    EXPECT_EQ(serialize_graph(LabeledGraph{}), "");
    EXPECT_EQ(serialize_graph(parse_graph("v a\ne a a 3")), "v a\ne a a 3\n");
}

TEST(Serialize, RoundTripPreservesOrder) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        auto g = spinnet::testkit::random_labeled_graph(rng);
        auto back = parse_graph(serialize_graph(g));
        EXPECT_TRUE(structurally_equal(g, back));
        EXPECT_EQ(graph_digest(g), graph_digest(back));
    }
}

TEST(Serialize, DigestIsStableAndDiscriminating) {
    auto a = theta_graph(1, 1, 2), b = theta_graph(1, 1, 2), c = theta_graph(1, 2, 1);
    EXPECT_EQ(graph_digest(a), graph_digest(b));
    EXPECT_NE(graph_digest(a), graph_digest(c));
    EXPECT_EQ(graph_digest(a).rfind("fnv1a64:", 0), 0u);
    EXPECT_EQ(graph_digest(a).size(), 8u + 16u);
}

TEST(Admissibility, Examples) {
    auto ok = check_admissibility(theta_graph(1, 1, 2));
    EXPECT_TRUE(ok.admissible);

    auto bad = check_admissibility(theta_graph(1, 1, 3));
    EXPECT_FALSE(bad.admissible);
    ASSERT_EQ(bad.failures.size(), 2u);
    EXPECT_TRUE(bad.failures[0].parity);
    EXPECT_TRUE(bad.failures[0].closure);

    auto mono = parse_graph("v a\nv b\nv c\nv d\ne a b 2\ne b c 2\ne b d 2\ne c d 2");
    auto r = check_admissibility(mono);
    EXPECT_FALSE(r.admissible);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].name, "a");
    EXPECT_FALSE(r.failures[0].parity);
    EXPECT_TRUE(r.failures[0].closure);
}

TEST(Admissibility, BivalentNeedsEqualSpins) {
    auto g = parse_graph("v a\nv b\ne a b 2\ne a b 4");
    EXPECT_FALSE(check_admissibility(g).admissible);
    EXPECT_TRUE(check_admissibility(parse_graph("v a\nv b\ne a b 3\ne a b 3")).admissible);
}

TEST(Admissibility, LoopCountsTwice) {
    // Vertex with a spin-1 loop and a spin-2 edge: spins (1,1,2).
    auto g = parse_graph("v a\nv b\ne a a 1\ne a b 2\ne b b 1");
    EXPECT_TRUE(check_admissibility(g).admissible);
    EXPECT_EQ(g.incident_spins(0).size(), 3u);
}

TEST(Simplify, LoopAtSingleVertex) {
    auto r = simplify(spinnet::testkit::loop_graph(2));
    EXPECT_EQ(r.multiplier, 3);
    EXPECT_EQ(r.graph.vertex_count(), 1u);
    EXPECT_EQ(r.graph.edge_count(), 0u);
}

TEST(Simplify, ThetaWithExtraLoop) {
    auto g = theta_graph(1, 1, 2);
    g.add_edge(0, 0, 3);
    auto r = simplify(g);
    // The loop leaves a (1,1,2) theta whose vertices are untouched.
    EXPECT_EQ(r.multiplier, -4);
    EXPECT_TRUE(structurally_equal(r.graph, theta_graph(1, 1, 2)));
}

TEST(Simplify, PathSmoothing) {
    auto r = simplify(parse_graph("v a\nv b\nv c\ne a b 1\ne b c 1"));
    EXPECT_EQ(r.multiplier, ExactValue(-1, 2));
    ASSERT_EQ(r.graph.vertex_count(), 2u);
    ASSERT_EQ(r.graph.edge_count(), 1u);
    EXPECT_EQ(r.graph.name(r.graph.edge(0).end0), "a");
    EXPECT_EQ(r.graph.name(r.graph.edge(0).end1), "c");
    EXPECT_EQ(r.graph.edge(0).spin, 1);
}

TEST(Simplify, UnequalBivalentIsZero) {
    auto r = simplify(parse_graph("v a\nv b\nv c\ne a b 1\ne b c 3"));
    EXPECT_EQ(r.multiplier, 0);
    EXPECT_TRUE(r.graph.empty());
}

TEST(Simplify, SpinZeroEdgesVanish) {
    auto r = simplify(parse_graph("v a\nv b\ne a b 0\ne a a 0"));
    EXPECT_EQ(r.multiplier, 1);
    EXPECT_EQ(r.graph.edge_count(), 0u);
}

TEST(Simplify, MultiplierContractAgainstProjector) {
    std::mt19937_64 rng(5);
    spinnet::testkit::RandomGraphLimits lim;
    lim.max_edges = 7;
    for (int i = 0; i < 40; ++i) {
        auto g = spinnet::testkit::random_admissible_graph(rng, lim);
        auto r = simplify(g);
        double lhs = contract_evaluate(g);
        double rhs = to_double(r.multiplier) * contract_or_zero(r.graph);
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs))) << serialize_graph(g);
    }
}

TEST(Fuse, Examples) {
    auto g = theta_graph(1, 1, 2);
    auto s = fuse_parallel_edges(g, 0, 1);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.terms[0].graph.edge(0).spin, 0);
    EXPECT_EQ(s.terms[1].graph.edge(0).spin, 2);
    for (const auto& t : s.terms) EXPECT_EQ(t.coefficient, 1);

    auto z = fuse_parallel_edges(theta_graph(0, 3, 3), 0, 1);
    ASSERT_EQ(z.size(), 1u);
    EXPECT_EQ(z.terms[0].graph.edge(0).spin, 3);

    auto m = fuse_parallel_edges(theta_graph(1, 2, 3), 0, 1);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.terms[0].graph.edge(0).spin, 1);
    EXPECT_EQ(m.terms[1].graph.edge(0).spin, 3);
}

TEST(Fuse, Errors) {
    auto g = parse_graph("v a\nv b\nv c\ne a b 1\ne b c 1\ne a a 2");
    EXPECT_THROW(fuse_parallel_edges(g, 0, 1), GraphError);
    EXPECT_THROW(fuse_parallel_edges(g, 0, 2), GraphError);
    EXPECT_THROW(fuse_parallel_edges(g, 0, 0), GraphError);
}

TEST(Fuse, SumMatchesProjector) {
    std::mt19937_64 rng(17);
    int checked = 0;
    while (checked < 25) {
        auto g = spinnet::testkit::random_admissible_graph(rng);
        auto pair = find_parallel_pair(g);
        if (!pair) continue;
        ++checked;
        double whole = contract_evaluate(g);
        double sum = 0;
        for (const auto& t : fuse_parallel_edges(g, pair->first, pair->second).terms)
            sum += to_double(t.coefficient) * contract_evaluate(t.graph);
        EXPECT_NEAR(whole, sum, 1e-10 * std::max(1.0, std::abs(whole))) << serialize_graph(g);
    }
}

TEST(Expand, FourValentUnitSpins) {
    auto g = parse_graph("v c\nv a\nv b\ne c a 1\ne c a 1\ne c b 1\ne c b 1");
    auto s = expand_vertex(g, 0, {{0, 1}, {2, 3}});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.terms[0].coefficient, 1);
    EXPECT_EQ(s.terms[1].coefficient, 3);
    EXPECT_EQ(s.terms[1].graph.edge(4).spin, 2);
    EXPECT_EQ(s.terms[1].graph.vertex_count(), 4u);
}

TEST(Expand, TrivalentForcedTerm) {
    auto g = theta_graph(2, 3, 3);
    auto s = expand_vertex(g, 0, {{0, 1}, {2}});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.terms[0].graph.edge(3).spin, 3);
    EXPECT_EQ(s.terms[0].coefficient, loop_factor(3));
}

TEST(Expand, ClosureLimitsTerms) {
    auto g = parse_graph("v c\nv a\nv b\ne c a 1\ne c a 1\ne c b 1\ne c b 3");
    auto s = expand_vertex(g, 0, {{0, 1}, {2, 3}});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.terms[0].graph.edge(4).spin, 2);
    EXPECT_EQ(s.terms[0].coefficient, 3);
}

TEST(Expand, Errors) {
    auto g = parse_graph("v a\nv b\ne a a 1\ne a b 2\ne b b 1");
    EXPECT_THROW(expand_vertex(g, 0, {{0}, {1}}), GraphError);
    auto h = theta_graph(1, 1, 2);
    EXPECT_THROW(expand_vertex(h, 0, {{0, 1, 2}, {}}), GraphError);
    EXPECT_THROW(expand_vertex(h, 0, {{0}, {1}}), GraphError);
}

TEST(Expand, SumMatchesProjector) {
    std::mt19937_64 rng(23);
    int checked = 0;
    while (checked < 20) {
        auto g = simplify(spinnet::testkit::random_admissible_graph(rng)).graph;
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            auto inc = g.incident_edges(v);
            if (inc.size() < 3) continue;
            VertexSplit split{{inc[0], inc[1]}, {}};
            split.second.assign(inc.begin() + 2, inc.end());
            double whole = contract_evaluate(g);
            double sum = 0;
            for (const auto& t : expand_vertex(g, v, split).terms)
                sum += to_double(t.coefficient) * contract_evaluate(t.graph);
            EXPECT_NEAR(whole, sum, 1e-10 * std::max(1.0, std::abs(whole))) << serialize_graph(g);
            ++checked;
            break;
        }
    }
}

TEST(Contract, Examples) {
    auto g = parse_graph("v a\nv b\nv x\nv y\nv z\nv w\ne a b 2\ne a x 1\ne a y 1\ne b z 1\ne b w 1");
    auto c = contract_edge(g, 0);
    EXPECT_EQ(c.vertex_count(), 5u);
    EXPECT_EQ(c.valence(0), 4u);
    EXPECT_EQ(c.name(0), "a");

    auto single = contract_edge(parse_graph("v b\nv a\ne b a 2"), 0);
    EXPECT_EQ(single.vertex_count(), 1u);
    EXPECT_EQ(single.edge_count(), 0u);
    EXPECT_EQ(single.name(0), "a");

    EXPECT_THROW(contract_edge(parse_graph("v a\ne a a 2"), 0), GraphError);
}

TEST(Contract, UndoesExpansion) {
    auto g = parse_graph("v c\nv a\nv b\ne c a 1\ne c a 2\ne c b 1\ne c b 2");
    auto s = expand_vertex(g, 0, {{0, 2}, {1, 3}});
    for (const auto& t : s.terms) {
        auto back = contract_edge(t.graph, t.graph.edge_count() - 1);
        EXPECT_TRUE(structurally_equal(back, g)) << serialize_graph(back);
    }
}
