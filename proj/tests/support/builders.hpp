#pragma once

#include "spinnet/graph.hpp"

#include <string>
#include <vector>

namespace spinnet::testkit {

inline LabeledGraph theta_graph(Spin a, Spin b, Spin c) {
    LabeledGraph g;
    g.add_vertex("a");
    g.add_vertex("b");
    g.add_edge(0, 1, a);
    g.add_edge(0, 1, b);
    g.add_edge(0, 1, c);
    return g;
}

inline LabeledGraph loop_graph(Spin n) {
    LabeledGraph g;
    g.add_vertex("a");
    g.add_edge(0, 0, n);
    return g;
}

inline LabeledGraph complete_graph(std::size_t n, Spin s) {
    LabeledGraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_vertex("v" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j, s);
    return g;
}

/// K4 with spins on edges (01, 02, 03, 12, 13, 23).
inline LabeledGraph tetrahedron(const std::vector<Spin>& s) {
    LabeledGraph g;
    for (int i = 0; i < 4; ++i) g.add_vertex("v" + std::to_string(i));
    g.add_edge(0, 1, s[0]);
    g.add_edge(0, 2, s[1]);
    g.add_edge(0, 3, s[2]);
    g.add_edge(1, 2, s[3]);
    g.add_edge(1, 3, s[4]);
    g.add_edge(2, 3, s[5]);
    return g;
}

inline LabeledGraph k33(const std::vector<Spin>& s) {
    LabeledGraph g;
    for (int i = 0; i < 6; ++i) g.add_vertex("v" + std::to_string(i));
    std::size_t k = 0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 3; j < 6; ++j) g.add_edge(i, j, s[k++]);
    return g;
}

/// Vertices of b are renamed with a prefix and appended after those of a.
inline LabeledGraph disjoint_union(const LabeledGraph& a, const LabeledGraph& b) {
    LabeledGraph g = a;
    const std::size_t offset = a.vertex_count();
    for (VertexId v = 0; v < b.vertex_count(); ++v) g.add_vertex("u_" + b.name(v));
    for (const auto& e : b.edges()) g.add_edge(e.end0 + offset, e.end1 + offset, e.spin);
    return g;
}

}  // namespace spinnet::testkit
