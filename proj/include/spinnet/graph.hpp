#pragma once

// Spin-labelled multigraphs and the exact rewrites that preserve (or
// rescale) the classical invariant: loop removal, spin-0 deletion,
// bivalent smoothing, parallel-edge fusion, vertex expansion and edge
// contraction.

#include "spinnet/error.hpp"
#include "spinnet/exact_value.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace spinnet {

/// Twice the SU(2) spin: spin n labels the irreducible representation of
/// dimension n + 1.
using Spin = int;
inline constexpr Spin kMaxSpin = 1'000'000;

using VertexId = std::size_t;
using EdgeId = std::size_t;

struct Edge {
    VertexId end0 = 0;
    VertexId end1 = 0;
    Spin spin = 0;

    bool is_loop() const noexcept { return end0 == end1; }
    bool touches(VertexId v) const noexcept { return end0 == v || end1 == v; }
    VertexId other(VertexId v) const noexcept { return end0 == v ? end1 : end0; }

    friend bool operator==(const Edge&, const Edge&) = default;
};

inline bool valid_vertex_name(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

/// Multigraph with loops. Vertices and edges keep insertion order; that
/// order is what serialization writes back out.
class LabeledGraph {
public:
    LabeledGraph() = default;

    VertexId add_vertex(std::string name) {
        if (!valid_vertex_name(name)) throw GraphError("invalid vertex name '" + name + "'");
        if (index_.count(name)) throw GraphError("duplicate vertex '" + name + "'");
        index_.emplace(name, names_.size());
        names_.push_back(std::move(name));
        return names_.size() - 1;
    }

    EdgeId add_edge(VertexId a, VertexId b, Spin spin) {
        check_vertex(a);
        check_vertex(b);
        if (spin < 0 || spin > kMaxSpin) throw GraphError("spin out of range: " + std::to_string(spin));
        edges_.push_back({a, b, spin});
        return edges_.size() - 1;
    }

    std::size_t vertex_count() const noexcept { return names_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return names_.empty() && edges_.empty(); }

    const std::string& name(VertexId v) const { return names_.at(v); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId e) const { return edges_.at(e); }

    std::optional<VertexId> find_vertex(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    long long total_spin() const noexcept {
        long long s = 0;
        for (const auto& e : edges_) s += e.spin;
        return s;
    }

    /// (-1)^{sum of all edge spins}.
    int global_sign() const noexcept { return sign_power(total_spin()); }

    /// Spins of the edge-ends at v; a loop contributes its spin twice.
    std::vector<Spin> incident_spins(VertexId v) const {
        std::vector<Spin> out;
        for (const auto& e : edges_) {
            if (e.end0 == v) out.push_back(e.spin);
            if (e.end1 == v) out.push_back(e.spin);
        }
        return out;
    }

    /// Edge ids incident to v, in edge order; loops appear twice.
    std::vector<EdgeId> incident_edges(VertexId v) const {
        std::vector<EdgeId> out;
        for (EdgeId i = 0; i < edges_.size(); ++i) {
            if (edges_[i].end0 == v) out.push_back(i);
            if (edges_[i].end1 == v) out.push_back(i);
        }
        return out;
    }

    std::size_t valence(VertexId v) const { return incident_edges(v).size(); }

    void set_spin(EdgeId e, Spin spin) {
        if (spin < 0 || spin > kMaxSpin) throw GraphError("spin out of range: " + std::to_string(spin));
        edges_.at(e).spin = spin;
    }

    void set_edge(EdgeId e, Edge edge) {
        check_vertex(edge.end0);
        check_vertex(edge.end1);
        edges_.at(e) = edge;
    }

    void remove_edge(EdgeId e) { edges_.erase(edges_.begin() + static_cast<std::ptrdiff_t>(e)); }

    /// Removes a vertex that no edge touches; later vertex ids shift down.
    void remove_vertex(VertexId v) {
        check_vertex(v);
        for (const auto& e : edges_)
            if (e.touches(v)) throw GraphError("cannot remove vertex '" + names_[v] + "' with incident edges");
        names_.erase(names_.begin() + static_cast<std::ptrdiff_t>(v));
        for (auto& e : edges_) {
            if (e.end0 > v) --e.end0;
            if (e.end1 > v) --e.end1;
        }
        rebuild_index();
    }

    void rename_vertex(VertexId v, std::string name) {
        check_vertex(v);
        if (names_[v] == name) return;
        if (!valid_vertex_name(name)) throw GraphError("invalid vertex name '" + name + "'");
        if (index_.count(name)) throw GraphError("duplicate vertex '" + name + "'");
        names_[v] = std::move(name);
        rebuild_index();
    }

    /// A name not yet used, derived from base.
    std::string fresh_name(const std::string& base) const {
        for (std::size_t k = 1;; ++k) {
            std::string candidate = base + "_" + std::to_string(k);
            if (!index_.count(candidate)) return candidate;
        }
    }

    friend bool operator==(const LabeledGraph& a, const LabeledGraph& b) {
        return a.names_ == b.names_ && a.edges_ == b.edges_;
    }

private:
    void check_vertex(VertexId v) const {
        if (v >= names_.size()) throw GraphError("vertex id " + std::to_string(v) + " out of range");
    }

    void rebuild_index() {
        index_.clear();
        for (VertexId i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
    }

    std::vector<std::string> names_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, VertexId> index_;
};

// ---------------------------------------------------------------------------
// Text format

namespace detail {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

}  // namespace detail

/// Parses the line-oriented graph format:
///
///     # comment
///     v <name>
///     e <name> <name> <spin>
///
/// Names match [A-Za-z0-9_]+, spins are decimal in [0, 10^6], and every
/// vertex must be declared before an edge uses it. LF or CRLF line ends.
inline LabeledGraph parse_graph(std::string_view text) {
    LabeledGraph g;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        auto tokens = detail::tokenize(line);
        if (tokens.empty()) continue;
        const auto& head = tokens.front();
        if (head.text.front() == '#') continue;

        auto require_name = [&](const detail::Token& t) {
            if (!valid_vertex_name(t.text))
                throw ParseError(line_no, t.column, "invalid vertex name '" + std::string(t.text) + "'");
        };
        auto lookup = [&](const detail::Token& t) {
            require_name(t);
            auto v = g.find_vertex(t.text);
            if (!v) throw ParseError(line_no, t.column, "unknown vertex '" + std::string(t.text) + "'");
            return *v;
        };

        if (head.text == "v") {
            if (tokens.size() != 2) throw ParseError(line_no, head.column, "expected 'v <name>'");
            require_name(tokens[1]);
            if (g.find_vertex(tokens[1].text))
                throw ParseError(line_no, tokens[1].column,
                                 "duplicate vertex '" + std::string(tokens[1].text) + "'");
            g.add_vertex(std::string(tokens[1].text));
        } else if (head.text == "e") {
            if (tokens.size() != 4) throw ParseError(line_no, head.column, "expected 'e <name> <name> <spin>'");
            VertexId a = lookup(tokens[1]);
            VertexId b = lookup(tokens[2]);
            const auto& st = tokens[3];
            bool digits = std::all_of(st.text.begin(), st.text.end(), [](char c) { return c >= '0' && c <= '9'; });
            if (!digits) throw ParseError(line_no, st.column, "spin must be a non-negative decimal integer");
            if (st.text.size() > 7) throw ParseError(line_no, st.column, "spin out of range");
            long value = std::stol(std::string(st.text));
            if (value > kMaxSpin) throw ParseError(line_no, st.column, "spin out of range");
            g.add_edge(a, b, static_cast<Spin>(value));
        } else {
            throw ParseError(line_no, head.column, "unknown directive '" + std::string(head.text) + "'");
        }
    }
    return g;
}

/// Canonical text: all vertices in order, then all edges in order.
inline std::string serialize_graph(const LabeledGraph& g) {
    std::string out;
    for (const auto& n : g.names()) out += "v " + n + "\n";
    for (const auto& e : g.edges())
        out += "e " + g.name(e.end0) + " " + g.name(e.end1) + " " + std::to_string(e.spin) + "\n";
    return out;
}

/// 64-bit FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string graph_digest(const LabeledGraph& g) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_graph(g)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xF];
        h >>= 4;
    }
    return "fnv1a64:" + out;
}

// ---------------------------------------------------------------------------
// Admissibility

/// Even sum and polygon closure (no spin exceeds the sum of the others).
inline bool admissible_spins(std::span<const Spin> spins) {
    long long sum = 0;
    Spin largest = 0;
    for (Spin s : spins) {
        sum += s;
        largest = std::max(largest, s);
    }
    return sum % 2 == 0 && 2LL * largest <= sum;
}

inline bool admissible_triple(Spin a, Spin b, Spin c) {
    const Spin s[3] = {a, b, c};
    return admissible_spins(s);
}

struct VertexFailure {
    VertexId vertex = 0;
    std::string name;
    bool parity = false;   // incident spin sum is odd
    bool closure = false;  // some spin exceeds the sum of the others

    std::string reason() const {
        if (parity && closure) return "odd spin sum; polygon closure fails";
        if (parity) return "odd spin sum";
        return "polygon closure fails";
    }
};

struct AdmissibilityReport {
    bool admissible = true;
    std::vector<VertexFailure> failures;
};

inline AdmissibilityReport check_admissibility(const LabeledGraph& g) {
    AdmissibilityReport report;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        auto spins = g.incident_spins(v);
        long long sum = std::accumulate(spins.begin(), spins.end(), 0LL);
        Spin largest = spins.empty() ? 0 : *std::max_element(spins.begin(), spins.end());
        VertexFailure f{v, g.name(v), sum % 2 != 0, 2LL * largest > sum};
        if (f.parity || f.closure) {
            report.admissible = false;
            report.failures.push_back(std::move(f));
        }
    }
    return report;
}

/// True when some vertex has an odd incident spin sum; every evaluator
/// returns exactly 0 on such graphs.
inline bool has_parity_failure(const LabeledGraph& g) {
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        auto spins = g.incident_spins(v);
        if (std::accumulate(spins.begin(), spins.end(), 0LL) % 2 != 0) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Rewrites

/// Signed quantum dimension (-1)^n (n+1) of a closed spin-n loop.
inline ExactValue loop_factor(Spin n) { return ExactValue(sign_power(n) * (static_cast<long>(n) + 1)); }

struct SimplifyResult {
    LabeledGraph graph;
    ExactValue multiplier;
};

/// Repeatedly deletes spin-0 edges, removes loops and smooths bivalent
/// vertices until none apply. I(input) = multiplier * I(output).
inline SimplifyResult simplify(const LabeledGraph& input) {
    LabeledGraph g = input;
    ExactValue mult = 1;

    for (bool changed = true; changed;) {
        changed = false;

        for (EdgeId e = g.edge_count(); e-- > 0;) {
            if (g.edge(e).spin == 0) {
                g.remove_edge(e);
                changed = true;
            }
        }
        for (EdgeId e = g.edge_count(); e-- > 0;) {
            if (g.edge(e).is_loop()) {
                mult *= loop_factor(g.edge(e).spin);
                g.remove_edge(e);
                changed = true;
            }
        }
        if (changed) continue;

        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            auto inc = g.incident_edges(v);
            if (inc.size() != 2) continue;
            const Edge e1 = g.edge(inc[0]);
            const Edge e2 = g.edge(inc[1]);
            if (e1.spin != e2.spin) return {LabeledGraph{}, ExactValue(0)};
            const Spin n = e1.spin;
            mult *= ExactValue(sign_power(n), static_cast<long>(n) + 1);
            g.set_edge(inc[0], {e1.other(v), e2.other(v), n});
            g.remove_edge(inc[1]);
            g.remove_vertex(v);
            changed = true;
            break;
        }
    }
    return {std::move(g), mult};
}

struct WeightedTerm {
    ExactValue coefficient;
    LabeledGraph graph;
};

/// Finite formal sum: I(source) = sum of coefficient * I(graph).
struct WeightedGraphSum {
    std::vector<WeightedTerm> terms;

    std::size_t size() const noexcept { return terms.size(); }
};

/// Spins c in the Clebsch-Gordan series of a (x) b.
inline std::vector<Spin> coupled_spins(Spin a, Spin b) {
    std::vector<Spin> out;
    for (Spin c = std::abs(a - b); c <= a + b; c += 2) out.push_back(c);
    return out;
}

/// Replaces two parallel edges by one edge of each spin in the
/// Clebsch-Gordan series of their product, coefficient 1.
inline WeightedGraphSum fuse_parallel_edges(const LabeledGraph& g, EdgeId first, EdgeId second) {
    if (first >= g.edge_count() || second >= g.edge_count()) throw GraphError("edge id out of range");
    if (first == second) throw GraphError("fuse_parallel_edges needs two distinct edges");
    const Edge a = g.edge(first);
    const Edge b = g.edge(second);
    if (a.is_loop() || b.is_loop()) throw GraphError("cannot fuse loops");
    bool parallel = (a.end0 == b.end0 && a.end1 == b.end1) || (a.end0 == b.end1 && a.end1 == b.end0);
    if (!parallel) throw GraphError("edges are not parallel");

    WeightedGraphSum sum;
    for (Spin c : coupled_spins(a.spin, b.spin)) {
        LabeledGraph t = g;
        t.set_spin(first, c);
        t.remove_edge(second);
        sum.terms.push_back({ExactValue(1), std::move(t)});
    }
    return sum;
}

/// Smallest and largest spin k that can close a polygon with `spins`.
inline std::pair<long long, long long> closing_range(std::span<const Spin> spins) {
    long long sum = 0;
    Spin largest = 0;
    for (Spin s : spins) {
        sum += s;
        largest = std::max(largest, s);
    }
    return {std::max(0LL, 2LL * largest - sum), sum};
}

/// Partition of a vertex's edges (by edge id) into the two sides of a
/// new internal edge.
struct VertexSplit {
    std::vector<EdgeId> first;
    std::vector<EdgeId> second;
};

/// Splits `vertex` in two joined by a new edge (appended last); the
/// `second` edges move to a new vertex (appended last). One term per
/// admissible internal spin k, coefficient (-1)^k (k+1).
inline WeightedGraphSum expand_vertex(const LabeledGraph& g, VertexId vertex, const VertexSplit& split) {
    if (vertex >= g.vertex_count()) throw GraphError("vertex id out of range");
    if (split.first.empty() || split.second.empty()) throw GraphError("both split groups must be nonempty");

    auto inc = g.incident_edges(vertex);
    for (EdgeId e : inc)
        if (g.edge(e).is_loop()) throw GraphError("vertex '" + g.name(vertex) + "' has a loop; simplify first");

    std::vector<EdgeId> all = split.first;
    all.insert(all.end(), split.second.begin(), split.second.end());
    std::vector<EdgeId> sorted_all = all, sorted_inc = inc;
    std::sort(sorted_all.begin(), sorted_all.end());
    std::sort(sorted_inc.begin(), sorted_inc.end());
    if (sorted_all != sorted_inc)
        throw GraphError("split must partition exactly the edges incident to '" + g.name(vertex) + "'");

    std::vector<Spin> s1, s2;
    for (EdgeId e : split.first) s1.push_back(g.edge(e).spin);
    for (EdgeId e : split.second) s2.push_back(g.edge(e).spin);
    auto [lo1, hi1] = closing_range(s1);
    auto [lo2, hi2] = closing_range(s2);
    long long lo = std::max(lo1, lo2);
    long long hi = std::min(hi1, hi2);
    long long parity = std::accumulate(s1.begin(), s1.end(), 0LL) % 2;

    LabeledGraph base = g;
    VertexId fresh = base.add_vertex(base.fresh_name(g.name(vertex)));
    for (EdgeId e : split.second) {
        Edge ed = base.edge(e);
        if (ed.end0 == vertex) ed.end0 = fresh;
        else ed.end1 = fresh;
        base.set_edge(e, ed);
    }
    EdgeId internal = base.add_edge(vertex, fresh, 0);

    WeightedGraphSum sum;
    if (std::accumulate(s2.begin(), s2.end(), 0LL) % 2 != parity) return sum;
    if (lo % 2 != parity) ++lo;
    for (long long k = lo; k <= hi; k += 2) {
        LabeledGraph t = base;
        t.set_spin(internal, static_cast<Spin>(k));
        sum.terms.push_back({loop_factor(static_cast<Spin>(k)), std::move(t)});
    }
    return sum;
}

/// Merges the endpoints of a non-loop edge and deletes it. The merged
/// vertex keeps the lower id and the lexicographically smaller name.
inline LabeledGraph contract_edge(const LabeledGraph& g, EdgeId edge) {
    if (edge >= g.edge_count()) throw GraphError("edge id out of range");
    const Edge e = g.edge(edge);
    if (e.is_loop()) throw GraphError("cannot contract a loop");

    VertexId keep = std::min(e.end0, e.end1);
    VertexId drop = std::max(e.end0, e.end1);
    std::string merged = std::min(g.name(e.end0), g.name(e.end1));

    LabeledGraph t = g;
    t.remove_edge(edge);
    for (EdgeId i = 0; i < t.edge_count(); ++i) {
        Edge ed = t.edge(i);
        if (ed.end0 == drop) ed.end0 = keep;
        if (ed.end1 == drop) ed.end1 = keep;
        t.set_edge(i, ed);
    }
    t.remove_vertex(drop);
    if (t.name(keep) != merged) t.rename_vertex(keep, merged);
    return t;
}

/// Component label per vertex, numbered in order of first vertex.
inline std::vector<std::size_t> connected_components(const LabeledGraph& g) {
    std::vector<std::size_t> parent(g.vertex_count());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : g.edges()) {
        auto a = find(e.end0), b = find(e.end1);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::size_t> label(g.vertex_count());
    std::unordered_map<std::size_t, std::size_t> ids;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        auto root = find(v);
        auto [it, inserted] = ids.emplace(root, ids.size());
        label[v] = it->second;
    }
    return label;
}

/// First pair of distinct parallel non-loop edges, if any.
inline std::optional<std::pair<EdgeId, EdgeId>> find_parallel_pair(const LabeledGraph& g) {
    const auto& es = g.edges();
    for (EdgeId i = 0; i < es.size(); ++i) {
        if (es[i].is_loop()) continue;
        for (EdgeId j = i + 1; j < es.size(); ++j) {
            if (es[j].is_loop()) continue;
            auto a = std::minmax(es[i].end0, es[i].end1);
            auto b = std::minmax(es[j].end0, es[j].end1);
            if (a == b) return std::make_pair(i, j);
        }
    }
    return std::nullopt;
}

}  // namespace spinnet
