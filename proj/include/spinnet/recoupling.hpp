#pragma once

// Exact evaluation through spin network recoupling at A = -1.
//
// Trivalent nets are evaluated with unnormalized Kauffman-Lins vertices,
// where every loop, theta and tetrahedron value is rational. At A = -1 the
// braiding is symmetric with trivial twist, so a closed net is determined
// by its abstract graph together with a cyclic order of the three edge
// slots at every vertex (slot order 0, 1, 2). Reversing the cyclic order of
// a vertex with spins (a, b, c) multiplies the value by the braiding
// eigenvalue lambda(a, b, c) = +-1. Planar local moves (bubble collapse,
// recoupling of an edge) are applied after aligning the cyclic orders
// with the planar picture they assume.
//
// A graph with vertices of any valence is evaluated by simplifying,
// fusing parallel edges, expanding high-valence vertices into trivalent
// trees, and summing N^2 / prod_v theta_v over the resulting trivalent
// graphs.

#include "spinnet/error.hpp"
#include "spinnet/exact_value.hpp"
#include "spinnet/graph.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

namespace spinnet {

/// (-1)^n (n + 1).
inline ExactValue loop_value(Spin n) { return loop_factor(n); }

/// The theta net with edge spins a, b, c; zero when inadmissible.
inline ExactValue theta_value(Spin a, Spin b, Spin c) {
    if (!admissible_triple(a, b, c)) return 0;
    // Internal strand counts: m between a and b, n between b and c, p
    // between a and c.
    const long m = (a + b - c) / 2, n = (b + c - a) / 2, p = (a + c - b) / 2;
    ExactInteger num = factorial(m + n + p + 1) * factorial(m) * factorial(n) * factorial(p);
    ExactInteger den = factorial(a) * factorial(b) * factorial(c);
    return ExactValue(sign_power(m + n + p) * num, den);
}

/// The tetrahedral net whose vertex triples are (a,b,c), (a,e,f),
/// (d,b,f), (d,e,c); opposite edges are (a,d), (b,e), (c,f). Zero when a
/// triple is inadmissible.
inline ExactValue tet_6j(Spin a, Spin b, Spin c, Spin d, Spin e, Spin f) {
    const std::array<std::array<Spin, 3>, 4> triples{{{a, b, c}, {a, e, f}, {d, b, f}, {d, e, c}}};
    for (const auto& t : triples)
        if (!admissible_triple(t[0], t[1], t[2])) return 0;

    std::array<long, 4> lo{};
    for (std::size_t i = 0; i < 4; ++i) lo[i] = (triples[i][0] + triples[i][1] + triples[i][2]) / 2;
    const long total = static_cast<long>(a) + b + c + d + e + f;
    const std::array<long, 3> hi{(total - a - d) / 2, (total - b - e) / 2, (total - c - f) / 2};

    ExactInteger inner_num = 1;
    for (long x : lo)
        for (long y : hi) inner_num *= factorial(y - x);
    ExactInteger edge_den = factorial(a) * factorial(b) * factorial(c) * factorial(d) * factorial(e) * factorial(f);

    long s_min = *std::max_element(lo.begin(), lo.end());
    long s_max = *std::min_element(hi.begin(), hi.end());
    ExactValue sum = 0;
    for (long s = s_min; s <= s_max; ++s) {
        ExactInteger den = 1;
        for (long x : lo) den *= factorial(s - x);
        for (long y : hi) den *= factorial(y - s);
        sum += ExactValue(sign_power(s) * factorial(s + 1), den);
    }
    return sum * ExactValue(inner_num, edge_den);
}

/// Recoupling coefficient: an edge of spin j joining a vertex (a, b, j)
/// to a vertex (c, d, j), drawn with a, b above and c, d below, equals the
/// sum over i of this coefficient times the horizontal pair of vertices
/// (a, c, i) and (b, d, i).
inline ExactValue recoupling_coefficient(Spin a, Spin b, Spin c, Spin d, Spin j, Spin i) {
    ExactValue den = theta_value(a, c, i) * theta_value(b, d, i);
    if (den == 0) return 0;
    return tet_6j(a, b, j, d, c, i) * loop_value(i) / den;
}

/// Braiding eigenvalue at A = -1 for swapping two legs of the vertex
/// (a, b, c); symmetric in its arguments.
inline int vertex_flip_sign(Spin a, Spin b, Spin c) {
    long e1 = (static_cast<long>(a) + b - c) / 2;
    long e2 = (static_cast<long>(c) * (c + 2) - static_cast<long>(a) * (a + 2) - static_cast<long>(b) * (b + 2)) / 2;
    return sign_power(e1 + e2);
}

/// Closed trivalent multigraph with a cyclic slot order at each vertex.
class TrivalentNet {
public:
    struct End {
        std::size_t vertex = 0;
        int slot = 0;
        friend bool operator==(const End&, const End&) = default;
    };
    struct NetVertex {
        std::array<std::size_t, 3> edge{};
        bool alive = true;
    };
    struct NetEdge {
        Spin spin = 0;
        std::array<End, 2> end{};
        bool alive = true;
    };

    std::size_t add_vertex() {
        vertices_.push_back({});
        vertices_.back().edge.fill(kUnset);
        return vertices_.size() - 1;
    }

    std::size_t add_edge(Spin spin, End a, End b) {
        for (End x : {a, b}) {
            if (x.vertex >= vertices_.size() || x.slot < 0 || x.slot > 2) throw GraphError("bad net edge end");
            if (vertices_[x.vertex].edge[static_cast<std::size_t>(x.slot)] != kUnset) throw GraphError("net slot already used");
        }
        if (a == b) throw GraphError("edge ends must be distinct slots");
        edges_.push_back({spin, {a, b}, true});
        vertices_[a.vertex].edge[static_cast<std::size_t>(a.slot)] = edges_.size() - 1;
        vertices_[b.vertex].edge[static_cast<std::size_t>(b.slot)] = edges_.size() - 1;
        return edges_.size() - 1;
    }

    void add_free_loop(Spin spin) { free_loops_.push_back(spin); }

    /// Net of a graph whose vertices all have valence 3 (or 0, ignored).
    /// Slots follow edge order; end 0 of a loop takes the earlier slot.
    static TrivalentNet from_graph(const LabeledGraph& g) {
        TrivalentNet net;
        std::vector<std::size_t> id(g.vertex_count(), kUnset);
        std::vector<int> used(g.vertex_count(), 0);
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            auto val = g.valence(v);
            if (val == 0) continue;
            if (val != 3) throw GraphError("vertex '" + g.name(v) + "' is not trivalent");
            id[v] = net.add_vertex();
        }
        for (const auto& e : g.edges()) {
            End a{id[e.end0], used[e.end0]++};
            End b{id[e.end1], used[e.end1]++};
            net.add_edge(e.spin, a, b);
        }
        return net;
    }

    void check_closed() const {
        for (const auto& v : vertices_)
            if (v.alive)
                for (auto e : v.edge)
                    if (e == kUnset) throw GraphError("net has a free end");
    }

    const std::vector<NetVertex>& vertices() const noexcept { return vertices_; }
    const std::vector<NetEdge>& edges() const noexcept { return edges_; }
    const std::vector<Spin>& free_loops() const noexcept { return free_loops_; }

    /// Reverses the cyclic order at v by swapping slots 1 and 2.
    void flip_vertex(std::size_t v) { swap_slots(v, 1, 2); }

private:
    friend class NetEvaluator;
    static constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();

    void swap_slots(std::size_t v, int s, int t) {
        auto& vx = vertices_[v];
        std::size_t es = vx.edge[static_cast<std::size_t>(s)], et = vx.edge[static_cast<std::size_t>(t)];
        for (auto& end : edges_[es].end)
            if (end.vertex == v && end.slot == s) { end.slot = -1; }
        for (auto& end : edges_[et].end)
            if (end.vertex == v && end.slot == t) end.slot = s;
        for (auto& end : edges_[es].end)
            if (end.vertex == v && end.slot == -1) end.slot = t;
        std::swap(vx.edge[static_cast<std::size_t>(s)], vx.edge[static_cast<std::size_t>(t)]);
    }

    std::vector<NetVertex> vertices_;
    std::vector<NetEdge> edges_;
    std::vector<Spin> free_loops_;
};

struct ExactOptions {
    /// Reduction steps allowed per trivalent evaluation.
    std::uint64_t step_budget = 50'000'000;
    /// Trivalent graphs allowed in one relativistic evaluation.
    std::uint64_t term_budget = 5'000'000;
};

/// Reduces a closed trivalent net to a rational by loop removal, bubble
/// collapse and recoupling along a shortest cycle.
class NetEvaluator {
public:
    explicit NetEvaluator(std::uint64_t step_budget) : budget_(step_budget) {}

    ExactValue evaluate(TrivalentNet net) {
        net.check_closed();
        return run(std::move(net));
    }

    std::uint64_t steps() const noexcept { return steps_; }

private:
    using End = TrivalentNet::End;
    static constexpr std::size_t kUnset = TrivalentNet::kUnset;

    static End far_end(const TrivalentNet& n, std::size_t e, End here) {
        const auto& ends = n.edges_[e].end;
        return ends[0] == here ? ends[1] : ends[0];
    }

    static void retarget(TrivalentNet& n, std::size_t e, End from, End to) {
        for (auto& end : n.edges_[e].end)
            if (end == from) {
                end = to;
                n.vertices_[to.vertex].edge[static_cast<std::size_t>(to.slot)] = e;
                return;
            }
        throw ComputationError("net edge end not found");
    }

    static Spin spin_at(const TrivalentNet& n, std::size_t v, int slot) {
        return n.edges_[n.vertices_[v].edge[static_cast<std::size_t>(slot)]].spin;
    }

    /// Removes vertex v, joining the edges in slots s and t into one strand.
    static void join_through(TrivalentNet& n, std::size_t v, int s, int t) {
        auto& vx = n.vertices_[v];
        std::size_t ex = vx.edge[static_cast<std::size_t>(s)], ey = vx.edge[static_cast<std::size_t>(t)];
        vx.alive = false;
        if (ex == ey) {
            n.free_loops_.push_back(n.edges_[ex].spin);
            n.edges_[ex].alive = false;
            return;
        }
        End far = far_end(n, ey, {v, t});
        n.edges_[ey].alive = false;
        retarget(n, ex, {v, s}, far);
    }

    static void remove_zero_edge(TrivalentNet& n, std::size_t e) {
        auto ends = n.edges_[e].end;
        n.edges_[e].alive = false;
        if (ends[0].vertex != ends[1].vertex) {
            for (End x : ends) {
                int s = (x.slot + 1) % 3, t = (x.slot + 2) % 3;
                join_through(n, x.vertex, s, t);
            }
            return;
        }
        // Spin-0 loop: the third leg is spin 0 as well and dangles now.
        std::size_t v = ends[0].vertex;
        int third = 3 - ends[0].slot - ends[1].slot;
        std::size_t e3 = n.vertices_[v].edge[static_cast<std::size_t>(third)];
        End far = far_end(n, e3, {v, third});
        n.vertices_[v].alive = false;
        n.edges_[e3].alive = false;
        join_through(n, far.vertex, (far.slot + 1) % 3, (far.slot + 2) % 3);
    }

    void tick() {
        if (++steps_ > budget_) throw BudgetExceededError("trivalent reduction exceeded its step budget");
    }

    struct Cycle {
        std::size_t u = 0, w = 0;  // endpoints of the edge to recouple
        std::size_t edge = 0;
        std::size_t at_u = 0, at_w = 0;  // cycle edges continuing from u and w
        std::size_t length = 0;
    };

    /// Shortest cycle through some edge, found by BFS with that edge removed.
    static std::optional<Cycle> shortest_cycle(const TrivalentNet& n) {
        std::optional<Cycle> best;
        const std::size_t nv = n.vertices_.size();
        std::vector<std::size_t> dist(nv), via(nv);
        for (std::size_t e = 0; e < n.edges_.size(); ++e) {
            const auto& ed = n.edges_[e];
            if (!ed.alive) continue;
            std::size_t src = ed.end[0].vertex, dst = ed.end[1].vertex;
            std::fill(dist.begin(), dist.end(), kUnset);
            std::deque<std::size_t> queue{src};
            dist[src] = 0;
            while (!queue.empty() && dist[dst] == kUnset) {
                std::size_t x = queue.front();
                queue.pop_front();
                for (std::size_t f : n.vertices_[x].edge) {
                    if (f == e) continue;
                    End here{};
                    for (End end : n.edges_[f].end)
                        if (end.vertex == x) here = end;
                    std::size_t y = far_end(n, f, here).vertex;
                    if (dist[y] != kUnset) continue;
                    dist[y] = dist[x] + 1;
                    via[y] = f;
                    queue.push_back(y);
                }
            }
            if (dist[dst] == kUnset) continue;
            std::size_t len = dist[dst] + 1;
            if (best && best->length <= len) continue;
            // Walk back from dst to find the cycle edge leaving src.
            std::size_t y = dst, last = via[dst];
            while (true) {
                std::size_t f = via[y];
                const auto& fe = n.edges_[f];
                std::size_t prev = fe.end[0].vertex == y ? fe.end[1].vertex : fe.end[0].vertex;
                last = f;
                if (prev == src) break;
                y = prev;
            }
            best = Cycle{src, dst, e, last, via[dst], len};
            if (len == 3) return best;
        }
        return best;
    }

    ExactValue run(TrivalentNet n) {
        tick();
        ExactValue factor = 1;

        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t v = 0; v < n.vertices_.size(); ++v) {
                if (!n.vertices_[v].alive) continue;
                if (!admissible_triple(spin_at(n, v, 0), spin_at(n, v, 1), spin_at(n, v, 2))) return 0;
            }
            for (std::size_t e = 0; e < n.edges_.size(); ++e) {
                if (n.edges_[e].alive && n.edges_[e].spin == 0) {
                    remove_zero_edge(n, e);
                    changed = true;
                    break;
                }
            }
        }
        for (Spin s : n.free_loops_) factor *= loop_value(s);
        n.free_loops_.clear();

        bool any = false;
        for (const auto& v : n.vertices_) any = any || v.alive;
        if (!any) return factor;

        // Tadpoles vanish: their third leg has nonzero spin here.
        for (const auto& e : n.edges_)
            if (e.alive && e.end[0].vertex == e.end[1].vertex) return 0;

        if (auto bubble = find_bubble(n)) return factor * collapse_bubble(std::move(n), *bubble);

        auto cycle = shortest_cycle(n);
        if (!cycle) throw ComputationError("closed trivalent net without a cycle");
        return factor * recouple(std::move(n), *cycle);
    }

    struct Bubble {
        std::size_t u, w;
        int a_u, b_u, c_u;  // slots at u
        int a_w, b_w, c_w;  // slots at w
    };

    static std::optional<Bubble> find_bubble(const TrivalentNet& n) {
        for (std::size_t u = 0; u < n.vertices_.size(); ++u) {
            if (!n.vertices_[u].alive) continue;
            for (int s = 0; s < 3; ++s) {
                for (int t = s + 1; t < 3; ++t) {
                    std::size_t es = n.vertices_[u].edge[static_cast<std::size_t>(s)];
                    std::size_t et = n.vertices_[u].edge[static_cast<std::size_t>(t)];
                    End fs = far_end(n, es, {u, s}), ft = far_end(n, et, {u, t});
                    if (fs.vertex != ft.vertex || fs.vertex == u) continue;
                    int cu = 3 - s - t;
                    int cw = 3 - fs.slot - ft.slot;
                    return Bubble{u, fs.vertex, s, t, cu, fs.slot, ft.slot, cw};
                }
            }
        }
        return std::nullopt;
    }

    ExactValue collapse_bubble(TrivalentNet n, const Bubble& b) {
        const Spin sa = spin_at(n, b.u, b.a_u), sb = spin_at(n, b.u, b.b_u);
        const Spin sc = spin_at(n, b.u, b.c_u), sc2 = spin_at(n, b.w, b.c_w);
        if (sc != sc2) return 0;

        // Planar when the two vertices read (c, a, b) and (c', b, a), or
        // both mirrored.
        bool u_cab = b.a_u == (b.c_u + 1) % 3;
        bool w_cba = b.b_w == (b.c_w + 1) % 3;
        ExactValue factor = (u_cab == w_cba) ? 1 : vertex_flip_sign(sa, sb, sc);

        std::size_t ea = n.vertices_[b.u].edge[static_cast<std::size_t>(b.a_u)];
        std::size_t eb = n.vertices_[b.u].edge[static_cast<std::size_t>(b.b_u)];
        std::size_t ec = n.vertices_[b.u].edge[static_cast<std::size_t>(b.c_u)];
        std::size_t ec2 = n.vertices_[b.w].edge[static_cast<std::size_t>(b.c_w)];
        n.edges_[ea].alive = n.edges_[eb].alive = false;
        n.vertices_[b.u].alive = n.vertices_[b.w].alive = false;

        if (ec == ec2) {
            n.edges_[ec].alive = false;
            factor *= theta_value(sa, sb, sc);
        } else {
            factor *= theta_value(sa, sb, sc) / loop_value(sc);
            End far = far_end(n, ec2, {b.w, b.c_w});
            n.edges_[ec2].alive = false;
            retarget(n, ec, {b.u, b.c_u}, far);
        }
        return factor * run(std::move(n));
    }

    ExactValue recouple(TrivalentNet n, const Cycle& cyc) {
        const std::size_t u = cyc.u, w = cyc.w, j = cyc.edge;
        auto slot_of = [&](std::size_t v, std::size_t e) {
            for (int s = 0; s < 3; ++s)
                if (n.vertices_[v].edge[static_cast<std::size_t>(s)] == e) return s;
            throw ComputationError("edge not at vertex");
        };
        ExactValue factor = 1;

        // Align u to (j, q, p) and w to (j, r, s) where p and r lie on the cycle.
        int sj_u = slot_of(u, j);
        if (n.vertices_[u].edge[static_cast<std::size_t>((sj_u + 2) % 3)] != cyc.at_u) {
            factor *= vertex_flip_sign(spin_at(n, u, 0), spin_at(n, u, 1), spin_at(n, u, 2));
            n.flip_vertex(u);
            sj_u = slot_of(u, j);
        }
        int sj_w = slot_of(w, j);
        if (n.vertices_[w].edge[static_cast<std::size_t>((sj_w + 1) % 3)] != cyc.at_w) {
            factor *= vertex_flip_sign(spin_at(n, w, 0), spin_at(n, w, 1), spin_at(n, w, 2));
            n.flip_vertex(w);
            sj_w = slot_of(w, j);
        }
        const std::size_t ep = cyc.at_u;
        const std::size_t eq = n.vertices_[u].edge[static_cast<std::size_t>((sj_u + 1) % 3)];
        const std::size_t er = cyc.at_w;
        const std::size_t es = n.vertices_[w].edge[static_cast<std::size_t>((sj_w + 2) % 3)];
        const End p_old{u, (sj_u + 2) % 3}, q_old{u, (sj_u + 1) % 3};
        const End r_old{w, (sj_w + 1) % 3}, s_old{w, (sj_w + 2) % 3};

        const Spin a = n.edges_[ep].spin, b = n.edges_[eq].spin;
        const Spin c = n.edges_[er].spin, d = n.edges_[es].spin;
        const Spin sj = n.edges_[j].spin;

        Spin lo = std::max(std::abs(a - c), std::abs(b - d));
        Spin hi = std::min(a + c, b + d);
        if (cyc.length == 3) {
            // The new vertex (i, p, r) closes a bubble with the third vertex
            // of the triangle, which forces i to that vertex's free leg.
            End px = far_end(n, ep, p_old);
            int free_slot = 3 - px.slot - far_end(n, er, r_old).slot;
            Spin forced = spin_at(n, px.vertex, free_slot);
            lo = std::max(lo, forced);
            hi = std::min(hi, forced);
        }

        // Rebuild u as (i, p, r) and w as (i, s, q).
        TrivalentNet base = n;
        auto& bu = base.vertices_[u];
        auto& bw = base.vertices_[w];
        for (auto [edge, from, to] : {std::tuple{ep, p_old, End{u, 1}}, std::tuple{er, r_old, End{u, 2}},
                                      std::tuple{es, s_old, End{w, 1}}, std::tuple{eq, q_old, End{w, 2}}}) {
            for (auto& end : base.edges_[edge].end)
                if (end == from) end = to;
        }
        bu.edge = {j, ep, er};
        bw.edge = {j, es, eq};
        base.edges_[j].end = {End{u, 0}, End{w, 0}};

        ExactValue sum = 0;
        for (Spin i = lo; i <= hi; i += 2) {
            if ((i - lo) % 2 != 0) continue;
            if (!admissible_triple(a, c, i) || !admissible_triple(b, d, i)) continue;
            ExactValue coeff = recoupling_coefficient(a, b, c, d, sj, i);
            if (coeff == 0) continue;
            TrivalentNet term = base;
            term.edges_[j].spin = i;
            sum += coeff * run(std::move(term));
        }
        return factor * sum;
    }

    std::uint64_t budget_;
    std::uint64_t steps_ = 0;
};

/// Value of a closed trivalent net at A = -1.
inline ExactValue eval_trivalent_closed(const TrivalentNet& net, const ExactOptions& opts = {}) {
    NetEvaluator ev(opts.step_budget);
    return ev.evaluate(net);
}

namespace detail {

/// Pair of edges at v to peel off first: the pair with the smallest
/// minimum spin keeps the internal spin range short.
inline std::pair<EdgeId, EdgeId> peel_pair(const LabeledGraph& g, VertexId v) {
    auto inc = g.incident_edges(v);
    std::pair<EdgeId, EdgeId> best{inc[0], inc[1]};
    Spin best_key = std::numeric_limits<Spin>::max();
    for (std::size_t x = 0; x < inc.size(); ++x)
        for (std::size_t y = x + 1; y < inc.size(); ++y) {
            Spin key = std::min(g.edge(inc[x]).spin, g.edge(inc[y]).spin);
            if (key < best_key) {
                best_key = key;
                best = {inc[x], inc[y]};
            }
        }
    return best;
}

class RelativisticEvaluator {
public:
    explicit RelativisticEvaluator(const ExactOptions& opts) : opts_(opts) {}

    ExactValue run(const LabeledGraph& g) {
        total_ = 0;
        visit(g, ExactValue(1));
        return total_;
    }

private:
    void visit(const LabeledGraph& input, ExactValue coeff) {
        auto [g, mult] = simplify(input);
        if (mult == 0) return;
        coeff *= mult;
        if (!check_admissibility(g).admissible) return;

        if (auto pair = find_parallel_pair(g)) {
            for (auto& t : fuse_parallel_edges(g, pair->first, pair->second).terms) visit(t.graph, coeff * t.coefficient);
            return;
        }
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            if (g.valence(v) < 4) continue;
            auto [e1, e2] = peel_pair(g, v);
            VertexSplit split;
            split.first = {e1, e2};
            for (EdgeId e : g.incident_edges(v))
                if (e != e1 && e != e2) split.second.push_back(e);
            for (auto& t : expand_vertex(g, v, split).terms) visit(t.graph, coeff * t.coefficient);
            return;
        }

        if (++terms_ > opts_.term_budget) throw BudgetExceededError("tree expansion exceeded its term budget");
        ExactValue n = eval_trivalent_closed(TrivalentNet::from_graph(g), opts_);
        if (n == 0) return;
        ExactValue thetas = 1;
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            auto s = g.incident_spins(v);
            if (s.empty()) continue;
            ExactValue t = theta_value(s[0], s[1], s[2]);
            if (t == 0) throw ComputationError("zero theta normalization at an admissible vertex");
            thetas *= t;
        }
        total_ += coeff * n * n / thetas;
    }

    ExactOptions opts_;
    ExactValue total_ = 0;
    std::uint64_t terms_ = 0;
};

}  // namespace detail

/// The invariant as an exact rational.
inline ExactValue eval_relativistic_exact(const LabeledGraph& g, const ExactOptions& opts = {}) {
    return detail::RelativisticEvaluator(opts).run(g);
}

}  // namespace spinnet
