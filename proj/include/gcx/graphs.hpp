#pragma once

// Half-edge graphs and ribbon graphs with labeled legs: validation,
// canonical labeling with exact automorphism groups, vertex colorings by
// cyclic-operad elements (coinvariants realized by anchor normalization),
// the edge contraction that composes endpoint colors, coloring bases, and
// exhaustive isomorph-free enumeration at desk scale.

#include "gcx/format.hpp"
#include "gcx/operad.hpp"
#include "gcx/sparse.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gcx {

// A graph on half-edges 0..H-1.  inv is the gluing involution; its fixed
// points are the legs, labeled bijectively 1..n by leg_label (internal
// half-edges carry 0).  vertex_of assigns half-edges to contiguous vertex
// ids.  Ribbon graphs add next, the cyclic successor within each vertex.
struct HalfEdgeGraph {
    bool ribbon = false;
    std::vector<int> inv;
    std::vector<int> vertex_of;
    std::vector<int> leg_label;
    std::vector<int> next;   // ribbon only; empty otherwise

    int half_edges() const { return static_cast<int>(inv.size()); }

    int vertex_count() const {
        int m = -1;
        for (int v : vertex_of) m = std::max(m, v);
        return m + 1;
    }

    int leg_count() const {
        int n = 0;
        for (int h = 0; h < half_edges(); ++h)
            if (inv[static_cast<size_t>(h)] == h) ++n;
        return n;
    }

    int valence(int v) const {
        int d = 0;
        for (int w : vertex_of)
            if (w == v) ++d;
        return d;
    }

    // Half-edges of each vertex: ascending for plain graphs, in cyclic
    // order starting from the smallest member for ribbon graphs.
    std::vector<std::vector<int>> vertex_half_edges() const {
        std::vector<std::vector<int>> out(static_cast<size_t>(vertex_count()));
        for (int h = 0; h < half_edges(); ++h)
            out[static_cast<size_t>(vertex_of[static_cast<size_t>(h)])].push_back(h);
        if (ribbon) {
            for (auto& cyc : out) {
                if (cyc.empty()) continue;
                int start = *std::min_element(cyc.begin(), cyc.end());
                std::vector<int> ordered;
                int h = start;
                do {
                    ordered.push_back(h);
                    h = next[static_cast<size_t>(h)];
                } while (h != start && ordered.size() <= cyc.size());
                cyc = std::move(ordered);
            }
        }
        return out;
    }

    ValidationReport validate() const {
        ValidationReport rep;
        int H = half_edges();
        if (static_cast<int>(vertex_of.size()) != H || static_cast<int>(leg_label.size()) != H)
            rep.fail("field lengths disagree with the half-edge count");
        if (ribbon && static_cast<int>(next.size()) != H)
            rep.fail("ribbon graph without a successor for every half-edge");
        if (!rep.ok) return rep;
        for (int h = 0; h < H; ++h) {
            int ih = inv[static_cast<size_t>(h)];
            if (ih < 0 || ih >= H || inv[static_cast<size_t>(ih)] != h)
                rep.fail("involution is not an involution at half-edge " + std::to_string(h));
        }
        int V = vertex_count();
        std::vector<int> val(static_cast<size_t>(std::max(V, 0)), 0);
        for (int h = 0; h < H; ++h) {
            int v = vertex_of[static_cast<size_t>(h)];
            if (v < 0 || v >= V) { rep.fail("vertex id out of range"); return rep; }
            ++val[static_cast<size_t>(v)];
        }
        for (int v = 0; v < V; ++v) {
            if (val[static_cast<size_t>(v)] == 0)
                rep.fail("vertex ids are not contiguous");
            else if (val[static_cast<size_t>(v)] < 3)
                rep.fail("vertex " + std::to_string(v) + " has valence below 3");
        }
        std::set<int> labels;
        for (int h = 0; h < H; ++h) {
            int lab = leg_label[static_cast<size_t>(h)];
            if (inv[static_cast<size_t>(h)] == h) {
                if (lab < 1) rep.fail("leg without a positive label");
                else if (!labels.insert(lab).second) rep.fail("duplicate leg label " + std::to_string(lab));
            } else if (lab != 0) {
                rep.fail("internal half-edge with a leg label");
            }
        }
        for (int lab = 1; lab <= static_cast<int>(labels.size()); ++lab)
            if (!labels.count(lab)) rep.fail("leg labels are not 1..n");
        if (ribbon && rep.ok) {
            std::vector<char> seen(static_cast<size_t>(H), 0);
            for (int h = 0; h < H; ++h) {
                int nh = next[static_cast<size_t>(h)];
                if (nh < 0 || nh >= H) { rep.fail("successor out of range"); return rep; }
                if (vertex_of[static_cast<size_t>(nh)] != vertex_of[static_cast<size_t>(h)])
                    rep.fail("successor leaves its vertex at half-edge " + std::to_string(h));
            }
            for (int h = 0; h < H && rep.ok; ++h) {
                if (seen[static_cast<size_t>(h)]) continue;
                int steps = 0, x = h;
                do {
                    if (seen[static_cast<size_t>(x)]) { rep.fail("successor orbits overlap"); break; }
                    seen[static_cast<size_t>(x)] = 1;
                    x = next[static_cast<size_t>(x)];
                    ++steps;
                } while (x != h && steps <= H);
                if (rep.ok && steps != val[static_cast<size_t>(vertex_of[static_cast<size_t>(h)])])
                    rep.fail("successor orbit does not exhaust vertex " +
                             std::to_string(vertex_of[static_cast<size_t>(h)]));
            }
        }
        return rep;
    }
};

inline bool is_connected(const HalfEdgeGraph& g) {
    int V = g.vertex_count();
    if (V <= 1) return true;
    std::vector<int> root(static_cast<size_t>(V));
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](int x) {
        while (root[static_cast<size_t>(x)] != x) {
            root[static_cast<size_t>(x)] = root[static_cast<size_t>(root[static_cast<size_t>(x)])];
            x = root[static_cast<size_t>(x)];
        }
        return x;
    };
    for (int h = 0; h < g.half_edges(); ++h) {
        int ih = g.inv[static_cast<size_t>(h)];
        if (ih == h) continue;
        int a = find(g.vertex_of[static_cast<size_t>(h)]);
        int b = find(g.vertex_of[static_cast<size_t>(ih)]);
        if (a != b) root[static_cast<size_t>(a)] = b;
    }
    int r0 = find(0);
    for (int v = 1; v < V; ++v)
        if (find(v) != r0) return false;
    return true;
}

// Contractible edges: internal edges with distinct endpoints, each as a
// (h, inv h) pair with h < inv h, ordered by the first member.
inline std::vector<std::pair<int, int>> internal_edges(const HalfEdgeGraph& g) {
    std::vector<std::pair<int, int>> out;
    for (int h = 0; h < g.half_edges(); ++h) {
        int ih = g.inv[static_cast<size_t>(h)];
        if (ih <= h) continue;
        if (g.vertex_of[static_cast<size_t>(h)] != g.vertex_of[static_cast<size_t>(ih)])
            out.emplace_back(h, ih);
    }
    return out;
}

// All internal edges including loops, each as a (h, inv h) pair with
// h < inv h, ordered by the first member.
inline std::vector<std::pair<int, int>> all_internal_edges(const HalfEdgeGraph& g) {
    std::vector<std::pair<int, int>> out;
    for (int h = 0; h < g.half_edges(); ++h) {
        int ih = g.inv[static_cast<size_t>(h)];
        if (h < ih) out.emplace_back(h, ih);
    }
    return out;
}

inline int total_internal_edges(const HalfEdgeGraph& g) {
    return (g.half_edges() - g.leg_count()) / 2;
}

inline int loop_count(const HalfEdgeGraph& g) {
    return total_internal_edges(g) - static_cast<int>(internal_edges(g).size());
}

// Number of orbits of the face traversal h -> next[inv[h]].
inline int boundary_components(const HalfEdgeGraph& g) {
    if (!g.ribbon) throw std::logic_error("boundary components need ribbon data");
    int H = g.half_edges(), count = 0;
    std::vector<char> seen(static_cast<size_t>(H), 0);
    for (int h = 0; h < H; ++h) {
        if (seen[static_cast<size_t>(h)]) continue;
        ++count;
        int x = h;
        do {
            seen[static_cast<size_t>(x)] = 1;
            x = g.next[static_cast<size_t>(g.inv[static_cast<size_t>(x)])];
        } while (x != h);
    }
    return count;
}

// Rebuilds g with half-edge h renamed hmap[h] and vertex v renamed vmap[v].
inline HalfEdgeGraph apply_relabel(const HalfEdgeGraph& g, const std::vector<int>& hmap,
                                   const std::vector<int>& vmap) {
    int H = g.half_edges();
    HalfEdgeGraph out;
    out.ribbon = g.ribbon;
    out.inv.resize(static_cast<size_t>(H));
    out.vertex_of.resize(static_cast<size_t>(H));
    out.leg_label.resize(static_cast<size_t>(H));
    if (g.ribbon) out.next.resize(static_cast<size_t>(H));
    for (int h = 0; h < H; ++h) {
        int nh = hmap[static_cast<size_t>(h)];
        out.inv[static_cast<size_t>(nh)] = hmap[static_cast<size_t>(g.inv[static_cast<size_t>(h)])];
        out.vertex_of[static_cast<size_t>(nh)] = vmap[static_cast<size_t>(g.vertex_of[static_cast<size_t>(h)])];
        out.leg_label[static_cast<size_t>(nh)] = g.leg_label[static_cast<size_t>(h)];
        if (g.ribbon)
            out.next[static_cast<size_t>(nh)] = hmap[static_cast<size_t>(g.next[static_cast<size_t>(h)])];
    }
    return out;
}

// True when hmap carries a onto b respecting involution, vertex fibers,
// leg labels pointwise, and the ribbon successor.
inline bool is_isomorphism(const HalfEdgeGraph& a, const HalfEdgeGraph& b,
                           const std::vector<int>& hmap) {
    int H = a.half_edges();
    if (b.half_edges() != H || static_cast<int>(hmap.size()) != H) return false;
    if (a.ribbon != b.ribbon) return false;
    std::vector<char> hit(static_cast<size_t>(H), 0);
    for (int h = 0; h < H; ++h) {
        int m = hmap[static_cast<size_t>(h)];
        if (m < 0 || m >= H || hit[static_cast<size_t>(m)]) return false;
        hit[static_cast<size_t>(m)] = 1;
    }
    std::vector<int> vmap(static_cast<size_t>(a.vertex_count()), -1);
    for (int h = 0; h < H; ++h) {
        int m = hmap[static_cast<size_t>(h)];
        if (hmap[static_cast<size_t>(a.inv[static_cast<size_t>(h)])] != b.inv[static_cast<size_t>(m)])
            return false;
        if (a.leg_label[static_cast<size_t>(h)] != b.leg_label[static_cast<size_t>(m)]) return false;
        if (a.ribbon &&
            hmap[static_cast<size_t>(a.next[static_cast<size_t>(h)])] != b.next[static_cast<size_t>(m)])
            return false;
        int va = a.vertex_of[static_cast<size_t>(h)];
        int vb = b.vertex_of[static_cast<size_t>(m)];
        if (vmap[static_cast<size_t>(va)] == -1) vmap[static_cast<size_t>(va)] = vb;
        else if (vmap[static_cast<size_t>(va)] != vb) return false;
    }
    std::set<int> images(vmap.begin(), vmap.end());
    return static_cast<int>(images.size()) == a.vertex_count();
}

namespace detail {

inline long long fac_ll(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline int permutation_sign(std::vector<int> p) {
    int sign = 1;
    std::vector<char> seen(p.size(), 0);
    for (size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        size_t j = i;
        int len = 0;
        while (!seen[j]) {
            seen[j] = 1;
            j = static_cast<size_t>(p[j]);
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

// Cyclic order of vertex v read starting from half-edge h.
inline std::vector<int> cycle_from(const HalfEdgeGraph& g, int h) {
    std::vector<int> out;
    int x = h;
    do {
        out.push_back(x);
        x = g.next[static_cast<size_t>(x)];
    } while (x != h);
    return out;
}

} // namespace detail

// Permutation induced by a half-edge automorphism on the full internal
// edge list of g, loops included (indices into all_internal_edges(g)).
// A loop flip fixes its edge; exchanging two loops is a transposition.
inline std::vector<int> induced_edge_permutation(const HalfEdgeGraph& g,
                                                 const std::vector<int>& phi) {
    auto edges = all_internal_edges(g);
    std::map<int, int> index_of;
    for (size_t j = 0; j < edges.size(); ++j) {
        index_of[edges[j].first] = static_cast<int>(j);
        index_of[edges[j].second] = static_cast<int>(j);
    }
    std::vector<int> out(edges.size());
    for (size_t j = 0; j < edges.size(); ++j) {
        auto it = index_of.find(phi[static_cast<size_t>(edges[j].first)]);
        if (it == index_of.end())
            throw std::logic_error("automorphism does not preserve internal edges");
        out[j] = it->second;
    }
    return out;
}

// Contracts the internal non-loop edge containing half-edge h.  The two
// endpoints merge; in the ribbon case the merged cyclic order is
// (b_l, a_1..a_k, b_1..b_{l-1}) where (h, a_1..a_k) and (inv h, b_1..b_l)
// are the endpoint cyclic orders read from the contracted edge.  Optional
// out-parameters receive the half-edge and vertex renumbering maps.
inline HalfEdgeGraph contract_edge(const HalfEdgeGraph& g, int h,
                                   std::vector<int>* hmap_out = nullptr,
                                   std::vector<int>* vmap_out = nullptr) {
    int H = g.half_edges();
    if (h < 0 || h >= H) throw std::invalid_argument("contract_edge: no such half-edge");
    int hh = g.inv[static_cast<size_t>(h)];
    if (hh == h) throw std::invalid_argument("contract_edge: cannot contract a leg");
    int v1 = g.vertex_of[static_cast<size_t>(h)];
    int v2 = g.vertex_of[static_cast<size_t>(hh)];
    if (v1 == v2) throw std::invalid_argument("contract_edge: cannot contract a loop");

    std::vector<int> hmap(static_cast<size_t>(H), -1);
    int nid = 0;
    for (int x = 0; x < H; ++x)
        if (x != h && x != hh) hmap[static_cast<size_t>(x)] = nid++;
    int V = g.vertex_count();
    int vkeep = std::min(v1, v2), vdrop = std::max(v1, v2);
    std::vector<int> vmap(static_cast<size_t>(V));
    for (int v = 0; v < V; ++v)
        vmap[static_cast<size_t>(v)] = (v == vdrop) ? vkeep - (vkeep > vdrop ? 1 : 0)
                                                    : v - (v > vdrop ? 1 : 0);

    HalfEdgeGraph out;
    out.ribbon = g.ribbon;
    out.inv.assign(static_cast<size_t>(H - 2), -1);
    out.vertex_of.assign(static_cast<size_t>(H - 2), -1);
    out.leg_label.assign(static_cast<size_t>(H - 2), 0);
    if (g.ribbon) out.next.assign(static_cast<size_t>(H - 2), -1);
    for (int x = 0; x < H; ++x) {
        if (x == h || x == hh) continue;
        int nx = hmap[static_cast<size_t>(x)];
        out.inv[static_cast<size_t>(nx)] = hmap[static_cast<size_t>(g.inv[static_cast<size_t>(x)])];
        out.vertex_of[static_cast<size_t>(nx)] =
            vmap[static_cast<size_t>(g.vertex_of[static_cast<size_t>(x)])];
        out.leg_label[static_cast<size_t>(nx)] = g.leg_label[static_cast<size_t>(x)];
    }
    if (g.ribbon) {
        auto a = detail::cycle_from(g, h);    // (h, a_1..a_k)
        auto b = detail::cycle_from(g, hh);   // (hh, b_1..b_l)
        std::vector<int> merged;
        merged.push_back(b.back());
        for (size_t i = 1; i < a.size(); ++i) merged.push_back(a[i]);
        for (size_t i = 1; i + 1 < b.size(); ++i) merged.push_back(b[i]);
        for (size_t i = 0; i < merged.size(); ++i) {
            int from = hmap[static_cast<size_t>(merged[i])];
            int to = hmap[static_cast<size_t>(merged[(i + 1) % merged.size()])];
            out.next[static_cast<size_t>(from)] = to;
        }
        for (int x = 0; x < H; ++x) {
            if (x == h || x == hh) continue;
            int v = g.vertex_of[static_cast<size_t>(x)];
            if (v == v1 || v == v2) continue;
            out.next[static_cast<size_t>(hmap[static_cast<size_t>(x)])] =
                hmap[static_cast<size_t>(g.next[static_cast<size_t>(x)])];
        }
    }
    if (hmap_out) *hmap_out = std::move(hmap);
    if (vmap_out) *vmap_out = std::move(vmap);
    return out;
}

// An isomorphism class: canonically labeled representative, the relabel
// map that carried the input onto it, a generating set of automorphisms
// of the representative (the full group in the ribbon case), the exact
// group order, and whether some automorphism induces an odd permutation
// of the internal edges (loops included).
struct GraphIsoClass {
    HalfEdgeGraph rep;
    std::string encoding;
    std::vector<int> relabel;
    std::vector<std::vector<int>> automorphisms;
    long long aut_order = 1;
    bool odd_edge_automorphism = false;
};

namespace detail {

// Traversal labeling of a connected ribbon graph from a start half-edge:
// labels are assigned in discovery order, visiting next then inv of each
// labeled half-edge.  Connectedness makes the traversal exhaustive and
// the labeling rigid, so isomorphism and automorphisms reduce to
// comparing the per-start encodings.
struct RibbonTraversal {
    std::vector<int> by_label;   // label -> half-edge
    std::vector<int> label_of;   // half-edge -> label
    std::vector<int> encoding;   // per label: next label, inv label, leg label
    bool complete = false;
};

inline RibbonTraversal ribbon_traverse(const HalfEdgeGraph& g, int start) {
    int H = g.half_edges();
    RibbonTraversal t;
    t.label_of.assign(static_cast<size_t>(H), -1);
    t.by_label.reserve(static_cast<size_t>(H));
    t.by_label.push_back(start);
    t.label_of[static_cast<size_t>(start)] = 0;
    for (size_t i = 0; i < t.by_label.size(); ++i) {
        int h = t.by_label[i];
        for (int nb : {g.next[static_cast<size_t>(h)], g.inv[static_cast<size_t>(h)]}) {
            if (t.label_of[static_cast<size_t>(nb)] < 0) {
                t.label_of[static_cast<size_t>(nb)] = static_cast<int>(t.by_label.size());
                t.by_label.push_back(nb);
            }
        }
    }
    t.complete = static_cast<int>(t.by_label.size()) == H;
    if (!t.complete) return t;
    t.encoding.reserve(static_cast<size_t>(3 * H));
    for (int i = 0; i < H; ++i) {
        int h = t.by_label[static_cast<size_t>(i)];
        t.encoding.push_back(t.label_of[static_cast<size_t>(g.next[static_cast<size_t>(h)])]);
        t.encoding.push_back(t.label_of[static_cast<size_t>(g.inv[static_cast<size_t>(h)])]);
        t.encoding.push_back(g.leg_label[static_cast<size_t>(h)]);
    }
    return t;
}

inline std::string int_encoding_string(const char* prefix, const std::vector<int>& e) {
    std::ostringstream os;
    os << prefix;
    for (int x : e) os << x << ",";
    return os.str();
}

inline HalfEdgeGraph ribbon_rep_from_encoding(const std::vector<int>& enc) {
    int H = static_cast<int>(enc.size()) / 3;
    HalfEdgeGraph g;
    g.ribbon = true;
    g.inv.resize(static_cast<size_t>(H));
    g.leg_label.resize(static_cast<size_t>(H));
    g.next.resize(static_cast<size_t>(H));
    g.vertex_of.assign(static_cast<size_t>(H), -1);
    for (int i = 0; i < H; ++i) {
        g.next[static_cast<size_t>(i)] = enc[static_cast<size_t>(3 * i)];
        g.inv[static_cast<size_t>(i)] = enc[static_cast<size_t>(3 * i + 1)];
        g.leg_label[static_cast<size_t>(i)] = enc[static_cast<size_t>(3 * i + 2)];
    }
    int V = 0;
    for (int i = 0; i < H; ++i) {
        if (g.vertex_of[static_cast<size_t>(i)] != -1) continue;
        int x = i;
        do {
            g.vertex_of[static_cast<size_t>(x)] = V;
            x = g.next[static_cast<size_t>(x)];
        } while (x != i);
        ++V;
    }
    return g;
}

inline GraphIsoClass ribbon_canonical(const HalfEdgeGraph& g) {
    int H = g.half_edges();
    std::vector<int> best;
    int best_start = -1;
    for (int s = 0; s < H; ++s) {
        RibbonTraversal t = ribbon_traverse(g, s);
        if (!t.complete) throw std::invalid_argument("canonical form requires a connected graph");
        if (best_start < 0 || t.encoding < best) {
            best = t.encoding;
            best_start = s;
        }
    }
    GraphIsoClass cls;
    cls.rep = ribbon_rep_from_encoding(best);
    cls.encoding = int_encoding_string("ribbon|", best);
    cls.relabel = ribbon_traverse(g, best_start).label_of;
    for (int t = 0; t < H; ++t) {
        RibbonTraversal tr = ribbon_traverse(cls.rep, t);
        if (tr.encoding != best) continue;
        if (!is_isomorphism(cls.rep, cls.rep, tr.by_label))
            throw std::logic_error("traversal produced a non-automorphism");
        cls.automorphisms.push_back(tr.by_label);
    }
    cls.aut_order = static_cast<long long>(cls.automorphisms.size());
    for (const auto& phi : cls.automorphisms)
        if (permutation_sign(induced_edge_permutation(cls.rep, phi)) < 0)
            cls.odd_edge_automorphism = true;
    return cls;
}

// Vertex-level view of a plain multigraph: loop counts, per-vertex leg
// labels, and the symmetric multiplicity matrix.
struct PlainVertexData {
    int V = 0;
    std::vector<int> loops;
    std::vector<std::vector<int>> legs;   // sorted labels per vertex
    std::vector<std::vector<int>> mult;   // V x V, zero diagonal
};

inline PlainVertexData plain_vertex_data(const HalfEdgeGraph& g) {
    PlainVertexData d;
    d.V = g.vertex_count();
    d.loops.assign(static_cast<size_t>(d.V), 0);
    d.legs.assign(static_cast<size_t>(d.V), {});
    d.mult.assign(static_cast<size_t>(d.V), std::vector<int>(static_cast<size_t>(d.V), 0));
    for (int h = 0; h < g.half_edges(); ++h) {
        int ih = g.inv[static_cast<size_t>(h)];
        int v = g.vertex_of[static_cast<size_t>(h)];
        if (ih == h) {
            d.legs[static_cast<size_t>(v)].push_back(g.leg_label[static_cast<size_t>(h)]);
        } else if (ih > h) {
            int w = g.vertex_of[static_cast<size_t>(ih)];
            if (v == w) ++d.loops[static_cast<size_t>(v)];
            else {
                ++d.mult[static_cast<size_t>(v)][static_cast<size_t>(w)];
                ++d.mult[static_cast<size_t>(w)][static_cast<size_t>(v)];
            }
        }
    }
    for (auto& l : d.legs) std::sort(l.begin(), l.end());
    return d;
}

// Deterministic half-edge layout of plain vertex data: per vertex, legs
// by ascending label, then loop pairs, then bundle copies toward each
// neighbor in ascending order; the t-th copy at u pairs with the t-th
// copy at v.
inline HalfEdgeGraph build_plain_graph(const PlainVertexData& d) {
    HalfEdgeGraph g;
    g.ribbon = false;
    std::vector<int> offset(static_cast<size_t>(d.V + 1), 0);
    for (int v = 0; v < d.V; ++v) {
        int deg = static_cast<int>(d.legs[static_cast<size_t>(v)].size()) +
                  2 * d.loops[static_cast<size_t>(v)];
        for (int w = 0; w < d.V; ++w) deg += d.mult[static_cast<size_t>(v)][static_cast<size_t>(w)];
        offset[static_cast<size_t>(v + 1)] = offset[static_cast<size_t>(v)] + deg;
    }
    int H = offset[static_cast<size_t>(d.V)];
    g.inv.assign(static_cast<size_t>(H), -1);
    g.vertex_of.assign(static_cast<size_t>(H), -1);
    g.leg_label.assign(static_cast<size_t>(H), 0);
    std::vector<int> cursor(offset.begin(), offset.end() - 1);
    for (int v = 0; v < d.V; ++v) {
        for (int lab : d.legs[static_cast<size_t>(v)]) {
            int h = cursor[static_cast<size_t>(v)]++;
            g.vertex_of[static_cast<size_t>(h)] = v;
            g.inv[static_cast<size_t>(h)] = h;
            g.leg_label[static_cast<size_t>(h)] = lab;
        }
        for (int t = 0; t < d.loops[static_cast<size_t>(v)]; ++t) {
            int h1 = cursor[static_cast<size_t>(v)]++;
            int h2 = cursor[static_cast<size_t>(v)]++;
            g.vertex_of[static_cast<size_t>(h1)] = v;
            g.vertex_of[static_cast<size_t>(h2)] = v;
            g.inv[static_cast<size_t>(h1)] = h2;
            g.inv[static_cast<size_t>(h2)] = h1;
        }
    }
    for (int u = 0; u < d.V; ++u)
        for (int v = u + 1; v < d.V; ++v)
            for (int t = 0; t < d.mult[static_cast<size_t>(u)][static_cast<size_t>(v)]; ++t) {
                int hu = cursor[static_cast<size_t>(u)]++;
                int hv = cursor[static_cast<size_t>(v)]++;
                g.vertex_of[static_cast<size_t>(hu)] = u;
                g.vertex_of[static_cast<size_t>(hv)] = v;
                g.inv[static_cast<size_t>(hu)] = hv;
                g.inv[static_cast<size_t>(hv)] = hu;
            }
    return g;
}

// Calls fn for every vertex ordering that keeps each key block contiguous.
template <class F>
void for_each_block_ordering(const std::vector<std::vector<int>>& blocks, F&& fn) {
    std::vector<std::vector<int>> state = blocks;
    std::vector<int> order;
    auto emit = [&]() {
        order.clear();
        for (const auto& b : state)
            for (int v : b) order.push_back(v);
        fn(order);
    };
    size_t nb = blocks.size();
    std::function<void(size_t)> rec = [&](size_t bi) {
        if (bi == nb) { emit(); return; }
        std::vector<int>& b = state[bi];
        std::sort(b.begin(), b.end());
        do {
            rec(bi + 1);
        } while (std::next_permutation(b.begin(), b.end()));
    };
    rec(0);
}

inline std::vector<int> plain_serialization(const PlainVertexData& d, const std::vector<int>& order) {
    std::vector<int> s;
    s.push_back(d.V);
    for (int i = 0; i < d.V; ++i) {
        int v = order[static_cast<size_t>(i)];
        s.push_back(d.loops[static_cast<size_t>(v)]);
        s.push_back(static_cast<int>(d.legs[static_cast<size_t>(v)].size()));
        for (int lab : d.legs[static_cast<size_t>(v)]) s.push_back(lab);
        for (int j = 0; j < d.V; ++j)
            s.push_back(d.mult[static_cast<size_t>(v)][static_cast<size_t>(order[static_cast<size_t>(j)])]);
    }
    return s;
}

inline std::vector<int> plain_vertex_key(const PlainVertexData& d, int v) {
    std::vector<int> key;
    key.push_back(d.loops[static_cast<size_t>(v)]);
    key.push_back(static_cast<int>(d.legs[static_cast<size_t>(v)].size()));
    for (int lab : d.legs[static_cast<size_t>(v)]) key.push_back(lab);
    std::vector<int> row = d.mult[static_cast<size_t>(v)];
    std::sort(row.begin(), row.end());
    for (int m : row) key.push_back(m);
    return key;
}

// Half-edge positions of the canonical plain layout, bundled for lifting
// vertex maps to half-edge maps.
struct PlainLayout {
    std::vector<std::vector<int>> leg_slot;                 // vertex -> leg slots (label order)
    std::vector<std::vector<std::pair<int, int>>> loop_slot; // vertex -> loop half pairs
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> bundle_slot;
    // (u,v) u<v -> per copy (half at u, half at v)
};

inline PlainLayout plain_layout(const PlainVertexData& d) {
    HalfEdgeGraph g = build_plain_graph(d);
    PlainLayout L;
    L.leg_slot.assign(static_cast<size_t>(d.V), {});
    L.loop_slot.assign(static_cast<size_t>(d.V), {});
    int h = 0;
    for (int v = 0; v < d.V; ++v) {
        for (size_t i = 0; i < d.legs[static_cast<size_t>(v)].size(); ++i)
            L.leg_slot[static_cast<size_t>(v)].push_back(h++);
        for (int t = 0; t < d.loops[static_cast<size_t>(v)]; ++t) {
            L.loop_slot[static_cast<size_t>(v)].emplace_back(h, h + 1);
            h += 2;
        }
        for (int w = 0; w < d.V; ++w) h += d.mult[static_cast<size_t>(v)][static_cast<size_t>(w)];
    }
    for (int u = 0; u < d.V; ++u)
        for (int v = u + 1; v < d.V; ++v)
            for (int t = 0; t < d.mult[static_cast<size_t>(u)][static_cast<size_t>(v)]; ++t)
                L.bundle_slot[{u, v}].emplace_back(-1, -1);
    // recover bundle slots from the built graph: copies appear in layout order
    std::map<std::pair<int, int>, int> seen;
    for (int x = 0; x < g.half_edges(); ++x) {
        int ix = g.inv[static_cast<size_t>(x)];
        if (ix <= x) continue;
        int a = g.vertex_of[static_cast<size_t>(x)], b = g.vertex_of[static_cast<size_t>(ix)];
        if (a == b) continue;
        int u = std::min(a, b), v = std::max(a, b);
        int t = seen[{u, v}]++;
        auto& slot = L.bundle_slot[{u, v}][static_cast<size_t>(t)];
        slot = (a == u) ? std::make_pair(x, ix) : std::make_pair(ix, x);
    }
    return L;
}

inline GraphIsoClass plain_canonical(const HalfEdgeGraph& g) {
    if (!is_connected(g)) throw std::invalid_argument("canonical form requires a connected graph");
    PlainVertexData d = plain_vertex_data(g);

    // Group vertices by intrinsic key; canonical ordering is the lexmin
    // serialization over orderings that keep key blocks contiguous.
    std::map<std::vector<int>, std::vector<int>> by_key;
    for (int v = 0; v < d.V; ++v) by_key[plain_vertex_key(d, v)].push_back(v);
    std::vector<std::vector<int>> blocks;
    for (auto& [k, vs] : by_key) blocks.push_back(vs);

    std::vector<int> best;
    std::vector<std::vector<int>> achievers;
    for_each_block_ordering(blocks, [&](const std::vector<int>& order) {
        std::vector<int> s = plain_serialization(d, order);
        if (best.empty() || s < best) {
            best = s;
            achievers.clear();
            achievers.push_back(order);
        } else if (s == best) {
            achievers.push_back(order);
        }
    });
    const std::vector<int>& pi0 = achievers.front();

    PlainVertexData cd;
    cd.V = d.V;
    cd.loops.resize(static_cast<size_t>(d.V));
    cd.legs.resize(static_cast<size_t>(d.V));
    cd.mult.assign(static_cast<size_t>(d.V), std::vector<int>(static_cast<size_t>(d.V), 0));
    for (int i = 0; i < d.V; ++i) {
        int v = pi0[static_cast<size_t>(i)];
        cd.loops[static_cast<size_t>(i)] = d.loops[static_cast<size_t>(v)];
        cd.legs[static_cast<size_t>(i)] = d.legs[static_cast<size_t>(v)];
        for (int j = 0; j < d.V; ++j)
            cd.mult[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                d.mult[static_cast<size_t>(v)][static_cast<size_t>(pi0[static_cast<size_t>(j)])];
    }

    GraphIsoClass cls;
    cls.rep = build_plain_graph(cd);
    cls.encoding = int_encoding_string("plain|", best);
    PlainLayout layout = plain_layout(cd);

    // relabel: original half-edges onto the canonical layout.
    std::vector<int> vnew(static_cast<size_t>(d.V));
    for (int i = 0; i < d.V; ++i) vnew[static_cast<size_t>(pi0[static_cast<size_t>(i)])] = i;
    cls.relabel.assign(static_cast<size_t>(g.half_edges()), -1);
    {
        // legs by label
        std::map<int, int> rep_leg_by_label;
        for (int i = 0; i < cd.V; ++i)
            for (size_t t = 0; t < cd.legs[static_cast<size_t>(i)].size(); ++t)
                rep_leg_by_label[cd.legs[static_cast<size_t>(i)][t]] =
                    layout.leg_slot[static_cast<size_t>(i)][t];
        std::vector<int> loop_cursor(static_cast<size_t>(d.V), 0);
        std::map<std::pair<int, int>, int> bundle_cursor;
        for (int h = 0; h < g.half_edges(); ++h) {
            int ih = g.inv[static_cast<size_t>(h)];
            if (ih == h) {
                cls.relabel[static_cast<size_t>(h)] =
                    rep_leg_by_label[g.leg_label[static_cast<size_t>(h)]];
            } else if (ih > h) {
                int a = g.vertex_of[static_cast<size_t>(h)], b = g.vertex_of[static_cast<size_t>(ih)];
                if (a == b) {
                    int i = vnew[static_cast<size_t>(a)];
                    auto slot = layout.loop_slot[static_cast<size_t>(i)]
                        [static_cast<size_t>(loop_cursor[static_cast<size_t>(a)]++)];
                    cls.relabel[static_cast<size_t>(h)] = slot.first;
                    cls.relabel[static_cast<size_t>(ih)] = slot.second;
                } else {
                    int ia = vnew[static_cast<size_t>(a)], ib = vnew[static_cast<size_t>(b)];
                    int u = std::min(ia, ib), v = std::max(ia, ib);
                    int t = bundle_cursor[{u, v}]++;
                    auto slot = layout.bundle_slot[{u, v}][static_cast<size_t>(t)];
                    if (ia == u) {
                        cls.relabel[static_cast<size_t>(h)] = slot.first;
                        cls.relabel[static_cast<size_t>(ih)] = slot.second;
                    } else {
                        cls.relabel[static_cast<size_t>(h)] = slot.second;
                        cls.relabel[static_cast<size_t>(ih)] = slot.first;
                    }
                }
            }
        }
        if (!is_isomorphism(g, cls.rep, cls.relabel))
            throw std::logic_error("canonical relabeling is not an isomorphism");
    }

    // Automorphism generators: lifts of vertex automorphisms plus the
    // kernel acting trivially on vertices (loop flips and swaps, parallel
    // copy swaps).
    auto lift_vertex_map = [&](const std::vector<int>& sigma) {
        std::vector<int> phi(static_cast<size_t>(cls.rep.half_edges()), -1);
        for (int i = 0; i < cd.V; ++i) {
            int si = sigma[static_cast<size_t>(i)];
            for (size_t t = 0; t < layout.leg_slot[static_cast<size_t>(i)].size(); ++t)
                phi[static_cast<size_t>(layout.leg_slot[static_cast<size_t>(i)][t])] =
                    layout.leg_slot[static_cast<size_t>(si)][t];
            for (size_t t = 0; t < layout.loop_slot[static_cast<size_t>(i)].size(); ++t) {
                phi[static_cast<size_t>(layout.loop_slot[static_cast<size_t>(i)][t].first)] =
                    layout.loop_slot[static_cast<size_t>(si)][t].first;
                phi[static_cast<size_t>(layout.loop_slot[static_cast<size_t>(i)][t].second)] =
                    layout.loop_slot[static_cast<size_t>(si)][t].second;
            }
        }
        for (const auto& [uv, slots] : layout.bundle_slot) {
            auto [u, v] = uv;
            int su = sigma[static_cast<size_t>(u)], sv = sigma[static_cast<size_t>(v)];
            int tu = std::min(su, sv), tv = std::max(su, sv);
            const auto& target = layout.bundle_slot.at({tu, tv});
            for (size_t t = 0; t < slots.size(); ++t) {
                if (su == tu) {
                    phi[static_cast<size_t>(slots[t].first)] = target[t].first;
                    phi[static_cast<size_t>(slots[t].second)] = target[t].second;
                } else {
                    phi[static_cast<size_t>(slots[t].first)] = target[t].second;
                    phi[static_cast<size_t>(slots[t].second)] = target[t].first;
                }
            }
        }
        return phi;
    };

    std::vector<int> id_map(static_cast<size_t>(cls.rep.half_edges()));
    std::iota(id_map.begin(), id_map.end(), 0);
    std::set<std::vector<int>> gens;
    for (const auto& pi : achievers) {
        std::vector<int> sigma(static_cast<size_t>(d.V));
        for (int i = 0; i < d.V; ++i) {
            // pi0(sigma(i)) = pi(i)
            int target = pi[static_cast<size_t>(i)];
            sigma[static_cast<size_t>(i)] = vnew[static_cast<size_t>(target)];
        }
        std::vector<int> phi = lift_vertex_map(sigma);
        if (phi != id_map) gens.insert(phi);
    }
    long long kernel_order = 1;
    for (int i = 0; i < cd.V; ++i) {
        const auto& loops = layout.loop_slot[static_cast<size_t>(i)];
        for (const auto& [h1, h2] : loops) {
            std::vector<int> phi = id_map;
            std::swap(phi[static_cast<size_t>(h1)], phi[static_cast<size_t>(h2)]);
            gens.insert(phi);
            kernel_order *= 2;
        }
        for (size_t t = 0; t + 1 < loops.size(); ++t) {
            std::vector<int> phi = id_map;
            phi[static_cast<size_t>(loops[t].first)] = loops[t + 1].first;
            phi[static_cast<size_t>(loops[t].second)] = loops[t + 1].second;
            phi[static_cast<size_t>(loops[t + 1].first)] = loops[t].first;
            phi[static_cast<size_t>(loops[t + 1].second)] = loops[t].second;
            gens.insert(phi);
        }
        kernel_order *= fac_ll(static_cast<int>(loops.size()));
    }
    for (const auto& [uv, slots] : layout.bundle_slot) {
        for (size_t t = 0; t + 1 < slots.size(); ++t) {
            std::vector<int> phi = id_map;
            phi[static_cast<size_t>(slots[t].first)] = slots[t + 1].first;
            phi[static_cast<size_t>(slots[t].second)] = slots[t + 1].second;
            phi[static_cast<size_t>(slots[t + 1].first)] = slots[t].first;
            phi[static_cast<size_t>(slots[t + 1].second)] = slots[t].second;
            gens.insert(phi);
        }
        kernel_order *= fac_ll(static_cast<int>(slots.size()));
    }
    for (const auto& phi : gens) {
        if (!is_isomorphism(cls.rep, cls.rep, phi))
            throw std::logic_error("constructed generator is not an automorphism");
        cls.automorphisms.push_back(phi);
    }
    cls.aut_order = static_cast<long long>(achievers.size()) * kernel_order;
    for (const auto& phi : cls.automorphisms)
        if (permutation_sign(induced_edge_permutation(cls.rep, phi)) < 0)
            cls.odd_edge_automorphism = true;
    return cls;
}

} // namespace detail

// Canonical form of a connected graph.  Ribbon graphs use traversal
// rigidity (connectedness makes the labeling from any start half-edge
// deterministic); plain graphs take the lexmin vertex-data serialization.
// Throws on disconnected input.
inline GraphIsoClass canonical_form(const HalfEdgeGraph& g) {
    if (g.ribbon) {
        if (g.half_edges() == 0) throw std::invalid_argument("canonical form of an empty graph");
        return detail::ribbon_canonical(g);
    }
    return detail::plain_canonical(g);
}

// ======================== colored graphs ========================

// A graph whose vertex v carries an element of P(k), k+1 = valence(v),
// anchored by a listing anchor[v] of the half-edges at v: slot 0 of the
// element sits on anchor[v][0], input slot i on anchor[v][i].  In the
// ribbon case the anchor must read the vertex's cyclic order.  Two
// anchorings of the same class are identified by the slot group action
// (rotations only for ribbon graphs).
template <class K>
struct ColoredGraph {
    HalfEdgeGraph g;
    std::vector<std::vector<int>> anchor;
    std::vector<std::vector<K>> color;
};

namespace detail {

template <class K>
void colored_check(const Operad<K>& P, const ColoredGraph<K>& cg) {
    if (!P.cyclic) throw std::logic_error("coloring requires a cyclic operad");
    if (!cg.g.ribbon && !P.symmetric)
        throw std::logic_error("plain graphs require a symmetric operad");
    int V = cg.g.vertex_count();
    if (static_cast<int>(cg.anchor.size()) != V || static_cast<int>(cg.color.size()) != V)
        throw std::invalid_argument("coloring does not cover every vertex");
    auto per_vertex = cg.g.vertex_half_edges();
    for (int v = 0; v < V; ++v) {
        const auto& a = cg.anchor[static_cast<size_t>(v)];
        std::vector<int> sa = a, sv = per_vertex[static_cast<size_t>(v)];
        std::sort(sa.begin(), sa.end());
        std::sort(sv.begin(), sv.end());
        if (sa != sv) throw std::invalid_argument("anchor is not a listing of the vertex half-edges");
        if (cg.g.ribbon)
            for (size_t i = 0; i < a.size(); ++i)
                if (cg.g.next[static_cast<size_t>(a[i])] != a[(i + 1) % a.size()])
                    throw std::invalid_argument("anchor incompatible with the cyclic order");
        int k = static_cast<int>(a.size()) - 1;
        if (P.dim(k) != static_cast<int>(cg.color[static_cast<size_t>(v)].size()))
            throw std::invalid_argument("color dimension does not match vertex arity");
    }
}

} // namespace detail

// Moves the anchor of vertex v one step: (h_0..h_k) becomes (h_1..h_k,h_0)
// and the color absorbs one cyclic rotation.  The result represents the
// same coinvariant coloring.
template <class K>
void anchor_rotate_left(const Operad<K>& P, ColoredGraph<K>& cg, int v) {
    auto& a = cg.anchor[static_cast<size_t>(v)];
    int k = static_cast<int>(a.size()) - 1;
    std::rotate(a.begin(), a.begin() + 1, a.end());
    cg.color[static_cast<size_t>(v)] = P.cyclic_rotate(k, cg.color[static_cast<size_t>(v)]);
}

// Re-expresses (cur, color) in the anchor target, which must list the
// same half-edges (and the same cyclic order for ribbon graphs).
template <class K>
std::vector<K> reanchored_color(const Operad<K>& P, bool ribbon, const std::vector<int>& cur,
                                const std::vector<K>& color, const std::vector<int>& target) {
    int k = static_cast<int>(cur.size()) - 1;
    if (target == cur) return color;
    if (ribbon) {
        auto it = std::find(cur.begin(), cur.end(), target[0]);
        if (it == cur.end()) throw std::invalid_argument("anchors list different half-edges");
        int shift = static_cast<int>(it - cur.begin());
        std::vector<int> rotated = cur;
        std::rotate(rotated.begin(), rotated.begin() + shift, rotated.end());
        if (rotated != target) throw std::invalid_argument("anchors differ by more than a rotation");
        std::vector<K> out = color;
        for (int s = 0; s < shift; ++s) out = P.cyclic_rotate(k, out);
        return out;
    }
    Perm sigma_inv(static_cast<size_t>(k + 1));
    for (int i = 0; i <= k; ++i) {
        auto it = std::find(cur.begin(), cur.end(), target[static_cast<size_t>(i)]);
        if (it == cur.end()) throw std::invalid_argument("anchors list different half-edges");
        sigma_inv[static_cast<size_t>(i)] = static_cast<int>(it - cur.begin());
    }
    Perm sigma(static_cast<size_t>(k + 1));
    for (int i = 0; i <= k; ++i) sigma[static_cast<size_t>(sigma_inv[static_cast<size_t>(i)])] = i;
    return P.slot_matrix(k, sigma).apply(color);
}

// Rewrites every anchor in its normal form: the vertex_half_edges listing
// (cyclic order from the smallest half-edge for ribbon, ascending for
// plain), adjusting colors along the way.
template <class K>
void normalize_anchors(const Operad<K>& P, ColoredGraph<K>& cg) {
    auto per_vertex = cg.g.vertex_half_edges();
    for (int v = 0; v < cg.g.vertex_count(); ++v) {
        cg.color[static_cast<size_t>(v)] =
            reanchored_color(P, cg.g.ribbon, cg.anchor[static_cast<size_t>(v)],
                             cg.color[static_cast<size_t>(v)], per_vertex[static_cast<size_t>(v)]);
        cg.anchor[static_cast<size_t>(v)] = per_vertex[static_cast<size_t>(v)];
    }
}

// Pushes a coloring through a half-edge isomorphism hmap: src -> dst.
template <class K>
ColoredGraph<K> transport_colors(const Operad<K>& P, const ColoredGraph<K>& src,
                                 const std::vector<int>& hmap, const HalfEdgeGraph& dst) {
    (void)P;
    ColoredGraph<K> out;
    out.g = dst;
    out.anchor.resize(static_cast<size_t>(dst.vertex_count()));
    out.color.resize(static_cast<size_t>(dst.vertex_count()));
    for (int v = 0; v < src.g.vertex_count(); ++v) {
        std::vector<int> a;
        for (int h : src.anchor[static_cast<size_t>(v)])
            a.push_back(hmap[static_cast<size_t>(h)]);
        int w = dst.vertex_of[static_cast<size_t>(a[0])];
        out.anchor[static_cast<size_t>(w)] = std::move(a);
        out.color[static_cast<size_t>(w)] = src.color[static_cast<size_t>(v)];
    }
    return out;
}

// Canonical form of a colored graph: the shape's canonical form plus the
// lexmin transported coloring over the automorphism group, anchors
// normalized, colors serialized coefficient by coefficient.
template <class K>
struct ColoredIsoClass {
    GraphIsoClass shape;
    std::vector<std::vector<int>> anchor;
    std::vector<std::vector<K>> color;
    std::string encoding;
};

namespace detail {

template <class K>
std::string color_serialization(const std::vector<std::vector<K>>& color) {
    std::ostringstream os;
    for (size_t v = 0; v < color.size(); ++v) {
        os << "v" << v << ":";
        for (const auto& x : color[v]) os << to_string(x) << ",";
        os << ";";
    }
    return os.str();
}

inline std::vector<std::vector<int>> close_automorphisms(
    const std::vector<std::vector<int>>& gens, int n_half_edges, size_t cap = 20000) {
    std::vector<int> id(static_cast<size_t>(n_half_edges));
    std::iota(id.begin(), id.end(), 0);
    std::set<std::vector<int>> seen{id};
    std::vector<std::vector<int>> queue{id};
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        for (const auto& g : gens) {
            std::vector<int> comp(id.size());
            for (size_t i = 0; i < id.size(); ++i)
                comp[i] = g[static_cast<size_t>(queue[qi][i])];
            if (seen.insert(comp).second) {
                queue.push_back(std::move(comp));
                if (queue.size() > cap)
                    throw std::domain_error("automorphism group too large to close");
            }
        }
    }
    return queue;
}

} // namespace detail

template <class K>
ColoredIsoClass<K> canonical_form(const Operad<K>& P, const ColoredGraph<K>& cg) {
    detail::colored_check(P, cg);
    ColoredIsoClass<K> out;
    out.shape = canonical_form(cg.g);
    ColoredGraph<K> base = transport_colors(P, cg, out.shape.relabel, out.shape.rep);
    normalize_anchors(P, base);

    auto candidate = [&](const std::vector<int>& phi) {
        ColoredGraph<K> t = transport_colors(P, base, phi, out.shape.rep);
        normalize_anchors(P, t);
        return t;
    };
    ColoredGraph<K> best = base;
    std::string best_ser = detail::color_serialization(best.color);
    bool invariant = true;
    for (const auto& phi : out.shape.automorphisms) {
        ColoredGraph<K> t = candidate(phi);
        std::string ser = detail::color_serialization(t.color);
        if (ser != best_ser) invariant = false;
        if (ser < best_ser) { best = std::move(t); best_ser = std::move(ser); }
    }
    if (!invariant) {
        auto group = detail::close_automorphisms(out.shape.automorphisms,
                                                 out.shape.rep.half_edges());
        for (const auto& phi : group) {
            ColoredGraph<K> t = candidate(phi);
            std::string ser = detail::color_serialization(t.color);
            if (ser < best_ser) { best = std::move(t); best_ser = std::move(ser); }
        }
    }
    out.anchor = best.anchor;
    out.color = best.color;
    out.encoding = out.shape.encoding + "#" + best_ser;
    return out;
}

// Contracts the internal non-loop edge containing half-edge h and
// composes the endpoint colors.  h names the inner endpoint: its color
// r' is anchored with the contracted edge as slot 0, the outer color r''
// with the contracted edge as input slot 1, and the merged vertex wears
// the composite r'' o_1 r' with anchor (b_l, a_1..a_k, b_1..b_{l-1}).
template <class K>
ColoredGraph<K> contract_edge(const Operad<K>& P, const ColoredGraph<K>& cg, int h) {
    detail::colored_check(P, cg);
    const HalfEdgeGraph& g = cg.g;
    int hh = g.inv[static_cast<size_t>(h)];
    if (hh == h) throw std::invalid_argument("contract_edge: cannot contract a leg");
    int v1 = g.vertex_of[static_cast<size_t>(h)];
    int v2 = g.vertex_of[static_cast<size_t>(hh)];
    if (v1 == v2) throw std::invalid_argument("contract_edge: cannot contract a loop");
    int k = static_cast<int>(cg.anchor[static_cast<size_t>(v1)].size()) - 1;
    int l = static_cast<int>(cg.anchor[static_cast<size_t>(v2)].size()) - 1;

    // Inner anchor (h, a_1..a_k); outer anchor (b_l, hh, b_1..b_{l-1}).
    std::vector<int> inner_target, outer_target;
    if (g.ribbon) {
        inner_target = detail::cycle_from(g, h);
        auto b = detail::cycle_from(g, hh);          // (hh, b_1..b_l)
        outer_target.push_back(b.back());
        outer_target.push_back(hh);
        for (size_t i = 1; i + 1 < b.size(); ++i) outer_target.push_back(b[i]);
    } else {
        inner_target.push_back(h);
        for (int x : cg.anchor[static_cast<size_t>(v1)])
            if (x != h) inner_target.push_back(x);
        std::sort(inner_target.begin() + 1, inner_target.end());
        std::vector<int> others;
        for (int x : cg.anchor[static_cast<size_t>(v2)])
            if (x != hh) others.push_back(x);
        std::sort(others.begin(), others.end());
        outer_target.push_back(others.front());
        outer_target.push_back(hh);
        for (size_t i = 1; i < others.size(); ++i) outer_target.push_back(others[i]);
    }
    std::vector<K> r1 = reanchored_color(P, g.ribbon, cg.anchor[static_cast<size_t>(v1)],
                                         cg.color[static_cast<size_t>(v1)], inner_target);
    std::vector<K> r2 = reanchored_color(P, g.ribbon, cg.anchor[static_cast<size_t>(v2)],
                                         cg.color[static_cast<size_t>(v2)], outer_target);
    std::vector<K> composite = P.compose(l, k, 1, r2, r1);

    std::vector<int> merged_anchor;
    merged_anchor.push_back(outer_target[0]);
    for (int i = 1; i <= k; ++i) merged_anchor.push_back(inner_target[static_cast<size_t>(i)]);
    for (int i = 2; i <= l; ++i) merged_anchor.push_back(outer_target[static_cast<size_t>(i)]);

    std::vector<int> hmap, vmap;
    ColoredGraph<K> out;
    out.g = contract_edge(g, h, &hmap, &vmap);
    out.anchor.resize(static_cast<size_t>(out.g.vertex_count()));
    out.color.resize(static_cast<size_t>(out.g.vertex_count()));
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (v == v1 || v == v2) continue;
        std::vector<int> a;
        for (int x : cg.anchor[static_cast<size_t>(v)]) a.push_back(hmap[static_cast<size_t>(x)]);
        out.anchor[static_cast<size_t>(vmap[static_cast<size_t>(v)])] = std::move(a);
        out.color[static_cast<size_t>(vmap[static_cast<size_t>(v)])] =
            cg.color[static_cast<size_t>(v)];
    }
    std::vector<int> a;
    for (int x : merged_anchor) a.push_back(hmap[static_cast<size_t>(x)]);
    int vm = vmap[static_cast<size_t>(v1)];
    out.anchor[static_cast<size_t>(vm)] = std::move(a);
    out.color[static_cast<size_t>(vm)] = std::move(composite);
    normalize_anchors(P, out);
    return out;
}

// ======================== coloring bases ========================

inline std::uint64_t scalar_characteristic(const Rational&) { return 0; }
inline std::uint64_t scalar_characteristic(const PrimeField& x) { return x.p; }

template <class K>
std::uint64_t operad_characteristic(const Operad<K>& P) {
    for (const auto& [key, m] : P.comp)
        for (const auto& x : m.a) {
            std::uint64_t c = scalar_characteristic(x);
            if (c) return c;
        }
    for (const auto& [n, gens] : P.gen_action)
        for (const auto& [name, m] : gens)
            for (const auto& x : m.a) {
                std::uint64_t c = scalar_characteristic(x);
                if (c) return c;
            }
    return 0;
}

namespace detail {

// Greedy echelon filter: keeps the vectors that grow the span.
template <class K>
std::vector<std::vector<K>> independent_subset(const std::vector<std::vector<K>>& vecs, int dim) {
    std::vector<std::vector<K>> kept;
    for (const auto& v : vecs) {
        if (vec_is_zero(v)) continue;
        SparseMatrix<K> m(static_cast<int>(kept.size()) + 1, dim);
        for (size_t r = 0; r < kept.size(); ++r)
            for (int c = 0; c < dim; ++c) m.add(static_cast<int>(r), c, kept[r][static_cast<size_t>(c)]);
        for (int c = 0; c < dim; ++c) m.add(static_cast<int>(kept.size()), c, v[static_cast<size_t>(c)]);
        m.finalize();
        if (m.rank() == static_cast<int>(kept.size()) + 1) kept.push_back(v);
    }
    return kept;
}

} // namespace detail

// Basis of the coinvariant space attached to one vertex of the given
// valence, realized as invariants via group averaging: the cyclic slot
// group for ribbon graphs, the full slot symmetric group for plain ones.
// Refuses positive characteristic at or below the group order.
template <class K>
std::vector<std::vector<K>> vertex_coloring_basis(const Operad<K>& P, int valence, bool ribbon) {
    int k = valence - 1;
    if (k < 2 || k > P.max_arity)
        throw std::out_of_range("vertex valence outside the operad truncation");
    if (!P.cyclic) throw std::logic_error("coloring requires a cyclic operad");
    if (!ribbon && !P.symmetric) throw std::logic_error("plain graphs require a symmetric operad");
    long long order = ribbon ? (k + 1) : detail::fac_ll(k + 1);
    std::uint64_t c = operad_characteristic(P);
    if (c != 0 && static_cast<long long>(c) <= order)
        throw std::domain_error("field characteristic too small to average over the slot group");
    int d = P.dim(k);

    std::vector<std::vector<K>> averaged;
    if (ribbon) {
        DenseMat<K> rot = P.slot_matrix(k, P.rotation_perm(k));
        DenseMat<K> avg(d, d), pw = DenseMat<K>::identity(d);
        for (int j = 0; j <= k; ++j) {
            for (int r = 0; r < d; ++r)
                for (int s = 0; s < d; ++s) avg.at(r, s) += pw.at(r, s);
            pw = pw.mul(rot);
        }
        K inv_order = scalar_from_rational<K>(Rational(1, k + 1), c);
        for (int i = 0; i < d; ++i) {
            std::vector<K> col(static_cast<size_t>(d));
            for (int r = 0; r < d; ++r) col[static_cast<size_t>(r)] = avg.at(r, i) * inv_order;
            averaged.push_back(std::move(col));
        }
    } else {
        std::vector<Perm> gens = {
            detail::embed_fixing_zero(detail::sym_gen_transposition(k)),
            detail::embed_fixing_zero(detail::sym_gen_cycle(k)),
            P.rotation_perm(k)};
        std::vector<DenseMat<K>> mats;
        for (const auto& s : gens) mats.push_back(P.slot_matrix(k, s));
        // V = W + V^G with W spanned by (M_g - 1)e_i over the generators;
        // the invariant component of e_i is its averaging image.
        std::vector<std::vector<K>> w_candidates;
        for (const auto& m : mats)
            for (int i = 0; i < d; ++i) {
                std::vector<K> v(static_cast<size_t>(d));
                for (int r = 0; r < d; ++r)
                    v[static_cast<size_t>(r)] = m.at(r, i) - (r == i ? K(1) : K(0));
                w_candidates.push_back(std::move(v));
            }
        auto w_basis = detail::independent_subset(w_candidates, d);
        SparseMatrix<K> stacked(static_cast<int>(mats.size()) * d, d);
        for (size_t gi = 0; gi < mats.size(); ++gi)
            for (int r = 0; r < d; ++r)
                for (int cidx = 0; cidx < d; ++cidx)
                    stacked.add(static_cast<int>(gi) * d + r, cidx,
                                mats[gi].at(r, cidx) - (r == cidx ? K(1) : K(0)));
        stacked.finalize();
        auto vg_sparse = stacked.kernel_basis();
        std::vector<std::vector<K>> vg_basis;
        for (const auto& sv : vg_sparse) vg_basis.push_back(densify(sv, d));
        int w = static_cast<int>(w_basis.size()), vg = static_cast<int>(vg_basis.size());
        if (w + vg != d) throw std::logic_error("averaging decomposition failed");
        SparseMatrix<K> a(d, w + vg);
        for (int r = 0; r < d; ++r) {
            for (int j = 0; j < w; ++j) a.add(r, j, w_basis[static_cast<size_t>(j)][static_cast<size_t>(r)]);
            for (int j = 0; j < vg; ++j)
                a.add(r, w + j, vg_basis[static_cast<size_t>(j)][static_cast<size_t>(r)]);
        }
        a.finalize();
        for (int i = 0; i < d; ++i) {
            std::vector<K> e(static_cast<size_t>(d), K(0));
            e[static_cast<size_t>(i)] = K(1);
            auto x = a.solve(e);
            if (!x) throw std::logic_error("averaging decomposition failed");
            std::vector<K> proj(static_cast<size_t>(d), K(0));
            for (int j = 0; j < vg; ++j)
                for (int r = 0; r < d; ++r)
                    proj[static_cast<size_t>(r)] +=
                        (*x)[static_cast<size_t>(w + j)] * vg_basis[static_cast<size_t>(j)][static_cast<size_t>(r)];
            averaged.push_back(std::move(proj));
        }
    }
    return detail::independent_subset(averaged, d);
}

// Basis of the full coloring space of g: one ColoredGraph per element of
// the product of the per-vertex invariant bases, anchors in normal form.
template <class K>
std::vector<ColoredGraph<K>> coloring_basis(const Operad<K>& P, const HalfEdgeGraph& g) {
    int V = g.vertex_count();
    auto per_vertex = g.vertex_half_edges();
    std::vector<std::vector<std::vector<K>>> bases;
    for (int v = 0; v < V; ++v)
        bases.push_back(vertex_coloring_basis(P, static_cast<int>(per_vertex[static_cast<size_t>(v)].size()),
                                              g.ribbon));
    std::vector<ColoredGraph<K>> out;
    std::vector<size_t> idx(static_cast<size_t>(V), 0);
    for (const auto& b : bases)
        if (b.empty()) return out;
    while (true) {
        ColoredGraph<K> cg;
        cg.g = g;
        cg.anchor = per_vertex;
        for (int v = 0; v < V; ++v)
            cg.color.push_back(bases[static_cast<size_t>(v)][idx[static_cast<size_t>(v)]]);
        out.push_back(std::move(cg));
        int v = V - 1;
        while (v >= 0) {
            if (++idx[static_cast<size_t>(v)] < bases[static_cast<size_t>(v)].size()) break;
            idx[static_cast<size_t>(v)] = 0;
            --v;
        }
        if (v < 0) break;
    }
    return out;
}

// ======================== enumeration ========================

struct GraphBounds {
    int max_internal_edges = 0;   // loops included
    int max_vertices = 8;
};

namespace detail {

inline void enumerate_plain_graphs(int n_legs, const GraphBounds& b,
                                   std::map<std::string, GraphIsoClass>& found) {
    int E = b.max_internal_edges;
    for (int V = 1; V <= b.max_vertices; ++V) {
        std::vector<std::pair<int, int>> pairs;
        for (int u = 0; u < V; ++u)
            for (int v = u + 1; v < V; ++v) pairs.emplace_back(u, v);
        PlainVertexData d;
        d.V = V;
        d.loops.assign(static_cast<size_t>(V), 0);
        d.legs.assign(static_cast<size_t>(V), {});
        d.mult.assign(static_cast<size_t>(V), std::vector<int>(static_cast<size_t>(V), 0));
        std::vector<int> leg_at(static_cast<size_t>(n_legs), 0);

        std::function<void()> finish = [&]() {
            for (int v = 0; v < V; ++v) {
                int val = 2 * d.loops[static_cast<size_t>(v)] +
                          static_cast<int>(d.legs[static_cast<size_t>(v)].size());
                for (int w = 0; w < V; ++w) val += d.mult[static_cast<size_t>(v)][static_cast<size_t>(w)];
                if (val < 3) return;
            }
            HalfEdgeGraph g = build_plain_graph(d);
            if (!is_connected(g)) return;
            GraphIsoClass cls = canonical_form(g);
            found.emplace(cls.encoding, std::move(cls));
        };
        std::function<void(int)> legs_rec = [&](int li) {
            if (li == n_legs) { finish(); return; }
            for (int v = 0; v < V; ++v) {
                d.legs[static_cast<size_t>(v)].push_back(li + 1);
                legs_rec(li + 1);
                d.legs[static_cast<size_t>(v)].pop_back();
            }
        };
        std::function<void(int, int)> loops_rec = [&](int v, int used) {
            if (v == V) { legs_rec(0); return; }
            for (int l = 0; used + l <= E; ++l) {
                d.loops[static_cast<size_t>(v)] = l;
                loops_rec(v + 1, used + l);
            }
            d.loops[static_cast<size_t>(v)] = 0;
        };
        std::function<void(size_t, int)> mult_rec = [&](size_t pi, int used) {
            if (pi == pairs.size()) { loops_rec(0, used); return; }
            auto [u, v] = pairs[pi];
            for (int m = 0; used + m <= E; ++m) {
                d.mult[static_cast<size_t>(u)][static_cast<size_t>(v)] = m;
                d.mult[static_cast<size_t>(v)][static_cast<size_t>(u)] = m;
                mult_rec(pi + 1, used + m);
            }
            d.mult[static_cast<size_t>(u)][static_cast<size_t>(v)] = 0;
            d.mult[static_cast<size_t>(v)][static_cast<size_t>(u)] = 0;
        };
        mult_rec(0, 0);
    }
}

inline void enumerate_ribbon_graphs(int n_legs, const GraphBounds& b,
                                    std::map<std::string, GraphIsoClass>& found) {
    int E_max = b.max_internal_edges;
    for (int V = 1; V <= b.max_vertices; ++V) {
        for (int E = 0; E <= E_max; ++E) {
            int H = 2 * E + n_legs;
            if (H < 3 * V) continue;
            // non-increasing degree sequences, each >= 3
            std::vector<int> deg(static_cast<size_t>(V), 0);
            std::function<void(int, int, int)> deg_rec = [&](int v, int left, int cap) {
                if (v == V) {
                    if (left != 0) return;
                    // positions laid out per vertex with round-robin order
                    std::vector<int> offset(static_cast<size_t>(V + 1), 0);
                    for (int i = 0; i < V; ++i)
                        offset[static_cast<size_t>(i + 1)] =
                            offset[static_cast<size_t>(i)] + deg[static_cast<size_t>(i)];
                    std::vector<int> vert(static_cast<size_t>(H));
                    for (int i = 0; i < V; ++i)
                        for (int p = offset[static_cast<size_t>(i)]; p < offset[static_cast<size_t>(i + 1)]; ++p)
                            vert[static_cast<size_t>(p)] = i;

                    std::vector<int> leg_pos(static_cast<size_t>(n_legs), -1);
                    std::vector<int> match(static_cast<size_t>(H), -1);

                    auto emit = [&]() {
                        HalfEdgeGraph g;
                        g.ribbon = true;
                        g.inv.resize(static_cast<size_t>(H));
                        g.vertex_of = vert;
                        g.leg_label.assign(static_cast<size_t>(H), 0);
                        g.next.resize(static_cast<size_t>(H));
                        for (int i = 0; i < V; ++i)
                            for (int p = offset[static_cast<size_t>(i)]; p < offset[static_cast<size_t>(i + 1)]; ++p)
                                g.next[static_cast<size_t>(p)] =
                                    (p + 1 < offset[static_cast<size_t>(i + 1)]) ? p + 1
                                                                                 : offset[static_cast<size_t>(i)];
                        for (int p = 0; p < H; ++p) g.inv[static_cast<size_t>(p)] = match[static_cast<size_t>(p)];
                        for (int li = 0; li < n_legs; ++li) {
                            g.inv[static_cast<size_t>(leg_pos[static_cast<size_t>(li)])] =
                                leg_pos[static_cast<size_t>(li)];
                            g.leg_label[static_cast<size_t>(leg_pos[static_cast<size_t>(li)])] = li + 1;
                        }
                        if (!is_connected(g)) return;
                        // necklace filter: a legless vertex must read a
                        // lexmin rotation of its partner-vertex tokens
                        for (int i = 0; i < V; ++i) {
                            bool has_leg = false;
                            int o = offset[static_cast<size_t>(i)], dg = deg[static_cast<size_t>(i)];
                            std::vector<int> tok(static_cast<size_t>(dg));
                            for (int t = 0; t < dg; ++t) {
                                int p = o + t;
                                if (g.inv[static_cast<size_t>(p)] == p) { has_leg = true; break; }
                                tok[static_cast<size_t>(t)] =
                                    vert[static_cast<size_t>(g.inv[static_cast<size_t>(p)])];
                            }
                            if (has_leg) continue;
                            for (int r = 1; r < dg; ++r) {
                                bool smaller = false, larger = false;
                                for (int t = 0; t < dg && !smaller && !larger; ++t) {
                                    int a = tok[static_cast<size_t>((t + r) % dg)];
                                    int bb = tok[static_cast<size_t>(t)];
                                    if (a < bb) smaller = true;
                                    else if (a > bb) larger = true;
                                }
                                if (smaller) return;
                            }
                        }
                        GraphIsoClass cls = canonical_form(g);
                        found.emplace(cls.encoding, std::move(cls));
                    };

                    std::function<void()> match_rec = [&]() {
                        int p = 0;
                        while (p < H && match[static_cast<size_t>(p)] != -1) ++p;
                        if (p == H) { emit(); return; }
                        for (int q = p + 1; q < H; ++q) {
                            if (match[static_cast<size_t>(q)] != -1) continue;
                            match[static_cast<size_t>(p)] = q;
                            match[static_cast<size_t>(q)] = p;
                            match_rec();
                            match[static_cast<size_t>(p)] = -1;
                            match[static_cast<size_t>(q)] = -1;
                        }
                    };

                    // legs: injective label -> position, the smallest leg
                    // of each leg-carrying vertex pinned to its first slot
                    std::function<void(int)> legs_rec = [&](int li) {
                        if (li == n_legs) {
                            for (int i = 0; i < V; ++i) {
                                int smallest = 0;
                                for (int lj = 0; lj < n_legs; ++lj)
                                    if (vert[static_cast<size_t>(leg_pos[static_cast<size_t>(lj)])] == i) {
                                        smallest = lj + 1;
                                        break;
                                    }
                                if (smallest &&
                                    leg_pos[static_cast<size_t>(smallest - 1)] != offset[static_cast<size_t>(i)])
                                    return;
                            }
                            match_rec();
                            return;
                        }
                        for (int p = 0; p < H; ++p) {
                            if (match[static_cast<size_t>(p)] != -1) continue;
                            match[static_cast<size_t>(p)] = p;
                            leg_pos[static_cast<size_t>(li)] = p;
                            legs_rec(li + 1);
                            match[static_cast<size_t>(p)] = -1;
                        }
                        leg_pos[static_cast<size_t>(li)] = -1;
                    };
                    legs_rec(0);
                    return;
                }
                int remaining = V - v - 1;
                for (int dg = std::min(cap, left - 3 * remaining); dg >= 3; --dg) {
                    deg[static_cast<size_t>(v)] = dg;
                    deg_rec(v + 1, left - dg, dg);
                }
            };
            deg_rec(0, H, H);
        }
    }
}

} // namespace detail

// Complete, duplicate-free list of connected isomorphism classes with
// the given number of labeled legs, every vertex at least trivalent, and
// at most max_internal_edges internal edges (loops included).  Exhaustive
// search; soft limits keep the search desk-sized.
inline std::vector<GraphIsoClass> enumerate_graphs(int n_legs, const GraphBounds& b, bool ribbon) {
    if (n_legs < 0 || n_legs > 8 || b.max_internal_edges < 0 || b.max_internal_edges > 8 ||
        b.max_vertices < 1 || b.max_vertices > 8)
        throw std::out_of_range("enumeration bound exceeded (legs <= 8, edges <= 8, vertices <= 8)");
    std::map<std::string, GraphIsoClass> found;
    if (ribbon) detail::enumerate_ribbon_graphs(n_legs, b, found);
    else detail::enumerate_plain_graphs(n_legs, b, found);
    std::vector<GraphIsoClass> out;
    for (auto& [enc, cls] : found) out.push_back(std::move(cls));
    return out;
}

// ======================== interchange format ========================

inline Json graph_to_json(const HalfEdgeGraph& g) {
    Json j;
    j["half_edges"] = g.half_edges();
    j["involution"] = g.inv;
    j["vertices"] = g.vertex_of;
    Json legs = Json::array();
    std::map<int, int> by_label;
    for (int h = 0; h < g.half_edges(); ++h)
        if (g.inv[static_cast<size_t>(h)] == h) by_label[g.leg_label[static_cast<size_t>(h)]] = h;
    for (const auto& [lab, h] : by_label) legs.push_back(h);
    j["legs"] = legs;
    if (g.ribbon) j["rotation"] = g.next;
    return j;
}

inline HalfEdgeGraph graph_from_json(const Json& j) {
    HalfEdgeGraph g;
    int H = require_field(j, "half_edges", "graph").get<int>();
    g.inv = require_field(j, "involution", "graph").get<std::vector<int>>();
    g.vertex_of = require_field(j, "vertices", "graph").get<std::vector<int>>();
    if (static_cast<int>(g.inv.size()) != H || static_cast<int>(g.vertex_of.size()) != H)
        throw std::runtime_error("graph: field lengths disagree with half_edges");
    g.leg_label.assign(static_cast<size_t>(H), 0);
    auto legs = require_field(j, "legs", "graph").get<std::vector<int>>();
    for (size_t i = 0; i < legs.size(); ++i)
        g.leg_label[static_cast<size_t>(legs[i])] = static_cast<int>(i) + 1;
    if (j.contains("rotation")) {
        g.ribbon = true;
        g.next = j["rotation"].get<std::vector<int>>();
    }
    return g;
}

template <class K>
Json colored_graph_to_json(const ColoredGraph<K>& cg) {
    Json j = graph_to_json(cg.g);
    Json coloring = Json::array();
    for (size_t v = 0; v < cg.anchor.size(); ++v) {
        Json entry;
        entry["anchor"] = cg.anchor[v];
        Json elem = Json::array();
        for (const auto& x : cg.color[v]) elem.push_back(to_string(x));
        entry["element"] = elem;
        coloring.push_back(std::move(entry));
    }
    j["coloring"] = coloring;
    return j;
}

template <class K>
ColoredGraph<K> colored_graph_from_json(const Json& j, std::uint64_t prime = 0) {
    ColoredGraph<K> cg;
    cg.g = graph_from_json(j);
    const Json& coloring = require_field(j, "coloring", "colored graph");
    for (const auto& entry : coloring) {
        cg.anchor.push_back(require_field(entry, "anchor", "coloring").get<std::vector<int>>());
        std::vector<K> elem;
        for (const auto& x : require_field(entry, "element", "coloring"))
            elem.push_back(scalar_from_rational<K>(parse_rational(x.get<std::string>()), prime));
        cg.color.push_back(std::move(elem));
    }
    return cg;
}

} // namespace gcx
