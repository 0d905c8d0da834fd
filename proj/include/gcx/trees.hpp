#pragma once

// Rooted trees with all internal vertices of arity >= 2, their colored
// chain complexes (differential = contraction of inner edges), homology,
// and the Koszul concentration report.
//
// Vertices are numbered in depth-first preorder from the root; an inner
// edge is identified with its child vertex, so the canonical edge order
// is the vertex order 1..i.  Orientation = ordering of inner edges up to
// even permutation; the differential on a basis tree is
//   sum_j (-1)^{j-1} [contract edge j, reorder to canonical],
// and the reordering parity is computed by tracking each surviving edge
// through the leaf set below it (leaf sets below edges are pairwise
// distinct and contraction-stable).

#include "gcx/operad.hpp"
#include "gcx/sparse.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace gcx {

struct RootedTree {
    // child[v]: slots in order; entry >= 0 is an internal vertex id,
    // entry < 0 is the leaf labeled -(entry) (labels 1..n).
    int n_leaves = 0;
    std::vector<std::vector<int>> child;

    int vertices() const { return static_cast<int>(child.size()); }
    int inner_edges() const { return vertices() - 1; }
    int arity(int v) const { return static_cast<int>(child[static_cast<size_t>(v)].size()); }
};

namespace detail {

inline void encode_rec(const RootedTree& t, int v, std::string& out) {
    out += '(';
    bool first = true;
    for (int s : t.child[static_cast<size_t>(v)]) {
        if (!first) out += ' ';
        first = false;
        if (s < 0) out += std::to_string(-s);
        else encode_rec(t, s, out);
    }
    out += ')';
}

inline std::uint32_t leaf_mask_rec(const RootedTree& t, int v, std::vector<std::uint32_t>& mask) {
    std::uint32_t m = 0;
    for (int s : t.child[static_cast<size_t>(v)]) {
        if (s < 0) m |= (1u << (-s - 1));
        else m |= leaf_mask_rec(t, s, mask);
    }
    mask[static_cast<size_t>(v)] = m;
    return m;
}

inline void renumber_rec(const RootedTree& t, int v, RootedTree& out, std::vector<int>& order) {
    int nv = static_cast<int>(out.child.size());
    order.push_back(v);
    out.child.emplace_back();
    size_t slot_base = static_cast<size_t>(nv);
    out.child[slot_base].resize(t.child[static_cast<size_t>(v)].size());
    for (size_t s = 0; s < t.child[static_cast<size_t>(v)].size(); ++s) {
        int c = t.child[static_cast<size_t>(v)][s];
        if (c < 0) out.child[slot_base][s] = c;
        else {
            int pos = static_cast<int>(out.child.size());
            out.child[slot_base][s] = pos;
            renumber_rec(t, c, out, order);
        }
    }
}

} // namespace detail

inline std::string tree_encode(const RootedTree& t) {
    std::string s;
    detail::encode_rec(t, 0, s);
    return s;
}

// mask[v] = bitmask of leaf labels below v (bit j-1 for leaf j)
inline std::vector<std::uint32_t> tree_leaf_masks(const RootedTree& t) {
    std::vector<std::uint32_t> mask(static_cast<size_t>(t.vertices()), 0);
    detail::leaf_mask_rec(t, 0, mask);
    return mask;
}

// Renumbers vertices to depth-first preorder; old_of_new[i] = previous id.
inline RootedTree tree_renumber(const RootedTree& t, std::vector<int>* old_of_new = nullptr) {
    RootedTree out;
    out.n_leaves = t.n_leaves;
    std::vector<int> order;
    detail::renumber_rec(t, 0, out, order);
    if (old_of_new) *old_of_new = order;
    return out;
}

inline std::vector<int> tree_parents(const RootedTree& t) {
    std::vector<int> par(static_cast<size_t>(t.vertices()), -1);
    for (int v = 0; v < t.vertices(); ++v)
        for (int s : t.child[static_cast<size_t>(v)])
            if (s >= 0) par[static_cast<size_t>(s)] = v;
    return par;
}

// Sorts children of every vertex by the least leaf label below them and
// renumbers.  Planar trees are already canonical and must not be fed here.
inline RootedTree tree_canonical_symmetric(const RootedTree& t) {
    RootedTree w = t;
    auto mask = tree_leaf_masks(w);
    auto key = [&](int slot) -> std::uint32_t {
        return slot < 0 ? (1u << (-slot - 1)) : mask[static_cast<size_t>(slot)];
    };
    for (auto& ch : w.child)
        std::sort(ch.begin(), ch.end(), [&](int a, int b) {
            std::uint32_t ka = key(a), kb = key(b);
            std::uint32_t la = ka & (~ka + 1), lb = kb & (~kb + 1);
            return la < lb;
        });
    return tree_renumber(w);
}

// All trees with leaf set {base..base+n-1}; planar flavor emits each
// planar shape once with leaves in left-to-right order, symmetric flavor
// emits each leaf-labeled tree once in canonical (min-leaf-sorted) form.
namespace detail {

inline std::vector<RootedTree> gen_planar(int n, int base) {
    std::vector<RootedTree> out;
    if (n < 2) return out;
    std::vector<int> parts;
    auto emit = [&]() {
        std::vector<std::vector<RootedTree>> choices;
        std::vector<int> offsets;
        int off = base;
        for (int p : parts) {
            offsets.push_back(off);
            if (p == 1) choices.emplace_back();
            else choices.push_back(gen_planar(p, off));
            off += p;
        }
        std::vector<int> pick(parts.size(), 0);
        while (true) {
            RootedTree t;
            t.n_leaves = n;
            t.child.emplace_back();
            bool ok = true;
            for (size_t s = 0; s < parts.size(); ++s) {
                if (parts[s] == 1) {
                    t.child[0].push_back(-(offsets[s]));
                } else {
                    if (choices[s].empty()) { ok = false; break; }
                    const RootedTree& sub = choices[s][static_cast<size_t>(pick[s])];
                    int shift = static_cast<int>(t.child.size());
                    t.child[0].push_back(shift);
                    for (const auto& ch : sub.child) {
                        std::vector<int> row;
                        for (int c : ch) row.push_back(c < 0 ? c : c + shift);
                        t.child.push_back(std::move(row));
                    }
                }
            }
            if (ok) out.push_back(tree_renumber(t));
            int s = static_cast<int>(parts.size()) - 1;
            while (s >= 0) {
                if (parts[static_cast<size_t>(s)] > 1 &&
                    pick[static_cast<size_t>(s)] + 1 <
                        static_cast<int>(choices[static_cast<size_t>(s)].size())) {
                    ++pick[static_cast<size_t>(s)];
                    for (size_t r = static_cast<size_t>(s) + 1; r < parts.size(); ++r) pick[r] = 0;
                    break;
                }
                --s;
            }
            if (s < 0) break;
        }
    };
    // compositions of n into >= 2 parts
    std::vector<int> comp;
    std::function<void(int)> rec = [&](int rem) {
        if (rem == 0) {
            if (comp.size() >= 2) {
                parts = comp;
                emit();
            }
            return;
        }
        for (int p = 1; p <= rem; ++p) {
            comp.push_back(p);
            rec(rem - p);
            comp.pop_back();
        }
    };
    rec(n);
    return out;
}

inline void partitions_rec(const std::vector<int>& elems, size_t idx,
                           std::vector<std::vector<int>>& blocks,
                           std::vector<std::vector<std::vector<int>>>& out) {
    if (idx == elems.size()) {
        if (blocks.size() >= 2) out.push_back(blocks);
        return;
    }
    size_t nb = blocks.size();
    for (size_t bi = 0; bi < nb; ++bi) {
        blocks[bi].push_back(elems[idx]);
        partitions_rec(elems, idx + 1, blocks, out);
        blocks[bi].pop_back();
    }
    blocks.push_back({elems[idx]});
    partitions_rec(elems, idx + 1, blocks, out);
    blocks.pop_back();
}

inline std::vector<RootedTree> gen_symmetric(const std::vector<int>& leaves) {
    std::vector<RootedTree> out;
    int n = static_cast<int>(leaves.size());
    if (n < 2) return out;
    std::vector<std::vector<std::vector<int>>> parts;
    std::vector<std::vector<int>> blocks;
    partitions_rec(leaves, 0, blocks, parts);
    for (const auto& blk : parts) {
        std::vector<std::vector<RootedTree>> choices;
        for (const auto& b : blk)
            choices.push_back(b.size() == 1 ? std::vector<RootedTree>{} : gen_symmetric(b));
        std::vector<int> pick(blk.size(), 0);
        while (true) {
            RootedTree t;
            t.n_leaves = n;
            t.child.emplace_back();
            bool ok = true;
            for (size_t s = 0; s < blk.size(); ++s) {
                if (blk[s].size() == 1) {
                    t.child[0].push_back(-blk[s][0]);
                } else {
                    if (choices[s].empty()) { ok = false; break; }
                    const RootedTree& sub = choices[s][static_cast<size_t>(pick[s])];
                    int shift = static_cast<int>(t.child.size());
                    t.child[0].push_back(shift);
                    for (const auto& ch : sub.child) {
                        std::vector<int> row;
                        for (int c : ch) row.push_back(c < 0 ? c : c + shift);
                        t.child.push_back(std::move(row));
                    }
                }
            }
            if (ok) out.push_back(tree_canonical_symmetric(t));
            int s = static_cast<int>(blk.size()) - 1;
            while (s >= 0) {
                if (blk[static_cast<size_t>(s)].size() > 1 &&
                    pick[static_cast<size_t>(s)] + 1 <
                        static_cast<int>(choices[static_cast<size_t>(s)].size())) {
                    ++pick[static_cast<size_t>(s)];
                    for (size_t r = static_cast<size_t>(s) + 1; r < blk.size(); ++r) pick[r] = 0;
                    break;
                }
                --s;
            }
            if (s < 0) break;
        }
    }
    return out;
}

} // namespace detail

inline std::vector<RootedTree> enumerate_trees(int n, int i, bool planar) {
    if (n < 2) throw std::invalid_argument("enumerate_trees: need at least 2 leaves");
    if (i < 0 || i > n - 2) throw std::out_of_range("enumerate_trees: inner edge count out of range");
    std::vector<RootedTree> all;
    if (planar) all = detail::gen_planar(n, 1);
    else {
        std::vector<int> leaves;
        for (int j = 1; j <= n; ++j) leaves.push_back(j);
        all = detail::gen_symmetric(leaves);
    }
    std::vector<RootedTree> out;
    for (auto& t : all)
        if (t.inner_edges() == i) out.push_back(std::move(t));
    std::sort(out.begin(), out.end(), [](const RootedTree& a, const RootedTree& b) {
        return tree_encode(a) < tree_encode(b);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Colored trees and contraction.

template <class K>
struct ColoredTree {
    RootedTree shape;                    // canonical form
    std::vector<std::vector<K>> color;   // per vertex, vector in P(arity)
};

struct TreeContraction {
    RootedTree shape;          // canonical contracted tree
    int merged_vertex = 0;     // id of the merged vertex in the canonical tree
    Perm sort_perm;            // input permutation applied at the merged vertex (symmetric flavor)
    int reorder_parity = 1;    // canonical-edge-order parity relative to the inherited order
    std::vector<int> vertex_map;  // old vertex id -> new id (contracted child -> merged vertex)
};

// Contracts the inner edge above vertex e (1 <= e <= inner edges).  The
// merged children are the parent's up to the slot, the child's, then the
// parent's rest; the symmetric flavor then re-sorts them by least leaf.
inline TreeContraction contract_shape(const RootedTree& t, int e, bool planar) {
    auto par = tree_parents(t);
    int p = par[static_cast<size_t>(e)];
    if (p < 0) throw std::invalid_argument("contract_shape: not an inner edge");

    RootedTree w;
    w.n_leaves = t.n_leaves;
    w.child = t.child;
    auto& pc = w.child[static_cast<size_t>(p)];
    auto it = std::find(pc.begin(), pc.end(), e);
    size_t slot = static_cast<size_t>(it - pc.begin());
    std::vector<int> merged(pc.begin(), pc.begin() + static_cast<std::ptrdiff_t>(slot));
    for (int c : t.child[static_cast<size_t>(e)]) merged.push_back(c);
    merged.insert(merged.end(), pc.begin() + static_cast<std::ptrdiff_t>(slot) + 1, pc.end());

    int m = static_cast<int>(merged.size());
    Perm sigma = perm_identity(m);
    if (!planar) {
        auto mask = tree_leaf_masks(t);
        auto key = [&](int s) -> std::uint32_t {
            std::uint32_t k = s < 0 ? (1u << (-s - 1)) : mask[static_cast<size_t>(s)];
            return k & (~k + 1);  // least leaf bit
        };
        std::vector<int> order(static_cast<size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return key(merged[static_cast<size_t>(a)]) <
                                             key(merged[static_cast<size_t>(b)]); });
        std::vector<int> sorted(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j) sorted[static_cast<size_t>(j)] = merged[static_cast<size_t>(order[static_cast<size_t>(j)])];
        merged = std::move(sorted);
        // children listed in composition order u: slot j of the composite
        // color points at u_j; canonical order w = u o sigma^{-1} needs the
        // color replaced by sigma . color with sigma^{-1} = order.
        sigma = perm_inverse(order);
    }
    pc = merged;
    w.child[static_cast<size_t>(e)].clear();

    // inherited edge order: old vertices except e, ascending; track by leaf set
    auto old_mask = tree_leaf_masks(t);
    std::vector<std::uint32_t> inherited;
    for (int v = 1; v < t.vertices(); ++v)
        if (v != e) inherited.push_back(old_mask[static_cast<size_t>(v)]);

    // drop the dead vertex and renumber
    RootedTree packed;
    packed.n_leaves = w.n_leaves;
    std::vector<int> pack_id(static_cast<size_t>(w.vertices()), -1);
    for (int v = 0; v < w.vertices(); ++v) {
        if (v == e) continue;
        pack_id[static_cast<size_t>(v)] = static_cast<int>(packed.child.size());
        packed.child.push_back(w.child[static_cast<size_t>(v)]);
    }
    for (auto& ch : packed.child)
        for (auto& c : ch)
            if (c >= 0) c = pack_id[static_cast<size_t>(c)];

    std::vector<int> dfs_old;
    RootedTree canon = tree_renumber(packed, &dfs_old);

    TreeContraction res;
    res.shape = canon;
    res.sort_perm = sigma;
    res.vertex_map.assign(static_cast<size_t>(t.vertices()), -1);
    std::vector<int> new_of_packed(packed.child.size());
    for (size_t ni = 0; ni < dfs_old.size(); ++ni)
        new_of_packed[static_cast<size_t>(dfs_old[ni])] = static_cast<int>(ni);
    for (int v = 0; v < t.vertices(); ++v) {
        int pv = (v == e) ? p : v;
        res.vertex_map[static_cast<size_t>(v)] =
            new_of_packed[static_cast<size_t>(pack_id[static_cast<size_t>(pv)])];
    }
    res.merged_vertex = res.vertex_map[static_cast<size_t>(p)];

    auto new_mask = tree_leaf_masks(canon);
    std::vector<std::uint32_t> canonical;
    for (int v = 1; v < canon.vertices(); ++v) canonical.push_back(new_mask[static_cast<size_t>(v)]);
    Perm rel(canonical.size());
    for (size_t a = 0; a < canonical.size(); ++a) {
        auto f = std::find(inherited.begin(), inherited.end(), canonical[a]);
        rel[a] = static_cast<int>(f - inherited.begin());
    }
    res.reorder_parity = perm_parity(rel);
    return res;
}

template <class K>
ColoredTree<K> contract_tree_edge(const Operad<K>& P, const ColoredTree<K>& t, int e) {
    auto par = tree_parents(t.shape);
    if (e < 1 || e >= t.shape.vertices()) throw std::invalid_argument("not an inner edge");
    int p = par[static_cast<size_t>(e)];
    int k = t.shape.arity(p), l = t.shape.arity(e);
    const auto& pc = t.shape.child[static_cast<size_t>(p)];
    int slot = static_cast<int>(std::find(pc.begin(), pc.end(), e) - pc.begin()) + 1;

    TreeContraction c = contract_shape(t.shape, e, !P.symmetric);

    // bilinear extension of the composition over the two factors
    std::vector<K> comp(static_cast<size_t>(P.dim(k + l - 1)), K(0));
    {
        auto raw = P.compose(k, l, slot, t.color[static_cast<size_t>(p)], t.color[static_cast<size_t>(e)]);
        comp = P.symmetric ? P.act_input(k + l - 1, c.sort_perm, raw) : raw;
    }

    ColoredTree<K> out;
    out.shape = c.shape;
    out.color.resize(static_cast<size_t>(c.shape.vertices()));
    for (int v = 0; v < t.shape.vertices(); ++v) {
        if (v == e || v == p) continue;
        out.color[static_cast<size_t>(c.vertex_map[static_cast<size_t>(v)])] = t.color[static_cast<size_t>(v)];
    }
    out.color[static_cast<size_t>(c.merged_vertex)] = std::move(comp);
    return out;
}

// ---------------------------------------------------------------------------
// The chain complex.

struct TreeBasisElement {
    RootedTree shape;
    std::vector<int> color;  // basis index per vertex (DFS order)
};

template <class K>
struct TreeComplex {
    int n = 0;
    bool planar = false;
    std::vector<std::vector<TreeBasisElement>> basis;  // degree 0..n-2
    std::vector<std::map<std::string, int>> index;     // key -> position per degree
    std::vector<SparseMatrix<K>> d;                    // d[i]: C_i -> C_{i-1}, i >= 1

    int dim(int degree) const {
        if (degree < 0 || degree >= static_cast<int>(basis.size())) return 0;
        return static_cast<int>(basis[static_cast<size_t>(degree)].size());
    }
};

inline std::string tree_basis_key(const RootedTree& shape, const std::vector<int>& color) {
    std::string k = tree_encode(shape);
    for (int c : color) {
        k += '|';
        k += std::to_string(c);
    }
    return k;
}

// One contraction of a basis tree: a target basis key one degree down, its
// coefficient (sign times structure constant), and the merged vertex id in
// the contracted canonical tree.
template <class K>
struct ContractionTerm {
    std::string key;
    K coeff;
    int merged_vertex = 0;
};

template <class K>
std::vector<ContractionTerm<K>> contract_basis_terms(const Operad<K>& P, bool planar,
                                                     const TreeBasisElement& el, int e) {
    auto par = tree_parents(el.shape);
    int p = par[static_cast<size_t>(e)];
    int k = el.shape.arity(p), l = el.shape.arity(e);
    const auto& pc = el.shape.child[static_cast<size_t>(p)];
    int slot = static_cast<int>(std::find(pc.begin(), pc.end(), e) - pc.begin()) + 1;
    TreeContraction c = contract_shape(el.shape, e, planar);
    int sign = ((e - 1) % 2 == 0 ? 1 : -1) * c.reorder_parity;

    int dl = P.dim(l), dn = P.dim(k + l - 1);
    std::vector<K> comp(static_cast<size_t>(dn), K(0));
    const DenseMat<K>& M = P.comp_matrix(k, l, slot);
    int row = el.color[static_cast<size_t>(p)] * dl + el.color[static_cast<size_t>(e)];
    for (int g = 0; g < dn; ++g) comp[static_cast<size_t>(g)] = M.at(row, g);
    if (!planar) comp = P.act_input(k + l - 1, c.sort_perm, comp);

    std::vector<int> ncolor(static_cast<size_t>(c.shape.vertices()), 0);
    for (int v = 0; v < el.shape.vertices(); ++v) {
        if (v == e || v == p) continue;
        ncolor[static_cast<size_t>(c.vertex_map[static_cast<size_t>(v)])] =
            el.color[static_cast<size_t>(v)];
    }
    std::vector<ContractionTerm<K>> out;
    for (int g = 0; g < dn; ++g) {
        if (is_zero(comp[static_cast<size_t>(g)])) continue;
        ncolor[static_cast<size_t>(c.merged_vertex)] = g;
        out.push_back({tree_basis_key(c.shape, ncolor), K(sign) * comp[static_cast<size_t>(g)],
                       c.merged_vertex});
    }
    return out;
}

template <class K>
TreeComplex<K> build_tree_complex(const Operad<K>& P, int n) {
    if (n < 2 || n > P.max_arity) throw std::out_of_range("build_tree_complex: leaf count out of range");
    TreeComplex<K> C;
    C.n = n;
    C.planar = !P.symmetric;
    int top = n - 2;
    C.basis.resize(static_cast<size_t>(top) + 1);
    C.index.resize(static_cast<size_t>(top) + 1);

    for (int i = 0; i <= top; ++i) {
        for (const auto& t : enumerate_trees(n, i, C.planar)) {
            std::vector<int> color(static_cast<size_t>(t.vertices()), 0);
            while (true) {
                TreeBasisElement el{t, color};
                C.index[static_cast<size_t>(i)][tree_basis_key(t, color)] =
                    static_cast<int>(C.basis[static_cast<size_t>(i)].size());
                C.basis[static_cast<size_t>(i)].push_back(std::move(el));
                int v = t.vertices() - 1;
                while (v >= 0) {
                    if (color[static_cast<size_t>(v)] + 1 < P.dim(t.arity(v))) {
                        ++color[static_cast<size_t>(v)];
                        for (int w = v + 1; w < t.vertices(); ++w) color[static_cast<size_t>(w)] = 0;
                        break;
                    }
                    --v;
                }
                if (v < 0) break;
            }
        }
    }

    C.d.resize(static_cast<size_t>(top) + 1);
    for (int i = 1; i <= top; ++i) {
        SparseMatrix<K> D(C.dim(i - 1), C.dim(i));
        for (int col = 0; col < C.dim(i); ++col) {
            const auto& el = C.basis[static_cast<size_t>(i)][static_cast<size_t>(col)];
            for (int e = 1; e <= i; ++e) {
                for (const auto& term : contract_basis_terms(P, C.planar, el, e)) {
                    auto it = C.index[static_cast<size_t>(i - 1)].find(term.key);
                    if (it == C.index[static_cast<size_t>(i - 1)].end())
                        throw std::logic_error("contracted tree missing from basis");
                    D.add(it->second, col, term.coeff);
                }
            }
        }
        D.finalize();
        C.d[static_cast<size_t>(i)] = std::move(D);
    }
    return C;
}

template <class K>
std::vector<std::pair<int, int>> tree_homology_dims(const TreeComplex<K>& C) {
    std::vector<std::pair<int, int>> out;
    int top = static_cast<int>(C.basis.size()) - 1;
    std::vector<int> rank(static_cast<size_t>(top) + 2, 0);
    for (int i = 1; i <= top; ++i) rank[static_cast<size_t>(i)] = C.d[static_cast<size_t>(i)].rank();
    for (int i = 0; i <= top; ++i)
        out.emplace_back(i, C.dim(i) - rank[static_cast<size_t>(i)] - rank[static_cast<size_t>(i) + 1]);
    return out;
}

template <class K>
std::vector<std::pair<int, int>> tree_homology_dims(const Operad<K>& P, int n) {
    return tree_homology_dims(build_tree_complex(P, n));
}

struct KoszulReport {
    bool concentrated = false;
    int top_degree = 0;
    int top_dim = 0;
    std::vector<std::pair<int, int>> dims;
};

template <class K>
KoszulReport koszul_concentration_check(const Operad<K>& P, int n) {
    auto C = build_tree_complex(P, n);
    KoszulReport rep;
    rep.dims = tree_homology_dims(C);
    rep.top_degree = n - 2;
    rep.concentrated = true;
    for (const auto& [deg, dim] : rep.dims) {
        if (deg == rep.top_degree) rep.top_dim = dim;
        else if (dim != 0) rep.concentrated = false;
    }
    return rep;
}

} // namespace gcx
