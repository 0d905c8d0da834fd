#pragma once

// The dual collection of an operad, the free operad it generates, the
// quadratic differential obtained by transposing compositions, and the
// quotient operad Q = F(P∨) / (ideal generated by the differential's
// image).
//
// Index spaces: the basis of the arity-n free component in degree i
// (i inner edges, so i+1 vertices) is the tree-complex basis C_i(n)
// with dual decorations; the flat basis of F(P∨)(n) lists the degree
// blocks in increasing order.  The differential on the free side is the
// transpose of the tree contraction differential, so it squares to zero
// by construction.
//
// Orientation bookkeeping: a monomial is oriented by the canonical edge
// order of its tree; grafting y into x concatenates [x-edges, graft
// edge, y-edges] and re-sorts, and the differential inserts the new edge
// in front.  With these conventions the differential is a derivation:
// d(x∘y) = dx∘y + (-1)^deg(x) x∘dy with deg = vertex count (property
// tested, not assumed).

#include "gcx/sparse.hpp"
#include "gcx/trees.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gcx {

// Dual bases of the operad components under the Kronecker pairing;
// cocompositions are transposes of the compositions.
template <class K>
struct DualCollection {
    Operad<K> P;

    int max_arity() const { return P.max_arity; }
    int dim(int n) const { return P.dim(n); }
    DenseMat<K> cocomposition(int k, int l, int i) const {
        return P.comp_matrix(k, l, i).transpose();
    }
};

template <class K>
DualCollection<K> dual_collection(Operad<K> P) {
    return DualCollection<K>{std::move(P)};
}

struct FreeOperadMonomial {
    int degree = 0;  // inner edges = vertices - 1
    TreeBasisElement elem;
};

template <class K>
std::vector<FreeOperadMonomial> free_operad_basis(const DualCollection<K>& d, int n) {
    auto C = build_tree_complex(d.P, n);
    std::vector<FreeOperadMonomial> out;
    for (int i = 0; i < static_cast<int>(C.basis.size()); ++i)
        for (const auto& el : C.basis[static_cast<size_t>(i)]) out.push_back({i, el});
    return out;
}

// Quadratic part of the differential: P∨(n) → (two-vertex monomials),
// as a (dim C_1(n)) x (dim P∨(n)) matrix.  Zero-row matrix for n = 2.
template <class K>
SparseMatrix<K> cobar_differential(const TreeComplex<K>& C) {
    if (C.basis.size() < 2) {
        SparseMatrix<K> z(0, C.dim(0));
        z.finalize();
        return z;
    }
    return C.d[1].transpose();
}

template <class K>
SparseMatrix<K> cobar_differential(const DualCollection<K>& d, int n) {
    return cobar_differential(build_tree_complex(d.P, n));
}

// ---------------------------------------------------------------------------
// Grafting of free-operad monomials.

struct GraftedMonomial {
    TreeBasisElement elem;
    int sign = 1;
};

namespace detail {

inline std::uint32_t relabel_mask_for_graft(std::uint32_t m, int slot, int l) {
    std::uint32_t low = m & ((1u << (slot - 1)) - 1u);
    std::uint32_t mid = (m >> (slot - 1)) & 1u ? (((1u << l) - 1u) << (slot - 1)) : 0u;
    std::uint32_t high = (m >> slot) << (slot - 1 + l);
    return low | mid | high;
}

} // namespace detail

// Grafts monomial b into leaf `slot` (1-based) of monomial a.  Canonical
// trees stay canonical: leaf relabeling is monotone on every subtree and
// the grafted subtree's least leaf equals the leaf it replaces.
inline GraftedMonomial graft_monomials(const TreeBasisElement& a, const TreeBasisElement& b,
                                       int slot) {
    int k = a.shape.n_leaves, l = b.shape.n_leaves;
    if (slot < 1 || slot > k) throw std::out_of_range("graft_monomials: slot out of range");
    int va = a.shape.vertices(), vb = b.shape.vertices();

    RootedTree t;
    t.n_leaves = k + l - 1;
    t.child.resize(static_cast<size_t>(va + vb));
    for (int v = 0; v < va; ++v) {
        for (int c : a.shape.child[static_cast<size_t>(v)]) {
            int nc;
            if (c >= 0) nc = c;
            else {
                int leaf = -c;
                if (leaf < slot) nc = -leaf;
                else if (leaf > slot) nc = -(leaf + l - 1);
                else nc = va;  // graft point: b's root
            }
            t.child[static_cast<size_t>(v)].push_back(nc);
        }
    }
    for (int v = 0; v < vb; ++v) {
        for (int c : b.shape.child[static_cast<size_t>(v)]) {
            int nc = c >= 0 ? c + va : -(-c + slot - 1);
            t.child[static_cast<size_t>(va + v)].push_back(nc);
        }
    }

    // inherited edge order: a's edges, the graft edge, b's edges
    std::vector<std::uint32_t> inherited;
    {
        auto am = tree_leaf_masks(a.shape);
        for (int v = 1; v < va; ++v)
            inherited.push_back(detail::relabel_mask_for_graft(am[static_cast<size_t>(v)], slot, l));
        inherited.push_back(((1u << l) - 1u) << (slot - 1));
        auto bm = tree_leaf_masks(b.shape);
        for (int v = 1; v < vb; ++v)
            inherited.push_back(bm[static_cast<size_t>(v)] << (slot - 1));
    }

    std::vector<int> old_of_new;
    RootedTree canon = tree_renumber(t, &old_of_new);

    GraftedMonomial out;
    out.elem.shape = canon;
    out.elem.color.resize(static_cast<size_t>(va + vb));
    for (int nv = 0; nv < canon.vertices(); ++nv) {
        int ov = old_of_new[static_cast<size_t>(nv)];
        out.elem.color[static_cast<size_t>(nv)] =
            ov < va ? a.color[static_cast<size_t>(ov)] : b.color[static_cast<size_t>(ov - va)];
    }

    auto nm = tree_leaf_masks(canon);
    Perm rel(static_cast<size_t>(canon.vertices()) - 1);
    for (int v = 1; v < canon.vertices(); ++v) {
        auto f = std::find(inherited.begin(), inherited.end(), nm[static_cast<size_t>(v)]);
        rel[static_cast<size_t>(v - 1)] = static_cast<int>(f - inherited.begin());
    }
    out.sign = perm_parity(rel);
    return out;
}

// ---------------------------------------------------------------------------
// The quotient operad.

struct CyclicMarker {
    bool zero = false;
    int arity = 0;
    int group_order = 0;
    int orbit_size = 0;
};

template <class K>
struct QuotientOperad {
    DualCollection<K> dual;
    int up_to_arity = 0;
    std::vector<TreeComplex<K>> C;          // by arity, 2..up_to_arity
    std::vector<std::vector<int>> offset;   // offset[n][i] of degree block i
    std::vector<int> flat_dim;              // by arity
    std::vector<SparseMatrix<K>> ideal;     // rows span ideal(n) in the flat basis
    std::vector<typename SparseMatrix<K>::QuotientBasis> qb;
    std::map<std::array<int, 3>, DenseMat<K>> comp;  // induced compositions

    const Operad<K>& base() const { return dual.P; }

    int dim(int n) const {
        return static_cast<int>(qb[static_cast<size_t>(n)].rep_indices.size());
    }

    int flat_index(int n, int degree, int pos) const {
        return offset[static_cast<size_t>(n)][static_cast<size_t>(degree)] + pos;
    }

    int degree_of(int n, int flat) const {
        const auto& off = offset[static_cast<size_t>(n)];
        int i = 0;
        while (i + 1 < static_cast<int>(off.size()) && off[static_cast<size_t>(i) + 1] <= flat) ++i;
        return i;
    }

    const TreeBasisElement& monomial(int n, int flat) const {
        int i = degree_of(n, flat);
        return C[static_cast<size_t>(n)]
            .basis[static_cast<size_t>(i)]
                  [static_cast<size_t>(flat - offset[static_cast<size_t>(n)][static_cast<size_t>(i)])];
    }

    std::vector<K> project(int n, const SparseVec<K>& flat_vec) const {
        return qb[static_cast<size_t>(n)].projection.apply(
            densify(flat_vec, flat_dim[static_cast<size_t>(n)]));
    }

    // P∨(n) → Q(n) on the degree-0 block; injective by construction since
    // the ideal has no corolla component.
    SparseMatrix<K> inclusion(int n) const {
        int dp = dual.dim(n);
        SparseMatrix<K> m(dim(n), dp);
        const auto& proj = qb[static_cast<size_t>(n)].projection;
        for (int r = 0; r < proj.rows(); ++r)
            for (const auto& [c, v] : proj.row(r))
                if (c < dp) m.add(r, c, v);
        m.finalize();
        return m;
    }

    const DenseMat<K>& comp_matrix(int k, int l, int i) const {
        auto it = comp.find({k, l, i});
        if (it == comp.end())
            throw std::out_of_range("quotient composition outside truncation");
        return it->second;
    }

    std::vector<K> compose(int k, int l, int i, const std::vector<K>& p,
                           const std::vector<K>& q) const {
        const DenseMat<K>& m = comp_matrix(k, l, i);
        int dl = dim(l), dn = dim(k + l - 1);
        std::vector<K> out(static_cast<size_t>(dn), K(0));
        for (int a = 0; a < dim(k); ++a) {
            if (is_zero(p[static_cast<size_t>(a)])) continue;
            for (int b = 0; b < dl; ++b) {
                if (is_zero(q[static_cast<size_t>(b)])) continue;
                K f = p[static_cast<size_t>(a)] * q[static_cast<size_t>(b)];
                int row = a * dl + b;
                for (int g = 0; g < dn; ++g)
                    if (!is_zero(m.at(row, g))) out[static_cast<size_t>(g)] += f * m.at(row, g);
            }
        }
        return out;
    }
};

namespace detail {

// Spanning rows of the arity-n ideal component: one vector per (monomial,
// vertex) pair, collecting every one-edge expansion of that vertex.  The
// span is the full operadic ideal generated by the differential's image:
// an ideal element is a sum of trees containing one expanded vertex with
// arbitrary subtrees above and below, which is exactly an insertion.
template <class K>
std::vector<SparseVec<K>> ideal_span_rows(const Operad<K>& P, const TreeComplex<K>& C,
                                          const std::vector<int>& offset) {
    std::vector<SparseVec<K>> rows;
    int top = static_cast<int>(C.basis.size()) - 1;
    for (int i = 1; i <= top; ++i) {
        std::map<std::pair<int, int>, std::map<int, K>> bucket;  // (target row, vertex)
        for (int col = 0; col < C.dim(i); ++col) {
            const auto& el = C.basis[static_cast<size_t>(i)][static_cast<size_t>(col)];
            for (int e = 1; e <= i; ++e) {
                for (const auto& term : contract_basis_terms(P, C.planar, el, e)) {
                    int row = C.index[static_cast<size_t>(i) - 1].at(term.key);
                    bucket[{row, term.merged_vertex}]
                          [offset[static_cast<size_t>(i)] + col] += term.coeff;
                }
            }
        }
        for (const auto& [key, m] : bucket) {
            SparseVec<K> v;
            for (const auto& [idx, x] : m)
                if (!is_zero(x)) v.emplace_back(idx, x);
            if (!v.empty()) rows.push_back(std::move(v));
        }
    }
    return rows;
}

} // namespace detail

template <class K>
QuotientOperad<K> build_quotient_operad(DualCollection<K> d, int up_to_arity,
                                        bool check_well_defined = true) {
    if (up_to_arity < 2 || up_to_arity > d.P.max_arity)
        throw std::out_of_range("build_quotient_operad: arity bound outside truncation");

    QuotientOperad<K> Q;
    Q.dual = std::move(d);
    Q.up_to_arity = up_to_arity;
    const Operad<K>& P = Q.dual.P;
    size_t sz = static_cast<size_t>(up_to_arity) + 1;
    Q.C.resize(sz);
    Q.offset.resize(sz);
    Q.flat_dim.assign(sz, 0);
    Q.ideal.resize(sz);
    Q.qb.resize(sz);

    for (int n = 2; n <= up_to_arity; ++n) {
        Q.C[static_cast<size_t>(n)] = build_tree_complex(P, n);
        const auto& C = Q.C[static_cast<size_t>(n)];
        auto& off = Q.offset[static_cast<size_t>(n)];
        off.assign(C.basis.size() + 1, 0);
        for (size_t i = 0; i < C.basis.size(); ++i)
            off[i + 1] = off[i] + static_cast<int>(C.basis[i].size());
        Q.flat_dim[static_cast<size_t>(n)] = off.back();

        auto rows = detail::ideal_span_rows(P, C, off);
        SparseMatrix<K> im(static_cast<int>(rows.size()), Q.flat_dim[static_cast<size_t>(n)]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            for (const auto& [c, v] : rows[static_cast<size_t>(r)]) im.add(r, c, v);
        im.finalize();
        Q.ideal[static_cast<size_t>(n)] = std::move(im);
        Q.qb[static_cast<size_t>(n)] = SparseMatrix<K>::quotient_basis(
            Q.flat_dim[static_cast<size_t>(n)], rows);

        for (int j = 0; j < Q.dual.dim(n); ++j)
            if (Q.qb[static_cast<size_t>(n)].rep_indices[static_cast<size_t>(j)] != j)
                throw std::logic_error("dual generators not represented in the quotient");
    }

    // induced compositions from grafting representatives
    for (int k = 2; k <= up_to_arity; ++k) {
        for (int l = 2; k + l - 1 <= up_to_arity; ++l) {
            int n = k + l - 1;
            auto proj_t = Q.qb[static_cast<size_t>(n)].projection.transpose();
            for (int i = 1; i <= k; ++i) {
                DenseMat<K> m(Q.dim(k) * Q.dim(l), Q.dim(n));
                for (int a = 0; a < Q.dim(k); ++a) {
                    const auto& ea =
                        Q.monomial(k, Q.qb[static_cast<size_t>(k)].rep_indices[static_cast<size_t>(a)]);
                    int dega = Q.degree_of(
                        k, Q.qb[static_cast<size_t>(k)].rep_indices[static_cast<size_t>(a)]);
                    for (int b = 0; b < Q.dim(l); ++b) {
                        const auto& eb = Q.monomial(
                            l, Q.qb[static_cast<size_t>(l)].rep_indices[static_cast<size_t>(b)]);
                        int degb = Q.degree_of(
                            l, Q.qb[static_cast<size_t>(l)].rep_indices[static_cast<size_t>(b)]);
                        auto g = graft_monomials(ea, eb, i);
                        int deg = dega + degb + 1;
                        int pos = Q.C[static_cast<size_t>(n)]
                                      .index[static_cast<size_t>(deg)]
                                      .at(tree_basis_key(g.elem.shape, g.elem.color));
                        int flat = Q.flat_index(n, deg, pos);
                        int row = a * Q.dim(l) + b;
                        for (const auto& [c, v] : proj_t.row(flat))
                            m.at(row, c) = K(g.sign) * v;
                    }
                }
                Q.comp[{k, l, i}] = std::move(m);
            }
        }
    }

    if (check_well_defined) {
        // composing then projecting must equal projecting then composing,
        // on every pair of flat basis monomials (equivalent to the ideal
        // being stable under grafting on both sides)
        for (int k = 2; k <= up_to_arity; ++k) {
            for (int l = 2; k + l - 1 <= up_to_arity; ++l) {
                int n = k + l - 1;
                auto proj_t = Q.qb[static_cast<size_t>(n)].projection.transpose();
                for (int i = 1; i <= k; ++i) {
                    for (int fa = 0; fa < Q.flat_dim[static_cast<size_t>(k)]; ++fa) {
                        for (int fb = 0; fb < Q.flat_dim[static_cast<size_t>(l)]; ++fb) {
                            auto g = graft_monomials(Q.monomial(k, fa), Q.monomial(l, fb), i);
                            int deg = Q.degree_of(k, fa) + Q.degree_of(l, fb) + 1;
                            int pos = Q.C[static_cast<size_t>(n)]
                                          .index[static_cast<size_t>(deg)]
                                          .at(tree_basis_key(g.elem.shape, g.elem.color));
                            auto lhs = densify(proj_t.row(Q.flat_index(n, deg, pos)), Q.dim(n));
                            if (g.sign < 0)
                                for (auto& x : lhs) x = -x;
                            auto pa = Q.project(k, {{fa, K(1)}});
                            auto pb = Q.project(l, {{fb, K(1)}});
                            auto rhs = Q.compose(k, l, i, pa, pb);
                            if (!vec_equal(lhs, rhs))
                                throw std::logic_error(
                                    "quotient composition not well defined at arity pair (" +
                                    std::to_string(k) + "," + std::to_string(l) + ")");
                        }
                    }
                }
            }
        }
    }
    return Q;
}

// The degree-i layer of the universal cycle: a (dim C_i) x (dim Q(n))
// matrix whose row at a basis tree is the quotient class of the same-
// indexed dual monomial.  Its boundary d_i * xi vanishes exactly because
// the differential's image lies in the ideal.
template <class K>
SparseMatrix<K> universal_tree_cycle(const Operad<K>& P, const QuotientOperad<K>& Q, int n, int i) {
    if (P.dims != Q.base().dims || P.symmetric != Q.base().symmetric)
        throw std::invalid_argument("universal_tree_cycle: quotient built from a different operad");
    if (n < 2 || n > Q.up_to_arity) throw std::out_of_range("universal_tree_cycle: arity out of range");
    if (i < 0 || i > n - 2) throw std::out_of_range("universal_tree_cycle: degree out of range");
    const auto& C = Q.C[static_cast<size_t>(n)];
    auto proj_t = Q.qb[static_cast<size_t>(n)].projection.transpose();
    SparseMatrix<K> xi(C.dim(i), Q.dim(n));
    for (int pos = 0; pos < C.dim(i); ++pos)
        for (const auto& [c, v] : proj_t.row(Q.flat_index(n, i, pos))) xi.add(pos, c, v);
    xi.finalize();
    return xi;
}

// Bookkeeping marker recording the cyclic-orbit normalization of a class
// when attached to a graph vertex as a (n+1)-input functional.  For a
// class represented by a single corolla generator the orbit under the
// contragredient rotation is computed exactly; classes with composite
// representatives are tagged with the full group order.
template <class K>
CyclicMarker theory_inclusion(const QuotientOperad<K>& Q, int n, const std::vector<K>& q_elem) {
    const Operad<K>& P = Q.base();
    if (!P.cyclic) throw std::logic_error("theory_inclusion: operad is not cyclic");
    CyclicMarker m;
    m.arity = n;
    m.group_order = n + 1;
    if (vec_is_zero(q_elem)) {
        m.zero = true;
        m.orbit_size = 0;
        return m;
    }
    int dp = Q.dual.dim(n);
    bool corolla_only = true;
    std::vector<K> v(static_cast<size_t>(dp), K(0));
    for (int a = 0; a < Q.dim(n); ++a) {
        if (is_zero(q_elem[static_cast<size_t>(a)])) continue;
        int flat = Q.qb[static_cast<size_t>(n)].rep_indices[static_cast<size_t>(a)];
        if (flat >= dp) {
            corolla_only = false;
            break;
        }
        v[static_cast<size_t>(flat)] = q_elem[static_cast<size_t>(a)];
    }
    if (!corolla_only) {
        m.orbit_size = n + 1;
        return m;
    }
    Perm rot = P.rotation_perm(n);
    DenseMat<K> rdual = P.slot_matrix(n, perm_inverse(rot)).transpose();
    std::vector<K> w = v;
    for (int step = 1; step <= n + 1; ++step) {
        w = rdual.apply(w);
        if (vec_equal(w, v)) {
            m.orbit_size = step;
            return m;
        }
    }
    throw std::logic_error("theory_inclusion: rotation orbit did not close");
}

} // namespace gcx
