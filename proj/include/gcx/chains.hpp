#pragma once

// Oriented chain complexes spanned by isomorphism classes of colored
// graphs, graded by the total number of internal edges (loops included).
// One shared rank/boundary engine serves the tree and graph complexes.
//
// An oriented basis element is a canonical graph class together with a
// coloring from the class's invariant coloring space and an orientation:
// an ordering of all internal edges up to even permutations.  The
// reference orientation of every stored element is the ascending order
// of all_internal_edges(rep).  A class automorphism phi acts on a
// coloring by transport and on the orientation by the sign of the induced
// edge permutation; elements are identified with their images, so the
// chain space at a class is the signed invariant subspace of its coloring
// space.  A class all of whose signed invariants vanish (for trivial
// colorings: one with an odd edge automorphism, e.g. anything carrying
// two interchangeable loops) contributes nothing to the basis.
//
// The differential contracts every non-loop internal edge, parallel edges
// included: contracting one edge of a parallel family turns the remaining
// members into loops, which drops the degree by exactly one in this
// grading.  The sign of a contraction is the position of the contracted
// edge in the reference orientation, times the permutation relating the
// inherited ordering of the surviving edges to the target's reference.

#include "gcx/graphs.hpp"
#include "gcx/trees.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gcx {

// ---------------------------------------------------------------------------
// Generic graded complex.

template <class K>
struct GradedComplex {
    std::vector<std::vector<std::string>> labels;  // per degree, basis labels
    std::vector<SparseMatrix<K>> d;                // d[i]: C_i -> C_{i-1}; d[0] unused

    int top_degree() const { return static_cast<int>(labels.size()) - 1; }
    int dim(int i) const {
        if (i < 0 || i > top_degree()) return 0;
        return static_cast<int>(labels[static_cast<size_t>(i)].size());
    }
};

template <class K>
void require_chain_vector(const GradedComplex<K>& C, int degree, const std::vector<K>& chain) {
    if (degree < 0 || degree > C.top_degree())
        throw std::invalid_argument("chain degree out of range");
    if (static_cast<int>(chain.size()) != C.dim(degree))
        throw std::invalid_argument("chain vector length does not match the basis");
}

template <class K>
std::vector<K> boundary_of_chain(const GradedComplex<K>& C, int degree,
                                 const std::vector<K>& chain) {
    require_chain_vector(C, degree, chain);
    if (degree == 0) return {};
    return C.d[static_cast<size_t>(degree)].apply(chain);
}

template <class K>
bool is_cycle(const GradedComplex<K>& C, int degree, const std::vector<K>& chain) {
    auto b = boundary_of_chain(C, degree, chain);
    return std::all_of(b.begin(), b.end(), [](const K& x) { return is_zero(x); });
}

template <class K>
struct BoundaryCertificate {
    bool bounds = false;
    std::vector<K> preimage;  // a degree+1 chain with boundary equal to the input
};

template <class K>
BoundaryCertificate<K> is_boundary(const GradedComplex<K>& C, int degree,
                                   const std::vector<K>& chain) {
    require_chain_vector(C, degree, chain);
    BoundaryCertificate<K> cert;
    bool zero = std::all_of(chain.begin(), chain.end(), [](const K& x) { return is_zero(x); });
    if (degree + 1 > C.top_degree()) {
        cert.bounds = zero;
        return cert;
    }
    if (zero) {
        cert.bounds = true;
        cert.preimage.assign(static_cast<size_t>(C.dim(degree + 1)), K(0));
        return cert;
    }
    auto sol = C.d[static_cast<size_t>(degree) + 1].solve(chain);
    if (sol) {
        cert.bounds = true;
        cert.preimage = std::move(*sol);
    }
    return cert;
}

template <class K>
std::vector<std::pair<int, int>> homology_dims(const GradedComplex<K>& C) {
    int top = C.top_degree();
    std::vector<int> rank(static_cast<size_t>(top < 0 ? 0 : top) + 2, 0);
    for (int i = 1; i <= top; ++i) rank[static_cast<size_t>(i)] = C.d[static_cast<size_t>(i)].rank();
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i <= top; ++i)
        out.emplace_back(i, C.dim(i) - rank[static_cast<size_t>(i)] - rank[static_cast<size_t>(i) + 1]);
    return out;
}

template <class K>
void check_boundary_squared(const GradedComplex<K>& C) {
    for (int i = 2; i <= C.top_degree(); ++i) {
        SparseMatrix<K> sq = C.d[static_cast<size_t>(i) - 1] * C.d[static_cast<size_t>(i)];
        if (!sq.is_zero_matrix())
            throw std::logic_error("boundary does not square to zero at degree " +
                                   std::to_string(i));
    }
}

// Every tree complex feeds through the same engine.
template <class K>
GradedComplex<K> as_graded(const TreeComplex<K>& T) {
    GradedComplex<K> C;
    C.labels.resize(T.basis.size());
    for (size_t i = 0; i < T.basis.size(); ++i)
        for (const auto& el : T.basis[i])
            C.labels[i].push_back(tree_basis_key(el.shape, el.color));
    C.d = T.d;
    return C;
}

// ---------------------------------------------------------------------------
// Graph complexes.

template <class K>
struct GraphChainElement {
    GraphIsoClass shape;
    std::vector<K> coeff;  // coordinates in coloring_basis(P, shape.rep)
    std::string label;
};

template <class K>
struct GraphComplex {
    bool ribbon = false;
    int n_legs = 0;
    std::vector<std::vector<GraphChainElement<K>>> basis;  // aligned with chain.labels
    GradedComplex<K> chain;

    int dim(int degree) const { return chain.dim(degree); }
    int top_degree() const { return chain.top_degree(); }
};

namespace detail {

// Coordinates of c in the span of the given vectors; nullopt if outside.
template <class K>
std::optional<std::vector<K>> span_coordinates(const std::vector<std::vector<K>>& span,
                                               const std::vector<K>& c) {
    if (span.empty()) {
        bool zero = std::all_of(c.begin(), c.end(), [](const K& x) { return is_zero(x); });
        if (zero) return std::vector<K>{};
        return std::nullopt;
    }
    int d = static_cast<int>(span.front().size());
    SparseMatrix<K> M(d, static_cast<int>(span.size()));
    for (int j = 0; j < static_cast<int>(span.size()); ++j)
        for (int r = 0; r < d; ++r)
            if (!is_zero(span[static_cast<size_t>(j)][static_cast<size_t>(r)]))
                M.add(r, j, span[static_cast<size_t>(j)][static_cast<size_t>(r)]);
    M.finalize();
    return M.solve(c);
}

// Per-vertex invariant bases of a graph, one entry per vertex.
template <class K>
std::vector<std::vector<std::vector<K>>> vertex_bases(const Operad<K>& P, const HalfEdgeGraph& g) {
    std::vector<std::vector<std::vector<K>>> out;
    for (const auto& hs : g.vertex_half_edges())
        out.push_back(vertex_coloring_basis(P, static_cast<int>(hs.size()), g.ribbon));
    return out;
}

// Coordinates of a normalized-anchor coloring in the product coloring
// basis (the odometer order of coloring_basis, last vertex fastest).
template <class K>
std::optional<std::vector<K>> product_coordinates(
    const std::vector<std::vector<std::vector<K>>>& bases,
    const std::vector<std::vector<K>>& color) {
    int V = static_cast<int>(bases.size());
    std::vector<std::vector<K>> per_vertex;
    int total = 1;
    for (int v = 0; v < V; ++v) {
        auto x = span_coordinates(bases[static_cast<size_t>(v)], color[static_cast<size_t>(v)]);
        if (!x) return std::nullopt;
        per_vertex.push_back(std::move(*x));
        total *= static_cast<int>(bases[static_cast<size_t>(v)].size());
    }
    std::vector<K> out(static_cast<size_t>(total), K(0));
    std::vector<size_t> idx(static_cast<size_t>(V), 0);
    for (int flat = 0; flat < total; ++flat) {
        K prod(1);
        for (int v = 0; v < V; ++v)
            prod = prod * per_vertex[static_cast<size_t>(v)][idx[static_cast<size_t>(v)]];
        out[static_cast<size_t>(flat)] = prod;
        int v = V - 1;
        while (v >= 0) {
            if (++idx[static_cast<size_t>(v)] < bases[static_cast<size_t>(v)].size()) break;
            idx[static_cast<size_t>(v)] = 0;
            --v;
        }
    }
    return out;
}

// Transport matrix of an automorphism on the product coloring coordinates.
template <class K>
DenseMat<K> coloring_transport_matrix(const Operad<K>& P,
                                      const std::vector<ColoredGraph<K>>& B,
                                      const std::vector<std::vector<std::vector<K>>>& bases,
                                      const GraphIsoClass& shape, const std::vector<int>& phi) {
    int n = static_cast<int>(B.size());
    DenseMat<K> M(n, n);
    for (int j = 0; j < n; ++j) {
        ColoredGraph<K> t = transport_colors(P, B[static_cast<size_t>(j)], phi, shape.rep);
        normalize_anchors(P, t);
        auto w = product_coordinates(bases, t.color);
        if (!w) throw std::logic_error("automorphism transport left the coloring span");
        for (int r = 0; r < n; ++r) M.at(r, j) = (*w)[static_cast<size_t>(r)];
    }
    return M;
}

// Signed automorphism data of one class: per generator, the edge-parity
// sign and the coloring transport matrix.
template <class K>
struct SignedAutAction {
    std::vector<int> parity;
    std::vector<DenseMat<K>> transport;
};

template <class K>
SignedAutAction<K> signed_aut_action(const Operad<K>& P, const GraphIsoClass& shape,
                                     const std::vector<ColoredGraph<K>>& B,
                                     const std::vector<std::vector<std::vector<K>>>& bases,
                                     const std::vector<std::vector<int>>& group) {
    SignedAutAction<K> act;
    for (const auto& phi : group) {
        act.parity.push_back(permutation_sign(induced_edge_permutation(shape.rep, phi)));
        act.transport.push_back(coloring_transport_matrix(P, B, bases, shape, phi));
    }
    return act;
}

// Basis of the signed invariant subspace in product coordinates.
template <class K>
std::vector<std::vector<K>> signed_invariants(const SignedAutAction<K>& act, int n) {
    if (act.parity.empty()) {
        std::vector<std::vector<K>> out;
        for (int j = 0; j < n; ++j) {
            std::vector<K> e(static_cast<size_t>(n), K(0));
            e[static_cast<size_t>(j)] = K(1);
            out.push_back(std::move(e));
        }
        return out;
    }
    int g = static_cast<int>(act.parity.size());
    SparseMatrix<K> A(g * n, n);
    for (int q = 0; q < g; ++q) {
        const DenseMat<K>& M = act.transport[static_cast<size_t>(q)];
        K s(act.parity[static_cast<size_t>(q)]);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                K x = s * M.at(r, c);
                if (r == c) x = x - K(1);
                if (!is_zero(x)) A.add(q * n + r, c, x);
            }
    }
    A.finalize();
    std::vector<std::vector<K>> out;
    for (const auto& v : A.kernel_basis()) out.push_back(densify(v, n));
    return out;
}

template <class K>
std::string coeff_string(const std::vector<K>& v) {
    std::string s;
    for (const auto& x : v) {
        s += to_string(x);
        s += ',';
    }
    return s;
}

template <class K>
struct ClassChainData {
    GraphIsoClass shape;
    int degree = 0;
    std::vector<ColoredGraph<K>> B;
    std::vector<std::vector<std::vector<K>>> bases;          // per-vertex invariant bases
    std::vector<std::vector<K>> chain_vectors;               // signed invariants
    std::vector<int> position;                               // per chain vector, slot in degree
    SignedAutAction<K> generators;
};

// Projector onto the signed invariants, built from the full automorphism
// group; only needed when a transported coloring misses the invariant
// span (impossible for one-dimensional coloring spaces).
template <class K>
std::vector<K> signed_average(const Operad<K>& P, const ClassChainData<K>& cd,
                              const std::vector<K>& w) {
    auto group = close_automorphisms(cd.shape.automorphisms,
                                     cd.shape.rep.half_edges());
    std::uint64_t c = operad_characteristic(P);
    if (c != 0 && c <= static_cast<std::uint64_t>(group.size()))
        throw std::domain_error("field characteristic too small to average over automorphisms");
    int n = static_cast<int>(w.size());
    std::vector<K> acc(static_cast<size_t>(n), K(0));
    for (const auto& phi : group) {
        K s(permutation_sign(induced_edge_permutation(cd.shape.rep, phi)));
        DenseMat<K> M = coloring_transport_matrix(P, cd.B, cd.bases, cd.shape, phi);
        auto t = M.apply(w);
        for (int r = 0; r < n; ++r) acc[static_cast<size_t>(r)] =
            acc[static_cast<size_t>(r)] + s * t[static_cast<size_t>(r)];
    }
    K inv = scalar_from_rational<K>(Rational(1, static_cast<long long>(group.size())), c);
    for (auto& x : acc) x = x * inv;
    return acc;
}

} // namespace detail

// Coordinates of one colored graph, carried with an explicit ordering of
// all its internal edges (loops included), inside a built complex.
template <class K>
struct ChainLocation {
    int degree = 0;
    std::vector<std::pair<int, K>> coords;  // (position in degree, coefficient)
};

namespace detail {

template <class K>
ChainLocation<K> locate_colored(const Operad<K>& P,
                                const std::map<std::string, ClassChainData<K>>& universe,
                                const ColoredGraph<K>& cg,
                                const std::vector<std::pair<int, int>>& edge_order,
                                const K& scale) {
    GraphIsoClass cf = canonical_form(cg.g);
    auto it = universe.find(cf.encoding);
    if (it == universe.end())
        throw std::invalid_argument("graph lies outside the complex universe");
    const ClassChainData<K>& cd = it->second;

    ChainLocation<K> out;
    out.degree = cd.degree;
    if (cd.chain_vectors.empty()) return out;

    ColoredGraph<K> moved = transport_colors(P, cg, cf.relabel, cd.shape.rep);
    normalize_anchors(P, moved);
    auto w = product_coordinates(cd.bases, moved.color);
    if (!w) throw std::logic_error("coloring lies outside the invariant span");

    // orientation sign between the supplied edge order and the canonical
    // ascending order of the representative
    auto canonical = all_internal_edges(cd.shape.rep);
    if (edge_order.size() != canonical.size())
        throw std::invalid_argument("edge order does not list the internal edges");
    std::vector<int> relation(edge_order.size());
    for (size_t t = 0; t < edge_order.size(); ++t) {
        int a = cf.relabel[static_cast<size_t>(edge_order[t].first)];
        int b = cf.relabel[static_cast<size_t>(edge_order[t].second)];
        std::pair<int, int> e{std::min(a, b), std::max(a, b)};
        auto f = std::find(canonical.begin(), canonical.end(), e);
        if (f == canonical.end())
            throw std::invalid_argument("edge order names an unknown edge");
        relation[t] = static_cast<int>(f - canonical.begin());
    }
    {
        auto sorted = relation;
        std::sort(sorted.begin(), sorted.end());
        for (size_t t = 0; t < sorted.size(); ++t)
            if (sorted[t] != static_cast<int>(t))
                throw std::invalid_argument("edge order repeats or skips an edge");
    }
    K total = scale * K(permutation_sign(relation));

    auto x = span_coordinates(cd.chain_vectors, *w);
    if (!x) x = span_coordinates(cd.chain_vectors, signed_average(P, cd, *w));
    if (!x) throw std::logic_error("signed average escaped the invariant span");
    for (size_t r = 0; r < x->size(); ++r) {
        K coeff = total * (*x)[r];
        if (!is_zero(coeff)) out.coords.emplace_back(cd.position[r], coeff);
    }
    return out;
}

} // namespace detail

template <class K>
class GraphComplexBuilder {
  public:
    GraphComplexBuilder(const Operad<K>& P, int n_legs, int degree_max)
        : P_(P), n_legs_(n_legs), degree_max_(degree_max) {}

    GraphComplex<K> build() {
        GraphComplex<K> C;
        C.ribbon = !P_.symmetric;
        C.n_legs = n_legs_;
        C.basis.resize(static_cast<size_t>(degree_max_) + 1);
        C.chain.labels.resize(static_cast<size_t>(degree_max_) + 1);

        auto classes = enumerate_graphs(n_legs_, GraphBounds{degree_max_, 8}, C.ribbon);
        for (auto& cls : classes) {
            detail::ClassChainData<K> cd;
            cd.degree = total_internal_edges(cls.rep);
            cd.B = coloring_basis(P_, cls.rep);
            cd.shape = std::move(cls);
            if (cd.B.empty()) {
                universe_.emplace(cd.shape.encoding, std::move(cd));
                continue;
            }
            cd.bases = detail::vertex_bases(P_, cd.shape.rep);
            cd.generators = detail::signed_aut_action(P_, cd.shape, cd.B, cd.bases,
                                                      cd.shape.automorphisms);
            cd.chain_vectors =
                detail::signed_invariants(cd.generators, static_cast<int>(cd.B.size()));
            auto& bucket = C.basis[static_cast<size_t>(cd.degree)];
            for (const auto& v : cd.chain_vectors) {
                cd.position.push_back(static_cast<int>(bucket.size()));
                GraphChainElement<K> el;
                el.shape = cd.shape;
                el.coeff = v;
                el.label = cd.shape.encoding + "|" + detail::coeff_string(v);
                C.chain.labels[static_cast<size_t>(cd.degree)].push_back(el.label);
                bucket.push_back(std::move(el));
            }
            universe_.emplace(cd.shape.encoding, std::move(cd));
        }

        C.chain.d.resize(static_cast<size_t>(degree_max_) + 1);
        for (int i = 1; i <= degree_max_; ++i) {
            SparseMatrix<K> D(C.dim(i - 1), C.dim(i));
            for (const auto& [enc, cd] : universe_) {
                if (cd.degree != i || cd.chain_vectors.empty()) continue;
                for (size_t r = 0; r < cd.chain_vectors.size(); ++r)
                    fill_column(D, cd, cd.chain_vectors[r], cd.position[r]);
            }
            D.finalize();
            C.chain.d[static_cast<size_t>(i)] = std::move(D);
        }
        check_boundary_squared(C.chain);
        return C;
    }

    // Expresses a colored graph with a chosen edge ordering in the built
    // complex; requires build() to have run (the universe survives).
    ChainLocation<K> locate(const ColoredGraph<K>& cg,
                            const std::vector<std::pair<int, int>>& edge_order,
                            const K& scale = K(1)) const {
        return detail::locate_colored(P_, universe_, cg, edge_order, scale);
    }

  private:
    void fill_column(SparseMatrix<K>& D, const detail::ClassChainData<K>& cd,
                     const std::vector<K>& u, int col) {
        auto edges = all_internal_edges(cd.shape.rep);
        int i = static_cast<int>(edges.size());
        const auto& vtx = cd.shape.rep.vertex_of;
        for (int j = 1; j <= i; ++j) {
            const auto& ej = edges[static_cast<size_t>(j - 1)];
            if (vtx[static_cast<size_t>(ej.first)] == vtx[static_cast<size_t>(ej.second)])
                continue;  // loops are never contracted

            std::vector<int> hmap;
            contract_edge(cd.shape.rep, ej.first, &hmap);
            std::vector<std::pair<int, int>> inherited;
            for (int t = 1; t <= i; ++t) {
                if (t == j) continue;
                const auto& et = edges[static_cast<size_t>(t - 1)];
                inherited.emplace_back(hmap[static_cast<size_t>(et.first)],
                                       hmap[static_cast<size_t>(et.second)]);
            }
            K sign((j - 1) % 2 == 0 ? 1 : -1);
            for (size_t m = 0; m < cd.B.size(); ++m) {
                if (is_zero(u[m])) continue;
                ColoredGraph<K> image = contract_edge(P_, cd.B[m], ej.first);
                ChainLocation<K> loc =
                    detail::locate_colored(P_, universe_, image, inherited, K(sign * u[m]));
                for (const auto& [row, coeff] : loc.coords) D.add(row, col, coeff);
            }
        }
    }

    const Operad<K>& P_;
    int n_legs_;
    int degree_max_;
    std::map<std::string, detail::ClassChainData<K>> universe_;
};

template <class K>
GraphComplex<K> build_graph_complex(const Operad<K>& P, int n_legs, int degree_max) {
    return GraphComplexBuilder<K>(P, n_legs, degree_max).build();
}

template <class K>
std::vector<std::pair<int, int>> homology_dims(const GraphComplex<K>& C) {
    return homology_dims(C.chain);
}

} // namespace gcx
