#include "gcx/trees.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

using gcx::ColoredTree;
using gcx::Operad;
using gcx::PrimeField;
using gcx::Rational;
using gcx::RootedTree;
using gcx::SparseMatrix;
using gcx::TreeComplex;

namespace {

std::vector<std::string> encodings(int n, int i, bool planar) {
    std::vector<std::string> out;
    for (const auto& t : gcx::enumerate_trees(n, i, planar)) out.push_back(gcx::tree_encode(t));
    return out;
}

int count_trees(int n, int i, bool planar) {
    return static_cast<int>(gcx::enumerate_trees(n, i, planar).size());
}

template <class K>
std::vector<K> dense_row(const SparseMatrix<K>& m, int r) {
    std::vector<K> out(static_cast<size_t>(m.cols()), K(0));
    for (const auto& [c, v] : m.row(r)) out[static_cast<size_t>(c)] = v;
    return out;
}

template <class K>
bool all_squares_vanish(const TreeComplex<K>& C) {
    for (int i = 2; i < static_cast<int>(C.basis.size()); ++i) {
        auto sq = C.d[static_cast<size_t>(i) - 1] * C.d[static_cast<size_t>(i)];
        if (sq.nnz() != 0) return false;
    }
    return true;
}

} // namespace

TEST_CASE("planar tree counts follow the Catalan pattern") {
    CHECK(count_trees(2, 0, true) == 1);
    CHECK(count_trees(3, 0, true) == 1);
    CHECK(count_trees(3, 1, true) == 2);
    CHECK(count_trees(4, 0, true) == 1);
    CHECK(count_trees(4, 1, true) == 5);
    CHECK(count_trees(4, 2, true) == 5);
    CHECK(count_trees(5, 3, true) == 14);
    CHECK(count_trees(6, 4, true) == 42);
}

TEST_CASE("labeled tree counts") {
    CHECK(count_trees(2, 0, false) == 1);
    CHECK(count_trees(3, 1, false) == 3);
    CHECK(count_trees(4, 1, false) == 10);
    CHECK(count_trees(4, 2, false) == 15);
    CHECK(count_trees(5, 3, false) == 105);
}

TEST_CASE("planar leaves run left to right") {
    auto enc = encodings(3, 1, true);
    REQUIRE(enc.size() == 2);
    CHECK(enc[0] == "((1 2) 3)");
    CHECK(enc[1] == "(1 (2 3))");
    CHECK(encodings(3, 0, true)[0] == "(1 2 3)");
}

TEST_CASE("labeled enumeration is canonical and duplicate-free") {
    for (int n = 2; n <= 5; ++n) {
        for (int i = 0; i <= n - 2; ++i) {
            auto trees = gcx::enumerate_trees(n, i, false);
            std::set<std::string> seen;
            for (const auto& t : trees) {
                std::string e = gcx::tree_encode(t);
                CHECK(gcx::tree_encode(gcx::tree_canonical_symmetric(t)) == e);
                seen.insert(e);
            }
            CHECK(seen.size() == trees.size());
        }
    }
}

TEST_CASE("enumeration rejects out-of-range requests") {
    CHECK_THROWS(gcx::enumerate_trees(1, 0, true));
    CHECK_THROWS(gcx::enumerate_trees(3, 2, true));
    CHECK_THROWS(gcx::enumerate_trees(3, -1, false));
}

TEST_CASE("contracting the only inner edge gives the corolla") {
    auto ass = gcx::builtin_operad<Rational>("ass", 4);
    ColoredTree<Rational> t;
    t.shape.n_leaves = 3;
    t.shape.child = {{1, -3}, {-1, -2}};  // ((1 2) 3)
    t.color = {{Rational(1)}, {Rational(1)}};
    auto c = gcx::contract_tree_edge(ass, t, 1);
    CHECK(gcx::tree_encode(c.shape) == "(1 2 3)");
    REQUIRE(c.color[0].size() == 1);
    CHECK(c.color[0][0] == Rational(1));

    auto comm = gcx::builtin_operad<Rational>("comm", 4);
    ColoredTree<Rational> s;
    s.shape.n_leaves = 3;
    s.shape.child = {{-1, 1}, {-2, -3}};  // (1 (2 3))
    s.color = {{Rational(1)}, {Rational(1)}};
    auto cs = gcx::contract_tree_edge(comm, s, 1);
    CHECK(gcx::tree_encode(cs.shape) == "(1 2 3)");
    CHECK(cs.color[0][0] == Rational(1));
}

TEST_CASE("contraction reorder agrees with direct substitution of multilinear maps") {
    // Tree ((1 4) 2 3): the merged children arrive in composition order
    // 1,4,2,3 and must be re-sorted through the input action.  The
    // endomorphism operad computes the same operation by substitution.
    const int d = 2;
    auto h = gcx::DenseMat<Rational>::identity(d);
    auto E = gcxtest::end_operad<Rational>(d, h, 4);
    REQUIRE(E.validate().ok);

    std::vector<Rational> p(16), q(8);
    for (int i = 0; i < 16; ++i) p[static_cast<size_t>(i)] = Rational((i * 7 + 3) % 11 - 5);
    for (int i = 0; i < 8; ++i) q[static_cast<size_t>(i)] = Rational((i * 5 + 1) % 9 - 4);

    ColoredTree<Rational> t;
    t.shape.n_leaves = 4;
    t.shape.child = {{1, -2, -3}, {-1, -4}};
    t.color = {p, q};

    auto c = gcx::contract_tree_edge(E, t, 1);
    REQUIRE(gcx::tree_encode(c.shape) == "(1 2 3 4)");

    // expected: F(x1,x2,x3,x4) = p(q(x1,x4), x2, x3)
    std::vector<Rational> expect(32, Rational(0));
    for (int j1 = 0; j1 < d; ++j1)
        for (int j2 = 0; j2 < d; ++j2)
            for (int j3 = 0; j3 < d; ++j3)
                for (int j4 = 0; j4 < d; ++j4)
                    for (int out = 0; out < d; ++out)
                        for (int m = 0; m < d; ++m)
                            expect[static_cast<size_t>(gcxtest::end_index({j1, j2, j3, j4}, out, d))] +=
                                q[static_cast<size_t>(gcxtest::end_index({j1, j4}, m, d))] *
                                p[static_cast<size_t>(gcxtest::end_index({m, j2, j3}, out, d))];
    CHECK(c.color[0] == expect);
}

TEST_CASE("tree complex oracle: one-dimensional nonsymmetric colors, 3 leaves") {
    auto ass = gcx::builtin_operad<Rational>("ass", 6);
    auto C = gcx::build_tree_complex(ass, 3);
    REQUIRE(C.dim(0) == 1);
    REQUIRE(C.dim(1) == 2);
    auto r = dense_row(C.d[1], 0);
    CHECK(r == std::vector<Rational>{Rational(1), Rational(1)});
    CHECK(C.d[1].rank() == 1);
    auto h = gcx::tree_homology_dims(C);
    REQUIRE(h.size() == 2);
    CHECK(h[0] == std::make_pair(0, 0));
    CHECK(h[1] == std::make_pair(1, 1));
}

TEST_CASE("tree complex oracle: one-dimensional symmetric colors, 3 leaves") {
    auto comm = gcx::builtin_operad<Rational>("comm", 6);
    auto C = gcx::build_tree_complex(comm, 3);
    REQUIRE(C.dim(0) == 1);
    REQUIRE(C.dim(1) == 3);
    auto r = dense_row(C.d[1], 0);
    CHECK(r == std::vector<Rational>(3, Rational(1)));
    auto h = gcx::tree_homology_dims(C);
    CHECK(h[0] == std::make_pair(0, 0));
    CHECK(h[1] == std::make_pair(1, 2));
}

TEST_CASE("differential squares to zero on one-dimensional colors") {
    auto ass = gcx::builtin_operad<Rational>("ass", 6);
    auto comm = gcx::builtin_operad<Rational>("comm", 6);
    for (int n = 2; n <= 6; ++n) {
        CHECK(all_squares_vanish(gcx::build_tree_complex(ass, n)));
        CHECK(all_squares_vanish(gcx::build_tree_complex(comm, n)));
    }
}

TEST_CASE("differential squares to zero on endomorphism colors") {
    auto h = gcx::DenseMat<Rational>::identity(2);
    auto E = gcxtest::end_operad<Rational>(2, h, 4);
    REQUIRE(E.validate().ok);
    for (int n = 3; n <= 4; ++n) {
        auto C = gcx::build_tree_complex(E, n);
        CHECK(all_squares_vanish(C));
    }
}

TEST_CASE("euler characteristic matches through homology") {
    auto comm = gcx::builtin_operad<Rational>("comm", 5);
    for (int n = 3; n <= 5; ++n) {
        auto C = gcx::build_tree_complex(comm, n);
        auto h = gcx::tree_homology_dims(C);
        long chain = 0, homology = 0;
        for (int i = 0; i <= n - 2; ++i) {
            int s = (i % 2 == 0) ? 1 : -1;
            chain += s * C.dim(i);
            homology += s * h[static_cast<size_t>(i)].second;
        }
        CHECK(chain == homology);
    }
}

TEST_CASE("homology concentrates in the top degree") {
    auto ass = gcx::builtin_operad<Rational>("ass", 6);
    std::vector<int> ass_dims;
    for (int n = 2; n <= 5; ++n) {
        auto rep = gcx::koszul_concentration_check(ass, n);
        CHECK(rep.concentrated);
        ass_dims.push_back(rep.top_dim);
    }
    CHECK(ass_dims == std::vector<int>{1, 1, 1, 1});

    auto comm = gcx::builtin_operad<Rational>("comm", 6);
    std::vector<int> comm_dims;
    for (int n = 2; n <= 5; ++n) {
        auto rep = gcx::koszul_concentration_check(comm, n);
        CHECK(rep.concentrated);
        comm_dims.push_back(rep.top_dim);
    }
    CHECK(comm_dims == std::vector<int>{1, 2, 6, 24});
}

TEST_CASE("homology dimensions agree over a large prime field") {
    auto comm_q = gcx::builtin_operad<Rational>("comm", 4);
    auto comm_p = gcx::builtin_operad<PrimeField>("comm", 4, 1000003);
    auto hq = gcx::tree_homology_dims(gcx::build_tree_complex(comm_q, 4));
    auto hp = gcx::tree_homology_dims(gcx::build_tree_complex(comm_p, 4));
    CHECK(hq == hp);
}
