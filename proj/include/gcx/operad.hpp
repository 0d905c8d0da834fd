#pragma once

// Finite-dimensional operads truncated at a maximal arity, given by
// structure constants for the partial compositions o_i together with
// symmetric-group actions (symmetric flavor) and the cyclic extension
// (rotation of the n+1 slots of an n-ary operation).
//
// Conventions, fixed once and validated by the axiom checker:
//  * input action, left:  (sigma.a)(x_1,...,x_k) = a(x_{sigma(1)},...,x_{sigma(k)}),
//    with matrices composing as M_{sigma o tau} = M_sigma M_tau;
//  * rotation tau on an n-ary operation moves the output to the last
//    input slot: in tensor form T_{tau.a}(y_0,...,y_n) = T_a(y_n, y_0,...,y_{n-1});
//    as a permutation of the slots {0..n} this is omega(0)=n, omega(j)=j-1;
//  * compatibility with composition:
//      tau(a o_i b) = tau(a) o_{i-1} b          for 2 <= i <= k,
//      tau(a o_1 b) = tau(b) o_l tau(a).

#include "gcx/format.hpp"
#include "gcx/perm.hpp"
#include "gcx/scalar.hpp"

#include <array>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace gcx {

template <class K>
struct DenseMat {
    int rows = 0, cols = 0;
    std::vector<K> a;

    DenseMat() = default;
    DenseMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, K(0)) {}

    K& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    const K& at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    static DenseMat identity(int n) {
        DenseMat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = K(1);
        return m;
    }

    std::vector<K> apply(const std::vector<K>& x) const {
        std::vector<K> y(static_cast<size_t>(rows), K(0));
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                if (!is_zero(at(r, c))) y[static_cast<size_t>(r)] += at(r, c) * x[static_cast<size_t>(c)];
        return y;
    }

    DenseMat mul(const DenseMat& o) const {
        DenseMat m(rows, o.cols);
        for (int r = 0; r < rows; ++r)
            for (int k = 0; k < cols; ++k) {
                if (is_zero(at(r, k))) continue;
                for (int c = 0; c < o.cols; ++c)
                    m.at(r, c) += at(r, k) * o.at(k, c);
            }
        return m;
    }

    DenseMat transpose() const {
        DenseMat m(cols, rows);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m.at(c, r) = at(r, c);
        return m;
    }

    bool operator==(const DenseMat& o) const {
        if (rows != o.rows || cols != o.cols) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (!is_zero(a[i] - o.a[i])) return false;
        return true;
    }
};

template <class K>
bool vec_equal(const std::vector<K>& x, const std::vector<K>& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
        if (!is_zero(x[i] - y[i])) return false;
    return true;
}

template <class K>
bool vec_is_zero(const std::vector<K>& x) {
    for (const auto& v : x)
        if (!is_zero(v)) return false;
    return true;
}

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> errors;

    void fail(const std::string& msg) {
        ok = false;
        if (errors.size() < 200) errors.push_back(msg);
    }

    std::string joined() const {
        std::string s;
        for (const auto& e : errors) {
            s += e;
            s += "\n";
        }
        return s;
    }
};

// Multiplies generator pairs (permutation, matrix) out to the full group
// they generate.  Revisiting a permutation with a different matrix is an
// inconsistency and is reported.
template <class K>
void group_closure(const std::vector<std::pair<Perm, DenseMat<K>>>& gens,
                   std::map<Perm, DenseMat<K>>& table, ValidationReport& report,
                   const std::string& where) {
    if (gens.empty()) return;
    size_t deg = gens.front().first.size();
    table.clear();
    table[perm_identity(static_cast<int>(deg))] =
        DenseMat<K>::identity(gens.front().second.rows);
    std::vector<Perm> queue{perm_identity(static_cast<int>(deg))};
    while (!queue.empty()) {
        Perm p = queue.back();
        queue.pop_back();
        DenseMat<K> mp = table.at(p);
        for (const auto& [g, mg] : gens) {
            if (g.size() != deg) {
                report.fail(where + ": generator degree mismatch");
                return;
            }
            Perm np = perm_compose(p, g);
            DenseMat<K> nm = mp.mul(mg);
            auto it = table.find(np);
            if (it == table.end()) {
                table.emplace(np, std::move(nm));
                queue.push_back(std::move(np));
            } else if (!(it->second == nm)) {
                report.fail(where + ": generators induce conflicting matrices on a group element");
                return;
            }
        }
    }
}

namespace detail {

inline long long factorial_capped(int n, long long cap) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) {
        f *= i;
        if (f > cap) return cap + 1;
    }
    return f;
}

inline bool is_perm_vector(const Perm& p) {
    std::vector<char> seen(p.size(), 0);
    for (int x : p) {
        if (x < 0 || x >= static_cast<int>(p.size()) || seen[static_cast<size_t>(x)]) return false;
        seen[static_cast<size_t>(x)] = 1;
    }
    return true;
}

// Writes sigma as a left-to-right product of adjacent transpositions
// s_i = (i, i+1): sigma = s_{w[0]} . s_{w[1]} . ... under the convention
// (a.b)(x) = a(b(x)), so the matrix is the product of the s-matrices in
// the returned order.
inline std::vector<int> adjacent_word(Perm sigma) {
    std::vector<int> w;
    bool moved = true;
    while (moved) {
        moved = false;
        for (int i = 0; i + 1 < static_cast<int>(sigma.size()); ++i)
            if (sigma[static_cast<size_t>(i)] > sigma[static_cast<size_t>(i) + 1]) {
                std::swap(sigma[static_cast<size_t>(i)], sigma[static_cast<size_t>(i) + 1]);
                w.push_back(i);
                moved = true;
            }
    }
    std::reverse(w.begin(), w.end());
    return w;
}

template <class K>
DenseMat<K> mat_pow(const DenseMat<K>& m, int e) {
    DenseMat<K> r = DenseMat<K>::identity(m.rows);
    for (int i = 0; i < e; ++i) r = r.mul(m);
    return r;
}

// Moore's defining relations for S_m on the images of the transposition
// (1 2) and the cycle (1 2 ... m) (both in the cycle's own numbering).
// A generator pair satisfying them extends to a well-defined matrix
// representation of S_m, which is what licenses lazy factorization.
template <class K>
void check_moore_relations(int m, const DenseMat<K>& T, const DenseMat<K>& C,
                           ValidationReport& rep, const std::string& where) {
    DenseMat<K> I = DenseMat<K>::identity(T.rows);
    std::vector<DenseMat<K>> cpow{I};
    for (int i = 1; i <= m; ++i) cpow.push_back(cpow.back().mul(C));
    if (!(T.mul(T) == I)) rep.fail(where + ": transposition image is not an involution");
    if (!(cpow[static_cast<size_t>(m)] == I)) rep.fail(where + ": cycle image has wrong order");
    DenseMat<K> tc = T.mul(C);
    if (!(mat_pow(tc, m - 1) == I)) rep.fail(where + ": (t c)^(m-1) relation fails");
    for (int j = 2; 2 * j <= m; ++j) {
        DenseMat<K> x =
            T.mul(cpow[static_cast<size_t>(m - j)]).mul(T).mul(cpow[static_cast<size_t>(j)]);
        if (!(x.mul(x) == I))
            rep.fail(where + ": braid relation fails at offset " + std::to_string(j));
    }
}

} // namespace detail

template <class K>
class Operad {
public:
    std::string name;
    bool symmetric = false;
    bool cyclic = false;
    int max_arity = 2;
    std::vector<int> dims;                                    // index = arity, 0 below arity 2
    std::map<int, std::vector<std::string>> labels;           // arity -> basis labels
    std::map<std::array<int, 3>, DenseMat<K>> comp;           // (k,l,i) -> (d_k*d_l) x d_{k+l-1}
    std::map<int, std::map<std::string, DenseMat<K>>> gen_action;  // arity -> generator -> matrix

    // Built by validate().  Groups of order at most kEagerGroupCap are
    // closed eagerly (every element present, consistency checked by the
    // closure itself).  Larger symmetric groups are validated against the
    // defining relations of S_m once and then filled lazily, one requested
    // permutation at a time, so truncations with high-arity components do
    // not materialize factorially many matrices.  The lazy fill mutates
    // these caches behind const accessors; the engine is single-threaded.
    static constexpr long long kEagerGroupCap = 40320;
    mutable std::map<int, std::map<Perm, DenseMat<K>>> input_action;  // S_n tables (symmetric flavor)
    mutable std::map<int, std::map<Perm, DenseMat<K>>> slot_action;   // S_{n+1} or C_{n+1} tables (cyclic)
    mutable std::map<int, std::vector<DenseMat<K>>> input_adjacent_;  // s_i = (i,i+1) matrices, lazy
    mutable std::map<int, std::vector<DenseMat<K>>> slot_adjacent_;   // s_i on slots {0..n}, lazy
    std::map<int, bool> input_lazy_;   // arity -> table is lazy (relation-checked)
    std::map<int, bool> slot_lazy_;

    int dim(int n) const {
        if (n < 2 || n >= static_cast<int>(dims.size())) return 0;
        return dims[static_cast<size_t>(n)];
    }

    const DenseMat<K>& comp_matrix(int k, int l, int i) const {
        auto it = comp.find({k, l, i});
        if (it == comp.end()) {
            std::ostringstream os;
            os << name << ": no composition data for (k,l,i)=(" << k << "," << l << "," << i
               << "); arity beyond truncation?";
            throw std::out_of_range(os.str());
        }
        return it->second;
    }

    std::vector<K> compose(int k, int l, int i, const std::vector<K>& p,
                           const std::vector<K>& q) const {
        const DenseMat<K>& m = comp_matrix(k, l, i);
        int dl = dim(l), dn = dim(k + l - 1);
        std::vector<K> out(static_cast<size_t>(dn), K(0));
        for (int al = 0; al < dim(k); ++al) {
            if (is_zero(p[static_cast<size_t>(al)])) continue;
            for (int be = 0; be < dl; ++be) {
                if (is_zero(q[static_cast<size_t>(be)])) continue;
                K f = p[static_cast<size_t>(al)] * q[static_cast<size_t>(be)];
                int row = al * dl + be;
                for (int g = 0; g < dn; ++g)
                    if (!is_zero(m.at(row, g))) out[static_cast<size_t>(g)] += f * m.at(row, g);
            }
        }
        return out;
    }

    const DenseMat<K>& gen_matrix(int n, const char* key) const {
        auto an = gen_action.find(n);
        if (an == gen_action.end()) throw std::out_of_range("no generator actions for arity");
        auto it = an->second.find(key);
        if (it == an->second.end())
            throw std::out_of_range(std::string("missing generator action: ") + key);
        return it->second;
    }

    const DenseMat<K>& input_matrix(int n, const Perm& sigma) const {
        auto tn = input_action.find(n);
        if (tn == input_action.end()) throw std::out_of_range("no input action table for arity");
        auto it = tn->second.find(sigma);
        if (it != tn->second.end()) return it->second;
        auto lz = input_lazy_.find(n);
        if (lz == input_lazy_.end() || !lz->second)
            throw std::out_of_range("permutation outside closed group");
        if (static_cast<int>(sigma.size()) != n || !detail::is_perm_vector(sigma))
            throw std::out_of_range("permutation outside closed group");
        auto& adj = input_adjacent_[n];
        if (adj.empty()) {
            const DenseMat<K>& t = gen_matrix(n, "transposition");
            const DenseMat<K>& c = gen_matrix(n, "cycle");
            std::vector<DenseMat<K>> cpow{DenseMat<K>::identity(t.rows)};
            for (int i = 1; i <= n; ++i) cpow.push_back(cpow.back().mul(c));
            for (int i = 0; i + 1 < n; ++i)
                adj.push_back(cpow[static_cast<size_t>(i)].mul(t).mul(
                    cpow[static_cast<size_t>(n - i)]));
        }
        DenseMat<K> m = DenseMat<K>::identity(dim(n));
        for (int a : detail::adjacent_word(sigma)) m = m.mul(adj[static_cast<size_t>(a)]);
        auto [pos, inserted] = tn->second.emplace(sigma, std::move(m));
        (void)inserted;
        return pos->second;
    }

    std::vector<K> act_input(int n, const Perm& sigma, const std::vector<K>& p) const {
        if (!symmetric) {
            if (sigma == perm_identity(n)) return p;
            throw std::logic_error("nonsymmetric operad has no input action");
        }
        return input_matrix(n, sigma).apply(p);
    }

    const DenseMat<K>& slot_matrix(int n, const Perm& sigma) const {
        auto tn = slot_action.find(n);
        if (tn == slot_action.end()) throw std::out_of_range("no slot action table for arity");
        auto it = tn->second.find(sigma);
        if (it != tn->second.end()) return it->second;
        auto lz = slot_lazy_.find(n);
        if (lz == slot_lazy_.end() || !lz->second)
            throw std::out_of_range("slot permutation outside closed group");
        if (static_cast<int>(sigma.size()) != n + 1 || !detail::is_perm_vector(sigma))
            throw std::out_of_range("slot permutation outside closed group");
        auto& adj = slot_adjacent_[n];
        if (adj.empty()) {
            const DenseMat<K>& nrot = gen_matrix(n, "rotation");
            const DenseMat<K>& t = gen_matrix(n, "transposition");
            DenseMat<K> cp = detail::mat_pow(nrot, n);            // image of (0 1 ... n)
            DenseMat<K> tp = nrot.mul(t).mul(cp);                  // image of (0 1)
            std::vector<DenseMat<K>> cpow{DenseMat<K>::identity(cp.rows)};
            for (int i = 1; i <= n + 1; ++i) cpow.push_back(cpow.back().mul(cp));
            for (int i = 0; i < n; ++i)
                adj.push_back(cpow[static_cast<size_t>(i)].mul(tp).mul(
                    cpow[static_cast<size_t>(n + 1 - i)]));
        }
        DenseMat<K> m = DenseMat<K>::identity(dim(n));
        for (int a : detail::adjacent_word(sigma)) m = m.mul(adj[static_cast<size_t>(a)]);
        auto [pos, inserted] = tn->second.emplace(sigma, std::move(m));
        (void)inserted;
        return pos->second;
    }

    // Rotation generator: output slot moves to the last input.
    Perm rotation_perm(int n) const {
        Perm w(static_cast<size_t>(n + 1));
        w[0] = n;
        for (int j = 1; j <= n; ++j) w[static_cast<size_t>(j)] = j - 1;
        return w;
    }

    std::vector<K> cyclic_rotate(int n, const std::vector<K>& p) const {
        if (!cyclic) throw std::logic_error("operad is not cyclic");
        return slot_matrix(n, rotation_perm(n)).apply(p);
    }

    ValidationReport validate();
};

namespace detail {

inline Perm sym_gen_transposition(int n) {
    Perm p = perm_identity(n);
    if (n >= 2) std::swap(p[0], p[1]);
    return p;
}

inline Perm sym_gen_cycle(int n) {
    Perm p(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) p[static_cast<size_t>(j)] = (j + 1) % n;
    return p;
}

inline Perm embed_fixing_zero(const Perm& sigma) {
    Perm p(sigma.size() + 1);
    p[0] = 0;
    for (size_t j = 0; j < sigma.size(); ++j) p[j + 1] = sigma[j] + 1;
    return p;
}


} // namespace detail

template <class K>
ValidationReport Operad<K>::validate() {
    ValidationReport rep;

    if (max_arity < 2) rep.fail(name + ": max_arity must be at least 2");
    if (static_cast<int>(dims.size()) < max_arity + 1) dims.resize(static_cast<size_t>(max_arity) + 1, 0);
    for (int n = 2; n <= max_arity; ++n)
        if (dim(n) <= 0) rep.fail(name + ": arity " + std::to_string(n) + " has no component");
    if (!rep.ok) return rep;

    for (int k = 2; k <= max_arity; ++k)
        for (int l = 2; k + l - 1 <= max_arity; ++l)
            for (int i = 1; i <= k; ++i) {
                auto it = comp.find({k, l, i});
                if (it == comp.end()) {
                    rep.fail(name + ": missing composition (k,l,i)=(" + std::to_string(k) + "," +
                             std::to_string(l) + "," + std::to_string(i) + ")");
                    continue;
                }
                if (it->second.rows != dim(k) * dim(l) || it->second.cols != dim(k + l - 1))
                    rep.fail(name + ": composition (" + std::to_string(k) + "," + std::to_string(l) +
                             "," + std::to_string(i) + ") has wrong shape");
            }
    if (!rep.ok) return rep;

    // Group actions.  For the symmetric flavor close the S_n tables from
    // the recorded generators; when cyclic, close the slot tables over
    // S_{n+1} (symmetric) or C_{n+1} (nonsymmetric).  Groups beyond the
    // eager cap are instead checked against the defining relations of S_m
    // and served lazily by input_matrix/slot_matrix.
    input_action.clear();
    slot_action.clear();
    input_adjacent_.clear();
    slot_adjacent_.clear();
    input_lazy_.clear();
    slot_lazy_.clear();
    for (int n = 2; n <= max_arity; ++n) {
        std::vector<std::pair<Perm, DenseMat<K>>> in_gens;
        std::vector<std::pair<Perm, DenseMat<K>>> slot_gens;
        auto an = gen_action.find(n);
        auto get = [&](const char* key) -> const DenseMat<K>* {
            if (an == gen_action.end()) return nullptr;
            auto it = an->second.find(key);
            return it == an->second.end() ? nullptr : &it->second;
        };
        if (symmetric) {
            const DenseMat<K>* tr = get("transposition");
            if (!tr) {
                rep.fail(name + ": arity " + std::to_string(n) + " lacks the transposition action");
                continue;
            }
            in_gens.emplace_back(detail::sym_gen_transposition(n), *tr);
            if (n > 2) {
                const DenseMat<K>* cy = get("cycle");
                if (!cy) {
                    rep.fail(name + ": arity " + std::to_string(n) + " lacks the cycle action");
                    continue;
                }
                in_gens.emplace_back(detail::sym_gen_cycle(n), *cy);
            }
            for (auto& [g, m] : in_gens)
                if (m.rows != dim(n) || m.cols != dim(n))
                    rep.fail(name + ": action matrix shape mismatch at arity " + std::to_string(n));
            if (!rep.ok) return rep;
            if (detail::factorial_capped(n, kEagerGroupCap) <= kEagerGroupCap) {
                group_closure(in_gens, input_action[n], rep,
                              name + ": S_" + std::to_string(n) + " closure at arity " + std::to_string(n));
            } else {
                input_lazy_[n] = true;
                detail::check_moore_relations(
                    n, *get("transposition"), *get("cycle"), rep,
                    name + ": input action at arity " + std::to_string(n));
                auto& tbl = input_action[n];
                tbl[perm_identity(n)] = DenseMat<K>::identity(dim(n));
                for (auto& [g, m] : in_gens) tbl[g] = m;
            }
            for (auto& [g, m] : in_gens) slot_gens.emplace_back(detail::embed_fixing_zero(g), m);
        }
        if (cyclic) {
            const DenseMat<K>* rot = get("rotation");
            if (!rot) {
                rep.fail(name + ": arity " + std::to_string(n) + " lacks the rotation action");
                continue;
            }
            if (rot->rows != dim(n) || rot->cols != dim(n))
                rep.fail(name + ": rotation matrix shape mismatch at arity " + std::to_string(n));
            if (!rep.ok) return rep;
            slot_gens.emplace_back(rotation_perm(n), *rot);
            long long sord = symmetric ? detail::factorial_capped(n + 1, kEagerGroupCap)
                                       : static_cast<long long>(n + 1);
            if (sord <= kEagerGroupCap) {
                group_closure(slot_gens, slot_action[n], rep,
                              name + ": slot-group closure at arity " + std::to_string(n));
            } else {
                if (!symmetric) {
                    rep.fail(name + ": cyclic slot group too large to close at arity " +
                             std::to_string(n));
                    continue;
                }
                slot_lazy_[n] = true;
                const DenseMat<K>& nm = *rot;
                const DenseMat<K>& tm = *get("transposition");
                const DenseMat<K>& cm = *get("cycle");
                DenseMat<K> eye = DenseMat<K>::identity(dim(n));
                DenseMat<K> ninv = detail::mat_pow(nm, n);
                std::string where = name + ": slot action at arity " + std::to_string(n);
                if (!(ninv.mul(nm) == eye)) rep.fail(where + ": rotation image has wrong order");
                if (!(nm.mul(tm).mul(detail::mat_pow(nm, n - 1)) == cm))
                    rep.fail(where + ": rotation and cycle actions are incompatible");
                detail::check_moore_relations(n + 1, nm.mul(tm).mul(ninv), ninv, rep, where);
                auto& tbl = slot_action[n];
                tbl[perm_identity(n + 1)] = DenseMat<K>::identity(dim(n));
                for (auto& [g, m] : slot_gens) tbl[g] = m;
            }
        }
    }
    if (!rep.ok) return rep;

    auto basis = [&](int n) {
        std::vector<std::vector<K>> b;
        for (int i = 0; i < dim(n); ++i) {
            std::vector<K> e(static_cast<size_t>(dim(n)), K(0));
            e[static_cast<size_t>(i)] = K(1);
            b.push_back(std::move(e));
        }
        return b;
    };

    // Associativity on all basis triples within the truncation.
    for (int k = 2; k <= max_arity; ++k)
        for (int l = 2; l <= max_arity; ++l)
            for (int m = 2; k + l + m - 2 <= max_arity; ++m) {
                if (l + m - 1 > max_arity || k + l - 1 > max_arity) continue;
                for (const auto& a : basis(k))
                    for (const auto& b : basis(l))
                        for (const auto& c : basis(m)) {
                            for (int i = 1; i <= k; ++i) {
                                for (int j = 1; j <= l; ++j) {
                                    auto lhs = compose(k + l - 1, m, i + j - 1, compose(k, l, i, a, b), c);
                                    auto rhs = compose(k, l + m - 1, i, a, compose(l, m, j, b, c));
                                    if (!vec_equal(lhs, rhs))
                                        rep.fail(name + ": sequential associativity fails at (k,l,m,i,j)=(" +
                                                 std::to_string(k) + "," + std::to_string(l) + "," +
                                                 std::to_string(m) + "," + std::to_string(i) + "," +
                                                 std::to_string(j) + ")");
                                }
                                for (int j = i + 1; j <= k; ++j) {
                                    auto lhs = compose(k + l - 1, m, j + l - 1, compose(k, l, i, a, b), c);
                                    auto rhs = compose(k + m - 1, l, i, compose(k, m, j, a, c), b);
                                    if (!vec_equal(lhs, rhs))
                                        rep.fail(name + ": parallel associativity fails at (k,l,m,i,j)=(" +
                                                 std::to_string(k) + "," + std::to_string(l) + "," +
                                                 std::to_string(m) + "," + std::to_string(i) + "," +
                                                 std::to_string(j) + ")");
                                }
                            }
                        }
            }

    // Equivariance of composition under the recorded generators.
    if (symmetric) {
        for (int k = 2; k <= max_arity; ++k)
            for (int l = 2; k + l - 1 <= max_arity; ++l) {
                int n = k + l - 1;
                std::vector<Perm> kgens{detail::sym_gen_transposition(k)};
                if (k > 2) kgens.push_back(detail::sym_gen_cycle(k));
                std::vector<Perm> lgens{detail::sym_gen_transposition(l)};
                if (l > 2) lgens.push_back(detail::sym_gen_cycle(l));
                for (const auto& a : basis(k))
                    for (const auto& b : basis(l)) {
                        for (int i = 1; i <= k; ++i) {
                            for (const auto& sg : kgens) {
                                int j0 = static_cast<int>(
                                             std::distance(sg.begin(),
                                                           std::find(sg.begin(), sg.end(), i - 1))) + 1;
                                auto lhs = compose(k, l, i, act_input(k, sg, a), b);
                                auto rhs = act_input(n, block_perm_outer(sg, i, l),
                                                     compose(k, l, j0, a, b));
                                if (!vec_equal(lhs, rhs))
                                    rep.fail(name + ": outer equivariance fails at (k,l,i)=(" +
                                             std::to_string(k) + "," + std::to_string(l) + "," +
                                             std::to_string(i) + ")");
                            }
                            for (const auto& tg : lgens) {
                                auto lhs = compose(k, l, i, a, act_input(l, tg, b));
                                auto rhs = act_input(n, block_perm_inner(k, i, tg),
                                                     compose(k, l, i, a, b));
                                if (!vec_equal(lhs, rhs))
                                    rep.fail(name + ": inner equivariance fails at (k,l,i)=(" +
                                             std::to_string(k) + "," + std::to_string(l) + "," +
                                             std::to_string(i) + ")");
                            }
                        }
                    }
            }
    }

    // Cyclic compatibility.
    if (cyclic) {
        auto rot = [&](int n, const std::vector<K>& v) { return cyclic_rotate(n, v); };
        for (int k = 2; k <= max_arity; ++k)
            for (int l = 2; k + l - 1 <= max_arity; ++l) {
                int n = k + l - 1;
                for (const auto& a : basis(k))
                    for (const auto& b : basis(l)) {
                        for (int i = 2; i <= k; ++i) {
                            auto lhs = rot(n, compose(k, l, i, a, b));
                            auto rhs = compose(k, l, i - 1, rot(k, a), b);
                            if (!vec_equal(lhs, rhs))
                                rep.fail(name + ": cyclic compatibility fails at (k,l,i)=(" +
                                         std::to_string(k) + "," + std::to_string(l) + "," +
                                         std::to_string(i) + ")");
                        }
                        auto lhs = rot(n, compose(k, l, 1, a, b));
                        auto rhs = compose(l, k, l, rot(l, b), rot(k, a));
                        if (!vec_equal(lhs, rhs))
                            rep.fail(name + ": cyclic wrap compatibility fails at (k,l)=(" +
                                     std::to_string(k) + "," + std::to_string(l) + ")");
                    }
            }
        for (int n = 2; n <= max_arity; ++n) {
            auto& tbl = slot_action.at(n);
            if (tbl.find(perm_identity(n + 1)) == tbl.end())
                rep.fail(name + ": slot group at arity " + std::to_string(n) + " lacks the identity");
        }
    }

    return rep;
}

// ---------------------------------------------------------------------------
// Built-in operads and file I/O.

// prime attaches scalar entries to F_p when K is the prime field; ignored
// over the rationals.
template <class K>
Operad<K> builtin_operad(const std::string& which, int max_arity, std::uint64_t prime = 0) {
    Operad<K> P;
    P.name = which;
    P.max_arity = max_arity;
    P.cyclic = true;
    if (which == "ass") P.symmetric = false;
    else if (which == "comm") P.symmetric = true;
    else throw std::invalid_argument("unknown built-in operad: " + which);

    K one_scalar = scalar_from_rational<K>(Rational(1), prime);
    P.dims.assign(static_cast<size_t>(max_arity) + 1, 0);
    for (int n = 2; n <= max_arity; ++n) {
        P.dims[static_cast<size_t>(n)] = 1;
        P.labels[n] = {which == "ass" ? "mu" + std::to_string(n) : "m" + std::to_string(n)};
        DenseMat<K> one(1, 1);
        one.at(0, 0) = one_scalar;
        if (P.symmetric) {
            P.gen_action[n]["transposition"] = one;
            if (n > 2) P.gen_action[n]["cycle"] = one;
        }
        P.gen_action[n]["rotation"] = one;
    }
    for (int k = 2; k <= max_arity; ++k)
        for (int l = 2; k + l - 1 <= max_arity; ++l)
            for (int i = 1; i <= k; ++i) {
                DenseMat<K> m(1, 1);
                m.at(0, 0) = one_scalar;
                P.comp[{k, l, i}] = std::move(m);
            }
    auto rep = P.validate();
    if (!rep.ok) throw std::logic_error("built-in operad failed validation:\n" + rep.joined());
    return P;
}

template <class K>
DenseMat<K> dense_from_json(const Json& j, std::uint64_t prime) {
    auto rows = matrix_from_json(j);
    int r = static_cast<int>(rows.size());
    int c = r == 0 ? 0 : static_cast<int>(rows.front().size());
    DenseMat<K> m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != c)
            throw std::runtime_error("ragged matrix in document");
        for (int k = 0; k < c; ++k)
            m.at(i, k) = scalar_from_rational<K>(rows[static_cast<size_t>(i)][static_cast<size_t>(k)], prime);
    }
    return m;
}

template <class K>
Operad<K> operad_from_json(const Json& j, std::uint64_t prime) {
    Operad<K> P;
    P.name = require_field(j, "name", "operad").template get<std::string>();
    std::string flavor = require_field(j, "flavor", "operad").template get<std::string>();
    if (flavor == "symmetric") P.symmetric = true;
    else if (flavor == "nonsymmetric") P.symmetric = false;
    else throw std::runtime_error("operad: flavor must be symmetric or nonsymmetric");
    P.cyclic = require_field(j, "cyclic", "operad").template get<bool>();
    P.max_arity = require_field(j, "max_arity", "operad").template get<int>();
    P.dims.assign(static_cast<size_t>(P.max_arity) + 1, 0);

    const Json& comps = require_field(j, "components", "operad");
    for (auto it = comps.begin(); it != comps.end(); ++it) {
        int n = std::stoi(it.key());
        if (n < 2 || n > P.max_arity) throw std::runtime_error("operad: component arity out of range");
        P.dims[static_cast<size_t>(n)] = require_field(*it, "dim", "component").template get<int>();
        if (it->contains("basis_labels"))
            P.labels[n] = (*it)["basis_labels"].template get<std::vector<std::string>>();
    }

    for (const Json& c : require_field(j, "compositions", "operad")) {
        int k = require_field(c, "k", "composition").template get<int>();
        int l = require_field(c, "l", "composition").template get<int>();
        int i = require_field(c, "i", "composition").template get<int>();
        P.comp[{k, l, i}] = dense_from_json<K>(require_field(c, "matrix", "composition"), prime);
    }

    if (j.contains("actions")) {
        for (auto it = j["actions"].begin(); it != j["actions"].end(); ++it) {
            int n = std::stoi(it.key());
            for (auto g = it->begin(); g != it->end(); ++g)
                P.gen_action[n][g.key()] = dense_from_json<K>(*g, prime);
        }
    }

    auto rep = P.validate();
    if (!rep.ok) throw std::runtime_error("operad axiom check failed:\n" + rep.joined());
    return P;
}

inline Json dense_to_json(const DenseMat<Rational>& m) {
    std::vector<std::vector<Rational>> rows;
    for (int r = 0; r < m.rows; ++r) {
        std::vector<Rational> row;
        for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return matrix_to_json(rows);
}

inline Json operad_to_json(const Operad<Rational>& P) {
    Json j;
    j["name"] = P.name;
    j["flavor"] = P.symmetric ? "symmetric" : "nonsymmetric";
    j["cyclic"] = P.cyclic;
    j["max_arity"] = P.max_arity;
    Json comps = Json::object();
    for (int n = 2; n <= P.max_arity; ++n) {
        Json c;
        c["dim"] = P.dim(n);
        auto lb = P.labels.find(n);
        if (lb != P.labels.end()) c["basis_labels"] = lb->second;
        comps[std::to_string(n)] = std::move(c);
    }
    j["components"] = std::move(comps);
    Json cs = Json::array();
    for (const auto& [key, m] : P.comp) {
        Json c;
        c["k"] = key[0];
        c["l"] = key[1];
        c["i"] = key[2];
        c["matrix"] = dense_to_json(m);
        cs.push_back(std::move(c));
    }
    j["compositions"] = std::move(cs);
    Json acts = Json::object();
    for (const auto& [n, gens] : P.gen_action) {
        Json a = Json::object();
        for (const auto& [gname, m] : gens) a[gname] = dense_to_json(m);
        acts[std::to_string(n)] = std::move(a);
    }
    j["actions"] = std::move(acts);
    return j;
}

// Loads a built-in by name ("ass", "comm") or a document from disk.
template <class K>
Operad<K> load_operad(const std::string& name_or_path, int builtin_max_arity,
                      std::uint64_t prime) {
    if (name_or_path == "ass" || name_or_path == "comm")
        return builtin_operad<K>(name_or_path, builtin_max_arity, prime);
    return operad_from_json<K>(load_json_file(name_or_path), prime);
}

} // namespace gcx
