#pragma once

// Shared test oracles.  The endomorphism operad built here is an
// independent model: compositions come from substituting multilinear
// maps, actions from permuting arguments, and the rotation from the
// bilinear form.  Feeding it to the axiom checker validates both sides.

#include "gcx/operad.hpp"

#include <stdexcept>
#include <vector>

namespace gcxtest {

using gcx::DenseMat;
using gcx::Operad;
using gcx::Perm;

template <class K>
DenseMat<K> dense_inverse(const DenseMat<K>& m) {
    int n = m.rows;
    DenseMat<K> a = m;
    DenseMat<K> inv = DenseMat<K>::identity(n);
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (!gcx::is_zero(a.at(r, c))) { piv = r; break; }
        if (piv < 0) throw std::invalid_argument("singular matrix");
        for (int j = 0; j < n; ++j) {
            std::swap(a.at(c, j), a.at(piv, j));
            std::swap(inv.at(c, j), inv.at(piv, j));
        }
        K lead = a.at(c, c);
        for (int j = 0; j < n; ++j) {
            a.at(c, j) = a.at(c, j) / lead;
            inv.at(c, j) = inv.at(c, j) / lead;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c || gcx::is_zero(a.at(r, c))) continue;
            K f = a.at(r, c);
            for (int j = 0; j < n; ++j) {
                a.at(r, j) -= f * a.at(c, j);
                inv.at(r, j) -= f * inv.at(c, j);
            }
        }
    }
    return inv;
}

// Basis of Hom(V^k, V): index = (j_1 ... j_k ; j_0), inputs first, output
// last, mixed-radix with j_1 most significant.
inline int end_index(const std::vector<int>& inputs, int out, int d) {
    int idx = 0;
    for (int j : inputs) idx = idx * d + j;
    return idx * d + out;
}

template <class K>
Operad<K> end_operad(int d, const DenseMat<K>& h, int max_arity) {
    Operad<K> P;
    P.name = "end";
    P.symmetric = true;
    P.cyclic = true;
    P.max_arity = max_arity;
    P.dims.assign(static_cast<size_t>(max_arity) + 1, 0);
    DenseMat<K> nu = dense_inverse(h);

    auto dim_of = [&](int n) {
        int t = 1;
        for (int i = 0; i <= n; ++i) t *= d;
        return t;
    };
    auto unpack = [&](int idx, int n) {
        std::vector<int> word(static_cast<size_t>(n) + 1);  // inputs then output
        for (int m = n; m >= 0; --m) {
            word[static_cast<size_t>(m)] = idx % d;
            idx /= d;
        }
        return word;  // word[0..n-1] inputs, word[n] output
    };

    for (int n = 2; n <= max_arity; ++n) {
        int dn = dim_of(n);
        P.dims[static_cast<size_t>(n)] = dn;

        auto perm_action = [&](const Perm& sigma) {
            DenseMat<K> m(dn, dn);
            Perm inv = gcx::perm_inverse(sigma);
            for (int idx = 0; idx < dn; ++idx) {
                auto w = unpack(idx, n);
                std::vector<int> nw(static_cast<size_t>(n));
                for (int t = 0; t < n; ++t)
                    nw[static_cast<size_t>(t)] = w[static_cast<size_t>(inv[static_cast<size_t>(t)])];
                m.at(end_index(nw, w[static_cast<size_t>(n)], d), idx) = K(1);
            }
            return m;
        };
        P.gen_action[n]["transposition"] = perm_action(gcx::detail::sym_gen_transposition(n));
        if (n > 2) P.gen_action[n]["cycle"] = perm_action(gcx::detail::sym_gen_cycle(n));

        DenseMat<K> rot(dn, dn);
        for (int idx = 0; idx < dn; ++idx) {
            auto w = unpack(idx, n);  // inputs j_1..j_n, output j_0
            int j0 = w[static_cast<size_t>(n)];
            for (int s = 0; s < d; ++s) {
                if (gcx::is_zero(h.at(s, j0))) continue;
                for (int t = 0; t < d; ++t) {
                    if (gcx::is_zero(nu.at(w[0], t))) continue;
                    std::vector<int> nw(w.begin() + 1, w.begin() + n);  // j_2..j_n
                    nw.push_back(s);
                    rot.at(end_index(nw, t, d), idx) += h.at(s, j0) * nu.at(w[0], t);
                }
            }
        }
        P.gen_action[n]["rotation"] = std::move(rot);
    }

    for (int k = 2; k <= max_arity; ++k)
        for (int l = 2; k + l - 1 <= max_arity; ++l)
            for (int i = 1; i <= k; ++i) {
                int dk = dim_of(k), dl = dim_of(l), dn = dim_of(k + l - 1);
                DenseMat<K> m(dk * dl, dn);
                for (int fa = 0; fa < dk; ++fa) {
                    auto f = unpack(fa, k);
                    for (int gb = 0; gb < dl; ++gb) {
                        auto g = unpack(gb, l);
                        if (f[static_cast<size_t>(i - 1)] != g[static_cast<size_t>(l)]) continue;
                        std::vector<int> w;
                        for (int t = 0; t < i - 1; ++t) w.push_back(f[static_cast<size_t>(t)]);
                        for (int t = 0; t < l; ++t) w.push_back(g[static_cast<size_t>(t)]);
                        for (int t = i; t < k; ++t) w.push_back(f[static_cast<size_t>(t)]);
                        m.at(fa * dl + gb, end_index(w, f[static_cast<size_t>(k)], d)) = K(1);
                    }
                }
                P.comp[{k, l, i}] = std::move(m);
            }

    return P;
}

} // namespace gcxtest
