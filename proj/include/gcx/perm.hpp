#pragma once

// Permutations as 0-based image arrays, plus the block substitutions
// that show up in operad equivariance.

#include <numeric>
#include <stdexcept>
#include <vector>

namespace gcx {

using Perm = std::vector<int>;

inline Perm perm_identity(int n) {
    Perm p(static_cast<size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    return p;
}

inline bool is_perm(const Perm& a) {
    std::vector<char> seen(a.size(), 0);
    for (int x : a) {
        if (x < 0 || x >= static_cast<int>(a.size()) || seen[static_cast<size_t>(x)]) return false;
        seen[static_cast<size_t>(x)] = 1;
    }
    return true;
}

// (a after b): (a∘b)(i) = a[b[i]]
inline Perm perm_compose(const Perm& a, const Perm& b) {
    if (a.size() != b.size()) throw std::invalid_argument("perm size mismatch");
    Perm c(a.size());
    for (size_t i = 0; i < b.size(); ++i) c[i] = a[static_cast<size_t>(b[i])];
    return c;
}

inline Perm perm_inverse(const Perm& a) {
    Perm inv(a.size());
    for (size_t i = 0; i < a.size(); ++i) inv[static_cast<size_t>(a[i])] = static_cast<int>(i);
    return inv;
}

inline int perm_parity(const Perm& a) {
    std::vector<char> seen(a.size(), 0);
    int transpositions = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (seen[i]) continue;
        int len = 0;
        size_t j = i;
        while (!seen[j]) {
            seen[j] = 1;
            j = static_cast<size_t>(a[j]);
            ++len;
        }
        transpositions += len - 1;
    }
    return transpositions % 2 == 0 ? 1 : -1;
}

// sigma permutes the k inputs of an operation; a block of l inputs is
// substituted at slot i (1-based).  Returns the induced permutation of
// the k+l-1 inputs of the composite, so that
//   (sigma . a) o_i b  ==  block_perm_outer(sigma, i, l) . (a o_{sigma^{-1}(i)} b).
inline Perm block_perm_outer(const Perm& sigma, int i, int l) {
    int k = static_cast<int>(sigma.size());
    int n = k + l - 1;
    auto shift = [&](int j1) {  // 1-based input index of a -> composite index
        return j1 < i ? j1 : j1 + l - 1;
    };
    int j0 = 0;  // 1-based position with sigma(j0) = i
    for (int j = 1; j <= k; ++j)
        if (sigma[static_cast<size_t>(j - 1)] + 1 == i) j0 = j;
    if (j0 == 0) throw std::logic_error("block_perm_outer: slot not hit");
    Perm pi(static_cast<size_t>(n));
    for (int m = 1; m <= n; ++m) {
        int image;
        if (m < j0) image = shift(sigma[static_cast<size_t>(m - 1)] + 1);
        else if (m <= j0 + l - 1) image = i + (m - j0);
        else image = shift(sigma[static_cast<size_t>(m - l)] + 1);
        pi[static_cast<size_t>(m - 1)] = image - 1;
    }
    return pi;
}

// tau permutes the l inputs of the substituted block at slot i of a k-ary
// operation:  a o_i (tau . b) == block_perm_inner(k, i, tau) . (a o_i b).
inline Perm block_perm_inner(int k, int i, const Perm& tau) {
    int l = static_cast<int>(tau.size());
    int n = k + l - 1;
    Perm pi = perm_identity(n);
    for (int r = 0; r < l; ++r)
        pi[static_cast<size_t>(i - 1 + r)] = i - 1 + tau[static_cast<size_t>(r)];
    return pi;
}

} // namespace gcx
