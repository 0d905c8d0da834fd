#pragma once

// Exact sparse linear algebra over a field K: matrix assembly, reduced
// echelon form with Markowitz-style pivoting, rank, kernel bases, linear
// solves and quotient-space bases.  Everything is deterministic: pivot
// ties break toward the lowest column, then the lowest row.

#include "gcx/scalar.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gcx {

template <class K>
using SparseVec = std::vector<std::pair<int, K>>;  // sorted by index, no zeros

template <class K>
SparseVec<K> sparsify(const std::vector<K>& dense) {
    SparseVec<K> v;
    for (int i = 0; i < static_cast<int>(dense.size()); ++i)
        if (!is_zero(dense[i])) v.emplace_back(i, dense[i]);
    return v;
}

template <class K>
std::vector<K> densify(const SparseVec<K>& v, int n) {
    std::vector<K> d(static_cast<size_t>(n), K(0));
    for (const auto& [i, x] : v) d[static_cast<size_t>(i)] = x;
    return d;
}

template <class K>
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_(static_cast<size_t>(rows)) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    void add(int r, int c, const K& x) {
        if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw std::out_of_range("sparse add");
        if (is_zero(x)) return;
        pending_.push_back({r, c, x});
    }

    // Folds accumulated (row, col, value) triplets into sorted rows,
    // summing duplicates and dropping exact zeros.
    void finalize() {
        if (pending_.empty()) return;
        std::vector<std::map<int, K>> acc(static_cast<size_t>(rows_));
        for (size_t r = 0; r < row_.size(); ++r)
            for (auto& [c, x] : row_[r]) acc[r][c] = x;
        for (auto& t : pending_) {
            auto& cell = acc[static_cast<size_t>(t.r)];
            auto it = cell.find(t.c);
            if (it == cell.end()) cell.emplace(t.c, t.x);
            else {
                it->second += t.x;
                if (is_zero(it->second)) cell.erase(it);
            }
        }
        pending_.clear();
        for (size_t r = 0; r < row_.size(); ++r)
            row_[r] = SparseVec<K>(acc[r].begin(), acc[r].end());
    }

    const SparseVec<K>& row(int r) const {
        require_final();
        return row_[static_cast<size_t>(r)];
    }

    K at(int r, int c) const {
        require_final();
        for (const auto& [cc, x] : row_[static_cast<size_t>(r)])
            if (cc == c) return x;
        return K(0);
    }

    long long nnz() const {
        require_final();
        long long n = 0;
        for (const auto& r : row_) n += static_cast<long long>(r.size());
        return n;
    }

    bool is_zero_matrix() const { return nnz() == 0; }

    SparseMatrix transpose() const {
        require_final();
        SparseMatrix t(cols_, rows_);
        for (int r = 0; r < rows_; ++r)
            for (const auto& [c, x] : row_[static_cast<size_t>(r)]) t.add(c, r, x);
        t.finalize();
        return t;
    }

    std::vector<K> apply(const std::vector<K>& x) const {
        require_final();
        if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("apply: size mismatch");
        std::vector<K> y(static_cast<size_t>(rows_), K(0));
        for (int r = 0; r < rows_; ++r)
            for (const auto& [c, v] : row_[static_cast<size_t>(r)])
                y[static_cast<size_t>(r)] += v * x[static_cast<size_t>(c)];
        return y;
    }

    SparseMatrix operator*(const SparseMatrix& other) const {
        require_final();
        other.require_final();
        if (cols_ != other.rows_) throw std::invalid_argument("matmul: shape mismatch");
        SparseMatrix prod(rows_, other.cols_);
        for (int r = 0; r < rows_; ++r) {
            std::map<int, K> acc;
            for (const auto& [k, a] : row_[static_cast<size_t>(r)])
                for (const auto& [c, b] : other.row_[static_cast<size_t>(k)]) {
                    auto it = acc.find(c);
                    if (it == acc.end()) acc.emplace(c, a * b);
                    else it->second += a * b;
                }
            SparseVec<K> rr;
            for (auto& [c, x] : acc)
                if (!is_zero(x)) rr.emplace_back(c, x);
            prod.row_[static_cast<size_t>(r)] = std::move(rr);
        }
        return prod;
    }

    struct Echelon {
        int rank = 0;
        // reduced rows, each normalized to pivot coefficient 1, sorted by pivot column
        std::vector<SparseVec<K>> rows;
        std::vector<int> pivot_cols;           // pivot column of each reduced row
        std::vector<char> is_pivot_col;        // per column
    };

    // Reduced row echelon form.  Pivots are chosen to minimize the
    // Markowitz fill estimate (nnz(row)-1)*(nnz(col)-1).
    Echelon reduced_echelon() const {
        require_final();
        std::vector<std::map<int, K>> work;
        work.reserve(row_.size());
        for (const auto& r : row_)
            if (!r.empty()) work.emplace_back(r.begin(), r.end());

        Echelon ech;
        ech.is_pivot_col.assign(static_cast<size_t>(cols_), 0);
        std::vector<std::map<int, K>> done;  // rows already holding a pivot
        std::vector<int> done_pivot;

        while (!work.empty()) {
            std::vector<int> col_count(static_cast<size_t>(cols_), 0);
            for (const auto& w : work)
                for (const auto& [c, x] : w) ++col_count[static_cast<size_t>(c)];

            long long best = -1;
            size_t best_row = 0;
            int best_col = -1;
            for (size_t i = 0; i < work.size(); ++i) {
                long long rw = static_cast<long long>(work[i].size()) - 1;
                for (const auto& [c, x] : work[i]) {
                    long long score = rw * (col_count[static_cast<size_t>(c)] - 1);
                    if (best < 0 || score < best ||
                        (score == best && (c < best_col || (c == best_col && i < best_row)))) {
                        best = score;
                        best_row = i;
                        best_col = c;
                    }
                }
            }

            std::map<int, K> piv = std::move(work[best_row]);
            work.erase(work.begin() + static_cast<std::ptrdiff_t>(best_row));
            K lead = piv.at(best_col);
            for (auto& [c, x] : piv) x = x / lead;

            auto eliminate = [&](std::map<int, K>& target) {
                auto it = target.find(best_col);
                if (it == target.end()) return;
                K f = it->second;
                for (const auto& [c, x] : piv) {
                    auto jt = target.find(c);
                    if (jt == target.end()) target.emplace(c, -(f * x));
                    else {
                        jt->second -= f * x;
                        if (is_zero(jt->second)) target.erase(jt);
                    }
                }
            };
            for (auto& w : work) eliminate(w);
            work.erase(std::remove_if(work.begin(), work.end(),
                                      [](const std::map<int, K>& m) { return m.empty(); }),
                       work.end());
            for (auto& d : done) eliminate(d);

            done.push_back(std::move(piv));
            done_pivot.push_back(best_col);
            ech.is_pivot_col[static_cast<size_t>(best_col)] = 1;
        }

        std::vector<size_t> order(done.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return done_pivot[a] < done_pivot[b]; });
        for (size_t i : order) {
            ech.rows.emplace_back(done[i].begin(), done[i].end());
            ech.pivot_cols.push_back(done_pivot[i]);
        }
        ech.rank = static_cast<int>(ech.rows.size());
        return ech;
    }

    int rank() const { return reduced_echelon().rank; }

    // Basis of { x : A x = 0 }, one vector per non-pivot column, in
    // ascending column order; the free coordinate of each vector is 1.
    std::vector<SparseVec<K>> kernel_basis() const {
        Echelon ech = reduced_echelon();
        std::vector<SparseVec<K>> basis;
        for (int f = 0; f < cols_; ++f) {
            if (ech.is_pivot_col[static_cast<size_t>(f)]) continue;
            std::map<int, K> x;
            x[f] = K(1);
            for (size_t i = 0; i < ech.rows.size(); ++i) {
                for (const auto& [c, v] : ech.rows[i]) {
                    if (c == f) {
                        x[ech.pivot_cols[i]] = -v;
                        break;
                    }
                }
            }
            basis.emplace_back(x.begin(), x.end());
        }
        return basis;
    }

    // One solution of A x = b, or nullopt if inconsistent.
    std::optional<std::vector<K>> solve(const std::vector<K>& b) const {
        require_final();
        if (static_cast<int>(b.size()) != rows_) throw std::invalid_argument("solve: size mismatch");
        return solve_via_augmented(b);
    }

    struct QuotientBasis {
        std::vector<int> rep_indices;   // ambient coordinates representing the quotient basis
        SparseMatrix projection;        // (ambient - rank) x ambient
    };

    // Basis data for K^ambient / span(rows of this matrix).
    static QuotientBasis quotient_basis(int ambient, const std::vector<SparseVec<K>>& span) {
        SparseMatrix m(static_cast<int>(span.size()), ambient);
        for (int r = 0; r < static_cast<int>(span.size()); ++r)
            for (const auto& [c, x] : span[static_cast<size_t>(r)]) m.add(r, c, x);
        m.finalize();
        Echelon ech = m.reduced_echelon();

        QuotientBasis q;
        std::vector<int> free_pos(static_cast<size_t>(ambient), -1);
        for (int c = 0; c < ambient; ++c) {
            if (!ech.is_pivot_col[static_cast<size_t>(c)]) {
                free_pos[static_cast<size_t>(c)] = static_cast<int>(q.rep_indices.size());
                q.rep_indices.push_back(c);
            }
        }
        q.projection = SparseMatrix(static_cast<int>(q.rep_indices.size()), ambient);
        for (size_t i = 0; i < q.rep_indices.size(); ++i)
            q.projection.add(static_cast<int>(i), q.rep_indices[i], K(1));
        for (size_t i = 0; i < ech.rows.size(); ++i) {
            int pc = ech.pivot_cols[i];
            for (const auto& [c, v] : ech.rows[i]) {
                if (c == pc) continue;
                // e_pc == -sum coefficients on free columns in the quotient
                q.projection.add(free_pos[static_cast<size_t>(c)], pc, -v);
            }
        }
        q.projection.finalize();
        return q;
    }

private:
    struct Triplet { int r, c; K x; };

    void require_final() const {
        if (!pending_.empty()) throw std::logic_error("SparseMatrix used before finalize()");
    }

    std::optional<std::vector<K>> solve_via_augmented(const std::vector<K>& b) const {
        // Plain left-to-right elimination (no Markowitz) on [A | b]; the
        // column order guarantees the augmented column is never a pivot
        // unless the system is inconsistent.
        std::vector<std::map<int, K>> work;
        for (int r = 0; r < rows_; ++r) {
            std::map<int, K> m(row_[static_cast<size_t>(r)].begin(), row_[static_cast<size_t>(r)].end());
            if (!is_zero(b[static_cast<size_t>(r)])) m[cols_] = b[static_cast<size_t>(r)];
            if (!m.empty()) work.push_back(std::move(m));
        }
        std::vector<std::pair<int, std::map<int, K>>> pivots;  // (pivot col, normalized row)
        for (int c = 0; c <= cols_; ++c) {
            int pick = -1;
            size_t pick_nnz = 0;
            for (size_t i = 0; i < work.size(); ++i) {
                if (work[i].begin()->first == c) {
                    if (pick < 0 || work[i].size() < pick_nnz) {
                        pick = static_cast<int>(i);
                        pick_nnz = work[i].size();
                    }
                }
            }
            if (pick < 0) continue;
            if (c == cols_) return std::nullopt;  // pivot in augmented column
            std::map<int, K> piv = std::move(work[static_cast<size_t>(pick)]);
            work.erase(work.begin() + pick);
            K lead = piv.at(c);
            for (auto& [cc, x] : piv) x = x / lead;
            for (auto& w : work) {
                auto it = w.find(c);
                if (it == w.end()) continue;
                K f = it->second;
                for (const auto& [cc, x] : piv) {
                    auto jt = w.find(cc);
                    if (jt == w.end()) w.emplace(cc, -(f * x));
                    else {
                        jt->second -= f * x;
                        if (is_zero(jt->second)) w.erase(jt);
                    }
                }
            }
            work.erase(std::remove_if(work.begin(), work.end(),
                                      [](const std::map<int, K>& m) { return m.empty(); }),
                       work.end());
            pivots.emplace_back(c, std::move(piv));
        }
        std::vector<K> x(static_cast<size_t>(cols_), K(0));
        for (auto it = pivots.rbegin(); it != pivots.rend(); ++it) {
            K val = K(0);
            for (const auto& [c, v] : it->second) {
                if (c == it->first) continue;
                if (c == cols_) val += v;
                else val -= v * x[static_cast<size_t>(c)];
            }
            x[static_cast<size_t>(it->first)] = val;
        }
        return x;
    }

    int rows_ = 0, cols_ = 0;
    std::vector<SparseVec<K>> row_;
    std::vector<Triplet> pending_;
};

} // namespace gcx
