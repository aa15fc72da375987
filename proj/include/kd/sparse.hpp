#pragma once

#include "kd/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kd {

/**
 * @brief Exact sparse matrix in coordinate form, entries sorted by (row, col), no stored zeros.
 */
class SparseMatrix {
public:
    struct Entry {
        int row;
        int col;
        Q val;
    };

    SparseMatrix() = default;
    SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}

    /// Accumulates duplicate coordinates and drops zeros.
    static SparseMatrix from_triplets(int rows, int cols, std::vector<Entry> trip) {
        SparseMatrix m(rows, cols);
        std::sort(trip.begin(), trip.end(), [](const Entry& a, const Entry& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (auto& e : trip) {
            if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
                throw std::out_of_range("sparse entry outside matrix shape");
            if (!m.entries_.empty() && m.entries_.back().row == e.row && m.entries_.back().col == e.col)
                m.entries_.back().val += e.val;
            else
                m.entries_.push_back(std::move(e));
        }
        std::erase_if(m.entries_, [](const Entry& e) { return e.val.is_zero(); });
        return m;
    }

    static SparseMatrix identity(int n) {
        SparseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.entries_.push_back({i, i, Q(1)});
        return m;
    }

    static SparseMatrix from_dense(const std::vector<std::vector<Q>>& d, int cols) {
        std::vector<Entry> t;
        for (int i = 0; i < static_cast<int>(d.size()); ++i)
            for (int j = 0; j < cols; ++j)
                if (!d[i][j].is_zero()) t.push_back({i, j, d[i][j]});
        return from_triplets(static_cast<int>(d.size()), cols, std::move(t));
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }
    bool is_zero() const { return entries_.empty(); }

    Q at(int r, int c) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(r, c),
                                   [](const Entry& e, const std::pair<int, int>& k) {
                                       return e.row != k.first ? e.row < k.first : e.col < k.second;
                                   });
        if (it != entries_.end() && it->row == r && it->col == c) return it->val;
        return Q(0);
    }

    std::vector<std::vector<Q>> to_dense() const {
        std::vector<std::vector<Q>> d(rows_, std::vector<Q>(cols_));
        for (const auto& e : entries_) d[e.row][e.col] = e.val;
        return d;
    }

    SparseMatrix transpose() const {
        std::vector<Entry> t;
        t.reserve(entries_.size());
        for (const auto& e : entries_) t.push_back({e.col, e.row, e.val});
        return from_triplets(cols_, rows_, std::move(t));
    }

    SparseMatrix scaled(const Q& s) const {
        if (s.is_zero()) return SparseMatrix(rows_, cols_);
        SparseMatrix m = *this;
        for (auto& e : m.entries_) e.val *= s;
        return m;
    }

    friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("shape mismatch in sum");
        std::vector<Entry> t = a.entries_;
        t.insert(t.end(), b.entries_.begin(), b.entries_.end());
        return from_triplets(a.rows_, a.cols_, std::move(t));
    }
    friend SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b) { return a + b.scaled(Q(-1)); }

    /// Product a*b, i.e. apply b first.
    friend SparseMatrix operator*(const SparseMatrix& a, const SparseMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("shape mismatch in product");
        std::vector<std::vector<std::pair<int, Q>>> brow(b.rows_);
        for (const auto& e : b.entries_) brow[e.row].push_back({e.col, e.val});
        std::vector<Entry> t;
        std::map<int, Q> acc;
        int cur = -1;
        auto flush = [&] {
            for (auto& [c, v] : acc)
                if (!v.is_zero()) t.push_back({cur, c, v});
            acc.clear();
        };
        for (const auto& e : a.entries_) {
            if (e.row != cur) {
                flush();
                cur = e.row;
            }
            for (const auto& [c, v] : brow[e.col]) acc[c] += e.val * v;
        }
        flush();
        SparseMatrix m(a.rows_, b.cols_);
        m.entries_ = std::move(t);
        return m;
    }

    bool operator==(const SparseMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_ || entries_.size() != o.entries_.size()) return false;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].row != o.entries_[i].row || entries_[i].col != o.entries_[i].col ||
                entries_[i].val != o.entries_[i].val)
                return false;
        return true;
    }

    std::vector<Q> apply(const std::vector<Q>& v) const {
        if (static_cast<int>(v.size()) != cols_) throw std::invalid_argument("vector length mismatch");
        std::vector<Q> out(rows_);
        for (const auto& e : entries_) out[e.row] += e.val * v[e.col];
        return out;
    }

    /// Stacks b below a (same column count).
    static SparseMatrix vstack(const SparseMatrix& a, const SparseMatrix& b) {
        if (a.cols_ != b.cols_) throw std::invalid_argument("vstack column mismatch");
        std::vector<Entry> t = a.entries_;
        for (const auto& e : b.entries_) t.push_back({e.row + a.rows_, e.col, e.val});
        return from_triplets(a.rows_ + b.rows_, a.cols_, std::move(t));
    }
    static SparseMatrix hstack(const SparseMatrix& a, const SparseMatrix& b) {
        if (a.rows_ != b.rows_) throw std::invalid_argument("hstack row mismatch");
        std::vector<Entry> t = a.entries_;
        for (const auto& e : b.entries_) t.push_back({e.row, e.col + a.cols_, e.val});
        return from_triplets(a.rows_, a.cols_ + b.cols_, std::move(t));
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Entry> entries_;
};

namespace detail {

using SparseRow = std::vector<std::pair<int, Q>>;

/// row := row - factor * piv  (both sorted by column)
inline void axpy_row(SparseRow& row, const Q& factor, const SparseRow& piv) {
    SparseRow out;
    out.reserve(row.size() + piv.size());
    std::size_t i = 0, j = 0;
    while (i < row.size() || j < piv.size()) {
        if (j >= piv.size() || (i < row.size() && row[i].first < piv[j].first)) {
            out.push_back(std::move(row[i++]));
        } else if (i >= row.size() || piv[j].first < row[i].first) {
            out.push_back({piv[j].first, -factor * piv[j].second});
            ++j;
        } else {
            Q v = row[i].second - factor * piv[j].second;
            if (!v.is_zero()) out.push_back({row[i].first, std::move(v)});
            ++i;
            ++j;
        }
    }
    row.swap(out);
}

inline int dense_rank(std::vector<std::vector<Q>> a, int cols) {
    int rows = static_cast<int>(a.size());
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int p = -1;
        for (int i = r; i < rows; ++i)
            if (!a[i][c].is_zero()) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(a[p], a[r]);
        for (int i = r + 1; i < rows; ++i) {
            if (a[i][c].is_zero()) continue;
            Q f = a[i][c] / a[r][c];
            for (int j = c; j < cols; ++j)
                if (!a[r][j].is_zero()) a[i][j] -= f * a[r][j];
        }
        ++r;
    }
    return r;
}

} // namespace detail

/**
 * @brief Exact rank by sparse row-echelon insertion.
 *
 * Switches to dense elimination on the not-yet-processed rows once the pivot rows hold more
 * than half of a dense rows-by-cols block, which is where sparse bookkeeping stops paying off.
 */
inline int rank(const SparseMatrix& m) {
    if (m.is_zero()) return 0;
    const int rows = m.rows(), cols = m.cols();
    std::vector<detail::SparseRow> input(rows);
    for (const auto& e : m.entries()) input[e.row].push_back({e.col, e.val});
    std::map<int, detail::SparseRow> pivots;  // leading column -> row
    std::size_t stored = 0;
    const double dense_limit = 0.5 * static_cast<double>(rows) * static_cast<double>(cols);
    for (int i = 0; i < rows; ++i) {
        detail::SparseRow row = std::move(input[i]);
        while (!row.empty()) {
            auto it = pivots.find(row.front().first);
            if (it == pivots.end()) {
                stored += row.size();
                pivots.emplace(row.front().first, std::move(row));
                break;
            }
            Q f = row.front().second / it->second.front().second;
            detail::axpy_row(row, f, it->second);
        }
        if (static_cast<double>(stored) > dense_limit && i + 1 < rows) {
            std::vector<std::vector<Q>> dense;
            dense.reserve(pivots.size() + rows - i - 1);
            for (auto& [c, r] : pivots) {
                std::vector<Q> d(cols);
                for (auto& [j, v] : r) d[j] = v;
                dense.push_back(std::move(d));
            }
            for (int k = i + 1; k < rows; ++k) {
                std::vector<Q> d(cols);
                for (auto& [j, v] : input[k]) d[j] = v;
                dense.push_back(std::move(d));
            }
            return detail::dense_rank(std::move(dense), cols);
        }
    }
    return static_cast<int>(pivots.size());
}

/** Reduced row echelon form (dense). Returns pivot columns. */
inline std::vector<int> rref(std::vector<std::vector<Q>>& a, int cols) {
    int rows = static_cast<int>(a.size());
    std::vector<int> piv;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int p = -1;
        for (int i = r; i < rows; ++i)
            if (!a[i][c].is_zero()) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(a[p], a[r]);
        Q inv = Q(1) / a[r][c];
        for (int j = c; j < cols; ++j) a[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || a[i][c].is_zero()) continue;
            Q f = a[i][c];
            for (int j = c; j < cols; ++j)
                if (!a[r][j].is_zero()) a[i][j] -= f * a[r][j];
        }
        piv.push_back(c);
        ++r;
    }
    return piv;
}

/** Basis of the null space {v : m v = 0}, one vector per free column. */
inline std::vector<std::vector<Q>> kernel_basis(const SparseMatrix& m) {
    auto a = m.to_dense();
    const int cols = m.cols();
    auto piv = rref(a, cols);
    std::vector<bool> is_piv(cols, false);
    for (int c : piv) is_piv[c] = true;
    std::vector<std::vector<Q>> basis;
    for (int f = 0; f < cols; ++f) {
        if (is_piv[f]) continue;
        std::vector<Q> v(cols);
        v[f] = 1;
        for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -a[r][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

/** Some solution x of m x = b, or nullopt if inconsistent. */
inline std::optional<std::vector<Q>> solve(const SparseMatrix& m, const std::vector<Q>& b) {
    const int cols = m.cols();
    auto a = m.to_dense();
    for (int i = 0; i < m.rows(); ++i) a[i].push_back(b[i]);
    auto piv = rref(a, cols + 1);
    if (!piv.empty() && piv.back() == cols) return std::nullopt;
    std::vector<Q> x(cols);
    for (std::size_t r = 0; r < piv.size(); ++r) x[piv[r]] = a[r][cols];
    return x;
}

} // namespace kd
