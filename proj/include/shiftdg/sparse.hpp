#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

namespace shiftdg {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Square matrix in compressed-row layout with sorted column indices per row.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Sum duplicate entries; every (row, col) that appears is kept in the pattern.
    static SparseMatrix from_triplets(int n, std::vector<Triplet> entries)
    {
        std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        SparseMatrix m;
        m.n_ = n;
        m.row_ptr_.assign(n + 1, 0);
        for (std::size_t i = 0; i < entries.size();) {
            const Triplet& t = entries[i];
            if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
                throw StructuralError("SparseMatrix: triplet index out of range");
            }
            double sum = 0.0;
            std::size_t j = i;
            for (; j < entries.size() && entries[j].row == t.row && entries[j].col == t.col; ++j) {
                sum += entries[j].value;
            }
            m.cols_.push_back(t.col);
            m.values_.push_back(sum);
            ++m.row_ptr_[t.row + 1];
            i = j;
        }
        std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
        return m;
    }

    static SparseMatrix identity(int n)
    {
        std::vector<Triplet> t;
        for (int i = 0; i < n; ++i) {
            t.push_back({i, i, 1.0});
        }
        return from_triplets(n, std::move(t));
    }

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] std::size_t nonzeros() const { return values_.size(); }
    [[nodiscard]] const std::vector<int>& row_offsets() const { return row_ptr_; }
    [[nodiscard]] const std::vector<int>& column_indices() const { return cols_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }

    /// Entry (i, j); zero if outside the pattern.
    [[nodiscard]] double at(int i, int j) const
    {
        const auto first = cols_.begin() + row_ptr_[i];
        const auto last = cols_.begin() + row_ptr_[i + 1];
        const auto it = std::lower_bound(first, last, j);
        return (it != last && *it == j) ? values_[it - cols_.begin()] : 0.0;
    }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const
    {
        for (int i = 0; i < n_; ++i) {
            double sum = 0.0;
            for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                sum += values_[p] * x[cols_[p]];
            }
            y[i] = sum;
        }
    }

    [[nodiscard]] std::vector<double> operator*(std::span<const double> x) const
    {
        std::vector<double> y(n_);
        multiply(x, y);
        return y;
    }

    /// Append the entries of this matrix, scaled and offset, to a triplet list.
    void append_to(std::vector<Triplet>& out, double scale, int row_offset, int col_offset) const
    {
        for (int i = 0; i < n_; ++i) {
            for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                out.push_back({i + row_offset, cols_[p] + col_offset, scale * values_[p]});
            }
        }
    }

    [[nodiscard]] std::vector<Triplet> triplets() const
    {
        std::vector<Triplet> out;
        out.reserve(values_.size());
        append_to(out, 1.0, 0, 0);
        return out;
    }

    [[nodiscard]] double max_abs() const
    {
        double m = 0.0;
        for (double v : values_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    /// Coordinate text dump: one `i j value` line per stored entry.
    void write_coordinate(std::ostream& os) const
    {
        char buf[80];
        for (int i = 0; i < n_; ++i) {
            for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
                std::snprintf(buf, sizeof buf, "%d %d %.17e\n", i, cols_[p], values_[p]);
                os << buf;
            }
        }
    }

private:
    int n_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

} // namespace shiftdg
