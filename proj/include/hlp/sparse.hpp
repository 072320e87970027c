#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace hlp {

using Index = Eigen::Index;
using StorageIndex = int;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Triplet {
    Index row = 0;
    Index col = 0;
    double value = 0.0;
};

enum class Normalization { none, row, sym };

inline std::string_view to_string(Normalization n) {
    switch (n) {
        case Normalization::none: return "none";
        case Normalization::row: return "row";
        case Normalization::sym: return "sym";
    }
    return "?";
}

inline Normalization parse_normalization(std::string_view s) {
    if (s == "none") return Normalization::none;
    if (s == "row") return Normalization::row;
    if (s == "sym") return Normalization::sym;
    throw std::invalid_argument("unknown normalization '" + std::string(s) + "'");
}

/// Canonical compressed-sparse-row matrix: column indices strictly increasing
/// within each row, no explicitly stored zeros. Immutable once built.
class SparseMatrix {
public:
    using EigenView = Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, StorageIndex>>;

    SparseMatrix() : row_offsets_(1, 0) {}

    SparseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("SparseMatrix: negative dimension");
    }

    /// Builds a canonical matrix from unordered triplets. Duplicate
    /// coordinates are summed; entries that sum to zero are dropped.
    static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
        SparseMatrix m(rows, cols);
        for (const auto& t : triplets) {
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
                throw std::out_of_range("SparseMatrix: triplet (" + std::to_string(t.row) + ", " +
                                        std::to_string(t.col) + ") outside " + std::to_string(rows) +
                                        "x" + std::to_string(cols));
        }
        std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        m.col_indices_.reserve(triplets.size());
        m.values_.reserve(triplets.size());
        std::size_t i = 0;
        while (i < triplets.size()) {
            const Index r = triplets[i].row;
            const Index c = triplets[i].col;
            double sum = 0.0;
            for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i)
                sum += triplets[i].value;
            if (sum != 0.0) {
                m.col_indices_.push_back(static_cast<StorageIndex>(c));
                m.values_.push_back(sum);
                ++m.row_offsets_[r + 1];
            }
        }
        for (Index r = 0; r < rows; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
        return m;
    }

    /// Adopts raw CSR arrays; throws unless they are already canonical.
    static SparseMatrix from_csr(Index rows, Index cols, std::vector<StorageIndex> row_offsets,
                                 std::vector<StorageIndex> col_indices, std::vector<double> values) {
        SparseMatrix m(rows, cols);
        if (static_cast<Index>(row_offsets.size()) != rows + 1 || row_offsets.front() != 0)
            throw std::invalid_argument("SparseMatrix: bad row_offsets");
        if (col_indices.size() != values.size() ||
            static_cast<std::size_t>(row_offsets.back()) != values.size())
            throw std::invalid_argument("SparseMatrix: row_offsets/values length mismatch");
        for (Index r = 0; r < rows; ++r) {
            if (row_offsets[r + 1] < row_offsets[r])
                throw std::invalid_argument("SparseMatrix: row_offsets not non-decreasing");
            for (auto p = row_offsets[r]; p < row_offsets[r + 1]; ++p) {
                if (col_indices[p] < 0 || col_indices[p] >= cols)
                    throw std::out_of_range("SparseMatrix: column index out of range");
                if (p > row_offsets[r] && col_indices[p] <= col_indices[p - 1])
                    throw std::invalid_argument("SparseMatrix: columns not strictly increasing");
                if (values[p] == 0.0)
                    throw std::invalid_argument("SparseMatrix: explicit zero stored");
            }
        }
        m.row_offsets_ = std::move(row_offsets);
        m.col_indices_ = std::move(col_indices);
        m.values_ = std::move(values);
        return m;
    }

    static SparseMatrix identity(Index n) {
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
        return from_triplets(n, n, std::move(t));
    }

    static SparseMatrix from_dense(const DenseMatrix& d) {
        std::vector<Triplet> t;
        for (Index i = 0; i < d.rows(); ++i)
            for (Index j = 0; j < d.cols(); ++j)
                if (d(i, j) != 0.0) t.push_back({i, j, d(i, j)});
        return from_triplets(d.rows(), d.cols(), std::move(t));
    }

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index nnz() const noexcept { return static_cast<Index>(values_.size()); }
    bool square() const noexcept { return rows_ == cols_; }

    std::span<const StorageIndex> row_offsets() const noexcept { return row_offsets_; }
    std::span<const StorageIndex> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const StorageIndex> row_cols(Index r) const noexcept {
        return {col_indices_.data() + row_offsets_[r],
                static_cast<std::size_t>(row_offsets_[r + 1] - row_offsets_[r])};
    }
    std::span<const double> row_values(Index r) const noexcept {
        return {values_.data() + row_offsets_[r],
                static_cast<std::size_t>(row_offsets_[r + 1] - row_offsets_[r])};
    }

    double coeff(Index r, Index c) const {
        auto cols = row_cols(r);
        auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<StorageIndex>(c));
        if (it == cols.end() || *it != c) return 0.0;
        return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
    }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    DenseMatrix to_dense() const {
        DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
        for (Index r = 0; r < rows_; ++r) {
            auto cols = row_cols(r);
            auto vals = row_values(r);
            for (std::size_t p = 0; p < cols.size(); ++p) d(r, cols[p]) = vals[p];
        }
        return d;
    }

    /// Zero-copy view for Eigen's sparse kernels.
    EigenView eigen() const {
        return EigenView(rows_, cols_, nnz(), row_offsets_.data(), col_indices_.data(),
                         values_.data());
    }

    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.row_offsets_ == b.row_offsets_ &&
               a.col_indices_ == b.col_indices_ && a.values_ == b.values_;
    }

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<StorageIndex> row_offsets_;
    std::vector<StorageIndex> col_indices_;
    std::vector<double> values_;
};

/// a * b.
inline DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("spmm: dimension mismatch (" + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " times " +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
    DenseMatrix out = a.eigen() * b;
    return out;
}

/// aᵀ * b without materializing the transpose.
inline DenseMatrix spmm_transposed(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("spmm_transposed: dimension mismatch");
    DenseMatrix out = a.eigen().transpose() * b;
    return out;
}

inline SparseMatrix transpose(const SparseMatrix& a) {
    std::vector<StorageIndex> offsets(static_cast<std::size_t>(a.cols()) + 1, 0);
    for (StorageIndex c : a.col_indices()) ++offsets[static_cast<std::size_t>(c) + 1];
    for (Index c = 0; c < a.cols(); ++c) offsets[c + 1] += offsets[c];
    std::vector<StorageIndex> cols(a.col_indices().size());
    std::vector<double> vals(a.values().size());
    std::vector<StorageIndex> cursor(offsets.begin(), offsets.end() - 1);
    // Rows are visited in increasing order, so each output row comes out sorted.
    for (Index r = 0; r < a.rows(); ++r) {
        auto rc = a.row_cols(r);
        auto rv = a.row_values(r);
        for (std::size_t p = 0; p < rc.size(); ++p) {
            auto dst = cursor[rc[p]]++;
            cols[dst] = static_cast<StorageIndex>(r);
            vals[dst] = rv[p];
        }
    }
    return SparseMatrix::from_csr(a.cols(), a.rows(), std::move(offsets), std::move(cols),
                                  std::move(vals));
}

/// Binarized union of a and aᵀ: result(i,j) = 1 iff a(i,j) != 0 or a(j,i) != 0.
inline SparseMatrix symmetrize(const SparseMatrix& a) {
    if (!a.square()) throw std::invalid_argument("symmetrize: matrix is not square");
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nnz()) * 2);
    for (Index r = 0; r < a.rows(); ++r) {
        for (StorageIndex c : a.row_cols(r)) {
            t.push_back({r, c, 1.0});
            if (c != r) t.push_back({c, r, 1.0});
        }
    }
    auto summed = SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
    std::vector<StorageIndex> offsets(summed.row_offsets().begin(), summed.row_offsets().end());
    std::vector<StorageIndex> cols(summed.col_indices().begin(), summed.col_indices().end());
    std::vector<double> ones(cols.size(), 1.0);
    return SparseMatrix::from_csr(a.rows(), a.cols(), std::move(offsets), std::move(cols),
                                  std::move(ones));
}

/// Row sums.
inline Vector degree_vector(const SparseMatrix& a) {
    if (!a.square()) throw std::invalid_argument("degree_vector: matrix is not square");
    Vector d = Vector::Zero(a.rows());
    for (Index r = 0; r < a.rows(); ++r)
        for (double v : a.row_values(r)) d[r] += v;
    return d;
}

/// none: a; row: D⁻¹a; sym: D^{-1/2} a D^{-1/2}, with D the row-sum degrees.
/// Zero-degree rows get inverse degree 0.
inline SparseMatrix normalize(const SparseMatrix& a, Normalization mode) {
    if (!a.square()) throw std::invalid_argument("normalize: matrix is not square");
    for (double v : a.values())
        if (v < 0.0) throw std::invalid_argument("normalize: negative entry");
    if (mode == Normalization::none) return a;

    const Vector deg = degree_vector(a);
    Vector scale(deg.size());
    for (Index i = 0; i < deg.size(); ++i) {
        if (deg[i] <= 0.0) scale[i] = 0.0;
        else scale[i] = mode == Normalization::row ? 1.0 / deg[i] : 1.0 / std::sqrt(deg[i]);
    }

    std::vector<StorageIndex> offsets(a.rows() + 1, 0);
    std::vector<StorageIndex> cols;
    std::vector<double> vals;
    cols.reserve(a.col_indices().size());
    vals.reserve(a.values().size());
    for (Index r = 0; r < a.rows(); ++r) {
        auto rc = a.row_cols(r);
        auto rv = a.row_values(r);
        for (std::size_t p = 0; p < rc.size(); ++p) {
            double v = mode == Normalization::row ? rv[p] * scale[r]
                                                  : rv[p] * (scale[r] * scale[rc[p]]);
            if (v == 0.0) continue;
            cols.push_back(rc[p]);
            vals.push_back(v);
        }
        offsets[r + 1] = static_cast<StorageIndex>(vals.size());
    }
    return SparseMatrix::from_csr(a.rows(), a.cols(), std::move(offsets), std::move(cols),
                                  std::move(vals));
}

}  // namespace hlp
