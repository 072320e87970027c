#pragma once

// Rank-k truncated SVD of a sparse matrix by randomized subspace iteration:
// Gaussian sketch, QR re-orthonormalization between passes, then a dense SVD
// of the small projected matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hlp/rng.hpp"
#include "hlp/sparse.hpp"

namespace hlp {

struct TsvdParams {
    Index k = 1;
    Index oversample = 10;
    /// Minimum number of power (subspace) iterations.
    int power_iterations = 4;
    std::uint64_t seed = 0;
    /// Keep iterating past `power_iterations` until every leading residual
    /// ‖A vⱼ − σⱼ uⱼ‖ ≤ tolerance·σ₁. Zero means a fixed iteration count.
    double tolerance = 1e-10;
    int max_power_iterations = 200;
};

struct TsvdResult {
    DenseMatrix u;   ///< rows × k, left singular vectors
    Vector sigma;    ///< k, non-increasing, non-negative
    DenseMatrix v;   ///< cols × k, right singular vectors
    int iterations = 0;

    Index k() const noexcept { return sigma.size(); }
};

/// Flips (uⱼ, vⱼ) so the largest-magnitude entry of uⱼ is positive; ties go
/// to the lowest row index.
inline TsvdResult sign_canonicalize(TsvdResult t) {
    for (Index j = 0; j < t.u.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < t.u.rows(); ++i) {
            const double a = std::abs(t.u(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (t.u.rows() > 0 && t.u(arg, j) < 0.0) {
            t.u.col(j) *= -1.0;
            if (j < t.v.cols()) t.v.col(j) *= -1.0;
        }
    }
    return t;
}

/// Leading `k` triplets of an existing decomposition.
inline TsvdResult truncate(const TsvdResult& t, Index k) {
    if (k < 1 || k > t.k())
        throw std::invalid_argument("truncate: rank " + std::to_string(k) + " not in [1, " +
                                    std::to_string(t.k()) + "]");
    TsvdResult out;
    out.u = t.u.leftCols(k);
    out.sigma = t.sigma.head(k);
    out.v = t.v.leftCols(k);
    out.iterations = t.iterations;
    return out;
}

/// U · diag(σ) · Vᵀ. Diagnostic use; dense n × m.
inline DenseMatrix reconstruct(const TsvdResult& t) {
    return t.u * t.sigma.asDiagonal() * t.v.transpose();
}

namespace detail {

inline DenseMatrix orthonormal_basis(const DenseMatrix& y) {
    Eigen::HouseholderQR<DenseMatrix> qr(y);
    return qr.householderQ() * DenseMatrix::Identity(y.rows(), y.cols());
}

// Rayleigh–Ritz on range(Q): with W = AᵀQ, Qᵀ A = Wᵀ = Ub Σ Vbᵀ.
inline TsvdResult ritz_pairs(const DenseMatrix& q, const DenseMatrix& w) {
    Eigen::BDCSVD<DenseMatrix> svd(w.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    TsvdResult r;
    r.u = q * svd.matrixU();
    r.sigma = svd.singularValues();
    r.v = svd.matrixV();
    return r;
}

inline double max_leading_residual(const SparseMatrix& a, const TsvdResult& r, Index k) {
    const DenseMatrix av = spmm(a, r.v.leftCols(k));
    double worst = 0.0;
    for (Index j = 0; j < k; ++j)
        worst = std::max(worst, (av.col(j) - r.sigma[j] * r.u.col(j)).norm());
    return worst;
}

}  // namespace detail

inline TsvdResult truncated_svd(const SparseMatrix& a, const TsvdParams& params) {
    const Index n = a.rows();
    const Index m = a.cols();
    const Index min_dim = std::min(n, m);
    const Index k = params.k;
    if (k < 1 || k > min_dim)
        throw std::invalid_argument("truncated_svd: rank " + std::to_string(k) +
                                    " not in [1, min(" + std::to_string(n) + ", " +
                                    std::to_string(m) + ")]");
    if (params.oversample < 0) throw std::invalid_argument("truncated_svd: negative oversample");
    if (!a.all_finite()) throw std::invalid_argument("truncated_svd: non-finite matrix entry");

    // Sketch width is clamped to the smaller dimension; at that width the
    // sketch spans the whole range and a single pass is exact.
    const Index width = std::min(k + params.oversample, min_dim);
    const bool exact = width == min_dim;

    Rng rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseMatrix omega(m, width);
    for (Index j = 0; j < width; ++j)
        for (Index i = 0; i < m; ++i) omega(i, j) = normal(rng);

    DenseMatrix q = detail::orthonormal_basis(spmm(a, omega));
    TsvdResult result;
    int it = 0;
    for (;; ++it) {
        const DenseMatrix w = spmm_transposed(a, q);
        if (exact || it >= params.power_iterations) {
            if (exact || params.tolerance <= 0.0) {
                result = detail::ritz_pairs(q, w);
                break;
            }
            TsvdResult candidate = detail::ritz_pairs(q, w);
            const double scale = candidate.sigma.size() > 0 ? candidate.sigma[0] : 0.0;
            if (it >= params.max_power_iterations ||
                detail::max_leading_residual(a, candidate, k) <= params.tolerance * scale) {
                result = std::move(candidate);
                break;
            }
        }
        q = detail::orthonormal_basis(spmm(a, detail::orthonormal_basis(w)));
    }

    result = truncate(result, k);
    result.iterations = it;
    const double floor = result.sigma[0] * 1e-10;
    for (Index j = 0; j < k; ++j)
        if (result.sigma[j] < floor) result.sigma[j] = 0.0;
    return sign_canonicalize(std::move(result));
}

}  // namespace hlp
