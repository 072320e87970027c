#pragma once

// Node representations built from truncated spectra of the graph and of the
// feature matrix.
//
//   aggregation:   S = U_A diag(σ_A) (U_Aᵀ Q) diag(scale(σ_X))      n × k2
//   concatenation: [ graph block | feature block ]                   n × (k1' + k2)
//
// where (U_A, σ_A) is the rank-k1 TSVD of the normalized adjacency and
// (Q, σ_X) the rank-k2 TSVD of X. Q equals the leading eigenvectors of XXᵀ,
// whose eigenvalues are σ_X², hence FeatureScaling::sigma_squared.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hlp/graph.hpp"
#include "hlp/sparse.hpp"
#include "hlp/tsvd.hpp"

namespace hlp {

enum class GraphScaling { none, sigma };
enum class FeatureScaling { none, sigma, sigma_squared };
enum class DirectedFactors { left, left_and_right };
enum class Provenance { graph, feature, aggregated, concatenated };

inline std::string_view to_string(GraphScaling s) { return s == GraphScaling::none ? "none" : "sigma"; }

inline std::string_view to_string(FeatureScaling s) {
    switch (s) {
        case FeatureScaling::none: return "none";
        case FeatureScaling::sigma: return "sigma";
        case FeatureScaling::sigma_squared: return "sigma_squared";
    }
    return "?";
}

inline std::string_view to_string(DirectedFactors f) {
    return f == DirectedFactors::left ? "left" : "left_and_right";
}

inline GraphScaling parse_graph_scaling(std::string_view s) {
    if (s == "none") return GraphScaling::none;
    if (s == "sigma") return GraphScaling::sigma;
    throw std::invalid_argument("unknown graph_scaling '" + std::string(s) + "'");
}

inline FeatureScaling parse_feature_scaling(std::string_view s) {
    if (s == "none") return FeatureScaling::none;
    if (s == "sigma") return FeatureScaling::sigma;
    if (s == "sigma_squared") return FeatureScaling::sigma_squared;
    throw std::invalid_argument("unknown feature_scaling '" + std::string(s) + "'");
}

inline DirectedFactors parse_directed_factors(std::string_view s) {
    if (s == "left") return DirectedFactors::left;
    if (s == "left_and_right") return DirectedFactors::left_and_right;
    throw std::invalid_argument("unknown directed_factors '" + std::string(s) + "'");
}

inline constexpr Index kMaxRank = 2048;

struct HlpConfig {
    Index k1 = 32;
    Index k2 = 32;
    GraphType graph_type = GraphType::undirected;
    Normalization norm = Normalization::sym;
    GraphScaling graph_scaling = GraphScaling::sigma;
    FeatureScaling feature_scaling = FeatureScaling::sigma;
    DirectedFactors directed_factors = DirectedFactors::left;

    friend bool operator==(const HlpConfig&, const HlpConfig&) = default;
};

struct EmbeddingMatrix {
    DenseMatrix values;
    Provenance provenance = Provenance::graph;

    Index rows() const noexcept { return values.rows(); }
    Index dim() const noexcept { return values.cols(); }
};

namespace detail {

inline void check_rank(Index k, Index limit, const char* what) {
    if (k < 1 || k > std::min(limit, kMaxRank))
        throw std::invalid_argument(std::string(what) + " = " + std::to_string(k) + " not in [1, " +
                                    std::to_string(std::min(limit, kMaxRank)) + "]");
}

inline Vector feature_scale(const Vector& sigma, FeatureScaling s) {
    switch (s) {
        case FeatureScaling::none: return Vector::Ones(sigma.size());
        case FeatureScaling::sigma: return sigma;
        case FeatureScaling::sigma_squared: return sigma.array().square().matrix();
    }
    return sigma;
}

inline TsvdParams with_rank(TsvdParams p, Index k, std::uint64_t seed) {
    p.k = k;
    p.seed = seed;
    return p;
}

}  // namespace detail

/// Graph block from precomputed factors (rank ≥ cfg.k1; the leading k1 are used).
inline EmbeddingMatrix graph_embedding(const TsvdResult& factors, const HlpConfig& cfg) {
    const TsvdResult t = truncate(factors, cfg.k1);
    const Vector s = cfg.graph_scaling == GraphScaling::sigma ? t.sigma : Vector::Ones(t.k());
    EmbeddingMatrix e{t.u * s.asDiagonal(), Provenance::graph};
    if (cfg.graph_type == GraphType::directed && cfg.directed_factors == DirectedFactors::left_and_right) {
        DenseMatrix both(t.u.rows(), 2 * t.k());
        both << e.values, t.v * s.asDiagonal();
        e.values = std::move(both);
    }
    return e;
}

inline EmbeddingMatrix graph_embedding(const SparseMatrix& a_norm, const HlpConfig& cfg,
                                       std::uint64_t seed, const TsvdParams& base = {}) {
    if (!a_norm.square()) throw std::invalid_argument("graph_embedding: adjacency is not square");
    detail::check_rank(cfg.k1, a_norm.rows(), "k1");
    return graph_embedding(truncated_svd(a_norm, detail::with_rank(base, cfg.k1, seed)), cfg);
}

/// Feature block: Q · diag(scale(σ_X)) from precomputed factors of X.
inline EmbeddingMatrix feature_embedding(const TsvdResult& factors, const HlpConfig& cfg) {
    const TsvdResult t = truncate(factors, cfg.k2);
    return {t.u * detail::feature_scale(t.sigma, cfg.feature_scaling).asDiagonal(), Provenance::feature};
}

inline EmbeddingMatrix feature_embedding(const SparseMatrix& x, const HlpConfig& cfg,
                                         std::uint64_t seed, const TsvdParams& base = {}) {
    detail::check_rank(cfg.k2, std::min(x.rows(), x.cols()), "k2");
    return feature_embedding(truncated_svd(x, detail::with_rank(base, cfg.k2, seed)), cfg);
}

inline EmbeddingMatrix hlp_aggregate(const TsvdResult& graph_factors, const TsvdResult& feature_factors,
                                     const HlpConfig& cfg) {
    const TsvdResult g = truncate(graph_factors, cfg.k1);
    const TsvdResult f = truncate(feature_factors, cfg.k2);
    if (g.u.rows() != f.u.rows())
        throw std::invalid_argument("hlp_aggregate: graph has " + std::to_string(g.u.rows()) +
                                    " nodes, features have " + std::to_string(f.u.rows()));
    // Project Q onto the graph subspace first: k1 × k2, never n × n.
    const DenseMatrix projected = g.u.transpose() * f.u;
    DenseMatrix s = g.u * (g.sigma.asDiagonal() * projected *
                           detail::feature_scale(f.sigma, cfg.feature_scaling).asDiagonal());
    return {std::move(s), Provenance::aggregated};
}

inline EmbeddingMatrix hlp_aggregate(const SparseMatrix& a_norm, const SparseMatrix& x,
                                     const HlpConfig& cfg, std::uint64_t seed,
                                     const TsvdParams& base = {}) {
    if (!a_norm.square()) throw std::invalid_argument("hlp_aggregate: adjacency is not square");
    if (a_norm.rows() != x.rows()) throw std::invalid_argument("hlp_aggregate: row count mismatch");
    detail::check_rank(cfg.k1, a_norm.rows(), "k1");
    detail::check_rank(cfg.k2, std::min(x.rows(), x.cols()), "k2");
    return hlp_aggregate(truncated_svd(a_norm, detail::with_rank(base, cfg.k1, seed)),
                         truncated_svd(x, detail::with_rank(base, cfg.k2, seed)), cfg);
}

inline EmbeddingMatrix hlp_concat(const EmbeddingMatrix& graph_emb, const EmbeddingMatrix& feat_emb) {
    if (graph_emb.rows() != feat_emb.rows())
        throw std::invalid_argument("hlp_concat: row count mismatch");
    if (graph_emb.dim() < 1 || feat_emb.dim() < 1)
        throw std::invalid_argument("hlp_concat: empty block");
    DenseMatrix out(graph_emb.rows(), graph_emb.dim() + feat_emb.dim());
    out << graph_emb.values, feat_emb.values;
    return {std::move(out), Provenance::concatenated};
}

/// Per-column z-score with population std; constant columns become zero.
inline EmbeddingMatrix column_standardize(EmbeddingMatrix e) {
    const Index n = e.rows();
    if (n == 0) return e;
    for (Index j = 0; j < e.dim(); ++j) {
        auto col = e.values.col(j);
        const double mean = col.mean();
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
        const double scale = std::max(std::abs(mean), col.cwiseAbs().maxCoeff());
        if (!(sd > 1e-12 * scale) || sd == 0.0) col.setZero();
        else col /= sd;
    }
    return e;
}

/// embeddings.tsv: header "node_id dim=<k>", then one line per node:
/// node id, k tab-separated values, and the node's label last.
inline void write_embeddings(const DenseMatrix& values, const std::vector<int>& labels,
                             const std::filesystem::path& path) {
    if (static_cast<Index>(labels.size()) != values.rows())
        throw std::invalid_argument("write_embeddings: label count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "node_id dim=" << values.cols() << '\n';
    char buf[32];
    for (Index i = 0; i < values.rows(); ++i) {
        out << i;
        for (Index j = 0; j < values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", values(i, j));
            out << '\t' << buf;
        }
        out << '\t' << labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace hlp
