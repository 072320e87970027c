#pragma once

// Small graph fixtures shared by the test suites.

#include <algorithm>
#include <random>
#include <vector>

#include "hlp/graph.hpp"

namespace fixtures {

using hlp::Edge;
using hlp::GraphDataset;
using hlp::Index;

/// Two triangles {0,1,2} and {3,4,5} joined by the bridge 2–3, stored as
/// directed pairs in both directions. Labels follow the triangles.
inline GraphDataset bridged_triangles(Index n_features = 4, unsigned feature_seed = 1) {
    std::vector<Edge> edges;
    for (auto [a, b] : std::vector<std::pair<Index, Index>>{
             {0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}) {
        edges.push_back({a, b});
        edges.push_back({b, a});
    }
    std::mt19937_64 rng(feature_seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<hlp::Triplet> t;
    for (Index i = 0; i < 6; ++i)
        for (Index j = 0; j < n_features; ++j) t.push_back({i, j, u(rng)});
    return hlp::make_dataset("bridged_triangles", 6, edges,
                             hlp::SparseMatrix::from_triplets(6, n_features, t), {0, 0, 0, 1, 1, 1}, 2);
}

/// Planted heterophilic graph: nodes of class c point mostly at nodes of
/// class (c+1) mod C. Features are sparse binary bags with a weak class signal.
struct SyntheticSpec {
    Index n = 240;
    int classes = 3;
    int out_degree = 6;
    double edge_noise = 0.15;
    Index n_features = 60;
    int words_per_node = 6;
    double feature_signal = 0.25;
    unsigned seed = 1;
};

inline GraphDataset synthetic_heterophilic(const SyntheticSpec& spec = {}) {
    std::mt19937_64 rng(spec.seed);
    std::vector<int> labels(static_cast<std::size_t>(spec.n));
    for (Index i = 0; i < spec.n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % spec.classes);
    std::shuffle(labels.begin(), labels.end(), rng);

    std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(spec.classes));
    for (Index i = 0; i < spec.n; ++i) by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<Edge> edges;
    for (Index i = 0; i < spec.n; ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        for (int e = 0; e < spec.out_degree; ++e) {
            Index j;
            if (coin(rng) < spec.edge_noise) {
                j = static_cast<Index>(rng() % static_cast<std::uint64_t>(spec.n));
            } else {
                const auto& pool = by_class[static_cast<std::size_t>((c + 1) % spec.classes)];
                j = pool[rng() % pool.size()];
            }
            if (j != i) edges.push_back({i, j});
        }
    }

    const Index block = spec.n_features / spec.classes;
    std::vector<hlp::Triplet> t;
    for (Index i = 0; i < spec.n; ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        for (int w = 0; w < spec.words_per_node; ++w) {
            Index f;
            if (coin(rng) < spec.feature_signal) f = c * block + static_cast<Index>(rng() % static_cast<std::uint64_t>(block));
            else f = static_cast<Index>(rng() % static_cast<std::uint64_t>(spec.n_features));
            t.push_back({i, f, 1.0});
        }
    }
    auto x = hlp::SparseMatrix::from_triplets(spec.n, spec.n_features, t);
    // binarize repeated words
    std::vector<hlp::Triplet> bin;
    for (Index r = 0; r < x.rows(); ++r)
        for (auto c : x.row_cols(r)) bin.push_back({r, c, 1.0});
    return hlp::make_dataset("synthetic", spec.n, std::move(edges),
                             hlp::SparseMatrix::from_triplets(spec.n, spec.n_features, bin),
                             std::move(labels), spec.classes);
}

}  // namespace fixtures
