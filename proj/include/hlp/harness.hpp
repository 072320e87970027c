#pragma once

// Trials, sweeps and ablations: build classifier inputs for a model kind,
// train once per split, aggregate, and select by mean validation accuracy.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "hlp/classifier.hpp"
#include "hlp/graph.hpp"
#include "hlp/hlp_models.hpp"
#include "hlp/rng.hpp"
#include "hlp/sparse.hpp"
#include "hlp/tsvd.hpp"

namespace hlp {

enum class ModelKind { lr, mlp, hlp_agg, hlp_concat };

inline std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::lr: return "lr";
        case ModelKind::mlp: return "mlp";
        case ModelKind::hlp_agg: return "hlp_agg";
        case ModelKind::hlp_concat: return "hlp_concat";
    }
    return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "lr") return ModelKind::lr;
    if (s == "mlp") return ModelKind::mlp;
    if (s == "hlp_agg") return ModelKind::hlp_agg;
    if (s == "hlp_concat") return ModelKind::hlp_concat;
    throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

inline bool uses_spectra(ModelKind k) { return k == ModelKind::hlp_agg || k == ModelKind::hlp_concat; }

struct TrialConfig {
    ModelKind model = ModelKind::hlp_concat;
    HlpConfig hlp;
    /// hidden_dim absent gives a logistic-regression head.
    MlpConfig mlp;
    bool standardize = true;
    /// Seeds the TSVD sketches and, per split, the classifier.
    std::uint64_t seed = 0;

    friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

struct TrialResult {
    int trial_id = 0;
    TrialConfig config;
    std::vector<double> val_accuracy;
    std::vector<double> test_accuracy;
    double mean_val = 0.0;
    double mean_test = 0.0;
    double std_test = 0.0;
    bool diverged = false;
    /// Feature construction or training threw; excluded from selection.
    bool failed = false;
    std::string error;
    double seconds = 0.0;
};

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Population standard deviation.
inline double std_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// ---------------------------------------------------------------------------
// Spectral cache

/// Truncated SVDs of the adjacency variants and of X, computed once at a
/// fixed rank ceiling; trials use prefixes. With caching disabled every
/// lookup recomputes at the same ceiling, so results do not depend on it.
class SpectralCache {
public:
    SpectralCache(const GraphDataset& ds, Index graph_ceiling, Index feature_ceiling, TsvdParams base = fast_params(),
                  bool enabled = true)
        : ds_(&ds),
          graph_ceiling_(std::clamp<Index>(graph_ceiling, 1, ds.n)),
          feature_ceiling_(std::clamp<Index>(feature_ceiling, 1, std::max<Index>(1, std::min(ds.n, ds.num_features())))),
          base_(base),
          enabled_(enabled) {}

    /// Fixed-iteration randomized SVD; the sweep default.
    static TsvdParams fast_params() {
        TsvdParams p;
        p.tolerance = 0.0;
        p.power_iterations = 4;
        return p;
    }

    Index graph_ceiling() const { return graph_ceiling_; }
    Index feature_ceiling() const { return feature_ceiling_; }

    std::shared_ptr<const TsvdResult> graph(GraphType type, Normalization norm, std::uint64_t seed) {
        const Key key{static_cast<int>(type), static_cast<int>(norm), seed};
        return lookup(key, [&] {
            TsvdParams p = base_;
            p.k = graph_ceiling_;
            p.seed = derive_seed(seed, {1, static_cast<std::uint64_t>(type), static_cast<std::uint64_t>(norm)});
            return truncated_svd(build_adjacency(*ds_, type, norm), p);
        });
    }

    std::shared_ptr<const TsvdResult> features(std::uint64_t seed) {
        const Key key{-1, -1, seed};
        return lookup(key, [&] {
            TsvdParams p = base_;
            p.k = feature_ceiling_;
            p.seed = derive_seed(seed, {2});
            return truncated_svd(ds_->features, p);
        });
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    using Key = std::tuple<int, int, std::uint64_t>;
    using Value = std::shared_ptr<const TsvdResult>;

    template <typename Compute>
    Value lookup(const Key& key, Compute&& compute) {
        if (!enabled_) return std::make_shared<const TsvdResult>(compute());
        std::promise<Value> promise;
        std::shared_future<Value> future;
        bool owner = false;
        {
            std::lock_guard lock(mutex_);
            auto it = entries_.find(key);
            if (it == entries_.end()) {
                future = promise.get_future().share();
                entries_.emplace(key, future);
                owner = true;
            } else {
                future = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(std::make_shared<const TsvdResult>(compute()));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return future.get();
    }

    const GraphDataset* ds_;
    Index graph_ceiling_;
    Index feature_ceiling_;
    TsvdParams base_;
    bool enabled_;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_future<Value>> entries_;
};

// ---------------------------------------------------------------------------
// Trials

/// Classifier input for one configuration: raw X for lr/mlp, the HLP
/// embedding otherwise; column-standardized when cfg.standardize.
inline DenseMatrix build_inputs(const GraphDataset& ds, const TrialConfig& cfg, SpectralCache& cache) {
    EmbeddingMatrix e;
    switch (cfg.model) {
        case ModelKind::lr:
        case ModelKind::mlp:
            e = {ds.features.to_dense(), Provenance::feature};
            break;
        case ModelKind::hlp_agg: {
            detail::check_rank(cfg.hlp.k1, cache.graph_ceiling(), "k1");
            detail::check_rank(cfg.hlp.k2, cache.feature_ceiling(), "k2");
            e = hlp_aggregate(*cache.graph(cfg.hlp.graph_type, cfg.hlp.norm, cfg.seed), *cache.features(cfg.seed),
                              cfg.hlp);
            break;
        }
        case ModelKind::hlp_concat: {
            detail::check_rank(cfg.hlp.k1, cache.graph_ceiling(), "k1");
            detail::check_rank(cfg.hlp.k2, cache.feature_ceiling(), "k2");
            e = hlp_concat(graph_embedding(*cache.graph(cfg.hlp.graph_type, cfg.hlp.norm, cfg.seed), cfg.hlp),
                           feature_embedding(*cache.features(cfg.seed), cfg.hlp));
            break;
        }
    }
    if (cfg.standardize) e = column_standardize(std::move(e));
    return std::move(e.values);
}

/// Classifier settings for split `i`; the lr model never has a hidden layer.
inline MlpConfig split_classifier_config(const TrialConfig& cfg, std::size_t i) {
    MlpConfig m = cfg.mlp;
    if (cfg.model == ModelKind::lr) m.hidden_dim.reset();
    m.seed = derive_seed(cfg.seed, {3, static_cast<std::uint64_t>(i)});
    return m;
}

inline void finalize(TrialResult& r) {
    r.mean_val = mean_of(r.val_accuracy);
    r.mean_test = mean_of(r.test_accuracy);
    r.std_test = std_of(r.test_accuracy);
}

inline TrialResult run_trial(const GraphDataset& ds, const std::vector<Split>& splits, const TrialConfig& cfg,
                             SpectralCache& cache) {
    if (splits.empty()) throw std::invalid_argument("run_trial: no splits");
    const auto start = std::chrono::steady_clock::now();
    TrialResult r;
    r.config = cfg;
    try {
        const DenseMatrix x = build_inputs(ds, cfg, cache);
        for (std::size_t i = 0; i < splits.size(); ++i) {
            const auto t = train(x, ds.labels, ds.num_classes, splits[i], split_classifier_config(cfg, i));
            r.diverged = r.diverged || t.diverged;
            r.val_accuracy.push_back(t.val.accuracy);
            r.test_accuracy.push_back(t.test.accuracy);
        }
    } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
        r.val_accuracy.clear();
        r.test_accuracy.clear();
    }
    finalize(r);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline TrialResult run_trial(const GraphDataset& ds, const std::vector<Split>& splits, const TrialConfig& cfg) {
    SpectralCache cache(ds, cfg.hlp.k1, cfg.hlp.k2);
    return run_trial(ds, splits, cfg, cache);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SearchStrategy { grid, random };

inline std::string_view to_string(SearchStrategy s) { return s == SearchStrategy::grid ? "grid" : "random"; }

inline SearchStrategy parse_search_strategy(std::string_view s) {
    if (s == "grid") return SearchStrategy::grid;
    if (s == "random") return SearchStrategy::random;
    throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

struct SweepSpec {
    ModelKind model = ModelKind::hlp_concat;
    std::vector<double> learning_rates{0.001, 0.003, 0.005, 0.008, 0.01};
    std::vector<double> dropouts{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::vector<double> weight_decays{1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1};
    std::vector<Index> hidden_dims{16, 32, 64};
    Index k1_min = 1;
    Index k1_max = kMaxRank;
    Index k2_min = 1;
    Index k2_max = kMaxRank;
    std::vector<GraphType> graph_types{GraphType::undirected};
    std::vector<Normalization> norms{Normalization::sym};
    /// Single shared rank: k1 = k2.
    bool tie_ranks = false;
    int budget = 200;
    SearchStrategy strategy = SearchStrategy::random;
    std::uint64_t seed = 0;
    /// Fixed (not swept) parts of every trial.
    HlpConfig hlp_base;
    MlpConfig mlp_base;
    bool standardize = true;
};

/// Default search space per model kind. HLP Concat also sweeps graph type
/// and normalization; HLP Aggregation stays undirected + sym.
inline SweepSpec default_sweep_spec(ModelKind kind) {
    SweepSpec s;
    s.model = kind;
    if (kind == ModelKind::hlp_concat) {
        s.graph_types = {GraphType::directed, GraphType::undirected};
        s.norms = {Normalization::none, Normalization::row, Normalization::sym};
    }
    return s;
}

inline void validate(const SweepSpec& s) {
    if (s.budget < 1) throw std::invalid_argument("sweep budget must be >= 1");
    if (s.learning_rates.empty() || s.dropouts.empty() || s.weight_decays.empty())
        throw std::invalid_argument("sweep grids must be nonempty");
    if (s.model != ModelKind::lr && s.hidden_dims.empty()) throw std::invalid_argument("hidden_dims is empty");
    if (uses_spectra(s.model)) {
        if (s.graph_types.empty() || s.norms.empty()) throw std::invalid_argument("graph_types/norms empty");
        if (s.k1_min < 1 || s.k1_max < s.k1_min || s.k2_min < 1 || s.k2_max < s.k2_min)
            throw std::invalid_argument("invalid rank range");
    }
}

struct RankRange {
    Index lo = 1;
    Index hi = 1;
};

/// Rank ranges clamped to what the dataset supports.
inline std::pair<RankRange, RankRange> rank_ranges(const SweepSpec& s, const GraphDataset& ds) {
    RankRange k1{s.k1_min, std::min({s.k1_max, ds.n, kMaxRank})};
    RankRange k2{s.k2_min, std::min({s.k2_max, ds.n, ds.num_features(), kMaxRank})};
    if (s.tie_ranks) k1.hi = k2.hi = std::min(k1.hi, k2.hi), k1.lo = k2.lo = std::max(k1.lo, k2.lo);
    if (k1.lo > k1.hi || k2.lo > k2.hi) throw std::invalid_argument("rank range is empty for this dataset");
    return {k1, k2};
}

/// Powers of two in [lo, hi], plus hi itself.
inline std::vector<Index> rank_ladder(RankRange r) {
    std::vector<Index> out;
    for (Index k = r.lo; k < r.hi; k *= 2) out.push_back(k);
    out.push_back(r.hi);
    return out;
}

/// Integer drawn log-uniformly from [lo, hi].
inline Index sample_log_uniform(Rng& rng, RankRange r) {
    std::uniform_real_distribution<double> u(std::log(static_cast<double>(r.lo)),
                                              std::log(static_cast<double>(r.hi) + 1.0));
    const auto k = static_cast<Index>(std::floor(std::exp(u(rng))));
    return std::clamp(k, r.lo, r.hi);
}

/// The ordered list of trial configurations a sweep will run.
inline std::vector<TrialConfig> plan_trials(const SweepSpec& spec, const GraphDataset& ds) {
    validate(spec);
    const bool spectral = uses_spectra(spec.model);
    const bool hidden = spec.model != ModelKind::lr;
    RankRange k1r, k2r;
    if (spectral) std::tie(k1r, k2r) = rank_ranges(spec, ds);

    TrialConfig base;
    base.model = spec.model;
    base.hlp = spec.hlp_base;
    base.mlp = spec.mlp_base;
    base.standardize = spec.standardize;
    base.seed = spec.seed;
    if (!hidden) base.mlp.hidden_dim.reset();

    std::vector<TrialConfig> plan;
    if (spec.strategy == SearchStrategy::random) {
        for (int i = 0; i < spec.budget; ++i) {
            Rng rng(derive_seed(spec.seed, {0x5eed, static_cast<std::uint64_t>(i)}));
            auto pick = [&](const auto& v) {
                std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
                return v[d(rng)];
            };
            TrialConfig c = base;
            c.mlp.learning_rate = pick(spec.learning_rates);
            c.mlp.dropout = pick(spec.dropouts);
            c.mlp.weight_decay = pick(spec.weight_decays);
            if (hidden) c.mlp.hidden_dim = pick(spec.hidden_dims);
            if (spectral) {
                c.hlp.graph_type = pick(spec.graph_types);
                c.hlp.norm = pick(spec.norms);
                c.hlp.k1 = sample_log_uniform(rng, k1r);
                c.hlp.k2 = spec.tie_ranks ? c.hlp.k1 : sample_log_uniform(rng, k2r);
            }
            plan.push_back(c);
        }
        return plan;
    }

    const std::vector<Index> k1s = spectral ? rank_ladder(k1r) : std::vector<Index>{base.hlp.k1};
    const std::vector<Index> k2s = spectral && !spec.tie_ranks ? rank_ladder(k2r) : std::vector<Index>{0};
    const auto gts = spectral ? spec.graph_types : std::vector<GraphType>{base.hlp.graph_type};
    const auto norms = spectral ? spec.norms : std::vector<Normalization>{base.hlp.norm};
    const auto hds = hidden ? spec.hidden_dims : std::vector<Index>{0};
    auto full = [&] { return static_cast<int>(plan.size()) >= spec.budget; };
    for (auto gt : gts)
        for (auto nm : norms)
            for (Index k1 : k1s)
                for (Index k2 : k2s)
                    for (double lr : spec.learning_rates)
                        for (double dr : spec.dropouts)
                            for (double wd : spec.weight_decays)
                                for (Index hd : hds) {
                                    if (full()) return plan;
                                    TrialConfig c = base;
                                    c.mlp.learning_rate = lr;
                                    c.mlp.dropout = dr;
                                    c.mlp.weight_decay = wd;
                                    if (hidden) c.mlp.hidden_dim = hd;
                                    if (spectral) {
                                        c.hlp.graph_type = gt;
                                        c.hlp.norm = nm;
                                        c.hlp.k1 = k1;
                                        c.hlp.k2 = spec.tie_ranks ? k1 : k2;
                                    }
                                    plan.push_back(c);
                                }
    return plan;
}

struct Report {
    std::string dataset;
    ModelKind model = ModelKind::hlp_concat;
    std::string arm;
    std::vector<TrialResult> trials;
    std::size_t best = 0;

    const TrialResult& best_trial() const { return trials.at(best); }
};

/// Argmax of mean validation accuracy over completed trials; ties go to the
/// lower index.
inline std::size_t select_best(const std::vector<TrialResult>& trials) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].failed) continue;
        if (!best || trials[i].mean_val > trials[*best].mean_val) best = i;
    }
    if (!best) throw std::runtime_error("sweep: no trial completed");
    return *best;
}

struct SweepOptions {
    unsigned workers = 1;
    bool use_cache = true;
    TsvdParams tsvd = SpectralCache::fast_params();
};

/// Runs every configuration on a fixed worker pool; results are ordered by
/// trial id and independent of the worker count.
inline std::vector<TrialResult> run_trials(const GraphDataset& ds, const std::vector<Split>& splits,
                                           const std::vector<TrialConfig>& plan, const SweepOptions& opts) {
    Index g_ceiling = 1, f_ceiling = 1;
    for (const auto& c : plan) {
        if (!uses_spectra(c.model)) continue;
        g_ceiling = std::max(g_ceiling, c.hlp.k1);
        f_ceiling = std::max(f_ceiling, c.hlp.k2);
    }
    SpectralCache cache(ds, g_ceiling, f_ceiling, opts.tsvd, opts.use_cache);

    std::vector<TrialResult> results(plan.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < plan.size();) {
            results[i] = run_trial(ds, splits, plan[i], cache);
            results[i].trial_id = static_cast<int>(i);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(plan.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
    }
    return results;
}

inline Report sweep(const GraphDataset& ds, const std::vector<Split>& splits, const SweepSpec& spec,
                    const SweepOptions& opts = {}, std::string arm = "") {
    if (splits.empty()) throw std::invalid_argument("sweep: no splits");
    Report r;
    r.dataset = ds.name;
    r.model = spec.model;
    r.arm = std::move(arm);
    r.trials = run_trials(ds, splits, plan_trials(spec, ds), opts);
    r.best = select_best(r.trials);
    return r;
}

struct PairedReport {
    Report a;
    Report b;
};

/// Arm A: one shared rank (k1 = k2). Arm B: the spec as given.
inline PairedReport ablation_fixed_vs_variable(const GraphDataset& ds, const std::vector<Split>& splits,
                                               const SweepSpec& spec, const SweepOptions& opts = {}) {
    if (spec.model != ModelKind::hlp_concat) throw std::invalid_argument("dims ablation expects hlp_concat");
    SweepSpec fixed = spec;
    fixed.tie_ranks = true;
    return {sweep(ds, splits, fixed, opts, "fixed_dims"), sweep(ds, splits, spec, opts, "variable_dims")};
}

/// Arm A: undirected + sym only. Arm B: the spec's graph types × norms.
inline PairedReport ablation_normalization(const GraphDataset& ds, const std::vector<Split>& splits,
                                           const SweepSpec& spec, const SweepOptions& opts = {}) {
    if (spec.model != ModelKind::hlp_agg) throw std::invalid_argument("norm ablation expects hlp_agg");
    SweepSpec sym = spec;
    sym.graph_types = {GraphType::undirected};
    sym.norms = {Normalization::sym};
    return {sweep(ds, splits, sym, opts, "sym_only"), sweep(ds, splits, spec, opts, "norm_swept")};
}

/// Trains on one split and writes the input of the final layer for every node.
inline void export_embeddings(const GraphDataset& ds, const std::vector<Split>& splits, const TrialConfig& cfg,
                              std::size_t split_index, const std::filesystem::path& out) {
    if (split_index >= splits.size()) throw std::out_of_range("split index out of range");
    SpectralCache cache(ds, cfg.hlp.k1, cfg.hlp.k2);
    const DenseMatrix x = build_inputs(ds, cfg, cache);
    const auto t = train(x, ds.labels, ds.num_classes, splits[split_index], split_classifier_config(cfg, split_index));
    write_embeddings(penultimate(t.trained.model, x), ds.labels, out);
}

}  // namespace hlp
