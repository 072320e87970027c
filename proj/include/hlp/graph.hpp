#pragma once

// Node-classification datasets: the on-disk directory format, adjacency
// construction, train/val/test split generation and summary statistics.
//
// Directory layout ('#' lines are comments everywhere):
//   meta          n_nodes=<int>, n_features=<int>, n_classes=<int>, name=<string>
//   edges.tsv     src<TAB>dst            one directed edge per line, 0-based
//   features.tsv  node<TAB>feature<TAB>value
//   labels.tsv    node<TAB>class
//   splits/       optional split_<i>.txt files, see read_split()

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hlp/rng.hpp"
#include "hlp/sparse.hpp"

namespace hlp {

namespace fs = std::filesystem;

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class GraphType { directed, undirected };

inline std::string_view to_string(GraphType g) {
    return g == GraphType::directed ? "directed" : "undirected";
}

inline GraphType parse_graph_type(std::string_view s) {
    if (s == "directed") return GraphType::directed;
    if (s == "undirected") return GraphType::undirected;
    throw std::invalid_argument("unknown graph type '" + std::string(s) + "'");
}

struct Edge {
    Index src = 0;
    Index dst = 0;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct GraphDataset {
    std::string name;
    Index n = 0;
    std::vector<Edge> edges;  ///< sorted, unique directed pairs
    SparseMatrix features;    ///< n × d
    std::vector<int> labels;
    int num_classes = 0;

    Index num_features() const noexcept { return features.cols(); }
};

/// Validates and canonicalizes (sort + dedup edges). Self-loops are kept.
inline GraphDataset make_dataset(std::string name, Index n, std::vector<Edge> edges,
                                 SparseMatrix features, std::vector<int> labels, int num_classes) {
    if (n < 0) throw DataError("dataset: negative node count");
    if (features.rows() != n)
        throw DataError("dataset: feature rows " + std::to_string(features.rows()) +
                        " != n_nodes " + std::to_string(n));
    if (static_cast<Index>(labels.size()) != n) throw DataError("dataset: label count != n_nodes");
    for (const auto& e : edges)
        if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
            throw DataError("dataset: edge (" + std::to_string(e.src) + ", " +
                            std::to_string(e.dst) + ") out of range");
    std::vector<int> counts(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
    for (int y : labels) {
        if (y < 0 || y >= num_classes)
            throw DataError("dataset: label " + std::to_string(y) + " outside [0, " +
                            std::to_string(num_classes) + ")");
        ++counts[static_cast<std::size_t>(y)];
    }
    for (int c = 0; c < num_classes; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw DataError("dataset: class " + std::to_string(c) + " has no nodes");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return GraphDataset{std::move(name), n, std::move(edges), std::move(features), std::move(labels),
                        num_classes};
}

struct LoadOptions {
    /// Adds (i, i) for every node. Off by default.
    bool add_self_loops = false;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        auto next = line.find_first_of("\t ", pos);
        if (next == std::string_view::npos) next = line.size();
        if (next > pos) out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& where) {
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is unavailable on older libstdc++.
        std::string tmp(s);
        char* end = nullptr;
        value = std::strtod(tmp.c_str(), &end);
        if (tmp.empty() || end != tmp.c_str() + tmp.size())
            throw DataError(where + ": malformed number '" + tmp + "'");
    } else {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size())
            throw DataError(where + ": malformed integer '" + std::string(s) + "'");
    }
    return value;
}

/// Calls fn(fields, "file:line") for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("missing file: " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        fn(std::string_view(t), path.filename().string() + ":" + std::to_string(lineno));
    }
}

inline Index checked_node(std::string_view field, Index n, const std::string& where) {
    const auto id = parse_number<long long>(field, where);
    if (id < 0 || id >= n)
        throw DataError(where + ": node id " + std::to_string(id) + " out of range [0, " +
                        std::to_string(n) + ")");
    return static_cast<Index>(id);
}

}  // namespace detail

/// key=value pairs of <dir>/meta.
inline std::map<std::string, std::string> read_meta(const fs::path& dir) {
    std::map<std::string, std::string> meta;
    detail::for_each_record(dir / "meta", [&](std::string_view line, const std::string& where) {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw DataError(where + ": expected key=value");
        meta[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    });
    return meta;
}

inline GraphDataset load_dataset(const fs::path& dir, const LoadOptions& opts = {}) {
    auto meta = read_meta(dir);
    auto meta_int = [&](const std::string& key) -> long long {
        auto it = meta.find(key);
        if (it == meta.end()) throw DataError("meta: missing key '" + key + "'");
        return detail::parse_number<long long>(it->second, "meta:" + key);
    };
    const Index n = meta_int("n_nodes");
    const Index d = meta_int("n_features");
    const int num_classes = static_cast<int>(meta_int("n_classes"));
    const std::string name = meta.count("name") ? meta["name"] : dir.filename().string();

    std::vector<Edge> edges;
    detail::for_each_record(dir / "edges.tsv", [&](std::string_view line, const std::string& where) {
        auto f = detail::split_fields(line);
        if (f.size() != 2) throw DataError(where + ": expected 'src<TAB>dst'");
        edges.push_back({detail::checked_node(f[0], n, where), detail::checked_node(f[1], n, where)});
    });
    if (opts.add_self_loops)
        for (Index i = 0; i < n; ++i) edges.push_back({i, i});

    std::vector<Triplet> triplets;
    detail::for_each_record(dir / "features.tsv", [&](std::string_view line, const std::string& where) {
        auto f = detail::split_fields(line);
        if (f.size() != 3) throw DataError(where + ": expected 'node<TAB>feature<TAB>value'");
        const Index node = detail::checked_node(f[0], n, where);
        const auto feat = detail::parse_number<long long>(f[1], where);
        if (feat < 0 || feat >= d)
            throw DataError(where + ": feature id " + std::to_string(feat) + " out of range [0, " +
                            std::to_string(d) + ")");
        const double v = detail::parse_number<double>(f[2], where);
        if (!std::isfinite(v)) throw DataError(where + ": non-finite feature value");
        triplets.push_back({node, static_cast<Index>(feat), v});
    });

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    detail::for_each_record(dir / "labels.tsv", [&](std::string_view line, const std::string& where) {
        auto f = detail::split_fields(line);
        if (f.size() != 2) throw DataError(where + ": expected 'node<TAB>class'");
        const Index node = detail::checked_node(f[0], n, where);
        const auto y = detail::parse_number<int>(f[1], where);
        if (y < 0 || y >= num_classes)
            throw DataError(where + ": class " + std::to_string(y) + " out of range [0, " +
                            std::to_string(num_classes) + ")");
        if (labels[static_cast<std::size_t>(node)] != -1)
            throw DataError(where + ": node " + std::to_string(node) + " labelled twice");
        labels[static_cast<std::size_t>(node)] = y;
    });
    for (Index i = 0; i < n; ++i)
        if (labels[static_cast<std::size_t>(i)] < 0)
            throw DataError("labels.tsv: node " + std::to_string(i) + " has no label");

    return make_dataset(name, n, std::move(edges),
                        SparseMatrix::from_triplets(n, d, std::move(triplets)), std::move(labels),
                        num_classes);
}

inline void save_dataset(const GraphDataset& ds, const fs::path& dir) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "meta");
        out << "name=" << ds.name << "\nn_nodes=" << ds.n << "\nn_features=" << ds.num_features()
            << "\nn_classes=" << ds.num_classes << "\n";
    }
    {
        std::ofstream out(dir / "edges.tsv");
        for (const auto& e : ds.edges) out << e.src << '\t' << e.dst << '\n';
    }
    {
        std::ofstream out(dir / "features.tsv");
        out.precision(17);
        for (Index r = 0; r < ds.features.rows(); ++r) {
            auto cols = ds.features.row_cols(r);
            auto vals = ds.features.row_values(r);
            for (std::size_t p = 0; p < cols.size(); ++p)
                out << r << '\t' << cols[p] << '\t' << vals[p] << '\n';
        }
    }
    {
        std::ofstream out(dir / "labels.tsv");
        for (Index i = 0; i < ds.n; ++i) out << i << '\t' << ds.labels[static_cast<std::size_t>(i)] << '\n';
    }
    if (!fs::exists(dir / "meta")) throw DataError("could not write dataset to " + dir.string());
}

/// Binary adjacency of the edge list (directed as given, or symmetrized),
/// then normalized.
inline SparseMatrix build_adjacency(const GraphDataset& ds, GraphType type, Normalization norm) {
    std::vector<Triplet> t;
    t.reserve(ds.edges.size());
    for (const auto& e : ds.edges) t.push_back({e.src, e.dst, 1.0});
    SparseMatrix a = SparseMatrix::from_triplets(ds.n, ds.n, std::move(t));
    if (type == GraphType::undirected) a = symmetrize(a);
    return normalize(a, norm);
}

/// Undirected, deduplicated edge set without self-loops, as (min, max) pairs.
inline std::vector<Edge> undirected_edges(const GraphDataset& ds) {
    std::vector<Edge> out;
    out.reserve(ds.edges.size());
    for (const auto& e : ds.edges)
        if (e.src != e.dst) out.push_back({std::min(e.src, e.dst), std::max(e.src, e.dst)});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Fraction of undirected (self-loop free) edges joining same-label nodes.
inline double homophily_score(const GraphDataset& ds) {
    const auto edges = undirected_edges(ds);
    if (edges.empty()) throw DataError("homophily: graph has no edges");
    std::size_t same = 0;
    for (const auto& e : edges)
        same += ds.labels[static_cast<std::size_t>(e.src)] == ds.labels[static_cast<std::size_t>(e.dst)];
    return static_cast<double>(same) / static_cast<double>(edges.size());
}

struct DatasetStats {
    std::string name;
    double homophily = 0.0;
    Index n_nodes = 0;
    Index n_directed_edges = 0;    ///< unique directed pairs, self-loops included
    Index n_undirected_edges = 0;  ///< unique unordered pairs, self-loops excluded
    Index n_self_loops = 0;
    Index n_features = 0;
    int n_classes = 0;
};

inline DatasetStats stats(const GraphDataset& ds) {
    DatasetStats s;
    s.name = ds.name;
    s.n_nodes = ds.n;
    s.n_directed_edges = static_cast<Index>(ds.edges.size());
    s.n_undirected_edges = static_cast<Index>(undirected_edges(ds).size());
    s.n_self_loops = std::count_if(ds.edges.begin(), ds.edges.end(),
                                   [](const Edge& e) { return e.src == e.dst; });
    s.n_features = ds.num_features();
    s.n_classes = ds.num_classes;
    s.homophily = s.n_undirected_edges > 0 ? homophily_score(ds) : 0.0;
    return s;
}

inline std::string format_stats(const DatasetStats& s) {
    std::ostringstream out;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", s.homophily);
    out << "dataset          " << s.name << '\n'
        << "homophily        " << buf << '\n'
        << "nodes            " << s.n_nodes << '\n'
        << "edges_directed   " << s.n_directed_edges << '\n'
        << "edges_undirected " << s.n_undirected_edges << '\n'
        << "self_loops       " << s.n_self_loops << '\n'
        << "features         " << s.n_features << '\n'
        << "classes          " << s.n_classes << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Splits

struct Split {
    std::vector<Index> train;
    std::vector<Index> val;
    std::vector<Index> test;

    friend bool operator==(const Split&, const Split&) = default;
};

struct SplitRatios {
    double train = 0.48;
    double val = 0.32;
    double test = 0.20;
};

struct SplitSizes {
    Index train = 0;
    Index val = 0;
    Index test = 0;
};

/// floor(train·n), floor(val·n), remainder.
inline SplitSizes sizes_from_ratios(Index n, const SplitRatios& r) {
    if (r.train < 0 || r.val < 0 || r.test < 0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9)
        throw std::invalid_argument("split ratios must be non-negative and sum to 1");
    // The small epsilon keeps exact products such as 0.3·10 from flooring to 2.
    const auto tr = static_cast<Index>(std::floor(r.train * static_cast<double>(n) + 1e-9));
    const auto va = static_cast<Index>(std::floor(r.val * static_cast<double>(n) + 1e-9));
    return {tr, va, n - tr - va};
}

inline void validate_split(const Split& s, const GraphDataset& ds) {
    std::vector<char> seen(static_cast<std::size_t>(ds.n), 0);
    for (const auto* part : {&s.train, &s.val, &s.test}) {
        if (part->empty()) throw DataError("split: empty part");
        for (Index i : *part) {
            if (i < 0 || i >= ds.n) throw DataError("split: node id " + std::to_string(i) + " out of range");
            if (seen[static_cast<std::size_t>(i)]++) throw DataError("split: node " + std::to_string(i) + " in two parts");
        }
    }
}

inline bool covers_all_classes(const std::vector<Index>& nodes, const GraphDataset& ds) {
    std::vector<char> hit(static_cast<std::size_t>(ds.num_classes), 0);
    for (Index i : nodes) hit[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])] = 1;
    return std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
}

inline constexpr int kMaxSplitRedraws = 100;

/// `count` random splits of the given absolute sizes. Split i is drawn from a
/// seed derived from (seed, i, attempt); a draw whose train part misses a
/// class is redrawn.
inline std::vector<Split> generate_splits(const GraphDataset& ds, const SplitSizes& sizes, int count,
                                          std::uint64_t seed) {
    if (sizes.train < 1 || sizes.val < 1 || sizes.test < 1)
        throw std::invalid_argument("generate_splits: every part needs at least one node");
    if (sizes.train + sizes.val + sizes.test > ds.n)
        throw std::invalid_argument("generate_splits: sizes exceed node count");
    std::vector<Split> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<Index> perm(static_cast<std::size_t>(ds.n));
    for (int s = 0; s < count; ++s) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxSplitRedraws && !ok; ++attempt) {
            std::iota(perm.begin(), perm.end(), Index{0});
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(attempt)}));
            std::shuffle(perm.begin(), perm.end(), rng);
            Split split;
            auto it = perm.begin();
            split.train.assign(it, it + sizes.train);
            it += sizes.train;
            split.val.assign(it, it + sizes.val);
            it += sizes.val;
            split.test.assign(it, it + sizes.test);
            if (!covers_all_classes(split.train, ds)) continue;
            std::sort(split.train.begin(), split.train.end());
            std::sort(split.val.begin(), split.val.end());
            std::sort(split.test.begin(), split.test.end());
            out.push_back(std::move(split));
            ok = true;
        }
        if (!ok)
            throw DataError("generate_splits: no split with every class in train after " +
                            std::to_string(kMaxSplitRedraws) + " draws");
    }
    return out;
}

inline std::vector<Split> generate_splits(const GraphDataset& ds, const SplitRatios& ratios, int count,
                                          std::uint64_t seed) {
    return generate_splits(ds, sizes_from_ratios(ds.n, ratios), count, seed);
}

/// Split file: three lines "train: i j k ...", "val: ...", "test: ...".
inline std::string format_split(const Split& s) {
    std::ostringstream out;
    auto line = [&](const char* tag, const std::vector<Index>& ids) {
        out << tag << ':';
        for (Index i : ids) out << ' ' << i;
        out << '\n';
    };
    line("train", s.train);
    line("val", s.val);
    line("test", s.test);
    return out.str();
}

inline Split parse_split(std::string_view text, const std::string& where = "split") {
    Split s;
    bool have[3] = {false, false, false};
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const std::string loc = where + ":" + std::to_string(lineno);
        const auto colon = t.find(':');
        if (colon == std::string::npos) throw DataError(loc + ": expected '<part>: ids...'");
        const std::string tag = detail::trim(std::string_view(t).substr(0, colon));
        std::vector<Index>* dst = nullptr;
        int slot = 0;
        if (tag == "train") dst = &s.train, slot = 0;
        else if (tag == "val") dst = &s.val, slot = 1;
        else if (tag == "test") dst = &s.test, slot = 2;
        else throw DataError(loc + ": unknown part '" + tag + "'");
        have[slot] = true;
        for (auto f : detail::split_fields(std::string_view(t).substr(colon + 1)))
            dst->push_back(static_cast<Index>(detail::parse_number<long long>(f, loc)));
    }
    if (!have[0] || !have[1] || !have[2]) throw DataError(where + ": missing train/val/test line");
    return s;
}

inline Split read_split(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_split(buf.str(), path.filename().string());
}

inline void write_split(const Split& s, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << format_split(s);
}

inline void write_splits(const std::vector<Split>& splits, const fs::path& dir) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < splits.size(); ++i)
        write_split(splits[i], dir / ("split_" + std::to_string(i) + ".txt"));
}

/// Reads split_0.txt, split_1.txt, ... until the first gap; validates each.
inline std::vector<Split> load_splits(const fs::path& dir, const GraphDataset& ds) {
    std::vector<Split> out;
    for (int i = 0;; ++i) {
        const auto p = dir / ("split_" + std::to_string(i) + ".txt");
        if (!fs::exists(p)) break;
        out.push_back(read_split(p));
        validate_split(out.back(), ds);
    }
    return out;
}

/// "a,b,c" -> SplitSizes.
inline SplitSizes parse_split_sizes(std::string_view text) {
    std::vector<Index> v;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        v.push_back(detail::parse_number<long long>(detail::trim(text.substr(pos, comma - pos)), "split sizes"));
        pos = comma + 1;
    }
    if (v.size() != 3) throw DataError("split sizes: expected three comma-separated counts");
    return {v[0], v[1], v[2]};
}

/// Splits for a dataset directory: <dir>/splits/split_<i>.txt when present,
/// else `count` generated splits using the meta key split_sizes=a,b,c if
/// given, else the default ratios.
inline std::vector<Split> default_splits(const fs::path& dir, const GraphDataset& ds, int count = 10,
                                         std::uint64_t seed = 0) {
    if (fs::exists(dir / "splits" / "split_0.txt")) return load_splits(dir / "splits", ds);
    const auto meta = read_meta(dir);
    if (auto it = meta.find("split_sizes"); it != meta.end())
        return generate_splits(ds, parse_split_sizes(it->second), count, seed);
    return generate_splits(ds, SplitRatios{}, count, seed);
}

}  // namespace hlp
