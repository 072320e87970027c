#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "hlp/graph.hpp"

namespace {

namespace fs = std::filesystem;
using hlp::Edge;
using hlp::GraphType;
using hlp::Normalization;

fs::path data_dir() {
    const char* env = std::getenv("HLP_TEST_DATA");
    return env ? fs::path(env) : fs::path(HLP_SOURCE_DIR) / "tests" / "data";
}

hlp::GraphDataset tiny(std::vector<Edge> edges, std::vector<int> labels, int classes) {
    const auto n = static_cast<hlp::Index>(labels.size());
    return hlp::make_dataset("tiny", n, std::move(edges), hlp::SparseMatrix(n, 1), std::move(labels),
                             classes);
}

}  // namespace

TEST(LoadDataset, ToyFixtureRoundTrip) {
    auto ds = hlp::load_dataset(data_dir() / "toy3");
    EXPECT_EQ(ds.name, "toy3");
    EXPECT_EQ(ds.n, 3);
    EXPECT_EQ(ds.num_features(), 2);
    EXPECT_EQ(ds.num_classes, 2);
    EXPECT_EQ(ds.edges, (std::vector<Edge>{{0, 1}, {1, 2}}));
    EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 0}));
    EXPECT_DOUBLE_EQ(ds.features.coeff(1, 1), 2.5);
    EXPECT_DOUBLE_EQ(ds.features.coeff(2, 0), -0.5);

    const auto tmp = fs::temp_directory_path() / "hlp_toy3_roundtrip";
    fs::remove_all(tmp);
    hlp::save_dataset(ds, tmp);
    auto again = hlp::load_dataset(tmp);
    EXPECT_EQ(again.name, ds.name);
    EXPECT_EQ(again.edges, ds.edges);
    EXPECT_EQ(again.labels, ds.labels);
    EXPECT_EQ(again.features, ds.features);
    fs::remove_all(tmp);
}

TEST(LoadDataset, OutOfRangeNodeReportsLine) {
    try {
        hlp::load_dataset(data_dir() / "bad_node_id");
        FAIL() << "expected DataError";
    } catch (const hlp::DataError& e) {
        EXPECT_NE(std::string(e.what()).find("edges.tsv:3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("node id 3"), std::string::npos) << e.what();
    }
}

TEST(LoadDataset, MissingFileAndLabelGap) {
    EXPECT_THROW(hlp::load_dataset(data_dir() / "does_not_exist"), hlp::DataError);
    EXPECT_THROW(tiny({{0, 1}}, {0, 2, 0}, 3), hlp::DataError);
}

TEST(LoadDataset, MalformedLine) {
    const auto tmp = fs::temp_directory_path() / "hlp_malformed";
    fs::remove_all(tmp);
    hlp::save_dataset(hlp::load_dataset(data_dir() / "toy3"), tmp);
    { std::ofstream(tmp / "labels.tsv", std::ios::app) << "2\n"; }
    try {
        hlp::load_dataset(tmp);
        FAIL() << "expected DataError";
    } catch (const hlp::DataError& e) {
        EXPECT_NE(std::string(e.what()).find("labels.tsv:4"), std::string::npos) << e.what();
    }
    fs::remove_all(tmp);
}

TEST(LoadDataset, DuplicateEdgesRemovedSelfLoopsKept) {
    auto ds = tiny({{0, 1}, {0, 1}, {2, 2}, {1, 0}}, {0, 1, 0}, 2);
    EXPECT_EQ(ds.edges, (std::vector<Edge>{{0, 1}, {1, 0}, {2, 2}}));
}

TEST(BuildAdjacency, UndirectedSym) {
    auto ds = tiny({{0, 1}}, {0, 1}, 2);
    auto a = hlp::build_adjacency(ds, GraphType::undirected, Normalization::sym);
    EXPECT_EQ(a.to_dense(), (Eigen::Matrix2d() << 0, 1, 1, 0).finished());
}

TEST(BuildAdjacency, DirectedRow) {
    auto ds = tiny({{0, 1}}, {0, 1}, 2);
    auto a = hlp::build_adjacency(ds, GraphType::directed, Normalization::row);
    EXPECT_DOUBLE_EQ(a.coeff(0, 1), 1.0);
    EXPECT_EQ(a.row_cols(1).size(), 0u);
}

TEST(BuildAdjacency, UndirectedNnzMatchesEdgeRecount) {
    auto ds = fixtures::synthetic_heterophilic();
    ds.edges.push_back({5, 5});
    ds = hlp::make_dataset(ds.name, ds.n, ds.edges, ds.features, ds.labels, ds.num_classes);
    auto a = hlp::build_adjacency(ds, GraphType::undirected, Normalization::none);
    std::set<std::pair<hlp::Index, hlp::Index>> pairs;
    for (auto e : ds.edges) pairs.insert({std::min(e.src, e.dst), std::max(e.src, e.dst)});
    hlp::Index loops = 0;
    for (auto& p : pairs) loops += p.first == p.second;
    EXPECT_EQ(a.nnz(), 2 * static_cast<hlp::Index>(pairs.size()) - loops);
    EXPECT_EQ(hlp::transpose(a), a);
}

TEST(Homophily, TriangleOneThird) {
    auto ds = tiny({{0, 1}, {1, 2}, {2, 0}}, {0, 0, 1}, 2);
    EXPECT_DOUBLE_EQ(hlp::homophily_score(ds), 1.0 / 3.0);
}

TEST(Homophily, AllSameLabel) {
    auto ds = tiny({{0, 1}, {1, 2}}, {0, 0, 0}, 1);
    EXPECT_DOUBLE_EQ(hlp::homophily_score(ds), 1.0);
}

TEST(Homophily, NoEdgesThrows) {
    EXPECT_THROW(hlp::homophily_score(tiny({{1, 1}}, {0, 1}, 2)), hlp::DataError);
}

TEST(Homophily, InvariantToOrderingAndDirectionDuplicates) {
    auto ds = fixtures::synthetic_heterophilic();
    const double h = hlp::homophily_score(ds);
    auto edges = ds.edges;
    std::mt19937 rng(3);
    std::shuffle(edges.begin(), edges.end(), rng);
    for (std::size_t i = 0; i < edges.size(); i += 3) edges.push_back({edges[i].dst, edges[i].src});
    auto ds2 = hlp::make_dataset(ds.name, ds.n, edges, ds.features, ds.labels, ds.num_classes);
    EXPECT_DOUBLE_EQ(hlp::homophily_score(ds2), h);
    EXPECT_LT(h, 0.3);
}

TEST(Stats, ToyMatchesInputs) {
    auto s = hlp::stats(hlp::load_dataset(data_dir() / "toy3"));
    EXPECT_EQ(s.n_nodes, 3);
    EXPECT_EQ(s.n_directed_edges, 2);
    EXPECT_EQ(s.n_undirected_edges, 2);
    EXPECT_EQ(s.n_features, 2);
    EXPECT_EQ(s.n_classes, 2);
    EXPECT_DOUBLE_EQ(s.homophily, 0.0);
}

TEST(Splits, SizesByFloorRule) {
    auto sz = hlp::sizes_from_ratios(183, {});
    EXPECT_EQ(sz.train, 87);
    EXPECT_EQ(sz.val, 58);
    EXPECT_EQ(sz.test, 38);
    auto ten = hlp::sizes_from_ratios(10, {0.5, 0.3, 0.2});
    EXPECT_EQ(ten.train, 5);
    EXPECT_EQ(ten.val, 3);
    EXPECT_EQ(ten.test, 2);
    EXPECT_THROW(hlp::sizes_from_ratios(10, {0.5, 0.3, 0.3}), std::invalid_argument);
}

TEST(Splits, PartitionCoverageAndDeterminism) {
    auto ds = fixtures::synthetic_heterophilic();
    auto a = hlp::generate_splits(ds, hlp::SplitRatios{}, 10, 17);
    auto b = hlp::generate_splits(ds, hlp::SplitRatios{}, 10, 17);
    ASSERT_EQ(a.size(), 10u);
    EXPECT_EQ(a, b);
    EXPECT_NE(a[0], a[1]);
    for (const auto& s : a) {
        EXPECT_NO_THROW(hlp::validate_split(s, ds));
        EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), static_cast<std::size_t>(ds.n));
        EXPECT_TRUE(hlp::covers_all_classes(s.train, ds));
    }
}

TEST(Splits, AbsoluteSizes) {
    auto ds = fixtures::synthetic_heterophilic();
    auto s = hlp::generate_splits(ds, hlp::SplitSizes{12, 18, 210}, 2, 0);
    EXPECT_EQ(s[0].train.size(), 12u);
    EXPECT_EQ(s[0].val.size(), 18u);
    EXPECT_EQ(s[0].test.size(), 210u);
}

TEST(Splits, RedrawUntilEveryClassInTrain) {
    // class 1 has a single node; train of size 2 out of 10 usually misses it
    std::vector<int> labels(10, 0);
    labels[7] = 1;
    auto ds = tiny({{0, 1}}, labels, 2);
    auto splits = hlp::generate_splits(ds, hlp::SplitSizes{2, 4, 4}, 5, 3);
    for (const auto& s : splits) EXPECT_TRUE(hlp::covers_all_classes(s.train, ds));
}

TEST(Splits, UnsatisfiableCoverageThrows) {
    std::vector<int> labels{0, 1, 2, 3, 4, 0, 0, 0};
    auto ds = tiny({{0, 1}}, labels, 5);
    EXPECT_THROW(hlp::generate_splits(ds, hlp::SplitSizes{3, 3, 2}, 1, 0), hlp::DataError);
}

TEST(Splits, FileFormatRoundTrip) {
    auto ds = fixtures::synthetic_heterophilic();
    auto splits = hlp::generate_splits(ds, hlp::SplitRatios{}, 3, 5);
    const auto tmp = fs::temp_directory_path() / "hlp_splits_rt";
    fs::remove_all(tmp);
    hlp::write_splits(splits, tmp);
    EXPECT_EQ(hlp::load_splits(tmp, ds), splits);
    fs::remove_all(tmp);
    EXPECT_THROW(hlp::parse_split("train: 1 2\nval: 3\n"), hlp::DataError);
    EXPECT_THROW(hlp::parse_split("train: 1 x\nval: 3\ntest: 4\n"), hlp::DataError);
}

TEST(Splits, DefaultSplitsFromDirectory) {
    auto ds = fixtures::synthetic_heterophilic();
    const auto tmp = fs::temp_directory_path() / "hlp_default_splits";
    fs::remove_all(tmp);
    hlp::save_dataset(ds, tmp);
    const auto by_ratio = hlp::default_splits(tmp, ds, 2, 1);
    EXPECT_EQ(by_ratio, hlp::generate_splits(ds, hlp::SplitRatios{}, 2, 1));

    { std::ofstream(tmp / "meta", std::ios::app) << "split_sizes=12,18,210\n"; }
    const auto by_size = hlp::default_splits(tmp, ds, 2, 1);
    EXPECT_EQ(by_size[0].train.size(), 12u);
    EXPECT_EQ(by_size[0].test.size(), 210u);

    const auto stored = hlp::generate_splits(ds, hlp::SplitRatios{}, 3, 99);
    hlp::write_splits(stored, tmp / "splits");
    EXPECT_EQ(hlp::default_splits(tmp, ds), stored);
    fs::remove_all(tmp);
    EXPECT_THROW(hlp::parse_split_sizes("1,2"), hlp::DataError);
}
