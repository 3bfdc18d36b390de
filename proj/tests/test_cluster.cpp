#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "clmb/cluster.hpp"
#include "clmb/common.hpp"
#include "clmb/rng.hpp"
#include "util.hpp"

using clmb::Clustering;
using clmb::Mat;

namespace {

Mat<float> axis_blobs(int k, int per, double sigma, std::uint64_t seed,
                      std::vector<int>* labels) {
    clmb::Rng rng(seed);
    Mat<float> out(static_cast<std::size_t>(k * per), static_cast<std::size_t>(k));
    if (labels) labels->assign(static_cast<std::size_t>(k * per), 0);
    std::size_t r = 0;
    for (int c = 0; c < k; ++c)
        for (int p = 0; p < per; ++p, ++r) {
            for (int j = 0; j < k; ++j)
                out(r, static_cast<std::size_t>(j)) =
                    static_cast<float>((j == c ? 2.0 : 0.0) + sigma * rng.normal());
            if (labels) (*labels)[r] = c;
        }
    return out;
}

Mat<float> from_rows(const std::vector<std::vector<float>>& rows) {
    Mat<float> out(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
    return out;
}

void check_contiguous(const Clustering& c) {
    std::set<int> seen(c.assignment.begin(), c.assignment.end());
    REQUIRE(!seen.empty());
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == c.cluster_count - 1);
    CHECK(static_cast<int>(seen.size()) == c.cluster_count);
}

} // namespace

TEST_CASE("medoid clustering puts a lone point in a singleton bin") {
    Mat<float> one = from_rows({{0.3f, -1.2f, 0.5f}});
    Clustering c = clmb::iterative_medoid(one, clmb::MedoidParams{});
    CHECK(c.cluster_count == 1);
    CHECK(c.assignment == std::vector<int>{0});
}

TEST_CASE("medoid clustering merges identical points") {
    std::vector<std::vector<float>> rows(8, {1.0f, 2.0f, -0.5f});
    Clustering c = clmb::iterative_medoid(from_rows(rows), clmb::MedoidParams{});
    CHECK(c.cluster_count == 1);
    for (int a : c.assignment) CHECK(a == 0);
}

TEST_CASE("medoid clustering recovers well separated direction blobs") {
    std::vector<int> truth;
    Mat<float> X = axis_blobs(4, 30, 0.05, 111, &truth);
    Clustering c = clmb::iterative_medoid(X, clmb::MedoidParams{});
    check_contiguous(c);
    CHECK(c.cluster_count == 4);
    CHECK(testutil::same_partition(c.assignment, truth));
}

TEST_CASE("medoid min_cluster_size demotes small groups to singletons") {
    std::vector<std::vector<float>> rows(3, {1.0f, 0.0f});
    clmb::MedoidParams p;
    p.min_cluster_size = 5;
    Clustering c = clmb::iterative_medoid(from_rows(rows), p);
    CHECK(c.cluster_count == 3);
    std::set<int> distinct(c.assignment.begin(), c.assignment.end());
    CHECK(distinct.size() == 3);
}

TEST_CASE("kmeans recovers planted blobs exactly") {
    std::vector<int> truth;
    Mat<float> X = testutil::planted_blobs(4, 25, 6, 0.05, 1.5, 77, &truth);
    clmb::KmeansParams p;
    p.k = 4;
    p.seed = 3;
    Clustering c = clmb::minibatch_kmeans(X, p);
    check_contiguous(c);
    CHECK(c.cluster_count == 4);
    CHECK(testutil::same_partition(c.assignment, truth));
}

TEST_CASE("kmeans with one center per distinct point reaches zero inertia") {
    Mat<float> X = from_rows({{0.0f, 0.0f},
                              {1.0f, 0.0f},
                              {0.0f, 1.0f},
                              {1.0f, 1.0f},
                              {2.0f, 2.0f}});
    clmb::KmeansParams p;
    p.k = 5;
    p.seed = 1;
    Clustering c = clmb::minibatch_kmeans(X, p);
    CHECK(c.cluster_count == 5);
    std::set<int> distinct(c.assignment.begin(), c.assignment.end());
    CHECK(distinct.size() == 5);
}

TEST_CASE("kmeans clamps an oversized k to the point count") {
    clmb::Rng rng(9);
    Mat<float> X(10, 3);
    for (std::size_t i = 0; i < X.size(); ++i) X.data()[i] = static_cast<float>(rng.normal());
    clmb::KmeansParams p;
    CHECK(p.k == 750);
    p.seed = 5;
    Clustering c = clmb::minibatch_kmeans(X, p);
    check_contiguous(c);
    CHECK(c.cluster_count == 10);
}

TEST_CASE("kmeans deterministic for a fixed seed") {
    std::vector<int> truth;
    Mat<float> X = testutil::planted_blobs(3, 20, 4, 0.08, 1.2, 31, &truth);
    clmb::KmeansParams p;
    p.k = 3;
    p.seed = 12;
    Clustering a = clmb::minibatch_kmeans(X, p);
    Clustering b = clmb::minibatch_kmeans(X, p);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("dbscan keeps close points together and splits far ones") {
    clmb::DbscanParams p;
    CHECK(p.eps == doctest::Approx(0.35));
    CHECK(p.min_samples == 2);

    Clustering close = clmb::dbscan(from_rows({{0.0f, 0.0f}, {0.1f, 0.0f}}), p);
    CHECK(close.cluster_count == 1);
    CHECK(close.assignment[0] == close.assignment[1]);

    Clustering far = clmb::dbscan(from_rows({{0.0f, 0.0f}, {1.0f, 0.0f}}), p);
    CHECK(far.cluster_count == 2);
    CHECK(far.assignment[0] != far.assignment[1]);
}

TEST_CASE("dbscan chains through consecutive neighbors") {
    Mat<float> X = from_rows({{0.0f, 0.0f}, {0.3f, 0.0f}, {0.6f, 0.0f}});
    Clustering c = clmb::dbscan(X, clmb::DbscanParams{});
    CHECK(c.cluster_count == 1);
    CHECK(c.assignment == std::vector<int>(3, 0));
}

TEST_CASE("dbscan labels sparse points as singleton noise") {
    clmb::DbscanParams p;
    p.min_samples = 4;
    Mat<float> X = from_rows({{0.0f, 0.0f}, {0.3f, 0.0f}, {0.6f, 0.0f}});
    Clustering c = clmb::dbscan(X, p);
    CHECK(c.cluster_count == 3);
    std::set<int> distinct(c.assignment.begin(), c.assignment.end());
    CHECK(distinct.size() == 3);
}

TEST_CASE("clustering rejects empty and invalid inputs") {
    Mat<float> empty(0, 3);
    CHECK_THROWS_AS((void)clmb::iterative_medoid(empty, clmb::MedoidParams{}),
                    clmb::input_error);
    CHECK_THROWS_AS((void)clmb::minibatch_kmeans(empty, clmb::KmeansParams{}),
                    clmb::input_error);
    CHECK_THROWS_AS((void)clmb::dbscan(empty, clmb::DbscanParams{}), clmb::input_error);

    Mat<float> one = from_rows({{1.0f}});
    clmb::KmeansParams kb;
    kb.k = 0;
    CHECK_THROWS_AS((void)clmb::minibatch_kmeans(one, kb), clmb::input_error);
    clmb::DbscanParams db;
    db.eps = -0.1;
    CHECK_THROWS_AS((void)clmb::dbscan(one, db), clmb::input_error);
    db = clmb::DbscanParams{};
    db.min_samples = 0;
    CHECK_THROWS_AS((void)clmb::dbscan(one, db), clmb::input_error);
}

TEST_CASE("multi split separates a cluster by source sample") {
    Clustering c;
    c.assignment = {0, 0, 0};
    c.cluster_count = 1;
    clmb::BinSet bs = clmb::multi_split(c, {0, 0, 1}, {"A", "B"});
    REQUIRE(bs.bins.size() == 2);
    CHECK(bs.bins[0].bin_id == "0CAS");
    CHECK(bs.bins[0].members == std::vector<std::size_t>{0, 1});
    CHECK(bs.bins[1].bin_id == "0CBS");
    CHECK(bs.bins[1].members == std::vector<std::size_t>{2});
}

TEST_CASE("multi split emits one bin per cluster and sample pair") {
    Clustering c;
    c.assignment = {0, 1, 0, 1};
    c.cluster_count = 2;
    clmb::BinSet bs = clmb::multi_split(c, {0, 0, 1, 1}, {"A", "B"});
    REQUIRE(bs.bins.size() == 4);
    std::vector<std::string> ids;
    for (const auto& b : bs.bins) ids.push_back(b.bin_id);
    CHECK(ids == std::vector<std::string>{"0CAS", "0CBS", "1CAS", "1CBS"});
    for (const auto& b : bs.bins) CHECK(b.members.size() == 1);
}

TEST_CASE("multi split validates samples") {
    Clustering c;
    c.assignment = {0, 0};
    c.cluster_count = 1;
    CHECK_THROWS_AS((void)clmb::multi_split(c, {0}, {"A"}), clmb::input_error);
    CHECK_THROWS_AS((void)clmb::multi_split(c, {0, 2}, {"A", "B"}), clmb::input_error);
    CHECK_THROWS_AS((void)clmb::multi_split(c, {0, -1}, {"A", "B"}), clmb::input_error);
}

TEST_CASE("cluster TSV round trips bins in order") {
    Clustering c;
    c.assignment = {0, 1, 0, 1, 0};
    c.cluster_count = 2;
    std::vector<int> samples{0, 0, 1, 1, 0};
    std::vector<std::string> sample_ids{"sampA", "sampB"};
    std::vector<std::string> contig_ids{"c0", "c1", "c2", "c3", "c4"};
    clmb::BinSet bs = clmb::multi_split(c, samples, sample_ids);

    std::string dir = testutil::make_temp_dir("clutsv");
    std::string path = dir + "/clusters.tsv";
    clmb::write_clusters_tsv(path, bs, contig_ids);
    std::string text = testutil::read_file_bytes(path);
    CHECK(text.rfind("bin_id\tcontig_id\n", 0) == 0);

    auto back = clmb::read_clusters_tsv(path);
    REQUIRE(back.size() == bs.bins.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].first == bs.bins[i].bin_id);
        std::vector<std::string> want;
        for (std::size_t m : bs.bins[i].members) want.push_back(contig_ids[m]);
        CHECK(back[i].second == want);
    }
}

TEST_CASE("cluster TSV reader tolerates CRLF and rejects malformed rows") {
    std::string dir = testutil::make_temp_dir("clubad");
    testutil::write_text_file(dir + "/crlf.tsv",
                              "bin_id\tcontig_id\r\n0CAS\tc0\r\n\r\n0CAS\tc1\r\n");
    auto got = clmb::read_clusters_tsv(dir + "/crlf.tsv");
    REQUIRE(got.size() == 1);
    CHECK(got[0].second == std::vector<std::string>{"c0", "c1"});

    testutil::write_text_file(dir + "/notab.tsv", "bin_id\tcontig_id\nonly_one_field\n");
    CHECK_THROWS_AS((void)clmb::read_clusters_tsv(dir + "/notab.tsv"), clmb::input_error);
    testutil::write_text_file(dir + "/emptyf.tsv", "bin_id\tcontig_id\n\tc0\n");
    CHECK_THROWS_AS((void)clmb::read_clusters_tsv(dir + "/emptyf.tsv"), clmb::input_error);
    CHECK_THROWS_AS((void)clmb::read_clusters_tsv(dir + "/absent.tsv"), clmb::input_error);
}
