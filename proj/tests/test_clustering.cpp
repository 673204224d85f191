#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "teamcomm/clustering.hpp"
#include "teamcomm/error.hpp"
#include "teamcomm/rng.hpp"
#include "test_util.hpp"

using namespace teamcomm;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) m(i++, 0) = x;
    return m;
}

Eigen::MatrixXd random_points(Rng& rng, int n, int d) {
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
    }
    return x;
}

}  // namespace

TEST_SUITE("clustering") {

TEST_CASE("four points on a line, k=2") {
    const auto model = kmeans_fit(column({0, 0.1, 10, 10.1}), 2, KmeansOptions{});
    std::vector<double> c{model.centroids(0, 0), model.centroids(1, 0)};
    std::sort(c.begin(), c.end());
    CHECK(c[0] == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(10.05).epsilon(1e-12));
    CHECK(model.wss == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(std::abs(model.wss - oracle::best_partition_wss({{0}, {0.1}, {10}, {10.1}}, 2)) < 1e-12);
}

TEST_CASE("k = n and k = 1") {
    Rng rng(2);
    const auto x = random_points(rng, 6, 3);
    const auto all = kmeans_fit(x, 6, KmeansOptions{});
    CHECK(all.wss == doctest::Approx(0.0).epsilon(1e-15));
    const auto one = kmeans_fit(x, 1, KmeansOptions{});
    const Eigen::RowVectorXd mean = x.colwise().mean();
    CHECK((one.centroids.row(0) - mean).norm() < 1e-12);
}

TEST_CASE("kmeans errors") {
    CHECK_THROWS_AS(kmeans_fit(column({1, 2}), 3, KmeansOptions{}), Error);
    CHECK_THROWS_AS(kmeans_fit(column({1, std::numeric_limits<double>::quiet_NaN()}), 1, KmeansOptions{}), Error);
    KmeansOptions none;
    none.restarts = 0;
    CHECK_THROWS_AS(kmeans_fit(column({1, 2}), 1, none), Error);
}

TEST_CASE("model invariants and monotone Lloyd trace") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto x = random_points(rng, 40, 3);
        KmeansOptions opts;
        opts.seed = rep;
        const auto model = kmeans_fit(x, 4, opts);
        double wss = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const int c = model.labels[static_cast<std::size_t>(i)];
            wss += (x.row(i) - model.centroids.row(c)).squaredNorm();
        }
        CHECK(std::abs(wss - model.wss) < 1e-9);
        CHECK(std::abs(within_ss(x, model.labels, 4) - model.wss) < 1e-9);
        for (int c = 0; c < 4; ++c) {
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(3);
            int n = 0;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                if (model.labels[static_cast<std::size_t>(i)] == c) {
                    mean += x.row(i);
                    ++n;
                }
            }
            REQUIRE(n > 0);
            CHECK((mean / n - model.centroids.row(c)).norm() < 1e-9);
        }
        for (std::size_t i = 1; i < model.wss_trace.size(); ++i) CHECK(model.wss_trace[i] <= model.wss_trace[i - 1] + 1e-12);
    }
}

TEST_CASE("kmeans matches exhaustive partitions on small instances") {
    Rng rng(44);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 3 + static_cast<int>(rng.below(6));
        const int k = 1 + static_cast<int>(rng.below(3));
        const auto x = random_points(rng, n, 2);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < n; ++i) pts.push_back({x(i, 0), x(i, 1)});
        KmeansOptions opts;
        opts.seed = rep;
        CHECK(std::abs(kmeans_fit(x, k, opts).wss - oracle::best_partition_wss(pts, k)) < 1e-9);
    }
}

TEST_CASE("restarts in parallel give the same model") {
    Rng rng(5);
    const auto x = random_points(rng, 50, 2);
    KmeansOptions a;
    a.seed = 9;
    KmeansOptions b = a;
    b.jobs = 4;
    CHECK(cluster_model_to_json(kmeans_fit(x, 5, a)) == cluster_model_to_json(kmeans_fit(x, 5, b)));
}

TEST_CASE("assign_cluster") {
    ClusterModel m;
    m.k = 4;
    m.centroids = Eigen::MatrixXd(4, 2);
    m.centroids << 0, 0, 1, 0, 3, 0, 5, 5;
    for (int j = 0; j < 4; ++j) CHECK(assign_cluster(m, m.centroids.row(j).transpose()) == static_cast<std::size_t>(j));
    CHECK(assign_cluster(m, Eigen::Vector2d(2.0, 0.0)) == 1);  // equidistant from 1 and 2
    CHECK_THROWS_AS(assign_cluster(m, Eigen::Vector3d(0, 0, 0)), Error);

    Rng rng(6);
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::Vector2d p(rng.uniform(-2, 7), rng.uniform(-2, 7));
        std::size_t best = 0;
        for (std::size_t j = 1; j < 4; ++j) {
            if ((m.centroids.row(j).transpose() - p).squaredNorm() <
                (m.centroids.row(best).transpose() - p).squaredNorm()) {
                best = j;
            }
        }
        CHECK(assign_cluster(m, p) == best);
    }
}

TEST_CASE("gap statistic on two blobs and a box") {
    Rng rng(7);
    Eigen::MatrixXd blobs(30, 2);
    for (int i = 0; i < 30; ++i) {
        blobs(i, 0) = rng.normal(i < 15 ? 0.0 : 10.0, 0.01);
        blobs(i, 1) = rng.normal(0.0, 0.01);
    }
    GapOptions g;
    g.k_max = 5;
    g.seed = 1;
    const auto report = gap_statistic(blobs, g);
    CHECK(report.selected_k == 2);
    REQUIRE(report.per_k.size() == 5);
    for (const auto& e : report.per_k) CHECK(e.sk >= 0.0);

    Eigen::MatrixXd one(1, 2);
    one << 0.3, 0.4;
    g.k_max = 1;
    CHECK(gap_statistic(one, g).selected_k == 1);
}

TEST_CASE("gap statistic ignores point order") {
    Rng rng(8);
    const auto x = random_points(rng, 25, 2);
    Eigen::MatrixXd y = x.colwise().reverse();
    GapOptions g;
    g.k_max = 4;
    g.b_refs = 5;
    g.seed = 3;
    CHECK(gap_report_to_json(gap_statistic(x, g)) == gap_report_to_json(gap_statistic(y, g)));
    GapOptions p = g;
    p.jobs = 3;
    CHECK(gap_report_to_json(gap_statistic(x, g)) == gap_report_to_json(gap_statistic(x, p)));
}

TEST_CASE("gap statistic skips collapsed k") {
    Eigen::MatrixXd dup(4, 1);
    dup << 1, 1, 2, 2;
    GapOptions g;
    g.k_max = 3;
    g.b_refs = 4;
    const auto report = gap_statistic(dup, g);
    CHECK_FALSE(report.warnings.empty());
    for (const auto& e : report.per_k) CHECK(e.k < 2);
}

TEST_CASE("gap selection rule") {
    CHECK(select_gap_k({{1, 0, 0.1, 0.05}, {2, 0, 0.5, 0.05}, {3, 0, 0.52, 0.05}, {4, 0, 0.3, 0.05}}) == 2);
    CHECK(select_gap_k({{1, 0, 0.1, 0.01}, {2, 0, 0.2, 0.01}, {3, 0, 0.3, 0.01}}) == 3);
    CHECK(select_gap_k({}) == 1);
}

TEST_CASE("composition table") {
    ClusterModel m;
    m.k = 3;
    m.centroids = Eigen::MatrixXd::Zero(3, 1);
    m.ids = {"a", "b", "c", "d"};
    m.labels = {0, 0, 0, 2};
    const std::map<std::string, TrialIndex> idx{
        {"a", TrialIndex::one}, {"b", TrialIndex::one}, {"c", TrialIndex::two}, {"d", TrialIndex::two}};
    const auto table = trial_composition(m, idx);
    REQUIRE(table.rows.size() == 2);  // cluster 1 is empty
    CHECK(table.rows[0].pct_trial_one == doctest::Approx(200.0 / 3.0));
    CHECK(table.rows[0].pct_trial_two == doctest::Approx(100.0 / 3.0));
    CHECK(table.rows[1].cluster == 2);
    CHECK(composition_to_csv(table) == "cluster,pct_one,pct_two,n\n0,66.7,33.3,3\n2,0.0,100.0,1\n");
    std::size_t total = 0;
    for (const auto& r : table.rows) total += r.n;
    CHECK(total == 4);
    CHECK_THROWS_WITH_AS(trial_composition(m, std::map<std::string, TrialIndex>{{"a", TrialIndex::one}}),
                         doctest::Contains("b"), Error);
}

TEST_CASE("cluster and gap json round-trip") {
    Rng rng(9);
    const auto x = random_points(rng, 12, 2);
    const auto model = kmeans_fit(x, 3, KmeansOptions{}, {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"});
    const auto json = cluster_model_to_json(model);
    CHECK(cluster_model_to_json(cluster_model_from_json(json)) == json);
    CHECK(cluster_model_from_json(json).assignments() == model.assignments());
    GapOptions g;
    g.k_max = 3;
    g.b_refs = 3;
    const auto gj = gap_report_to_json(gap_statistic(x, g));
    CHECK(gap_report_to_json(gap_report_from_json(gj)) == gj);
}

}  // TEST_SUITE
