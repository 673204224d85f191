#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "teamcomm/error.hpp"
#include "teamcomm/rng.hpp"
#include "teamcomm/stats.hpp"

using namespace teamcomm;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

TedSchema schema_of(std::initializer_list<std::pair<const char*, const char*>> kinds) {
    TedSchema s;
    for (const auto& [name, kind] : kinds) s[name] = {Direction::higher_is_better, std::string(kind)};
    return s;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("t and F p-values against closed forms") {
    for (double t : {0.0, 0.3, 1.0, 2.5, 12.0, -4.0}) {
        // Cauchy (df 1) and df 2 have elementary CDFs.
        CHECK(std::abs(t_test_p_value(t, 1) - (1.0 - 2.0 / std::numbers::pi * std::atan(std::abs(t)))) < 1e-10);
        CHECK(std::abs(t_test_p_value(t, 2) - (1.0 - std::abs(t) / std::sqrt(2.0 + t * t))) < 1e-10);
    }
    for (double f : {0.1, 1.0, 3.7, 20.0}) {
        for (double d2 : {3.0, 10.0, 57.0}) CHECK(std::abs(f_test_p_value(f, 2, d2) - std::pow(1.0 + 2.0 * f / d2, -d2 / 2.0)) < 1e-10);
        // F(1, d) is the square of t(d).
        CHECK(std::abs(f_test_p_value(f, 1, 9) - t_test_p_value(std::sqrt(f), 9)) < 1e-10);
    }
    CHECK(std::abs(t_test_p_value(2.228138851986, 10) - 0.05) < 1e-9);
}

TEST_CASE("ols exact line") {
    const auto r = ols_fit(mat({{1, 0}, {1, 1}, {1, 2}}), vec({1, 3, 5}), {kIntercept, "x"});
    CHECK(r.at(kIntercept).coef == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.at("x").coef == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.rss < 1e-20);
}

TEST_CASE("ols constant response") {
    const auto r = ols_fit(mat({{1, 0, 3}, {1, 1, -1}, {1, 2, 4}, {1, 5, 0}}), vec({7, 7, 7, 7}), {kIntercept, "a", "b"});
    CHECK(r.at(kIntercept).coef == doctest::Approx(7.0));
    CHECK(std::abs(r.at("a").coef) < 1e-12);
    CHECK(std::abs(r.at("b").coef) < 1e-12);
}

TEST_CASE("ols hand-solved normal equations") {
    const auto r = ols_fit(mat({{1, 0}, {1, 1}, {1, 2}, {1, 3}}), vec({0, 1, 1, 3}), {kIntercept, "x"});
    CHECK(std::abs(r.at("x").coef - 0.9) < 1e-9);
    CHECK(std::abs(r.at(kIntercept).coef + 0.1) < 1e-9);
    // Residuals (0.1, 0.2, -0.7, 0.4): RSS = 0.7, sigma^2 = 0.35, var(slope) = 0.35 / 5.
    CHECK(r.rss == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.at("x").se == doctest::Approx(std::sqrt(0.07)).epsilon(1e-12));
    CHECK(r.at("x").p == doctest::Approx(t_test_p_value(0.9 / std::sqrt(0.07), 2)).epsilon(1e-12));
    // Regression sum of squares 0.81 * 5 over sigma^2.
    REQUIRE(r.f_statistic);
    CHECK(*r.f_statistic == doctest::Approx(4.05 / 0.35).epsilon(1e-12));
}

TEST_CASE("ols residuals are orthogonal and rows can be permuted") {
    Rng rng(1);
    const int n = 50, p = 4;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    std::vector<std::vector<double>> xv(n, std::vector<double>(p));
    std::vector<double> yv(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (int j = 1; j < p; ++j) x(i, j) = rng.normal(0, 3);
        y(i) = 2.0 - x(i, 1) + 0.5 * x(i, 3) + rng.normal();
        for (int j = 0; j < p; ++j) xv[i][j] = x(i, j);
        yv[i] = y(i);
    }
    const std::vector<std::string> names{kIntercept, "a", "b", "c"};
    const auto r = ols_fit(x, y, names);
    Eigen::VectorXd b(p);
    for (int j = 0; j < p; ++j) b(j) = r.terms[j].coef;
    const Eigen::VectorXd resid = y - x * b;
    CHECK((x.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8 * n);

    const auto want = oracle::normal_equations(xv, yv);
    for (int j = 0; j < p; ++j) CHECK(std::abs(r.terms[j].coef - want[j]) < 1e-9);

    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    perm.setIdentity();
    for (int i = n - 1; i > 0; --i) std::swap(perm.indices()[i], perm.indices()[rng.below(i + 1)]);
    const auto rp = ols_fit(perm * x, perm * y, names);
    for (int j = 0; j < p; ++j) CHECK(std::abs(rp.terms[j].coef - r.terms[j].coef) < 1e-9);
}

TEST_CASE("ols errors") {
    CHECK_THROWS_WITH_AS(ols_fit(mat({{1, 1, 2}, {1, 2, 4}, {1, 3, 6}, {1, 4, 8}}), vec({1, 2, 3, 5}),
                                 {kIntercept, "a", "twice_a"}),
                         doctest::Contains("a twice_a"), Error);
    CHECK_THROWS_AS(ols_fit(mat({{1, 0}, {1, 1}}), vec({1, 2}), {kIntercept, "x"}), Error);
}

TEST_CASE("logistic separation") {
    Eigen::MatrixXd x(20, 2);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = i % 2 ? 1.0 : -1.0;
        y(i) = i % 2 ? 1.0 : 0.0;
    }
    const auto r = logistic_fit(x, y, {kIntercept, "x"});
    CHECK(r.separation);
    CHECK_FALSE(r.converged);
}

TEST_CASE("logistic on coin flips") {
    int quiet = 0;
    for (int s = 0; s < 10; ++s) {
        Rng rng(100 + s);
        const int n = 1000;
        Eigen::MatrixXd x(n, 2);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = rng.normal();
            y(i) = rng.bernoulli(0.3) ? 1.0 : 0.0;
        }
        const auto r = logistic_fit(x, y, {kIntercept, "x"});
        REQUIRE(r.converged);
        const double rate = y.mean();
        CHECK(r.at(kIntercept).coef == doctest::Approx(std::log(rate / (1 - rate))).epsilon(0.05));
        quiet += r.at("x").p > 0.05;
    }
    CHECK(quiet >= 9);
}

TEST_CASE("logistic planted slope and stationary gradient") {
    Rng rng(7);
    const int n = 2000;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = rng.normal();
        y(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-1.5 * x(i, 1)))) ? 1.0 : 0.0;
    }
    const auto r = logistic_fit(x, y, {kIntercept, "x"});
    REQUIRE(r.converged);
    CHECK(std::abs(r.at("x").coef - 1.5) <= 0.2);
    Eigen::VectorXd b(2);
    b << r.terms[0].coef, r.terms[1].coef;
    const Eigen::VectorXd mu = ((-(x * b).array()).exp() + 1.0).inverse().matrix();
    CHECK((x.transpose() * (y - mu)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_THROWS_AS(logistic_fit(x, Eigen::VectorXd::Ones(n), {kIntercept, "x"}), Error);
}

TEST_CASE("cluster-score regression") {
    const std::map<std::string, int> assign{{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}};
    const std::map<std::string, double> scores{{"a", 10}, {"b", 10}, {"c", 20}, {"d", 20}};
    const auto explicit_base = cluster_score_regression(assign, scores, 0);
    CHECK(explicit_base.at(cluster_term(1)).coef == doctest::Approx(10.0));
    CHECK(explicit_base.find(cluster_term(0)) == nullptr);
    // Default baseline: highest-mean cluster.
    const auto default_base = cluster_score_regression(assign, scores);
    CHECK(default_base.at(cluster_term(0)).coef == doctest::Approx(-10.0));

    const std::map<std::string, double> flat{{"a", 5}, {"b", 5}, {"c", 5}, {"d", 5}};
    const auto r = cluster_score_regression(assign, flat, 0);
    CHECK(std::abs(r.at(cluster_term(1)).coef) < 1e-12);
}

TEST_CASE("cluster-score drops tiny clusters and reports the F-test") {
    Rng rng(3);
    std::map<std::string, int> assign;
    std::map<std::string, double> scores;
    for (int i = 0; i < 30; ++i) {
        const std::string id = "t" + std::to_string(i);
        assign[id] = i % 3;
        scores[id] = 100.0 - 20.0 * (i % 3) + rng.normal(0, 5);
    }
    assign["lonely"] = 3;
    scores["lonely"] = 0.0;
    const auto r = cluster_score_regression(assign, scores);
    CHECK(r.find(cluster_term(3)) == nullptr);
    bool warned = false;
    for (const auto& w : r.warnings) warned |= w.find("cluster_3") != std::string::npos;
    CHECK(warned);
    REQUIRE(r.f_p_value);
    CHECK(*r.f_p_value < 1e-6);
    CHECK(r.n == 30);
    CHECK(parse_cluster_term("cluster_12") == 12);
    CHECK_FALSE(parse_cluster_term("anger").has_value());
}

TEST_CASE("TED variable filter") {
    const auto s = schema_of({{"process-effort-s", "per_role"}, {"process-effort-agg", "aggregate"}});
    CHECK(filter_ted_variables(s, {"aggregate", "time_measure", "communication"}) ==
          std::set<std::string>{"process-effort-agg"});
    CHECK(filter_ted_variables(s, {}).empty());
    CHECK(filter_ted_variables(schema_of({{"comms-total-words", "communication"}}), {"communication"}) ==
          std::set<std::string>{"comms-total-words"});
    TedSchema untagged;
    untagged["mystery"] = {Direction::higher_is_better, std::nullopt};
    CHECK_THROWS_WITH_AS(filter_ted_variables(untagged, {"aggregate"}), doctest::Contains("mystery"), Error);
}

TEST_CASE("BEARD profiles need eight unique variables") {
    BeardProfile p;
    p.team_id = "t";
    for (const auto& n : default_beard_names()) p.variables.emplace_back(n, 1.0);
    CHECK_NOTHROW(p.validate());
    p.variables.pop_back();
    CHECK_THROWS_AS(p.validate(), Error);
    p.variables.emplace_back("anger", 1.0);
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("TED series validation and lookup") {
    TedSeries s;
    s.trial_id = "x";
    s.schema = schema_of({{"m", "aggregate"}});
    s.samples = {{0.0, {{"m", 1.0}}}, {0.5, {{"m", 2.0}}}, {1.0, {{"m", 3.0}}}};
    CHECK_NOTHROW(s.validate());
    CHECK(s.value_at("m", 0.49) == 1.0);
    CHECK(s.value_at("m", 0.5) == 2.0);
    CHECK(s.value_at("m", 2.0) == 3.0);
    CHECK_FALSE(s.value_at("m", -0.1).has_value());
    auto bad = s;
    bad.samples[1].t = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = s;
    bad.samples[2].values["extra"] = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("record CSV round-trips") {
    BeardProfile p;
    p.team_id = "team0001";
    double v = 0.125;
    for (const auto& n : default_beard_names()) p.variables.emplace_back(n, v += 1.0);
    const auto beard = beard_to_csv({p});
    CHECK(beard_to_csv(parse_beard_csv(beard)) == beard);

    TedSeries s;
    s.trial_id = "S0001-T1";
    s.schema = schema_of({{"a", "aggregate"}, {"b", "communication"}});
    s.samples = {{0.0, {{"a", 1.5}, {"b", -2.0}}}, {0.5, {{"a", 1.75}, {"b", 0.1}}}};
    const auto ted = ted_to_csv({s});
    const auto parsed = parse_ted_csv(ted, s.schema);
    REQUIRE(parsed.count("S0001-T1"));
    CHECK(ted_to_csv({parsed.at("S0001-T1")}) == ted);

    const std::map<std::string, double> scores{{"a", 1.0}, {"b", 612.25}};
    CHECK(parse_scores_csv(scores_to_csv(scores)) == scores);
}

TEST_CASE("regression json round-trip") {
    const auto r = ols_fit(mat({{1, 0}, {1, 1}, {1, 2}, {1, 3}}), vec({0, 1, 1, 3}), {kIntercept, "x"});
    const auto json = regression_to_json(r);
    CHECK(regression_to_json(regression_from_json(json)) == json);
    CHECK(json.find("\"model_kind\":\"ols\"") != std::string::npos);
    CHECK(regression_to_csv(r).rfind("name,coef,se,p\n", 0) == 0);
}

}  // TEST_SUITE
