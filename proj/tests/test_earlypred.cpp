#include <doctest.h>

#include <map>

#include "teamcomm/earlypred.hpp"
#include "teamcomm/error.hpp"
#include "teamcomm/synth.hpp"
#include "test_util.hpp"

using namespace teamcomm;

namespace {

// Utterances with the given token counts; every token is "red".
TrialTranscript counted(const std::vector<std::size_t>& counts) {
    std::vector<std::string> texts;
    for (auto c : counts) {
        std::string s;
        for (std::size_t i = 0; i < c; ++i) s += i ? " red" : "red";
        texts.push_back(s);
    }
    return testutil::trial_of("t", texts);
}

std::map<std::string, std::size_t> multiset(const TrialTranscript& t) {
    std::map<std::string, std::size_t> m;
    for (const auto& tok : trial_tokens(t, PreprocessConfig::defaults())) ++m[tok];
    return m;
}

}  // namespace

TEST_SUITE("earlypred") {

TEST_CASE("truncation rule") {
    const auto five = counted({4, 4, 4, 4, 4});
    CHECK(truncate_transcript(five, 0.1).utterances.size() == 1);
    CHECK(truncate_transcript(five, 1.0).utterances.size() == 5);
    const auto ten = counted({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    CHECK(truncate_transcript(ten, 0.3).utterances.size() == 3);
    CHECK_THROWS_AS(truncate_transcript(ten, 0.0), Error);
    CHECK_THROWS_AS(truncate_transcript(ten, 1.5), Error);
}

TEST_CASE("full fraction keeps trailing empty utterances") {
    auto t = testutil::trial_of("t", {"red green", "the and"});
    const auto same = truncate_transcript(t, 1.0);
    CHECK(same.utterances.size() == 2);
    CHECK(format_trial_lines(same) == format_trial_lines(t));
}

TEST_CASE("prefix with no tokens is an error") {
    CHECK_THROWS_AS(truncate_transcript(testutil::trial_of("t", {"the", "and of"}), 0.5), Error);
}

TEST_CASE("prefixes are idempotent and nested") {
    const auto t = counted({3, 1, 4, 1, 5, 9, 2, 6});
    const double fs[] = {0.05, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.7, 0.9, 1.0};
    for (double f : fs) {
        const auto p = truncate_transcript(t, f);
        CHECK(format_trial_lines(truncate_transcript(p, 1.0)) == format_trial_lines(p));
    }
    for (std::size_t i = 0; i + 1 < std::size(fs); ++i) {
        const auto small = multiset(truncate_transcript(t, fs[i]));
        const auto large = multiset(truncate_transcript(t, fs[i + 1]));
        for (const auto& [tok, n] : small) CHECK(large.count(tok) ? large.at(tok) >= n : false);
    }
}

TEST_CASE("prediction is the composition of fold-in and nearest centroid") {
    const auto lda = testutil::two_topic_model();
    const auto clusters = testutil::corner_clusters();
    const auto pp = PreprocessConfig::defaults();
    const auto trial = testutil::trial_of("x", {"red green red", "blue"});
    const auto p = predict_cluster_early(lda, clusters, trial, 1.0, 5, pp);
    const SparseCounts counts = count_terms(trial_tokens(trial, pp), Vocabulary(lda.terms));
    const auto theta = infer_theta(lda, counts, FoldInOptions{}, 5);
    CHECK(p.theta_hat == theta);
    CHECK(p.predicted_cluster == assign_cluster(clusters, theta));
    CHECK(std::abs(p.theta_hat.sum() - 1.0) < 1e-9);
    const auto again = predict_cluster_early(lda, clusters, trial, 1.0, 5, pp);
    CHECK(again.theta_hat == p.theta_hat);
    CHECK(again.predicted_cluster == p.predicted_cluster);
}

TEST_CASE("single-topic trial lands in its planted cluster at half length") {
    const auto lda = testutil::two_topic_model();
    const auto clusters = testutil::corner_clusters();
    const auto pp = PreprocessConfig::defaults();
    const auto zero = testutil::trial_of("z", {"red green", "green red red", "green", "red red"});
    const auto one = testutil::trial_of("o", {"blue gold", "gold", "blue blue gold", "gold"});
    CHECK(predict_cluster_early(lda, clusters, zero, 0.5, 1, pp).predicted_cluster == 0);
    CHECK(predict_cluster_early(lda, clusters, one, 0.5, 1, pp).predicted_cluster == 1);
}

TEST_CASE("dimension mismatch is rejected") {
    auto clusters = testutil::corner_clusters();
    clusters.centroids = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(EarlyPredictor(testutil::two_topic_model(), clusters, PreprocessConfig::defaults()), Error);
}

TEST_CASE("accuracy curve") {
    const auto lda = testutil::two_topic_model();
    const auto clusters = testutil::corner_clusters();
    const EarlyPredictor predictor(lda, clusters, PreprocessConfig::defaults());
    const std::vector<TrialTranscript> trials{
        testutil::trial_of("a", {"red red", "green", "blue gold blue gold blue gold"}),
        testutil::trial_of("b", {"gold", "blue blue", "gold gold"}),
        testutil::trial_of("c", {"the of", "red red green"}),  // opens with an all-stopword line
    };
    const auto only_full = early_accuracy_curve(predictor, trials, {1.0}, 3);
    REQUIRE(only_full.points.size() == 1);
    CHECK(only_full.points[0].accuracy == 1.0);
    CHECK(only_full.points[0].n == 3);

    const auto curve = early_accuracy_curve(predictor, trials, {0.1, 0.5, 1.0}, 3);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[0].n == 3);  // the prefix of "c" runs on to its second line
    CHECK(curve.points[2].accuracy == 1.0);
    // Trial "a" starts red/green but is mostly blue/gold.
    CHECK(curve.points[0].accuracy == doctest::Approx(2.0 / 3.0));

    const auto parallel = early_accuracy_curve(predictor, trials, {0.1, 0.5, 1.0}, 3, 4);
    CHECK(accuracy_curve_to_csv(parallel) == accuracy_curve_to_csv(curve));
    CHECK(accuracy_curve_to_csv(curve).rfind("fraction,accuracy,n\n0.1,", 0) == 0);
    CHECK_THROWS_AS(early_accuracy_curve(predictor, trials, {0.5, 0.1}, 3), Error);
}

TEST_CASE("failing prefixes are skipped, not fatal") {
    const auto lda = testutil::two_topic_model();
    const auto clusters = testutil::corner_clusters();
    const EarlyPredictor predictor(lda, clusters, PreprocessConfig::defaults());
    // The first utterance has tokens, but none in the model vocabulary.
    const std::vector<TrialTranscript> trials{
        testutil::trial_of("oov", {"purple", "red red red red red red red red red"}),
        testutil::trial_of("ok", {"red", "red green"}),
    };
    const auto curve = early_accuracy_curve(predictor, trials, {0.1, 1.0}, 3);
    REQUIRE(curve.skipped.size() == 1);
    CHECK(curve.skipped[0].second == "oov");
    CHECK(curve.points[0].n == 1);
    CHECK(curve.points[1].n == 2);
}

}  // TEST_SUITE
