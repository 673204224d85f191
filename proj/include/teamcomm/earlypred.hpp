#pragma once
// Cluster prediction from transcript prefixes.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "teamcomm/clustering.hpp"
#include "teamcomm/corpus.hpp"
#include "teamcomm/topics.hpp"

namespace teamcomm {

// Shortest whole-utterance prefix whose cumulative token_count reaches
// ceil(fraction * total tokens). fraction must lie in (0, 1].
TrialTranscript truncate_transcript(const TrialTranscript& trial, double fraction);

struct EarlyPrediction {
    std::string trial_id;
    double fraction = 1.0;
    std::size_t predicted_cluster = 0;
    Eigen::VectorXd theta_hat;
};

// Everything a prefix prediction needs besides the trial itself.
struct EarlyPredictor {
    const LdaModel& lda;
    const ClusterModel& clusters;
    PreprocessConfig preprocess;
    FoldInOptions fold_in{};

    EarlyPredictor(const LdaModel& lda, const ClusterModel& clusters, PreprocessConfig preprocess,
                   FoldInOptions fold_in = {});

    // truncate -> fold-in theta on the prefix counts -> nearest centroid.
    EarlyPrediction predict(const TrialTranscript& trial, double fraction, std::uint64_t seed) const;

private:
    Vocabulary vocab_;
};

EarlyPrediction predict_cluster_early(const LdaModel& lda, const ClusterModel& clusters,
                                      const TrialTranscript& trial, double fraction, std::uint64_t seed,
                                      const PreprocessConfig& preprocess, const FoldInOptions& fold_in = {});

// Fold-in seed for one trial: depends on the trial id only, never on its position.
std::uint64_t trial_seed(std::uint64_t seed, const std::string& trial_id);

struct AccuracyPoint {
    double fraction = 0.0;
    double accuracy = 0.0;
    std::size_t n = 0;
};

struct AccuracyCurve {
    std::vector<AccuracyPoint> points;
    std::vector<std::pair<double, std::string>> skipped;  // (fraction, trial_id)
};

// accuracy(f) = share of trials whose prefix prediction at f matches the
// full-transcript prediction. Trials failing at f are skipped for that f.
AccuracyCurve early_accuracy_curve(const EarlyPredictor& predictor, const std::vector<TrialTranscript>& trials,
                                   const std::vector<double>& fractions, std::uint64_t seed, unsigned jobs = 1);

std::string accuracy_curve_to_csv(const AccuracyCurve& curve);
std::string accuracy_curve_to_json(const AccuracyCurve& curve);

}  // namespace teamcomm
