#pragma once
// Checkpointed intervention policy: predict the cluster at 10%, gate on BEARD,
// then re-check at later checkpoints against TED improvement.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "teamcomm/clustering.hpp"
#include "teamcomm/corpus.hpp"
#include "teamcomm/earlypred.hpp"
#include "teamcomm/stats.hpp"
#include "teamcomm/topics.hpp"

namespace teamcomm {

struct PerformanceProfile {
    std::set<int> low_clusters;
    RegressionResult source;
};

// low_clusters = clusters whose dummy coefficient is negative with p < alpha_level.
PerformanceProfile derive_performance_profile(const RegressionResult& reg, double alpha_level);

// sigmoid(x'beta) for the profile's values of the gate model's terms.
double gate_probability(const BeardProfile& profile, const RegressionResult& gate_model);

// gate_probability >= threshold (inclusive).
bool beard_intervention_gate(const BeardProfile& profile, const RegressionResult& gate_model, double threshold);

// Logistic model of membership in a low-performing cluster against the team's
// BEARD variables, one row per clustered trial.
RegressionResult fit_membership_gate(const std::vector<BeardProfile>& profiles,
                                     const std::map<std::string, std::string>& trial_team,
                                     const std::map<std::string, int>& assignments, const std::set<int>& low_clusters);

// Mean over selected measures of (value(t1) - value(t0)) * direction sign is
// strictly greater than epsilon. Values come from the latest sample at or
// before each time.
bool ted_improvement(const TedSeries& series, double t0, double t1, const std::set<std::string>& selected,
                     double epsilon);

enum class TedBaseline { previous, first };

TedBaseline parse_ted_baseline(std::string_view s);

struct PolicyConfig {
    std::vector<double> checkpoints{0.1, 0.3, 0.5, 0.7};
    double gate_threshold = 0.5;
    std::set<std::string> ted_selected;
    double ted_epsilon = 0.0;
    TedBaseline ted_baseline = TedBaseline::previous;
    std::uint64_t seed = 0;
    PreprocessConfig preprocess = PreprocessConfig::defaults();
    FoldInOptions fold_in{};
};

struct CheckpointDecision {
    double checkpoint = 0.0;
    std::optional<std::size_t> predicted_cluster;  // absent when the checkpoint was skipped
    bool low_performing = false;
    std::optional<bool> beard_gate;
    std::optional<bool> ted_improved;
    bool intervene = false;
    bool skipped = false;
    std::string reason;
};

struct InterventionLog {
    std::string trial_id;
    std::vector<CheckpointDecision> decisions;
    std::size_t total_interventions = 0;
};

InterventionLog run_intervention_pipeline(const TrialTranscript& trial, const LdaModel& lda,
                                          const ClusterModel& clusters, const PerformanceProfile& profile,
                                          const BeardProfile& beard, const RegressionResult& gate_model,
                                          const TedSeries& ted, const PolicyConfig& cfg);

// One JSON object per decision, newline terminated.
std::string intervention_log_to_jsonl(const InterventionLog& log);

}  // namespace teamcomm
