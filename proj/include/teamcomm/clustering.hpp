#pragma once
// k-means over topic distributions, gap-statistic selection of k, and
// cluster composition summaries.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "teamcomm/corpus.hpp"

namespace teamcomm {

struct ClusterModel {
    std::size_t k = 0;
    Eigen::MatrixXd centroids;     // k x d
    std::vector<std::string> ids;  // point ids, aligned with labels
    std::vector<int> labels;       // cluster index per point, in [0, k)
    double wss = 0.0;
    std::size_t iterations = 0;
    std::vector<double> wss_trace;  // per Lloyd iteration of the winning restart

    std::size_t dim() const noexcept { return static_cast<std::size_t>(centroids.cols()); }
    std::map<std::string, int> assignments() const;
};

struct KmeansOptions {
    std::size_t restarts = 25;
    std::size_t max_iter = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

// Lloyd's algorithm with k-means++ seeding; best restart by wss (ties: lowest
// restart index). Empty clusters are reseeded at the point farthest from its
// centroid. `ids` may be empty, in which case points are named by row index.
ClusterModel kmeans_fit(const Eigen::MatrixXd& points, std::size_t k, const KmeansOptions& opts,
                        std::vector<std::string> ids = {});

// Total within-cluster sum of squares for a labelling, centroids = label means.
double within_ss(const Eigen::MatrixXd& points, const std::vector<int>& labels, std::size_t k);

// Nearest centroid by Euclidean distance; ties go to the lower index.
std::size_t assign_cluster(const ClusterModel& model, const Eigen::VectorXd& point);

struct GapEntry {
    std::size_t k = 0;
    double log_w = 0.0;
    double gap = 0.0;
    double sk = 0.0;
};

struct GapReport {
    std::vector<GapEntry> per_k;
    std::vector<std::string> warnings;
    std::size_t selected_k = 1;
};

struct GapOptions {
    std::size_t k_max = 10;
    std::size_t b_refs = 20;
    std::size_t restarts = 10;
    std::size_t max_iter = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
};

// Tibshirani gap statistic with uniform bounding-box references. Points are
// put into lexicographic order first, so the result does not depend on row
// order. Reference set b for cluster count k draws from (seed, k, b).
GapReport gap_statistic(const Eigen::MatrixXd& points, const GapOptions& opts);

// Smallest k with gap(k) >= gap(k+1) - s(k+1) over consecutive entries; argmax
// gap otherwise (1 when there are no entries).
std::size_t select_gap_k(const std::vector<GapEntry>& entries);

struct CompositionRow {
    int cluster = 0;
    double pct_trial_one = 0.0;
    double pct_trial_two = 0.0;
    std::size_t n = 0;
};

struct CompositionTable {
    std::vector<CompositionRow> rows;
};

// Per-cluster share of trial-one vs trial-two members; empty clusters omitted.
CompositionTable trial_composition(const ClusterModel& model, const std::map<std::string, TrialIndex>& trial_index);
CompositionTable trial_composition(const ClusterModel& model, const std::vector<TrialTranscript>& trials);

std::string composition_to_csv(const CompositionTable& table);

std::string cluster_model_to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(std::string_view json);

std::string gap_report_to_json(const GapReport& report);
GapReport gap_report_from_json(std::string_view json);

}  // namespace teamcomm
