#include "teamcomm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "teamcomm/error.hpp"
#include "teamcomm/io.hpp"
#include "teamcomm/parallel.hpp"
#include "teamcomm/rng.hpp"

namespace teamcomm {

namespace {

using Index = Eigen::Index;

struct Restart {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;
    double wss = 0.0;
    std::size_t iterations = 0;
    std::vector<double> trace;
};

double sq_dist(const Eigen::MatrixXd& points, Index i, const Eigen::MatrixXd& centroids, Index c) {
    return (points.row(i) - centroids.row(c)).squaredNorm();
}

int nearest(const Eigen::MatrixXd& points, Index i, const Eigen::MatrixXd& centroids) {
    int best = 0;
    double best_d = sq_dist(points, i, centroids, 0);
    for (Index c = 1; c < centroids.rows(); ++c) {
        const double d = sq_dist(points, i, centroids, c);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, std::size_t k, Rng& rng) {
    const Index n = points.rows();
    Eigen::MatrixXd centroids(static_cast<Index>(k), points.cols());
    centroids.row(0) = points.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(points, i, centroids, 0);
    for (std::size_t c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        const std::size_t pick = total > 0.0 ? rng.categorical(d2, total)
                                             : static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
        centroids.row(static_cast<Index>(c)) = points.row(static_cast<Index>(pick));
        for (Index i = 0; i < n; ++i) {
            d2[static_cast<std::size_t>(i)] =
                std::min(d2[static_cast<std::size_t>(i)], sq_dist(points, i, centroids, static_cast<Index>(c)));
        }
    }
    return centroids;
}

void update_centroids(const Eigen::MatrixXd& points, const std::vector<int>& labels, Eigen::MatrixXd& centroids) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(centroids.rows()), 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
    for (Index i = 0; i < points.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        sums.row(c) += points.row(i);
        ++counts[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < centroids.rows(); ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
    }
}

// Moves, for each empty cluster, the point farthest from its centroid (taken
// from a cluster with at least two members) into the empty cluster.
void repair_empty(const Eigen::MatrixXd& points, std::vector<int>& labels, Eigen::MatrixXd& centroids) {
    const std::size_t k = static_cast<std::size_t>(centroids.rows());
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        Index far = -1;
        double far_d = -1.0;
        for (Index i = 0; i < points.rows(); ++i) {
            const int l = labels[static_cast<std::size_t>(i)];
            if (counts[static_cast<std::size_t>(l)] < 2) continue;
            const double d = sq_dist(points, i, centroids, l);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) return;
        --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
        labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
        ++counts[c];
        centroids.row(static_cast<Index>(c)) = points.row(far);
    }
}

Restart run_lloyd(const Eigen::MatrixXd& points, std::size_t k, std::size_t max_iter, std::uint64_t seed) {
    Rng rng(seed);
    Restart r;
    r.centroids = seed_plus_plus(points, k, rng);
    const auto n = static_cast<std::size_t>(points.rows());
    std::vector<int> labels(n, -1);
    for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iter, 1); ++iter) {
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = nearest(points, static_cast<Index>(i), r.centroids);
        repair_empty(points, next, r.centroids);
        const bool changed = next != labels;
        labels = std::move(next);
        if (!changed) break;
        update_centroids(points, labels, r.centroids);
        r.iterations = iter + 1;
        r.trace.push_back(within_ss(points, labels, k));
    }
    r.labels = std::move(labels);
    update_centroids(points, r.labels, r.centroids);
    r.wss = within_ss(points, r.labels, k);
    return r;
}

void check_points(const Eigen::MatrixXd& points) {
    if (!points.allFinite()) throw Error("points contain non-finite values");
}

}  // namespace

std::map<std::string, int> ClusterModel::assignments() const {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = labels[i];
    return out;
}

double within_ss(const Eigen::MatrixXd& points, const std::vector<int>& labels, std::size_t k) {
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(static_cast<Index>(k), points.cols());
    update_centroids(points, labels, centroids);
    double total = 0.0;
    for (Index i = 0; i < points.rows(); ++i) total += sq_dist(points, i, centroids, labels[static_cast<std::size_t>(i)]);
    return total;
}

ClusterModel kmeans_fit(const Eigen::MatrixXd& points, std::size_t k, const KmeansOptions& opts,
                        std::vector<std::string> ids) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (k < 1 || k > n) throw Error("k-means requires 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    if (opts.restarts < 1) throw Error("k-means requires restarts >= 1");
    check_points(points);
    if (ids.empty()) {
        for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    }
    if (ids.size() != n) throw Error("k-means: ids do not match point count");

    std::vector<Restart> runs(opts.restarts);
    parallel_for(opts.restarts, opts.jobs, [&](std::size_t r) {
        runs[r] = run_lloyd(points, k, opts.max_iter, mix_seed(opts.seed, r));
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].wss < runs[best].wss) best = r;
    }

    ClusterModel model;
    model.k = k;
    model.centroids = std::move(runs[best].centroids);
    model.labels = std::move(runs[best].labels);
    model.ids = std::move(ids);
    model.wss = runs[best].wss;
    model.iterations = runs[best].iterations;
    model.wss_trace = std::move(runs[best].trace);
    return model;
}

std::size_t assign_cluster(const ClusterModel& model, const Eigen::VectorXd& point) {
    if (static_cast<std::size_t>(point.size()) != model.dim()) {
        throw Error("point dimension " + std::to_string(point.size()) + " does not match centroid dimension " +
                    std::to_string(model.dim()));
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < model.centroids.rows(); ++c) {
        const double d = (model.centroids.row(c).transpose() - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(c);
        }
    }
    return best;
}

std::size_t select_gap_k(const std::vector<GapEntry>& entries) {
    if (entries.empty()) return 1;
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        if (entries[i].gap >= entries[i + 1].gap - entries[i + 1].sk) return entries[i].k;
    }
    const auto best = std::max_element(entries.begin(), entries.end(),
                                       [](const GapEntry& a, const GapEntry& b) { return a.gap < b.gap; });
    return best->k;
}

GapReport gap_statistic(const Eigen::MatrixXd& points, const GapOptions& opts) {
    if (opts.k_max < 1) throw Error("gap statistic requires k_max >= 1");
    if (opts.b_refs < 1) throw Error("gap statistic requires b_refs >= 1");
    check_points(points);
    const Index n = points.rows();
    const Index d = points.cols();
    if (n == 0) throw Error("gap statistic requires at least one point");

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        for (Index c = 0; c < d; ++c) {
            if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
        }
        return false;
    });
    Eigen::MatrixXd sorted(n, d);
    for (Index i = 0; i < n; ++i) sorted.row(i) = points.row(order[static_cast<std::size_t>(i)]);
    const Eigen::RowVectorXd lo = sorted.colwise().minCoeff();
    const Eigen::RowVectorXd hi = sorted.colwise().maxCoeff();

    const std::size_t k_top = std::min<std::size_t>(opts.k_max, static_cast<std::size_t>(n));
    const std::size_t per_k = opts.b_refs + 1;  // slot 0 is the observed data
    std::vector<double> wss(k_top * per_k, 0.0);
    parallel_for(wss.size(), opts.jobs, [&](std::size_t job) {
        const std::size_t k = job / per_k + 1;
        const std::size_t b = job % per_k;
        KmeansOptions km{opts.restarts, opts.max_iter, mix_seed(opts.seed, k, b, 0x6b6dULL), 1};
        if (b == 0) {
            wss[job] = kmeans_fit(sorted, k, km).wss;
            return;
        }
        Rng rng(mix_seed(opts.seed, k, b));
        Eigen::MatrixXd ref(n, d);
        for (Index i = 0; i < n; ++i) {
            for (Index c = 0; c < d; ++c) ref(i, c) = rng.uniform(lo(c), hi(c));
        }
        wss[job] = kmeans_fit(ref, k, km).wss;
    });

    GapReport report;
    for (std::size_t k = 1; k <= k_top; ++k) {
        const double w = wss[(k - 1) * per_k];
        if (!(w > 0.0)) {
            report.warnings.push_back("k=" + std::to_string(k) + " skipped: within-cluster dispersion is zero");
            continue;
        }
        std::vector<double> logs;
        for (std::size_t b = 1; b < per_k; ++b) {
            const double wb = wss[(k - 1) * per_k + b];
            if (wb > 0.0) logs.push_back(std::log(wb));
        }
        if (logs.empty()) {
            report.warnings.push_back("k=" + std::to_string(k) + " skipped: reference dispersion is zero");
            continue;
        }
        const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size());
        double var = 0.0;
        for (double l : logs) var += (l - mean) * (l - mean);
        var /= static_cast<double>(logs.size());
        GapEntry e;
        e.k = k;
        e.log_w = std::log(w);
        e.gap = mean - e.log_w;
        e.sk = std::sqrt(var) * std::sqrt(1.0 + 1.0 / static_cast<double>(logs.size()));
        report.per_k.push_back(e);
    }
    if (k_top < opts.k_max) {
        report.warnings.push_back("k > " + std::to_string(k_top) + " skipped: fewer points than clusters");
    }
    report.selected_k = select_gap_k(report.per_k);
    return report;
}

CompositionTable trial_composition(const ClusterModel& model, const std::map<std::string, TrialIndex>& trial_index) {
    std::vector<std::string> missing;
    std::vector<std::size_t> ones(model.k, 0);
    std::vector<std::size_t> totals(model.k, 0);
    for (std::size_t i = 0; i < model.ids.size(); ++i) {
        const auto it = trial_index.find(model.ids[i]);
        if (it == trial_index.end()) {
            missing.push_back(model.ids[i]);
            continue;
        }
        const auto c = static_cast<std::size_t>(model.labels[i]);
        ++totals[c];
        if (it->second == TrialIndex::one) ++ones[c];
    }
    if (!missing.empty()) {
        std::string msg = "missing trial metadata for:";
        for (const auto& id : missing) msg += " " + id;
        throw Error(msg);
    }
    CompositionTable table;
    for (std::size_t c = 0; c < model.k; ++c) {
        if (totals[c] == 0) continue;
        CompositionRow row;
        row.cluster = static_cast<int>(c);
        row.n = totals[c];
        row.pct_trial_one = 100.0 * static_cast<double>(ones[c]) / static_cast<double>(totals[c]);
        row.pct_trial_two = 100.0 - row.pct_trial_one;
        table.rows.push_back(row);
    }
    return table;
}

CompositionTable trial_composition(const ClusterModel& model, const std::vector<TrialTranscript>& trials) {
    std::map<std::string, TrialIndex> index;
    for (const auto& t : trials) index[t.trial_id] = t.trial_index;
    return trial_composition(model, index);
}

std::string composition_to_csv(const CompositionTable& table) {
    std::string out = "cluster,pct_one,pct_two,n\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.cluster) + "," + format_fixed(r.pct_trial_one, 1) + "," +
               format_fixed(r.pct_trial_two, 1) + "," + std::to_string(r.n) + "\n";
    }
    return out;
}

std::string cluster_model_to_json(const ClusterModel& model) {
    nlohmann::json assignments = nlohmann::json::object();
    for (std::size_t i = 0; i < model.ids.size(); ++i) assignments[model.ids[i]] = model.labels[i];
    std::string out = "{\"k\":" + std::to_string(model.k);
    out += ",\"centroids\":" + json_matrix(model.centroids);
    out += ",\"assignments\":" + assignments.dump();
    out += ",\"wss\":" + format_number(model.wss);
    out += "}\n";
    return out;
}

ClusterModel cluster_model_from_json(std::string_view json) {
    ClusterModel model;
    try {
        const auto j = nlohmann::json::parse(json);
        model.k = j.at("k").get<std::size_t>();
        const auto& cents = j.at("centroids");
        if (cents.size() != model.k || model.k == 0) throw Error("centroid count does not match k");
        const std::size_t d = cents.at(0).size();
        model.centroids.resize(static_cast<Index>(model.k), static_cast<Index>(d));
        for (std::size_t c = 0; c < model.k; ++c) {
            if (cents[c].size() != d) throw Error("ragged centroid matrix");
            for (std::size_t i = 0; i < d; ++i) {
                model.centroids(static_cast<Index>(c), static_cast<Index>(i)) = cents[c][i].get<double>();
            }
        }
        for (const auto& [id, label] : j.at("assignments").items()) {
            const int l = label.get<int>();
            if (l < 0 || static_cast<std::size_t>(l) >= model.k) throw Error("assignment out of range for '" + id + "'");
            model.ids.push_back(id);
            model.labels.push_back(l);
        }
        model.wss = j.at("wss").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed cluster model JSON: ") + e.what());
    }
    return model;
}

std::string gap_report_to_json(const GapReport& report) {
    std::string out = "{\"selected_k\":" + std::to_string(report.selected_k) + ",\"per_k\":[";
    for (std::size_t i = 0; i < report.per_k.size(); ++i) {
        const auto& e = report.per_k[i];
        if (i) out += ",";
        out += "{\"k\":" + std::to_string(e.k) + ",\"log_w\":" + format_number(e.log_w) +
               ",\"gap\":" + format_number(e.gap) + ",\"sk\":" + format_number(e.sk) + "}";
    }
    out += "],\"warnings\":" + nlohmann::json(report.warnings).dump() + "}\n";
    return out;
}

GapReport gap_report_from_json(std::string_view json) {
    GapReport report;
    try {
        const auto j = nlohmann::json::parse(json);
        report.selected_k = j.at("selected_k").get<std::size_t>();
        for (const auto& e : j.at("per_k")) {
            report.per_k.push_back({e.at("k").get<std::size_t>(), e.at("log_w").get<double>(),
                                    e.at("gap").get<double>(), e.at("sk").get<double>()});
        }
        report.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed gap report JSON: ") + e.what());
    }
    return report;
}

}  // namespace teamcomm
