#include "teamcomm/intervention.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "teamcomm/error.hpp"
#include "teamcomm/io.hpp"

namespace teamcomm {

PerformanceProfile derive_performance_profile(const RegressionResult& reg, double alpha_level) {
    if (reg.model_kind != ModelKind::ols) throw Error("performance profile needs an OLS cluster regression");
    PerformanceProfile profile;
    profile.source = reg;
    bool any = false;
    for (const auto& term : reg.terms) {
        const auto cluster = parse_cluster_term(term.name);
        if (!cluster) continue;
        any = true;
        if (term.coef < 0.0 && term.p < alpha_level) profile.low_clusters.insert(*cluster);
    }
    if (!any) throw Error("regression has no cluster dummy terms");
    return profile;
}

double gate_probability(const BeardProfile& profile, const RegressionResult& gate_model) {
    double eta = 0.0;
    for (const auto& term : gate_model.terms) {
        if (term.name == kIntercept) {
            eta += term.coef;
            continue;
        }
        const auto v = profile.get(term.name);
        if (!v) throw Error("BEARD profile '" + profile.team_id + "' lacks gate term '" + term.name + "'");
        eta += term.coef * *v;
    }
    return 1.0 / (1.0 + std::exp(-eta));
}

bool beard_intervention_gate(const BeardProfile& profile, const RegressionResult& gate_model, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error("gate threshold must lie in (0, 1)");
    return gate_probability(profile, gate_model) >= threshold;
}

RegressionResult fit_membership_gate(const std::vector<BeardProfile>& profiles,
                                     const std::map<std::string, std::string>& trial_team,
                                     const std::map<std::string, int>& assignments, const std::set<int>& low_clusters) {
    if (profiles.empty()) throw Error("no BEARD profiles");
    std::map<std::string, const BeardProfile*> by_team;
    for (const auto& p : profiles) by_team[p.team_id] = &p;

    std::vector<std::string> names{kIntercept};
    for (const auto& [name, v] : profiles.front().variables) names.push_back(name);

    std::vector<std::pair<const BeardProfile*, double>> rows;
    for (const auto& [trial, cluster] : assignments) {
        const auto team = trial_team.find(trial);
        if (team == trial_team.end()) continue;
        const auto prof = by_team.find(team->second);
        if (prof == by_team.end()) continue;
        rows.emplace_back(prof->second, low_clusters.count(cluster) ? 1.0 : 0.0);
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = 1.0;
        for (std::size_t j = 1; j < names.size(); ++j) {
            const auto v = rows[i].first->get(names[j]);
            if (!v) throw Error("BEARD profile '" + rows[i].first->team_id + "' lacks '" + names[j] + "'");
            x(r, static_cast<Eigen::Index>(j)) = *v;
        }
        y(r) = rows[i].second;
    }
    return logistic_fit(x, y, names);
}

bool ted_improvement(const TedSeries& series, double t0, double t1, const std::set<std::string>& selected,
                     double epsilon) {
    if (!(t0 < t1)) throw Error("TED comparison needs t0 < t1");
    if (selected.empty()) throw Error("no TED measures selected");
    double total = 0.0;
    for (const auto& name : selected) {
        const auto spec = series.schema.find(name);
        if (spec == series.schema.end()) throw Error("TED measure '" + name + "' not in schema");
        const auto v0 = series.value_at(name, t0);
        if (!v0) throw Error("TED series '" + series.trial_id + "' has no sample at or before t=" + format_number(t0, 6));
        const auto v1 = series.value_at(name, t1);
        const double sign = spec->second.direction == Direction::higher_is_better ? 1.0 : -1.0;
        total += (*v1 - *v0) * sign;
    }
    return total / static_cast<double>(selected.size()) > epsilon;
}

TedBaseline parse_ted_baseline(std::string_view s) {
    if (s == "previous") return TedBaseline::previous;
    if (s == "first") return TedBaseline::first;
    throw Error("TED baseline must be 'previous' or 'first'");
}

InterventionLog run_intervention_pipeline(const TrialTranscript& trial, const LdaModel& lda,
                                          const ClusterModel& clusters, const PerformanceProfile& profile,
                                          const BeardProfile& beard, const RegressionResult& gate_model,
                                          const TedSeries& ted, const PolicyConfig& cfg) {
    if (cfg.checkpoints.empty()) throw Error("no checkpoints configured");
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
        const double c = cfg.checkpoints[i];
        if (!(c > 0.0 && c <= 1.0)) throw Error("checkpoints must lie in (0, 1]");
        if (i > 0 && !(c > cfg.checkpoints[i - 1])) throw Error("checkpoints must be strictly increasing");
    }

    const EarlyPredictor predictor(lda, clusters, cfg.preprocess, cfg.fold_in);
    const std::uint64_t seed = trial_seed(cfg.seed, trial.trial_id);

    InterventionLog log;
    log.trial_id = trial.trial_id;
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
        const double cp = cfg.checkpoints[i];
        CheckpointDecision d;
        d.checkpoint = cp;
        try {
            d.predicted_cluster = predictor.predict(trial, cp, seed).predicted_cluster;
        } catch (const Error& e) {
            d.skipped = true;
            d.reason = std::string("skipped: ") + e.what();
            log.decisions.push_back(std::move(d));
            continue;
        }
        d.low_performing = profile.low_clusters.count(static_cast<int>(*d.predicted_cluster)) > 0;
        if (!d.low_performing) {
            d.reason = "cluster " + std::to_string(*d.predicted_cluster) + " is not low-performing";
            log.decisions.push_back(std::move(d));
            continue;
        }

        if (i == 0) {
            const double prob = gate_probability(beard, gate_model);
            const bool pass = beard_intervention_gate(beard, gate_model, cfg.gate_threshold);
            d.beard_gate = pass;
            d.intervene = pass;
            d.reason = "cluster " + std::to_string(*d.predicted_cluster) + " is low-performing; BEARD risk " +
                       format_number(prob, 4) + (pass ? " >= " : " < ") + "threshold " +
                       format_number(cfg.gate_threshold, 4);
        } else {
            const double base = cfg.ted_baseline == TedBaseline::previous ? cfg.checkpoints[i - 1] : cfg.checkpoints[0];
            try {
                const bool improved = ted_improvement(ted, base, cp, cfg.ted_selected, cfg.ted_epsilon);
                d.ted_improved = improved;
                d.intervene = !improved;
                d.reason = "cluster " + std::to_string(*d.predicted_cluster) + " is still low-performing; TED " +
                           (improved ? "improved" : "not improved") + " since " + format_number(base, 4);
            } catch (const Error& e) {
                d.skipped = true;
                d.reason = std::string("skipped: ") + e.what();
            }
        }
        if (d.intervene) ++log.total_interventions;
        log.decisions.push_back(std::move(d));
    }
    return log;
}

std::string intervention_log_to_jsonl(const InterventionLog& log) {
    std::string out;
    for (const auto& d : log.decisions) {
        nlohmann::ordered_json j;
        j["trial_id"] = log.trial_id;
        j["checkpoint"] = nlohmann::json::parse(format_number(d.checkpoint, 15));
        j["predicted_cluster"] = d.predicted_cluster ? nlohmann::ordered_json(*d.predicted_cluster) : nlohmann::ordered_json(nullptr);
        j["low"] = d.skipped && !d.predicted_cluster ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(d.low_performing);
        j["gate"] = d.beard_gate ? nlohmann::ordered_json(*d.beard_gate) : nlohmann::ordered_json(nullptr);
        j["ted_improved"] = d.ted_improved ? nlohmann::ordered_json(*d.ted_improved) : nlohmann::ordered_json(nullptr);
        j["intervene"] = d.intervene;
        j["reason"] = d.reason;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace teamcomm
