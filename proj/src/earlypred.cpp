#include "teamcomm/earlypred.hpp"

#include <cmath>
#include <optional>

#include <nlohmann/json.hpp>

#include "teamcomm/error.hpp"
#include "teamcomm/io.hpp"
#include "teamcomm/parallel.hpp"

namespace teamcomm {

TrialTranscript truncate_transcript(const TrialTranscript& trial, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("fraction must lie in (0, 1]");
    const std::size_t total = trial.total_tokens();
    if (total == 0) throw Error("trial '" + trial.trial_id + "' has no tokens");
    if (fraction == 1.0) return trial;
    // The small slack keeps e.g. 0.3 * 10 from rounding up to 4.
    const auto target = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));

    TrialTranscript out = trial;
    out.utterances.clear();
    std::size_t cum = 0;
    for (const auto& u : trial.utterances) {
        if (cum >= target && !out.utterances.empty()) break;
        out.utterances.push_back(u);
        cum += u.token_count;
    }
    if (cum == 0) throw Error("prefix of trial '" + trial.trial_id + "' has no tokens");
    return out;
}

EarlyPredictor::EarlyPredictor(const LdaModel& lda_model, const ClusterModel& cluster_model,
                               PreprocessConfig preprocess_cfg, FoldInOptions fold_in_opts)
    : lda(lda_model),
      clusters(cluster_model),
      preprocess(std::move(preprocess_cfg)),
      fold_in(fold_in_opts),
      vocab_(lda_model.terms) {
    if (clusters.dim() != lda.k) {
        throw Error("cluster dimension " + std::to_string(clusters.dim()) + " does not match topic count " +
                    std::to_string(lda.k));
    }
}

EarlyPrediction EarlyPredictor::predict(const TrialTranscript& trial, double fraction, std::uint64_t seed) const {
    const TrialTranscript prefix = truncate_transcript(trial, fraction);
    const SparseCounts counts = count_terms(trial_tokens(prefix, preprocess), vocab_);
    if (counts.empty()) throw Error("prefix of trial '" + trial.trial_id + "' has no in-vocabulary tokens");

    EarlyPrediction out;
    out.trial_id = trial.trial_id;
    out.fraction = fraction;
    out.theta_hat = infer_theta(lda, counts, fold_in, seed);
    out.predicted_cluster = assign_cluster(clusters, out.theta_hat);
    return out;
}

EarlyPrediction predict_cluster_early(const LdaModel& lda, const ClusterModel& clusters,
                                      const TrialTranscript& trial, double fraction, std::uint64_t seed,
                                      const PreprocessConfig& preprocess, const FoldInOptions& fold_in) {
    return EarlyPredictor(lda, clusters, preprocess, fold_in).predict(trial, fraction, seed);
}

std::uint64_t trial_seed(std::uint64_t seed, const std::string& trial_id) {
    return mix_seed(seed, hash_string(trial_id));
}

AccuracyCurve early_accuracy_curve(const EarlyPredictor& predictor, const std::vector<TrialTranscript>& trials,
                                   const std::vector<double>& fractions, std::uint64_t seed, unsigned jobs) {
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) throw Error("fractions must lie in (0, 1]");
        if (i > 0 && !(fractions[i] > fractions[i - 1])) throw Error("fractions must be strictly increasing");
    }

    const std::size_t n_frac = fractions.size();
    // Slot layout per trial: reference prediction, then one per fraction.
    std::vector<std::optional<std::size_t>> preds(trials.size() * (n_frac + 1));
    parallel_for(preds.size(), jobs, [&](std::size_t job) {
        const auto& trial = trials[job / (n_frac + 1)];
        const std::size_t slot = job % (n_frac + 1);
        const double f = slot == 0 ? 1.0 : fractions[slot - 1];
        try {
            preds[job] = predictor.predict(trial, f, trial_seed(seed, trial.trial_id)).predicted_cluster;
        } catch (const Error&) {
            preds[job].reset();
        }
    });

    AccuracyCurve curve;
    for (std::size_t fi = 0; fi < n_frac; ++fi) {
        AccuracyPoint pt;
        pt.fraction = fractions[fi];
        std::size_t hits = 0;
        for (std::size_t ti = 0; ti < trials.size(); ++ti) {
            const auto& ref = preds[ti * (n_frac + 1)];
            const auto& got = preds[ti * (n_frac + 1) + fi + 1];
            if (!ref || !got) {
                curve.skipped.emplace_back(fractions[fi], trials[ti].trial_id);
                continue;
            }
            ++pt.n;
            if (*ref == *got) ++hits;
        }
        pt.accuracy = pt.n ? static_cast<double>(hits) / static_cast<double>(pt.n) : 0.0;
        curve.points.push_back(pt);
    }
    return curve;
}

std::string accuracy_curve_to_csv(const AccuracyCurve& curve) {
    std::string out = "fraction,accuracy,n\n";
    for (const auto& p : curve.points) {
        out += format_number(p.fraction, 15) + "," + format_number(p.accuracy) + "," + std::to_string(p.n) + "\n";
    }
    return out;
}

std::string accuracy_curve_to_json(const AccuracyCurve& curve) {
    std::string out = "{\"fraction\":[";
    for (std::size_t i = 0; i < curve.points.size(); ++i) out += (i ? "," : "") + format_number(curve.points[i].fraction, 15);
    out += "],\"accuracy\":[";
    for (std::size_t i = 0; i < curve.points.size(); ++i) out += (i ? "," : "") + format_number(curve.points[i].accuracy);
    out += "],\"n\":[";
    for (std::size_t i = 0; i < curve.points.size(); ++i) out += (i ? "," : "") + std::to_string(curve.points[i].n);
    out += "],\"skipped\":[";
    for (std::size_t i = 0; i < curve.skipped.size(); ++i) {
        out += (i ? "," : "");
        out += "{\"fraction\":" + format_number(curve.skipped[i].first, 15) +
               ",\"trial_id\":" + nlohmann::json(curve.skipped[i].second).dump() + "}";
    }
    out += "]}\n";
    return out;
}

}  // namespace teamcomm
