#include "teamcomm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "teamcomm/error.hpp"

namespace teamcomm {

void SynthCorpusSpec::validate() const {
    if (true_k < 1) throw Error("synth corpus: true_k must be >= 1");
    if (vocab_size < 1 || vocab_size > 26 * 26 * 26) throw Error("synth corpus: vocab_size out of range");
    if (topic_support == TopicSupport::disjoint && vocab_size < true_k) {
        throw Error("synth corpus: disjoint support needs vocab_size >= true_k");
    }
    if (n_docs < 1) throw Error("synth corpus: n_docs must be >= 1");
    if (doc_length_min < 1 || doc_length_min > doc_length_max) throw Error("synth corpus: bad document length range");
    if (!(alpha > 0.0) || !(topic_beta > 0.0)) throw Error("synth corpus: concentrations must be positive");
    if (duplicate_docs > n_docs) throw Error("synth corpus: more duplicates than documents");
    if (utterance_min < 1 || utterance_min > utterance_max) throw Error("synth corpus: bad utterance length range");
}

std::string synth_term(std::size_t i) {
    std::string s = "qaaa";
    s[3] = static_cast<char>('a' + i % 26);
    s[2] = static_cast<char>('a' + (i / 26) % 26);
    s[1] = static_cast<char>('a' + (i / 676) % 26);
    return s;
}

std::string synth_session_id(std::size_t session) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%04zu", session + 1);
    return buf;
}

std::string synth_team_id(std::size_t session) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "team%04zu", session + 1);
    return buf;
}

std::string synth_trial_id(std::size_t session, TrialIndex index) {
    return synth_session_id(session) + (index == TrialIndex::one ? "-T1" : "-T2");
}

namespace {

TrialTranscript make_trial(std::size_t position, const std::vector<std::string>& tokens, const SynthCorpusSpec& spec,
                           Rng& rng) {
    TrialTranscript trial;
    const std::size_t session = position / 2;
    trial.trial_index = position % 2 == 0 ? TrialIndex::one : TrialIndex::two;
    trial.trial_id = synth_trial_id(session, trial.trial_index);
    trial.team_id = synth_team_id(session);
    std::size_t i = 0;
    while (i < tokens.size()) {
        const std::size_t len = spec.utterance_min + rng.below(spec.utterance_max - spec.utterance_min + 1);
        const std::size_t end = std::min(tokens.size(), i + len);
        Utterance u;
        u.speaker_role = static_cast<Role>(rng.below(3));
        u.ordinal = trial.utterances.size();
        for (std::size_t j = i; j < end; ++j) {
            if (j > i) u.text += ' ';
            u.text += tokens[j];
        }
        u.token_count = end - i;
        trial.utterances.push_back(std::move(u));
        i = end;
    }
    return trial;
}

}  // namespace

SynthCorpus generate_lda_corpus(const SynthCorpusSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto k = static_cast<Eigen::Index>(spec.true_k);
    const auto v = static_cast<Eigen::Index>(spec.vocab_size);

    SynthCorpus out;
    for (std::size_t i = 0; i < spec.vocab_size; ++i) out.terms.push_back(synth_term(i));

    out.true_phi = Eigen::MatrixXd::Zero(k, v);
    for (Eigen::Index t = 0; t < k; ++t) {
        if (spec.topic_support == TopicSupport::disjoint) {
            const Eigen::Index begin = t * v / k;
            const Eigen::Index end = (t + 1) * v / k;
            const auto w = rng.dirichlet(static_cast<std::size_t>(end - begin), spec.topic_beta);
            for (Eigen::Index i = begin; i < end; ++i) out.true_phi(t, i) = w[static_cast<std::size_t>(i - begin)];
        } else {
            const auto w = rng.dirichlet(spec.vocab_size, spec.topic_beta);
            for (Eigen::Index i = 0; i < v; ++i) out.true_phi(t, i) = w[static_cast<std::size_t>(i)];
        }
    }

    out.true_theta.resize(static_cast<Eigen::Index>(spec.n_docs), k);
    std::vector<double> phi_row(spec.vocab_size);
    for (std::size_t d = 0; d < spec.n_docs; ++d) {
        const auto theta = rng.dirichlet(spec.true_k, spec.alpha);
        for (Eigen::Index t = 0; t < k; ++t) out.true_theta(static_cast<Eigen::Index>(d), t) = theta[static_cast<std::size_t>(t)];
        out.dominant_topic.push_back(static_cast<int>(std::max_element(theta.begin(), theta.end()) - theta.begin()));

        const std::size_t len = spec.doc_length_min + rng.below(spec.doc_length_max - spec.doc_length_min + 1);
        std::vector<std::string> tokens;
        std::vector<std::uint32_t> topics;
        for (std::size_t n = 0; n < len; ++n) {
            const std::size_t z = rng.categorical(theta, 1.0);
            for (Eigen::Index i = 0; i < v; ++i) phi_row[static_cast<std::size_t>(i)] = out.true_phi(static_cast<Eigen::Index>(z), i);
            const std::size_t w = rng.categorical(phi_row, 1.0);
            tokens.push_back(out.terms[w]);
            topics.push_back(static_cast<std::uint32_t>(z));
        }
        out.token_topics.push_back(std::move(topics));
        out.trials.push_back(make_trial(d, tokens, spec, rng));
    }

    for (std::size_t j = 0; j < spec.duplicate_docs; ++j) {
        const std::size_t src = j;
        TrialTranscript dup = out.trials[src];
        const std::size_t position = spec.n_docs + j;
        dup.trial_index = position % 2 == 0 ? TrialIndex::one : TrialIndex::two;
        dup.trial_id = synth_trial_id(position / 2, dup.trial_index);
        dup.team_id = synth_team_id(position / 2);
        out.trials.push_back(std::move(dup));
        out.duplicate_of.push_back(src);
    }
    return out;
}

std::map<std::string, std::string> render_sessions(const std::vector<TrialTranscript>& trials) {
    std::map<std::string, std::string> out;
    for (const auto& trial : trials) {
        const auto dash = trial.trial_id.rfind('-');
        const std::string session = dash == std::string::npos ? trial.trial_id : trial.trial_id.substr(0, dash);
        auto& text = out[session];
        if (text.empty()) {
            text = "# session: " + session + "\n# team: " + trial.team_id + "\n";
        } else {
            text += kDefaultBoundaryMarker + "\n";
        }
        text += format_trial_lines(trial);
    }
    return out;
}

void SynthTeamSpec::validate() const {
    if (n_teams < 1) throw Error("synth teams: n_teams must be >= 1");
    if (beard_names.size() != kBeardVariableCount) throw Error("synth teams: need exactly 8 BEARD names");
    for (const auto& [name, v] : beard_effects) {
        if (std::find(beard_names.begin(), beard_names.end(), name) == beard_names.end()) {
            throw Error("synth teams: effect on unknown BEARD variable '" + name + "'");
        }
    }
    for (const auto& [name, v] : low_cluster_logit) {
        if (name != kIntercept && std::find(beard_names.begin(), beard_names.end(), name) == beard_names.end()) {
            throw Error("synth teams: logit on unknown BEARD variable '" + name + "'");
        }
    }
    for (const auto& [name, v] : ted_trend) {
        if (!ted_schema.count(name)) throw Error("synth teams: trend on TED variable '" + name + "' not in schema");
    }
    if (noise_sd < 0.0 || ted_noise_sd < 0.0) throw Error("synth teams: noise must be non-negative");
    if (ted_samples < 2) throw Error("synth teams: need at least 2 TED samples");
}

BeardProfile draw_beard_profile(Rng& rng, const std::string& team_id, const std::vector<std::string>& names,
                                const std::map<std::string, double>& shift) {
    BeardProfile p;
    p.team_id = team_id;
    for (const auto& name : names) {
        const auto it = shift.find(name);
        p.variables.emplace_back(name, rng.normal() + (it == shift.end() ? 0.0 : it->second));
    }
    return p;
}

SynthTeams generate_team_records(const SynthTeamSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SynthTeams out;
    for (std::size_t team = 0; team < spec.n_teams; ++team) {
        BeardProfile profile = draw_beard_profile(rng, synth_team_id(team), spec.beard_names);

        double logit = 0.0;
        for (const auto& [name, w] : spec.low_cluster_logit) {
            logit += name == kIntercept ? w : w * *profile.get(name);
        }
        const bool low = rng.uniform() < 1.0 / (1.0 + std::exp(-logit));

        for (TrialIndex idx : {TrialIndex::one, TrialIndex::two}) {
            const std::string trial = synth_trial_id(team, idx);
            double score = spec.score_intercept;
            for (const auto& [name, b] : spec.beard_effects) score += b * *profile.get(name);
            score += spec.noise_sd * rng.normal();
            if (const auto off = spec.score_offsets.find(trial); off != spec.score_offsets.end()) score += off->second;
            out.scores[trial] = score;
            out.trial_team[trial] = profile.team_id;
            out.low_membership[trial] = low;

            TedSeries series;
            series.trial_id = trial;
            series.schema = spec.ted_schema;
            for (std::size_t s = 0; s < spec.ted_samples; ++s) {
                TedSample sample;
                sample.t = static_cast<double>(s) / static_cast<double>(spec.ted_samples - 1);
                for (const auto& [name, var] : spec.ted_schema) {
                    const auto trend = spec.ted_trend.find(name);
                    const double slope = trend == spec.ted_trend.end() ? 0.0 : trend->second;
                    sample.values[name] = 1.0 + slope * sample.t + spec.ted_noise_sd * rng.normal();
                }
                series.samples.push_back(std::move(sample));
            }
            out.ted.push_back(std::move(series));
        }
        out.profiles.push_back(std::move(profile));
    }
    return out;
}

}  // namespace teamcomm
