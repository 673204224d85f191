#pragma once
// Ground-truth generators: LDA corpora and team records with planted
// regression structure.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "teamcomm/corpus.hpp"
#include "teamcomm/rng.hpp"
#include "teamcomm/stats.hpp"

namespace teamcomm {

enum class TopicSupport { disjoint, dirichlet };

struct SynthCorpusSpec {
    std::size_t true_k = 3;
    std::size_t vocab_size = 150;
    std::size_t n_docs = 200;
    std::size_t doc_length_min = 100;
    std::size_t doc_length_max = 100;
    double alpha = 0.1;  // document-topic concentration
    TopicSupport topic_support = TopicSupport::disjoint;
    // disjoint: within-block Dirichlet concentration; dirichlet: over the full vocabulary.
    double topic_beta = 1.0;
    std::size_t duplicate_docs = 0;
    std::size_t utterance_min = 3;
    std::size_t utterance_max = 12;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthCorpus {
    std::vector<TrialTranscript> trials;  // n_docs originals followed by duplicates
    std::vector<std::string> terms;
    Eigen::MatrixXd true_phi;    // true_k x vocab_size
    Eigen::MatrixXd true_theta;  // n_docs x true_k
    std::vector<int> dominant_topic;                  // argmax true_theta per original doc
    std::vector<std::vector<std::uint32_t>> token_topics;  // per original doc, per token
    std::vector<std::size_t> duplicate_of;            // source doc per duplicate
};

// Term i is "q" followed by three letters encoding i in base 26 (qaaa, qaab, ...),
// which survives normalization and sorts in index order.
std::string synth_term(std::size_t i);

// Session/trial naming shared by both generators: doc/trial i belongs to
// session i/2 ("S0001" ...), team "team0001", index one/two by parity.
std::string synth_session_id(std::size_t session);
std::string synth_team_id(std::size_t session);
std::string synth_trial_id(std::size_t session, TrialIndex index);

SynthCorpus generate_lda_corpus(const SynthCorpusSpec& spec);

// One transcript file body per session, keyed by session id.
std::map<std::string, std::string> render_sessions(const std::vector<TrialTranscript>& trials);

struct SynthTeamSpec {
    std::size_t n_teams = 100;
    std::vector<std::string> beard_names = default_beard_names();
    std::map<std::string, double> beard_effects;       // planted score coefficients
    double score_intercept = 500.0;
    std::map<std::string, double> low_cluster_logit;  // may include kIntercept
    std::map<std::string, double> ted_trend;          // per unit elapsed fraction
    TedSchema ted_schema;
    double noise_sd = 10.0;      // score noise
    double ted_noise_sd = 0.0;   // per-sample TED noise
    std::size_t ted_samples = 11;  // evenly spaced over [0, 1]
    std::map<std::string, double> score_offsets;  // per trial, added to the score
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthTeams {
    std::vector<BeardProfile> profiles;
    std::map<std::string, std::string> trial_team;
    std::vector<TedSeries> ted;
    std::map<std::string, double> scores;
    std::map<std::string, bool> low_membership;  // per trial (team-level draw)
};

SynthTeams generate_team_records(const SynthTeamSpec& spec);

// BEARD profile with standard-normal variables shifted by `shift` (per name).
BeardProfile draw_beard_profile(Rng& rng, const std::string& team_id, const std::vector<std::string>& names,
                                const std::map<std::string, double>& shift = {});

}  // namespace teamcomm
