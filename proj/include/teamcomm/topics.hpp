#pragma once
// LDA by collapsed Gibbs sampling, probabilistic coherence, topic-count
// selection and fold-in inference.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "teamcomm/corpus.hpp"
#include "teamcomm/rng.hpp"

namespace teamcomm {

struct LdaConfig {
    double alpha = 0.1;
    double beta = 0.05;
    std::size_t n_iter = 500;
    std::size_t burn_in = 250;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LdaModel {
    std::size_t k = 0;
    std::vector<std::string> terms;
    std::string vocab_hash;
    Eigen::MatrixXd phi;    // k x V, rows sum to 1
    Eigen::MatrixXd theta;  // D x k, rows sum to 1
    std::vector<std::string> doc_ids;
    LdaConfig config;

    std::size_t vocab_size() const noexcept { return terms.size(); }
};

// Collapsed Gibbs sampler over token-topic assignments.
//
// Documents are swept in ascending doc_id order and each document draws from
// its own stream seeded by (seed, hash(doc_id)), so results depend on the set
// of documents and not on their row order. Within a document, tokens are laid
// out by ascending term index.
class GibbsSampler {
public:
    struct Token {
        std::uint32_t doc;   // DTM row
        std::uint32_t term;
    };

    GibbsSampler(const DocTermMatrix& dtm, std::size_t k, double alpha, double beta, std::uint64_t seed);

    void sweep();

    std::size_t k() const noexcept { return k_; }
    std::size_t n_docs() const noexcept { return n_docs_; }
    std::size_t n_terms() const noexcept { return n_terms_; }
    // Tokens in internal sweep order; assignments() is aligned with it.
    const std::vector<Token>& tokens() const noexcept { return tokens_; }
    const std::vector<std::uint32_t>& assignments() const noexcept { return z_; }

    std::uint32_t doc_topic(std::size_t d, std::size_t t) const { return ndt_[d * k_ + t]; }
    std::uint32_t topic_term(std::size_t t, std::size_t w) const { return nwt_[w * k_ + t]; }
    std::uint32_t topic_total(std::size_t t) const { return nt_[t]; }

private:
    std::size_t k_;
    std::size_t n_docs_;
    std::size_t n_terms_;
    double alpha_;
    double beta_;
    std::vector<Token> tokens_;
    std::vector<std::size_t> doc_begin_;  // token range per sweep position
    std::vector<std::uint32_t> z_;
    std::vector<std::uint32_t> ndt_;  // D x k
    std::vector<std::uint32_t> nwt_;  // V x k
    std::vector<std::uint32_t> nt_;
    std::vector<Rng> doc_rng_;        // per sweep position
    std::vector<double> weights_;
};

LdaModel fit_lda(const DocTermMatrix& dtm, std::size_t k, const LdaConfig& cfg);

// Top m terms per topic by phi descending; ties broken lexicographically.
std::vector<std::vector<std::string>> top_terms(const LdaModel& model, std::size_t m);

// Binary document occurrence index used by coherence scoring.
class DocOccurrence {
public:
    explicit DocOccurrence(const DocTermMatrix& dtm);

    std::size_t n_docs() const noexcept { return n_docs_; }
    // Sorted row indices of documents containing the term; empty for unknown terms.
    const std::vector<std::uint32_t>& docs_with(std::string_view term) const;

private:
    std::size_t n_docs_;
    Vocabulary vocab_;
    std::vector<std::vector<std::uint32_t>> postings_;
};

// Mean over rank-ordered pairs i < j of P(t_j | t_i) - P(t_j), using the first
// m terms. Pairs with P(t_i) = 0 contribute 0.
double probabilistic_coherence(const std::vector<std::string>& topic_terms, const DocOccurrence& occ, std::size_t m);
double probabilistic_coherence(const std::vector<std::string>& topic_terms, const DocTermMatrix& dtm, std::size_t m);

struct CoherenceReport {
    std::size_t k = 0;
    std::vector<double> per_topic;
    double mean = 0.0;
    std::size_t top_m = 0;
};

CoherenceReport coherence_report(const LdaModel& model, const DocOccurrence& occ, std::size_t top_m);

struct TopicCountReport {
    std::map<std::size_t, std::vector<double>> candidates;  // k -> per-run mean coherence
    std::vector<std::uint64_t> run_seeds;
    std::size_t selected_k = 0;
    std::size_t top_m = 0;

    double average(std::size_t k) const;
};

enum class RunSelection { best, median };

RunSelection parse_run_selection(std::string_view s);

// Sweeps k in [k_min, k_max] with runs_per_k fits each. Run i uses seed
// run_seed(cfg.seed, i). selected_k maximizes the across-run average of mean
// coherence (ties: smaller k). Results do not depend on `jobs`.
TopicCountReport select_topic_count(const DocTermMatrix& dtm, std::size_t k_min, std::size_t k_max,
                                    std::size_t runs_per_k, const LdaConfig& cfg, std::size_t top_m = 5,
                                    unsigned jobs = 1);

// Run index for k chosen by best (max coherence) or median coherence; ties take the lower index.
std::size_t pick_run(const TopicCountReport& report, std::size_t k, RunSelection how);

struct FoldInOptions {
    std::size_t n_iter = 200;
    std::size_t burn_in = 100;
};

// Gibbs fold-in with phi held fixed. Returns (avg n_dt + alpha) / (n_d + k alpha)
// averaged over post-burn-in sweeps.
Eigen::VectorXd infer_theta(const LdaModel& model, const SparseCounts& doc_counts, const FoldInOptions& opts,
                            std::uint64_t seed);

std::string lda_model_to_json(const LdaModel& model);
LdaModel lda_model_from_json(std::string_view json);

}  // namespace teamcomm
