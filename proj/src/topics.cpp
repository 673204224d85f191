#include "teamcomm/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "teamcomm/error.hpp"
#include "teamcomm/io.hpp"
#include "teamcomm/parallel.hpp"

namespace teamcomm {

void LdaConfig::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("LDA alpha must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("LDA beta must be positive");
    if (n_iter < 1) throw Error("LDA n_iter must be >= 1");
    if (burn_in >= n_iter) throw Error("LDA burn_in must be < n_iter");
}

GibbsSampler::GibbsSampler(const DocTermMatrix& dtm, std::size_t k, double alpha, double beta, std::uint64_t seed)
    : k_(k), n_docs_(dtm.n_docs()), n_terms_(dtm.n_terms()), alpha_(alpha), beta_(beta) {
    if (k_ < 1) throw Error("topic count must be >= 1");
    if (n_docs_ == 0) throw Error("document-term matrix has no rows");

    std::vector<std::size_t> order(n_docs_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dtm.doc_ids[a] < dtm.doc_ids[b]; });

    ndt_.assign(n_docs_ * k_, 0);
    nwt_.assign(n_terms_ * k_, 0);
    nt_.assign(k_, 0);
    weights_.assign(k_, 0.0);
    doc_begin_.push_back(0);
    doc_rng_.reserve(n_docs_);

    for (std::size_t d : order) {
        Rng rng(mix_seed(seed, hash_string(dtm.doc_ids[d])));
        for (const auto& [term, count] : dtm.rows[d]) {
            for (std::uint32_t c = 0; c < count; ++c) {
                const auto topic = static_cast<std::uint32_t>(rng.below(k_));
                tokens_.push_back({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(term)});
                z_.push_back(topic);
                ++ndt_[d * k_ + topic];
                ++nwt_[term * k_ + topic];
                ++nt_[topic];
            }
        }
        doc_begin_.push_back(tokens_.size());
        doc_rng_.push_back(rng);
    }
}

void GibbsSampler::sweep() {
    const double v_beta = static_cast<double>(n_terms_) * beta_;
    for (std::size_t pos = 0; pos + 1 < doc_begin_.size(); ++pos) {
        Rng& rng = doc_rng_[pos];
        for (std::size_t i = doc_begin_[pos]; i < doc_begin_[pos + 1]; ++i) {
            const std::size_t d = tokens_[i].doc;
            const std::size_t w = tokens_[i].term;
            std::uint32_t* nd = &ndt_[d * k_];
            std::uint32_t* nw = &nwt_[w * k_];
            const std::uint32_t old = z_[i];
            --nd[old];
            --nw[old];
            --nt_[old];

            double total = 0.0;
            for (std::size_t t = 0; t < k_; ++t) {
                const double p = (nd[t] + alpha_) * (nw[t] + beta_) / (nt_[t] + v_beta);
                total += p;
                weights_[t] = p;
            }
            const auto topic = static_cast<std::uint32_t>(rng.categorical(weights_, total));

            z_[i] = topic;
            ++nd[topic];
            ++nw[topic];
            ++nt_[topic];
        }
    }
}

LdaModel fit_lda(const DocTermMatrix& dtm, std::size_t k, const LdaConfig& cfg) {
    cfg.validate();
    if (k < 2) throw Error("topic count must be >= 2");
    if (dtm.n_docs() == 0) throw Error("document-term matrix has no rows");
    if (k > dtm.total_tokens()) throw Error("topic count exceeds total token count");
    for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
        if (dtm.row_total(d) == 0) throw Error("document '" + dtm.doc_ids[d] + "' has no tokens");
    }

    GibbsSampler sampler(dtm, k, cfg.alpha, cfg.beta, cfg.seed);
    const std::size_t n_docs = dtm.n_docs();
    const std::size_t n_terms = dtm.n_terms();
    Eigen::MatrixXd sum_dt = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_docs), static_cast<Eigen::Index>(k));
    Eigen::MatrixXd sum_tw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n_terms));

    for (std::size_t iter = 0; iter < cfg.n_iter; ++iter) {
        sampler.sweep();
        if (iter < cfg.burn_in) continue;
        for (std::size_t d = 0; d < n_docs; ++d) {
            for (std::size_t t = 0; t < k; ++t) sum_dt(d, t) += sampler.doc_topic(d, t);
        }
        for (std::size_t w = 0; w < n_terms; ++w) {
            for (std::size_t t = 0; t < k; ++t) sum_tw(t, w) += sampler.topic_term(t, w);
        }
    }

    const double samples = static_cast<double>(cfg.n_iter - cfg.burn_in);
    sum_dt /= samples;
    sum_tw /= samples;

    LdaModel model;
    model.k = k;
    model.terms = dtm.vocab.terms();
    model.vocab_hash = dtm.vocab.digest();
    model.doc_ids = dtm.doc_ids;
    model.config = cfg;
    model.theta.resize(static_cast<Eigen::Index>(n_docs), static_cast<Eigen::Index>(k));
    model.phi.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n_terms));

    const double k_alpha = static_cast<double>(k) * cfg.alpha;
    for (std::size_t d = 0; d < n_docs; ++d) {
        const double n_d = static_cast<double>(dtm.row_total(d));
        for (std::size_t t = 0; t < k; ++t) model.theta(d, t) = (sum_dt(d, t) + cfg.alpha) / (n_d + k_alpha);
    }
    const double v_beta = static_cast<double>(n_terms) * cfg.beta;
    for (std::size_t t = 0; t < k; ++t) {
        const double n_t = sum_tw.row(static_cast<Eigen::Index>(t)).sum();
        for (std::size_t w = 0; w < n_terms; ++w) model.phi(t, w) = (sum_tw(t, w) + cfg.beta) / (n_t + v_beta);
    }
    return model;
}

std::vector<std::vector<std::string>> top_terms(const LdaModel& model, std::size_t m) {
    const std::size_t v = model.vocab_size();
    if (m < 1 || m > v) throw Error("top_terms: m must be in [1, V]");
    std::vector<std::vector<std::string>> out;
    out.reserve(model.k);
    std::vector<std::size_t> idx(v);
    for (std::size_t t = 0; t < model.k; ++t) {
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              const double pa = model.phi(t, a);
                              const double pb = model.phi(t, b);
                              if (pa != pb) return pa > pb;
                              return model.terms[a] < model.terms[b];
                          });
        std::vector<std::string> row;
        for (std::size_t i = 0; i < m; ++i) row.push_back(model.terms[idx[i]]);
        out.push_back(std::move(row));
    }
    return out;
}

DocOccurrence::DocOccurrence(const DocTermMatrix& dtm)
    : n_docs_(dtm.n_docs()), vocab_(dtm.vocab), postings_(dtm.n_terms()) {
    for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
        for (const auto& [t, c] : dtm.rows[d]) {
            if (c > 0) postings_[t].push_back(static_cast<std::uint32_t>(d));
        }
    }
}

const std::vector<std::uint32_t>& DocOccurrence::docs_with(std::string_view term) const {
    static const std::vector<std::uint32_t> empty;
    const auto idx = vocab_.find(term);
    return idx ? postings_[*idx] : empty;
}

double probabilistic_coherence(const std::vector<std::string>& topic_terms, const DocOccurrence& occ,
                               std::size_t m) {
    if (m < 2) throw Error("probabilistic coherence needs m >= 2");
    if (topic_terms.size() < m) throw Error("probabilistic coherence: fewer than m topic terms");
    if (occ.n_docs() == 0) throw Error("probabilistic coherence: no documents");

    const double n_docs = static_cast<double>(occ.n_docs());
    std::vector<const std::vector<std::uint32_t>*> postings;
    for (std::size_t i = 0; i < m; ++i) postings.push_back(&occ.docs_with(topic_terms[i]));

    double total = 0.0;
    std::size_t pairs = 0;
    std::vector<std::uint32_t> both;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            ++pairs;
            const auto& di = *postings[i];
            const auto& dj = *postings[j];
            if (di.empty()) continue;
            both.clear();
            std::set_intersection(di.begin(), di.end(), dj.begin(), dj.end(), std::back_inserter(both));
            const double conditional = static_cast<double>(both.size()) / static_cast<double>(di.size());
            total += conditional - static_cast<double>(dj.size()) / n_docs;
        }
    }
    return total / static_cast<double>(pairs);
}

double probabilistic_coherence(const std::vector<std::string>& topic_terms, const DocTermMatrix& dtm,
                               std::size_t m) {
    for (std::size_t i = 0; i < std::min(m, topic_terms.size()); ++i) {
        if (!dtm.vocab.find(topic_terms[i])) throw Error("term '" + topic_terms[i] + "' not in vocabulary");
    }
    return probabilistic_coherence(topic_terms, DocOccurrence(dtm), m);
}

CoherenceReport coherence_report(const LdaModel& model, const DocOccurrence& occ, std::size_t top_m) {
    CoherenceReport report;
    report.k = model.k;
    report.top_m = top_m;
    for (const auto& terms : top_terms(model, top_m)) {
        report.per_topic.push_back(probabilistic_coherence(terms, occ, top_m));
    }
    report.mean = std::accumulate(report.per_topic.begin(), report.per_topic.end(), 0.0) /
                  static_cast<double>(report.per_topic.size());
    return report;
}

double TopicCountReport::average(std::size_t k) const {
    const auto& runs = candidates.at(k);
    return std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
}

RunSelection parse_run_selection(std::string_view s) {
    if (s == "best") return RunSelection::best;
    if (s == "median") return RunSelection::median;
    throw Error("run selection must be 'best' or 'median'");
}

TopicCountReport select_topic_count(const DocTermMatrix& dtm, std::size_t k_min, std::size_t k_max,
                                    std::size_t runs_per_k, const LdaConfig& cfg, std::size_t top_m,
                                    unsigned jobs) {
    if (k_min < 2 || k_min > k_max) throw Error("topic sweep requires 2 <= k_min <= k_max");
    if (runs_per_k < 1) throw Error("runs_per_k must be >= 1");
    cfg.validate();

    TopicCountReport report;
    report.top_m = top_m;
    for (std::size_t i = 0; i < runs_per_k; ++i) report.run_seeds.push_back(run_seed(cfg.seed, i));

    const std::size_t n_k = k_max - k_min + 1;
    std::vector<double> scores(n_k * runs_per_k, 0.0);
    const DocOccurrence occ(dtm);
    parallel_for(scores.size(), jobs, [&](std::size_t job) {
        const std::size_t k = k_min + job / runs_per_k;
        LdaConfig run_cfg = cfg;
        run_cfg.seed = report.run_seeds[job % runs_per_k];
        const LdaModel model = fit_lda(dtm, k, run_cfg);
        scores[job] = coherence_report(model, occ, top_m).mean;
    });

    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t ki = 0; ki < n_k; ++ki) {
        const std::size_t k = k_min + ki;
        auto& runs = report.candidates[k];
        runs.assign(scores.begin() + static_cast<std::ptrdiff_t>(ki * runs_per_k),
                    scores.begin() + static_cast<std::ptrdiff_t>((ki + 1) * runs_per_k));
        const double avg = report.average(k);
        if (avg > best) {
            best = avg;
            report.selected_k = k;
        }
    }
    return report;
}

std::size_t pick_run(const TopicCountReport& report, std::size_t k, RunSelection how) {
    const auto it = report.candidates.find(k);
    if (it == report.candidates.end() || it->second.empty()) {
        throw Error("topic count " + std::to_string(k) + " not in sweep report");
    }
    const auto& runs = it->second;
    std::vector<std::size_t> idx(runs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return runs[a] > runs[b]; });
    if (how == RunSelection::best) return idx.front();
    return idx[(idx.size() - 1) / 2];
}

Eigen::VectorXd infer_theta(const LdaModel& model, const SparseCounts& doc_counts, const FoldInOptions& opts,
                            std::uint64_t seed) {
    const std::size_t k = model.k;
    if (k < 1) throw Error("model has no topics");
    if (opts.n_iter < 1 || opts.burn_in >= opts.n_iter) throw Error("fold-in requires burn_in < n_iter");

    std::vector<std::uint32_t> words;
    for (const auto& [t, c] : doc_counts) {
        if (t >= model.vocab_size()) throw Error("term index out of model vocabulary");
        words.insert(words.end(), c, static_cast<std::uint32_t>(t));
    }
    if (words.empty()) throw Error("no in-vocabulary tokens");

    const double alpha = model.config.alpha;
    const double n_d = static_cast<double>(words.size());
    Eigen::VectorXd theta(static_cast<Eigen::Index>(k));
    if (k == 1) {
        theta(0) = 1.0;
        return theta;
    }

    Rng rng(seed);
    std::vector<std::uint32_t> z(words.size());
    std::vector<std::uint32_t> ndt(k, 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
        z[i] = static_cast<std::uint32_t>(rng.below(k));
        ++ndt[z[i]];
    }

    std::vector<double> sum(k, 0.0);
    std::vector<double> weights(k);
    for (std::size_t iter = 0; iter < opts.n_iter; ++iter) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            --ndt[z[i]];
            double total = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                weights[t] = (ndt[t] + alpha) * model.phi(static_cast<Eigen::Index>(t), words[i]);
                total += weights[t];
            }
            z[i] = static_cast<std::uint32_t>(rng.categorical(weights, total));
            ++ndt[z[i]];
        }
        if (iter >= opts.burn_in) {
            for (std::size_t t = 0; t < k; ++t) sum[t] += ndt[t];
        }
    }

    const double samples = static_cast<double>(opts.n_iter - opts.burn_in);
    const double denom = n_d + static_cast<double>(k) * alpha;
    for (std::size_t t = 0; t < k; ++t) theta(static_cast<Eigen::Index>(t)) = (sum[t] / samples + alpha) / denom;
    return theta;
}

std::string lda_model_to_json(const LdaModel& model) {
    std::string out = "{";
    out += "\"k\":" + std::to_string(model.k);
    out += ",\"alpha\":" + format_number(model.config.alpha);
    out += ",\"beta\":" + format_number(model.config.beta);
    out += ",\"n_iter\":" + std::to_string(model.config.n_iter);
    out += ",\"burn_in\":" + std::to_string(model.config.burn_in);
    out += ",\"seed\":" + std::to_string(model.config.seed);
    out += ",\"vocab_hash\":" + nlohmann::json(model.vocab_hash).dump();
    out += ",\"terms\":" + nlohmann::json(model.terms).dump();
    out += ",\"doc_ids\":" + nlohmann::json(model.doc_ids).dump();
    out += ",\"phi\":" + json_matrix(model.phi);
    out += ",\"theta\":" + json_matrix(model.theta);
    out += "}\n";
    return out;
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, std::size_t cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != cols) throw Error("matrix row has wrong length");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace

LdaModel lda_model_from_json(std::string_view json) {
    LdaModel model;
    try {
        const auto j = nlohmann::json::parse(json);
        model.k = j.at("k").get<std::size_t>();
        model.config.alpha = j.at("alpha").get<double>();
        model.config.beta = j.at("beta").get<double>();
        model.config.n_iter = j.value("n_iter", std::size_t{500});
        model.config.burn_in = j.value("burn_in", std::size_t{250});
        model.config.seed = j.value("seed", std::uint64_t{0});
        model.vocab_hash = j.at("vocab_hash").get<std::string>();
        model.terms = j.at("terms").get<std::vector<std::string>>();
        model.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
        model.phi = matrix_from_json(j.at("phi"), model.terms.size());
        model.theta = matrix_from_json(j.at("theta"), model.k);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed LDA model JSON: ") + e.what());
    }
    if (static_cast<std::size_t>(model.phi.rows()) != model.k) throw Error("phi row count does not match k");
    if (static_cast<std::size_t>(model.theta.rows()) != model.doc_ids.size()) {
        throw Error("theta row count does not match doc_ids");
    }
    return model;
}

}  // namespace teamcomm
