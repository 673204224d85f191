#include "teamcomm/config.hpp"

#include <algorithm>
#include <initializer_list>

#include <nlohmann/json.hpp>

#include "teamcomm/error.hpp"
#include "teamcomm/io.hpp"
#include "teamcomm/rng.hpp"

namespace teamcomm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& dst) {
    if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

void expect_keys(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw Error("config section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
            throw Error("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
        }
    }
}

fs::path resolve(const json& j, const char* key, const fs::path& base) {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    fs::path p = j.at(key).get<std::string>();
    return p.is_relative() ? base / p : p;
}

std::string filtered_stopword(const std::string& w, const PreprocessConfig& cfg) {
    PreprocessConfig bare = cfg;
    bare.stopword_list.clear();
    const auto toks = normalize_tokens(w, bare);
    return toks.size() == 1 ? toks.front() : std::string{};
}

void parse_preprocess(const json& j, PreprocessConfig& cfg) {
    expect_keys(j, "preprocess", {"strip_punctuation", "strip_numbers", "lowercase", "min_term_corpus_count", "admin_markers", "boundary_markers", "stopwords", "extra_stopwords"});
    read(j, "strip_punctuation", cfg.strip_punctuation);
    read(j, "strip_numbers", cfg.strip_numbers);
    read(j, "lowercase", cfg.lowercase);
    read(j, "min_term_corpus_count", cfg.min_term_corpus_count);
    read(j, "admin_markers", cfg.admin_markers);
    read(j, "boundary_markers", cfg.boundary_markers);
    std::set<std::string> raw = cfg.stopword_list;
    if (j.contains("stopwords")) {
        const auto& s = j.at("stopwords");
        if (s.is_string() && s.get<std::string>() == "default") raw = default_stopwords();
        else if (s.is_string() && s.get<std::string>() == "none") raw.clear();
        else raw = s.get<std::set<std::string>>();
    }
    if (j.contains("extra_stopwords")) {
        for (const auto& w : j.at("extra_stopwords").get<std::vector<std::string>>()) raw.insert(w);
    }
    // Stopwords go through the same character filter as the text they match.
    cfg.stopword_list.clear();
    for (const auto& w : raw) {
        auto f = filtered_stopword(w, cfg);
        if (!f.empty()) cfg.stopword_list.insert(std::move(f));
    }
}

void parse_ted(const json& j, PipelineConfig& cfg) {
    expect_keys(j, "ted", {"whitelist_kinds", "variables"});
    read(j, "whitelist_kinds", cfg.ted_whitelist_kinds);
    if (j.contains("variables")) {
        cfg.ted_schema.clear();
        for (const auto& [name, spec] : j.at("variables").items()) {
            TedVariableSpec v;
            v.direction = parse_direction(spec.value("direction", std::string("higher_is_better")));
            if (spec.contains("kind") && !spec.at("kind").is_null()) v.kind = spec.at("kind").get<std::string>();
            cfg.ted_schema[name] = v;
        }
    }
}

void parse_synth(const json& j, PipelineConfig& cfg) {
    expect_keys(j, "synth", {"corpus", "teams"});
    if (j.contains("corpus")) {
        const auto& c = j.at("corpus");
        expect_keys(c, "synth.corpus", {"true_k", "vocab_size", "n_docs", "doc_length", "alpha", "topic_support", "topic_beta", "duplicate_docs"});
        auto& s = cfg.synth_corpus;
        read(c, "true_k", s.true_k);
        read(c, "vocab_size", s.vocab_size);
        read(c, "n_docs", s.n_docs);
        if (c.contains("doc_length")) {
            const auto& len = c.at("doc_length");
            if (len.is_array()) {
                s.doc_length_min = len.at(0).get<std::size_t>();
                s.doc_length_max = len.at(1).get<std::size_t>();
            } else {
                s.doc_length_min = s.doc_length_max = len.get<std::size_t>();
            }
        }
        read(c, "alpha", s.alpha);
        if (c.contains("topic_support")) {
            const auto support = c.at("topic_support").get<std::string>();
            if (support == "disjoint") s.topic_support = TopicSupport::disjoint;
            else if (support == "dirichlet") s.topic_support = TopicSupport::dirichlet;
            else throw Error("synth topic_support must be 'disjoint' or 'dirichlet'");
        }
        read(c, "topic_beta", s.topic_beta);
        read(c, "duplicate_docs", s.duplicate_docs);
    }
    if (j.contains("teams")) {
        const auto& t = j.at("teams");
        expect_keys(t, "synth.teams", {"n_teams", "beard_effects", "score_intercept", "low_cluster_logit", "ted_trend", "noise_sd", "ted_noise_sd", "ted_samples", "topic_score_effects"});
        auto& s = cfg.synth_teams;
        read(t, "n_teams", s.n_teams);
        read(t, "beard_effects", s.beard_effects);
        read(t, "score_intercept", s.score_intercept);
        read(t, "low_cluster_logit", s.low_cluster_logit);
        read(t, "ted_trend", s.ted_trend);
        read(t, "noise_sd", s.noise_sd);
        read(t, "ted_noise_sd", s.ted_noise_sd);
        read(t, "ted_samples", s.ted_samples);
        read(t, "topic_score_effects", cfg.synth_topic_score_effects);
    }
    if (!(j.contains("teams") && j.at("teams").contains("n_teams"))) {
        cfg.synth_teams.n_teams = (cfg.synth_corpus.n_docs + cfg.synth_corpus.duplicate_docs + 1) / 2;
    }
}

}  // namespace

TedSchema PipelineConfig::default_ted_schema() {
    TedSchema schema;
    schema["process-effort-agg"] = {Direction::higher_is_better, "aggregate"};
    schema["process-skill-use-agg"] = {Direction::higher_is_better, "aggregate"};
    schema["comms-total-words"] = {Direction::higher_is_better, "communication"};
    schema["inaction-time"] = {Direction::lower_is_better, "time_measure"};
    schema["process-effort-s"] = {Direction::higher_is_better, "per_role"};
    return schema;
}

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig cfg;
    auto& teams = cfg.synth_teams;
    teams.ted_schema = cfg.ted_schema;
    teams.n_teams = cfg.synth_corpus.n_docs / 2;
    teams.beard_effects = {{"anger", -50.0}, {"social_perceptiveness", 40.0}, {"transporting_skill", -30.0}};
    teams.low_cluster_logit = {{kIntercept, -0.5},
                               {"social_perceptiveness", -1.0},
                               {"spatial_ability", 1.0},
                               {"gaming_skill", 1.0}};
    teams.ted_trend = {{"process-effort-agg", 0.5},
                       {"process-skill-use-agg", -0.1},
                       {"comms-total-words", 0.3},
                       {"inaction-time", -0.2},
                       {"process-effort-s", 0.4}};
    teams.noise_sd = 10.0;
    teams.ted_noise_sd = 0.05;
    return cfg;
}

void PipelineConfig::validate() const {
    preprocess.validate();
    lda.validate();
    if (top_m < 2) throw Error("top_m must be >= 2");
    if (sweep_k_min < 2 || sweep_k_min > sweep_k_max) throw Error("sweep requires 2 <= k_min <= k_max");
    if (sweep_runs < 1) throw Error("sweep runs must be >= 1");
    if (cluster_k_max < 1 || gap_b_refs < 1 || cluster_restarts < 1) throw Error("cluster settings must be >= 1");
    if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw Error("alpha_level must lie in (0, 1)");
    if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) throw Error("gate_threshold must lie in (0, 1)");
    if (fold_in.n_iter < 1 || fold_in.burn_in >= fold_in.n_iter) throw Error("fold-in requires burn_in < n_iter");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (!(checkpoints[i] > 0.0 && checkpoints[i] <= 1.0)) throw Error("checkpoints must lie in (0, 1]");
        if (i > 0 && !(checkpoints[i] > checkpoints[i - 1])) throw Error("checkpoints must be increasing");
    }
    for (std::size_t i = 0; i < early_fractions.size(); ++i) {
        if (!(early_fractions[i] > 0.0 && early_fractions[i] <= 1.0)) throw Error("early fractions must lie in (0, 1]");
        if (i > 0 && !(early_fractions[i] > early_fractions[i - 1])) throw Error("early fractions must be increasing");
    }
    for (const auto& name : ted_selected) {
        if (!ted_schema.count(name)) throw Error("selected TED variable '" + name + "' is not in the schema");
    }
}

fs::path PipelineConfig::corpus_path() const { return corpus_dir.empty() ? output_dir / "corpus" : corpus_dir; }
fs::path PipelineConfig::beard_path() const { return beard_csv.empty() ? output_dir / "beard.csv" : beard_csv; }
fs::path PipelineConfig::ted_path() const { return ted_csv.empty() ? output_dir / "ted.csv" : ted_csv; }
fs::path PipelineConfig::scores_path() const { return scores_csv.empty() ? output_dir / "scores.csv" : scores_csv; }

std::set<std::string> PipelineConfig::selected_ted() const {
    if (!ted_selected.empty()) return ted_selected;
    return filter_ted_variables(ted_schema, ted_whitelist_kinds);
}

PolicyConfig PipelineConfig::policy() const {
    PolicyConfig p;
    p.checkpoints = checkpoints;
    p.gate_threshold = gate_threshold;
    p.ted_selected = selected_ted();
    p.ted_epsilon = ted_epsilon;
    p.ted_baseline = ted_baseline;
    p.seed = stage_seed("pipeline");
    p.preprocess = preprocess;
    p.fold_in = fold_in;
    return p;
}

std::uint64_t PipelineConfig::stage_seed(std::string_view stage) const {
    return mix_seed(seed, hash_string(stage));
}

PipelineConfig parse_pipeline_config(std::string_view text, const fs::path& base_dir) {
    PipelineConfig cfg = PipelineConfig::defaults();
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw Error("config must be a JSON object");
        expect_keys(j, "", {"seed", "paths", "preprocess", "lda", "sweep", "cluster", "regression", "early", "policy", "ted", "beard", "synth"});
        read(j, "seed", cfg.seed);
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            expect_keys(p, "paths", {"corpus_dir", "beard_csv", "ted_csv", "scores_csv", "output_dir"});
            cfg.corpus_dir = resolve(p, "corpus_dir", base_dir);
            cfg.beard_csv = resolve(p, "beard_csv", base_dir);
            cfg.ted_csv = resolve(p, "ted_csv", base_dir);
            cfg.scores_csv = resolve(p, "scores_csv", base_dir);
            if (auto out = resolve(p, "output_dir", base_dir); !out.empty()) cfg.output_dir = out;
        }
        if (j.contains("preprocess")) parse_preprocess(j.at("preprocess"), cfg.preprocess);
        if (j.contains("lda")) {
            const auto& l = j.at("lda");
            expect_keys(l, "lda", {"alpha", "beta", "n_iter", "burn_in", "top_m"});
            read(l, "alpha", cfg.lda.alpha);
            read(l, "beta", cfg.lda.beta);
            read(l, "n_iter", cfg.lda.n_iter);
            read(l, "burn_in", cfg.lda.burn_in);
            read(l, "top_m", cfg.top_m);
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            expect_keys(s, "sweep", {"k_min", "k_max", "runs_per_k", "run_selection"});
            read(s, "k_min", cfg.sweep_k_min);
            read(s, "k_max", cfg.sweep_k_max);
            read(s, "runs_per_k", cfg.sweep_runs);
            if (s.contains("run_selection")) cfg.run_selection = parse_run_selection(s.at("run_selection").get<std::string>());
        }
        if (j.contains("cluster")) {
            const auto& c = j.at("cluster");
            expect_keys(c, "cluster", {"k_max", "b_refs", "restarts", "max_iter"});
            read(c, "k_max", cfg.cluster_k_max);
            read(c, "b_refs", cfg.gap_b_refs);
            read(c, "restarts", cfg.cluster_restarts);
            read(c, "max_iter", cfg.cluster_max_iter);
        }
        if (j.contains("regression")) {
            const auto& r = j.at("regression");
            expect_keys(r, "regression", {"alpha_level", "baseline_cluster"});
            read(r, "alpha_level", cfg.alpha_level);
            if (r.contains("baseline_cluster") && !r.at("baseline_cluster").is_null()) {
                cfg.baseline_cluster = r.at("baseline_cluster").get<int>();
            }
        }
        if (j.contains("early")) {
            const auto& e = j.at("early");
            expect_keys(e, "early", {"fractions", "fold_in_iter", "fold_in_burn_in"});
            read(e, "fractions", cfg.early_fractions);
            read(e, "fold_in_iter", cfg.fold_in.n_iter);
            read(e, "fold_in_burn_in", cfg.fold_in.burn_in);
        }
        if (j.contains("policy")) {
            const auto& p = j.at("policy");
            expect_keys(p, "policy", {"checkpoints", "gate_threshold", "ted_epsilon", "ted_selected", "ted_baseline"});
            read(p, "checkpoints", cfg.checkpoints);
            read(p, "gate_threshold", cfg.gate_threshold);
            read(p, "ted_epsilon", cfg.ted_epsilon);
            read(p, "ted_selected", cfg.ted_selected);
            if (p.contains("ted_baseline")) cfg.ted_baseline = parse_ted_baseline(p.at("ted_baseline").get<std::string>());
        }
        if (j.contains("ted")) parse_ted(j.at("ted"), cfg);
        if (j.contains("beard")) expect_keys(j.at("beard"), "beard", {"names"});
        if (j.contains("beard") && j.at("beard").contains("names")) {
            cfg.synth_teams.beard_names = j.at("beard").at("names").get<std::vector<std::string>>();
        }
        if (j.contains("synth")) parse_synth(j.at("synth"), cfg);
    } catch (const json::exception& e) {
        throw Error(std::string("invalid config: ") + e.what());
    }
    cfg.synth_teams.ted_schema = cfg.ted_schema;
    for (auto it = cfg.synth_teams.ted_trend.begin(); it != cfg.synth_teams.ted_trend.end();) {
        it = cfg.ted_schema.count(it->first) ? std::next(it) : cfg.synth_teams.ted_trend.erase(it);
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    return parse_pipeline_config(read_file(path), path.parent_path());
}

std::vector<TrialTranscript> load_corpus_dir(const fs::path& dir, const PreprocessConfig& cfg) {
    if (!fs::is_directory(dir)) throw Error("corpus directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TrialTranscript> trials;
    for (const auto& file : files) {
        SessionTranscript session;
        try {
            session = parse_session_transcript(read_file(file), cfg);
        } catch (const ParseError& e) {
            throw Error(file.filename().string() + ": " + e.what());
        }
        if (session.session_id.empty()) session.session_id = file.stem().string();
        auto split = split_into_trials(session, cfg.boundary_markers, cfg);
        trials.insert(trials.end(), std::make_move_iterator(split.begin()), std::make_move_iterator(split.end()));
    }
    return trials;
}

}  // namespace teamcomm
