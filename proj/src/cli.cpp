#include "teamcomm/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "teamcomm/clustering.hpp"
#include "teamcomm/config.hpp"
#include "teamcomm/corpus.hpp"
#include "teamcomm/earlypred.hpp"
#include "teamcomm/error.hpp"
#include "teamcomm/intervention.hpp"
#include "teamcomm/io.hpp"
#include "teamcomm/parallel.hpp"
#include "teamcomm/stats.hpp"
#include "teamcomm/synth.hpp"
#include "teamcomm/topics.hpp"

namespace teamcomm {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 0;
    std::string out_dir;

    std::optional<std::size_t> k;
    std::optional<std::size_t> k_min;
    std::optional<std::size_t> k_max;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> b_refs;
    std::string run_selection;
    std::string trial;
    std::string ted_baseline;
};

struct Context {
    PipelineConfig cfg;
    unsigned jobs = 1;
    std::ostream& out;

    fs::path path(const std::string& name) const { return cfg.output_dir / name; }

    void write(const std::string& name, std::string_view content) const {
        write_file(path(name), content);
        out << "wrote " << path(name).string() << "\n";
    }
};

Context make_context(const Options& opts, std::ostream& out) {
    Context ctx{opts.config_path.empty() ? parse_pipeline_config("{}", fs::current_path())
                                         : load_pipeline_config(opts.config_path),
                1, out};
    if (opts.seed) ctx.cfg.seed = *opts.seed;
    if (!opts.out_dir.empty()) ctx.cfg.output_dir = opts.out_dir;
    ctx.cfg.lda.seed = ctx.cfg.seed;
    if (!opts.ted_baseline.empty()) ctx.cfg.ted_baseline = parse_ted_baseline(opts.ted_baseline);
    if (!opts.run_selection.empty()) ctx.cfg.run_selection = parse_run_selection(opts.run_selection);
    ctx.jobs = opts.jobs == 0 ? default_jobs() : opts.jobs;
    return ctx;
}

std::vector<TrialTranscript> load_trials(const Context& ctx) {
    return deduplicate_trials(load_corpus_dir(ctx.cfg.corpus_path(), ctx.cfg.preprocess), ctx.cfg.preprocess);
}

struct TrialMeta {
    std::map<std::string, std::string> team;
    std::map<std::string, TrialIndex> index;
};

TrialMeta load_trial_meta(const Context& ctx) {
    const CsvTable table = parse_csv(read_file(ctx.path("trials.csv")));
    const auto id = table.column("trial_id");
    const auto team = table.column("team_id");
    const auto idx = table.column("trial_index");
    TrialMeta meta;
    for (const auto& row : table.rows) {
        meta.team[row[id]] = row[team];
        meta.index[row[id]] = parse_trial_index(row[idx]);
    }
    return meta;
}

std::string lines_csv(const std::vector<std::vector<std::string>>& terms) {
    std::string out = "topic,rank,term\n";
    for (std::size_t t = 0; t < terms.size(); ++t) {
        for (std::size_t r = 0; r < terms[t].size(); ++r) {
            out += std::to_string(t) + "," + std::to_string(r + 1) + "," + terms[t][r] + "\n";
        }
    }
    return out;
}

Eigen::MatrixXd theta_for(const LdaModel& model) { return model.theta; }

// --- stages ---------------------------------------------------------------

void cmd_preprocess(const Context& ctx) {
    const auto& pp = ctx.cfg.preprocess;
    const auto all = load_corpus_dir(ctx.cfg.corpus_path(), pp);
    const auto trials = deduplicate_trials(all, pp);
    const Vocabulary vocab = build_vocabulary(trials, pp);
    const DocTermMatrix dtm = build_dtm(trials, vocab, pp);
    ctx.write("dtm.json", dtm_to_json(dtm));

    std::string csv = "trial_id,team_id,trial_index,n_utterances,n_tokens\n";
    for (const auto& t : trials) {
        csv += t.trial_id + "," + t.team_id + "," + std::string(to_string(t.trial_index)) + "," +
               std::to_string(t.utterances.size()) + "," + std::to_string(t.total_tokens()) + "\n";
    }
    ctx.write("trials.csv", csv);
    ctx.out << "trials: " << all.size() << " parsed, " << trials.size() << " unique; vocabulary " << vocab.size()
            << " terms\n";
}

void cmd_topics_select(const Context& ctx, const Options& opts) {
    const DocTermMatrix dtm = dtm_from_json(read_file(ctx.path("dtm.json")));
    const std::size_t k_min = opts.k_min.value_or(ctx.cfg.sweep_k_min);
    const std::size_t k_max = opts.k_max.value_or(ctx.cfg.sweep_k_max);
    const std::size_t runs = opts.runs.value_or(ctx.cfg.sweep_runs);
    const TopicCountReport report = select_topic_count(dtm, k_min, k_max, runs, ctx.cfg.lda, ctx.cfg.top_m, ctx.jobs);

    std::string json = "{\"selected_k\":" + std::to_string(report.selected_k) +
                       ",\"top_m\":" + std::to_string(report.top_m) + ",\"run_seeds\":" +
                       nlohmann::json(report.run_seeds).dump() + ",\"candidates\":{";
    std::string csv = "k,run,seed,mean_coherence\n";
    bool first = true;
    for (const auto& [k, runs_k] : report.candidates) {
        json += std::string(first ? "" : ",") + "\"" + std::to_string(k) + "\":[";
        for (std::size_t i = 0; i < runs_k.size(); ++i) {
            json += (i ? "," : "") + format_number(runs_k[i]);
            csv += std::to_string(k) + "," + std::to_string(i) + "," + std::to_string(report.run_seeds[i]) + "," +
                   format_number(runs_k[i]) + "\n";
        }
        json += "]";
        first = false;
    }
    json += "},\"average\":{";
    first = true;
    for (const auto& [k, runs_k] : report.candidates) {
        json += std::string(first ? "" : ",") + "\"" + std::to_string(k) + "\":" + format_number(report.average(k));
        first = false;
    }
    json += "}}\n";
    ctx.write("topic_count.json", json);
    ctx.write("topic_count.csv", csv);
    ctx.out << "selected topic count: " << report.selected_k << "\n";
}

TopicCountReport read_topic_count(const Context& ctx) {
    const auto j = nlohmann::json::parse(read_file(ctx.path("topic_count.json")));
    TopicCountReport report;
    report.selected_k = j.at("selected_k").get<std::size_t>();
    report.top_m = j.at("top_m").get<std::size_t>();
    report.run_seeds = j.at("run_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& [k, runs] : j.at("candidates").items()) {
        report.candidates[std::stoul(k)] = runs.get<std::vector<double>>();
    }
    return report;
}

void cmd_topics_fit(const Context& ctx, const Options& opts) {
    const DocTermMatrix dtm = dtm_from_json(read_file(ctx.path("dtm.json")));
    LdaConfig lda = ctx.cfg.lda;
    std::size_t k = 0;
    if (opts.k) {
        k = *opts.k;
    } else if (fs::exists(ctx.path("topic_count.json"))) {
        const TopicCountReport report = read_topic_count(ctx);
        k = report.selected_k;
        lda.seed = report.run_seeds.at(pick_run(report, k, ctx.cfg.run_selection));
    } else {
        throw Error("topics fit needs --k or a topic_count.json from 'topics select-k'");
    }
    const LdaModel model = fit_lda(dtm, k, lda);
    ctx.write("lda_model.json", lda_model_to_json(model));
    ctx.write("top_terms.csv", lines_csv(top_terms(model, std::min(ctx.cfg.top_m, model.vocab_size()))));

    const CoherenceReport coh = coherence_report(model, DocOccurrence(dtm), std::min(ctx.cfg.top_m, model.vocab_size()));
    std::string json = "{\"k\":" + std::to_string(coh.k) + ",\"top_m\":" + std::to_string(coh.top_m) +
                       ",\"mean\":" + format_number(coh.mean) + ",\"per_topic\":[";
    for (std::size_t i = 0; i < coh.per_topic.size(); ++i) json += (i ? "," : "") + format_number(coh.per_topic[i]);
    json += "]}\n";
    ctx.write("coherence.json", json);
}

void cmd_cluster_gap(const Context& ctx, const Options& opts) {
    const LdaModel model = lda_model_from_json(read_file(ctx.path("lda_model.json")));
    GapOptions g;
    g.k_max = opts.k_max.value_or(ctx.cfg.cluster_k_max);
    g.b_refs = opts.b_refs.value_or(ctx.cfg.gap_b_refs);
    g.restarts = ctx.cfg.cluster_restarts;
    g.max_iter = ctx.cfg.cluster_max_iter;
    g.seed = ctx.cfg.stage_seed("gap");
    g.jobs = ctx.jobs;
    const GapReport report = gap_statistic(theta_for(model), g);
    ctx.write("gap.json", gap_report_to_json(report));
    std::string csv = "k,log_w,gap,sk\n";
    for (const auto& e : report.per_k) {
        csv += std::to_string(e.k) + "," + format_number(e.log_w) + "," + format_number(e.gap) + "," +
               format_number(e.sk) + "\n";
    }
    ctx.write("gap.csv", csv);
    ctx.out << "selected cluster count: " << report.selected_k << "\n";
}

void cmd_cluster_fit(const Context& ctx, const Options& opts) {
    const LdaModel model = lda_model_from_json(read_file(ctx.path("lda_model.json")));
    std::size_t k = 0;
    if (opts.k) k = *opts.k;
    else if (fs::exists(ctx.path("gap.json"))) k = gap_report_from_json(read_file(ctx.path("gap.json"))).selected_k;
    else throw Error("cluster fit needs --k or a gap.json from 'cluster gap'");
    KmeansOptions km{ctx.cfg.cluster_restarts, ctx.cfg.cluster_max_iter, ctx.cfg.stage_seed("kmeans"), ctx.jobs};
    const ClusterModel clusters = kmeans_fit(theta_for(model), k, km, model.doc_ids);
    ctx.write("clusters.json", cluster_model_to_json(clusters));
}

void cmd_compose(const Context& ctx) {
    const ClusterModel clusters = cluster_model_from_json(read_file(ctx.path("clusters.json")));
    const TrialMeta meta = load_trial_meta(ctx);
    ctx.write("composition.csv", composition_to_csv(trial_composition(clusters, meta.index)));
}

void write_regression(const Context& ctx, const std::string& stem, const RegressionResult& r) {
    ctx.write(stem + ".json", regression_to_json(r));
    ctx.write(stem + ".csv", regression_to_csv(r));
}

void cmd_regress_beard(const Context& ctx) {
    const auto profiles = parse_beard_csv(read_file(ctx.cfg.beard_path()));
    const auto scores = parse_scores_csv(read_file(ctx.cfg.scores_path()));
    const TrialMeta meta = load_trial_meta(ctx);
    write_regression(ctx, "regress_beard", beard_score_regression(profiles, meta.team, scores));
}

void cmd_regress_ted(const Context& ctx) {
    const auto series = parse_ted_csv(read_file(ctx.cfg.ted_path()), ctx.cfg.ted_schema);
    const auto scores = parse_scores_csv(read_file(ctx.cfg.scores_path()));
    write_regression(ctx, "regress_ted", ted_score_regression(series, ctx.cfg.selected_ted(), scores));
}

void cmd_regress_cluster(const Context& ctx) {
    const ClusterModel clusters = cluster_model_from_json(read_file(ctx.path("clusters.json")));
    const auto scores = parse_scores_csv(read_file(ctx.cfg.scores_path()));
    write_regression(ctx, "regress_cluster_score",
                     cluster_score_regression(clusters.assignments(), scores, ctx.cfg.baseline_cluster));
}

void cmd_gate_fit(const Context& ctx) {
    const ClusterModel clusters = cluster_model_from_json(read_file(ctx.path("clusters.json")));
    const RegressionResult reg = regression_from_json(read_file(ctx.path("regress_cluster_score.json")));
    const PerformanceProfile profile = derive_performance_profile(reg, ctx.cfg.alpha_level);
    const auto profiles = parse_beard_csv(read_file(ctx.cfg.beard_path()));
    const TrialMeta meta = load_trial_meta(ctx);

    nlohmann::ordered_json pj;
    pj["alpha_level"] = ctx.cfg.alpha_level;
    pj["low_clusters"] = profile.low_clusters;
    ctx.write("performance_profile.json", pj.dump() + "\n");

    RegressionResult gate;
    const auto assignments = clusters.assignments();
    std::size_t members = 0;
    for (const auto& [id, c] : assignments) members += profile.low_clusters.count(c);
    if (members == 0 || members == assignments.size()) {
        // Without both classes there is nothing to fit; a zero model never triggers on its own.
        gate.model_kind = ModelKind::logistic;
        gate.n = assignments.size();
        gate.terms.push_back({kIntercept, 0.0, 0.0, 1.0});
        for (const auto& [name, v] : profiles.at(0).variables) gate.terms.push_back({name, 0.0, 0.0, 1.0});
        gate.converged = false;
        gate.warnings.push_back(members == 0 ? "no low-performing clusters" : "every trial is in a low-performing cluster");
    } else {
        gate = fit_membership_gate(profiles, meta.team, assignments, profile.low_clusters);
    }
    ctx.write("gate_model.json", regression_to_json(gate));
}

void cmd_early_eval(const Context& ctx) {
    const LdaModel lda = lda_model_from_json(read_file(ctx.path("lda_model.json")));
    const ClusterModel clusters = cluster_model_from_json(read_file(ctx.path("clusters.json")));
    const auto trials = load_trials(ctx);
    const EarlyPredictor predictor(lda, clusters, ctx.cfg.preprocess, ctx.cfg.fold_in);
    const AccuracyCurve curve =
        early_accuracy_curve(predictor, trials, ctx.cfg.early_fractions, ctx.cfg.stage_seed("early"), ctx.jobs);
    ctx.write("early_curve.csv", accuracy_curve_to_csv(curve));
    ctx.write("early_curve.json", accuracy_curve_to_json(curve));
}

PerformanceProfile read_profile(const Context& ctx) {
    const RegressionResult reg = regression_from_json(read_file(ctx.path("regress_cluster_score.json")));
    PerformanceProfile profile;
    profile.source = reg;
    const auto j = nlohmann::json::parse(read_file(ctx.path("performance_profile.json")));
    profile.low_clusters = j.at("low_clusters").get<std::set<int>>();
    return profile;
}

void cmd_pipeline_run(const Context& ctx, const Options& opts) {
    const LdaModel lda = lda_model_from_json(read_file(ctx.path("lda_model.json")));
    const ClusterModel clusters = cluster_model_from_json(read_file(ctx.path("clusters.json")));
    const PerformanceProfile profile = read_profile(ctx);
    const RegressionResult gate = regression_from_json(read_file(ctx.path("gate_model.json")));
    const auto profiles = parse_beard_csv(read_file(ctx.cfg.beard_path()));
    const auto ted = parse_ted_csv(read_file(ctx.cfg.ted_path()), ctx.cfg.ted_schema);
    const PolicyConfig policy = ctx.cfg.policy();

    std::map<std::string, const BeardProfile*> by_team;
    for (const auto& p : profiles) by_team[p.team_id] = &p;

    std::vector<TrialTranscript> trials;
    for (auto& t : load_trials(ctx)) {
        if (opts.trial.empty() || t.trial_id == opts.trial) trials.push_back(std::move(t));
    }
    if (trials.empty()) throw Error(opts.trial.empty() ? "no trials to run" : "trial '" + opts.trial + "' not found");
    std::sort(trials.begin(), trials.end(),
              [](const TrialTranscript& a, const TrialTranscript& b) { return a.trial_id < b.trial_id; });

    std::vector<std::string> lines(trials.size());
    std::vector<std::string> summary(trials.size());
    parallel_for(trials.size(), ctx.jobs, [&](std::size_t i) {
        const auto& trial = trials[i];
        const auto beard = by_team.find(trial.team_id);
        const auto series = ted.find(trial.trial_id);
        if (beard == by_team.end()) throw Error("no BEARD profile for team '" + trial.team_id + "'");
        if (series == ted.end()) throw Error("no TED series for trial '" + trial.trial_id + "'");
        const InterventionLog log =
            run_intervention_pipeline(trial, lda, clusters, profile, *beard->second, gate, series->second, policy);
        lines[i] = intervention_log_to_jsonl(log);
        summary[i] = trial.trial_id + "," + std::to_string(log.total_interventions) + "\n";
    });

    std::string jsonl;
    std::string csv = "trial_id,total_interventions\n";
    for (std::size_t i = 0; i < trials.size(); ++i) {
        jsonl += lines[i];
        csv += summary[i];
    }
    ctx.write("interventions.jsonl", jsonl);
    ctx.write("interventions.csv", csv);
}

void cmd_synth_corpus(const Context& ctx) {
    SynthCorpusSpec spec = ctx.cfg.synth_corpus;
    spec.seed = ctx.cfg.stage_seed("synth-corpus");
    const SynthCorpus corpus = generate_lda_corpus(spec);
    for (const auto& [session, text] : render_sessions(corpus.trials)) {
        write_file(ctx.cfg.corpus_path() / (session + ".txt"), text);
    }
    ctx.out << "wrote " << corpus.trials.size() << " trials to " << ctx.cfg.corpus_path().string() << "\n";

    nlohmann::json dominant = nlohmann::json::object();
    for (std::size_t d = 0; d < corpus.dominant_topic.size(); ++d) {
        dominant[corpus.trials[d].trial_id] = corpus.dominant_topic[d];
    }
    for (std::size_t j = 0; j < corpus.duplicate_of.size(); ++j) {
        dominant[corpus.trials[spec.n_docs + j].trial_id] = corpus.dominant_topic[corpus.duplicate_of[j]];
    }
    std::string json = "{\"true_k\":" + std::to_string(spec.true_k) + ",\"terms\":" +
                       nlohmann::json(corpus.terms).dump() + ",\"dominant_topic\":" + dominant.dump() +
                       ",\"true_phi\":" + json_matrix(corpus.true_phi) + ",\"true_theta\":" +
                       json_matrix(corpus.true_theta) + "}\n";
    ctx.write("synth_truth.json", json);
}

void cmd_synth_teams(const Context& ctx) {
    SynthTeamSpec spec = ctx.cfg.synth_teams;
    spec.seed = ctx.cfg.stage_seed("synth-teams");
    if (fs::exists(ctx.path("synth_truth.json"))) {
        const auto truth = nlohmann::json::parse(read_file(ctx.path("synth_truth.json")));
        const auto& effects = ctx.cfg.synth_topic_score_effects;
        for (const auto& [trial, topic] : truth.at("dominant_topic").items()) {
            const auto t = topic.get<std::size_t>();
            if (t < effects.size()) spec.score_offsets[trial] = effects[t];
        }
    }
    const SynthTeams teams = generate_team_records(spec);
    write_file(ctx.cfg.beard_path(), beard_to_csv(teams.profiles));
    write_file(ctx.cfg.ted_path(), ted_to_csv(teams.ted));
    write_file(ctx.cfg.scores_path(), scores_to_csv(teams.scores));
    ctx.out << "wrote " << ctx.cfg.beard_path().string() << ", " << ctx.cfg.ted_path().string() << ", "
            << ctx.cfg.scores_path().string() << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Team communication analytics: topics, clusters, regressions and intervention policy", "teamcomm"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opts;
    app.add_option("--config", opts.config_path, "Pipeline config JSON");
    app.add_option("--seed", opts.seed, "Global seed (overrides config)");
    app.add_option("--jobs", opts.jobs, "Parallel width (0 = hardware threads)");
    app.add_option("--out", opts.out_dir, "Output directory (overrides config)");

    std::function<void(const Context&)> action;
    auto bind = [&](CLI::App* sub, std::function<void(const Context&)> fn) {
        sub->callback([&action, fn] { action = fn; });
    };

    bind(app.add_subcommand("preprocess", "Parse transcripts and build the document-term matrix"), cmd_preprocess);

    auto* topics = app.add_subcommand("topics", "LDA topic models");
    topics->require_subcommand(1);
    auto* select = topics->add_subcommand("select-k", "Sweep topic counts by mean coherence");
    select->add_option("--k-min", opts.k_min);
    select->add_option("--k-max", opts.k_max);
    select->add_option("--runs", opts.runs, "Runs per topic count");
    bind(select, [&](const Context& c) { cmd_topics_select(c, opts); });
    auto* fit = topics->add_subcommand("fit", "Fit the LDA model");
    fit->add_option("--k", opts.k, "Topic count (default: selected by select-k)");
    fit->add_option("--run-selection", opts.run_selection, "best or median run of the sweep")
        ->check(CLI::IsMember({"best", "median"}));
    bind(fit, [&](const Context& c) { cmd_topics_fit(c, opts); });

    auto* cluster = app.add_subcommand("cluster", "k-means over topic distributions");
    cluster->require_subcommand(1);
    auto* gap = cluster->add_subcommand("gap", "Gap statistic over k = 1..k_max");
    gap->add_option("--k-max", opts.k_max);
    gap->add_option("--b-refs", opts.b_refs);
    bind(gap, [&](const Context& c) { cmd_cluster_gap(c, opts); });
    auto* cfit = cluster->add_subcommand("fit", "Fit k-means");
    cfit->add_option("--k", opts.k, "Cluster count (default: selected by gap)");
    bind(cfit, [&](const Context& c) { cmd_cluster_fit(c, opts); });

    bind(app.add_subcommand("compose", "Trial-one vs trial-two composition per cluster"), cmd_compose);

    auto* regress = app.add_subcommand("regress", "Score regressions");
    regress->require_subcommand(1);
    bind(regress->add_subcommand("beard", "Score on BEARD variables"), cmd_regress_beard);
    bind(regress->add_subcommand("ted", "Score on filtered TED variables"), cmd_regress_ted);
    bind(regress->add_subcommand("cluster-score", "Score on cluster dummies"), cmd_regress_cluster);

    auto* gate = app.add_subcommand("gate", "BEARD intervention gate");
    gate->require_subcommand(1);
    bind(gate->add_subcommand("fit", "Logistic low-cluster membership model"), cmd_gate_fit);

    auto* early = app.add_subcommand("early", "Early cluster prediction");
    early->require_subcommand(1);
    bind(early->add_subcommand("eval", "Accuracy by observed transcript fraction"), cmd_early_eval);

    auto* pipeline = app.add_subcommand("pipeline", "Checkpointed intervention policy");
    pipeline->require_subcommand(1);
    auto* run = pipeline->add_subcommand("run", "Run the policy over trials");
    run->add_option("--trial", opts.trial, "Only this trial id");
    run->add_option("--ted-baseline", opts.ted_baseline, "previous or first")
        ->check(CLI::IsMember({"previous", "first"}));
    bind(run, [&](const Context& c) { cmd_pipeline_run(c, opts); });

    auto* synth = app.add_subcommand("synth", "Synthetic data with planted structure");
    synth->require_subcommand(1);
    bind(synth->add_subcommand("corpus", "LDA-generated transcripts"), cmd_synth_corpus);
    bind(synth->add_subcommand("teams", "BEARD, TED and score records"), cmd_synth_teams);

    std::vector<std::string> argv_store{"teamcomm"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        const Context ctx = make_context(opts, out);
        if (action) action(ctx);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON input: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return 2;
}

}  // namespace teamcomm
