#pragma once
// Pipeline configuration: one JSON document with a root "seed" key. Every
// field is optional; missing fields keep the defaults below.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "teamcomm/corpus.hpp"
#include "teamcomm/intervention.hpp"
#include "teamcomm/stats.hpp"
#include "teamcomm/synth.hpp"
#include "teamcomm/topics.hpp"

namespace teamcomm {

struct PipelineConfig {
    std::uint64_t seed = 0;

    // Empty paths resolve inside the output directory (corpus/, beard.csv, ted.csv, scores.csv).
    std::filesystem::path corpus_dir;
    std::filesystem::path beard_csv;
    std::filesystem::path ted_csv;
    std::filesystem::path scores_csv;
    std::filesystem::path output_dir = "out";

    PreprocessConfig preprocess = PreprocessConfig::defaults();
    LdaConfig lda;
    std::size_t top_m = 5;

    std::size_t sweep_k_min = 2;
    std::size_t sweep_k_max = 20;
    std::size_t sweep_runs = 100;
    RunSelection run_selection = RunSelection::best;

    std::size_t cluster_k_max = 10;
    std::size_t gap_b_refs = 20;
    std::size_t cluster_restarts = 25;
    std::size_t cluster_max_iter = 100;

    double alpha_level = 0.05;
    std::optional<int> baseline_cluster;  // nullopt: highest-mean cluster

    std::vector<double> early_fractions{0.1, 1.0 / 3.0, 0.5, 1.0};
    FoldInOptions fold_in{};

    std::vector<double> checkpoints{0.1, 0.3, 0.5, 0.7};
    double gate_threshold = 0.5;
    double ted_epsilon = 0.0;
    TedBaseline ted_baseline = TedBaseline::previous;
    std::set<std::string> ted_selected;  // empty: filter schema by whitelist kinds
    std::set<std::string> ted_whitelist_kinds{"aggregate", "time_measure", "communication"};
    TedSchema ted_schema = default_ted_schema();

    SynthCorpusSpec synth_corpus;
    SynthTeamSpec synth_teams;
    // Score offset by the dominant planted topic of a trial's transcript.
    std::vector<double> synth_topic_score_effects{0.0, -150.0, -80.0};

    static TedSchema default_ted_schema();
    static PipelineConfig defaults();

    void validate() const;

    std::filesystem::path corpus_path() const;
    std::filesystem::path beard_path() const;
    std::filesystem::path ted_path() const;
    std::filesystem::path scores_path() const;

    // Selected TED measures: explicit list, or the whitelist filter of the schema.
    std::set<std::string> selected_ted() const;
    PolicyConfig policy() const;

    // Stage seeds, derived from the global seed.
    std::uint64_t stage_seed(std::string_view stage) const;
};

// Relative paths inside the document resolve against `base_dir`.
PipelineConfig parse_pipeline_config(std::string_view json, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Parses every *.txt session file in `dir` (sorted by name; session id
// defaults to the file stem) and splits sessions into trials.
std::vector<TrialTranscript> load_corpus_dir(const std::filesystem::path& dir, const PreprocessConfig& cfg);

}  // namespace teamcomm
