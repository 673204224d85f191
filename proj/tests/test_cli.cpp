#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "teamcomm/cli.hpp"
#include "test_util.hpp"

using namespace teamcomm;
namespace fs = std::filesystem;

namespace {

struct Result {
    int rc;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int rc = run_command(args, out, err);
    return {rc, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

// Small synthetic world with three well-separated topics.
fs::path world(const std::string& name) {
    const auto dir = testutil::scratch_dir(name);
    spit(dir / "config.json", R"({"seed": 5,
        "synth": {"corpus": {"n_docs": 60, "vocab_size": 45, "doc_length": 80}},
        "lda": {"n_iter": 200, "burn_in": 100},
        "sweep": {"k_min": 2, "k_max": 4, "runs_per_k": 3},
        "cluster": {"k_max": 4, "b_refs": 5, "restarts": 5}})");
    return dir;
}

Result stage(const fs::path& dir, std::vector<std::string> args) {
    args.insert(args.end(), {"--config", (dir / "config.json").string(), "--out", (dir / "out").string()});
    return cli(args);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
    CHECK(cli({}).rc == 1);
    CHECK(cli({"frobnicate"}).rc == 1);
    CHECK(cli({"preprocess", "--no-such-flag"}).rc == 1);
    CHECK(cli({"topics"}).rc == 1);
    CHECK(cli({"topics", "fit", "--k", "many"}).rc == 1);
}

TEST_CASE("data errors exit 2 with a message") {
    const auto dir = testutil::scratch_dir("cli_errors");
    auto r = cli({"preprocess", "--config", (dir / "missing.json").string()});
    CHECK(r.rc == 2);
    CHECK(r.err.rfind("error: ", 0) == 0);

    spit(dir / "typo.json", R"({"lda": {"n_iterations": 10}})");
    r = cli({"preprocess", "--config", (dir / "typo.json").string()});
    CHECK(r.rc == 2);
    CHECK(r.err.find("lda.n_iterations") != std::string::npos);

    spit(dir / "nocorpus.json", R"({"paths": {"corpus_dir": "does/not/exist"}})");
    r = cli({"preprocess", "--config", (dir / "nocorpus.json").string(), "--out", (dir / "out").string()});
    CHECK(r.rc == 2);

    // A stage whose inputs were never produced.
    r = cli({"cluster", "fit", "--out", (dir / "empty").string()});
    CHECK(r.rc == 2);
}

TEST_CASE("preprocess is byte-identical on rerun") {
    const auto dir = world("cli_preprocess");
    REQUIRE(stage(dir, {"synth", "corpus"}).rc == 0);
    REQUIRE(stage(dir, {"preprocess"}).rc == 0);
    const auto dtm = slurp(dir / "out" / "dtm.json");
    const auto trials = slurp(dir / "out" / "trials.csv");
    CHECK(trials.rfind("trial_id,team_id,trial_index,n_utterances,n_tokens\n", 0) == 0);
    CHECK(std::count(trials.begin(), trials.end(), '\n') == 61);
    REQUIRE(stage(dir, {"preprocess"}).rc == 0);
    CHECK(slurp(dir / "out" / "dtm.json") == dtm);
    CHECK(slurp(dir / "out" / "trials.csv") == trials);
}

TEST_CASE("topic count selection finds the planted three") {
    const auto dir = world("cli_select");
    REQUIRE(stage(dir, {"synth", "corpus"}).rc == 0);
    REQUIRE(stage(dir, {"preprocess"}).rc == 0);
    REQUIRE(stage(dir, {"topics", "select-k"}).rc == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "out" / "topic_count.json"));
    CHECK(report.at("selected_k").get<int>() == 3);
    // fit without --k picks up the selection
    REQUIRE(stage(dir, {"topics", "fit"}).rc == 0);
    const auto model = nlohmann::json::parse(slurp(dir / "out" / "lda_model.json"));
    CHECK(model.at("k").get<int>() == 3);
}

TEST_CASE("single-trial pipeline run writes one line per checkpoint") {
    const auto dir = world("cli_pipeline");
    const std::vector<std::vector<std::string>> stages{
        {"synth", "corpus"}, {"synth", "teams"}, {"preprocess"},   {"topics", "fit", "--k", "3"},
        {"cluster", "fit", "--k", "3"}, {"regress", "cluster-score"}, {"gate", "fit"}};
    for (const auto& s : stages) REQUIRE_MESSAGE(stage(dir, s).rc == 0, s.front());
    const auto r = stage(dir, {"pipeline", "run", "--trial", "S0001-T1"});
    REQUIRE(r.rc == 0);
    const auto log = slurp(dir / "out" / "interventions.jsonl");
    CHECK(std::count(log.begin(), log.end(), '\n') == 4);
    std::istringstream lines(log);
    std::string line;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.at("trial_id") == "S0001-T1");
        CHECK(j.contains("intervene"));
    }
    CHECK(stage(dir, {"pipeline", "run", "--trial", "S9999-T1"}).rc == 2);
    CHECK(stage(dir, {"pipeline", "run", "--ted-baseline", "last"}).rc != 0);
}

}  // TEST_SUITE
