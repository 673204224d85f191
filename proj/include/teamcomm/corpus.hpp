#pragma once
// Transcript parsing, trial splitting, token normalization and
// document-term matrices.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace teamcomm {

enum class Role { medic, engineer, transporter, unknown };

enum class TrialIndex { one, two };

Role parse_role(std::string_view tag) noexcept;
std::string_view to_string(Role role) noexcept;
std::string_view to_string(TrialIndex index) noexcept;
TrialIndex parse_trial_index(std::string_view s);

struct Utterance {
    Role speaker_role = Role::unknown;
    std::string text;
    std::size_t ordinal = 0;
    std::size_t token_count = 0;
};

struct TrialTranscript {
    std::string trial_id;
    std::string team_id;
    TrialIndex trial_index = TrialIndex::one;
    std::vector<Utterance> utterances;
    std::optional<double> score;

    std::size_t total_tokens() const noexcept;
};

inline const std::string kDefaultBoundaryMarker = "=== TRIAL BOUNDARY ===";

struct PreprocessConfig {
    std::set<std::string> stopword_list;
    bool strip_punctuation = true;
    bool strip_numbers = true;
    bool lowercase = true;
    std::size_t min_term_corpus_count = 1;
    // ECMAScript regexes, matched case-insensitively against the whole raw line.
    std::vector<std::string> admin_markers;
    std::vector<std::string> boundary_markers{kDefaultBoundaryMarker};

    // Bundled English stopwords plus the default administrative patterns.
    static PreprocessConfig defaults();
    void validate() const;
};

const std::set<std::string>& default_stopwords();
const std::vector<std::string>& default_admin_markers();

// One non-metadata line of a session file: an utterance or a trial boundary.
struct SessionLine {
    std::size_t line_no = 0;
    bool is_boundary = false;
    Role role = Role::unknown;
    std::string text;
};

struct SessionTranscript {
    std::string session_id;
    std::string team_id;
    std::map<std::string, std::string> metadata;  // from "# key: value" lines
    std::vector<SessionLine> lines;

    std::size_t utterance_count() const noexcept;
};

// Format: one utterance per line as "<ROLE>\t<text>"; lines starting with '#'
// are metadata ("# key: value"); blank lines are ignored; lines equal to a
// configured boundary marker separate trials. Lines matching an admin marker
// are dropped. session_id/team_id come from "# session:" / "# team:" metadata.
SessionTranscript parse_session_transcript(std::string_view raw, const PreprocessConfig& cfg);

// Partitions a session into at most two trials. Trial ids are
// "<session_id>-T1" / "<session_id>-T2". Token counts are filled under cfg.
std::vector<TrialTranscript> split_into_trials(const SessionTranscript& session,
                                               const std::vector<std::string>& boundary_markers,
                                               const PreprocessConfig& cfg);

std::vector<std::string> normalize_tokens(std::string_view text, const PreprocessConfig& cfg);

// Concatenated normalized tokens of every utterance, in order.
std::vector<std::string> trial_tokens(const TrialTranscript& trial, const PreprocessConfig& cfg);

// Keeps the first trial of each group with identical normalized token sequences.
std::vector<TrialTranscript> deduplicate_trials(const std::vector<TrialTranscript>& trials,
                                                const PreprocessConfig& cfg);

class Vocabulary {
public:
    Vocabulary() = default;
    // Terms must be unique; they are kept in the given order.
    explicit Vocabulary(std::vector<std::string> terms);

    const std::vector<std::string>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    std::optional<std::size_t> find(std::string_view term) const;
    const std::string& term(std::size_t i) const { return terms_.at(i); }
    // Hex FNV-1a digest of the ordered term list.
    std::string digest() const;

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::size_t> index_;
};

Vocabulary build_vocabulary(const std::vector<TrialTranscript>& trials, const PreprocessConfig& cfg);

// Sparse row: (term index, count) pairs sorted by term index, counts > 0.
using SparseCounts = std::vector<std::pair<std::size_t, std::uint32_t>>;

SparseCounts count_terms(const std::vector<std::string>& tokens, const Vocabulary& vocab);

struct DocTermMatrix {
    std::vector<std::string> doc_ids;
    Vocabulary vocab;
    std::vector<SparseCounts> rows;

    std::size_t n_docs() const noexcept { return rows.size(); }
    std::size_t n_terms() const noexcept { return vocab.size(); }
    std::uint64_t row_total(std::size_t d) const;
    std::uint64_t total_tokens() const;
    std::vector<std::uint64_t> column_totals() const;
    std::uint32_t count(std::size_t d, std::size_t t) const;
};

DocTermMatrix build_dtm(const std::vector<TrialTranscript>& trials, const Vocabulary& vocab,
                        const PreprocessConfig& cfg);

// {doc_ids, terms, triplets:[[doc,term,count],...]} with triplets sorted.
std::string dtm_to_json(const DocTermMatrix& dtm);
DocTermMatrix dtm_from_json(std::string_view json);

// Renders a trial back into transcript lines (no trailing boundary).
std::string format_trial_lines(const TrialTranscript& trial);

}  // namespace teamcomm
