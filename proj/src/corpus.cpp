#include "teamcomm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "teamcomm/error.hpp"
#include "teamcomm/rng.hpp"

namespace teamcomm {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool has_digit(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// Snowball English list with apostrophes removed, since punctuation is
// stripped before stopword filtering.
const char* const kStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "would",
    "should", "could", "ought", "im", "youre", "hes", "shes", "were", "theyre", "ive", "youve",
    "weve", "theyve", "id", "youd", "hed", "shed", "wed", "theyd", "ill", "youll", "hell",
    "shell", "well", "theyll", "isnt", "arent", "wasnt", "werent", "hasnt", "havent", "hadnt",
    "doesnt", "dont", "didnt", "wont", "wouldnt", "shant", "shouldnt", "cant", "cannot",
    "couldnt", "mustnt", "lets", "thats", "whos", "whats", "heres", "theres", "whens",
    "wheres", "whys", "hows", "a", "an", "the", "and", "but", "if", "or", "because", "as",
    "until", "while", "of", "at", "by", "for", "with", "about", "against", "between", "into",
    "through", "during", "before", "after", "above", "below", "to", "from", "up", "down", "in",
    "out", "on", "off", "over", "under", "again", "further", "then", "once", "here", "there",
    "when", "where", "why", "how", "all", "any", "both", "each", "few", "more", "most", "other",
    "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very",
};

std::vector<std::regex> compile_markers(const std::vector<std::string>& patterns) {
    std::vector<std::regex> out;
    out.reserve(patterns.size());
    for (const auto& p : patterns) {
        try {
            out.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            throw Error("invalid admin marker pattern '" + p + "': " + e.what());
        }
    }
    return out;
}

bool is_boundary(std::string_view line, const std::vector<std::string>& markers) {
    const auto t = trim(line);
    return std::any_of(markers.begin(), markers.end(), [&](const std::string& m) { return t == m; });
}

}  // namespace

Role parse_role(std::string_view tag) noexcept {
    const auto t = ascii_lower(trim(tag));
    if (t == "medic") return Role::medic;
    if (t == "engineer") return Role::engineer;
    if (t == "transporter") return Role::transporter;
    return Role::unknown;
}

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::medic: return "MEDIC";
        case Role::engineer: return "ENGINEER";
        case Role::transporter: return "TRANSPORTER";
        case Role::unknown: break;
    }
    return "UNKNOWN";
}

std::string_view to_string(TrialIndex index) noexcept {
    return index == TrialIndex::one ? "one" : "two";
}

TrialIndex parse_trial_index(std::string_view s) {
    const auto t = ascii_lower(trim(s));
    if (t == "one" || t == "1") return TrialIndex::one;
    if (t == "two" || t == "2") return TrialIndex::two;
    throw Error("invalid trial index '" + std::string(s) + "'");
}

std::size_t TrialTranscript::total_tokens() const noexcept {
    std::size_t n = 0;
    for (const auto& u : utterances) n += u.token_count;
    return n;
}

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words(std::begin(kStopwords), std::end(kStopwords));
    return words;
}

const std::vector<std::string>& default_admin_markers() {
    static const std::vector<std::string> markers{
        R"(^\s*(admin|system|experimenter|researcher)\s*\t)",
        R"(^[^\t]*\t\s*\[admin\])",
    };
    return markers;
}

PreprocessConfig PreprocessConfig::defaults() {
    PreprocessConfig cfg;
    cfg.stopword_list = default_stopwords();
    cfg.admin_markers = default_admin_markers();
    return cfg;
}

void PreprocessConfig::validate() const {
    if (min_term_corpus_count < 1) throw Error("min_term_corpus_count must be >= 1");
    if (boundary_markers.empty()) throw Error("boundary_markers must be non-empty");
    if (lowercase) {
        for (const auto& w : stopword_list) {
            if (ascii_lower(w) != w) throw Error("stopword '" + w + "' is not lowercase");
        }
    }
    compile_markers(admin_markers);
}

std::size_t SessionTranscript::utterance_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(lines.begin(), lines.end(), [](const SessionLine& l) { return !l.is_boundary; }));
}

SessionTranscript parse_session_transcript(std::string_view raw, const PreprocessConfig& cfg) {
    SessionTranscript session;
    const auto admin = compile_markers(cfg.admin_markers);

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        std::size_t end = raw.find('\n', pos);
        if (end == std::string_view::npos) end = raw.size();
        std::string_view line = raw.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (trim(line).empty()) continue;
        if (line.front() == '#') {
            const auto body = line.substr(1);
            const auto colon = body.find(':');
            if (colon != std::string_view::npos) {
                const auto key = ascii_lower(trim(body.substr(0, colon)));
                session.metadata[key] = std::string(trim(body.substr(colon + 1)));
            }
            continue;
        }
        if (is_boundary(line, cfg.boundary_markers)) {
            session.lines.push_back({line_no, true, Role::unknown, {}});
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw ParseError(line_no, "missing speaker separator (expected '<ROLE>\\t<text>')");
        }
        const std::string line_str(line);
        if (std::any_of(admin.begin(), admin.end(),
                        [&](const std::regex& re) { return std::regex_search(line_str, re); })) {
            continue;
        }
        session.lines.push_back({line_no, false, parse_role(line.substr(0, tab)),
                                 std::string(line.substr(tab + 1))});
    }

    if (auto it = session.metadata.find("session"); it != session.metadata.end()) {
        session.session_id = it->second;
    }
    if (auto it = session.metadata.find("team"); it != session.metadata.end()) {
        session.team_id = it->second;
    }
    return session;
}

std::vector<TrialTranscript> split_into_trials(const SessionTranscript& session,
                                               const std::vector<std::string>& boundary_markers,
                                               const PreprocessConfig& cfg) {
    if (boundary_markers.empty()) throw Error("boundary_markers must be non-empty");

    std::vector<std::vector<const SessionLine*>> segments(1);
    for (const auto& line : session.lines) {
        if (line.is_boundary) {
            segments.emplace_back();
            continue;
        }
        segments.back().push_back(&line);
    }
    if (segments.size() > 2) {
        throw Error("session '" + session.session_id + "' has " + std::to_string(segments.size() - 1) +
                    " trial boundaries; at most one is allowed");
    }

    const std::string team = session.team_id.empty() ? session.session_id : session.team_id;
    std::vector<TrialTranscript> trials;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        TrialTranscript trial;
        trial.trial_id = session.session_id + (s == 0 ? "-T1" : "-T2");
        trial.team_id = team;
        trial.trial_index = s == 0 ? TrialIndex::one : TrialIndex::two;
        if (segments[s].empty()) throw Error("empty trial '" + trial.trial_id + "'");
        for (const auto* line : segments[s]) {
            Utterance u;
            u.speaker_role = line->role;
            u.text = line->text;
            u.ordinal = trial.utterances.size();
            u.token_count = normalize_tokens(u.text, cfg).size();
            trial.utterances.push_back(std::move(u));
        }
        trials.push_back(std::move(trial));
    }
    return trials;
}

std::vector<std::string> normalize_tokens(std::string_view text, const PreprocessConfig& cfg) {
    std::string filtered;
    filtered.reserve(text.size());
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (cfg.strip_punctuation && uc < 0x80 && std::ispunct(uc)) continue;
        filtered.push_back(cfg.lowercase ? static_cast<char>(std::tolower(uc)) : c);
    }

    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < filtered.size()) {
        while (i < filtered.size() && std::isspace(static_cast<unsigned char>(filtered[i]))) ++i;
        std::size_t j = i;
        while (j < filtered.size() && !std::isspace(static_cast<unsigned char>(filtered[j]))) ++j;
        if (j > i) {
            std::string_view tok(filtered.data() + i, j - i);
            const bool drop = (cfg.strip_numbers && has_digit(tok)) ||
                              cfg.stopword_list.find(std::string(tok)) != cfg.stopword_list.end();
            if (!drop) tokens.emplace_back(tok);
        }
        i = j;
    }
    return tokens;
}

std::vector<std::string> trial_tokens(const TrialTranscript& trial, const PreprocessConfig& cfg) {
    std::vector<std::string> out;
    for (const auto& u : trial.utterances) {
        auto toks = normalize_tokens(u.text, cfg);
        out.insert(out.end(), std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
    }
    return out;
}

std::vector<TrialTranscript> deduplicate_trials(const std::vector<TrialTranscript>& trials,
                                                const PreprocessConfig& cfg) {
    std::unordered_set<std::string> seen;
    std::vector<TrialTranscript> out;
    for (const auto& trial : trials) {
        std::string key;
        for (const auto& tok : trial_tokens(trial, cfg)) {
            key += tok;
            key.push_back('\x1f');
        }
        if (seen.insert(std::move(key)).second) out.push_back(trial);
    }
    return out;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!index_.emplace(terms_[i], i).second) throw Error("duplicate vocabulary term '" + terms_[i] + "'");
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string Vocabulary::digest() const {
    std::uint64_t h = hash_string("");
    for (const auto& t : terms_) h = mix_seed(h, hash_string(t));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Vocabulary build_vocabulary(const std::vector<TrialTranscript>& trials, const PreprocessConfig& cfg) {
    std::map<std::string, std::size_t> counts;
    for (const auto& trial : trials) {
        for (const auto& u : trial.utterances) {
            for (auto& tok : normalize_tokens(u.text, cfg)) ++counts[std::move(tok)];
        }
    }
    std::vector<std::string> terms;
    for (const auto& [term, n] : counts) {
        if (n >= cfg.min_term_corpus_count) terms.push_back(term);
    }
    if (terms.empty()) throw Error("degenerate corpus: no term reaches min_term_corpus_count");
    return Vocabulary(std::move(terms));
}

SparseCounts count_terms(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
    std::map<std::size_t, std::uint32_t> tally;
    for (const auto& tok : tokens) {
        if (auto idx = vocab.find(tok)) ++tally[*idx];
    }
    return {tally.begin(), tally.end()};
}

std::uint64_t DocTermMatrix::row_total(std::size_t d) const {
    std::uint64_t n = 0;
    for (const auto& [t, c] : rows.at(d)) n += c;
    return n;
}

std::uint64_t DocTermMatrix::total_tokens() const {
    std::uint64_t n = 0;
    for (std::size_t d = 0; d < rows.size(); ++d) n += row_total(d);
    return n;
}

std::vector<std::uint64_t> DocTermMatrix::column_totals() const {
    std::vector<std::uint64_t> out(n_terms(), 0);
    for (const auto& row : rows) {
        for (const auto& [t, c] : row) out[t] += c;
    }
    return out;
}

std::uint32_t DocTermMatrix::count(std::size_t d, std::size_t t) const {
    const auto& row = rows.at(d);
    const auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(t, std::uint32_t{0}));
    return (it != row.end() && it->first == t) ? it->second : 0;
}

DocTermMatrix build_dtm(const std::vector<TrialTranscript>& trials, const Vocabulary& vocab,
                        const PreprocessConfig& cfg) {
    DocTermMatrix dtm;
    dtm.vocab = vocab;
    std::vector<std::string> empty_ids;
    for (const auto& trial : trials) {
        auto row = count_terms(trial_tokens(trial, cfg), vocab);
        if (row.empty()) empty_ids.push_back(trial.trial_id);
        dtm.doc_ids.push_back(trial.trial_id);
        dtm.rows.push_back(std::move(row));
    }
    if (!empty_ids.empty()) {
        std::string msg = "trials with no in-vocabulary tokens:";
        for (const auto& id : empty_ids) msg += " " + id;
        throw Error(msg);
    }
    return dtm;
}

std::string dtm_to_json(const DocTermMatrix& dtm) {
    nlohmann::json j;
    j["doc_ids"] = dtm.doc_ids;
    j["terms"] = dtm.vocab.terms();
    auto triplets = nlohmann::json::array();
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) {
        for (const auto& [t, c] : dtm.rows[d]) triplets.push_back({d, t, c});
    }
    j["triplets"] = std::move(triplets);
    return j.dump() + "\n";
}

DocTermMatrix dtm_from_json(std::string_view json) {
    DocTermMatrix dtm;
    try {
        const auto j = nlohmann::json::parse(json);
        dtm.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
        dtm.vocab = Vocabulary(j.at("terms").get<std::vector<std::string>>());
        dtm.rows.assign(dtm.doc_ids.size(), {});
        for (const auto& trip : j.at("triplets")) {
            const auto d = trip.at(0).get<std::size_t>();
            const auto t = trip.at(1).get<std::size_t>();
            const auto c = trip.at(2).get<std::uint32_t>();
            if (d >= dtm.rows.size() || t >= dtm.vocab.size() || c == 0) {
                throw Error("document-term triplet out of range");
            }
            dtm.rows[d].emplace_back(t, c);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed document-term matrix JSON: ") + e.what());
    }
    for (auto& row : dtm.rows) std::sort(row.begin(), row.end());
    return dtm;
}

std::string format_trial_lines(const TrialTranscript& trial) {
    std::ostringstream out;
    for (const auto& u : trial.utterances) out << to_string(u.speaker_role) << '\t' << u.text << '\n';
    return out.str();
}

}  // namespace teamcomm
