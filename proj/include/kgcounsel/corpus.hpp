#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgcounsel/error.hpp"

namespace kgcounsel {

struct Demographics {
    std::optional<int> age;
    std::string sex;
    std::string marital_status;
    std::string occupation;
    std::string literacy_level;  // a LiteracyBucket name; anything else counts as unknown

    bool operator==(const Demographics&) const = default;
};

struct SessionNote {
    int index = 1;  // 1..6
    std::string narrative;
    std::vector<std::string> contextual_factors;
    std::vector<std::string> emotional_responses;
    std::vector<std::string> interventions_given;

    bool operator==(const SessionNote&) const = default;
};

struct CaseRecord {
    std::string id;
    Demographics demographics;
    std::vector<std::string> distress_causes;
    std::vector<SessionNote> sessions;
    std::vector<std::string> outcomes;  // optional explicit outcome statements
    nlohmann::json extra = nlohmann::json::object();  // unknown fields, preserved verbatim

    bool operator==(const CaseRecord&) const = default;
};

struct Chunk {
    std::string id;
    std::string case_id;
    int session_index = 0;
    std::size_t start_word = 1;  // 1-based, inclusive
    std::size_t end_word = 0;    // 1-based, inclusive
    std::string text;

    std::size_t word_length() const { return end_word + 1 - start_word; }
    bool operator==(const Chunk&) const = default;
};

// ---- ingestion -------------------------------------------------------------

struct IngestOptions {
    bool lenient = false;         // skip records that break invariants, keep diagnostics
    bool strict_sessions = false;  // require 2..6 sessions instead of 1..6
};

struct IngestDiagnostic {
    std::size_t line = 0;
    std::string case_id;
    std::string message;
};

struct IngestResult {
    std::vector<CaseRecord> records;
    std::vector<IngestDiagnostic> diagnostics;
};

class InvariantError : public Error {
public:
    InvariantError(const std::string& message, std::size_t line, std::string case_id)
        : Error(ErrorCode::InvariantError,
                line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line), case_id_(std::move(case_id)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& case_id() const noexcept { return case_id_; }

private:
    std::size_t line_;
    std::string case_id_;
};

// JSON Lines, one record per line, blank lines ignored. Malformed JSON or
// mistyped fields throw ParseError (with line); invariant breaches throw
// InvariantError unless options.lenient.
IngestResult ingest_cases(std::istream& in, const IngestOptions& options = {});
IngestResult ingest_cases(std::string_view text, const IngestOptions& options = {});
IngestResult ingest_cases_file(const std::filesystem::path& path, const IngestOptions& options = {});

// Throws InvariantError (line 0) describing the first violated invariant.
void check_case_invariants(const CaseRecord& record, bool strict_sessions = false);

nlohmann::json case_to_json(const CaseRecord& record);
CaseRecord case_from_json(const nlohmann::json& j);  // throws ParseError on type errors
std::string serialize_cases(const std::vector<CaseRecord>& records);  // JSON Lines

// ---- completeness and redaction ---------------------------------------------

enum class ChainLink { Cause, Effect, Intervention, Outcome };
std::string_view to_string(ChainLink link);

enum class RedactionKind { Date, Phone, Identifier };
std::string_view to_string(RedactionKind kind);

struct RedactionFinding {
    RedactionKind kind;
    std::string field;  // e.g. "sessions[2].narrative"
    std::string match;

    std::string describe() const;
    bool operator==(const RedactionFinding&) const = default;
};

struct RedactionRules {
    std::set<std::string> denylist;  // normalized tokens

    static RedactionRules from_denylist_text(std::string_view text);  // one token per line
    static RedactionRules from_denylist_file(const std::filesystem::path& path);
};

struct CaseValidationResult {
    std::string case_id;
    bool complete = false;
    std::vector<ChainLink> missing_links;
    std::vector<std::string> redaction_findings;
};

// Words whose presence in the final session narrative counts as a stated outcome.
const std::set<std::string>& outcome_markers();

// cause <- distress_causes, effect <- emotional_responses, intervention <-
// interventions_given, outcome <- explicit outcomes or a marker word in the
// last session's narrative. Runs the redaction lint when rules are given.
CaseValidationResult validate_case_completeness(const CaseRecord& record,
                                                const RedactionRules* rules = nullptr);

std::vector<RedactionFinding> lint_text(std::string_view text, std::string_view field,
                                        const RedactionRules& rules);
std::vector<RedactionFinding> redaction_lint(const CaseRecord& record, const RedactionRules& rules);

// ---- statistics -------------------------------------------------------------

enum class LiteracyBucket { SignatureOnly, NoSignature, Grade1To5, Grade6To10, SscHsc, Unknown };
inline constexpr std::size_t kLiteracyBuckets = 6;
std::string_view to_string(LiteracyBucket bucket);
LiteracyBucket literacy_bucket(std::string_view level);

struct DemographicReport {
    std::size_t case_count = 0;
    std::array<std::size_t, kLiteracyBuckets> literacy{};
    std::map<std::string, std::size_t> occupations;
    std::map<std::string, std::size_t> sex;
    std::map<std::string, std::size_t> marital_status;

    std::size_t literacy_count(LiteracyBucket b) const {
        return literacy[static_cast<std::size_t>(b)];
    }
};

DemographicReport demographic_stats(const std::vector<CaseRecord>& cases);

// ---- chunking ---------------------------------------------------------------

struct ChunkOptions {
    std::size_t max_words = 500;
    std::size_t stride_words = 0;  // 0 = max_words / 2 (at least 1)

    std::size_t effective_stride() const;
};

// Sliding window over whitespace words. Chunk text is the exact source
// substring from the first to the last word of the window. Throws EmptyText
// for text without words and InvalidArgument for bad options.
std::vector<Chunk> chunk_narrative(std::string_view text, const ChunkOptions& options = {});

// Chunks every session narrative; ids are "<case>/s<session>/w<start_word>".
std::vector<Chunk> chunk_cases(const std::vector<CaseRecord>& cases, const ChunkOptions& options = {});

nlohmann::json chunk_to_json(const Chunk& chunk);
Chunk chunk_from_json(const nlohmann::json& j);  // throws ParseError
std::string serialize_chunks(const std::vector<Chunk>& chunks);  // JSON Lines
std::vector<Chunk> parse_chunks(std::string_view text);          // throws ParseError with line

// ---- synthetic corpus -------------------------------------------------------

struct CorpusFixtureSpec {
    std::uint64_t seed = 69;
    // Counts per literacy bucket in LiteracyBucket order (no Unknown).
    std::array<std::size_t, 5> literacy{33, 7, 13, 12, 4};
    std::vector<std::pair<std::string, std::size_t>> occupations{
        {"Unemployed (NIFW)", 17}, {"Waste Collector", 5}, {"Any Job", 4},
        {"Unemployed (LW)", 15},   {"Housemaid", 15},      {"Small Business", 10},
        {"Rickshaw Driver", 1},    {"Daily Labor", 1},     {"Street People", 1}};
    std::vector<std::pair<std::string, std::size_t>> sex{{"female", 65}, {"male", 4}};
    std::vector<std::pair<std::string, std::size_t>> marital{
        {"married", 51}, {"widowed", 3}, {"divorced", 1}, {"unmarried", 2}, {"unspecified", 12}};
    // Share of sessions padded past 500 words, so chunking has overlap to do.
    double long_session_rate = 0.15;
};

// Synthetic Bangla-flavoured records; record count is the literacy total and
// every other distribution must sum to the same count (InvalidArgument otherwise).
std::vector<CaseRecord> generate_corpus(const CorpusFixtureSpec& spec = {});

}  // namespace kgcounsel
