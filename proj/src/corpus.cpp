#include "kgcounsel/corpus.hpp"

#include <algorithm>
#include <istream>
#include <regex>
#include <sstream>

#include "kgcounsel/io.hpp"
#include "kgcounsel/text.hpp"

namespace kgcounsel {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kLiteracyBuckets> kLiteracyNames{
    "signature-only", "no-signature", "grade-1-5", "grade-6-10", "ssc-hsc", "unknown"};

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

bool any_filled(const std::vector<std::string>& items) {
    return std::any_of(items.begin(), items.end(), [](const std::string& s) { return !blank(s); });
}

std::string get_string(const json& obj, const char* key, std::string_view where, bool required) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        if (required) throw ParseError(std::string(where) + " requires field '" + key + "'");
        return {};
    }
    if (!it->is_string()) throw ParseError(std::string(where) + " field '" + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> get_string_list(const json& obj, const char* key, std::string_view where) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return out;
    if (!it->is_array()) throw ParseError(std::string(where) + " field '" + key + "' must be an array");
    for (const auto& v : *it) {
        if (!v.is_string()) throw ParseError(std::string(where) + " field '" + key + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

// Replaces Bengali digits (U+09E6..U+09EF) with ASCII so one set of patterns covers both.
std::string ascii_digits(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE0 &&
            static_cast<unsigned char>(text[i + 1]) == 0xA7) {
            const auto b = static_cast<unsigned char>(text[i + 2]);
            if (b >= 0xA6 && b <= 0xAF) {
                out.push_back(static_cast<char>('0' + (b - 0xA6)));
                i += 2;
                continue;
            }
        }
        out.push_back(text[i]);
    }
    return out;
}

const std::regex& date_pattern() {
    static const std::regex re(
        R"((\b\d{1,2}[/.\-]\d{1,2}[/.\-]\d{2,4}\b)|(\b\d{4}-\d{1,2}-\d{1,2}\b))"
        R"(|(\b\d{1,2}(st|nd|rd|th)?\s+(jan(uary)?|feb(ruary)?|mar(ch)?|apr(il)?|may|june?|july?|aug(ust)?|sep(t(ember)?)?|oct(ober)?|nov(ember)?|dec(ember)?)\b\.?,?\s+\d{4}\b))"
        R"(|(\b(jan(uary)?|feb(ruary)?|mar(ch)?|apr(il)?|may|june?|july?|aug(ust)?|sep(t(ember)?)?|oct(ober)?|nov(ember)?|dec(ember)?)\.?\s+\d{1,2}(st|nd|rd|th)?,?\s+\d{4}\b))",
        std::regex::icase | std::regex::optimize);
    return re;
}

const std::regex& phone_pattern() {
    static const std::regex re(R"(\+?\d[\d \-()]{7,}\d)", std::regex::optimize);
    return re;
}

}  // namespace

// ---- ingestion -------------------------------------------------------------

void check_case_invariants(const CaseRecord& record, bool strict_sessions) {
    auto fail = [&](const std::string& msg) {
        throw InvariantError("case " + record.id + ": " + msg, 0, record.id);
    };
    if (blank(record.id)) fail("empty case id");
    const std::size_t lo = strict_sessions ? 2 : 1;
    if (record.sessions.size() < lo || record.sessions.size() > 6) {
        fail("session count " + std::to_string(record.sessions.size()) + " outside " +
             std::to_string(lo) + "..6");
    }
    int previous = 0;
    for (const auto& s : record.sessions) {
        if (s.index < 1 || s.index > 6) fail("session index " + std::to_string(s.index) + " outside 1..6");
        if (s.index <= previous) fail("session indices must strictly increase");
        if (blank(s.narrative)) fail("session " + std::to_string(s.index) + " has an empty narrative");
        previous = s.index;
    }
    if (!record.sessions.empty() && record.sessions.front().index != 1) {
        fail("session indices must start at 1");
    }
    if (record.demographics.age && (*record.demographics.age < 0 || *record.demographics.age > 130)) {
        fail("implausible age");
    }
}

CaseRecord case_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("case record must be a JSON object");
    CaseRecord r;
    r.id = get_string(j, "id", "case record", true);
    const std::string where = "case " + r.id;

    if (auto it = j.find("demographics"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw ParseError(where + " demographics must be an object");
        const json& d = *it;
        if (auto a = d.find("age"); a != d.end() && !a->is_null()) {
            if (!a->is_number_integer()) throw ParseError(where + " age must be an integer or null");
            r.demographics.age = a->get<int>();
        }
        r.demographics.sex = get_string(d, "sex", where, false);
        r.demographics.marital_status = get_string(d, "marital_status", where, false);
        r.demographics.occupation = get_string(d, "occupation", where, false);
        r.demographics.literacy_level = get_string(d, "literacy_level", where, false);
    }
    r.distress_causes = get_string_list(j, "distress_causes", where);
    r.outcomes = get_string_list(j, "outcomes", where);

    auto sessions = j.find("sessions");
    if (sessions == j.end() || !sessions->is_array()) {
        throw ParseError(where + " requires a 'sessions' array");
    }
    for (const auto& js : *sessions) {
        if (!js.is_object()) throw ParseError(where + " session entries must be objects");
        SessionNote s;
        auto idx = js.find("index");
        if (idx == js.end() || !idx->is_number_integer()) {
            throw ParseError(where + " session requires integer 'index'");
        }
        s.index = idx->get<int>();
        const std::string swhere = where + " session " + std::to_string(s.index);
        s.narrative = get_string(js, "narrative", swhere, true);
        s.contextual_factors = get_string_list(js, "contextual_factors", swhere);
        s.emotional_responses = get_string_list(js, "emotional_responses", swhere);
        s.interventions_given = get_string_list(js, "interventions_given", swhere);
        r.sessions.push_back(std::move(s));
    }

    static const std::set<std::string> known{"id", "demographics", "distress_causes", "sessions",
                                             "outcomes"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) r.extra[key] = value;
    }
    return r;
}

json case_to_json(const CaseRecord& r) {
    json j = json::object();
    j["id"] = r.id;
    j["demographics"] = {
        {"age", r.demographics.age ? json(*r.demographics.age) : json(nullptr)},
        {"sex", r.demographics.sex},
        {"marital_status", r.demographics.marital_status},
        {"occupation", r.demographics.occupation},
        {"literacy_level", r.demographics.literacy_level},
    };
    j["distress_causes"] = r.distress_causes;
    json sessions = json::array();
    for (const auto& s : r.sessions) {
        sessions.push_back({{"index", s.index},
                            {"narrative", s.narrative},
                            {"contextual_factors", s.contextual_factors},
                            {"emotional_responses", s.emotional_responses},
                            {"interventions_given", s.interventions_given}});
    }
    j["sessions"] = std::move(sessions);
    if (!r.outcomes.empty()) j["outcomes"] = r.outcomes;
    for (const auto& [key, value] : r.extra.items()) j[key] = value;
    return j;
}

std::string serialize_cases(const std::vector<CaseRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += case_to_json(r).dump();
        out += '\n';
    }
    return out;
}

IngestResult ingest_cases(std::istream& in, const IngestOptions& options) {
    IngestResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        CaseRecord record;
        try {
            record = case_from_json(j);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
        try {
            check_case_invariants(record, options.strict_sessions);
        } catch (const InvariantError& e) {
            InvariantError located(std::string(e.what()), line_no, record.id);
            if (!options.lenient) throw located;
            result.diagnostics.push_back({line_no, record.id, located.what()});
            continue;
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

IngestResult ingest_cases(std::string_view text, const IngestOptions& options) {
    std::istringstream in{std::string(text)};
    return ingest_cases(in, options);
}

IngestResult ingest_cases_file(const std::filesystem::path& path, const IngestOptions& options) {
    return ingest_cases(read_file(path), options);
}

// ---- completeness and redaction ---------------------------------------------

std::string_view to_string(ChainLink link) {
    switch (link) {
        case ChainLink::Cause: return "cause";
        case ChainLink::Effect: return "effect";
        case ChainLink::Intervention: return "intervention";
        case ChainLink::Outcome: return "outcome";
    }
    return "?";
}

std::string_view to_string(RedactionKind kind) {
    switch (kind) {
        case RedactionKind::Date: return "date";
        case RedactionKind::Phone: return "phone";
        case RedactionKind::Identifier: return "identifier";
    }
    return "?";
}

std::string RedactionFinding::describe() const {
    return std::string(to_string(kind)) + " '" + match + "' in " + field;
}

RedactionRules RedactionRules::from_denylist_text(std::string_view text) {
    RedactionRules rules;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        for (auto& w : normalized_tokens(line)) rules.denylist.insert(std::move(w));
    }
    return rules;
}

RedactionRules RedactionRules::from_denylist_file(const std::filesystem::path& path) {
    return from_denylist_text(read_file(path));
}

const std::set<std::string>& outcome_markers() {
    static const std::set<std::string> markers{
        "outcome",  "outcomes", "improved", "improvement", "better",  "progress",
        "reduced",  "resolved", "recovered", "উন্নতি",      "ভালো"};
    return markers;
}

CaseValidationResult validate_case_completeness(const CaseRecord& record, const RedactionRules* rules) {
    CaseValidationResult result;
    result.case_id = record.id;

    bool effect = false, intervention = false;
    for (const auto& s : record.sessions) {
        effect = effect || any_filled(s.emotional_responses);
        intervention = intervention || any_filled(s.interventions_given);
    }
    bool outcome = any_filled(record.outcomes);
    if (!outcome && !record.sessions.empty()) {
        for (const auto& tok : normalized_tokens(record.sessions.back().narrative)) {
            if (outcome_markers().count(tok)) {
                outcome = true;
                break;
            }
        }
    }
    if (!any_filled(record.distress_causes)) result.missing_links.push_back(ChainLink::Cause);
    if (!effect) result.missing_links.push_back(ChainLink::Effect);
    if (!intervention) result.missing_links.push_back(ChainLink::Intervention);
    if (!outcome) result.missing_links.push_back(ChainLink::Outcome);
    result.complete = result.missing_links.empty();

    if (rules) {
        for (const auto& f : redaction_lint(record, *rules)) result.redaction_findings.push_back(f.describe());
    }
    return result;
}

std::vector<RedactionFinding> lint_text(std::string_view text, std::string_view field,
                                        const RedactionRules& rules) {
    std::vector<RedactionFinding> out;
    const std::string normalized = ascii_digits(text);

    std::vector<std::pair<std::size_t, std::size_t>> date_spans;
    for (auto it = std::sregex_iterator(normalized.begin(), normalized.end(), date_pattern());
         it != std::sregex_iterator(); ++it) {
        const auto pos = static_cast<std::size_t>(it->position());
        date_spans.emplace_back(pos, pos + static_cast<std::size_t>(it->length()));
        out.push_back({RedactionKind::Date, std::string(field), it->str()});
    }
    for (auto it = std::sregex_iterator(normalized.begin(), normalized.end(), phone_pattern());
         it != std::sregex_iterator(); ++it) {
        const std::string m = it->str();
        if (std::count_if(m.begin(), m.end(), [](char c) { return c >= '0' && c <= '9'; }) < 10) continue;
        const auto pos = static_cast<std::size_t>(it->position());
        const auto end = pos + m.size();
        const bool overlaps_date = std::any_of(date_spans.begin(), date_spans.end(), [&](const auto& d) {
            return pos < d.second && d.first < end;
        });
        if (!overlaps_date) out.push_back({RedactionKind::Phone, std::string(field), m});
    }
    if (!rules.denylist.empty()) {
        for (const auto& span : word_spans(text)) {
            const auto word = text.substr(span.begin, span.end - span.begin);
            if (rules.denylist.count(normalize_token(word))) {
                out.push_back({RedactionKind::Identifier, std::string(field), std::string(word)});
            }
        }
    }
    return out;
}

std::vector<RedactionFinding> redaction_lint(const CaseRecord& record, const RedactionRules& rules) {
    std::vector<RedactionFinding> out;
    auto scan = [&](std::string_view text, const std::string& field) {
        auto found = lint_text(text, field, rules);
        out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    };
    auto scan_list = [&](const std::vector<std::string>& items, const std::string& field) {
        for (std::size_t i = 0; i < items.size(); ++i) scan(items[i], field + "[" + std::to_string(i) + "]");
    };
    scan_list(record.distress_causes, "distress_causes");
    for (const auto& s : record.sessions) {
        const std::string base = "sessions[" + std::to_string(s.index) + "]";
        scan(s.narrative, base + ".narrative");
        scan_list(s.contextual_factors, base + ".contextual_factors");
        scan_list(s.emotional_responses, base + ".emotional_responses");
        scan_list(s.interventions_given, base + ".interventions_given");
    }
    scan_list(record.outcomes, "outcomes");
    return out;
}

// ---- statistics -------------------------------------------------------------

std::string_view to_string(LiteracyBucket bucket) {
    return kLiteracyNames[static_cast<std::size_t>(bucket)];
}

LiteracyBucket literacy_bucket(std::string_view level) {
    const std::string folded = casefold(level);
    for (std::size_t i = 0; i + 1 < kLiteracyNames.size(); ++i) {
        if (kLiteracyNames[i] == folded) return static_cast<LiteracyBucket>(i);
    }
    return LiteracyBucket::Unknown;
}

DemographicReport demographic_stats(const std::vector<CaseRecord>& cases) {
    DemographicReport report;
    report.case_count = cases.size();
    auto label = [](const std::string& s) { return blank(s) ? std::string("unspecified") : s; };
    for (const auto& c : cases) {
        ++report.literacy[static_cast<std::size_t>(literacy_bucket(c.demographics.literacy_level))];
        ++report.occupations[label(c.demographics.occupation)];
        ++report.sex[label(c.demographics.sex)];
        ++report.marital_status[label(c.demographics.marital_status)];
    }
    return report;
}

// ---- chunking ---------------------------------------------------------------

std::size_t ChunkOptions::effective_stride() const {
    return stride_words ? stride_words : std::max<std::size_t>(1, max_words / 2);
}

std::vector<Chunk> chunk_narrative(std::string_view text, const ChunkOptions& options) {
    const std::size_t stride = options.effective_stride();
    if (options.max_words < 1 || stride > options.max_words) {
        throw Error(ErrorCode::InvalidArgument, "chunking requires max_words >= 1 and 1 <= stride <= max_words");
    }
    const auto spans = word_spans(text);
    if (spans.empty()) throw Error(ErrorCode::EmptyText, "cannot chunk text without words");

    std::vector<Chunk> chunks;
    const std::size_t n = spans.size();
    for (std::size_t start = 0;; start += stride) {
        const std::size_t end = std::min(start + options.max_words, n);  // exclusive
        Chunk c;
        c.start_word = start + 1;
        c.end_word = end;
        c.text = std::string(text.substr(spans[start].begin, spans[end - 1].end - spans[start].begin));
        chunks.push_back(std::move(c));
        if (end == n) break;
    }
    return chunks;
}

std::vector<Chunk> chunk_cases(const std::vector<CaseRecord>& cases, const ChunkOptions& options) {
    std::vector<Chunk> out;
    for (const auto& c : cases) {
        for (const auto& s : c.sessions) {
            for (auto& chunk : chunk_narrative(s.narrative, options)) {
                chunk.case_id = c.id;
                chunk.session_index = s.index;
                chunk.id = c.id + "/s" + std::to_string(s.index) + "/w" + std::to_string(chunk.start_word);
                out.push_back(std::move(chunk));
            }
        }
    }
    return out;
}

json chunk_to_json(const Chunk& c) {
    return {{"id", c.id},
            {"case_id", c.case_id},
            {"session_index", c.session_index},
            {"start_word", c.start_word},
            {"end_word", c.end_word},
            {"text", c.text}};
}

Chunk chunk_from_json(const json& j) {
    try {
        Chunk c;
        c.id = j.at("id").get<std::string>();
        c.case_id = j.at("case_id").get<std::string>();
        c.session_index = j.at("session_index").get<int>();
        c.start_word = j.at("start_word").get<std::size_t>();
        c.end_word = j.at("end_word").get<std::size_t>();
        c.text = j.at("text").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed chunk: ") + e.what());
    }
}

std::string serialize_chunks(const std::vector<Chunk>& chunks) {
    std::string out;
    for (const auto& c : chunks) out += chunk_to_json(c).dump() + "\n";
    return out;
}

std::vector<Chunk> parse_chunks(std::string_view text) {
    std::vector<Chunk> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(chunk_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

}  // namespace kgcounsel
