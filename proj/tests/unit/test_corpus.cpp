#include <gtest/gtest.h>

#include "kgcounsel/corpus.hpp"
#include "kgcounsel/text.hpp"
#include "oracles.hpp"

using namespace kgcounsel;

namespace {

const char* kCase = R"({"id": "case-001", "demographics": {"age": 34, "sex": "female", "marital_status": "married",)"
                    R"( "occupation": "Housemaid", "literacy_level": "signature-only"},)"
                    R"( "distress_causes": ["job loss"], "sessions": [)"
                    R"({"index": 1, "narrative": "Client cannot sleep since the job loss.",)"
                    R"( "emotional_responses": ["sleep problems"], "interventions_given": ["breathing exercise"]},)"
                    R"({"index": 2, "narrative": "Sleep has improved after the exercises."}],)"
                    R"( "referral_note": {"to": "clinic"}})";

std::string with_sessions(const std::string& id, const std::string& sessions) {
    return R"({"id": ")" + id + R"(", "sessions": )" + sessions + "}";
}

std::string words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i + 1);
    return s;
}

}  // namespace

// ---- text ---------------------------------------------------------------------

TEST(Text, WordSpansCoverUnicodeWhitespace) {
    const std::string text = "আমি ঘুমাতে  পারি না　ok\n";
    EXPECT_EQ(split_words(text), (std::vector<std::string>{"আমি", "ঘুমাতে", "পারি", "না", "ok"}));
    EXPECT_EQ(word_count(""), 0u);
    EXPECT_EQ(word_count(" \t\n"), 0u);
}

TEST(Text, NormalizeStripsPunctuationAndFoldsAscii) {
    EXPECT_EQ(normalize_token("\"Sleep,\""), "sleep");
    EXPECT_EQ(normalize_token("হয়না।"), "হয়না");
    EXPECT_EQ(normalize_token("..."), "");
    EXPECT_EQ(normalized_tokens("Job LOSS, job!"), (std::vector<std::string>{"job", "loss", "job"}));
}

TEST(Text, SplitMixIsStable) {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    SplitMix64 c(0);
    EXPECT_EQ(c.next(), 0xe220a8397b1dcdafULL);  // reference value of SplitMix64 from seed 0
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

// ---- ingestion ----------------------------------------------------------------

TEST(Ingest, ParsesRecordAndPreservesUnknownFields) {
    const auto r = ingest_cases(std::string(kCase) + "\n\n");
    ASSERT_EQ(r.records.size(), 1u);
    const auto& c = r.records[0];
    EXPECT_EQ(c.id, "case-001");
    EXPECT_EQ(c.demographics.age, 34);
    ASSERT_EQ(c.sessions.size(), 2u);
    EXPECT_EQ(c.sessions[1].index, 2);
    EXPECT_EQ(c.extra["referral_note"]["to"], "clinic");
}

TEST(Ingest, SerializeRoundTrip) {
    const auto cases = generate_corpus();
    const auto back = ingest_cases(serialize_cases(cases)).records;
    EXPECT_EQ(back, cases);
    const auto once = ingest_cases(kCase).records;
    EXPECT_EQ(ingest_cases(serialize_cases(once)).records, once);
}

TEST(Ingest, MalformedJsonReportsLine) {
    try {
        ingest_cases(std::string(kCase) + "\n{not json\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Ingest, MistypedFieldIsParseError) {
    for (const std::string bad : {R"({"id": 5, "sessions": []})",
                                  R"({"id": "a", "sessions": [{"index": "1", "narrative": "x"}]})",
                                  R"({"id": "a", "distress_causes": "debt", "sessions": []})",
                                  R"({"id": "a"})"}) {
        EXPECT_THROW(ingest_cases(bad), ParseError) << bad;
    }
}

TEST(Ingest, InvariantBreachesAreLocated) {
    const std::vector<std::string> bad{
        with_sessions("a", "[]"),
        with_sessions("b", R"([{"index": 2, "narrative": "x"}])"),
        with_sessions("c", R"([{"index": 1, "narrative": "x"}, {"index": 1, "narrative": "y"}])"),
        with_sessions("d", R"([{"index": 1, "narrative": "  "}])"),
        with_sessions("e", R"([{"index": 1, "narrative": "a"}, {"index": 2, "narrative": "b"},)"
                           R"({"index": 3, "narrative": "c"}, {"index": 4, "narrative": "d"},)"
                           R"({"index": 5, "narrative": "e"}, {"index": 6, "narrative": "f"},)"
                           R"({"index": 7, "narrative": "g"}])"),
    };
    for (const auto& line : bad) {
        try {
            ingest_cases(std::string(kCase) + "\n" + line);
            ADD_FAILURE() << line;
        } catch (const InvariantError& e) {
            EXPECT_EQ(e.line(), 2u);
            EXPECT_EQ(e.code(), ErrorCode::InvariantError);
        }
    }
}

TEST(Ingest, LenientSkipsAndKeepsDiagnostics) {
    const std::string text = std::string(kCase) + "\n" + with_sessions("bad", "[]") + "\n" +
                             with_sessions("ok", R"([{"index": 1, "narrative": "x"}])");
    const auto r = ingest_cases(text, {.lenient = true});
    ASSERT_EQ(r.records.size(), 2u);
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].line, 2u);
    EXPECT_EQ(r.diagnostics[0].case_id, "bad");
}

TEST(Ingest, StrictSessionsNeedsTwo) {
    const std::string one = with_sessions("x", R"([{"index": 1, "narrative": "x"}])");
    EXPECT_NO_THROW(ingest_cases(one));
    EXPECT_THROW(ingest_cases(one, {.strict_sessions = true}), InvariantError);
}

// ---- completeness and redaction ------------------------------------------------

TEST(Completeness, FullChainIsComplete) {
    const auto c = ingest_cases(kCase).records[0];
    const auto v = validate_case_completeness(c);
    EXPECT_TRUE(v.complete);
    EXPECT_TRUE(v.missing_links.empty());
}

TEST(Completeness, MissingLinksAreListedInChainOrder) {
    auto c = ingest_cases(kCase).records[0];
    c.distress_causes.clear();
    c.sessions[1].narrative = "We talked again.";
    const auto v = validate_case_completeness(c);
    EXPECT_FALSE(v.complete);
    EXPECT_EQ(v.missing_links, (std::vector<ChainLink>{ChainLink::Cause, ChainLink::Outcome}));
    c.outcomes = {"sleeping six hours"};
    EXPECT_EQ(validate_case_completeness(c).missing_links, std::vector<ChainLink>{ChainLink::Cause});
}

TEST(Redaction, FindsDatesPhonesAndDenylistedNames) {
    const auto rules = RedactionRules::from_denylist_text("Rahima\n\n  karim  \n");
    const auto f = lint_text("Rahima called on 12/03/2023 from +880 1711-234567; Karim came on 5 March 2024.",
                             "narrative", rules);
    std::multiset<RedactionKind> kinds;
    for (const auto& x : f) kinds.insert(x.kind);
    EXPECT_EQ(kinds.count(RedactionKind::Date), 2u);
    EXPECT_EQ(kinds.count(RedactionKind::Phone), 1u);
    EXPECT_EQ(kinds.count(RedactionKind::Identifier), 2u);
}

TEST(Redaction, BanglaDigitsAreLinted) {
    const auto f = lint_text("ফোন ০১৭১১২৩৪৫৬৭ তারিখ ১২/০৩/২০২৩", "narrative", {});
    ASSERT_EQ(f.size(), 2u);
}

TEST(Redaction, CleanTextHasNoFindings) {
    EXPECT_TRUE(lint_text("The client felt better after three sessions.", "x", {}).empty());
    EXPECT_TRUE(lint_text("Paid 500 taka for 2 kg rice", "x", {}).empty());
}

TEST(Redaction, FindingsNameTheField) {
    auto c = ingest_cases(kCase).records[0];
    c.sessions[0].narrative += " Call 01711234567.";
    const auto f = redaction_lint(c, {});
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].field, "sessions[1].narrative");
    EXPECT_EQ(validate_case_completeness(c, nullptr).redaction_findings.size(), 0u);
    const RedactionRules none;
    EXPECT_EQ(validate_case_completeness(c, &none).redaction_findings.size(), 1u);
}

// ---- statistics ----------------------------------------------------------------

TEST(Demographics, SyntheticCorpusMatchesPublishedDistributions) {
    const auto report = demographic_stats(generate_corpus());
    EXPECT_EQ(report.case_count, 69u);
    EXPECT_EQ(report.literacy_count(LiteracyBucket::SignatureOnly), 33u);
    EXPECT_EQ(report.literacy_count(LiteracyBucket::NoSignature), 7u);
    EXPECT_EQ(report.literacy_count(LiteracyBucket::Grade1To5), 13u);
    EXPECT_EQ(report.literacy_count(LiteracyBucket::Grade6To10), 12u);
    EXPECT_EQ(report.literacy_count(LiteracyBucket::SscHsc), 4u);
    EXPECT_EQ(report.literacy_count(LiteracyBucket::Unknown), 0u);
    EXPECT_EQ(report.sex.at("female"), 65u);
    EXPECT_EQ(report.sex.at("male"), 4u);
    EXPECT_EQ(report.marital_status.at("married"), 51u);
    EXPECT_EQ(report.marital_status.at("unspecified"), 12u);
    EXPECT_EQ(report.occupations.at("Unemployed (NIFW)"), 17u);
    EXPECT_EQ(report.occupations.at("Housemaid"), 15u);
    std::size_t total = 0;
    for (const auto& [_, n] : report.occupations) total += n;
    EXPECT_EQ(total, 69u);
}

TEST(Demographics, UnrecognisedLiteracyCountsAsUnknown) {
    auto c = ingest_cases(kCase).records[0];
    c.demographics.literacy_level = "Grade-1-5";
    EXPECT_EQ(demographic_stats({c}).literacy_count(LiteracyBucket::Grade1To5), 1u);
    c.demographics.literacy_level = "some school";
    EXPECT_EQ(demographic_stats({c}).literacy_count(LiteracyBucket::Unknown), 1u);
}

TEST(Corpus, GeneratorIsDeterministicAndValid) {
    const auto a = generate_corpus();
    EXPECT_EQ(serialize_cases(a), serialize_cases(generate_corpus()));
    for (const auto& c : a) {
        EXPECT_NO_THROW(check_case_invariants(c, true)) << c.id;
        EXPECT_TRUE(validate_case_completeness(c).complete) << c.id;
    }
    CorpusFixtureSpec bad;
    bad.sex = {{"female", 1}};
    EXPECT_THROW(generate_corpus(bad), Error);
}

// ---- chunking ------------------------------------------------------------------

TEST(Chunker, ShortTextIsOneChunk) {
    const auto c = chunk_narrative("  one two three  ");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].text, "one two three");
    EXPECT_EQ(c[0].start_word, 1u);
    EXPECT_EQ(c[0].end_word, 3u);
}

TEST(Chunker, BoundaryLengths) {
    EXPECT_EQ(chunk_narrative(words(500)).size(), 1u);
    const auto c = chunk_narrative(words(501));
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[1].start_word, 251u);
    EXPECT_EQ(c[1].end_word, 501u);
    EXPECT_EQ(chunk_narrative(words(1000)).size(), 3u);
}

TEST(Chunker, RejectsEmptyTextAndBadOptions) {
    try {
        chunk_narrative(" \n ");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyText);
    }
    EXPECT_THROW(chunk_narrative("a b", {.max_words = 0}), Error);
    EXPECT_THROW(chunk_narrative("a b", {.max_words = 5, .stride_words = 6}), Error);
}

TEST(Chunker, PropertiesOnRandomTexts) {
    SplitMix64 rng(5);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 1 + rng.below(5000);
        const auto chunks = chunk_narrative(words(n));
        EXPECT_EQ(chunks.front().start_word, 1u);
        EXPECT_EQ(chunks.back().end_word, n);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            EXPECT_LE(chunks[i].word_length(), 500u);
            EXPECT_EQ(word_count(chunks[i].text), chunks[i].word_length());
            if (i + 1 < chunks.size()) {
                EXPECT_EQ(chunks[i].word_length(), 500u);
                EXPECT_EQ(chunks[i + 1].start_word, chunks[i].start_word + 250);
                EXPECT_LE(chunks[i + 1].start_word, chunks[i].end_word + 1);
            }
        }
    }
}

TEST(Chunker, TextIsExactSourceSubstring) {
    const std::string text = "প্রথম  শব্দ\tদ্বিতীয়\nলাইন end.";
    const auto c = chunk_narrative(text, {.max_words = 2, .stride_words = 1});
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0].text, "প্রথম  শব্দ");
    EXPECT_EQ(c[1].text, "শব্দ\tদ্বিতীয়");
    for (const auto& x : c) EXPECT_NE(text.find(x.text), std::string::npos);
}

TEST(Chunker, CaseChunkIdsAndJsonRoundTrip) {
    const auto cases = generate_corpus();
    const auto chunks = chunk_cases(cases);
    std::set<std::string> ids;
    for (const auto& c : chunks) ids.insert(c.id);
    EXPECT_EQ(ids.size(), chunks.size());
    EXPECT_EQ(chunks.front().id, cases.front().id + "/s1/w1");
    EXPECT_EQ(parse_chunks(serialize_chunks(chunks)), chunks);
    EXPECT_THROW(parse_chunks("{\"id\": 1}\n"), ParseError);
}
