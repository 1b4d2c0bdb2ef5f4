#include <algorithm>
#include <cstdio>
#include <numeric>

#include "kgcounsel/corpus.hpp"
#include "kgcounsel/text.hpp"
#include "vocabulary.hpp"

namespace kgcounsel {

namespace {

constexpr std::array<std::string_view, 8> kBanglaPhrases{
    "মন খারাপ",        "ঘুম হয় না",     "টাকার চিন্তা",     "পরিবারের সাথে ঝগড়া",
    "আল্লাহর উপর ভরসা", "কাজ নেই",       "শরীর দুর্বল",      "ভালো লাগে না"};

constexpr std::array<std::string_view, 6> kContextFactors{
    "economic hardship", "family conflict", "limited social support",
    "crowded housing",   "irregular work",  "caregiving burden"};

constexpr std::array<std::string_view, 4> kFiller{
    "The conversation covered daily routines, household responsibilities and the support "
    "available from neighbours.",
    "The client talked about the week in detail, including work, meals and rest.",
    "পরিবারের সবাই মিলে আলোচনা হয়েছে এবং পরিকল্পনা করা হয়েছে।",
    "The para-counselor listened, reflected the client's feelings back and checked understanding."};

template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// Exact-count label list, shuffled.
std::vector<std::string> spread(const std::vector<std::pair<std::string, std::size_t>>& counts,
                                std::size_t total, const char* what, SplitMix64& rng) {
    std::vector<std::string> out;
    for (const auto& [label, n] : counts) out.insert(out.end(), n, label);
    if (out.size() != total) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " counts sum to " +
                                                    std::to_string(out.size()) + ", expected " +
                                                    std::to_string(total));
    }
    shuffle(out, rng);
    return out;
}

template <std::size_t N>
std::vector<std::string> sample(const std::array<std::string_view, N>& pool, std::size_t n,
                                SplitMix64& rng) {
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, rng);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(n, N); ++i) out.emplace_back(pool[idx[i]]);
    return out;
}

template <std::size_t N>
std::string_view any(const std::array<std::string_view, N>& pool, SplitMix64& rng) {
    return pool[rng.below(N)];
}

std::string join_and(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += (i + 1 == items.size()) ? " and " : ", ";
        out += items[i];
    }
    return out;
}

void pad_to(std::string& narrative, std::size_t words, SplitMix64& rng) {
    while (word_count(narrative) < words) {
        narrative += ' ';
        narrative += any(kFiller, rng);
    }
}

}  // namespace

std::vector<CaseRecord> generate_corpus(const CorpusFixtureSpec& spec) {
    SplitMix64 rng(spec.seed);
    const std::size_t total = std::accumulate(spec.literacy.begin(), spec.literacy.end(), std::size_t{0});

    std::vector<std::pair<std::string, std::size_t>> literacy_counts;
    for (std::size_t b = 0; b < spec.literacy.size(); ++b) {
        literacy_counts.emplace_back(std::string(to_string(static_cast<LiteracyBucket>(b))),
                                     spec.literacy[b]);
    }
    const auto literacy = spread(literacy_counts, total, "literacy", rng);
    const auto occupation = spread(spec.occupations, total, "occupation", rng);
    const auto sex = spread(spec.sex, total, "sex", rng);
    const auto marital = spread(spec.marital, total, "marital status", rng);

    std::vector<CaseRecord> out;
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        CaseRecord r;
        char id[24];
        std::snprintf(id, sizeof id, "case-%03zu", i + 1);
        r.id = id;
        r.demographics.age = static_cast<int>(18 + rng.below(45));
        r.demographics.sex = sex[i];
        r.demographics.marital_status = marital[i] == "unspecified" ? "" : marital[i];
        r.demographics.occupation = occupation[i];
        r.demographics.literacy_level = literacy[i];

        r.distress_causes = sample(vocab::kCauseBases, 1 + rng.below(3), rng);
        const auto effects = sample(vocab::kEffectBases, 1 + rng.below(3), rng);
        const auto interventions = sample(vocab::kInterventionBases, 2 + rng.below(3), rng);
        const auto outcomes = sample(vocab::kOutcomeBases, 1 + rng.below(2), rng);
        if (rng.below(2)) r.outcomes = outcomes;

        const int session_count = static_cast<int>(2 + rng.below(5));
        for (int k = 1; k <= session_count; ++k) {
            SessionNote s;
            s.index = k;
            std::string text;
            if (k == 1) {
                text = "Session 1. The client reported " + join_and(r.distress_causes) +
                       " as the main sources of stress, saying \"" + std::string(any(kBanglaPhrases, rng)) +
                       "\". Because of this the client experiences " + join_and(effects) + ".";
                s.emotional_responses = effects;
                s.contextual_factors = sample(kContextFactors, 1 + rng.below(2), rng);
                text += " Contextual factors included " + join_and(s.contextual_factors) + ".";
            } else {
                const auto& given = interventions[static_cast<std::size_t>(k - 2) % interventions.size()];
                s.interventions_given.push_back(given);
                text = "Session " + std::to_string(k) + ". The activity log was reviewed. The para-counselor "
                       "introduced " + given + " and agreed on one small step for the coming week.";
                if (rng.below(2)) {
                    const auto& effect = effects[rng.below(effects.size())];
                    s.emotional_responses.push_back(effect);
                    text += " The client still mentioned " + effect + " (\"" +
                            std::string(any(kBanglaPhrases, rng)) + "\").";
                }
            }
            if (k == session_count) {
                text += " Outcome: the client reported " + join_and(outcomes) +
                        " and built a coping toolbox for future challenges.";
            }
            if (static_cast<double>(rng.below(1000)) < spec.long_session_rate * 1000.0) {
                pad_to(text, 520 + rng.below(400), rng);
            } else {
                pad_to(text, 60 + rng.below(120), rng);
            }
            s.narrative = std::move(text);
            r.sessions.push_back(std::move(s));
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace kgcounsel
