#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "kgcounsel/embedding.hpp"

namespace kgcounsel {

// ---- automated metrics ------------------------------------------------------

struct BertScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Greedy-matching BERTScore without IDF weighting or baseline rescaling.
// Rows are token embeddings. Pair similarities use the same single-sqrt
// kernel as cosine(), so identical matrices score exactly 1.
template <typename DerivedC, typename DerivedR>
BertScore bertscore(const Eigen::MatrixBase<DerivedC>& candidate, const Eigen::MatrixBase<DerivedR>& reference) {
    using Scalar = typename DerivedC::Scalar;
    if (candidate.rows() == 0 || reference.rows() == 0) {
        throw Error(ErrorCode::EmptyMatrix, "BERTScore needs at least one token on each side");
    }
    if (candidate.cols() != reference.cols()) {
        throw Error(ErrorCode::DimMismatch, "BERTScore: token dimension " + std::to_string(candidate.cols()) +
                                                " vs " + std::to_string(reference.cols()));
    }
    // Every similarity goes through row.dot(row) so that a token matched
    // against itself yields x / sqrt(x * x) == 1 exactly; a GEMM could sum in
    // a different order than the norms and land one ulp short.
    const Eigen::Index n = candidate.rows(), m = reference.rows();
    Vector<Scalar> cc(n), rr(m);
    for (Eigen::Index i = 0; i < n; ++i) cc[i] = candidate.row(i).dot(candidate.row(i));
    for (Eigen::Index j = 0; j < m; ++j) rr[j] = reference.row(j).dot(reference.row(j));
    if ((cc.array() == Scalar(0)).any() || (rr.array() == Scalar(0)).any()) {
        throw Error(ErrorCode::ZeroVector, "BERTScore: zero token embedding");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sim(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const Scalar c = candidate.row(i).dot(reference.row(j)) / std::sqrt(cc[i] * rr[j]);
            sim(i, j) = std::clamp(c, Scalar(-1), Scalar(1));
        }
    }

    BertScore s;
    s.precision = static_cast<double>(sim.rowwise().maxCoeff().mean());
    s.recall = static_cast<double>(sim.colwise().maxCoeff().mean());
    const double sum = s.precision + s.recall;
    s.f1 = sum == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / sum;
    return s;
}

// Sentence-level cosine as a percentage.
template <typename DerivedA, typename DerivedB>
double sentence_cosine(const Eigen::MatrixBase<DerivedA>& candidate, const Eigen::MatrixBase<DerivedB>& reference) {
    return 100.0 * static_cast<double>(cosine(candidate, reference));
}

struct ResponsePair {
    std::string id;
    std::string candidate;
    std::string reference;
};

struct PairScore {
    std::string id;
    BertScore bert;
    double sbert_cos = 0.0;  // percent
};

struct EvalSummary {
    std::string provider;
    std::vector<PairScore> pairs;
    double bert_f1 = 0.0;    // mean F1, percent
    double sbert_cos = 0.0;  // mean cosine, percent
};

// Scores every pair with the provider's token and sentence embeddings.
// Throws InvalidArgument for no pairs, EmptyMatrix for a text without tokens.
EvalSummary evaluate_pairs(const std::vector<ResponsePair>& pairs, EmbeddingProvider& provider);

// ---- human ratings ----------------------------------------------------------

enum class EvalMode { Rag, Kg };
enum class RatingCategory { Wording, ProblemAnalysis, Guidance, Treatment, EnvironmentalAnalysis };

inline constexpr std::array<RatingCategory, 5> kAllCategories = {
    RatingCategory::Wording, RatingCategory::ProblemAnalysis, RatingCategory::Guidance, RatingCategory::Treatment,
    RatingCategory::EnvironmentalAnalysis};

std::string_view to_string(EvalMode mode);          // "RAG" / "KG"
std::string_view to_string(RatingCategory category);  // "Wording", "ProblemAnalysis", ...
std::optional<EvalMode> parse_eval_mode(std::string_view text);  // case-insensitive
std::optional<RatingCategory> parse_rating_category(std::string_view text);

// One rater's integer Likert score, 1 = best, 5 = worst.
struct HumanRating {
    std::string rater_id;
    std::string model_id;
    EvalMode mode = EvalMode::Rag;
    RatingCategory category = RatingCategory::Wording;
    int value = 1;

    void validate() const;  // throws InvalidArgument
    bool operator==(const HumanRating&) const = default;
};

nlohmann::json to_json(const HumanRating& rating);
HumanRating rating_from_json(const nlohmann::json& j);  // throws ParseError, InvalidArgument

// Means are kept as exact integer tenths, rounded half-up.
struct CategoryAverages {
    std::string model_id;
    EvalMode mode = EvalMode::Rag;
    std::array<int, 5> category_tenths{};
    std::array<std::size_t, 5> rating_counts{};
    int overall_tenths = 0;

    double category(RatingCategory c) const { return category_tenths[static_cast<std::size_t>(c)] / 10.0; }
    double overall() const { return overall_tenths / 10.0; }
};

// round_half_up(sum / n, 1 decimal) in tenths.
int mean_tenths(long long sum, long long n);
// round_half_up(mean of the five category means, 1 decimal) in tenths.
int overall_tenths(const std::array<int, 5>& category_tenths);

struct AggregateOptions {
    // Drop (model, mode) groups with missing categories instead of failing.
    bool skip_incomplete = false;
};

struct AggregateResult {
    std::vector<CategoryAverages> rows;  // sorted by (model id, mode)
    std::vector<std::string> warnings;
};

// Throws MissingCategory naming every absent (model, mode, category) cell.
AggregateResult aggregate_ratings(const std::vector<HumanRating>& ratings, const AggregateOptions& options = {});

// Append-only ratings store; a later rating for the same (rater, model, mode,
// category) replaces the earlier one. Persists as JSON Lines when given a path.
class RatingLog {
public:
    RatingLog() = default;
    explicit RatingLog(std::filesystem::path path);  // loads existing lines

    void submit(const std::vector<HumanRating>& ratings);  // validates all first
    std::vector<HumanRating> current() const;               // key order
    std::size_t size() const;

private:
    using Key = std::tuple<std::string, std::string, int, int>;
    mutable std::mutex mutex_;
    std::optional<std::filesystem::path> path_;
    std::map<Key, HumanRating> latest_;
};

// ---- score tables -----------------------------------------------------------

enum class Metric { BertF1, SbertCos, Human };
std::string_view to_string(Metric metric);  // "bert_f1", "sbert_cos", "human"

struct ScoreRow {
    std::string model_id;
    std::string family;
    EvalMode mode = EvalMode::Rag;
    double bert_f1 = 0.0;    // percent
    double sbert_cos = 0.0;  // percent
    std::optional<double> human_avg;
    std::string provider;  // embedding provider behind the metrics

    std::optional<double> value(Metric metric) const;
    void validate() const;  // percentages in [0, 100], human in [1, 5]
};

struct ComparisonRow {
    std::string model_id;
    Metric metric = Metric::BertF1;
    double rag_value = 0.0;
    double kg_value = 0.0;
    long long delta_hundredths = 0;  // round(kg, 2) - round(rag, 2)
    bool improved = false;

    double delta() const { return static_cast<double>(delta_hundredths) / 100.0; }
};

long long to_hundredths(double value);
nlohmann::json to_json(const ComparisonRow& row);  // delta as signed 2-decimal text

// Deltas per metric (human only when both sides carry it); improvement is
// higher for BERT/SBERT and lower for human scores. Sorted by model id then
// metric. Throws UnmatchedModel when the model sets differ.
std::vector<ComparisonRow> compare_modes(const std::vector<ScoreRow>& rag_rows, const std::vector<ScoreRow>& kg_rows);

// Human-score rows for every model rated in both modes, from category averages.
std::vector<ComparisonRow> compare_human(const std::vector<CategoryAverages>& averages);

struct ShortlistCriteria {
    Metric rank_by = Metric::SbertCos;
    std::size_t top_n = 4;
    // Rank each family by its best model and take the top families.
    bool one_per_family = true;
};

struct Shortlist {
    std::string best_bert_f1;
    std::string best_sbert_cos;
    std::vector<std::string> top;  // by the criteria, best first

    std::vector<std::string> models() const;  // best picks then top, de-duplicated
};

// Ties break on the lexicographically smaller model id. Throws InvalidArgument for no rows.
Shortlist shortlist(const std::vector<ScoreRow>& rows, const ShortlistCriteria& criteria = {});

// ---- reports ----------------------------------------------------------------

struct ReportInputs {
    std::vector<ScoreRow> all_rows;      // automated scores for every model (RAG)
    std::vector<ScoreRow> rag_rows;      // shortlisted models, RAG
    std::vector<ScoreRow> kg_rows;       // shortlisted models, KG
    std::vector<CategoryAverages> human;  // from aggregate_ratings
    std::string provider;
    std::string template_version;
};

struct Report {
    nlohmann::json results;
    std::string tables;        // plain text
    std::string scatter_csv;   // model,family,sbert_cos,bert_f1
    std::string paired_csv;    // model,metric,rag,kg,delta
    std::string category_csv;  // model,category,rag,kg,delta
};

Report render_report(const ReportInputs& inputs);
void write_report(const Report& report, const std::filesystem::path& dir);

std::string format_fixed(double value, int decimals);
std::string format_hundredths(long long hundredths, bool sign);  // "+0.79", "-4.24"

// Score fixtures: {"rows": [ScoreRow...]} and {"human": [{model_id, mode, categories{...}}]}.
nlohmann::json to_json(const ScoreRow& row);
ScoreRow score_row_from_json(const nlohmann::json& j);
std::vector<ScoreRow> load_score_rows(const std::filesystem::path& path);
nlohmann::json to_json(const CategoryAverages& avg);
CategoryAverages category_averages_from_json(const nlohmann::json& j);  // recomputes overall

}  // namespace kgcounsel
