#include "kgcounsel/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "kgcounsel/io.hpp"

namespace kgcounsel {

using nlohmann::json;

EvalSummary evaluate_pairs(const std::vector<ResponsePair>& pairs, EmbeddingProvider& provider) {
    if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "no response pairs to evaluate");
    EvalSummary summary;
    summary.provider = provider.name();
    double f1_sum = 0.0, cos_sum = 0.0;
    for (const auto& p : pairs) {
        PairScore score;
        score.id = p.id;
        score.bert = bertscore(provider.embed_tokens(p.candidate), provider.embed_tokens(p.reference));
        const auto sentences = provider.embed_texts({p.candidate, p.reference});
        score.sbert_cos = sentence_cosine(sentences.at(0), sentences.at(1));
        f1_sum += score.bert.f1;
        cos_sum += score.sbert_cos;
        summary.pairs.push_back(std::move(score));
    }
    const auto n = static_cast<double>(pairs.size());
    summary.bert_f1 = 100.0 * f1_sum / n;
    summary.sbert_cos = cos_sum / n;
    return summary;
}

// ---- names ------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 5> kCategoryNames = {"Wording", "ProblemAnalysis", "Guidance", "Treatment",
                                                            "EnvironmentalAnalysis"};
constexpr std::array<std::string_view, 5> kCategoryTitles = {"Wording", "Problem analysis", "Guidance",
                                                             "Treatment / intervention", "Environmental analysis"};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::size_t idx(RatingCategory c) { return static_cast<std::size_t>(c); }

}  // namespace

std::string_view to_string(EvalMode mode) { return mode == EvalMode::Rag ? "RAG" : "KG"; }

std::string_view to_string(RatingCategory category) { return kCategoryNames[idx(category)]; }

std::optional<EvalMode> parse_eval_mode(std::string_view text) {
    if (iequals(text, "RAG")) return EvalMode::Rag;
    if (iequals(text, "KG")) return EvalMode::Kg;
    return std::nullopt;
}

std::optional<RatingCategory> parse_rating_category(std::string_view text) {
    for (auto c : kAllCategories) {
        if (iequals(text, kCategoryNames[idx(c)])) return c;
    }
    return std::nullopt;
}

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::BertF1: return "bert_f1";
        case Metric::SbertCos: return "sbert_cos";
        case Metric::Human: return "human";
    }
    return "?";
}

// ---- ratings ----------------------------------------------------------------

void HumanRating::validate() const {
    if (rater_id.empty()) throw Error(ErrorCode::InvalidArgument, "rating has no rater_id");
    if (model_id.empty()) throw Error(ErrorCode::InvalidArgument, "rating has no model_id");
    if (value < 1 || value > 5) {
        throw Error(ErrorCode::InvalidArgument, "rating value " + std::to_string(value) + " outside 1..5");
    }
}

json to_json(const HumanRating& r) {
    return {{"rater_id", r.rater_id},
            {"model_id", r.model_id},
            {"mode", std::string(to_string(r.mode))},
            {"category", std::string(to_string(r.category))},
            {"value", r.value}};
}

HumanRating rating_from_json(const json& j) {
    static const std::set<std::string> known = {"rater_id", "model_id", "mode", "category", "value"};
    if (!j.is_object()) throw ParseError("rating must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ParseError("unknown rating field '" + key + "'");
    }
    HumanRating r;
    try {
        r.rater_id = j.at("rater_id").get<std::string>();
        r.model_id = j.at("model_id").get<std::string>();
        const auto mode = parse_eval_mode(j.at("mode").get<std::string>());
        if (!mode) throw ParseError("rating mode must be RAG or KG");
        r.mode = *mode;
        const auto category = parse_rating_category(j.at("category").get<std::string>());
        if (!category) throw ParseError("unknown rating category '" + j.at("category").get<std::string>() + "'");
        r.category = *category;
        const auto& v = j.at("value");
        if (!v.is_number_integer()) throw ParseError("rating value must be an integer 1..5");
        r.value = v.get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed rating: ") + e.what());
    }
    r.validate();
    return r;
}

int mean_tenths(long long sum, long long n) {
    if (n <= 0) throw Error(ErrorCode::InvalidArgument, "mean of zero ratings");
    // floor(10 * sum / n + 1/2) without leaving the integers.
    return static_cast<int>((20 * sum + n) / (2 * n));
}

int overall_tenths(const std::array<int, 5>& category_tenths) {
    long long total = 0;
    for (int t : category_tenths) total += t;
    // floor(total / 5 + 1/2)
    return static_cast<int>((2 * total + 5) / 10);
}

AggregateResult aggregate_ratings(const std::vector<HumanRating>& ratings, const AggregateOptions& options) {
    struct Cell {
        long long sum = 0;
        std::size_t count = 0;
    };
    std::map<std::pair<std::string, int>, std::array<Cell, 5>> groups;
    for (const auto& r : ratings) {
        r.validate();
        auto& cell = groups[{r.model_id, static_cast<int>(r.mode)}][idx(r.category)];
        cell.sum += r.value;
        ++cell.count;
    }

    AggregateResult result;
    std::vector<std::string> missing;
    for (const auto& [key, cells] : groups) {
        const auto mode = static_cast<EvalMode>(key.second);
        std::vector<std::string> absent;
        for (auto c : kAllCategories) {
            if (cells[idx(c)].count == 0) {
                absent.push_back(key.first + "/" + std::string(to_string(mode)) + "/" +
                                 std::string(to_string(c)));
            }
        }
        if (!absent.empty()) {
            missing.insert(missing.end(), absent.begin(), absent.end());
            continue;
        }
        CategoryAverages avg;
        avg.model_id = key.first;
        avg.mode = mode;
        for (auto c : kAllCategories) {
            avg.category_tenths[idx(c)] =
                mean_tenths(cells[idx(c)].sum, static_cast<long long>(cells[idx(c)].count));
            avg.rating_counts[idx(c)] = cells[idx(c)].count;
        }
        avg.overall_tenths = overall_tenths(avg.category_tenths);
        result.rows.push_back(std::move(avg));
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        if (!options.skip_incomplete) throw Error(ErrorCode::MissingCategory, "missing ratings for " + list);
        for (const auto& m : missing) result.warnings.push_back("skipped incomplete group: no ratings for " + m);
    }
    return result;
}

RatingLog::RatingLog(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(*path_)) return;
    std::istringstream in(read_file(*path_));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const HumanRating r = rating_from_json(json::parse(line));
            latest_[{r.rater_id, r.model_id, static_cast<int>(r.mode), static_cast<int>(r.category)}] = r;
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
}

void RatingLog::submit(const std::vector<HumanRating>& ratings) {
    for (const auto& r : ratings) r.validate();
    std::lock_guard lock(mutex_);
    if (path_) {
        std::string lines;
        for (const auto& r : ratings) lines += to_json(r).dump() + "\n";
        append_file(*path_, lines);
    }
    for (const auto& r : ratings) {
        latest_[{r.rater_id, r.model_id, static_cast<int>(r.mode), static_cast<int>(r.category)}] = r;
    }
}

std::vector<HumanRating> RatingLog::current() const {
    std::lock_guard lock(mutex_);
    std::vector<HumanRating> out;
    out.reserve(latest_.size());
    for (const auto& [_, r] : latest_) out.push_back(r);
    return out;
}

std::size_t RatingLog::size() const {
    std::lock_guard lock(mutex_);
    return latest_.size();
}

// ---- score tables -----------------------------------------------------------

std::optional<double> ScoreRow::value(Metric metric) const {
    switch (metric) {
        case Metric::BertF1: return bert_f1;
        case Metric::SbertCos: return sbert_cos;
        case Metric::Human: return human_avg;
    }
    return std::nullopt;
}

void ScoreRow::validate() const {
    if (model_id.empty()) throw Error(ErrorCode::InvalidArgument, "score row has no model_id");
    auto pct = [&](const char* name, double v) {
        if (!(v >= 0.0 && v <= 100.0)) {
            throw Error(ErrorCode::InvalidArgument, model_id + ": " + name + " outside [0, 100]");
        }
    };
    pct("bert_f1", bert_f1);
    pct("sbert_cos", sbert_cos);
    if (human_avg && !(*human_avg >= 1.0 && *human_avg <= 5.0)) {
        throw Error(ErrorCode::InvalidArgument, model_id + ": human average outside [1, 5]");
    }
}

long long to_hundredths(double value) { return std::llround(value * 100.0); }

std::vector<ComparisonRow> compare_modes(const std::vector<ScoreRow>& rag_rows,
                                         const std::vector<ScoreRow>& kg_rows) {
    auto index = [](const std::vector<ScoreRow>& rows, const char* side) {
        std::map<std::string, const ScoreRow*> out;
        for (const auto& r : rows) {
            r.validate();
            if (!out.emplace(r.model_id, &r).second) {
                throw Error(ErrorCode::InvalidArgument, std::string("duplicate ") + side + " row for " + r.model_id);
            }
        }
        return out;
    };
    const auto rag = index(rag_rows, "RAG");
    const auto kg = index(kg_rows, "KG");

    std::vector<std::string> unmatched;
    for (const auto& [id, _] : rag) {
        if (!kg.count(id)) unmatched.push_back(id + " (no KG row)");
    }
    for (const auto& [id, _] : kg) {
        if (!rag.count(id)) unmatched.push_back(id + " (no RAG row)");
    }
    if (!unmatched.empty()) {
        std::string list;
        for (const auto& u : unmatched) list += (list.empty() ? "" : ", ") + u;
        throw Error(ErrorCode::UnmatchedModel, "unmatched models: " + list);
    }

    std::vector<ComparisonRow> out;
    for (const auto& [id, r] : rag) {
        const ScoreRow* k = kg.at(id);
        for (auto metric : {Metric::BertF1, Metric::SbertCos, Metric::Human}) {
            const auto before = r->value(metric);
            const auto after = k->value(metric);
            if (!before || !after) continue;
            ComparisonRow row;
            row.model_id = id;
            row.metric = metric;
            row.rag_value = *before;
            row.kg_value = *after;
            row.delta_hundredths = to_hundredths(*after) - to_hundredths(*before);
            row.improved = metric == Metric::Human ? row.delta_hundredths < 0 : row.delta_hundredths > 0;
            out.push_back(std::move(row));
        }
    }
    return out;
}

std::vector<ComparisonRow> compare_human(const std::vector<CategoryAverages>& averages) {
    std::map<std::string, std::pair<const CategoryAverages*, const CategoryAverages*>> by_model;
    for (const auto& a : averages) {
        auto& slot = by_model[a.model_id];
        (a.mode == EvalMode::Rag ? slot.first : slot.second) = &a;
    }
    std::vector<ComparisonRow> out;
    for (const auto& [id, pair] : by_model) {
        if (!pair.first || !pair.second) continue;
        ComparisonRow row;
        row.model_id = id;
        row.metric = Metric::Human;
        row.rag_value = pair.first->overall();
        row.kg_value = pair.second->overall();
        row.delta_hundredths = 10LL * (pair.second->overall_tenths - pair.first->overall_tenths);
        row.improved = row.delta_hundredths < 0;
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<std::string> Shortlist::models() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& id) {
        if (!id.empty() && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    };
    add(best_bert_f1);
    add(best_sbert_cos);
    for (const auto& id : top) add(id);
    return out;
}

Shortlist shortlist(const std::vector<ScoreRow>& rows, const ShortlistCriteria& criteria) {
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "cannot shortlist from zero rows");

    // a ranks before b on `metric`; rows lacking the metric rank last.
    auto before = [](Metric metric) {
        return [metric](const ScoreRow* a, const ScoreRow* b) {
            const auto va = a->value(metric), vb = b->value(metric);
            if (va.has_value() != vb.has_value()) return va.has_value();
            if (va && *va != *vb) return metric == Metric::Human ? *va < *vb : *va > *vb;
            return a->model_id < b->model_id;
        };
    };
    std::vector<const ScoreRow*> all;
    for (const auto& r : rows) all.push_back(&r);

    Shortlist s;
    s.best_bert_f1 = (*std::min_element(all.begin(), all.end(), before(Metric::BertF1)))->model_id;
    s.best_sbert_cos = (*std::min_element(all.begin(), all.end(), before(Metric::SbertCos)))->model_id;

    std::vector<const ScoreRow*> candidates;
    if (criteria.one_per_family) {
        std::map<std::string, const ScoreRow*> best;
        for (const ScoreRow* r : all) {
            const std::string& family = r->family.empty() ? r->model_id : r->family;
            auto [it, inserted] = best.emplace(family, r);
            if (!inserted && before(criteria.rank_by)(r, it->second)) it->second = r;
        }
        for (const auto& [_, r] : best) candidates.push_back(r);
    } else {
        candidates = all;
    }
    std::sort(candidates.begin(), candidates.end(), before(criteria.rank_by));
    for (const ScoreRow* r : candidates) {
        if (s.top.size() == criteria.top_n) break;
        if (r->value(criteria.rank_by)) s.top.push_back(r->model_id);
    }
    return s;
}

// ---- formatting -------------------------------------------------------------

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

std::string format_hundredths(long long hundredths, bool sign) {
    const long long a = hundredths < 0 ? -hundredths : hundredths;
    char buf[48];
    const char* prefix = hundredths < 0 ? "-" : (sign && hundredths > 0 ? "+" : "");
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", prefix, a / 100, a % 100);
    return buf;
}

namespace {

std::string format_tenths(long long tenths, bool sign) {
    const long long a = tenths < 0 ? -tenths : tenths;
    char buf[48];
    const char* prefix = tenths < 0 ? "-" : (sign && tenths > 0 ? "+" : "");
    std::snprintf(buf, sizeof buf, "%s%lld.%lld", prefix, a / 10, a % 10);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string lpad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string metric_title(Metric m) {
    switch (m) {
        case Metric::BertF1: return "BERT F1";
        case Metric::SbertCos: return "SBERT";
        case Metric::Human: return "Human";
    }
    return "?";
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

const CategoryAverages* find_human(const std::vector<CategoryAverages>& human, const std::string& model,
                                   EvalMode mode) {
    for (const auto& h : human) {
        if (h.model_id == model && h.mode == mode) return &h;
    }
    return nullptr;
}

// Human averages from the ratings fill rows that do not carry their own.
std::vector<ScoreRow> with_human(std::vector<ScoreRow> rows, const std::vector<CategoryAverages>& human) {
    for (auto& r : rows) {
        if (r.human_avg) continue;
        if (const auto* h = find_human(human, r.model_id, r.mode)) r.human_avg = h->overall();
    }
    return rows;
}

}  // namespace

Report render_report(const ReportInputs& inputs) {
    Report report;
    const auto rag_rows = with_human(inputs.rag_rows, inputs.human);
    const auto kg_rows = with_human(inputs.kg_rows, inputs.human);
    const auto comparisons = compare_modes(rag_rows, kg_rows);
    std::ostringstream t;

    // Automated scores for every model.
    t << "Automated evaluation (all models)\n";
    t << pad("Model", 20) << pad("Family", 10) << lpad("BERT F1", 9) << lpad("SBERT", 9) << "\n";
    for (const auto& r : inputs.all_rows) {
        t << pad(r.model_id, 20) << pad(r.family, 10) << lpad(format_fixed(r.bert_f1, 2), 9)
          << lpad(format_fixed(r.sbert_cos, 2), 9) << "\n";
    }
    std::optional<Shortlist> picks;
    if (!inputs.all_rows.empty()) {
        picks = shortlist(inputs.all_rows);
        auto value_of = [&](const std::string& id, Metric m) {
            for (const auto& r : inputs.all_rows) {
                if (r.model_id == id) return format_fixed(*r.value(m), 2);
            }
            return std::string("?");
        };
        t << "Best BERT F1: " << picks->best_bert_f1 << " (" << value_of(picks->best_bert_f1, Metric::BertF1)
          << ")\n";
        t << "Best SBERT: " << picks->best_sbert_cos << " (" << value_of(picks->best_sbert_cos, Metric::SbertCos)
          << ")\n";
        t << "Shortlist:";
        for (const auto& id : picks->top) t << " " << id;
        t << "\n";
    }
    t << "\n";

    // RAG vs KG per metric.
    t << "RAG vs knowledge-graph grounding\n";
    t << pad("Model", 20) << pad("Metric", 9) << lpad("RAG", 8) << lpad("KG", 8) << lpad("Delta", 8) << "  Improved\n";
    for (const auto& c : comparisons) {
        t << pad(c.model_id, 20) << pad(metric_title(c.metric), 9) << lpad(format_fixed(c.rag_value, 2), 8)
          << lpad(format_fixed(c.kg_value, 2), 8) << lpad(format_hundredths(c.delta_hundredths, true), 8) << "  "
          << (c.improved ? "yes" : "no") << "\n";
    }
    std::set<std::string> compared_models;
    for (const auto& r : rag_rows) compared_models.insert(r.model_id);
    for (const auto& id : compared_models) {
        const bool has_human = std::any_of(comparisons.begin(), comparisons.end(), [&](const ComparisonRow& c) {
            return c.model_id == id && c.metric == Metric::Human;
        });
        if (!has_human) t << pad(id, 20) << pad("Human", 9) << lpad("absent", 8) << "\n";
    }
    t << "\n";

    // Category-level human scores.
    t << "Category-level human scores (lower is better)\n";
    std::vector<std::string> rated_models;
    for (const auto& h : inputs.human) {
        if (std::find(rated_models.begin(), rated_models.end(), h.model_id) == rated_models.end()) {
            rated_models.push_back(h.model_id);
        }
    }
    if (rated_models.empty()) t << "Human ratings: absent\n";
    for (const auto& id : rated_models) {
        const auto* rag = find_human(inputs.human, id, EvalMode::Rag);
        const auto* kg = find_human(inputs.human, id, EvalMode::Kg);
        t << id << "\n";
        t << "  " << pad("Category", 26) << lpad("RAG", 6) << lpad("KG", 6) << lpad("Delta", 7) << "\n";
        auto line = [&](const std::string& name, std::optional<int> a, std::optional<int> b) {
            t << "  " << pad(name, 26) << lpad(a ? format_tenths(*a, false) : "-", 6)
              << lpad(b ? format_tenths(*b, false) : "-", 6)
              << lpad(a && b ? format_tenths(*b - *a, true) : "-", 7) << "\n";
        };
        for (auto c : kAllCategories) {
            line(std::string(kCategoryTitles[idx(c)]),
                 rag ? std::optional<int>(rag->category_tenths[idx(c)]) : std::nullopt,
                 kg ? std::optional<int>(kg->category_tenths[idx(c)]) : std::nullopt);
        }
        line("Average", rag ? std::optional<int>(rag->overall_tenths) : std::nullopt,
             kg ? std::optional<int>(kg->overall_tenths) : std::nullopt);
    }
    report.tables = t.str();

    // Plot data.
    std::string scatter = "model,family,sbert_cos,bert_f1\n";
    for (const auto& r : inputs.all_rows) {
        scatter += csv_field(r.model_id) + "," + csv_field(r.family) + "," + format_fixed(r.sbert_cos, 2) + "," +
                   format_fixed(r.bert_f1, 2) + "\n";
    }
    report.scatter_csv = std::move(scatter);
    std::string paired = "model,metric,rag,kg,delta\n";
    for (const auto& c : comparisons) {
        paired += csv_field(c.model_id) + "," + std::string(to_string(c.metric)) + "," +
                  format_fixed(c.rag_value, 2) + "," + format_fixed(c.kg_value, 2) + "," +
                  format_hundredths(c.delta_hundredths, true) + "\n";
    }
    report.paired_csv = std::move(paired);
    std::string categories = "model,category,rag,kg,delta\n";
    for (const auto& id : rated_models) {
        const auto* rag = find_human(inputs.human, id, EvalMode::Rag);
        const auto* kg = find_human(inputs.human, id, EvalMode::Kg);
        if (!rag || !kg) continue;
        for (auto c : kAllCategories) {
            const int a = rag->category_tenths[idx(c)], b = kg->category_tenths[idx(c)];
            categories += csv_field(id) + "," + std::string(to_string(c)) + "," + format_tenths(a, false) + "," +
                          format_tenths(b, false) + "," + format_tenths(b - a, true) + "\n";
        }
    }
    report.category_csv = std::move(categories);

    // Machine-readable results.
    json rows = json::array();
    for (const auto& r : inputs.all_rows) rows.push_back(to_json(r));
    for (const auto& r : rag_rows) rows.push_back(to_json(r));
    for (const auto& r : kg_rows) rows.push_back(to_json(r));
    json comps = json::array();
    for (const auto& c : comparisons) {
        comps.push_back(to_json(c));
    }
    json human = json::array();
    for (const auto& h : inputs.human) human.push_back(to_json(h));
    report.results = {{"rows", std::move(rows)},
                      {"comparisons", std::move(comps)},
                      {"human", std::move(human)},
                      {"meta", {{"provider", inputs.provider}, {"template_version", inputs.template_version}}}};
    if (picks) {
        report.results["shortlist"] = {{"best_bert_f1", picks->best_bert_f1},
                                       {"best_sbert_cos", picks->best_sbert_cos},
                                       {"top", picks->top}};
    }
    return report;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
    write_file(dir / "results.json", report.results.dump(2) + "\n");
    write_file(dir / "tables.txt", report.tables);
    write_file(dir / "scatter.csv", report.scatter_csv);
    write_file(dir / "paired.csv", report.paired_csv);
    write_file(dir / "categories.csv", report.category_csv);
}

// ---- fixtures ---------------------------------------------------------------

json to_json(const ScoreRow& r) {
    json j = {{"model_id", r.model_id},         {"family", r.family},       {"mode", std::string(to_string(r.mode))},
              {"bert_f1", r.bert_f1},           {"sbert_cos", r.sbert_cos}, {"provider", r.provider}};
    j["human_avg"] = r.human_avg ? json(*r.human_avg) : json(nullptr);
    return j;
}

ScoreRow score_row_from_json(const json& j) {
    try {
        ScoreRow r;
        r.model_id = j.at("model_id").get<std::string>();
        r.family = j.value("family", std::string());
        const auto mode = parse_eval_mode(j.value("mode", std::string("RAG")));
        if (!mode) throw ParseError("score row mode must be RAG or KG");
        r.mode = *mode;
        r.bert_f1 = j.at("bert_f1").get<double>();
        r.sbert_cos = j.at("sbert_cos").get<double>();
        if (j.contains("human_avg") && !j.at("human_avg").is_null()) r.human_avg = j.at("human_avg").get<double>();
        r.provider = j.value("provider", std::string());
        r.validate();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed score row: ") + e.what());
    }
}

std::vector<ScoreRow> load_score_rows(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    const json& list = doc.is_object() ? doc.at("rows") : doc;
    std::vector<ScoreRow> rows;
    for (const auto& j : list) rows.push_back(score_row_from_json(j));
    return rows;
}

json to_json(const ComparisonRow& c) {
    return {{"model_id", c.model_id},
            {"metric", std::string(to_string(c.metric))},
            {"rag", c.rag_value},
            {"kg", c.kg_value},
            {"delta", format_hundredths(c.delta_hundredths, true)},
            {"improved", c.improved}};
}

json to_json(const CategoryAverages& avg) {
    json categories = json::object();
    for (auto c : kAllCategories) {
        categories[std::string(to_string(c))] = avg.category_tenths[idx(c)] / 10.0;
    }
    return {{"model_id", avg.model_id},
            {"mode", std::string(to_string(avg.mode))},
            {"categories", std::move(categories)},
            {"overall", avg.overall_tenths / 10.0}};
}

CategoryAverages category_averages_from_json(const json& j) {
    try {
        CategoryAverages avg;
        avg.model_id = j.at("model_id").get<std::string>();
        const auto mode = parse_eval_mode(j.at("mode").get<std::string>());
        if (!mode) throw ParseError("mode must be RAG or KG");
        avg.mode = *mode;
        const auto& cats = j.at("categories");
        for (auto c : kAllCategories) {
            const std::string name(to_string(c));
            if (!cats.contains(name)) {
                throw Error(ErrorCode::MissingCategory, avg.model_id + " lacks category " + name);
            }
            avg.category_tenths[idx(c)] = static_cast<int>(std::llround(cats.at(name).get<double>() * 10.0));
        }
        avg.overall_tenths = overall_tenths(avg.category_tenths);
        return avg;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed category averages: ") + e.what());
    }
}

}  // namespace kgcounsel
