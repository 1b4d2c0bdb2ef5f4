#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgcounsel/kg_query.hpp"
#include "kgcounsel/retrieval.hpp"
#include "kgcounsel/retry.hpp"

namespace kgcounsel {

enum class GroundingMode { RagOnly, KgGrounded };
std::string_view to_string(GroundingMode mode);
std::optional<GroundingMode> parse_grounding_mode(std::string_view text);  // "rag" | "kg"

struct GenerationParams {
    std::string model_id = "mock";
    double temperature = 0.2;
    std::size_t max_output_tokens = 7960;

    void validate() const;  // 0 <= temperature <= 2, max_output_tokens >= 1
    bool operator==(const GenerationParams&) const = default;
};

struct ContextLimits {
    std::size_t snippets = 3;
    std::size_t interventions = 5;
    std::size_t chains = 10;
    std::size_t general = 8;
};

struct Snippet {
    std::string chunk_id;
    std::string case_id;
    int session_index = 0;
    std::string text;
    double score = 0.0;

    bool operator==(const Snippet&) const = default;
};

struct GroundingContext {
    GroundingMode mode = GroundingMode::RagOnly;
    std::vector<Snippet> snippets;
    std::vector<InterventionSuggestion> interventions;
    std::vector<CausalChain> chains;
    std::vector<InterventionSuggestion> general;
    std::vector<NodeMatch> matches;
    std::map<std::string, std::string> labels;  // node id -> label for every node referenced

    bool empty() const {
        return snippets.empty() && interventions.empty() && chains.empty() && general.empty();
    }
    bool operator==(const GroundingContext&) const = default;
};

// Throws InvariantError when a list exceeds its limit or a RagOnly context carries KG items.
void check_context_limits(const GroundingContext& context, const ContextLimits& limits = {});

// Top-k search hits as snippets, in search order.
GroundingContext assemble_rag_context(std::string_view query, const ChunkIndex& index,
                                      EmbeddingProvider& provider, const SearchOptions& search = {});

// match_nodes -> interventions / chains / general list. Throws EmptyQuery.
GroundingContext assemble_kg_context(std::string_view query, const KnowledgeGraph& graph,
                                     const KgRetrievalConfig& config = {});

// "job loss —CAUSES→ sleep problems"
std::string render_chain(const CausalChain& chain, const std::map<std::string, std::string>& labels);

// ---- prompts ----------------------------------------------------------------

struct PromptTemplate {
    std::string system;  // fixed preamble
    std::string user;    // with {{context}} and {{query}} placeholders
};

class TemplateRegistry {
public:
    // Templates compiled in from data/templates: rag_v1, kg_v1, kg_structure_v1.
    static const TemplateRegistry& builtin();

    // Reads every "<id>.system.txt" / "<id>.user.txt" pair in `dir`.
    static TemplateRegistry load_directory(const std::filesystem::path& dir);

    void add(std::string id, PromptTemplate tpl);
    const PromptTemplate& get(std::string_view id) const;  // throws UnknownTemplate
    bool contains(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

enum class CitationKind { Snippet, Chain, Intervention, General };

struct Citation {
    CitationKind kind;
    std::string ref;      // chunk id, chain fingerprint, or intervention node id
    std::string display;  // short human text shown in the prompt

    bool operator==(const Citation&) const = default;
};

struct PromptBundle {
    std::string template_id;
    GroundingMode mode = GroundingMode::RagOnly;
    std::string system;
    std::string user;
    std::vector<std::pair<std::string, Citation>> citations;  // marker -> citation, render order

    const Citation* find_citation(std::string_view marker) const;
    std::string text() const;  // system + blank line + user
};

// Renders the context block ([S#], [I#], [C#], [G#] markers); empty for an empty context.
std::string render_context_block(const GroundingContext& context);

PromptBundle render_prompt(const GroundingContext& context, std::string_view query,
                           std::string_view template_id,
                           const TemplateRegistry& registry = TemplateRegistry::builtin());

// ---- clients ----------------------------------------------------------------

struct GenerationResult {
    std::string text;
    std::size_t prompt_tokens = 0;
    std::size_t output_tokens = 0;
    std::string finish_reason = "stop";  // "length" when max_output_tokens was hit
};

// Any text generator: hosted chat API, local model, or the deterministic mock.
class GenerationClient {
public:
    virtual ~GenerationClient() = default;
    virtual std::string family() const = 0;
    // Throws ClientError (with status) or TimeoutError.
    virtual GenerationResult generate(const PromptBundle& prompt, const GenerationParams& params,
                                      std::chrono::milliseconds timeout) = 0;
};

// Deterministic given (prompt, params): cites up to four markers found in the
// prompt, tokens are whitespace words. A simulated latency above the timeout
// raises TimeoutError without sleeping.
class MockGenerationClient : public GenerationClient {
public:
    explicit MockGenerationClient(std::chrono::milliseconds simulated_latency = std::chrono::milliseconds{0})
        : latency_(simulated_latency) {}

    std::string family() const override { return "mock"; }
    GenerationResult generate(const PromptBundle& prompt, const GenerationParams& params,
                              std::chrono::milliseconds timeout) override;

private:
    std::chrono::milliseconds latency_;
};

// ---- drafts -----------------------------------------------------------------

using Clock = std::function<std::chrono::system_clock::time_point()>;
Clock system_clock();
Clock fixed_clock(std::chrono::system_clock::time_point at);
std::string format_utc_ms(std::chrono::system_clock::time_point t);  // 2025-01-01T00:00:00.000Z
std::chrono::system_clock::time_point parse_utc(std::string_view text);  // throws InvalidArgument

struct DraftResponse {
    std::string text;
    GroundingMode mode = GroundingMode::RagOnly;
    GenerationParams params;
    std::string template_id;
    std::vector<std::string> cited_chunk_ids;
    std::vector<std::string> cited_chain_fingerprints;
    std::vector<std::string> cited_intervention_ids;
    std::vector<std::string> cited_markers;
    std::string created_at;
    long long model_latency_ms = 0;
    bool truncated = false;
    std::size_t prompt_tokens = 0;
    std::size_t output_tokens = 0;
    int retries = 0;
    int stages = 1;
};

struct DraftOptions {
    RetryPolicy retry{};
    std::chrono::milliseconds timeout{60000};
    SleepFn sleep = real_sleep;
    Clock clock = system_clock();
};

// Markers "[S1]" etc. in order of first appearance.
std::vector<std::string> extract_markers(std::string_view text);

// Retries 5xx/transport ClientErrors and timeouts per the policy. Citations
// are markers in the output that the prompt actually defined.
DraftResponse generate_draft(GenerationClient& client, const PromptBundle& prompt,
                             const GenerationParams& params, const DraftOptions& options = {});

// Stage 1 condenses the KG evidence with `structure_params`; stage 2 drafts
// with `params` from the context plus the stage-1 summary.
DraftResponse generate_two_stage_draft(GenerationClient& client, const GroundingContext& context,
                                       std::string_view query, const GenerationParams& structure_params,
                                       const GenerationParams& params, const DraftOptions& options = {},
                                       std::string_view structure_template = "kg_structure_v1",
                                       std::string_view draft_template = "kg_v1",
                                       const TemplateRegistry& registry = TemplateRegistry::builtin());

// Runs drafts with at most `max_in_flight` concurrent client calls; output
// order matches input order. The client must tolerate concurrent calls.
std::vector<DraftResponse> generate_drafts(GenerationClient& client, const std::vector<PromptBundle>& prompts,
                                           const GenerationParams& params, const DraftOptions& options,
                                           std::size_t max_in_flight);

// Append-only JSON Lines log; safe to share between threads.
class DraftLog {
public:
    explicit DraftLog(std::filesystem::path path) : path_(std::move(path)) {}
    void append(const DraftResponse& draft, std::string_view query = {});
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

nlohmann::json to_json(const GenerationParams& params);
nlohmann::json to_json(const InterventionSuggestion& s, const std::map<std::string, std::string>& labels);
nlohmann::json to_json(const GroundingContext& context);
nlohmann::json to_json(const DraftResponse& draft);

}  // namespace kgcounsel
