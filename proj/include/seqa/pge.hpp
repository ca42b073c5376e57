#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqa/chat.hpp"
#include "seqa/datapoint.hpp"
#include "seqa/embedding.hpp"
#include "seqa/prompts.hpp"
#include "seqa/response_parser.hpp"
#include "seqa/scene_graph.hpp"

namespace seqa {

struct GenerationConfig {
    std::size_t n = 10;            // batch size
    std::size_t m = 200;           // max iterations
    std::size_t k = 10;            // representatives shown to the model
    double tau = 0.90;             // per-query similarity cutoff
    double batch_threshold_x = 30; // percent of similar queries that triggers a regen
    std::size_t max_regen = 3;
    std::optional<std::size_t> target_size;
    std::int64_t seed = 0;
    double temperature = 0.7;
    std::string model_id = "replay";

    /// ConfigError naming the first bad field.
    void validate() const;
};

json to_json(const GenerationConfig& c);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
GenerationConfig generation_config_from_json(const json& j);

struct RejectedDatapoint {
    std::string query;
    std::vector<std::string> reasons;
};

/// One model reply within an iteration: the first prompt or a regen round.
struct GenerationAttempt {
    std::size_t regeneration = 0;
    std::string response_hash;
    std::size_t parsed = 0;
    std::vector<ParseFailure> parse_failures;
    std::vector<RejectedDatapoint> rejected;
    SimilarityReport similarity;
};

struct IterationRecord {
    std::size_t iteration = 0;
    std::vector<std::string> representatives;  // ids injected into the system prompt
    std::vector<GenerationAttempt> attempts;
    std::size_t accepted = 0;
    std::size_t dropped_similar = 0;
    std::size_t regenerations = 0;
    std::size_t db_size_after = 0;
};

struct GenerationLog {
    std::vector<IterationRecord> iterations;
    std::optional<std::string> abort_reason;
    std::size_t aborted_at_iteration = 0;
};

json to_json(const IterationRecord& r);
/// One line per iteration, plus a trailing abort line when the run stopped early.
std::vector<json> log_lines(const GenerationLog& log);

struct GenerationResult {
    QueryDatabase db;
    std::vector<SituationalDatapoint> datapoints;
    GenerationLog log;

    bool aborted() const { return log.abort_reason.has_value(); }
};

struct GenerationHooks {
    std::function<void(const IterationRecord&)> on_iteration;
};

/// The prompt-generate-evaluate loop. Strictly sequential. Provider failures
/// (chat, embedder or classifier) stop the loop and are reported through
/// log.abort_reason; everything accepted so far is kept.
GenerationResult run_generation(const SceneGraph& scene, const GenerationConfig& config, ChatProvider& chat,
                                EmbeddingProvider& embedder, const Blocklist& blocklist, Classifier* classifier,
                                const PromptBundle& prompts = PromptBundle::defaults(), const GenerationHooks& hooks = {});

/// datapoints.jsonl, generation_log.jsonl and config.json under `dir`.
void write_generation_outputs(const std::filesystem::path& dir, const GenerationResult& result,
                              const json& config_snapshot);

}  // namespace seqa
