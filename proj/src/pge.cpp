#include "seqa/pge.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>

namespace seqa {

void GenerationConfig::validate() const {
    if (n < 1) throw ConfigError("n", "n must be at least 1");
    if (m < 1) throw ConfigError("m", "m must be at least 1");
    if (k < 1) throw ConfigError("k", "k must be at least 1");
    if (max_regen < 1) throw ConfigError("max_regen", "max_regen must be at least 1");
    if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau", fmt::format("tau must lie in [0, 1], got {}", tau));
    if (!(batch_threshold_x >= 0.0 && batch_threshold_x <= 100.0))
        throw ConfigError("x", fmt::format("X must lie in [0, 100], got {}", batch_threshold_x));
    if (target_size && *target_size < 1) throw ConfigError("target_size", "target_size must be at least 1");
    if (temperature < 0.0) throw ConfigError("temperature", "temperature must not be negative");
}

json to_json(const GenerationConfig& c) {
    return {{"n", c.n},
            {"m", c.m},
            {"k", c.k},
            {"tau", c.tau},
            {"x", c.batch_threshold_x},
            {"max_regen", c.max_regen},
            {"target_size", c.target_size ? json(*c.target_size) : json(nullptr)},
            {"seed", c.seed},
            {"temperature", c.temperature},
            {"model_id", c.model_id}};
}

GenerationConfig generation_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("generation config must be a JSON object");
    GenerationConfig c;
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "n") c.n = v.get<std::size_t>();
            else if (key == "m") c.m = v.get<std::size_t>();
            else if (key == "k") c.k = v.get<std::size_t>();
            else if (key == "tau") c.tau = v.get<double>();
            else if (key == "x") c.batch_threshold_x = v.get<double>();
            else if (key == "max_regen") c.max_regen = v.get<std::size_t>();
            else if (key == "target_size") c.target_size = v.is_null() ? std::nullopt : std::optional(v.get<std::size_t>());
            else if (key == "seed") c.seed = v.get<std::int64_t>();
            else if (key == "temperature") c.temperature = v.get<double>();
            else if (key == "model_id") c.model_id = v.get<std::string>();
            else throw ConfigError(key, fmt::format("unknown generation setting '{}'", key));
        } catch (const json::exception& e) {
            throw ConfigError(key, fmt::format("bad value for '{}': {}", key, e.what()));
        }
    }
    return c;
}

namespace {

json to_json(const GenerationAttempt& a) {
    json failures = json::array();
    for (const auto& f : a.parse_failures) failures.push_back(seqa::to_json(f));
    json rejected = json::array();
    for (const auto& r : a.rejected) rejected.push_back({{"query", r.query}, {"reasons", r.reasons}});
    return {{"regeneration", a.regeneration},
            {"response_hash", a.response_hash},
            {"parsed", a.parsed},
            {"parse_failures", failures},
            {"rejected", rejected},
            {"similarity", seqa::to_json(a.similarity)}};
}

std::string next_id(const QueryDatabase& db) { return fmt::format("q{:05d}", db.size() + 1); }

double max_sim_against(const Embedding& v, const QueryDatabase& db) {
    double best = -1.0;
    for (const auto& e : db.entries()) best = std::max(best, cosine(v, e.vector));
    return best;
}

}  // namespace

json to_json(const IterationRecord& r) {
    json attempts = json::array();
    for (const auto& a : r.attempts) attempts.push_back(to_json(a));
    return {{"iteration", r.iteration},
            {"representatives", r.representatives},
            {"attempts", attempts},
            {"accepted", r.accepted},
            {"dropped_similar", r.dropped_similar},
            {"regenerations", r.regenerations},
            {"db_size_after", r.db_size_after}};
}

std::vector<json> log_lines(const GenerationLog& log) {
    std::vector<json> out;
    for (const auto& r : log.iterations) out.push_back(to_json(r));
    if (log.abort_reason)
        out.push_back({{"event", "abort"}, {"iteration", log.aborted_at_iteration}, {"reason", *log.abort_reason}});
    return out;
}

GenerationResult run_generation(const SceneGraph& scene, const GenerationConfig& config, ChatProvider& chat,
                                EmbeddingProvider& embedder, const Blocklist& blocklist, Classifier* classifier,
                                const PromptBundle& prompts, const GenerationHooks& hooks) {
    config.validate();
    GenerationResult result{QueryDatabase(embedder.dimension()), {}, {}};
    auto& db = result.db;
    const ChatParams params{config.model_id, config.temperature, config.seed};

    for (std::size_t iteration = 1; iteration <= config.m; ++iteration) {
        if (config.target_size && db.size() >= *config.target_size) break;

        IterationRecord record;
        record.iteration = iteration;
        record.representatives = db.representatives();
        std::vector<std::string> rep_texts;
        for (const auto& id : db.representatives()) rep_texts.push_back(db.at(id).text);

        try {
            Conversation conversation{{Role::System, render_system_prompt(prompts, scene, rep_texts)},
                                      {Role::User, render_user_prompt(prompts, config.n)}};
            std::vector<SituationalDatapoint> valid;
            std::vector<Embedding> vectors;
            for (std::size_t regen = 0;; ++regen) {
                const auto reply = chat.complete(conversation, params);
                conversation.push_back({Role::Assistant, reply.content});

                GenerationAttempt attempt;
                attempt.regeneration = regen;
                attempt.response_hash = text::hex64(text::fnv1a64(reply.content));
                auto parsed = parse_response(reply.content);
                attempt.parsed = parsed.datapoints.size();
                attempt.parse_failures = std::move(parsed.failures);

                valid.clear();
                for (auto& d : parsed.datapoints) {
                    auto verdict = validate(d, scene, blocklist, classifier);
                    if (verdict.accepted())
                        valid.push_back(std::move(d));
                    else
                        attempt.rejected.push_back({d.query, std::move(verdict.reasons)});
                }
                std::vector<std::string> texts;
                for (const auto& d : valid) texts.push_back(d.query);
                vectors = embedder.embed(texts);
                if (vectors.size() != valid.size())
                    throw ProviderError("embedder", "embedding provider returned the wrong number of vectors");
                attempt.similarity = max_similarity(vectors, db, config.tau, config.batch_threshold_x);

                const bool retry = attempt.similarity.exceeds_batch_threshold() && regen < config.max_regen;
                std::vector<std::string> similar;
                for (std::size_t i = 0; i < valid.size(); ++i)
                    if (attempt.similarity.per_query_max_sim[i] > config.tau) similar.push_back(valid[i].query);
                const double percent = attempt.similarity.batch_percent_similar;
                record.attempts.push_back(std::move(attempt));
                record.regenerations = regen;
                if (!retry) break;
                conversation.push_back({Role::User, render_regen_prompt(prompts, percent, config.n, similar)});
            }

            // Gate one by one so later queries are compared against the
            // ones accepted earlier in the same batch.
            for (std::size_t i = 0; i < valid.size(); ++i) {
                if (record.accepted >= config.n) break;
                if (config.target_size && db.size() >= *config.target_size) break;
                if (max_sim_against(vectors[i], db) > config.tau) {
                    ++record.dropped_similar;
                    continue;
                }
                auto& d = valid[i];
                d.id = next_id(db);
                d.provenance.iteration = static_cast<std::int64_t>(iteration);
                d.provenance.model_id = config.model_id;
                d.provenance.regeneration_count = static_cast<std::int64_t>(record.regenerations);
                d.provenance.temperature = config.temperature;
                d.provenance.seed = config.seed;
                db.insert(d.id, d.query, std::move(vectors[i]));
                result.datapoints.push_back(std::move(d));
                ++record.accepted;
            }
            if (record.accepted > 0) db.set_representatives(cluster_representatives(db, config.k));
        } catch (const TranscriptExhausted& e) {
            result.log.abort_reason = e.what();
            result.log.aborted_at_iteration = iteration;
        } catch (const ProviderError& e) {
            result.log.abort_reason = e.what();
            result.log.aborted_at_iteration = iteration;
        }
        if (result.aborted()) break;

        record.db_size_after = db.size();
        if (hooks.on_iteration) hooks.on_iteration(record);
        result.log.iterations.push_back(std::move(record));
    }
    return result;
}

void write_generation_outputs(const std::filesystem::path& dir, const GenerationResult& result,
                              const json& config_snapshot) {
    write_datapoints(dir / "datapoints.jsonl", result.datapoints);
    jsonl::write_file(dir / "generation_log.jsonl", log_lines(result.log));
    write_text_file(dir / "config.json", config_snapshot.dump(2) + "\n");
}

}  // namespace seqa
