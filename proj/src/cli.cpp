#include "seqa/cli.hpp"

#include "seqa/analysis.hpp"
#include "seqa/annotation_server.hpp"
#include "seqa/annotation_store.hpp"
#include "seqa/chat.hpp"
#include "seqa/classifier.hpp"
#include "seqa/decomposition.hpp"
#include "seqa/embedding.hpp"
#include "seqa/errors.hpp"
#include "seqa/evaluation.hpp"
#include "seqa/pge.hpp"
#include "seqa/version.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace seqa::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path, fmt::format("{} is not valid JSON: {}", path, e.what()));
    }
    if (!j.is_object()) throw ConfigError(path, fmt::format("{} must hold a JSON object", path));
    return j;
}

std::string string_at(const json& j, const char* key, std::string fallback = {}) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    if (!j[key].is_string()) throw ConfigError(key, fmt::format("config key '{}' must be a string", key));
    return j[key].get<std::string>();
}

// --- chat backend -----------------------------------------------------------

struct ChatSettings {
    std::string replay;
    std::string endpoint;
    std::string debug_dir;

    json to_json() const {
        if (!replay.empty()) return {{"backend", "replay"}, {"replay", replay}};
        if (!endpoint.empty()) return {{"backend", "http"}, {"endpoint", endpoint}};
        return {{"backend", "none"}};
    }
};

struct ChatFlags {
    std::string replay;
    std::string endpoint;
};

void add_chat_flags(CLI::App* cmd, ChatFlags& flags, const std::string& prefix, const std::string& what) {
    auto* replay = cmd->add_option(fmt::format("--{}replay", prefix), flags.replay,
                                   fmt::format("{} from a replay transcript (JSONL)", what));
    auto* endpoint = cmd->add_option(fmt::format("--{}endpoint", prefix.empty() ? "chat-" : prefix), flags.endpoint,
                                     fmt::format("{} from an OpenAI-compatible chat endpoint", what));
    replay->excludes(endpoint);
}

ChatSettings merge_chat(const json& config_section, const ChatFlags& flags) {
    ChatSettings s;
    if (!config_section.is_null()) {
        const auto backend = string_at(config_section, "backend", "none");
        if (backend == "replay") s.replay = string_at(config_section, "replay");
        else if (backend == "http") s.endpoint = string_at(config_section, "endpoint");
        else if (backend != "none") throw ConfigError("chat", fmt::format("unknown chat backend '{}'", backend));
    }
    if (!flags.replay.empty()) s = ChatSettings{flags.replay, {}, {}};
    if (!flags.endpoint.empty()) s = ChatSettings{{}, flags.endpoint, {}};
    return s;
}

struct ChatBackend {
    std::unique_ptr<ChatProvider> provider;
    ReplayChatProvider* replay = nullptr;
};

ChatBackend make_chat(const ChatSettings& s) {
    ChatBackend b;
    if (!s.replay.empty()) {
        // from_file returns a prvalue; `new` keeps the non-movable provider in place.
        std::unique_ptr<ReplayChatProvider> p(new ReplayChatProvider(ReplayChatProvider::from_file(s.replay)));
        b.replay = p.get();
        b.provider = std::move(p);
    } else if (!s.endpoint.empty()) {
        HttpChatConfig cfg;
        cfg.endpoint = s.endpoint;
        if (!s.debug_dir.empty()) cfg.debug_dir = s.debug_dir;
        b.provider = std::make_unique<HttpChatProvider>(cfg);
    }
    return b;
}

// --- embedding backend ------------------------------------------------------

struct EmbedSettings {
    std::string backend = "hashed";
    std::size_t dimension = 256;
    std::uint64_t seed = 0;
    std::string cache;
    std::string endpoint;
    std::string model;

    json to_json() const {
        if (backend == "cache") return {{"backend", backend}, {"path", cache}};
        if (backend == "http")
            return {{"backend", backend}, {"endpoint", endpoint}, {"model", model}, {"dimension", dimension}};
        return {{"backend", backend}, {"dimension", dimension}, {"seed", seed}};
    }
};

struct EmbedFlags {
    std::string cache;
    std::string endpoint;
    std::string model;
    std::optional<std::size_t> dimension;
    std::optional<std::uint64_t> seed;
};

void add_embed_flags(CLI::App* cmd, EmbedFlags& flags) {
    auto* cache = cmd->add_option("--embed-cache", flags.cache, "serve embeddings from a {id,text,vector} JSONL cache");
    auto* endpoint = cmd->add_option("--embed-endpoint", flags.endpoint, "OpenAI-compatible embeddings endpoint");
    cache->excludes(endpoint);
    cmd->add_option("--embed-model", flags.model, "model name sent to the embeddings endpoint");
    cmd->add_option("--embed-dim", flags.dimension, "embedding dimension (hashed default 256)");
    cmd->add_option("--embed-seed", flags.seed, "hashed embedder seed");
}

EmbedSettings merge_embed(const json& section, const EmbedFlags& flags) {
    EmbedSettings s;
    if (!section.is_null()) {
        s.backend = string_at(section, "backend", "hashed");
        s.cache = string_at(section, "path");
        s.endpoint = string_at(section, "endpoint");
        s.model = string_at(section, "model");
        s.dimension = section.value("dimension", s.dimension);
        s.seed = section.value("seed", s.seed);
    }
    if (!flags.cache.empty()) {
        s.backend = "cache";
        s.cache = flags.cache;
    }
    if (!flags.endpoint.empty()) {
        s.backend = "http";
        s.endpoint = flags.endpoint;
    }
    if (!flags.model.empty()) s.model = flags.model;
    if (flags.dimension) s.dimension = *flags.dimension;
    if (flags.seed) s.seed = *flags.seed;
    if (s.backend != "hashed" && s.backend != "cache" && s.backend != "http")
        throw ConfigError("embedding", fmt::format("unknown embedding backend '{}'", s.backend));
    return s;
}

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedSettings& s) {
    if (s.backend == "cache") return std::make_unique<CachedEmbeddingProvider>(s.cache);
    if (s.backend == "http") {
        if (s.model.empty()) throw UsageError("--embed-model is required with --embed-endpoint");
        HttpEmbeddingConfig cfg;
        cfg.endpoint = s.endpoint;
        cfg.model = s.model;
        cfg.dimension = s.dimension;
        return std::make_unique<HttpEmbeddingProvider>(cfg);
    }
    return std::make_unique<HashedBagOfWordsEmbedder>(s.dimension, s.seed);
}

// --- shared pieces ----------------------------------------------------------

std::vector<std::string> parse_synonyms(const std::string& csv) {
    std::vector<std::string> out;
    for (const auto& s : text::split(csv, ',')) {
        const auto t = text::to_lower(text::trim(s));
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

constexpr const char* kDefaultSynonyms = "table,chair";

struct Classifiers {
    ChatBackend backend;
    std::unique_ptr<LlmClassifier> classifier;
    Classifier* get() const { return classifier.get(); }
};

Classifiers make_classifier(const ChatSettings& s, const std::string& model) {
    Classifiers c;
    c.backend = make_chat(s);
    if (c.backend.provider) c.classifier = std::make_unique<LlmClassifier>(*c.backend.provider, ChatParams{model, 0.0, 0});
    return c;
}

json snapshot_header(const char* command) { return {{"version", kVersion}, {"command", command}}; }

void print_error(const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    if (!e.entity().empty()) fmt::print(stderr, "  offending: {}\n", e.entity());
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
    std::string config;
    std::string scene;
    std::string out;
    bool timestamped = false;
    bool debug = false;
    std::string prompts;
    std::optional<std::string> synonyms;
    std::optional<std::string> model;
    std::optional<std::size_t> n, m, k, max_regen, target_size;
    std::optional<double> tau, x, temperature;
    std::optional<std::int64_t> seed;
    ChatFlags chat;
    ChatFlags classifier;
    EmbedFlags embed;
};

void register_generate(CLI::App& app, GenerateArgs& a) {
    auto* cmd = app.add_subcommand("generate", "run the prompt-generate-evaluate loop");
    cmd->add_option("--config", a.config, "JSON config (same shape as the config.json snapshot)");
    cmd->add_option("--scene", a.scene, "scene graph JSON");
    cmd->add_option("-o,--out", a.out, "run directory")->required();
    cmd->add_flag("--timestamped", a.timestamped, "write into a fresh run-<UTC time> directory under --out");
    cmd->add_flag("--debug", a.debug, "log chat request/response bodies into the run directory");
    cmd->add_option("--prompts", a.prompts, "JSON {system, user, regen} prompt templates");
    cmd->add_option("--synonyms", a.synonyms, "extra blocklisted words, comma separated (default table,chair)");
    cmd->add_option("--model", a.model, "model id sent to the chat backend");
    cmd->add_option("--n", a.n, "batch size");
    cmd->add_option("--m", a.m, "max iterations");
    cmd->add_option("--k", a.k, "representatives fed back into the system prompt");
    cmd->add_option("--tau", a.tau, "per-query similarity cutoff");
    cmd->add_option("--x", a.x, "percent of similar queries that triggers a regeneration");
    cmd->add_option("--max-regen", a.max_regen, "regeneration rounds per batch");
    cmd->add_option("--target-size", a.target_size, "stop once the database holds this many queries");
    cmd->add_option("--seed", a.seed, "seed forwarded to the chat backend");
    cmd->add_option("--temperature", a.temperature, "sampling temperature forwarded to the chat backend");
    add_chat_flags(cmd, a.chat, "", "generate");
    add_chat_flags(cmd, a.classifier, "classifier-", "classify queries for the contextual check");
    add_embed_flags(cmd, a.embed);
}

int run_generate(const GenerateArgs& a) {
    const auto config = load_config_file(a.config);
    const auto scene_path = a.scene.empty() ? string_at(config, "scene") : a.scene;
    if (scene_path.empty()) throw UsageError("generate needs --scene (or \"scene\" in --config)");

    auto gen = config.contains("generation") ? generation_config_from_json(config["generation"]) : GenerationConfig{};
    if (a.n) gen.n = *a.n;
    if (a.m) gen.m = *a.m;
    if (a.k) gen.k = *a.k;
    if (a.tau) gen.tau = *a.tau;
    if (a.x) gen.batch_threshold_x = *a.x;
    if (a.max_regen) gen.max_regen = *a.max_regen;
    if (a.target_size) gen.target_size = *a.target_size;
    if (a.seed) gen.seed = *a.seed;
    if (a.temperature) gen.temperature = *a.temperature;
    if (a.model) gen.model_id = *a.model;
    gen.validate();

    auto chat_settings = merge_chat(config.value("chat", json()), a.chat);
    if (chat_settings.replay.empty() && chat_settings.endpoint.empty())
        throw UsageError("generate needs a chat backend: --replay FILE or --chat-endpoint URL");
    const auto classifier_settings = merge_chat(config.value("classifier", json()), a.classifier);
    const auto embed_settings = merge_embed(config.value("embedding", json()), a.embed);
    const auto synonyms = parse_synonyms(
        a.synonyms ? *a.synonyms
                   : (config.contains("blocklist_synonyms")
                          ? fmt::format("{}", fmt::join(config["blocklist_synonyms"].get<std::vector<std::string>>(), ","))
                          : kDefaultSynonyms));
    const auto prompts_path = a.prompts.empty() ? string_at(config, "prompts") : a.prompts;

    fs::path run_dir = a.out;
    if (a.timestamped) {
        auto stamp = utc_timestamp();
        std::erase(stamp, ':');
        std::erase(stamp, '-');
        run_dir /= "run-" + stamp;
    }
    fs::create_directories(run_dir);
    if (a.debug) chat_settings.debug_dir = (run_dir / "chat-debug").string();

    auto snapshot = snapshot_header("generate");
    snapshot["scene"] = scene_path;
    snapshot["generation"] = to_json(gen);
    snapshot["chat"] = chat_settings.to_json();
    snapshot["classifier"] = classifier_settings.to_json();
    snapshot["embedding"] = embed_settings.to_json();
    snapshot["blocklist_synonyms"] = synonyms;
    snapshot["prompts"] = prompts_path.empty() ? json(nullptr) : json(prompts_path);

    const auto scene = load_scene_file(scene_path);
    const auto blocklist = Blocklist::from_scene(scene, synonyms);
    const auto prompts = prompts_path.empty() ? PromptBundle::defaults() : PromptBundle::from_file(prompts_path);
    auto chat = make_chat(chat_settings);
    auto classifier = make_classifier(classifier_settings, gen.model_id);
    auto embedder = make_embedder(embed_settings);

    std::ofstream run_log(run_dir / "run.log", std::ios::binary | std::ios::trunc);
    run_log << fmt::format("seqa {} generate\n", kVersion);
    GenerationHooks hooks;
    hooks.on_iteration = [&](const IterationRecord& r) {
        std::size_t failures = 0, rejected = 0;
        for (const auto& at : r.attempts) {
            failures += at.parse_failures.size();
            rejected += at.rejected.size();
        }
        const auto line = fmt::format(
            "iteration {}: accepted {}, dropped as similar {}, regenerations {}, parse failures {}, rejected {}, db size {}\n",
            r.iteration, r.accepted, r.dropped_similar, r.regenerations, failures, rejected, r.db_size_after);
        run_log << line;
        fmt::print(stderr, "{}", line);
    };

    const auto result = run_generation(scene, gen, *chat.provider, *embedder, blocklist, classifier.get(), prompts, hooks);
    write_generation_outputs(run_dir, result, snapshot);
    std::vector<json> embeddings;
    for (const auto& e : result.db.entries()) embeddings.push_back(to_json(e));
    jsonl::write_file(run_dir / "embeddings.jsonl", embeddings);
    if (chat.replay) chat.replay->write_recording(run_dir / "prompts.jsonl");

    if (result.aborted()) {
        run_log << fmt::format("aborted at iteration {}: {}\n", result.log.aborted_at_iteration, *result.log.abort_reason);
        fmt::print(stderr, "error: generation aborted at iteration {}: {}\n", result.log.aborted_at_iteration,
                   *result.log.abort_reason);
        fmt::print(stderr, "partial output ({} datapoints) kept in {}\n", result.datapoints.size(), run_dir.string());
        return 1;
    }
    run_log << fmt::format("done: {} datapoints\n", result.datapoints.size());
    fmt::print("wrote {} datapoints to {}\n", result.datapoints.size(), (run_dir / "datapoints.jsonl").string());
    return 0;
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
    std::string datapoints;
    std::string scene;
    std::string out;
    std::string synonyms = kDefaultSynonyms;
    std::string model = "classifier";
    ChatFlags classifier;
};

void register_validate(CLI::App& app, ValidateArgs& a) {
    auto* cmd = app.add_subcommand("validate", "check datapoints against the situational-query rules and the scene");
    cmd->add_option("--datapoints", a.datapoints, "datapoints JSONL")->required();
    cmd->add_option("--scene", a.scene, "scene graph JSON")->required();
    cmd->add_option("-o,--out", a.out, "verdict JSONL (default stdout)");
    cmd->add_option("--synonyms", a.synonyms, "extra blocklisted words, comma separated");
    cmd->add_option("--model", a.model, "model id for the classifier backend");
    add_chat_flags(cmd, a.classifier, "classifier-", "contextual check");
}

int run_validate(const ValidateArgs& a) {
    const auto scene = load_scene_file(a.scene);
    const auto datapoints = read_datapoints(a.datapoints);
    const auto blocklist = Blocklist::from_scene(scene, parse_synonyms(a.synonyms));
    auto classifier = make_classifier(merge_chat(json(), a.classifier), a.model);
    std::vector<json> rows;
    std::size_t accepted = 0;
    for (const auto& d : datapoints) {
        const auto v = validate(d, scene, blocklist, classifier.get());
        if (v.accepted()) ++accepted;
        rows.push_back(to_json(v, d.id));
    }
    if (a.out.empty()) fmt::print("{}", jsonl::dump(rows));
    else jsonl::write_file(a.out, rows);
    fmt::print(stderr, "{} accepted, {} rejected\n", accepted, datapoints.size() - accepted);
    return 0;
}

// --- decompose --------------------------------------------------------------

struct DecomposeArgs {
    std::string datapoints;
    std::string out;
    std::string genericized;
};

void register_decompose(CLI::App& app, DecomposeArgs& a) {
    auto* cmd = app.add_subcommand("decompose", "expand datapoints into consensus queries");
    cmd->add_option("--datapoints", a.datapoints, "datapoints JSONL")->required();
    cmd->add_option("-o,--out", a.out, "consensus query JSONL")->required();
    cmd->add_option("--genericized", a.genericized, "also write the datapoints with room names replaced");
}

int run_decompose(const DecomposeArgs& a) {
    auto datapoints = read_datapoints(a.datapoints);
    std::vector<ConsensusQuery> queries;
    for (const auto& d : datapoints) {
        auto q = decompose(d);
        queries.insert(queries.end(), q.begin(), q.end());
    }
    write_consensus_queries(a.out, queries);
    if (!a.genericized.empty()) {
        for (auto& d : datapoints) d.query = genericize_room(d.query);
        write_datapoints(a.genericized, datapoints);
    }
    fmt::print("{} consensus queries from {} datapoints\n", queries.size(), datapoints.size());
    return 0;
}

// --- annotate-serve ---------------------------------------------------------

struct ServeArgs {
    std::string datapoints;
    std::string store;
    std::size_t annotators = 5;
    std::string mode_mix = "1:0";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
};

void register_serve(CLI::App& app, ServeArgs& a) {
    auto* cmd = app.add_subcommand("annotate-serve", "serve annotation tasks over HTTP until interrupted");
    cmd->add_option("--datapoints", a.datapoints, "datapoints JSONL")->required();
    cmd->add_option("--store", a.store, "directory for the annotation log and exports")->required();
    cmd->add_option("--annotators", a.annotators, "annotations per task (odd)");
    cmd->add_option("--mode-mix", a.mode_mix, "situational:consensus task ratio, e.g. 1:1");
    cmd->add_option("--host", a.host, "bind address");
    cmd->add_option("--port", a.port, "port (0 picks a free one)");
    cmd->add_option("--static", a.static_dir, "directory with the browser client");
}

StudyConfig parse_study(const ServeArgs& a) {
    StudyConfig c;
    c.annotators_per_task = a.annotators;
    const auto parts = text::split(a.mode_mix, ':');
    try {
        if (parts.size() != 2) throw std::invalid_argument("shape");
        c.situational_share = std::stoul(parts[0]);
        c.consensus_share = std::stoul(parts[1]);
    } catch (const std::exception&) {
        throw UsageError(fmt::format("--mode-mix must look like S:C, got '{}'", a.mode_mix));
    }
    c.validate();
    return c;
}

int run_serve(const ServeArgs& a) {
    const auto study = parse_study(a);
    const auto datapoints = read_datapoints(a.datapoints);
    const fs::path store_dir = a.store;
    fs::create_directories(store_dir);
    auto tasks = build_tasks(datapoints, study);

    auto snapshot = snapshot_header("annotate-serve");
    snapshot["datapoints"] = a.datapoints;
    snapshot["study"] = to_json(study);
    snapshot["host"] = a.host;
    snapshot["port"] = a.port;
    snapshot["static"] = a.static_dir.empty() ? json(nullptr) : json(a.static_dir);
    write_text_file(store_dir / "config.json", snapshot.dump(2) + "\n");
    std::vector<json> task_rows;
    for (const auto& t : tasks) task_rows.push_back(to_json(t));
    jsonl::write_file(store_dir / "tasks.jsonl", task_rows);

    AnnotationStore store(std::move(tasks), study, store_dir / "annotations.jsonl");
    ServerOptions options;
    options.host = a.host;
    options.port = a.port;
    if (!a.static_dir.empty()) options.static_dir = a.static_dir;

    // Block the shutdown signals before any thread starts so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    AnnotationServer server(store, options);
    const auto port = server.start();
    fmt::print("serving {} tasks on http://{}:{}/ (Ctrl-C to stop)\n", store.tasks().size(), a.host, port);
    std::fflush(stdout);
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    server.wait();

    const auto snap = store.snapshot();
    write_ground_truth(store_dir / "groundtruth.jsonl", snap->labels);
    fmt::print("stopped; {} annotations, {} of {} tasks complete\n", snap->summary.annotations,
               snap->summary.completed, snap->summary.tasks);
    return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string datapoints;
    std::string ground_truth;
    std::string answerer = "oracle";
    std::string scene;
    std::string predictions;
    std::string model = "replay";
    bool reasoning = false;
    bool raw_scene = false;
    bool only_labelled = false;
    std::size_t workers = 1;
    std::string out;
    ChatFlags chat;
};

void register_evaluate(CLI::App& app, EvaluateArgs& a) {
    auto* cmd = app.add_subcommand("evaluate", "answer datapoints and score them against ground truth");
    cmd->add_option("--datapoints", a.datapoints, "datapoints JSONL")->required();
    cmd->add_option("--ground-truth", a.ground_truth, "ground truth JSONL {task_id, label, votes}")->required();
    cmd->add_option("--answerer", a.answerer, "oracle, llm or recorded")
        ->check(CLI::IsMember({"oracle", "llm", "recorded"}));
    cmd->add_option("--scene", a.scene, "scene graph JSON (oracle, llm)");
    cmd->add_option("--predictions", a.predictions,
                    "recorded predictions JSONL; room/object rows also feed the joint metric");
    cmd->add_option("--model", a.model, "model id for the llm answerer");
    cmd->add_flag("--reasoning", a.reasoning, "ask the llm answerer to justify each Yes/No");
    cmd->add_flag("--raw-scene", a.raw_scene, "show the llm the scene without the datapoint's consensus applied");
    cmd->add_flag("--only-labelled", a.only_labelled, "skip datapoints that have no query-level ground truth");
    cmd->add_option("--workers", a.workers, "concurrent answerer calls");
    cmd->add_option("-o,--out", a.out, "directory for report.json, report.txt, answers.jsonl");
    add_chat_flags(cmd, a.chat, "", "llm answerer");
}

int run_evaluate(const EvaluateArgs& a) {
    auto datapoints = read_datapoints(a.datapoints);
    const auto all_truth = read_ground_truth(a.ground_truth);
    std::vector<GroundTruthLabel> query_truth;
    std::map<std::string, GroundTruthLabel> truth_by_id;
    for (const auto& g : all_truth) {
        truth_by_id.emplace(g.task_id, g);
        // "<id>/<unit>" rows label room or object units, not whole queries.
        if (g.task_id.find('/') == std::string::npos) query_truth.push_back(g);
    }
    if (a.only_labelled)
        std::erase_if(datapoints, [&](const SituationalDatapoint& d) { return !truth_by_id.contains(d.id); });

    std::vector<UnitPrediction> predictions;
    if (!a.predictions.empty()) predictions = read_predictions(a.predictions);

    std::optional<SceneGraph> scene;
    if (a.answerer != "recorded") {
        if (a.scene.empty()) throw UsageError(fmt::format("--answerer {} needs --scene", a.answerer));
        scene = load_scene_file(a.scene);
    }
    const auto chat_settings = merge_chat(json(), a.chat);
    ChatBackend chat;
    std::unique_ptr<Answerer> answerer;
    if (a.answerer == "oracle") {
        answerer = std::make_unique<SceneOracle>(*scene);
    } else if (a.answerer == "llm") {
        chat = make_chat(chat_settings);
        if (!chat.provider) throw UsageError("--answerer llm needs --replay FILE or --chat-endpoint URL");
        if (chat.replay && a.workers > 1) throw UsageError("--workers > 1 cannot be combined with --replay");
        answerer = std::make_unique<LlmAnswerer>(*chat.provider, ChatParams{a.model, 0.0, 0}, *scene,
                                                 LlmAnswererOptions{a.reasoning, !a.raw_scene});
    } else {
        if (a.predictions.empty()) throw UsageError("--answerer recorded needs --predictions");
        answerer = std::make_unique<RecordedAnswerer>(predictions);
    }

    const auto answers = answer_all(*answerer, datapoints, a.workers);
    std::vector<std::pair<std::string, Answer>> pairs;
    for (std::size_t i = 0; i < datapoints.size(); ++i) pairs.emplace_back(datapoints[i].id, answers[i]);

    std::optional<UnitScores> units;
    const bool has_units = std::any_of(predictions.begin(), predictions.end(),
                                       [](const UnitPrediction& p) { return p.level != PredictionLevel::Query; });
    if (has_units) units = score_units(predictions, truth_by_id);

    auto snapshot = snapshot_header("evaluate");
    snapshot["datapoints"] = a.datapoints;
    snapshot["ground_truth"] = a.ground_truth;
    snapshot["answerer"] = a.answerer;
    snapshot["scene"] = a.scene.empty() ? json(nullptr) : json(a.scene);
    snapshot["predictions"] = a.predictions.empty() ? json(nullptr) : json(a.predictions);
    snapshot["chat"] = a.answerer == "llm" ? chat_settings.to_json() : json(nullptr);
    snapshot["model"] = a.model;
    snapshot["reasoning"] = a.reasoning;
    snapshot["apply_consensus"] = !a.raw_scene;
    snapshot["only_labelled"] = a.only_labelled;

    const auto report = compute_report(pairs, query_truth, units, snapshot);
    const auto table = render_table(report);
    fmt::print("{}", table);
    if (!a.out.empty()) {
        const fs::path dir = a.out;
        fs::create_directories(dir);
        write_text_file(dir / "report.json", to_json(report).dump(2) + "\n");
        write_text_file(dir / "report.txt", table);
        write_text_file(dir / "config.json", snapshot.dump(2) + "\n");
        std::vector<json> rows;
        for (const auto& [id, ans] : pairs) {
            json row = {{"datapoint_id", id}, {"unit_id", ""}, {"level", "query"}, {"answer", to_string(ans.value)}};
            if (ans.reasoning) row["reasoning"] = *ans.reasoning;
            if (ans.note) row["note"] = *ans.note;
            rows.push_back(std::move(row));
        }
        jsonl::write_file(dir / "answers.jsonl", rows);
    }
    return 0;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
    std::string datapoints;
    std::string scene;
    std::string out;
    std::string model = "classifier";
    bool keep_question_mark = false;
    std::size_t char_bucket = 10;
    std::size_t word_bucket = 2;
    ChatFlags classifier;
};

void register_analyze(CLI::App& app, AnalyzeArgs& a) {
    auto* cmd = app.add_subcommand("analyze", "room, situational and temporal categories plus length statistics");
    cmd->add_option("--datapoints", a.datapoints, "datapoints JSONL")->required();
    cmd->add_option("--scene", a.scene, "scene graph JSON")->required();
    cmd->add_option("-o,--out", a.out, "directory for stats.json and labelled.jsonl (default: stats to stdout)");
    cmd->add_option("--model", a.model, "model id for the classifier backend");
    cmd->add_flag("--keep-question-mark", a.keep_question_mark, "count a trailing '?' as a character");
    cmd->add_option("--char-bucket", a.char_bucket, "character histogram bucket width");
    cmd->add_option("--word-bucket", a.word_bucket, "word histogram bucket width");
    add_chat_flags(cmd, a.classifier, "classifier-", "situational / temporal labels");
}

int run_analyze(const AnalyzeArgs& a) {
    const auto scene = load_scene_file(a.scene);
    auto datapoints = read_datapoints(a.datapoints);
    auto classifier = make_classifier(merge_chat(json(), a.classifier), a.model);
    label_datapoints(datapoints, scene, classifier.get());
    std::vector<std::string> queries;
    for (const auto& d : datapoints) queries.push_back(d.query);
    const auto lengths = length_stats(queries, {!a.keep_question_mark, a.char_bucket, a.word_bucket});
    auto stats = stats_report(datapoints, lengths, classifier.get() != nullptr);
    stats["length_rules"] = {{"exclude_trailing_question_mark", !a.keep_question_mark}};
    if (a.out.empty()) {
        fmt::print("{}\n", stats.dump(2));
        return 0;
    }
    const fs::path dir = a.out;
    fs::create_directories(dir);
    write_text_file(dir / "stats.json", stats.dump(2) + "\n");
    write_datapoints(dir / "labelled.jsonl", datapoints);
    auto snapshot = snapshot_header("analyze");
    snapshot["datapoints"] = a.datapoints;
    snapshot["scene"] = a.scene;
    snapshot["classifier"] = merge_chat(json(), a.classifier).to_json();
    write_text_file(dir / "config.json", snapshot.dump(2) + "\n");
    fmt::print("analyzed {} datapoints into {}\n", datapoints.size(), dir.string());
    return 0;
}

// --- export-embeddings ------------------------------------------------------

struct ExportArgs {
    std::string datapoints;
    std::string out;
    EmbedFlags embed;
};

void register_export(CLI::App& app, ExportArgs& a) {
    auto* cmd = app.add_subcommand("export-embeddings", "write {id, text, vector, labels} rows for external plotting");
    cmd->add_option("--datapoints", a.datapoints, "datapoints JSONL (labels are kept when present)")->required();
    cmd->add_option("-o,--out", a.out, "output JSONL")->required();
    add_embed_flags(cmd, a.embed);
}

int run_export(const ExportArgs& a) {
    const auto datapoints = read_datapoints(a.datapoints);
    auto embedder = make_embedder(merge_embed(json(), a.embed));
    const auto rows = embedding_export(datapoints, *embedder);
    jsonl::write_file(a.out, rows);
    fmt::print("wrote {} embeddings to {}\n", rows.size(), a.out);
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Situational query generation, annotation and evaluation."};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenerateArgs generate;
    ValidateArgs validate_args;
    DecomposeArgs decompose_args;
    ServeArgs serve;
    EvaluateArgs evaluate;
    AnalyzeArgs analyze;
    ExportArgs export_args;
    register_generate(app, generate);
    register_validate(app, validate_args);
    register_decompose(app, decompose_args);
    register_serve(app, serve);
    register_evaluate(app, evaluate);
    register_analyze(app, analyze);
    register_export(app, export_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const auto code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const auto name = sub->get_name();
        if (name == "generate") return run_generate(generate);
        if (name == "validate") return run_validate(validate_args);
        if (name == "decompose") return run_decompose(decompose_args);
        if (name == "annotate-serve") return run_serve(serve);
        if (name == "evaluate") return run_evaluate(evaluate);
        if (name == "analyze") return run_analyze(analyze);
        if (name == "export-embeddings") return run_export(export_args);
        return 2;
    } catch (const UsageError& e) {
        fmt::print(stderr, "usage error: {}\nRun with --help for the available options.\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        return 2;
    } catch (const IdMismatchError& e) {
        print_error(e);
        if (!e.missing().empty()) fmt::print(stderr, "  no prediction for: {}\n", fmt::join(e.missing(), ", "));
        if (!e.extra().empty()) fmt::print(stderr, "  no ground truth for: {}\n", fmt::join(e.extra(), ", "));
        return 1;
    } catch (const Error& e) {
        print_error(e);
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"seqa"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace seqa::cli
