// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <functional>
#include <thread>

#include <fmt/format.h>

#include "oracles.hpp"
#include "seqa/annotation_server.hpp"
#include "seqa/annotation_store.hpp"
#include "seqa/clustering.hpp"
#include "seqa/decomposition.hpp"
#include "seqa/errors.hpp"
#include "seqa/evaluation.hpp"
#include "seqa/pge.hpp"
#include "seqa/text.hpp"
#include "test_support.hpp"

using namespace seqa;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPctTol = 0.01;

struct Outcome {
    bool ok = false;
    std::string detail;
};

int failures = 0;

void run(const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.ok) ++failures;
    fmt::print("{} {}: {}\n", o.ok ? "PASS" : "FAIL", name, o.detail);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const Blocklist& blocklist() {
    static const Blocklist b = Blocklist::from_scene(testing::house(), {"table", "chair"});
    return b;
}

Outcome oracle_consistency() {
    const auto t0 = Clock::now();
    std::mt19937 rng(20240601);
    std::size_t yes = 0, flips = 0, flips_no = 0;
    const std::size_t total = 200;
    for (std::size_t i = 0; i < total; ++i) {
        const auto d = oracle::random_datapoint(testing::house(), rng, static_cast<int>(i));
        const auto g = apply_consensus(testing::house(), d.states, d.relations);
        if (oracle_answer(d, g).value == AnswerValue::Yes) ++yes;
        for (std::size_t s = 0; s < d.states.size(); ++s) {
            auto f = d;
            f.states[s].value = opposite(f.states[s].value);
            ++flips;
            if (oracle_answer(f, g).value == AnswerValue::No) ++flips_no;
        }
    }
    const double secs = seconds_since(t0);
    return {yes == total && flips_no == flips && secs < 5.0,
            fmt::format("{}/{} Yes, {}/{} flips No, {:.2f}s (limit 5s)", yes, total, flips_no, flips, secs)};
}

Outcome joint_table() {
    const int expected[2][2] = {{0, 1}, {1, 1}};
    std::size_t ok = 0;
    for (int r = 0; r < 2; ++r)
        for (int o = 0; o < 2; ++o)
            if (joint(r, o) == expected[r][o]) ++ok;
    return {ok == 4, fmt::format("{}/4 cases match R or O", ok)};
}

Outcome aggregation() {
    const bool a = aggregate_votes({3, 2, 0}) == AnswerValue::Yes;
    const bool b = aggregate_votes({4, 0, 1}) == AnswerValue::CannotAnswer;
    std::size_t multisets = 0, agree = 0;
    for (std::size_t c = 0; c <= 5; ++c)
        for (std::size_t y = 0; y + c <= 5; ++y) {
            const std::size_t n = 5 - c - y;
            ++multisets;
            const auto want = c > 0 ? AnswerValue::CannotAnswer : (y > n ? AnswerValue::Yes : AnswerValue::No);
            if (aggregate_votes({y, n, c}) == want) ++agree;
        }
    return {a && b && multisets == 21 && agree == 21,
            fmt::format("[3Y,2N]->Yes {}, [4Y,1C]->CannotAnswer {}, {}/{} multisets", a, b, agree, multisets)};
}

Outcome pge_replay() {
    const auto t0 = Clock::now();
    std::vector<TranscriptEntry> transcript;
    for (const auto& row : jsonl::read_file(testing::fixture("run1.jsonl"))) transcript.push_back({std::nullopt, row["response"]});
    GenerationConfig config;
    config.n = 5;
    config.m = 2;
    config.k = 3;
    const auto once = [&] {
        ReplayChatProvider chat(transcript);
        HashedBagOfWordsEmbedder embedder;
        return run_generation(testing::house(), config, chat, embedder, blocklist(), nullptr);
    };
    const auto first = once();
    const auto second = once();
    const auto dump = [](const GenerationResult& r) {
        std::vector<json> rows;
        for (const auto& d : r.datapoints) rows.push_back(to_json(d));
        return jsonl::dump(rows);
    };
    const bool identical = dump(first) == dump(second);
    std::size_t regens = 0;
    for (const auto& it : first.log.iterations) regens += it.regenerations;
    const auto& entries = first.db.entries();
    double worst = -1.0;
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = i + 1; j < entries.size(); ++j)
            worst = std::max(worst, 1.0 - oracle::cos_dist(entries[i].vector, entries[j].vector));
    const double secs = seconds_since(t0);
    const bool ok = !first.aborted() && identical && regens == 1 && entries.size() == 10 &&
                    entries.size() <= config.n * config.m && worst <= config.tau && secs < 10.0;
    return {ok, fmt::format("identical {}, regenerations {}, db size {} (cap {}), max pair cosine {:.4f} (tau {:.2f}), "
                            "{:.2f}s (limit 10s)",
                            identical, regens, entries.size(), config.n * config.m, worst, config.tau, secs)};
}

Outcome clustering() {
    const auto pts = oracle::three_blobs(7);
    QueryDatabase db(pts[0].size());
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ids.push_back(fmt::format("q{:05}", i + 1));
        db.insert(ids.back(), "t", pts[i]);
    }
    const auto reps = cluster_representatives(db, 3);
    const auto want = oracle::nearest_to_centroid(pts, ids, oracle::reference_partition(pts, 3));
    const bool reps_ok = reps == want;

    std::mt19937 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t trials = 0, merges_ok = 0;
    for (std::size_t n = 2; n <= 8; ++n)
        for (int t = 0; t < 5; ++t) {
            std::vector<Embedding> small(n, Embedding(5));
            for (auto& p : small)
                for (auto& x : p) x = g(rng);
            const auto got = average_linkage(small, 1).merges;
            const auto ref = oracle::average_linkage_reference(small, 1);
            bool same = got.size() == ref.size();
            for (std::size_t i = 0; same && i < got.size(); ++i)
                same = got[i].left == ref[i].left && got[i].right == ref[i].right && got[i].size == ref[i].size &&
                       std::abs(got[i].distance - ref[i].distance) < 1e-9;
            ++trials;
            if (same) ++merges_ok;
        }
    return {reps_ok && merges_ok == trials,
            fmt::format("representatives {} ({}), merge sequences {}/{} match on 2..8 points",
                        reps_ok ? "match" : "differ", fmt::join(reps, ","), merges_ok, trials)};
}

Outcome validation() {
    const auto make = [](std::string q) {
        SituationalDatapoint d;
        d.id = "v";
        d.query = std::move(q);
        d.states = {{"plate", StateValue::Present}};
        d.relations = {{"plate", Relation::On, "kitchentable"}};
        return d;
    };
    const auto sofa = validate(make("Is the sofa blue?"), testing::house(), blocklist(), nullptr);
    const auto car = validate(make("What is the color of the car?"), testing::house(), blocklist(), nullptr);
    const auto dining = validate(make("Is the dining area set up for dinner?"), testing::house(), blocklist(), nullptr);
    std::size_t hits = 0;
    if (!sofa.accepted() && !sofa.abstraction_ok) ++hits;
    if (!car.accepted() && !car.binary_ok) ++hits;
    if (dining.accepted()) ++hits;
    return {hits == 3, fmt::format("{}/3 classifications match", hits)};
}

Outcome metrics() {
    const auto p = [](const char* id, AnswerValue v) { return std::pair<std::string, Answer>{id, Answer{v, {}, {}}}; };
    const auto t = [](const char* id, AnswerValue v) {
        GroundTruthLabel g;
        g.task_id = id;
        g.label = v;
        return g;
    };
    using enum AnswerValue;
    const auto r = compute_report({p("1", Yes), p("2", Yes), p("3", Yes), p("4", No), p("5", No)},
                                  {t("1", Yes), t("2", Yes), t("3", No), t("4", Yes), t("5", No)});
    const bool f1_ok = std::abs(r.f1_pct - 66.67) <= kPctTol;

    std::vector<AnnotationTask> tasks(73);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        tasks[i].task_id = fmt::format("t{:02}", i);
        tasks[i].query = "Is the house ready?";
    }
    StudyConfig one;
    one.annotators_per_task = 1;
    AnnotationStore store(tasks, one);
    for (std::size_t i = 0; i < tasks.size(); ++i) store.submit("w", tasks[i].task_id, i < 2 ? CannotAnswer : Yes);
    const double answerability = store.snapshot()->summary.answerability_pct;
    const bool ans_ok = std::abs(answerability - 97.26) <= kPctTol;
    return {f1_ok && ans_ok, fmt::format("F1 {:.4f} (want 66.67 +- {}), answerability {:.4f} (want 97.26 +- {})",
                                         r.f1_pct, kPctTol, answerability, kPctTol)};
}

Outcome decomposition() {
    SituationalDatapoint d;
    d.id = "ex";
    d.query = "Was someone working in the bedroom?";
    d.states = {{"computer", StateValue::On}, {"lightswitch", StateValue::On}};
    std::vector<std::string> texts;
    for (const auto& q : decompose(d)) texts.push_back(q.text);
    const bool decomp_ok = texts == std::vector<std::string>{"Is the computer On?", "Is the lightswitch On?"};
    const auto generic = genericize_room("Is the living room prepared for a movie night?");
    const bool generic_ok = generic == "Is this place prepared for a movie night?";
    std::size_t stable = 0;
    const auto fixtures = read_datapoints(testing::fixture("datapoints.jsonl"));
    for (const auto& f : fixtures) {
        const auto once = genericize_room(f.query);
        if (genericize_room(once) == once) ++stable;
    }
    return {decomp_ok && generic_ok && stable == fixtures.size(),
            fmt::format("[{}], \"{}\", idempotent on {}/{} fixtures", fmt::join(texts, ", "), generic, stable,
                        fixtures.size())};
}

struct StudyRun {
    std::string export_body;
    std::vector<GroundTruthLabel> labels;
    bool complete = false;
    int duplicate_status = 0;
    std::string duplicate_error;
};

// Every worker answers every task; the answer depends only on (worker, task).
AnswerValue scripted(std::size_t worker, const std::string& task) {
    const auto h = text::fnv1a64(fmt::format("{}:{}", worker, task));
    return (h % 5 == 0) ? AnswerValue::CannotAnswer : (h % 2 ? AnswerValue::Yes : AnswerValue::No);
}

std::vector<AnnotationTask> study_tasks() {
    std::vector<AnnotationTask> tasks(4);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        tasks[i].task_id = fmt::format("q{:05}", i + 1);
        tasks[i].query = "Is the house ready for sleeptime?";
        tasks[i].states = {{"tv", StateValue::Off}};
    }
    return tasks;
}

StudyConfig three_annotators() {
    StudyConfig config;
    config.annotators_per_task = 3;
    return config;
}

StudyRun run_study(const std::filesystem::path& log) {
    AnnotationStore store(study_tasks(), three_annotators(), log);
    ServerOptions options;
    options.port = 0;
    AnnotationServer server(store, options);
    const int port = server.start();

    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < 3; ++w)
        workers.emplace_back([port, w] {
            httplib::Client cli("127.0.0.1", port);
            const auto worker = fmt::format("w{}", w);
            for (;;) {
                const auto res = cli.Get("/api/tasks/next?worker=" + worker);
                if (!res || res->status != 200) return;
                const auto body = json::parse(res->body);
                if (body["task"].is_null()) return;
                const std::string task = body["task"]["task_id"];
                const json post = {{"worker_id", worker}, {"task_id", task}, {"response", to_string(scripted(w, task))}};
                cli.Post("/api/annotations", post.dump(), "application/json");
            }
        });
    for (auto& t : workers) t.join();

    StudyRun out;
    httplib::Client cli("127.0.0.1", port);
    const json dup = {{"worker_id", "w0"}, {"task_id", "q00001"}, {"response", "Yes"}};
    if (const auto res = cli.Post("/api/annotations", dup.dump(), "application/json")) {
        out.duplicate_status = res->status;
        out.duplicate_error = json::parse(res->body).value("error", "");
    }
    if (const auto res = cli.Get("/api/groundtruth?format=jsonl")) out.export_body = res->body;
    if (const auto res = cli.Get("/api/progress")) out.complete = json::parse(res->body).value("complete", false);
    out.labels = store.snapshot()->labels;
    server.stop();
    return out;
}

Outcome service_protocol() {
    testing::TempDir dir;
    const auto a = run_study(dir / "a.jsonl");
    const auto b = run_study(dir / "b.jsonl");
    const AnnotationStore replayed(study_tasks(), three_annotators(), dir / "a.jsonl");
    const bool replay_ok = replayed.snapshot()->labels == a.labels;
    const bool duplicate_ok = a.duplicate_status == 409 && a.duplicate_error == "DuplicateAnnotationError";
    const bool ok = a.complete && b.complete && a.labels.size() == 4 && a.export_body == b.export_body &&
                    !a.export_body.empty() && duplicate_ok && replay_ok;
    return {ok, fmt::format("complete {}/{}, {} labels, export identical {}, duplicate -> {} {}, replay identical {}",
                            a.complete, b.complete, a.labels.size(), a.export_body == b.export_body,
                            a.duplicate_status, a.duplicate_error, replay_ok)};
}

}  // namespace

int main() {
    run("generator-oracle consistency", oracle_consistency);
    run("joint metric truth table", joint_table);
    run("vote aggregation rules", aggregation);
    run("generation replay determinism", pge_replay);
    run("clustering oracle", clustering);
    run("validation fixtures", validation);
    run("metrics arithmetic", metrics);
    run("decomposition", decomposition);
    run("annotation service protocol", service_protocol);
    fmt::print("{} failed\n", failures);
    return failures == 0 ? 0 : 1;
}
