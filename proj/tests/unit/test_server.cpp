#include <doctest.h>

#include <httplib.h>

#include <thread>

#include <fmt/format.h>

#include "seqa/annotation_server.hpp"
#include "seqa/annotation_store.hpp"
#include "seqa/errors.hpp"
#include "test_support.hpp"

using namespace seqa;

namespace {

std::vector<AnnotationTask> two_tasks() {
    std::vector<AnnotationTask> out;
    for (const auto* id : {"q1", "q2"}) {
        AnnotationTask t;
        t.task_id = id;
        t.query = "Is the house ready for sleeptime?";
        t.states = {{"tv", StateValue::Off}};
        out.push_back(t);
    }
    return out;
}

StudyConfig three() {
    StudyConfig c;
    c.annotators_per_task = 3;
    return c;
}

ServerOptions any_port() {
    ServerOptions o;
    o.port = 0;
    return o;
}

httplib::Result post(httplib::Client& cli, const std::string& worker, const std::string& task,
                     const std::string& response) {
    return cli.Post("/api/annotations", json{{"worker_id", worker}, {"task_id", task}, {"response", response}}.dump(),
                    "application/json");
}

}  // namespace

TEST_SUITE("server") {

TEST_CASE("task, submit, progress and ground truth over HTTP") {
    AnnotationStore store(two_tasks(), three());
    AnnotationServer server(store, any_port());
    const int port = server.start();
    REQUIRE(port > 0);
    httplib::Client cli("127.0.0.1", port);

    auto res = cli.Get("/api/tasks/next?worker=a");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto body = json::parse(res->body);
    CHECK(body["task"]["task_id"] == "q1");
    CHECK(body["task"]["states"] == json::parse(R"([["tv","OFF"]])"));
    CHECK(body["progress"] == json::parse(R"({"done":0,"total":2})"));

    res = post(cli, "a", "q1", "Yes");
    REQUIRE(res);
    CHECK(res->status == 201);
    body = json::parse(res->body);
    CHECK(body["record"]["response"] == "Yes");
    CHECK(body["progress"]["annotations"] == 1);

    res = cli.Get("/api/tasks/next?worker=a");
    CHECK(json::parse(res->body)["task"]["task_id"] == "q2");

    for (const auto* w : {"b", "c"}) post(cli, w, "q1", "No");
    res = cli.Get("/api/groundtruth");
    body = json::parse(res->body);
    CHECK(body["complete"] == false);
    REQUIRE(body["labels"].size() == 1);
    CHECK(body["labels"][0] == json::parse(R"({"task_id":"q1","label":"No","votes":{"yes":1,"no":2,"cannot":0}})"));

    res = cli.Get("/api/groundtruth?format=jsonl");
    CHECK(res->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(res->body == body["labels"][0].dump() + "\n");

    res = cli.Get("/api/progress");
    CHECK(json::parse(res->body) ==
          json::parse(R"({"tasks":2,"completed":1,"annotations":3,"annotations_required":6,"complete":false})"));
    res = cli.Get("/api/summary");
    CHECK(json::parse(res->body)["modes"]["situational"]["completed"] == 1);
}

TEST_CASE("error statuses") {
    AnnotationStore store(two_tasks(), three());
    AnnotationServer server(store, any_port());
    httplib::Client cli("127.0.0.1", server.start());

    CHECK(cli.Get("/api/tasks/next")->status == 400);
    CHECK(post(cli, "a", "q1", "Yes")->status == 201);
    auto res = post(cli, "a", "q1", "No");
    CHECK(res->status == 409);
    CHECK(json::parse(res->body)["error"] == "DuplicateAnnotationError");
    res = post(cli, "a", "ghost", "No");
    CHECK(res->status == 404);
    CHECK(json::parse(res->body)["error"] == "UnknownTaskError");
    CHECK(post(cli, "a", "q2", "Perhaps")->status == 400);
    CHECK(cli.Post("/api/annotations", "{not json", "application/json")->status == 400);
    CHECK(cli.Post("/api/annotations", R"({"task_id":"q2","response":"Yes"})", "application/json")->status == 400);
    post(cli, "b", "q1", "Yes");
    post(cli, "c", "q1", "Yes");
    res = post(cli, "d", "q1", "Yes");
    CHECK(res->status == 409);
    CHECK(json::parse(res->body)["error"] == "TaskCompleteError");
    CHECK(store.records().size() == 3);
}

TEST_CASE("static files and placeholder") {
    {
        AnnotationStore store(two_tasks(), three());
        AnnotationServer server(store, any_port());
        httplib::Client cli("127.0.0.1", server.start());
        const auto res = cli.Get("/");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(res->body.find("/api/") != std::string::npos);
    }
    testing::TempDir dir;
    write_text_file(dir / "index.html", "<html>client</html>");
    AnnotationStore store(two_tasks(), three());
    auto opts = any_port();
    opts.static_dir = dir.path();
    AnnotationServer server(store, opts);
    httplib::Client cli("127.0.0.1", server.start());
    CHECK(cli.Get("/")->body == "<html>client</html>");
    CHECK(cli.Get("/api/progress")->status == 200);

    opts.static_dir = dir / "missing";
    CHECK_THROWS_AS(AnnotationServer(store, opts), ConfigError);
}

TEST_CASE("concurrent clients never double count") {
    AnnotationStore store(two_tasks(), [] {
        StudyConfig c;
        c.annotators_per_task = 5;
        return c;
    }());
    AnnotationServer server(store, any_port());
    const int port = server.start();
    std::vector<std::thread> clients;
    for (int w = 0; w < 6; ++w)
        clients.emplace_back([port, w] {
            httplib::Client cli("127.0.0.1", port);
            const auto id = fmt::format("w{}", w);
            for (int i = 0; i < 3; ++i) {
                const auto res = cli.Get(("/api/tasks/next?worker=" + id).c_str());
                if (!res) return;
                const auto task = json::parse(res->body)["task"];
                if (task.is_null()) return;
                post(cli, id, task["task_id"], "Yes");
            }
        });
    for (auto& t : clients) t.join();
    const auto snap = store.snapshot();
    CHECK(snap->counts == std::vector<std::size_t>{5, 5});
    CHECK(snap->summary.complete);
}

}
