#include "seqa/annotation_server.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <thread>

namespace seqa {

namespace {

constexpr const char* kPlaceholderPage =
    "<!doctype html><html><head><title>seqa annotation</title></head><body>"
    "<p>Annotation service is running. The browser client is not installed; the JSON API lives under /api/.</p>"
    "</body></html>";

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    send_json(res, status, {{"error", kind}, {"message", message}});
}

int status_for(const Error& e) {
    if (dynamic_cast<const UnknownTaskError*>(&e)) return 404;
    if (dynamic_cast<const DuplicateAnnotationError*>(&e) || dynamic_cast<const TaskCompleteError*>(&e)) return 409;
    if (dynamic_cast<const SchemaError*>(&e)) return 400;
    return 500;
}

}  // namespace

struct AnnotationServer::Impl {
    httplib::Server server;
    std::thread thread;
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options) : impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->server;

    srv.Get("/api/tasks/next", [&store](const httplib::Request& req, httplib::Response& res) {
        const auto worker = req.get_param_value("worker");
        if (worker.empty()) return send_error(res, 400, "SchemaError", "query parameter 'worker' is required");
        const auto task = store.next_task(worker);
        const json progress = {{"done", store.worker_done(worker)}, {"total", store.tasks().size()}};
        send_json(res, 200, {{"task", task ? to_json(*task) : json(nullptr)}, {"progress", progress}});
    });

    srv.Post("/api/annotations", [&store](const httplib::Request& req, httplib::Response& res) {
        try {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::parse_error& e) {
                throw SchemaError("body", fmt::format("request body is not JSON: {}", e.what()));
            }
            const auto record = annotation_from_json(body);
            const auto stored = store.submit(record.worker_id, record.task_id, record.response);
            const auto snap = store.snapshot();
            send_json(res, 201, {{"record", to_json(stored)}, {"progress", snap->progress}});
        } catch (const Error& e) {
            send_error(res, status_for(e), e.kind(), e.what());
        }
    });

    srv.Get("/api/progress", [&store](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, store.snapshot()->progress);
    });

    srv.Get("/api/groundtruth", [&store](const httplib::Request& req, httplib::Response& res) {
        const auto snap = store.snapshot();
        std::vector<json> rows;
        for (const auto& g : snap->labels) rows.push_back(to_json(g));
        if (req.get_param_value("format") == "jsonl") {
            res.set_content(jsonl::dump(rows), "application/x-ndjson");
            return;
        }
        send_json(res, 200, {{"labels", rows}, {"complete", snap->summary.complete}});
    });

    srv.Get("/api/summary", [&store](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, to_json(store.snapshot()->summary));
    });

    if (options.static_dir) {
        if (!srv.set_mount_point("/", options.static_dir->string()))
            throw ConfigError(options.static_dir->string(),
                              fmt::format("static directory {} does not exist", options.static_dir->string()));
    } else {
        srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(kPlaceholderPage, "text/html");
        });
    }

    if (options.port == 0) {
        port_ = srv.bind_to_any_port(options.host);
    } else if (srv.bind_to_port(options.host, options.port)) {
        port_ = options.port;
    } else {
        port_ = -1;
    }
    if (port_ <= 0)
        throw IoError(options.host, fmt::format("cannot bind {}:{}", options.host, options.port));
}

AnnotationServer::~AnnotationServer() {
    stop();
    wait();
}

int AnnotationServer::start() {
    if (!impl_->thread.joinable()) impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void AnnotationServer::stop() { impl_->server.stop(); }

void AnnotationServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace seqa
