#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "seqa/annotation_store.hpp"

namespace seqa {

struct ServerOptions {
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 8080;
    /// Directory served at "/"; a placeholder page when unset.
    std::optional<std::filesystem::path> static_dir;
};

/// JSON API over an AnnotationStore:
///   GET  /api/tasks/next?worker=<id>
///   POST /api/annotations   {worker_id, task_id, response}
///   GET  /api/progress
///   GET  /api/groundtruth   (?format=jsonl for the export rows)
///   GET  /api/summary
class AnnotationServer {
public:
    AnnotationServer(AnnotationStore& store, ServerOptions options);
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds and serves on a background thread. Returns the bound port.
    int start();
    void stop();
    /// Blocks until the server thread exits.
    void wait();
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace seqa
