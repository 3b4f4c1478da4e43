#pragma once

// HTTP front end over an Engine.
//
//   POST /alerts         intake; commits any enrichment
//   POST /whatif         same pipeline on a scratch copy
//   GET  /graph          current version export
//   GET  /graph/history  version summaries with their deltas
//   GET  /events         text/event-stream of version announcements
//
// Errors are `{"error": {"code", "message"}}` with a 4xx or 5xx status.

#include <memory>
#include <string>

#include "lagraph/engine.hpp"

namespace lagraph {

class HttpService {
public:
    explicit HttpService(Engine& engine);
    ~HttpService();
    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Binds; `port` 0 picks a free port. Returns the bound port. Throws Error.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Requires bind().
    void run();
    /// bind() + run() on a background thread; returns once accepting.
    int start(const std::string& host, int port);
    /// Ends open event streams and stops the listener. Safe to call twice.
    void stop();

    int port() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

} // namespace lagraph
