#include "lagraph/server.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

namespace lagraph {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
    res.status = status;
    json body{{"format_version", kApiFormatVersion}, {"error", {{"code", code}, {"message", message}}}};
    res.set_content(body.dump(2), kJson);
}

void send_json(httplib::Response& res, const json& body) {
    res.status = 200;
    res.set_content(body.dump(2), kJson);
}

std::string sse_frame(const GraphVersion& v) {
    json data = version_summary(v);
    data["format_version"] = kApiFormatVersion;
    return "id: " + std::to_string(v.version) + "\nevent: version\ndata: " + data.dump() + "\n\n";
}

} // namespace

struct HttpService::Impl {
    Engine& engine;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};
    int port = 0;

    explicit Impl(Engine& e) : engine(e) { routes(); }

    // Alert bodies fail with 400 before anything is committed; anything else is a 500.
    template <typename F>
    void guarded(httplib::Response& res, F&& f) {
        try {
            f();
        } catch (const SchemaError& e) {
            send_error(res, 400, "invalid_alert", e.what());
        } catch (const ParseError& e) {
            send_error(res, 400, "invalid_alert", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal_error", e.what());
        }
    }

    void routes() {
        server.Post("/alerts", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, engine.submit(req.body).to_json()); });
        });

        server.Post("/whatif", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                json body = engine.what_if(req.body).to_json();
                auto committed = engine.current();
                body["hypothetical"] = true;
                body["committed_version"] = committed->version;
                body["committed_digest"] = committed->digest;
                send_json(res, body);
            });
        });

        server.Get("/graph", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, version_export(*engine.current())); });
        });

        server.Get("/graph/history", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                json versions = json::array();
                for (const auto& v : engine.history()) versions.push_back(version_summary(*v));
                send_json(res, {{"format_version", kApiFormatVersion}, {"versions", std::move(versions)}});
            });
        });

        server.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
            std::uint64_t after = 0;
            try {
                if (req.has_header("Last-Event-ID")) {
                    after = std::stoull(req.get_header_value("Last-Event-ID"));
                } else if (req.has_param("since")) {
                    after = std::stoull(req.get_param_value("since"));
                }
            } catch (const std::exception&) {
                send_error(res, 400, "invalid_cursor", "Last-Event-ID / since must be a version number");
                return;
            }
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [this, after](std::size_t, httplib::DataSink& sink) mutable {
                    while (!stopping && !engine.is_shut_down()) {
                        auto fresh = engine.wait_for_versions(after, std::chrono::milliseconds(250));
                        if (fresh.empty()) {
                            // A comment keeps the connection probed so closed clients free the worker.
                            const std::string ping = ": ping\n\n";
                            if (!sink.write(ping.data(), ping.size())) return false;
                            continue;
                        }
                        for (const auto& v : fresh) {
                            const std::string frame = sse_frame(*v);
                            if (!sink.write(frame.data(), frame.size())) return false;
                            after = v->version;
                        }
                        return true;
                    }
                    sink.done();
                    return true;
                });
        });

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                send_error(res, res.status, res.status == 404 ? "not_found" : "http_error",
                           "no such endpoint or method");
            }
        });
    }
};

HttpService::HttpService(Engine& engine) : m_impl(std::make_unique<Impl>(engine)) {}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
    int bound = port == 0 ? m_impl->server.bind_to_any_port(host)
                          : (m_impl->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot listen on " + host + ":" + std::to_string(port));
    m_impl->port = bound;
    return bound;
}

void HttpService::run() { m_impl->server.listen_after_bind(); }

int HttpService::start(const std::string& host, int port) {
    const int bound = bind(host, port);
    m_impl->thread = std::thread([this] { run(); });
    m_impl->server.wait_until_ready();
    return bound;
}

void HttpService::stop() {
    if (!m_impl) return;
    m_impl->stopping = true;
    m_impl->server.stop();
    if (m_impl->thread.joinable()) m_impl->thread.join();
}

int HttpService::port() const noexcept { return m_impl->port; }

} // namespace lagraph
