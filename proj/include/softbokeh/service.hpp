#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "softbokeh/fusion.hpp"
#include "softbokeh/render.hpp"

namespace softbokeh {

struct ServiceOptions {
    std::size_t max_sessions = 16;
    RenderConfig render;
    FusionConfig fusion;
};

struct HttpResponse {
    int status = 200;
    std::string content_type;
    std::string body;
};

/// Session store and request handlers of the preview service, independent of
/// the HTTP transport. Identical requests against one session produce
/// identical bytes.
class PreviewService {
public:
    explicit PreviewService(ServiceOptions options = {});

    /// 201 {"id": ...}; 400 when either upload fails to decode; 422 when the
    /// sizes differ or the disparity leaves [0,1].
    HttpResponse create_session(const std::string& image_bytes, const std::string& disparity_bytes);

    /// Body: {"focal": f, "blur_scale": s = 1, "preview": false}. 200 PNG;
    /// 400 malformed JSON; 404 unknown session; 422 out-of-range parameters.
    HttpResponse render(const std::string& id, const std::string& json_body);

    /// 200 16-bit gray PNG of the full-resolution defocus map; 404; 422.
    HttpResponse defocus(const std::string& id, const std::string& focal_text);

    std::size_t session_count() const;
    bool has_session(const std::string& id) const;

private:
    struct Entry {
        explicit Entry(RefocusSession s) : session(std::move(s)), created_at(std::chrono::system_clock::now()) {}
        RefocusSession session;
        std::mutex render_mutex;
        std::chrono::system_clock::time_point created_at;
    };

    std::shared_ptr<Entry> find(const std::string& id);
    std::string next_id();

    ServiceOptions options_;
    mutable std::mutex store_mutex_;
    std::list<std::string> lru_;  ///< most recently used first
    std::unordered_map<std::string, std::pair<std::shared_ptr<Entry>, std::list<std::string>::iterator>> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t salt_ = 0;
};

/// HTTP/1.1 front end: POST /sessions, POST /sessions/{id}/render,
/// GET /sessions/{id}/defocus?focal=f, with permissive CORS headers.
class PreviewServer {
public:
    explicit PreviewServer(PreviewService& service);
    ~PreviewServer();
    PreviewServer(const PreviewServer&) = delete;
    PreviewServer& operator=(const PreviewServer&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void listen();
    /// Serves on a background thread; call after bind().
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace softbokeh
