#include "softbokeh/service.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "softbokeh/image_io.hpp"

namespace softbokeh {

namespace {

using nlohmann::json;

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& reason) {
    return json_response(status, json{{"error", reason}});
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_body(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

bool parse_number(const std::string& text, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(text, &used);
        return used == text.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

PreviewService::PreviewService(ServiceOptions options) : options_(std::move(options)) {
    if (options_.max_sessions == 0) throw std::invalid_argument("PreviewService: max_sessions must be positive");
    options_.render.validate();
    options_.fusion.validate();
    std::random_device rd;
    salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string PreviewService::next_id() {
    // Counter makes ids unique for the process lifetime; the salt makes them opaque.
    const std::uint64_t n = ++counter_;
    std::ostringstream s;
    s << std::hex << std::setfill('0') << std::setw(16) << (salt_ ^ (n * 0x9E3779B97F4A7C15ULL)) << std::setw(8)
      << n;
    return s.str();
}

std::shared_ptr<PreviewService::Entry> PreviewService::find(const std::string& id) {
    std::lock_guard lock(store_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return nullptr;
    lru_.splice(lru_.begin(), lru_, it->second.second);
    return it->second.first;
}

std::size_t PreviewService::session_count() const {
    std::lock_guard lock(store_mutex_);
    return sessions_.size();
}

bool PreviewService::has_session(const std::string& id) const {
    std::lock_guard lock(store_mutex_);
    return sessions_.count(id) != 0;
}

HttpResponse PreviewService::create_session(const std::string& image_bytes, const std::string& disparity_bytes) {
    PlanarImage image(1, 1, 1);
    PlanarImage disparity(1, 1, 1);
    try {
        image = decode_image(as_bytes(image_bytes), ImageKind::rgb8);
        disparity = decode_disparity(as_bytes(disparity_bytes));
    } catch (const std::exception& e) {
        return error_response(400, std::string("malformed upload: ") + e.what());
    }
    if (!image.same_size(disparity)) {
        std::ostringstream s;
        s << "dimension mismatch: image " << image.width() << "x" << image.height() << ", disparity "
          << disparity.width() << "x" << disparity.height();
        return error_response(422, s.str());
    }
    std::shared_ptr<Entry> entry;
    try {
        entry = std::make_shared<Entry>(RefocusSession(std::move(image), std::move(disparity), options_.render,
                                                       options_.fusion));
    } catch (const std::invalid_argument& e) {
        return error_response(422, e.what());
    }

    std::lock_guard lock(store_mutex_);
    const std::string id = next_id();
    lru_.push_front(id);
    sessions_.emplace(id, std::make_pair(std::move(entry), lru_.begin()));
    while (sessions_.size() > options_.max_sessions) {
        sessions_.erase(lru_.back());
        lru_.pop_back();
    }
    return json_response(201, json{{"id", id}});
}

HttpResponse PreviewService::render(const std::string& id, const std::string& json_body) {
    const auto entry = find(id);
    if (!entry) return error_response(404, "unknown session");

    json request;
    try {
        request = json::parse(json_body);
    } catch (const json::exception& e) {
        return error_response(400, std::string("malformed JSON: ") + e.what());
    }
    if (!request.is_object()) return error_response(400, "request body must be a JSON object");
    if (!request.contains("focal") || !request["focal"].is_number()) return error_response(422, "focal is required");
    const double focal = request["focal"].get<double>();
    const double blur_scale = request.value("blur_scale", 1.0);
    if (request.contains("blur_scale") && !request["blur_scale"].is_number())
        return error_response(422, "blur_scale must be a number");
    if (request.contains("preview") && !request["preview"].is_boolean())
        return error_response(422, "preview must be a boolean");
    const bool preview = request.value("preview", false);
    if (!(focal >= 0.0 && focal <= 1.0)) return error_response(422, "focal must be in [0,1]");
    if (!(blur_scale > 0.0 && blur_scale <= 4.0)) return error_response(422, "blur_scale must be in (0,4]");

    FusionConfig fusion = options_.fusion;
    if (preview) {
        fusion.method = FusionMethod::feathered;
        fusion.steps = 0;
    }
    std::lock_guard lock(entry->render_mutex);
    const PlanarImage out = entry->session.refocus(focal, blur_scale, fusion);
    return {200, "image/png", to_body(encode_png8(out))};
}

HttpResponse PreviewService::defocus(const std::string& id, const std::string& focal_text) {
    const auto entry = find(id);
    if (!entry) return error_response(404, "unknown session");
    double focal = 0.0;
    if (!parse_number(focal_text, focal)) return error_response(422, "focal query parameter must be a number");
    if (!(focal >= 0.0 && focal <= 1.0)) return error_response(422, "focal must be in [0,1]");
    const DefocusMap map = entry->session.defocus_at(focal);
    return {200, "image/png", to_body(encode_png16(map.raster))};
}

struct PreviewServer::Impl {
    PreviewService& service;
    httplib::Server server;
    std::thread thread;

    explicit Impl(PreviewService& s) : service(s) {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        auto reply = [](httplib::Response& res, const HttpResponse& r) {
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_file("image") || !req.has_file("disparity")) {
                reply(res, HttpResponse{400, "application/json",
                                        json{{"error", "multipart fields 'image' and 'disparity' are required"}}.dump()});
                return;
            }
            reply(res, service.create_session(req.get_file_value("image").content,
                                              req.get_file_value("disparity").content));
        });
        server.Post(R"(/sessions/([^/]+)/render)", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.render(req.matches[1], req.body));
        });
        server.Get(R"(/sessions/([^/]+)/defocus)", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, service.defocus(req.matches[1], req.has_param("focal") ? req.get_param_value("focal") : ""));
        });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string reason = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                reason = e.what();
            } catch (...) {
            }
            res.status = 500;
            res.set_content(json{{"error", reason}}.dump(), "application/json");
        });
    }
};

PreviewServer::PreviewServer(PreviewService& service) : impl_(std::make_unique<Impl>(service)) {}

PreviewServer::~PreviewServer() { stop(); }

int PreviewServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw std::runtime_error("cannot bind to " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw std::runtime_error("cannot bind to " + host + ":" + std::to_string(port));
    return port;
}

void PreviewServer::listen() {
    if (!impl_->server.listen_after_bind()) throw std::runtime_error("server stopped unexpectedly");
}

void PreviewServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void PreviewServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace softbokeh
