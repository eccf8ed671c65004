#include "httplib.h"
#include "json.hpp"
#include "refind/service.hpp"

namespace refind::service {

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;
    int port = -1;

    explicit Impl(Service& s) : service(s) {}
};

namespace {

void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
    auto& srv = impl_->server;
    Service& svc = impl_->service;

    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.healthz()); });
    srv.Post("/sessions", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.create_session()); });
    srv.Get(R"(/sessions/([^/]+)/question)", [&svc](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.current_question(req.matches[1]));
    });
    srv.Post(R"(/sessions/([^/]+)/answer)", [&svc](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.answer(req.matches[1], req.body));
    });
    srv.Post(R"(/sessions/([^/]+)/skip)", [&svc](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.skip(req.matches[1], req.body));
    });
    srv.Get(R"(/sessions/([^/]+)/results)", [&svc](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.results(req.matches[1]));
    });
    srv.Get(R"(/sessions/([^/]+)/transcript)", [&svc](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.transcript(req.matches[1]));
    });

    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) res.set_content(R"({"error":"no such endpoint"})", "application/json");
    });
    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(nlohmann::json{{"error", what}}.dump(), "application/json");
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    return impl_->port;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace refind::service
