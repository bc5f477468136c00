#include "restprobe/sims/server.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>

namespace restprobe::sims {

struct SimServer::Impl {
    std::unique_ptr<SimApi> sim;
    httplib::Server server;
    std::thread worker;
    std::mutex sim_mutex;
    int bound_port = -1;

    void handle(const httplib::Request& req, httplib::Response& res, oas::HttpMethod method) {
        ConcreteRequest cr;
        cr.method = method;
        cr.path = req.path;
        for (const auto& [k, v] : req.params) cr.query.emplace_back(k, v);
        for (const auto& [k, v] : req.headers) cr.headers.emplace_back(k, v);
        if (!req.body.empty()) {
            json body = json::parse(req.body, nullptr, false);
            if (!body.is_discarded()) cr.body = std::move(body);
        }

        BackendResponse sim_resp;
        {
            std::lock_guard<std::mutex> lock(sim_mutex);
            sim_resp = sim->execute(cr);
        }
        res.status = sim_resp.status;
        std::string content_type = "application/json";
        for (const auto& [k, v] : sim_resp.headers) {
            if (k == "Content-Type") content_type = v;
            else res.set_header(k, v);
        }
        res.set_content(sim_resp.body, content_type);
    }
};

SimServer::SimServer(std::unique_ptr<SimApi> sim) : impl_(std::make_unique<Impl>()) {
    impl_->sim = std::move(sim);
    auto* impl = impl_.get();
    const auto bind = [impl](oas::HttpMethod m) {
        return [impl, m](const httplib::Request& req, httplib::Response& res) {
            impl->handle(req, res, m);
        };
    };
    const std::string any = R"(/.*)";
    impl_->server.Get(any, bind(oas::HttpMethod::Get));
    impl_->server.Post(any, bind(oas::HttpMethod::Post));
    impl_->server.Put(any, bind(oas::HttpMethod::Put));
    impl_->server.Patch(any, bind(oas::HttpMethod::Patch));
    impl_->server.Delete(any, bind(oas::HttpMethod::Delete));
}

SimServer::~SimServer() { stop(); }

int SimServer::start(const std::string& host, int port) {
    if (port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port(host);
    } else {
        if (!impl_->server.bind_to_port(host, port)) return -1;
        impl_->bound_port = port;
    }
    if (impl_->bound_port <= 0) return -1;
    impl_->worker = std::thread([this]() { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->bound_port;
}

void SimServer::stop() {
    if (impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

int SimServer::port() const { return impl_->bound_port; }

}  // namespace restprobe::sims
