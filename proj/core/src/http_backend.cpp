#include "restprobe/http_backend.hpp"

#include <cmath>

#include <httplib.h>

namespace restprobe {

namespace {

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string base_path;  // possibly empty, no trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
    ParsedUrl out;
    const auto scheme_end = url.find("://");
    const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) {
        out.host_port = url;
    } else {
        out.host_port = url.substr(0, path_start);
        out.base_path = url.substr(path_start);
        while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
    }
    return out;
}

}  // namespace

struct HttpBackend::Impl {
    explicit Impl(Options opts)
        : options(std::move(opts)), url(parse_base_url(options.base_url)), client(url.host_port) {
        const auto secs = static_cast<time_t>(options.timeout_s);
        const auto usecs =
            static_cast<time_t>((options.timeout_s - std::floor(options.timeout_s)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        client.set_follow_location(false);
        client.set_keep_alive(true);
    }

    Options options;
    ParsedUrl url;
    httplib::Client client;
};

HttpBackend::HttpBackend(Options options) : impl_(std::make_unique<Impl>(std::move(options))) {}
HttpBackend::~HttpBackend() = default;

BackendResponse HttpBackend::execute(const ConcreteRequest& request) {
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    const std::string target = impl_->url.base_path + request.target();
    std::string body;
    std::string content_type = "application/json";
    if (request.body) body = request.body->dump();

    httplib::Result result;
    auto& c = impl_->client;
    switch (request.method) {
        case oas::HttpMethod::Get:
            result = c.Get(target, headers);
            break;
        case oas::HttpMethod::Post:
            result = c.Post(target, headers, body, content_type);
            break;
        case oas::HttpMethod::Put:
            result = c.Put(target, headers, body, content_type);
            break;
        case oas::HttpMethod::Patch:
            result = c.Patch(target, headers, body, content_type);
            break;
        case oas::HttpMethod::Delete:
            result = c.Delete(target, headers);
            break;
    }

    BackendResponse resp;
    if (!result) {
        resp.status = 0;
        resp.transport_note = httplib::to_string(result.error());
        return resp;
    }
    resp.status = result->status;
    resp.body = result->body;
    for (const auto& [k, v] : result->headers) resp.headers.emplace_back(k, v);
    return resp;
}

bool HttpBackend::reachable() {
    const std::string target = impl_->url.base_path.empty() ? "/" : impl_->url.base_path;
    auto result = impl_->client.Get(target);
    return static_cast<bool>(result);
}

}  // namespace restprobe
