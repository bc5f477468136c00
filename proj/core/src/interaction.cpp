#include "restprobe/interaction.hpp"

#include <chrono>

namespace restprobe {

namespace {

std::string json_scalar_to_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

void append_query(std::vector<std::pair<std::string, std::string>>& query, const std::string& name,
                  const json& value) {
    if (value.is_array()) {
        // form/explode style: repeated keys
        for (const auto& item : value) query.emplace_back(name, json_scalar_to_text(item));
    } else {
        query.emplace_back(name, json_scalar_to_text(value));
    }
}

}  // namespace

const char* to_string(OutcomeClass o) {
    switch (o) {
        case OutcomeClass::Success2xx: return "success_2xx";
        case OutcomeClass::ClientError4xx: return "client_error_4xx";
        case OutcomeClass::ServerError5xx: return "server_error_5xx";
        case OutcomeClass::TransportError: return "transport_error";
    }
    return "transport_error";
}

std::optional<OutcomeClass> outcome_from_string(const std::string& s) {
    if (s == "success_2xx") return OutcomeClass::Success2xx;
    if (s == "client_error_4xx") return OutcomeClass::ClientError4xx;
    if (s == "server_error_5xx") return OutcomeClass::ServerError5xx;
    if (s == "transport_error") return OutcomeClass::TransportError;
    return std::nullopt;
}

OutcomeClass classify_status(int status) {
    if (status <= 0) return OutcomeClass::TransportError;
    const int family = status / 100;
    if (family == 2) return OutcomeClass::Success2xx;
    if (family == 5) return OutcomeClass::ServerError5xx;
    return OutcomeClass::ClientError4xx;
}

std::string percent_encode(const std::string& raw) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(raw.size());
    for (unsigned char c : raw) {
        const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                                (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' ||
                                c == '~';
        if (unreserved) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0x0F];
        }
    }
    return out;
}

std::string ConcreteRequest::target() const {
    std::string t = path;
    char sep = '?';
    for (const auto& [k, v] : query) {
        t += sep;
        t += percent_encode(k);
        t += '=';
        t += percent_encode(v);
        sep = '&';
    }
    return t;
}

ConcreteRequest build_request(const oas::OperationSpec& op,
                              const std::map<std::string, json>& assignments,
                              const std::vector<std::pair<std::string, std::string>>& auth_headers) {
    ConcreteRequest req;
    req.method = op.method;
    req.op_index = op.index;
    req.path = op.path;

    json body = json::object();
    bool has_body_field = false;

    for (const auto& param : op.parameters) {
        const auto it = assignments.find(param.name);
        if (it == assignments.end()) continue;
        switch (param.location) {
            case oas::ParamLocation::Path: {
                const std::string placeholder = "{" + param.name + "}";
                const auto pos = req.path.find(placeholder);
                if (pos != std::string::npos)
                    req.path.replace(pos, placeholder.size(),
                                     percent_encode(json_scalar_to_text(it->second)));
                break;
            }
            case oas::ParamLocation::Query:
                append_query(req.query, param.name, it->second);
                break;
            case oas::ParamLocation::Header:
                req.headers.emplace_back(param.name, json_scalar_to_text(it->second));
                break;
            case oas::ParamLocation::BodyField:
                body[param.name] = it->second;
                has_body_field = true;
                break;
        }
    }
    if (has_body_field) req.body = body;

    if (req.path.find('{') != std::string::npos)
        throw MissingPathParameter("unresolved placeholder in path template " + op.path);

    for (const auto& h : auth_headers) req.headers.push_back(h);
    return req;
}

Interaction execute(const ConcreteRequest& request, Backend& backend, std::uint64_t sequence) {
    Interaction ix;
    ix.sequence = sequence;
    ix.op_index = request.op_index;
    ix.request = request;
    ix.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();

    const auto start = std::chrono::steady_clock::now();
    const BackendResponse resp = backend.execute(request);
    const auto stop = std::chrono::steady_clock::now();
    ix.elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();

    ix.status = resp.status;
    ix.response_headers = resp.headers;
    ix.response_body = resp.body.size() > kBodyCaptureLimit
                           ? resp.body.substr(0, kBodyCaptureLimit)
                           : resp.body;
    ix.transport_note = resp.transport_note;
    ix.outcome = classify_status(resp.status);
    return ix;
}

json interaction_to_json(const Interaction& ix) {
    json prov = json::object();
    for (const auto& [name, p] : ix.request.provenance) {
        json decisions = json::array();
        for (const auto& [agent, option] : p.decisions) decisions.push_back({agent, option});
        prov[name] = {{"value", p.value}, {"source", p.source}, {"decisions", decisions}};
    }
    json req = {{"method", oas::to_string(ix.request.method)},
                {"path", ix.request.path},
                {"query", ix.request.query},
                {"headers", ix.request.headers},
                {"provenance", prov}};
    if (ix.request.body) req["body"] = *ix.request.body;

    json j = {{"v", 1},
              {"seq", ix.sequence},
              {"ts_ms", ix.timestamp_ms},
              {"op_index", ix.op_index},
              {"kind", ix.kind == InteractionKind::Explore ? "explore" : "mutant"},
              {"request", req},
              {"status", ix.status},
              {"response_body", ix.response_body},
              {"outcome", to_string(ix.outcome)},
              {"elapsed_ms", ix.elapsed_ms}};
    if (!ix.mutator.empty()) j["mutator"] = ix.mutator;
    if (!ix.transport_note.empty()) j["transport_note"] = ix.transport_note;
    if (!ix.response_headers.empty()) j["response_headers"] = ix.response_headers;
    return j;
}

Interaction interaction_from_json(const json& j) {
    if (j.value("v", 0) != 1) throw std::runtime_error("unsupported interaction log version");
    Interaction ix;
    ix.sequence = j.at("seq").get<std::uint64_t>();
    ix.timestamp_ms = j.value("ts_ms", static_cast<std::int64_t>(0));
    ix.op_index = j.at("op_index").get<int>();
    ix.kind = j.value("kind", "explore") == "mutant" ? InteractionKind::Mutant
                                                     : InteractionKind::Explore;
    ix.mutator = j.value("mutator", "");
    ix.status = j.at("status").get<int>();
    ix.response_body = j.value("response_body", "");
    ix.transport_note = j.value("transport_note", "");
    if (j.contains("response_headers"))
        ix.response_headers =
            j["response_headers"].get<std::vector<std::pair<std::string, std::string>>>();
    const auto outcome = outcome_from_string(j.at("outcome").get<std::string>());
    ix.outcome = outcome ? *outcome : classify_status(ix.status);
    ix.elapsed_ms = j.value("elapsed_ms", 0.0);

    const auto& req = j.at("request");
    const auto method = oas::method_from_string(req.at("method").get<std::string>());
    if (!method) throw std::runtime_error("bad method in interaction log");
    ix.request.method = *method;
    ix.request.path = req.at("path").get<std::string>();
    ix.request.op_index = ix.op_index;
    ix.request.query = req.value("query", std::vector<std::pair<std::string, std::string>>{});
    ix.request.headers = req.value("headers", std::vector<std::pair<std::string, std::string>>{});
    if (req.contains("body")) ix.request.body = req["body"];
    if (req.contains("provenance")) {
        for (const auto& [name, p] : req["provenance"].items()) {
            Provenance prov;
            prov.value = p.value("value", json());
            prov.source = p.value("source", "");
            if (p.contains("decisions")) {
                for (const auto& d : p["decisions"])
                    prov.decisions.emplace_back(d[0].get<std::string>(), d[1].get<std::string>());
            }
            ix.request.provenance[name] = std::move(prov);
        }
    }
    return ix;
}

}  // namespace restprobe
