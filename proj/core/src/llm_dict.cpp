#include "restprobe/llm_dict.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>

namespace restprobe {

namespace {

void warn(std::vector<std::string>* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

}  // namespace

LlmDictionary load_llm_dictionary_file(const std::string& path,
                                       std::vector<std::string>* warnings) {
    LlmDictionary dict;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        warn(warnings, "LLM dictionary file not readable: " + path);
        return dict;
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        warn(warnings, "LLM dictionary file is not a JSON object: " + path);
        return dict;
    }
    for (const auto& [name, values] : j.items()) {
        if (!values.is_array()) {
            warn(warnings, "LLM dictionary entry '" + name + "' is not an array, skipped");
            continue;
        }
        auto& bucket = dict[oas::normalize_name(name)];
        for (const auto& v : values) {
            if (v.is_structured()) {
                warn(warnings, "LLM dictionary entry '" + name + "' holds a non-scalar, skipped");
                continue;
            }
            bucket.push_back(v);
        }
    }
    return dict;
}

std::string llm_prompt(const oas::OperationSpec& op, const oas::ParameterSpec& param,
                       int min_values) {
    std::ostringstream out;
    out << "Suggest at least " << min_values << " realistic values for an HTTP API parameter.\n"
        << "Operation: " << oas::to_string(op.method) << " " << op.path << "\n";
    if (!op.description.empty()) out << "Operation description: " << op.description << "\n";
    out << "Parameter name: " << param.name << "\n"
        << "Parameter type: " << oas::to_string(param.schema.kind) << "\n";
    if (!param.description.empty()) out << "Parameter description: " << param.description << "\n";
    out << "Reply with a JSON array of values.";
    return out.str();
}

LlmDictionary fetch_llm_dictionary(const std::string& endpoint_url, const oas::ApiModel& api,
                                   double timeout_s, std::vector<std::string>* warnings) {
    LlmDictionary dict;

    const auto scheme_end = endpoint_url.find("://");
    const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = endpoint_url.find('/', host_start);
    const std::string host = path_start == std::string::npos ? endpoint_url
                                                             : endpoint_url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/"
                                                             : endpoint_url.substr(path_start);

    httplib::Client client(host);
    client.set_connection_timeout(static_cast<time_t>(timeout_s), 0);
    client.set_read_timeout(static_cast<time_t>(timeout_s), 0);

    std::set<std::string> asked;  // one query per normalized name
    constexpr int kMinValues = 20;
    for (const auto& op : api.operations) {
        for (const auto& param : op.parameters) {
            if (!asked.insert(param.normalized_name).second) continue;
            const nlohmann::json payload = {{"prompt", llm_prompt(op, param, kMinValues)}};
            auto result = client.Post(path, payload.dump(), "application/json");
            if (!result || result->status / 100 != 2) {
                warn(warnings, "LLM endpoint failed for parameter '" + param.name +
                                   "', source stays inapplicable");
                continue;
            }
            nlohmann::json body = nlohmann::json::parse(result->body, nullptr, false);
            if (body.is_discarded() || !body.contains("values") || !body["values"].is_array()) {
                warn(warnings, "LLM endpoint returned no values array for '" + param.name + "'");
                continue;
            }
            auto& bucket = dict[param.normalized_name];
            for (const auto& v : body["values"])
                if (!v.is_structured()) bucket.push_back(v);
            if (bucket.size() < kMinValues)
                warn(warnings, "LLM endpoint returned only " + std::to_string(bucket.size()) +
                                   " values for '" + param.name + "'");
        }
    }
    return dict;
}

}  // namespace restprobe
