#include "restprobe/sims/chain.hpp"

#include <sstream>

namespace restprobe::sims {

using detail::json_response;
using detail::parse_int;

SimChain::SimChain(int stages, std::uint64_t seed)
    : stages_(stages), seed_(seed), rng_(split_seed(seed, 0x51AC)) {
    if (stages_ < 1) stages_ = 1;
    stores_.resize(static_cast<std::size_t>(stages_));
}

std::string SimChain::name() const { return "chain" + std::to_string(stages_); }

std::string SimChain::stage_path(int k) { return "/chain/stage" + std::to_string(k); }

std::string SimChain::id_field(int k) { return "stage" + std::to_string(k) + "Id"; }

void SimChain::reset() {
    for (auto& store : stores_) store.clear();
    rng_ = DetRng(split_seed(seed_, 0x51AC));  // replay the same id stream
}

BackendResponse SimChain::execute(const ConcreteRequest& req) {
    int stage = -1;
    for (int k = 0; k < stages_; ++k) {
        if (req.path == stage_path(k)) {
            stage = k;
            break;
        }
    }
    if (stage < 0) return json_response(404, {{"error", "no such route"}});
    if (req.method != oas::HttpMethod::Post)
        return json_response(405, {{"error", "method not allowed"}});

    std::optional<std::int64_t> parent_id;
    if (stage > 0) {
        const std::string field = id_field(stage - 1);
        if (!req.body || !req.body->is_object() || !req.body->contains(field))
            return json_response(400, {{"error", "missing required field " + field}});
        const json& raw = (*req.body)[field];
        if (raw.is_number_integer()) parent_id = raw.get<std::int64_t>();
        else if (raw.is_string()) parent_id = parse_int(raw.get<std::string>());
        if (!parent_id) return json_response(400, {{"error", field + " must be an integer"}});

        auto& parents = stores_[static_cast<std::size_t>(stage - 1)];
        const auto it = parents.find(*parent_id);
        if (it == parents.end())
            return json_response(404, {{"error", "unknown " + field}});
        if (it->second.consumed)
            return json_response(409, {{"error", field + " already used"}});
        it->second.consumed = true;
    }

    const std::int64_t id = static_cast<std::int64_t>(rng_.bits() >> 1);
    stores_[static_cast<std::size_t>(stage)][id] = Resource{};
    json body = {{id_field(stage), id}};
    // the created resource embeds its parent reference, like most REST APIs
    if (parent_id) body[id_field(stage - 1)] = *parent_id;
    return json_response(201, body);
}

std::string SimChain::openapi_yaml() const {
    std::ostringstream out;
    out << "openapi: \"3.0.0\"\n"
        << "info:\n"
        << "  version: 1.0.0\n"
        << "  title: \"Staged Pipeline\"\n"
        << "servers:\n"
        << "  - url: http://sim.invalid/v1\n"
        << "paths:\n";
    for (int k = 0; k < stages_; ++k) {
        out << "  " << stage_path(k) << ":\n"
            << "    post:\n"
            << "      summary: \"Create a stage " << k << " resource\"\n"
            << "      operationId: createStage" << k << "\n";
        if (k > 0) {
            out << "      requestBody:\n"
                << "        required: true\n"
                << "        content:\n"
                << "          application/json:\n"
                << "            schema:\n"
                << "              type: object\n"
                << "              required:\n"
                << "                - " << id_field(k - 1) << "\n"
                << "              properties:\n"
                << "                " << id_field(k - 1) << ":\n"
                << "                  type: integer\n"
                << "                  format: int64\n";
        }
        out << "      responses:\n"
            << "        '201':\n"
            << "          description: \"Created\"\n"
            << "          content:\n"
            << "            application/json:\n"
            << "              schema:\n"
            << "                type: object\n"
            << "                properties:\n"
            << "                  " << id_field(k) << ":\n"
            << "                    type: integer\n"
            << "                    format: int64\n";
        if (k > 0) {
            out << "                  " << id_field(k - 1) << ":\n"
                << "                    type: integer\n"
                << "                    format: int64\n";
        }
    }
    return out.str();
}

}  // namespace restprobe::sims
