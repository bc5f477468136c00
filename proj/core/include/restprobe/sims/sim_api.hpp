#pragma once

#include <memory>
#include <string>

#include "restprobe/interaction.hpp"

namespace restprobe::sims {

/// Deterministic in-process API with stateful business logic. The emitted
/// OAS deliberately documents only the surface: logic dependencies between
/// operations stay hidden, exactly like a real black-box target.
class SimApi : public Backend {
public:
    virtual std::string name() const = 0;
    virtual std::string openapi_yaml() const = 0;
};

/// Creates a sim by selector: "ecomm", "chain" / "chainN" (N stages), or
/// "flaky". Returns nullptr for unknown names.
std::unique_ptr<SimApi> make_sim(const std::string& selector, std::uint64_t seed);

namespace detail {

/// First query value for a key, if any.
const std::string* query_value(const ConcreteRequest& req, const std::string& key);

/// Strict base-10 integer parse; rejects trailing garbage.
std::optional<std::int64_t> parse_int(const std::string& text);

BackendResponse json_response(int status, const json& body);

}  // namespace detail

}  // namespace restprobe::sims
