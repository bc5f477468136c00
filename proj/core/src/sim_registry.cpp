#include <cctype>

#include "restprobe/sims/chain.hpp"
#include "restprobe/sims/ecomm.hpp"
#include "restprobe/sims/flaky.hpp"

namespace restprobe::sims {

namespace detail {

const std::string* query_value(const ConcreteRequest& req, const std::string& key) {
    for (const auto& [k, v] : req.query)
        if (k == key) return &v;
    return nullptr;
}

std::optional<std::int64_t> parse_int(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::size_t i = text[0] == '-' || text[0] == '+' ? 1 : 0;
    if (i == text.size()) return std::nullopt;
    for (std::size_t k = i; k < text.size(); ++k)
        if (std::isdigit(static_cast<unsigned char>(text[k])) == 0) return std::nullopt;
    try {
        return std::stoll(text);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

BackendResponse json_response(int status, const json& body) {
    BackendResponse resp;
    resp.status = status;
    resp.body = body.dump();
    resp.headers = {{"Content-Type", "application/json"}};
    return resp;
}

}  // namespace detail

std::unique_ptr<SimApi> make_sim(const std::string& selector, std::uint64_t seed) {
    if (selector == "ecomm") return std::make_unique<SimEComm>(seed);
    if (selector == "flaky") return std::make_unique<SimFlaky5xx>(seed);
    if (selector.rfind("chain", 0) == 0) {
        int stages = 4;
        const std::string suffix = selector.substr(5);
        if (!suffix.empty()) {
            const auto parsed = detail::parse_int(suffix);
            if (!parsed || *parsed < 1 || *parsed > 16) return nullptr;
            stages = static_cast<int>(*parsed);
        }
        return std::make_unique<SimChain>(stages, seed);
    }
    return nullptr;
}

}  // namespace restprobe::sims
