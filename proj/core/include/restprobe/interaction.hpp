#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "restprobe/oas_model.hpp"

namespace restprobe {

using json = nlohmann::json;

enum class OutcomeClass { Success2xx, ClientError4xx, ServerError5xx, TransportError };

const char* to_string(OutcomeClass o);
std::optional<OutcomeClass> outcome_from_string(const std::string& s);

/// Pure status classification. 1xx and 3xx map to ClientError4xx for reward
/// purposes; callers that care can still see the raw status on the
/// Interaction. status <= 0 encodes the absence of a response.
OutcomeClass classify_status(int status);

/// How a parameter value in a request came to be.
struct Provenance {
    json value;
    std::string source;  // value-source name, or "mutated:<operator>"
    std::vector<std::pair<std::string, std::string>> decisions;  // (agent key, option)
};

struct ConcreteRequest {
    oas::HttpMethod method = oas::HttpMethod::Get;
    std::string path;  // placeholders substituted, segments percent-encoded
    std::vector<std::pair<std::string, std::string>> query;
    std::vector<std::pair<std::string, std::string>> headers;
    std::optional<json> body;
    int op_index = -1;
    std::map<std::string, Provenance> provenance;  // by parameter name

    /// Path plus encoded query string, as sent on the wire.
    std::string target() const;
};

struct MissingPathParameter : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Assembles a wire-ready request from parameter assignments. Path
/// parameters are substituted into the template (percent-encoded), query
/// parameters are encoded (arrays as repeated keys), body fields are merged
/// into a single JSON object, and auth headers are appended last.
ConcreteRequest build_request(const oas::OperationSpec& op,
                              const std::map<std::string, json>& assignments,
                              const std::vector<std::pair<std::string, std::string>>& auth_headers = {});

std::string percent_encode(const std::string& raw);

struct BackendResponse {
    int status = 0;  // 0 = no response (transport error)
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    std::string transport_note;  // set when status == 0
};

/// Where requests go: a real HTTP client or an in-process simulation.
/// Implementations must be callable sequentially from one thread.
class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendResponse execute(const ConcreteRequest& request) = 0;
    virtual void reset() {}  // no-op for real HTTP targets
};

inline constexpr std::size_t kBodyCaptureLimit = 64 * 1024;

enum class InteractionKind { Explore, Mutant };

struct Interaction {
    std::uint64_t sequence = 0;
    std::int64_t timestamp_ms = 0;
    int op_index = -1;
    InteractionKind kind = InteractionKind::Explore;
    std::string mutator;  // set for mutants
    ConcreteRequest request;
    int status = 0;
    std::vector<std::pair<std::string, std::string>> response_headers;
    std::string response_body;  // truncated at kBodyCaptureLimit
    OutcomeClass outcome = OutcomeClass::TransportError;
    std::string transport_note;
    double elapsed_ms = 0.0;
};

/// Executes one request and classifies the outcome. Never throws; transport
/// failures are encoded in the returned Interaction.
Interaction execute(const ConcreteRequest& request, Backend& backend, std::uint64_t sequence);

json interaction_to_json(const Interaction& interaction);
Interaction interaction_from_json(const json& j);

}  // namespace restprobe
