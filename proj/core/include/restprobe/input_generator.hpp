#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "restprobe/interaction.hpp"
#include "restprobe/oas_model.hpp"
#include "restprobe/rand_util.hpp"

namespace restprobe {

enum class ValueSource {
    Random,
    Default,
    Enum,
    Examples,
    ResponseDictionary,
    LastResponseDictionary,
    RequestDictionary,
    LastRequestDictionary,
    LargeLanguageModelDictionary,
};

inline constexpr ValueSource kAllValueSources[] = {
    ValueSource::Random,
    ValueSource::Default,
    ValueSource::Enum,
    ValueSource::Examples,
    ValueSource::ResponseDictionary,
    ValueSource::LastResponseDictionary,
    ValueSource::RequestDictionary,
    ValueSource::LastRequestDictionary,
    ValueSource::LargeLanguageModelDictionary,
};

const char* to_string(ValueSource s);

/// Cumulative +1 reward tallies for every (parameter, decision kind) agent.
/// Keys use the normalized parameter name, so experience gathered on
/// `productId` in one operation also steers `product_id` elsewhere.
class ExperienceStore {
public:
    using Tallies = std::map<std::string, std::uint64_t>;

    static std::string agent_key(const std::string& normalized_name, const std::string& kind) {
        return normalized_name + "|" + kind;
    }

    void bump(const std::string& key, const std::string& option) { store_[key][option] += 1; }
    const Tallies* tallies(const std::string& key) const {
        const auto it = store_.find(key);
        return it == store_.end() ? nullptr : &it->second;
    }
    std::uint64_t tally(const std::string& key, const std::string& option) const;
    const std::map<std::string, Tallies>& all() const { return store_; }
    json to_json() const;

private:
    std::map<std::string, Tallies> store_;
};

/// Observed values keyed by normalized parameter name. Response and request
/// dictionaries are bounded rings (recency preserved, duplicates allowed);
/// the LLM dictionary is loaded once per session.
struct ValueDictionaries {
    static constexpr std::size_t kCapacity = 1000;

    std::map<std::string, std::deque<json>> response_values;
    std::map<std::string, std::deque<json>> request_values;
    std::map<std::string, std::vector<json>> llm_values;

    void push_response(const std::string& normalized_key, json value);
    void push_request(const std::string& normalized_key, json value);
    bool has_response(const std::string& normalized_key) const;
    bool has_request(const std::string& normalized_key) const;
    bool has_llm(const std::string& normalized_key) const;
};

struct NoFeasibleClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SourceNotApplicable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using DecisionTrace = std::vector<std::pair<std::string, std::string>>;

/// Probability matching over reward tallies: with probability epsilon pick
/// uniformly; otherwise pick option d with probability R_d / sum(R). All-zero
/// tallies fall back to a uniform pick.
std::string probability_match(const std::map<std::string, std::uint64_t>& tallies, double epsilon,
                              DetRng& rng);

/// Include/exclude decision for one optional parameter. Required parameters
/// never reach this call.
bool decide_presence(const oas::ParameterSpec& param, const ExperienceStore& store, double epsilon,
                     DetRng& rng, DecisionTrace& trace);

/// Picks a length class (A: 0, B: 1, C: >= 2) compatible with the schema's
/// item bounds, then a concrete length. Throws NoFeasibleClass when the
/// bounds rule out all three classes.
std::size_t decide_array_length(const std::string& normalized_name, const oas::Schema& schema,
                                const ExperienceStore& store, double epsilon, DetRng& rng,
                                DecisionTrace& trace);

/// Sources that can currently produce a value for this parameter. Random is
/// always applicable; the rest require OAS data or a non-empty dictionary.
std::vector<ValueSource> applicable_sources(const oas::ParameterSpec& param,
                                            const ValueDictionaries& dicts);

ValueSource select_value_source(const oas::ParameterSpec& param, const ExperienceStore& store,
                                const ValueDictionaries& dicts, double epsilon, DetRng& rng,
                                DecisionTrace& trace);

/// Constraint-respecting draw for any schema, with no bandit involvement.
/// Optional object properties are included with probability one half; array
/// lengths are uniform within bounds (default ceiling 5).
json random_value_for_schema(const oas::Schema& schema, DetRng& rng);

/// Materializes a value for a primitive parameter from the chosen source.
/// Compound schemas are delegated to the recursive generator, which makes
/// its own per-leaf decisions. Throws SourceNotApplicable.
json generate_value(const oas::ParameterSpec& param, ValueSource source,
                    const ValueDictionaries& dicts, DetRng& rng);

/// Applies the +1 reward to every decision that shaped a successful request.
/// Outcomes other than 2xx leave the store untouched.
void reward_decisions(const DecisionTrace& trace, OutcomeClass outcome, ExperienceStore& store);

/// Harvests a finished interaction into the dictionaries: on 2xx, response
/// body leaves go to the response dictionary and request parameter values to
/// the request dictionary. Returns a warning line when the response body was
/// not parseable JSON.
std::optional<std::string> harvest(const Interaction& interaction, ValueDictionaries& dicts,
                                   bool include_request_values = true);

/// Flattens a JSON tree to (normalized leaf key, scalar value) pairs. A
/// non-empty root_key names leaves reached without passing an object key
/// (scalars, arrays of scalars).
std::vector<std::pair<std::string, json>> flatten_leaves(const json& body,
                                                         const std::string& root_key = "");

/// One value assignment produced for an operation parameter.
struct GeneratedParameter {
    json value;
    Provenance provenance;
};

struct Assignments {
    std::map<std::string, json> values;
    std::map<std::string, Provenance> provenance;
    DecisionTrace trace;  // every bandit decision behind this request
};

/// Bundles the bandit state needed while assembling requests. Owned by one
/// session thread.
class InputGenerator {
public:
    InputGenerator(ExperienceStore& store, ValueDictionaries& dicts, double epsilon, DetRng& rng)
        : store_(store), dicts_(dicts), epsilon_(epsilon), rng_(rng) {}

    /// Decides presence for optional parameters, picks sources and
    /// materializes concrete values for one operation invocation.
    Assignments build_assignments(const oas::OperationSpec& op);

    GeneratedParameter generate_parameter(const oas::ParameterSpec& param, DecisionTrace& trace);

    double epsilon() const { return epsilon_; }

private:
    json generate_node(const std::string& display_name, const std::string& normalized_name,
                       const oas::Schema& schema, const std::string& description,
                       DecisionTrace& trace, std::string* top_source, int depth);

    ExperienceStore& store_;
    ValueDictionaries& dicts_;
    double epsilon_;
    DetRng& rng_;
};

}  // namespace restprobe
