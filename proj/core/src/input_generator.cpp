#include "restprobe/input_generator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace restprobe {

namespace {

constexpr int kMaxDepth = 16;
constexpr std::size_t kDefaultMaxArrayLen = 5;
constexpr std::size_t kDefaultMaxStringLen = 10;

const char* kPresenceKind = "presence";
const char* kArrayLenKind = "arraylen";
const char* kSourceKind = "source";

std::string random_string(std::size_t lo, std::size_t hi, DetRng& rng) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    const auto len = static_cast<std::size_t>(
        rng.range(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
    std::string out;
    out.reserve(len);
    for (std::size_t i = 0; i < len; ++i)
        out += alphabet[static_cast<std::size_t>(rng.range(0, 61))];
    return out;
}

const json& pick(const std::vector<json>& values, DetRng& rng) {
    return values[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(values.size()) - 1))];
}

const json& pick(const std::deque<json>& values, DetRng& rng) {
    return values[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(values.size()) - 1))];
}

struct LengthClassChoice {
    std::string label;
    std::size_t lo;
    std::size_t hi;
};

std::vector<LengthClassChoice> feasible_length_classes(const oas::Schema& schema) {
    const std::size_t min_items = schema.min_items.value_or(0);
    const std::optional<std::size_t> max_items = schema.max_items;
    std::vector<LengthClassChoice> classes;
    if (min_items == 0 && (!max_items || *max_items >= 0)) classes.push_back({"A", 0, 0});
    if (min_items <= 1 && (!max_items || *max_items >= 1)) classes.push_back({"B", 1, 1});
    if (!max_items || *max_items >= 2) {
        std::size_t lo = std::max<std::size_t>(2, min_items);
        std::size_t hi = std::min<std::size_t>(max_items.value_or(kDefaultMaxArrayLen),
                                               kDefaultMaxArrayLen);
        if (hi < lo) hi = lo;  // min_items above the default ceiling
        classes.push_back({"C", lo, hi});
    }
    return classes;
}

}  // namespace

const char* to_string(ValueSource s) {
    switch (s) {
        case ValueSource::Random: return "Random";
        case ValueSource::Default: return "Default";
        case ValueSource::Enum: return "Enum";
        case ValueSource::Examples: return "Examples";
        case ValueSource::ResponseDictionary: return "ResponseDictionary";
        case ValueSource::LastResponseDictionary: return "LastResponseDictionary";
        case ValueSource::RequestDictionary: return "RequestDictionary";
        case ValueSource::LastRequestDictionary: return "LastRequestDictionary";
        case ValueSource::LargeLanguageModelDictionary: return "LargeLanguageModelDictionary";
    }
    return "Random";
}

std::uint64_t ExperienceStore::tally(const std::string& key, const std::string& option) const {
    const auto it = store_.find(key);
    if (it == store_.end()) return 0;
    const auto jt = it->second.find(option);
    return jt == it->second.end() ? 0 : jt->second;
}

json ExperienceStore::to_json() const {
    json out = json::object();
    for (const auto& [key, tallies] : store_) {
        json inner = json::object();
        for (const auto& [option, count] : tallies) inner[option] = count;
        out[key] = inner;
    }
    return out;
}

void ValueDictionaries::push_response(const std::string& key, json value) {
    auto& ring = response_values[key];
    ring.push_back(std::move(value));
    if (ring.size() > kCapacity) ring.pop_front();
}

void ValueDictionaries::push_request(const std::string& key, json value) {
    auto& ring = request_values[key];
    ring.push_back(std::move(value));
    if (ring.size() > kCapacity) ring.pop_front();
}

bool ValueDictionaries::has_response(const std::string& key) const {
    const auto it = response_values.find(key);
    return it != response_values.end() && !it->second.empty();
}

bool ValueDictionaries::has_request(const std::string& key) const {
    const auto it = request_values.find(key);
    return it != request_values.end() && !it->second.empty();
}

bool ValueDictionaries::has_llm(const std::string& key) const {
    const auto it = llm_values.find(key);
    return it != llm_values.end() && !it->second.empty();
}

std::string probability_match(const std::map<std::string, std::uint64_t>& tallies, double epsilon,
                              DetRng& rng) {
    if (tallies.empty()) throw std::invalid_argument("probability_match: no options");

    std::uint64_t total = 0;
    for (const auto& [option, count] : tallies) total += count;

    const bool explore = epsilon > 0.0 && rng.unit() < epsilon;
    if (explore || total == 0) {
        const auto idx = rng.range(0, static_cast<std::int64_t>(tallies.size()) - 1);
        auto it = tallies.begin();
        std::advance(it, idx);
        return it->first;
    }

    const auto ticket = static_cast<std::uint64_t>(
        rng.range(0, static_cast<std::int64_t>(total) - 1));
    std::uint64_t acc = 0;
    for (const auto& [option, count] : tallies) {
        acc += count;
        if (ticket < acc) return option;
    }
    return tallies.rbegin()->first;
}

bool decide_presence(const oas::ParameterSpec& param, const ExperienceStore& store, double epsilon,
                     DetRng& rng, DecisionTrace& trace) {
    const auto key = ExperienceStore::agent_key(param.normalized_name, kPresenceKind);
    std::map<std::string, std::uint64_t> options = {{"include", 0}, {"exclude", 0}};
    if (const auto* t = store.tallies(key)) {
        for (auto& [option, count] : options) {
            const auto it = t->find(option);
            if (it != t->end()) count = it->second;
        }
    }
    const auto choice = probability_match(options, epsilon, rng);
    trace.emplace_back(key, choice);
    return choice == "include";
}

std::size_t decide_array_length(const std::string& normalized_name, const oas::Schema& schema,
                                const ExperienceStore& store, double epsilon, DetRng& rng,
                                DecisionTrace& trace) {
    const auto classes = feasible_length_classes(schema);
    if (classes.empty())
        throw NoFeasibleClass("array bounds leave no feasible length class for " + normalized_name);

    const auto key = ExperienceStore::agent_key(normalized_name, kArrayLenKind);
    std::map<std::string, std::uint64_t> options;
    for (const auto& c : classes) options[c.label] = store.tally(key, c.label);

    const auto label = probability_match(options, epsilon, rng);
    trace.emplace_back(key, label);
    const auto& cls = *std::find_if(classes.begin(), classes.end(),
                                    [&](const LengthClassChoice& c) { return c.label == label; });
    return static_cast<std::size_t>(rng.range(static_cast<std::int64_t>(cls.lo),
                                              static_cast<std::int64_t>(cls.hi)));
}

std::vector<ValueSource> applicable_sources(const oas::ParameterSpec& param,
                                            const ValueDictionaries& dicts) {
    std::vector<ValueSource> out;
    out.push_back(ValueSource::Random);
    if (param.schema.default_value) out.push_back(ValueSource::Default);
    if (!param.schema.enum_values.empty()) out.push_back(ValueSource::Enum);
    if (!param.schema.example_values.empty()) out.push_back(ValueSource::Examples);
    if (dicts.has_response(param.normalized_name)) {
        out.push_back(ValueSource::ResponseDictionary);
        out.push_back(ValueSource::LastResponseDictionary);
    }
    if (dicts.has_request(param.normalized_name)) {
        out.push_back(ValueSource::RequestDictionary);
        out.push_back(ValueSource::LastRequestDictionary);
    }
    if (dicts.has_llm(param.normalized_name))
        out.push_back(ValueSource::LargeLanguageModelDictionary);
    return out;
}

ValueSource select_value_source(const oas::ParameterSpec& param, const ExperienceStore& store,
                                const ValueDictionaries& dicts, double epsilon, DetRng& rng,
                                DecisionTrace& trace) {
    const auto sources = applicable_sources(param, dicts);
    const auto key = ExperienceStore::agent_key(param.normalized_name, kSourceKind);
    std::map<std::string, std::uint64_t> options;
    for (ValueSource s : sources) options[to_string(s)] = store.tally(key, to_string(s));

    const auto label = probability_match(options, epsilon, rng);
    trace.emplace_back(key, label);
    for (ValueSource s : sources)
        if (label == to_string(s)) return s;
    return ValueSource::Random;
}

json random_value_for_schema(const oas::Schema& schema, DetRng& rng) {
    if (!schema.enum_values.empty()) return pick(schema.enum_values, rng);
    switch (schema.kind) {
        case oas::SchemaKind::String: {
            std::size_t lo = std::max<std::size_t>(1, schema.min_length.value_or(1));
            std::size_t hi = std::min<std::size_t>(schema.max_length.value_or(kDefaultMaxStringLen),
                                                   kDefaultMaxStringLen);
            if (hi < lo) {
                if (schema.max_length && *schema.max_length < lo) {
                    lo = schema.min_length.value_or(0);  // maxLength forces short strings
                    hi = *schema.max_length;
                } else {
                    hi = lo;  // minLength beyond the default ceiling
                }
            }
            return random_string(lo, hi, rng);
        }
        case oas::SchemaKind::Integer: {
            const auto lo = static_cast<std::int64_t>(std::ceil(schema.minimum.value_or(0)));
            const auto hi = static_cast<std::int64_t>(std::floor(schema.maximum.value_or(100)));
            return rng.range(lo, std::max(lo, hi));
        }
        case oas::SchemaKind::Number:
            return rng.uniform(schema.minimum.value_or(0.0), schema.maximum.value_or(100.0));
        case oas::SchemaKind::Boolean:
            return rng.coin();
        case oas::SchemaKind::Array: {
            const std::size_t lo = schema.min_items.value_or(0);
            std::size_t hi = std::min<std::size_t>(schema.max_items.value_or(kDefaultMaxArrayLen),
                                                   kDefaultMaxArrayLen);
            if (hi < lo) hi = lo;
            const auto len = static_cast<std::size_t>(
                rng.range(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
            json arr = json::array();
            for (std::size_t i = 0; i < len; ++i)
                arr.push_back(schema.items ? random_value_for_schema(*schema.items, rng)
                                           : json(random_string(1, 8, rng)));
            return arr;
        }
        case oas::SchemaKind::Object: {
            json obj = json::object();
            for (const auto& prop : schema.properties) {
                if (prop.required || rng.coin())
                    obj[prop.name] = random_value_for_schema(prop.schema, rng);
            }
            return obj;
        }
    }
    return nullptr;
}

json generate_value(const oas::ParameterSpec& param, ValueSource source,
                    const ValueDictionaries& dicts, DetRng& rng) {
    const auto& schema = param.schema;
    const auto& key = param.normalized_name;
    switch (source) {
        case ValueSource::Random:
            return random_value_for_schema(schema, rng);
        case ValueSource::Default:
            if (!schema.default_value) throw SourceNotApplicable("no default for " + param.name);
            return *schema.default_value;
        case ValueSource::Enum:
            if (schema.enum_values.empty()) throw SourceNotApplicable("no enum for " + param.name);
            return pick(schema.enum_values, rng);
        case ValueSource::Examples:
            if (schema.example_values.empty())
                throw SourceNotApplicable("no examples for " + param.name);
            return pick(schema.example_values, rng);
        case ValueSource::ResponseDictionary:
            if (!dicts.has_response(key))
                throw SourceNotApplicable("response dictionary empty for " + param.name);
            return pick(dicts.response_values.at(key), rng);
        case ValueSource::LastResponseDictionary:
            if (!dicts.has_response(key))
                throw SourceNotApplicable("response dictionary empty for " + param.name);
            return dicts.response_values.at(key).back();
        case ValueSource::RequestDictionary:
            if (!dicts.has_request(key))
                throw SourceNotApplicable("request dictionary empty for " + param.name);
            return pick(dicts.request_values.at(key), rng);
        case ValueSource::LastRequestDictionary:
            if (!dicts.has_request(key))
                throw SourceNotApplicable("request dictionary empty for " + param.name);
            return dicts.request_values.at(key).back();
        case ValueSource::LargeLanguageModelDictionary:
            if (!dicts.has_llm(key))
                throw SourceNotApplicable("LLM dictionary empty for " + param.name);
            return pick(dicts.llm_values.at(key), rng);
    }
    throw SourceNotApplicable("unknown source");
}

void reward_decisions(const DecisionTrace& trace, OutcomeClass outcome, ExperienceStore& store) {
    if (outcome != OutcomeClass::Success2xx) return;  // nil reward
    for (const auto& [key, option] : trace) store.bump(key, option);
}

std::vector<std::pair<std::string, json>> flatten_leaves(const json& body, const std::string& root_key) {
    std::vector<std::pair<std::string, json>> leaves;
    const std::function<void(const std::string&, const json&)> walk =
        [&](const std::string& key, const json& node) {
            if (node.is_object()) {
                for (const auto& [k, v] : node.items()) walk(k, v);
            } else if (node.is_array()) {
                for (const auto& v : node) walk(key, v);
            } else if (!node.is_null() && !key.empty()) {
                leaves.emplace_back(oas::normalize_name(key), node);
            }
        };
    walk(root_key, body);
    return leaves;
}

std::optional<std::string> harvest(const Interaction& ix, ValueDictionaries& dicts,
                                   bool include_request_values) {
    if (ix.outcome != OutcomeClass::Success2xx) return std::nullopt;

    if (include_request_values) {
        for (const auto& [name, prov] : ix.request.provenance) {
            if (prov.value.is_null()) continue;
            for (auto& [leaf_key, leaf] : flatten_leaves(prov.value, name))
                dicts.push_request(leaf_key, std::move(leaf));
        }
    }

    if (ix.response_body.empty()) return std::nullopt;
    const json body = json::parse(ix.response_body, nullptr, false);
    if (body.is_discarded())
        return "response body of interaction " + std::to_string(ix.sequence) +
               " is not valid JSON, skipped harvesting";
    for (auto& [key, leaf] : flatten_leaves(body)) dicts.push_response(key, std::move(leaf));
    return std::nullopt;
}

Assignments InputGenerator::build_assignments(const oas::OperationSpec& op) {
    Assignments out;
    for (const auto& param : op.parameters) {
        const std::size_t trace_start = out.trace.size();
        if (!param.required) {
            if (!decide_presence(param, store_, epsilon_, rng_, out.trace)) continue;
        }
        auto generated = generate_parameter(param, out.trace);
        generated.provenance.decisions.assign(out.trace.begin() + static_cast<std::ptrdiff_t>(trace_start),
                                              out.trace.end());
        out.values[param.name] = generated.value;
        out.provenance[param.name] = std::move(generated.provenance);
    }
    return out;
}

GeneratedParameter InputGenerator::generate_parameter(const oas::ParameterSpec& param,
                                                      DecisionTrace& trace) {
    GeneratedParameter out;
    std::string top_source;
    const std::size_t trace_start = trace.size();
    out.value = generate_node(param.name, param.normalized_name, param.schema, param.description,
                              trace, &top_source, 0);
    out.provenance.value = out.value;
    out.provenance.source = top_source;
    out.provenance.decisions.assign(trace.begin() + static_cast<std::ptrdiff_t>(trace_start),
                                    trace.end());
    return out;
}

json InputGenerator::generate_node(const std::string& display_name,
                                   const std::string& normalized_name, const oas::Schema& schema,
                                   const std::string& description, DecisionTrace& trace,
                                   std::string* top_source, int depth) {
    if (depth > kMaxDepth) return nullptr;

    switch (schema.kind) {
        case oas::SchemaKind::Object: {
            if (top_source) *top_source = "object";
            json obj = json::object();
            for (const auto& prop : schema.properties) {
                const auto norm = oas::normalize_name(prop.name);
                if (!prop.required) {
                    oas::ParameterSpec pseudo;
                    pseudo.name = prop.name;
                    pseudo.normalized_name = norm;
                    pseudo.required = false;
                    pseudo.schema = prop.schema;
                    if (!decide_presence(pseudo, store_, epsilon_, rng_, trace)) continue;
                }
                obj[prop.name] =
                    generate_node(prop.name, norm, prop.schema, "", trace, nullptr, depth + 1);
            }
            return obj;
        }
        case oas::SchemaKind::Array: {
            if (top_source) *top_source = "array";
            const auto len =
                decide_array_length(normalized_name, schema, store_, epsilon_, rng_, trace);
            json arr = json::array();
            const oas::Schema item_schema = schema.items ? *schema.items : oas::Schema{};
            for (std::size_t i = 0; i < len; ++i)
                arr.push_back(generate_node(display_name, normalized_name, item_schema, description,
                                            trace, nullptr, depth + 1));
            return arr;
        }
        default: {
            oas::ParameterSpec pseudo;
            pseudo.name = display_name;
            pseudo.normalized_name = normalized_name;
            pseudo.schema = schema;
            pseudo.description = description;
            const auto source = select_value_source(pseudo, store_, dicts_, epsilon_, rng_, trace);
            if (top_source) *top_source = to_string(source);
            return generate_value(pseudo, source, dicts_, rng_);
        }
    }
}

}  // namespace restprobe
