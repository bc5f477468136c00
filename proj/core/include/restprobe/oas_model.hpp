#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace restprobe::oas {

using json = nlohmann::json;

enum class HttpMethod { Get, Post, Put, Patch, Delete };

const char* to_string(HttpMethod m);
std::optional<HttpMethod> method_from_string(const std::string& s);

/// All HTTP methods in the fixed order used to index operations within a path.
inline constexpr HttpMethod kMethodOrder[] = {
    HttpMethod::Get, HttpMethod::Post, HttpMethod::Put, HttpMethod::Patch, HttpMethod::Delete};

enum class SchemaKind { String, Integer, Number, Boolean, Array, Object };

const char* to_string(SchemaKind k);

struct Property;

/// Subset of a JSON-schema node: type, value constraints, catalog values and
/// nested item/property schemas.
struct Schema {
    SchemaKind kind = SchemaKind::String;
    std::string format;
    std::optional<double> minimum;
    std::optional<double> maximum;
    std::optional<std::size_t> min_length;
    std::optional<std::size_t> max_length;
    std::optional<std::size_t> min_items;
    std::optional<std::size_t> max_items;
    std::vector<json> enum_values;
    std::optional<json> default_value;
    std::vector<json> example_values;
    std::shared_ptr<Schema> items;       // set when kind == Array
    std::vector<Property> properties;    // set when kind == Object, declaration order
};

struct Property {
    std::string name;
    bool required = false;
    Schema schema;
};

enum class ParamLocation { Path, Query, Header, BodyField };

const char* to_string(ParamLocation loc);

struct ParameterSpec {
    std::string name;
    std::string normalized_name;
    ParamLocation location = ParamLocation::Query;
    bool required = false;
    Schema schema;
    std::string description;
};

struct OperationSpec {
    int index = 0;
    std::string operation_id;
    HttpMethod method = HttpMethod::Get;
    std::string path;
    std::vector<ParameterSpec> parameters;
    std::optional<Schema> request_body;
    std::string description;

    const ParameterSpec* find_parameter(const std::string& name) const;
};

struct ApiModel {
    std::string title;
    std::string base_url;
    std::vector<OperationSpec> operations;
    std::vector<std::string> warnings;  // one line per dropped construct
};

struct MalformedDocument : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedVersion : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyApi : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FormatHint { Auto, Yaml, Json };

/// Parses a restricted OpenAPI 3.x document into a validated ApiModel.
/// Local $refs are resolved; unsupported constructs (oneOf/anyOf/allOf,
/// callbacks, links, cookie parameters) are dropped with a warning line.
/// Throws MalformedDocument, UnsupportedVersion or EmptyApi.
ApiModel parse_spec(const std::string& document, FormatHint hint = FormatHint::Auto);
ApiModel parse_spec_file(const std::string& path, FormatHint hint = FormatHint::Auto);

/// Canonical parameter identity: lowercase with every non-alphanumeric
/// character removed. Falls back to the lowercased input when stripping
/// would leave nothing. Experience is shared across operations by this key.
std::string normalize_name(const std::string& raw);

struct Verdict {
    bool valid = true;
    std::vector<std::string> violations;
};

/// Checks a concrete value against every constraint present in the schema
/// and reports all violations, not just the first.
Verdict validate_against_schema(const json& value, const Schema& schema);

}  // namespace restprobe::oas
