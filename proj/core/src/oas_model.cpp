#include "restprobe/oas_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace restprobe::oas {

namespace {

using ojson = nlohmann::ordered_json;

ojson yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            // YAML scalars are untyped text; recover bool/int/double when the
            // scalar was not quoted.
            const std::string& s = node.Scalar();
            if (node.Tag() == "!") return s;  // explicitly quoted
            if (s == "null" || s == "~") return nullptr;
            if (s == "true") return true;
            if (s == "false") return false;
            try {
                std::size_t pos = 0;
                if (!s.empty() && s.find_first_not_of("+-0123456789") == std::string::npos) {
                    const long long v = std::stoll(s, &pos);
                    if (pos == s.size()) return v;
                }
            } catch (const std::exception&) {
            }
            try {
                std::size_t pos = 0;
                const double v = std::stod(s, &pos);
                if (pos == s.size() && s.find_first_of(".eE") != std::string::npos) return v;
            } catch (const std::exception&) {
            }
            return s;
        }
        case YAML::NodeType::Sequence: {
            ojson arr = ojson::array();
            for (const auto& it : node) arr.push_back(yaml_to_json(it));
            return arr;
        }
        case YAML::NodeType::Map: {
            ojson obj = ojson::object();
            for (const auto& it : node) obj[it.first.as<std::string>()] = yaml_to_json(it.second);
            return obj;
        }
        default:
            return nullptr;
    }
}

ojson load_document(const std::string& text, FormatHint hint) {
    const auto try_json = [&]() -> std::optional<ojson> {
        ojson j = ojson::parse(text, nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        return j;
    };
    const auto try_yaml = [&]() -> std::optional<ojson> {
        try {
            return yaml_to_json(YAML::Load(text));
        } catch (const YAML::Exception&) {
            return std::nullopt;
        }
    };

    std::optional<ojson> doc;
    switch (hint) {
        case FormatHint::Json:
            doc = try_json();
            break;
        case FormatHint::Yaml:
            doc = try_yaml();
            break;
        case FormatHint::Auto:
            doc = try_json();
            if (!doc) doc = try_yaml();
            break;
    }
    if (!doc || !doc->is_object()) throw MalformedDocument("document is not a YAML/JSON object");
    return *doc;
}

class Parser {
public:
    explicit Parser(ojson doc) : doc_(std::move(doc)) {}

    ApiModel run() {
        check_version();
        ApiModel model;
        model.title = doc_.contains("info") && doc_["info"].contains("title")
                          ? doc_["info"]["title"].get<std::string>()
                          : std::string{};
        if (doc_.contains("servers") && doc_["servers"].is_array() && !doc_["servers"].empty()) {
            const auto& srv = doc_["servers"][0];
            if (srv.contains("url")) model.base_url = srv["url"].get<std::string>();
        }

        if (!doc_.contains("paths") || !doc_["paths"].is_object() || doc_["paths"].empty())
            throw EmptyApi("document defines no operations");

        int index = 0;
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& [path, item] : doc_["paths"].items()) {
            if (!item.is_object()) {
                warn("path " + path + ": item is not an object, dropped");
                continue;
            }
            for (HttpMethod m : kMethodOrder) {
                const std::string key = lower(to_string(m));
                if (!item.contains(key)) continue;
                if (!seen.insert({key, path}).second)
                    throw MalformedDocument("duplicate operation " + key + " " + path);
                model.operations.push_back(parse_operation(index, m, path, item[key]));
                ++index;
            }
            for (const auto& [k, v] : item.items()) {
                static const std::set<std::string> known = {"get",     "post",    "put",
                                                            "patch",   "delete",  "parameters",
                                                            "summary", "description"};
                if (!known.count(k)) warn("path " + path + ": unsupported key '" + k + "' dropped");
            }
        }
        if (model.operations.empty()) throw EmptyApi("document defines no operations");
        model.warnings = warnings_;
        return model;
    }

private:
    static std::string lower(std::string s) {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return s;
    }

    void warn(const std::string& msg) { warnings_.push_back(msg); }

    void check_version() {
        if (!doc_.contains("openapi")) throw UnsupportedVersion("missing 'openapi' version field");
        const auto v = doc_["openapi"].is_string() ? doc_["openapi"].get<std::string>()
                                                   : doc_["openapi"].dump();
        if (v.rfind("3.", 0) != 0) throw UnsupportedVersion("unsupported OpenAPI version " + v);
    }

    // Resolves a local "#/a/b/c" pointer against the document root.
    const ojson* resolve_ref(const std::string& ref) {
        if (ref.rfind("#/", 0) != 0) {
            warn("non-local $ref '" + ref + "' dropped");
            return nullptr;
        }
        const ojson* node = &doc_;
        std::stringstream ss(ref.substr(2));
        std::string tok;
        while (std::getline(ss, tok, '/')) {
            // JSON-pointer escapes
            std::string key;
            for (std::size_t i = 0; i < tok.size(); ++i) {
                if (tok[i] == '~' && i + 1 < tok.size()) {
                    key += tok[i + 1] == '0' ? '~' : '/';
                    ++i;
                } else {
                    key += tok[i];
                }
            }
            if (!node->is_object() || !node->contains(key)) {
                warn("unresolvable $ref '" + ref + "' dropped");
                return nullptr;
            }
            node = &(*node)[key];
        }
        return node;
    }

    Schema parse_schema(const ojson& node, const std::string& where, int depth = 0) {
        Schema s;
        if (depth > 32) {
            warn(where + ": schema nesting beyond depth 32 dropped");
            return s;
        }
        if (!node.is_object()) {
            warn(where + ": schema is not an object, treated as string");
            return s;
        }
        if (node.contains("$ref")) {
            const auto ref = node["$ref"].get<std::string>();
            if (ref_stack_.count(ref)) {
                warn(where + ": cyclic $ref '" + ref + "' dropped");
                return s;
            }
            const ojson* target = resolve_ref(ref);
            if (!target) return s;
            ref_stack_.insert(ref);
            Schema resolved = parse_schema(*target, where, depth + 1);
            ref_stack_.erase(ref);
            return resolved;
        }
        for (const char* combinator : {"oneOf", "anyOf", "allOf", "not"}) {
            if (node.contains(combinator))
                warn(where + ": unsupported '" + combinator + "' dropped");
        }

        std::string type = node.contains("type") && node["type"].is_string()
                               ? node["type"].get<std::string>()
                               : std::string{};
        if (type == "string") s.kind = SchemaKind::String;
        else if (type == "integer") s.kind = SchemaKind::Integer;
        else if (type == "number") s.kind = SchemaKind::Number;
        else if (type == "boolean") s.kind = SchemaKind::Boolean;
        else if (type == "array") s.kind = SchemaKind::Array;
        else if (type == "object") s.kind = SchemaKind::Object;
        else if (type.empty() && node.contains("properties")) s.kind = SchemaKind::Object;
        else if (type.empty() && node.contains("items")) s.kind = SchemaKind::Array;
        else if (!type.empty()) {
            warn(where + ": unknown type '" + type + "' treated as string");
        }

        if (node.contains("format") && node["format"].is_string())
            s.format = node["format"].get<std::string>();
        if (node.contains("minimum") && node["minimum"].is_number())
            s.minimum = node["minimum"].get<double>();
        if (node.contains("maximum") && node["maximum"].is_number())
            s.maximum = node["maximum"].get<double>();
        if (s.minimum && s.maximum && *s.minimum > *s.maximum)
            throw MalformedDocument(where + ": minimum exceeds maximum");

        const auto read_len = [&](const char* key) -> std::optional<std::size_t> {
            if (node.contains(key) && node[key].is_number_unsigned())
                return node[key].get<std::size_t>();
            if (node.contains(key) && node[key].is_number_integer()) {
                const auto v = node[key].get<long long>();
                if (v >= 0) return static_cast<std::size_t>(v);
                warn(where + std::string(": negative ") + key + " dropped");
            }
            return std::nullopt;
        };
        s.min_length = read_len("minLength");
        s.max_length = read_len("maxLength");
        if (s.min_length && s.max_length && *s.min_length > *s.max_length)
            throw MalformedDocument(where + ": minLength exceeds maxLength");
        s.min_items = read_len("minItems");
        s.max_items = read_len("maxItems");
        if (s.min_items && s.max_items && *s.min_items > *s.max_items)
            throw MalformedDocument(where + ": minItems exceeds maxItems");

        if (node.contains("enum") && node["enum"].is_array()) {
            for (const auto& v : node["enum"]) {
                if (value_matches_kind(v, s.kind)) {
                    s.enum_values.push_back(v);
                } else {
                    warn(where + ": enum entry " + v.dump() + " does not match declared type, dropped");
                }
            }
        }
        if (node.contains("default")) s.default_value = json(node["default"]);
        if (node.contains("example")) s.example_values.push_back(json(node["example"]));
        if (node.contains("examples") && node["examples"].is_array()) {
            for (const auto& v : node["examples"]) s.example_values.push_back(json(v));
        }

        if (s.kind == SchemaKind::Array) {
            if (node.contains("items")) {
                s.items = std::make_shared<Schema>(parse_schema(node["items"], where + ".items", depth + 1));
            } else {
                warn(where + ": array without items, items default to string");
                s.items = std::make_shared<Schema>();
            }
        }
        if (s.kind == SchemaKind::Object && node.contains("properties") &&
            node["properties"].is_object()) {
            std::set<std::string> required;
            if (node.contains("required") && node["required"].is_array()) {
                for (const auto& r : node["required"])
                    if (r.is_string()) required.insert(r.get<std::string>());
            }
            for (const auto& [pname, pnode] : node["properties"].items()) {
                Property p;
                p.name = pname;
                p.required = required.count(pname) > 0;
                p.schema = parse_schema(pnode, where + "." + pname, depth + 1);
                s.properties.push_back(std::move(p));
            }
        }
        return s;
    }

    static bool value_matches_kind(const ojson& v, SchemaKind kind) {
        switch (kind) {
            case SchemaKind::String: return v.is_string();
            case SchemaKind::Integer: return v.is_number_integer();
            case SchemaKind::Number: return v.is_number();
            case SchemaKind::Boolean: return v.is_boolean();
            case SchemaKind::Array: return v.is_array();
            case SchemaKind::Object: return v.is_object();
        }
        return false;
    }

    std::optional<ParameterSpec> parse_parameter(const ojson& raw, const std::string& where) {
        const ojson* node = &raw;
        if (raw.is_object() && raw.contains("$ref")) {
            node = resolve_ref(raw["$ref"].get<std::string>());
            if (!node) return std::nullopt;
        }
        if (!node->is_object() || !node->contains("name") || !node->contains("in")) {
            warn(where + ": parameter without name/in dropped");
            return std::nullopt;
        }
        ParameterSpec p;
        p.name = (*node)["name"].get<std::string>();
        p.normalized_name = normalize_name(p.name);
        const auto in = (*node)["in"].get<std::string>();
        if (in == "path") p.location = ParamLocation::Path;
        else if (in == "query") p.location = ParamLocation::Query;
        else if (in == "header") p.location = ParamLocation::Header;
        else {
            warn(where + ": parameter '" + p.name + "' in unsupported location '" + in + "' dropped");
            return std::nullopt;
        }
        p.required = node->contains("required") && node->value("required", false);
        if (p.location == ParamLocation::Path && !p.required) {
            warn(where + ": path parameter '" + p.name + "' forced to required");
            p.required = true;
        }
        if (node->contains("description") && (*node)["description"].is_string())
            p.description = (*node)["description"].get<std::string>();
        if (node->contains("schema")) {
            p.schema = parse_schema((*node)["schema"], where + "." + p.name);
        } else {
            warn(where + ": parameter '" + p.name + "' without schema, treated as string");
        }
        if (node->contains("example")) p.schema.example_values.push_back(json((*node)["example"]));
        return p;
    }

    OperationSpec parse_operation(int index, HttpMethod method, const std::string& path,
                                  const ojson& node) {
        OperationSpec op;
        op.index = index;
        op.method = method;
        op.path = path;
        const std::string where = std::string(to_string(method)) + " " + path;

        op.operation_id = node.contains("operationId") && node["operationId"].is_string()
                              ? node["operationId"].get<std::string>()
                              : synthesize_operation_id(method, path);
        if (node.contains("summary") && node["summary"].is_string())
            op.description = node["summary"].get<std::string>();
        if (node.contains("description") && node["description"].is_string()) {
            if (!op.description.empty()) op.description += " ";
            op.description += node["description"].get<std::string>();
        }
        for (const char* unsupported : {"callbacks", "links", "security"}) {
            if (node.contains(unsupported))
                warn(where + ": unsupported '" + unsupported + "' dropped");
        }

        if (node.contains("parameters") && node["parameters"].is_array()) {
            for (const auto& pnode : node["parameters"]) {
                if (auto p = parse_parameter(pnode, where)) op.parameters.push_back(std::move(*p));
            }
        }

        if (node.contains("requestBody")) {
            parse_request_body(node["requestBody"], where, op);
        }

        validate_operation(op, where);
        return op;
    }

    void parse_request_body(const ojson& raw, const std::string& where, OperationSpec& op) {
        const ojson* body = &raw;
        if (raw.is_object() && raw.contains("$ref")) {
            body = resolve_ref(raw["$ref"].get<std::string>());
            if (!body) return;
        }
        const bool body_required = body->contains("required") && body->value("required", false);
        if (!body->contains("content") || !(*body)["content"].is_object()) {
            warn(where + ": requestBody without content dropped");
            return;
        }
        const ojson* media = nullptr;
        for (const auto& [ctype, cnode] : (*body)["content"].items()) {
            if (ctype.find("json") != std::string::npos) {
                media = &cnode;
                break;
            }
            warn(where + ": request content type '" + ctype + "' unsupported, dropped");
        }
        if (!media || !media->contains("schema")) return;
        Schema body_schema = parse_schema((*media)["schema"], where + ".body");
        op.request_body = body_schema;
        if (body_schema.kind != SchemaKind::Object) {
            warn(where + ": non-object request body dropped");
            return;
        }
        // Each top-level body property becomes an addressable parameter.
        for (const auto& prop : body_schema.properties) {
            ParameterSpec p;
            p.name = prop.name;
            p.normalized_name = normalize_name(prop.name);
            p.location = ParamLocation::BodyField;
            p.required = body_required && prop.required;
            p.schema = prop.schema;
            op.parameters.push_back(std::move(p));
        }
    }

    void validate_operation(const OperationSpec& op, const std::string& where) {
        std::set<std::pair<ParamLocation, std::string>> names;
        for (const auto& p : op.parameters) {
            if (!names.insert({p.location, p.name}).second)
                throw MalformedDocument(where + ": duplicate parameter '" + p.name + "'");
        }
        // Every {placeholder} must be backed by a required path parameter.
        std::size_t pos = 0;
        while ((pos = op.path.find('{', pos)) != std::string::npos) {
            const auto end = op.path.find('}', pos);
            if (end == std::string::npos)
                throw MalformedDocument(where + ": unterminated path placeholder");
            const std::string placeholder = op.path.substr(pos + 1, end - pos - 1);
            const bool backed = std::any_of(
                op.parameters.begin(), op.parameters.end(), [&](const ParameterSpec& p) {
                    return p.location == ParamLocation::Path && p.name == placeholder && p.required;
                });
            if (!backed)
                throw MalformedDocument(where + ": path placeholder '{" + placeholder +
                                        "}' has no required path parameter");
            pos = end + 1;
        }
    }

    static std::string synthesize_operation_id(HttpMethod method, const std::string& path) {
        std::string id = to_string(method);
        id += '_';
        for (char c : path) id += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
        return id;
    }

    ojson doc_;
    std::vector<std::string> warnings_;
    std::set<std::string> ref_stack_;
};

void check_numeric(const json& value, const Schema& s, const std::string& at, Verdict& v) {
    const double x = value.get<double>();
    if (s.minimum && x < *s.minimum)
        v.violations.push_back(at + "value " + value.dump() + " below minimum " +
                               std::to_string(*s.minimum));
    if (s.maximum && x > *s.maximum)
        v.violations.push_back(at + "value " + value.dump() + " above maximum " +
                               std::to_string(*s.maximum));
}

void check_enum(const json& value, const Schema& s, const std::string& at, Verdict& v) {
    if (s.enum_values.empty()) return;
    const bool found =
        std::any_of(s.enum_values.begin(), s.enum_values.end(), [&](const json& e) { return e == value; });
    if (!found) v.violations.push_back(at + "value " + value.dump() + " not in enum");
}

void validate_into(const json& value, const Schema& s, const std::string& at, Verdict& v);

void check_kind(const json& value, const Schema& s, const std::string& at, Verdict& v) {
    bool ok = false;
    switch (s.kind) {
        case SchemaKind::String: ok = value.is_string(); break;
        case SchemaKind::Integer: ok = value.is_number_integer(); break;
        case SchemaKind::Number: ok = value.is_number(); break;
        case SchemaKind::Boolean: ok = value.is_boolean(); break;
        case SchemaKind::Array: ok = value.is_array(); break;
        case SchemaKind::Object: ok = value.is_object(); break;
    }
    if (!ok)
        v.violations.push_back(at + "expected " + to_string(s.kind) + ", got " +
                               std::string(value.type_name()));
}

void validate_into(const json& value, const Schema& s, const std::string& at, Verdict& v) {
    const std::size_t before = v.violations.size();
    check_kind(value, s, at, v);
    if (v.violations.size() != before) return;  // type mismatch, deeper checks meaningless

    switch (s.kind) {
        case SchemaKind::Integer:
        case SchemaKind::Number:
            check_numeric(value, s, at, v);
            break;
        case SchemaKind::String: {
            const auto len = value.get<std::string>().size();
            if (s.min_length && len < *s.min_length)
                v.violations.push_back(at + "length " + std::to_string(len) + " below minLength " +
                                       std::to_string(*s.min_length));
            if (s.max_length && len > *s.max_length)
                v.violations.push_back(at + "length " + std::to_string(len) + " above maxLength " +
                                       std::to_string(*s.max_length));
            break;
        }
        case SchemaKind::Boolean:
            break;
        case SchemaKind::Array: {
            const auto n = value.size();
            if (s.min_items && n < *s.min_items)
                v.violations.push_back(at + "item count " + std::to_string(n) + " below minItems " +
                                       std::to_string(*s.min_items));
            if (s.max_items && n > *s.max_items)
                v.violations.push_back(at + "item count " + std::to_string(n) + " above maxItems " +
                                       std::to_string(*s.max_items));
            if (s.items) {
                for (std::size_t i = 0; i < n; ++i)
                    validate_into(value[i], *s.items, at + "[" + std::to_string(i) + "] ", v);
            }
            break;
        }
        case SchemaKind::Object: {
            for (const auto& prop : s.properties) {
                if (!value.contains(prop.name)) {
                    if (prop.required)
                        v.violations.push_back(at + "missing required property '" + prop.name + "'");
                    continue;
                }
                validate_into(value[prop.name], prop.schema, at + prop.name + ": ", v);
            }
            break;
        }
    }
    check_enum(value, s, at, v);
}

}  // namespace

const char* to_string(HttpMethod m) {
    switch (m) {
        case HttpMethod::Get: return "GET";
        case HttpMethod::Post: return "POST";
        case HttpMethod::Put: return "PUT";
        case HttpMethod::Patch: return "PATCH";
        case HttpMethod::Delete: return "DELETE";
    }
    return "GET";
}

std::optional<HttpMethod> method_from_string(const std::string& s) {
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (u == "GET") return HttpMethod::Get;
    if (u == "POST") return HttpMethod::Post;
    if (u == "PUT") return HttpMethod::Put;
    if (u == "PATCH") return HttpMethod::Patch;
    if (u == "DELETE") return HttpMethod::Delete;
    return std::nullopt;
}

const char* to_string(SchemaKind k) {
    switch (k) {
        case SchemaKind::String: return "string";
        case SchemaKind::Integer: return "integer";
        case SchemaKind::Number: return "number";
        case SchemaKind::Boolean: return "boolean";
        case SchemaKind::Array: return "array";
        case SchemaKind::Object: return "object";
    }
    return "string";
}

const char* to_string(ParamLocation loc) {
    switch (loc) {
        case ParamLocation::Path: return "path";
        case ParamLocation::Query: return "query";
        case ParamLocation::Header: return "header";
        case ParamLocation::BodyField: return "body-field";
    }
    return "query";
}

const ParameterSpec* OperationSpec::find_parameter(const std::string& name) const {
    for (const auto& p : parameters)
        if (p.name == name) return &p;
    return nullptr;
}

ApiModel parse_spec(const std::string& document, FormatHint hint) {
    return Parser(load_document(document, hint)).run();
}

ApiModel parse_spec_file(const std::string& path, FormatHint hint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedDocument("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (hint == FormatHint::Auto) {
        if (path.size() > 5 && path.rfind(".json") == path.size() - 5) hint = FormatHint::Json;
        else if (path.size() > 5 && path.rfind(".yaml") == path.size() - 5) hint = FormatHint::Yaml;
        else if (path.size() > 4 && path.rfind(".yml") == path.size() - 4) hint = FormatHint::Yaml;
    }
    return parse_spec(buf.str(), hint);
}

std::string normalize_name(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) != 0) out += static_cast<char>(std::tolower(uc));
    }
    if (out.empty()) {
        out = raw;
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    return out;
}

Verdict validate_against_schema(const json& value, const Schema& schema) {
    Verdict v;
    validate_into(value, schema, "", v);
    v.valid = v.violations.empty();
    return v;
}

}  // namespace restprobe::oas
