#include "restprobe/intensifier.hpp"

#include <algorithm>
#include <cmath>

namespace restprobe {

namespace {

using oas::ParameterSpec;
using oas::Schema;
using oas::SchemaKind;

bool is_numeric(const Schema& s) {
    return s.kind == SchemaKind::Integer || s.kind == SchemaKind::Number;
}

bool has_bound(const Schema& s) { return s.minimum.has_value() || s.maximum.has_value(); }

/// Deterministic type-breaking substitution.
json wrong_type_value(const Schema& s) {
    if (s.kind == SchemaKind::String) return 42;
    return "invalid";
}

bool enum_violable(const Schema& s) {
    if (s.enum_values.empty()) return false;
    if (s.kind == SchemaKind::Boolean) return s.enum_values.size() < 2;
    return true;
}

json enum_violation(const Schema& s, DetRng& rng) {
    switch (s.kind) {
        case SchemaKind::Boolean:
            return !s.enum_values.front().get<bool>();
        case SchemaKind::Integer:
        case SchemaKind::Number: {
            double worst = 0;
            for (const auto& e : s.enum_values)
                if (e.is_number()) worst = std::max(worst, e.get<double>());
            return s.kind == SchemaKind::Integer
                       ? json(static_cast<std::int64_t>(worst) + 1 + rng.range(0, 7))
                       : json(worst + 1.0 + rng.unit());
        }
        default: {
            std::string v = s.enum_values.front().is_string()
                                ? s.enum_values.front().get<std::string>()
                                : s.enum_values.front().dump();
            do {
                v += 'x';
            } while (std::any_of(s.enum_values.begin(), s.enum_values.end(),
                                 [&](const json& e) { return e == json(v); }));
            return v;
        }
    }
}

/// Non-type constraints this schema exposes that a mutant can break.
bool has_violable_constraint(const Schema& s) {
    if (enum_violable(s)) return true;
    if (is_numeric(s) && has_bound(s)) return true;
    if (s.kind == SchemaKind::String &&
        (s.min_length.value_or(0) >= 1 || s.max_length.has_value()))
        return true;
    if (s.kind == SchemaKind::Array && (s.min_items.value_or(0) >= 1 || s.max_items.has_value()))
        return true;
    return false;
}

json boundary_value(const Schema& s, DetRng& rng) {
    std::vector<json> candidates;
    const auto in_range = [&](double v) {
        return (!s.minimum || v >= *s.minimum) && (!s.maximum || v <= *s.maximum);
    };
    const bool integral = s.kind == SchemaKind::Integer;
    const auto push = [&](double v) {
        if (!in_range(v)) return;
        if (integral) candidates.emplace_back(static_cast<std::int64_t>(std::llround(v)));
        else candidates.emplace_back(v);
    };
    if (s.minimum) {
        push(*s.minimum);
        push(*s.minimum + 1.0);
    }
    if (s.maximum) {
        push(*s.maximum - 1.0);
        push(*s.maximum);
    }
    std::vector<json> unique;
    for (auto& c : candidates)
        if (std::find(unique.begin(), unique.end(), c) == unique.end()) unique.push_back(c);
    if (unique.empty()) throw InapplicableMutation("no in-range boundary candidate");
    return unique[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(unique.size()) - 1))];
}

json out_of_bounds_value(const Schema& s, DetRng& rng) {
    std::vector<json> candidates;
    const bool integral = s.kind == SchemaKind::Integer;
    if (s.minimum) {
        if (integral) candidates.emplace_back(static_cast<std::int64_t>(std::llround(*s.minimum)) - 1);
        else candidates.emplace_back(*s.minimum - 1.0);
    }
    if (s.maximum) {
        if (integral) candidates.emplace_back(static_cast<std::int64_t>(std::llround(*s.maximum)) + 1);
        else candidates.emplace_back(*s.maximum + 1.0);
    }
    if (candidates.empty()) throw InapplicableMutation("no bound to step over");
    return candidates[static_cast<std::size_t>(
        rng.range(0, static_cast<std::int64_t>(candidates.size()) - 1))];
}

json constraint_violation_value(const Schema& s, DetRng& rng) {
    std::vector<json> options;
    if (is_numeric(s) && has_bound(s)) options.push_back(out_of_bounds_value(s, rng));
    if (s.kind == SchemaKind::String) {
        if (s.min_length.value_or(0) >= 1)
            options.emplace_back(std::string(*s.min_length - 1, 'a'));
        if (s.max_length) options.emplace_back(std::string(*s.max_length + 1, 'a'));
    }
    if (s.kind == SchemaKind::Array) {
        const auto fill = [&](std::size_t count) {
            json arr = json::array();
            for (std::size_t i = 0; i < count; ++i)
                arr.push_back(s.items ? random_value_for_schema(*s.items, rng) : json("x"));
            return arr;
        };
        if (s.min_items.value_or(0) >= 1) options.push_back(fill(*s.min_items - 1));
        if (s.max_items) options.push_back(fill(*s.max_items + 1));
    }
    if (enum_violable(s)) options.push_back(enum_violation(s, rng));
    if (options.empty()) throw InapplicableMutation("no violable constraint");
    return options[static_cast<std::size_t>(
        rng.range(0, static_cast<std::int64_t>(options.size()) - 1))];
}

}  // namespace

const char* to_string(Mutator m) {
    switch (m) {
        case Mutator::AddParameter: return "AddParameter";
        case Mutator::RemoveParameter: return "RemoveParameter";
        case Mutator::RefillValue: return "RefillValue";
        case Mutator::NumberBoundaries: return "NumberBoundaries";
        case Mutator::AddInvalidParameter: return "AddInvalidParameter";
        case Mutator::NumberOutOfBoundaries: return "NumberOutOfBoundaries";
        case Mutator::ChangeHttpMethod: return "ChangeHttpMethod";
        case Mutator::MissingRequired: return "MissingRequired";
        case Mutator::WrongType: return "WrongType";
        case Mutator::ConstraintsViolation: return "ConstraintsViolation";
    }
    return "?";
}

bool is_nominal(Mutator m) {
    switch (m) {
        case Mutator::AddParameter:
        case Mutator::RemoveParameter:
        case Mutator::RefillValue:
        case Mutator::NumberBoundaries:
            return true;
        default:
            return false;
    }
}

const std::vector<Mutator>& mutation_catalog() {
    static const std::vector<Mutator> catalog = {
        Mutator::AddParameter,        Mutator::RemoveParameter,
        Mutator::RefillValue,         Mutator::NumberBoundaries,
        Mutator::AddInvalidParameter, Mutator::NumberOutOfBoundaries,
        Mutator::ChangeHttpMethod,    Mutator::MissingRequired,
        Mutator::WrongType,           Mutator::ConstraintsViolation,
    };
    return catalog;
}

std::vector<MutationTarget> applicable_mutations(const std::map<std::string, json>& base,
                                                 const oas::OperationSpec& op) {
    std::vector<MutationTarget> out;
    for (const auto& param : op.parameters) {
        const bool present = base.count(param.name) > 0;
        if (present) {
            out.push_back({Mutator::RefillValue, param.name, std::nullopt});
            out.push_back({Mutator::WrongType, param.name, std::nullopt});
            if (has_violable_constraint(param.schema))
                out.push_back({Mutator::ConstraintsViolation, param.name, std::nullopt});
            if (is_numeric(param.schema) && has_bound(param.schema)) {
                out.push_back({Mutator::NumberBoundaries, param.name, std::nullopt});
                out.push_back({Mutator::NumberOutOfBoundaries, param.name, std::nullopt});
            }
            if (param.required) {
                // removing a path parameter would leave a broken route, skip those
                if (param.location != oas::ParamLocation::Path)
                    out.push_back({Mutator::MissingRequired, param.name, std::nullopt});
            } else {
                out.push_back({Mutator::RemoveParameter, param.name, std::nullopt});
            }
        } else if (!param.required) {
            out.push_back({Mutator::AddParameter, param.name, std::nullopt});
            out.push_back({Mutator::AddInvalidParameter, param.name, std::nullopt});
        }
    }
    for (oas::HttpMethod m : oas::kMethodOrder) {
        if (m != op.method) out.push_back({Mutator::ChangeHttpMethod, "", m});
    }
    return out;
}

MutantRequest apply_mutation(const std::map<std::string, json>& base, const oas::OperationSpec& op,
                             const MutationTarget& target, DetRng& rng) {
    MutantRequest mutant;
    mutant.target = target;
    mutant.method = op.method;
    mutant.assignments = base;

    if (target.op == Mutator::ChangeHttpMethod) {
        if (!target.new_method || *target.new_method == op.method)
            throw InapplicableMutation("ChangeHttpMethod needs a different method");
        mutant.method = *target.new_method;
        return mutant;
    }

    const ParameterSpec* param = op.find_parameter(target.parameter);
    if (!param) throw InapplicableMutation("unknown parameter " + target.parameter);
    const bool present = base.count(param->name) > 0;

    switch (target.op) {
        case Mutator::AddParameter:
            if (present || param->required) throw InapplicableMutation("parameter already present");
            mutant.assignments[param->name] = random_value_for_schema(param->schema, rng);
            break;
        case Mutator::AddInvalidParameter:
            if (present || param->required) throw InapplicableMutation("parameter already present");
            mutant.assignments[param->name] = wrong_type_value(param->schema);
            break;
        case Mutator::RemoveParameter:
            if (!present || param->required) throw InapplicableMutation("no removable parameter");
            mutant.assignments.erase(param->name);
            break;
        case Mutator::MissingRequired:
            if (!present || !param->required) throw InapplicableMutation("no required parameter");
            mutant.assignments.erase(param->name);
            break;
        case Mutator::RefillValue: {
            if (!present) throw InapplicableMutation("parameter absent");
            // prefer a genuinely new value; tiny domains may not offer one
            json fresh = random_value_for_schema(param->schema, rng);
            for (int attempt = 0; attempt < 8 && fresh == base.at(param->name); ++attempt)
                fresh = random_value_for_schema(param->schema, rng);
            mutant.assignments[param->name] = std::move(fresh);
            break;
        }
        case Mutator::WrongType:
            if (!present) throw InapplicableMutation("parameter absent");
            mutant.assignments[param->name] = wrong_type_value(param->schema);
            break;
        case Mutator::NumberBoundaries:
            if (!present || !is_numeric(param->schema) || !has_bound(param->schema))
                throw InapplicableMutation("not a bounded numeric parameter");
            mutant.assignments[param->name] = boundary_value(param->schema, rng);
            break;
        case Mutator::NumberOutOfBoundaries:
            if (!present || !is_numeric(param->schema) || !has_bound(param->schema))
                throw InapplicableMutation("not a bounded numeric parameter");
            mutant.assignments[param->name] = out_of_bounds_value(param->schema, rng);
            break;
        case Mutator::ConstraintsViolation:
            if (!present || !has_violable_constraint(param->schema))
                throw InapplicableMutation("no violable constraint");
            mutant.assignments[param->name] = constraint_violation_value(param->schema, rng);
            break;
        case Mutator::ChangeHttpMethod:
            break;  // handled above
    }
    return mutant;
}

std::vector<Interaction> Intensifier::intensify(const std::map<std::string, json>& base,
                                                const oas::OperationSpec& op, DetRng& rng,
                                                const ExecuteFn& execute_mutant) {
    std::vector<Interaction> executed;
    if (!triggered_.insert(op.index).second) return executed;  // once per operation

    auto targets = applicable_mutations(base, op);
    rng.shuffle(targets);
    if (targets.size() > cap_) targets.resize(cap_);

    for (const auto& target : targets) {
        const MutantRequest mutant = apply_mutation(base, op, target, rng);
        auto interaction = execute_mutant(mutant);
        if (!interaction) break;  // budget exhausted
        executed.push_back(std::move(*interaction));
    }
    return executed;
}

}  // namespace restprobe
