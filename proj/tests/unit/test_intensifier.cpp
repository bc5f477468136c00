#include <doctest.h>

#include <set>

#include "restprobe/intensifier.hpp"

using namespace restprobe;
using oas::OperationSpec;
using oas::ParameterSpec;
using oas::Schema;
using oas::SchemaKind;

namespace {

ParameterSpec make_param(const std::string& name, SchemaKind kind, bool required,
                         oas::ParamLocation loc = oas::ParamLocation::Query) {
    ParameterSpec p;
    p.name = name;
    p.normalized_name = oas::normalize_name(name);
    p.location = loc;
    p.required = required;
    p.schema.kind = kind;
    return p;
}

OperationSpec cart_operation() {
    OperationSpec op;
    op.index = 0;
    op.operation_id = "addProductToCart";
    op.method = oas::HttpMethod::Post;
    op.path = "/addProductToCart";
    auto productId = make_param("productId", SchemaKind::Integer, true);
    auto quantity = make_param("quantity", SchemaKind::Integer, false);
    quantity.schema.minimum = 1;
    quantity.schema.maximum = 100;
    quantity.schema.default_value = json(1);
    op.parameters = {productId, quantity};
    return op;
}

OperationSpec checkout_operation() {
    OperationSpec op;
    op.index = 2;
    op.operation_id = "checkout";
    op.method = oas::HttpMethod::Post;
    op.path = "/checkout";
    return op;
}

// Oracle: does the mutant still satisfy the operation's documented contract?
bool satisfies_contract(const MutantRequest& mutant, const OperationSpec& op) {
    for (const auto& p : op.parameters) {
        const auto it = mutant.assignments.find(p.name);
        if (it == mutant.assignments.end()) {
            if (p.required) return false;
            continue;
        }
        if (!oas::validate_against_schema(it->second, p.schema).valid) return false;
    }
    return true;
}

int aspects_changed(const std::map<std::string, json>& base, const MutantRequest& mutant,
                    const OperationSpec& op) {
    int differences = mutant.method != op.method ? 1 : 0;
    std::set<std::string> names;
    for (const auto& [k, v] : base) names.insert(k);
    for (const auto& [k, v] : mutant.assignments) names.insert(k);
    for (const auto& name : names) {
        const auto b = base.find(name);
        const auto m = mutant.assignments.find(name);
        if (b == base.end() || m == mutant.assignments.end() || b->second != m->second)
            ++differences;
    }
    return differences;
}

// Random operation + valid base request generator for the mutation property.
OperationSpec random_operation(DetRng& rng) {
    OperationSpec op;
    op.index = 0;
    op.operation_id = "underTest";
    op.method = oas::kMethodOrder[rng.range(0, 4)];
    op.path = "/things";
    const auto nparams = rng.range(1, 4);
    for (std::int64_t i = 0; i < nparams; ++i) {
        Schema s;
        switch (rng.range(0, 3)) {
            case 0:
                s.kind = SchemaKind::String;
                if (rng.coin()) s.min_length = static_cast<std::size_t>(rng.range(1, 3));
                if (rng.coin())
                    s.max_length = s.min_length.value_or(1) + static_cast<std::size_t>(rng.range(0, 6));
                break;
            case 1:
                s.kind = SchemaKind::Integer;
                if (rng.coin()) s.minimum = static_cast<double>(rng.range(-20, 0));
                if (rng.coin()) s.maximum = static_cast<double>(rng.range(1, 50));
                break;
            case 2:
                s.kind = SchemaKind::Boolean;
                break;
            default:
                s.kind = SchemaKind::Array;
                s.items = std::make_shared<Schema>();
                s.items->kind = SchemaKind::Integer;
                s.items->minimum = 0;
                s.items->maximum = 9;
                if (rng.coin()) s.min_items = static_cast<std::size_t>(rng.range(0, 1));
                if (rng.coin()) s.max_items = s.min_items.value_or(0) + static_cast<std::size_t>(rng.range(1, 4));
                break;
        }
        ParameterSpec p;
        p.name = "p" + std::to_string(i);
        p.normalized_name = p.name;
        p.required = rng.coin();
        p.schema = s;
        op.parameters.push_back(std::move(p));
    }
    return op;
}

std::map<std::string, json> valid_base(const OperationSpec& op, DetRng& rng) {
    std::map<std::string, json> base;
    for (const auto& p : op.parameters) {
        if (p.required || rng.coin()) base[p.name] = random_value_for_schema(p.schema, rng);
    }
    return base;
}

}  // namespace

TEST_CASE("the catalog holds exactly ten operators, four nominal and six error") {
    const auto& catalog = mutation_catalog();
    REQUIRE(catalog.size() == 10);
    int nominal = 0;
    for (const auto m : catalog)
        if (is_nominal(m)) ++nominal;
    CHECK(nominal == 4);
    std::set<std::string> names;
    for (const auto m : catalog) names.insert(to_string(m));
    CHECK(names.size() == 10);
}

TEST_CASE("zero-parameter operations only offer method changes") {
    const auto op = checkout_operation();
    const auto targets = applicable_mutations({}, op);
    REQUIRE(targets.size() == 4);
    for (const auto& t : targets) {
        CHECK(t.op == Mutator::ChangeHttpMethod);
        CHECK(*t.new_method != op.method);
    }
}

TEST_CASE("bounded numeric parameters unlock both boundary mutators") {
    const auto op = cart_operation();
    std::map<std::string, json> base = {{"productId", 517}, {"quantity", 3}};
    const auto targets = applicable_mutations(base, op);

    const auto has = [&](Mutator m, const std::string& param) {
        return std::any_of(targets.begin(), targets.end(), [&](const MutationTarget& t) {
            return t.op == m && t.parameter == param;
        });
    };
    CHECK(has(Mutator::NumberBoundaries, "quantity"));
    CHECK(has(Mutator::NumberOutOfBoundaries, "quantity"));
    CHECK_FALSE(has(Mutator::NumberBoundaries, "productId"));  // unbounded
    CHECK(has(Mutator::RemoveParameter, "quantity"));
    CHECK(has(Mutator::MissingRequired, "productId"));
    CHECK_FALSE(has(Mutator::AddParameter, "quantity"));  // already present
}

TEST_CASE("absent optional parameters are Add targets only") {
    const auto op = cart_operation();
    std::map<std::string, json> base = {{"productId", 517}};
    const auto targets = applicable_mutations(base, op);
    const auto has = [&](Mutator m) {
        return std::any_of(targets.begin(), targets.end(),
                           [&](const MutationTarget& t) { return t.op == m; });
    };
    CHECK(has(Mutator::AddParameter));
    CHECK(has(Mutator::AddInvalidParameter));
    CHECK_FALSE(has(Mutator::RemoveParameter));
}

TEST_CASE("boundary values land on the documented edges") {
    DetRng rng(41);
    const auto op = cart_operation();
    std::map<std::string, json> base = {{"productId", 517}, {"quantity", 50}};
    std::set<std::int64_t> seen;
    for (int i = 0; i < 200; ++i) {
        const auto mutant =
            apply_mutation(base, op, {Mutator::NumberBoundaries, "quantity", std::nullopt}, rng);
        seen.insert(mutant.assignments.at("quantity").get<std::int64_t>());
    }
    CHECK(seen == std::set<std::int64_t>{1, 2, 99, 100});
}

TEST_CASE("out-of-bounds values step exactly one past an edge") {
    DetRng rng(42);
    const auto op = cart_operation();
    std::map<std::string, json> base = {{"productId", 517}, {"quantity", 50}};
    std::set<std::int64_t> seen;
    for (int i = 0; i < 100; ++i) {
        const auto mutant = apply_mutation(
            base, op, {Mutator::NumberOutOfBoundaries, "quantity", std::nullopt}, rng);
        seen.insert(mutant.assignments.at("quantity").get<std::int64_t>());
    }
    CHECK(seen == std::set<std::int64_t>{0, 101});
}

TEST_CASE("method change keeps everything else fixed") {
    DetRng rng(43);
    const auto op = checkout_operation();
    std::set<std::string> methods;
    for (oas::HttpMethod m : oas::kMethodOrder) {
        if (m == op.method) continue;
        const auto mutant = apply_mutation({}, op, {Mutator::ChangeHttpMethod, "", m}, rng);
        CHECK(mutant.assignments.empty());
        methods.insert(oas::to_string(mutant.method));
    }
    CHECK(methods == std::set<std::string>{"GET", "PUT", "PATCH", "DELETE"});
}

TEST_CASE("wrong type substitutions follow the fixed table") {
    DetRng rng(44);
    const auto op = cart_operation();
    std::map<std::string, json> base = {{"productId", 517}, {"quantity", 3}};
    const auto mutant = apply_mutation(base, op, {Mutator::WrongType, "quantity", std::nullopt}, rng);
    CHECK(mutant.assignments.at("quantity") == json("invalid"));
}

TEST_CASE("inapplicable pairings are rejected") {
    DetRng rng(45);
    const auto op = cart_operation();
    std::map<std::string, json> base = {{"productId", 517}};
    CHECK_THROWS_AS(
        apply_mutation(base, op, {Mutator::RemoveParameter, "productId", std::nullopt}, rng),
        InapplicableMutation);
    CHECK_THROWS_AS(
        apply_mutation(base, op, {Mutator::NumberBoundaries, "productId", std::nullopt}, rng),
        InapplicableMutation);
    CHECK_THROWS_AS(
        apply_mutation(base, op, {Mutator::RefillValue, "quantity", std::nullopt}, rng),
        InapplicableMutation);  // quantity absent
}

TEST_CASE("property: nominal mutants validate, error mutants break the contract") {
    DetRng rng(0xBEEF);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto op = random_operation(rng);
        const auto base = valid_base(op, rng);
        REQUIRE(satisfies_contract(MutantRequest{{}, op.method, base}, op));

        for (const auto& target : applicable_mutations(base, op)) {
            const auto mutant = apply_mutation(base, op, target, rng);
            ++checked;
            CAPTURE(to_string(target.op));
            CAPTURE(target.parameter);
            if (is_nominal(target.op)) {
                REQUIRE(satisfies_contract(mutant, op));
                REQUIRE(mutant.method == op.method);
            } else {
                const bool broken =
                    !satisfies_contract(mutant, op) || mutant.method != op.method;
                REQUIRE(broken);
            }
            REQUIRE(aspects_changed(base, mutant, op) <= 1);
        }
    }
    CHECK(checked >= 1000);  // the property covers a real population
}

TEST_CASE("intensifier runs each operation once, shuffled, capped") {
    const auto op = cart_operation();
    std::map<std::string, json> base = {{"productId", 517}, {"quantity", 3}};

    SUBCASE("all applicable mutants run when under the cap") {
        DetRng rng(7);
        Intensifier intensifier(50);
        int executed = 0;
        auto out = intensifier.intensify(base, op, rng, [&](const MutantRequest& m) {
            ++executed;
            Interaction ix;
            ix.sequence = static_cast<std::uint64_t>(executed);
            ix.mutator = to_string(m.target.op);
            return ix;
        });
        const auto expected = applicable_mutations(base, op).size();
        CHECK(out.size() == expected);
        CHECK(executed == static_cast<int>(expected));

        // second trigger on the same operation is a no-op
        auto again = intensifier.intensify(base, op, rng, [&](const MutantRequest&) {
            Interaction ix;
            return ix;
        });
        CHECK(again.empty());
    }

    SUBCASE("cap bounds the burst") {
        DetRng rng(8);
        Intensifier intensifier(3);
        int executed = 0;
        auto out = intensifier.intensify(base, op, rng, [&](const MutantRequest&) {
            ++executed;
            return Interaction{};
        });
        CHECK(out.size() == 3);
        CHECK(executed == 3);
    }

    SUBCASE("budget exhaustion stops the burst mid-way") {
        DetRng rng(9);
        Intensifier intensifier(50);
        int budget = 3;
        auto out = intensifier.intensify(base, op, rng,
                                         [&](const MutantRequest&) -> std::optional<Interaction> {
                                             if (budget == 0) return std::nullopt;
                                             --budget;
                                             return Interaction{};
                                         });
        CHECK(out.size() == 3);
    }

    SUBCASE("order is shuffled deterministically by seed") {
        const auto run = [&](std::uint64_t seed) {
            DetRng rng(seed);
            Intensifier intensifier(50);
            std::vector<std::string> order;
            intensifier.intensify(base, op, rng, [&](const MutantRequest& m) {
                order.push_back(std::string(to_string(m.target.op)) + ":" + m.target.parameter);
                return Interaction{};
            });
            return order;
        };
        CHECK(run(1) == run(1));
        CHECK(run(1) != run(2));
    }
}
