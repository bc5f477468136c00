#include <doctest.h>

#include <cmath>
#include <set>

#include "restprobe/input_generator.hpp"

using namespace restprobe;
using oas::ParameterSpec;
using oas::Schema;
using oas::SchemaKind;

namespace {

ParameterSpec make_param(const std::string& name, SchemaKind kind, bool required = false) {
    ParameterSpec p;
    p.name = name;
    p.normalized_name = oas::normalize_name(name);
    p.required = required;
    p.schema.kind = kind;
    return p;
}

ParameterSpec quantity_param() {
    auto p = make_param("quantity", SchemaKind::Integer);
    p.schema.minimum = 1;
    p.schema.maximum = 100;
    p.schema.default_value = json(1);
    return p;
}

}  // namespace

TEST_CASE("probability matching follows the tally ratio") {
    DetRng rng(2024);
    std::map<std::string, std::uint64_t> tallies = {{"include", 8}, {"exclude", 2}};
    int include = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i)
        if (probability_match(tallies, 0.0, rng) == "include") ++include;
    const double freq = static_cast<double>(include) / draws;
    CHECK(freq > 0.78);
    CHECK(freq < 0.82);
}

TEST_CASE("probability matching corner cases") {
    DetRng rng(7);
    SUBCASE("all-zero tallies pick uniformly") {
        std::map<std::string, std::uint64_t> cold = {{"a", 0}, {"b", 0}, {"c", 0}};
        std::map<std::string, int> counts;
        for (int i = 0; i < 9000; ++i) counts[probability_match(cold, 0.0, rng)]++;
        for (const auto& [option, count] : counts) {
            CHECK(count > 2700);
            CHECK(count < 3300);
        }
    }
    SUBCASE("singleton option set always wins") {
        std::map<std::string, std::uint64_t> solo = {{"a", 5}};
        for (int i = 0; i < 20; ++i) CHECK(probability_match(solo, 0.5, rng) == "a");
    }
    SUBCASE("epsilon one is uniform regardless of tallies") {
        std::map<std::string, std::uint64_t> lopsided = {{"a", 1000000}, {"b", 0}};
        int b = 0;
        for (int i = 0; i < 10000; ++i)
            if (probability_match(lopsided, 1.0, rng) == "b") ++b;
        CHECK(b > 4700);
        CHECK(b < 5300);
    }
    SUBCASE("empty option set is rejected") {
        std::map<std::string, std::uint64_t> none;
        CHECK_THROWS_AS(probability_match(none, 0.0, rng), std::invalid_argument);
    }
}

TEST_CASE("presence decision matches accumulated experience") {
    DetRng rng(99);
    ExperienceStore store;
    const auto param = quantity_param();
    const auto key = ExperienceStore::agent_key("quantity", "presence");
    for (int i = 0; i < 8; ++i) store.bump(key, "include");
    for (int i = 0; i < 2; ++i) store.bump(key, "exclude");

    int included = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        DecisionTrace trace;
        if (decide_presence(param, store, 0.0, rng, trace)) ++included;
    }
    const double freq = static_cast<double>(included) / draws;
    CHECK(freq > 0.78);
    CHECK(freq < 0.82);
}

TEST_CASE("cold-start presence is a coin flip") {
    DetRng rng(5);
    ExperienceStore store;
    const auto param = make_param("note", SchemaKind::String);
    int included = 0;
    for (int i = 0; i < 10000; ++i) {
        DecisionTrace trace;
        if (decide_presence(param, store, 0.0, rng, trace)) ++included;
    }
    CHECK(included > 4700);
    CHECK(included < 5300);
}

TEST_CASE("array length classes") {
    DetRng rng(6);
    ExperienceStore store;

    SUBCASE("class semantics: A empty, B one, C in [2, 5] without bounds") {
        Schema arr;
        arr.kind = SchemaKind::Array;
        std::set<std::size_t> seen;
        for (int i = 0; i < 2000; ++i) {
            DecisionTrace trace;
            const auto len = decide_array_length("tags", arr, store, 0.0, rng, trace);
            seen.insert(len);
            const auto& [key, label] = trace.back();
            CHECK(key == "tags|arraylen");
            if (label == "A") CHECK(len == 0);
            if (label == "B") CHECK(len == 1);
            if (label == "C") {
                CHECK(len >= 2);
                CHECK(len <= 5);
            }
        }
        CHECK(seen.count(0) == 1);
        CHECK(seen.count(1) == 1);
        CHECK(*seen.rbegin() <= 5);
        CHECK(*seen.rbegin() >= 2);
    }

    SUBCASE("min_items=1 rules class A out") {
        Schema arr;
        arr.kind = SchemaKind::Array;
        arr.min_items = 1;
        for (int i = 0; i < 500; ++i) {
            DecisionTrace trace;
            CHECK(decide_array_length("tags", arr, store, 0.0, rng, trace) >= 1);
        }
    }

    SUBCASE("max_items below 2 rules class C out") {
        Schema arr;
        arr.kind = SchemaKind::Array;
        arr.max_items = 1;
        for (int i = 0; i < 500; ++i) {
            DecisionTrace trace;
            CHECK(decide_array_length("tags", arr, store, 0.0, rng, trace) <= 1);
        }
    }

    SUBCASE("contradictory bounds leave no feasible class") {
        Schema arr;
        arr.kind = SchemaKind::Array;
        arr.min_items = 2;
        arr.max_items = 1;  // unbuildable via the parser, guarded anyway
        DecisionTrace trace;
        CHECK_THROWS_AS(decide_array_length("tags", arr, store, 0.0, rng, trace), NoFeasibleClass);
    }

    SUBCASE("min_items beyond the default ceiling still yields a length") {
        Schema arr;
        arr.kind = SchemaKind::Array;
        arr.min_items = 7;
        arr.max_items = 9;
        DecisionTrace trace;
        const auto len = decide_array_length("tags", arr, store, 0.0, rng, trace);
        CHECK(len >= 7);
        CHECK(len <= 9);
    }
}

TEST_CASE("source applicability filtering") {
    ValueDictionaries dicts;
    SUBCASE("bare string parameter only offers Random") {
        const auto param = make_param("keyword", SchemaKind::String);
        const auto sources = applicable_sources(param, dicts);
        REQUIRE(sources.size() == 1);
        CHECK(sources[0] == ValueSource::Random);
    }
    SUBCASE("OAS data and dictionaries unlock sources") {
        auto param = quantity_param();
        param.schema.enum_values = {json(1), json(2)};
        param.schema.example_values = {json(3)};
        dicts.push_response("quantity", json(10));
        dicts.push_request("quantity", json(11));
        dicts.llm_values["quantity"] = {json(12)};
        const auto sources = applicable_sources(param, dicts);
        CHECK(sources.size() == 9);
    }
}

TEST_CASE("source selection is probability matched over applicable sources") {
    DetRng rng(17);
    ExperienceStore store;
    ValueDictionaries dicts;
    dicts.push_response("productid", json(42));
    const auto param = make_param("productId", SchemaKind::Integer);
    const auto key = ExperienceStore::agent_key("productid", "source");
    store.bump(key, "Random");
    for (int i = 0; i < 9; ++i) store.bump(key, "ResponseDictionary");

    int dict_hits = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        DecisionTrace trace;
        if (select_value_source(param, store, dicts, 0.0, rng, trace) ==
            ValueSource::ResponseDictionary)
            ++dict_hits;
    }
    const double freq = static_cast<double>(dict_hits) / draws;
    CHECK(freq > 0.88);
    CHECK(freq < 0.92);
}

TEST_CASE("epsilon one explores uniformly over applicable sources") {
    DetRng rng(18);
    ExperienceStore store;
    ValueDictionaries dicts;
    const auto param = quantity_param();  // Random + Default applicable
    const auto key = ExperienceStore::agent_key("quantity", "source");
    for (int i = 0; i < 50; ++i) store.bump(key, "Default");
    int randoms = 0;
    for (int i = 0; i < 10000; ++i) {
        DecisionTrace trace;
        if (select_value_source(param, store, dicts, 1.0, rng, trace) == ValueSource::Random)
            ++randoms;
    }
    CHECK(randoms > 4700);
    CHECK(randoms < 5300);
}

TEST_CASE("generate_value honors each source") {
    DetRng rng(23);
    ValueDictionaries dicts;
    auto quantity = quantity_param();

    SUBCASE("random respects bounds") {
        for (int i = 0; i < 500; ++i) {
            const auto v = generate_value(quantity, ValueSource::Random, dicts, rng);
            REQUIRE(v.is_number_integer());
            CHECK(v.get<std::int64_t>() >= 1);
            CHECK(v.get<std::int64_t>() <= 100);
        }
    }
    SUBCASE("default returns the documented value") {
        CHECK(generate_value(quantity, ValueSource::Default, dicts, rng) == json(1));
    }
    SUBCASE("dictionary sources: uniform member vs last value") {
        dicts.push_response("productid", json(17));
        dicts.push_response("productid", json(42));
        const auto param = make_param("productId", SchemaKind::Integer);
        CHECK(generate_value(param, ValueSource::LastResponseDictionary, dicts, rng) == json(42));
        bool saw17 = false, saw42 = false;
        for (int i = 0; i < 200; ++i) {
            const auto v = generate_value(param, ValueSource::ResponseDictionary, dicts, rng);
            saw17 |= v == json(17);
            saw42 |= v == json(42);
        }
        CHECK(saw17);
        CHECK(saw42);
    }
    SUBCASE("inapplicable source throws") {
        const auto param = make_param("bare", SchemaKind::String);
        CHECK_THROWS_AS(generate_value(param, ValueSource::Default, dicts, rng),
                        SourceNotApplicable);
        CHECK_THROWS_AS(generate_value(param, ValueSource::ResponseDictionary, dicts, rng),
                        SourceNotApplicable);
    }
    SUBCASE("enum and examples quote the OAS verbatim") {
        auto param = make_param("color", SchemaKind::String);
        param.schema.enum_values = {json("red"), json("blue")};
        param.schema.example_values = {json("red")};
        for (int i = 0; i < 50; ++i) {
            const auto v = generate_value(param, ValueSource::Enum, dicts, rng);
            CHECK((v == json("red") || v == json("blue")));
            CHECK(generate_value(param, ValueSource::Examples, dicts, rng) == json("red"));
        }
    }
}

TEST_CASE("property: random values always satisfy the schema") {
    DetRng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        Schema s;
        switch (rng.range(0, 3)) {
            case 0:
                s.kind = SchemaKind::String;
                s.min_length = static_cast<std::size_t>(rng.range(0, 4));
                s.max_length = *s.min_length + static_cast<std::size_t>(rng.range(0, 8));
                break;
            case 1:
                s.kind = SchemaKind::Integer;
                s.minimum = static_cast<double>(rng.range(-30, 5));
                s.maximum = *s.minimum + static_cast<double>(rng.range(0, 60));
                break;
            case 2:
                s.kind = SchemaKind::Number;
                s.minimum = rng.uniform(-3, 3);
                s.maximum = *s.minimum + rng.uniform(0, 9);
                break;
            default: {
                s.kind = SchemaKind::Array;
                s.min_items = static_cast<std::size_t>(rng.range(0, 2));
                s.max_items = *s.min_items + static_cast<std::size_t>(rng.range(0, 3));
                s.items = std::make_shared<Schema>();
                s.items->kind = SchemaKind::Integer;
                s.items->minimum = 0;
                s.items->maximum = 9;
                break;
            }
        }
        const auto v = random_value_for_schema(s, rng);
        const auto verdict = oas::validate_against_schema(v, s);
        if (!verdict.valid) CAPTURE(verdict.violations.front());
        REQUIRE(verdict.valid);
    }
}

TEST_CASE("rewards bump every traced decision on success only") {
    ExperienceStore store;
    DecisionTrace trace = {{"quantity|presence", "include"}, {"quantity|source", "Default"}};

    reward_decisions(trace, OutcomeClass::ClientError4xx, store);
    CHECK(store.tally("quantity|presence", "include") == 0);

    reward_decisions(trace, OutcomeClass::Success2xx, store);
    CHECK(store.tally("quantity|presence", "include") == 1);
    CHECK(store.tally("quantity|source", "Default") == 1);

    reward_decisions({}, OutcomeClass::Success2xx, store);  // zero-parameter request
    CHECK(store.tally("quantity|presence", "include") == 1);
}

TEST_CASE("experience is shared across spellings of a name") {
    DetRng rng(40);
    ExperienceStore store;
    ValueDictionaries dicts;
    dicts.push_response("productid", json(1));

    // reward ResponseDictionary under the camelCase spelling
    auto camel = make_param("productId", SchemaKind::Integer);
    DecisionTrace trace;
    (void)select_value_source(camel, store, dicts, 0.0, rng, trace);
    reward_decisions({{ExperienceStore::agent_key("productid", "source"), "ResponseDictionary"}},
                     OutcomeClass::Success2xx, store);

    // the snake_case spelling must see the same tallies
    auto snake = make_param("product_id", SchemaKind::Integer);
    int dict_hits = 0;
    for (int i = 0; i < 500; ++i) {
        DecisionTrace t;
        if (select_value_source(snake, store, dicts, 0.0, rng, t) ==
            ValueSource::ResponseDictionary)
            ++dict_hits;
    }
    CHECK(dict_hits == 500);  // only rewarded option with epsilon 0
}

TEST_CASE("tallies never decrease over a session of rewards") {
    DetRng rng(50);
    ExperienceStore store;
    const auto key = ExperienceStore::agent_key("k", "source");
    std::uint64_t last = 0;
    for (int i = 0; i < 200; ++i) {
        if (rng.coin())
            reward_decisions({{key, "Random"}}, OutcomeClass::Success2xx, store);
        else
            reward_decisions({{key, "Random"}}, OutcomeClass::ClientError4xx, store);
        const auto now = store.tally(key, "Random");
        CHECK(now >= last);
        last = now;
    }
}

TEST_CASE("dictionaries are bounded rings keeping the most recent values") {
    ValueDictionaries dicts;
    for (int i = 0; i < 1200; ++i) dicts.push_response("k", json(i));
    CHECK(dicts.response_values["k"].size() == ValueDictionaries::kCapacity);
    CHECK(dicts.response_values["k"].back() == json(1199));
    CHECK(dicts.response_values["k"].front() == json(200));
}

TEST_CASE("build_assignments: required params always present, optionals traced") {
    DetRng rng(60);
    ExperienceStore store;
    ValueDictionaries dicts;
    InputGenerator gen(store, dicts, 0.1, rng);

    oas::OperationSpec op;
    op.method = oas::HttpMethod::Post;
    op.path = "/addProductToCart";
    auto productId = make_param("productId", SchemaKind::Integer, true);
    op.parameters = {productId, quantity_param()};

    int with_quantity = 0;
    for (int i = 0; i < 300; ++i) {
        const auto a = gen.build_assignments(op);
        REQUIRE(a.values.count("productId") == 1);
        if (a.values.count("quantity")) {
            ++with_quantity;
            CHECK(a.provenance.at("quantity").decisions.front().second == "include");
        }
    }
    CHECK(with_quantity > 0);
    CHECK(with_quantity < 300);
}

TEST_CASE("object parameters recurse: required properties always, optional via presence") {
    DetRng rng(61);
    ExperienceStore store;
    ValueDictionaries dicts;
    InputGenerator gen(store, dicts, 0.1, rng);

    auto body = make_param("profile", SchemaKind::Object, true);
    oas::Property req_prop;
    req_prop.name = "login";
    req_prop.required = true;
    req_prop.schema.kind = SchemaKind::String;
    req_prop.schema.min_length = 1;
    oas::Property opt_prop;
    opt_prop.name = "nickname";
    opt_prop.required = false;
    opt_prop.schema.kind = SchemaKind::String;
    body.schema.properties = {req_prop, opt_prop};

    int with_nickname = 0;
    for (int i = 0; i < 300; ++i) {
        DecisionTrace trace;
        const auto g = gen.generate_parameter(body, trace);
        REQUIRE(g.value.is_object());
        REQUIRE(g.value.contains("login"));
        if (g.value.contains("nickname")) ++with_nickname;
        const auto verdict = oas::validate_against_schema(g.value, body.schema);
        REQUIRE(verdict.valid);
    }
    CHECK(with_nickname > 0);
    CHECK(with_nickname < 300);
}
