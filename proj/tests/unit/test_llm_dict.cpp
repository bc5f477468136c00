#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <httplib.h>

#include "restprobe/llm_dict.hpp"
#include "restprobe/sims/ecomm.hpp"

using namespace restprobe;

TEST_CASE("dictionary file loads under normalized keys") {
    const auto dir = std::filesystem::temp_directory_path() / "restprobe_llm_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "dict.json").string();
    {
        std::ofstream out(path);
        out << R"({"product_id": [17, 42], "keyword": ["iliad", "odyssey"], "bad": 5,
                   "mixed": ["ok", {"nope": 1}]})";
    }
    std::vector<std::string> warnings;
    const auto dict = load_llm_dictionary_file(path, &warnings);
    REQUIRE(dict.count("productid") == 1);
    CHECK(dict.at("productid").size() == 2);
    CHECK(dict.at("keyword")[0] == nlohmann::json("iliad"));
    CHECK(dict.count("bad") == 0);
    CHECK(dict.at("mixed").size() == 1);  // the object entry was skipped
    CHECK(warnings.size() == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing or malformed files degrade with a warning") {
    std::vector<std::string> warnings;
    CHECK(load_llm_dictionary_file("/nonexistent/dict.json", &warnings).empty());
    CHECK(warnings.size() == 1);
}

TEST_CASE("prompt carries method, path, descriptions, name and type") {
    sims::SimEComm sim;
    const auto api = oas::parse_spec(sim.openapi_yaml(), oas::FormatHint::Yaml);
    const auto& search = api.operations[1];
    const auto prompt = llm_prompt(search, search.parameters[0], 20);
    CHECK(prompt.find("GET /products/search") != std::string::npos);
    CHECK(prompt.find("keyword") != std::string::npos);
    CHECK(prompt.find("string") != std::string::npos);
    CHECK(prompt.find("at least 20") != std::string::npos);
    CHECK(prompt.find("Search products by name") != std::string::npos);
}

TEST_CASE("completion endpoint fetch: one query per parameter, failures degrade") {
    httplib::Server server;
    int hits = 0;
    server.Post("/complete", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.contains("prompt"));
        if (body["prompt"].get<std::string>().find("quantity") != std::string::npos) {
            res.status = 500;  // this parameter's fetch fails
            return;
        }
        nlohmann::json values = nlohmann::json::array();
        for (int i = 0; i < 20; ++i) values.push_back("v" + std::to_string(i));
        res.set_content(nlohmann::json{{"values", values}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&]() { server.listen_after_bind(); });
    server.wait_until_ready();

    sims::SimEComm sim;
    const auto api = oas::parse_spec(sim.openapi_yaml(), oas::FormatHint::Yaml);
    std::vector<std::string> warnings;
    const auto dict = fetch_llm_dictionary("http://127.0.0.1:" + std::to_string(port) + "/complete",
                                           api, 5.0, &warnings);
    CHECK(hits == 3);  // productId, quantity, keyword
    CHECK(dict.count("productid") == 1);
    CHECK(dict.at("productid").size() == 20);
    CHECK(dict.count("keyword") == 1);
    CHECK(dict.count("quantity") == 0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("quantity") != std::string::npos);

    server.stop();
    worker.join();
}

TEST_CASE("unreachable endpoint leaves the dictionary empty with warnings") {
    sims::SimEComm sim;
    const auto api = oas::parse_spec(sim.openapi_yaml(), oas::FormatHint::Yaml);
    std::vector<std::string> warnings;
    const auto dict = fetch_llm_dictionary("http://127.0.0.1:9/complete", api, 0.2, &warnings);
    CHECK(dict.empty());
    CHECK(warnings.size() == 3);
}
