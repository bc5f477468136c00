#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "restprobe/session.hpp"
#include "restprobe/sims/server.hpp"
#include "restprobe/sims/sim_api.hpp"

namespace {

using restprobe::SessionConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitUnreachable = 2;

// Config file keys mirror SessionConfig field names; flags override.
void apply_config_file(const std::string& path, SessionConfig& cfg) {
    const YAML::Node root = YAML::LoadFile(path);
    if (root["spec_path"]) cfg.spec_path = root["spec_path"].as<std::string>();
    if (root["base_url"]) cfg.base_url = root["base_url"].as<std::string>();
    if (root["sim"]) cfg.sim = root["sim"].as<std::string>();
    if (root["request_budget"]) cfg.request_budget = root["request_budget"].as<std::uint64_t>();
    if (root["wall_clock_budget_s"])
        cfg.wall_clock_budget_s = root["wall_clock_budget_s"].as<double>();
    if (root["seed"]) cfg.seed = root["seed"].as<std::uint64_t>();
    if (root["epsilon"]) cfg.epsilon = root["epsilon"].as<double>();
    if (root["intensification_cap"])
        cfg.intensification_cap = root["intensification_cap"].as<std::size_t>();
    if (root["llm_dict_path"]) cfg.llm_dict_path = root["llm_dict_path"].as<std::string>();
    if (root["llm_endpoint"]) cfg.llm_endpoint = root["llm_endpoint"].as<std::string>();
    if (root["out_dir"]) cfg.out_dir = root["out_dir"].as<std::string>();
    if (root["http_timeout_s"]) cfg.http_timeout_s = root["http_timeout_s"].as<double>();
    if (root["explorer_mode"]) {
        cfg.explorer_mode = root["explorer_mode"].as<std::string>() == "uniform"
                                ? restprobe::ExplorerMode::Uniform
                                : restprobe::ExplorerMode::Ppo;
    }
    if (root["auth_headers"]) {
        for (const auto& it : root["auth_headers"])
            cfg.auth_headers.emplace_back(it.first.as<std::string>(),
                                          it.second.as<std::string>());
    }
    if (const YAML::Node ppo = root["ppo"]) {
        auto& p = cfg.ppo;
        if (ppo["gamma"]) p.gamma = ppo["gamma"].as<double>();
        if (ppo["gae_lambda"]) p.gae_lambda = ppo["gae_lambda"].as<double>();
        if (ppo["clip_ratio"]) p.clip_ratio = ppo["clip_ratio"].as<double>();
        if (ppo["learning_rate"]) p.learning_rate = ppo["learning_rate"].as<double>();
        if (ppo["minibatch_size"]) p.minibatch_size = ppo["minibatch_size"].as<int>();
        if (ppo["update_epochs"]) p.update_epochs = ppo["update_epochs"].as<int>();
        if (ppo["entropy_coef"]) p.entropy_coef = ppo["entropy_coef"].as<double>();
        if (ppo["value_coef"]) p.value_coef = ppo["value_coef"].as<double>();
        if (ppo["max_grad_norm"]) p.max_grad_norm = ppo["max_grad_norm"].as<double>();
    }
}

std::vector<std::pair<std::string, std::string>> parse_header_flags(
    const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& h : raw) {
        const auto colon = h.find(':');
        if (colon == std::string::npos)
            throw restprobe::ConfigInvalid("auth header must look like 'Name: value'");
        std::string value = h.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.erase(0, 1);
        out.emplace_back(h.substr(0, colon), value);
    }
    return out;
}

int cmd_test(const SessionConfig& cfg) {
    const auto report = restprobe::run_session(cfg);
    std::cout << "operations: " << report.api.operations.size() << "\n"
              << "requests:   " << report.log.size() << "\n"
              << "episodes:   " << report.episodes << "\n"
              << "coverage:   " << report.coverage.covered << "/"
              << report.coverage.flags.size() << "\n"
              << "5xx faults: " << report.unique_faults << "\n";
    if (!cfg.out_dir.empty()) std::cout << "artifacts:  " << cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_report(const std::string& log_path, const std::string& spec_path, const std::string& sim,
               const std::string& out_path) {
    restprobe::oas::ApiModel api;
    if (!sim.empty()) {
        const auto s = restprobe::sims::make_sim(sim, 0);
        if (!s) throw restprobe::ConfigInvalid("unknown sim '" + sim + "'");
        api = restprobe::oas::parse_spec(s->openapi_yaml(), restprobe::oas::FormatHint::Yaml);
    } else if (!spec_path.empty()) {
        api = restprobe::oas::parse_spec_file(spec_path);
    } else {
        throw restprobe::ConfigInvalid("report needs --spec or --sim");
    }

    const auto log = restprobe::read_interaction_log(log_path);
    const auto summary = restprobe::metrics::summary_json(log, api);
    if (out_path.empty()) {
        std::cout << summary.dump(2) << "\n";
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << summary.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_sim_spec(const std::string& sim, const std::string& out_path) {
    const auto s = restprobe::sims::make_sim(sim, 0);
    if (!s) throw restprobe::ConfigInvalid("unknown sim '" + sim + "'");
    if (out_path.empty()) {
        std::cout << s->openapi_yaml();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << s->openapi_yaml();
    }
    return kExitOk;
}

int cmd_sim_serve(const std::string& sim, const std::string& host, int port, std::uint64_t seed) {
    auto s = restprobe::sims::make_sim(sim, seed);
    if (!s) throw restprobe::ConfigInvalid("unknown sim '" + sim + "'");
    const std::string name = s->name();
    restprobe::sims::SimServer server(std::move(s));
    const int bound = server.start(host, port);
    if (bound < 0) throw restprobe::ConfigInvalid("cannot bind " + host + ":" + std::to_string(port));
    std::cout << "serving sim '" << name << "' on http://" << host << ":" << bound
              << " (Ctrl-C to stop)\n";
    for (;;) std::this_thread::sleep_for(std::chrono::seconds(3600));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Autonomous black-box REST API tester"};
    app.require_subcommand(1);

    // test
    auto* test = app.add_subcommand("test", "Run a testing session against a sim or a live API");
    SessionConfig cfg;
    std::string config_file;
    std::vector<std::string> header_flags;
    std::string explorer_flag;
    test->add_option("--config", config_file, "YAML/JSON config file (flags override it)");
    test->add_option("--spec", cfg.spec_path, "OpenAPI 3.x document (YAML or JSON)");
    test->add_option("--url", cfg.base_url, "Base URL of the live API");
    test->add_option("--sim", cfg.sim, "Bundled sim target: ecomm, chain[N], flaky");
    test->add_option("--budget", cfg.request_budget, "Request budget");
    test->add_option("--seed", cfg.seed, "RNG seed");
    test->add_option("--eps", cfg.epsilon, "Bandit exploration rate");
    test->add_option("--out", cfg.out_dir, "Output directory for artifacts");
    test->add_option("--wall-clock-budget", cfg.wall_clock_budget_s, "Wall clock budget, seconds");
    test->add_option("--intensify-cap", cfg.intensification_cap, "Mutants per intensification");
    test->add_option("--llm-dict", cfg.llm_dict_path, "LLM dictionary file (JSON name->values)");
    test->add_option("--llm-endpoint", cfg.llm_endpoint, "Generic completion endpoint URL");
    test->add_option("--timeout", cfg.http_timeout_s, "HTTP timeout, seconds");
    test->add_option("--auth", header_flags, "Auth header 'Name: value' (repeatable, ${VAR} ok)");
    test->add_option("--explorer", explorer_flag, "ppo (default) or uniform (ablation)")
        ->check(CLI::IsMember({"ppo", "uniform"}));

    // report
    auto* report = app.add_subcommand("report", "Recompute the summary from an interaction log");
    std::string report_log, report_spec, report_sim, report_out;
    report->add_option("--log", report_log, "interactions.jsonl path")->required();
    report->add_option("--spec", report_spec, "OpenAPI document the log was produced against");
    report->add_option("--sim", report_sim, "Sim selector the log was produced against");
    report->add_option("--out", report_out, "Write summary JSON here instead of stdout");

    // sim serve / sim spec
    auto* sim_cmd = app.add_subcommand("sim", "Simulated API utilities");
    sim_cmd->require_subcommand(1);
    auto* serve = sim_cmd->add_subcommand("serve", "Host a sim over localhost HTTP");
    std::string serve_sim = "ecomm", serve_host = "127.0.0.1";
    int serve_port = 8080;
    std::uint64_t serve_seed = 0;
    serve->add_option("--sim", serve_sim, "Sim selector");
    serve->add_option("--host", serve_host, "Bind host");
    serve->add_option("--port", serve_port, "Port (0 picks a free one)");
    serve->add_option("--seed", serve_seed, "Sim seed");
    auto* spec = sim_cmd->add_subcommand("spec", "Print a sim's OpenAPI document");
    std::string spec_sim = "ecomm", spec_out;
    spec->add_option("--sim", spec_sim, "Sim selector");
    spec->add_option("--out", spec_out, "Write the YAML here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (test->parsed()) {
            if (!config_file.empty()) {
                SessionConfig file_cfg;
                apply_config_file(config_file, file_cfg);
                // a flag given on the command line wins over the file
                if (test->count("--spec") == 0) file_cfg.spec_path.swap(cfg.spec_path);
                if (test->count("--url") == 0) file_cfg.base_url.swap(cfg.base_url);
                if (test->count("--sim") == 0) file_cfg.sim.swap(cfg.sim);
                if (test->count("--budget") == 0) cfg.request_budget = file_cfg.request_budget;
                if (test->count("--seed") == 0) cfg.seed = file_cfg.seed;
                if (test->count("--eps") == 0) cfg.epsilon = file_cfg.epsilon;
                if (test->count("--out") == 0) file_cfg.out_dir.swap(cfg.out_dir);
                if (test->count("--wall-clock-budget") == 0)
                    cfg.wall_clock_budget_s = file_cfg.wall_clock_budget_s;
                if (test->count("--intensify-cap") == 0)
                    cfg.intensification_cap = file_cfg.intensification_cap;
                if (test->count("--llm-dict") == 0) file_cfg.llm_dict_path.swap(cfg.llm_dict_path);
                if (test->count("--llm-endpoint") == 0)
                    file_cfg.llm_endpoint.swap(cfg.llm_endpoint);
                if (test->count("--timeout") == 0) cfg.http_timeout_s = file_cfg.http_timeout_s;
                if (test->count("--auth") == 0) cfg.auth_headers = file_cfg.auth_headers;
                if (test->count("--explorer") == 0) cfg.explorer_mode = file_cfg.explorer_mode;
                cfg.ppo = file_cfg.ppo;
            }
            if (!header_flags.empty()) cfg.auth_headers = parse_header_flags(header_flags);
            if (!explorer_flag.empty())
                cfg.explorer_mode = explorer_flag == "uniform" ? restprobe::ExplorerMode::Uniform
                                                               : restprobe::ExplorerMode::Ppo;
            return cmd_test(cfg);
        }
        if (report->parsed()) return cmd_report(report_log, report_spec, report_sim, report_out);
        if (serve->parsed()) return cmd_sim_serve(serve_sim, serve_host, serve_port, serve_seed);
        if (spec->parsed()) return cmd_sim_spec(spec_sim, spec_out);
    } catch (const restprobe::TargetUnreachable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreachable;
    } catch (const restprobe::ConfigInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
