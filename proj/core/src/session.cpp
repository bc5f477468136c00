#include "restprobe/session.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "restprobe/http_backend.hpp"
#include "restprobe/llm_dict.hpp"
#include "restprobe/sims/sim_api.hpp"

namespace restprobe {

namespace {

using Clock = std::chrono::steady_clock;

struct SessionState {
    const SessionConfig& config;
    oas::ApiModel api;
    Backend* backend = nullptr;

    DetRng rng;
    ExperienceStore store;
    ValueDictionaries dicts;
    Intensifier intensifier;

    std::vector<Interaction> log;
    metrics::Timeline timeline;
    metrics::FaultRegistry faults;
    std::vector<bool> covered;
    std::size_t covered_count = 0;
    std::uint64_t sequence = 0;
    Clock::time_point started = Clock::now();
    std::vector<std::string> warnings;

    explicit SessionState(const SessionConfig& cfg)
        : config(cfg), rng(split_seed(cfg.seed, 1)), intensifier(cfg.intensification_cap) {}

    double elapsed_s() const {
        return std::chrono::duration<double>(Clock::now() - started).count();
    }

    bool budget_left() const { return sequence < config.request_budget; }

    bool wall_clock_left() const {
        return !config.wall_clock_budget_s || elapsed_s() < *config.wall_clock_budget_s;
    }

    void record(const Interaction& ix) {
        if (ix.outcome == OutcomeClass::Success2xx && ix.op_index >= 0 &&
            !covered[static_cast<std::size_t>(ix.op_index)]) {
            covered[static_cast<std::size_t>(ix.op_index)] = true;
            ++covered_count;
        }
        faults.record(ix);
        log.push_back(ix);
        timeline.record(elapsed_s(), sequence, covered_count, faults.unique_count());
    }

    bool all_covered() const { return covered_count == covered.size(); }
};

std::vector<std::pair<std::string, std::string>> expanded_auth(const SessionConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(cfg.auth_headers.size());
    for (const auto& [k, v] : cfg.auth_headers) out.emplace_back(k, substitute_env_vars(v));
    return out;
}

void write_artifacts(const SessionConfig& cfg, const SessionReport& report) {
    if (cfg.out_dir.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    {
        std::ofstream out(dir / "interactions.jsonl", std::ios::binary);
        for (const auto& ix : report.log) out << interaction_to_json(ix).dump() << "\n";
    }
    {
        std::ofstream out(dir / "timeline.csv", std::ios::binary);
        out << report.timeline.to_csv();
    }
    {
        std::ofstream out(dir / "summary.json", std::ios::binary);
        out << report.summary.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "learning.json", std::ios::binary);
        out << report.learning.dump(2) << "\n";
    }
}

}  // namespace

void SessionConfig::validate() const {
    const bool sim_mode = !sim.empty();
    const bool real_mode = !spec_path.empty() || !base_url.empty();
    if (sim_mode && real_mode)
        throw ConfigInvalid("choose either a sim or a spec+URL target, not both");
    if (!sim_mode && (spec_path.empty() || base_url.empty()))
        throw ConfigInvalid("real mode needs both a spec path and a base URL");
    if (request_budget < 1) throw ConfigInvalid("request budget must be at least 1");
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigInvalid("epsilon must be in [0, 1]");
    if (wall_clock_budget_s && *wall_clock_budget_s <= 0.0)
        throw ConfigInvalid("wall clock budget must be positive");
    ppo.validate();
}

std::string substitute_env_vars(const std::string& text) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '$' && i + 1 < text.size() && text[i + 1] == '{') {
            const auto end = text.find('}', i + 2);
            if (end != std::string::npos) {
                const std::string var = text.substr(i + 2, end - i - 2);
                if (const char* value = std::getenv(var.c_str())) out += value;
                i = end + 1;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

std::vector<Interaction> read_interaction_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open interaction log " + path);
    std::vector<Interaction> log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        log.push_back(interaction_from_json(json::parse(line)));
    }
    return log;
}

SessionReport run_session(const SessionConfig& config) {
    config.validate();

    SessionState st(config);

    std::unique_ptr<sims::SimApi> sim;
    std::unique_ptr<HttpBackend> http;
    if (!config.sim.empty()) {
        sim = sims::make_sim(config.sim, split_seed(config.seed, 3));
        if (!sim) throw ConfigInvalid("unknown sim '" + config.sim + "'");
        st.api = oas::parse_spec(sim->openapi_yaml(), oas::FormatHint::Yaml);
        st.backend = sim.get();
    } else {
        st.api = oas::parse_spec_file(config.spec_path);
        st.api.base_url = config.base_url;
        http = std::make_unique<HttpBackend>(
            HttpBackend::Options{config.base_url, config.http_timeout_s});
        if (!http->reachable())
            throw TargetUnreachable("no HTTP response from " + config.base_url);
        st.backend = http.get();
    }
    st.warnings = st.api.warnings;
    for (const auto& w : st.api.warnings) std::cerr << "[oas] " << w << "\n";

    const std::size_t n = st.api.operations.size();
    st.covered.assign(n, false);

    if (!config.llm_dict_path.empty()) {
        st.dicts.llm_values = load_llm_dictionary_file(config.llm_dict_path, &st.warnings);
    } else if (!config.llm_endpoint.empty()) {
        st.dicts.llm_values =
            fetch_llm_dictionary(config.llm_endpoint, st.api, config.http_timeout_s, &st.warnings);
    }

    DetRng init_rng(split_seed(config.seed, 2));
    rl::PolicyParams params = rl::PolicyParams::init(static_cast<int>(n), 64, init_rng);
    rl::PpoConfig ppo_cfg = config.ppo;
    ppo_cfg.seed = config.seed;

    Explorer explorer(n, params, st.rng, config.explorer_mode);
    InputGenerator input_gen(st.store, st.dicts, config.epsilon, st.rng);
    const auto auth = expanded_auth(config);

    SessionReport report;

    // One environment step: build inputs, fire the request, harvest, reward
    // the bandits, and intensify on an operation's first success.
    const auto step = [&](int op_index) -> std::optional<OutcomeClass> {
        if (!st.budget_left() || !st.wall_clock_left()) return std::nullopt;
        const auto& op = st.api.operations[static_cast<std::size_t>(op_index)];

        Assignments assignments = input_gen.build_assignments(op);
        ConcreteRequest request = build_request(op, assignments.values, auth);
        request.provenance = assignments.provenance;

        const bool first_success_pending = !st.covered[static_cast<std::size_t>(op_index)];
        Interaction ix = execute(request, *st.backend, ++st.sequence);
        st.record(ix);
        if (auto warning = harvest(ix, st.dicts)) st.warnings.push_back(*warning);
        reward_decisions(assignments.trace, ix.outcome, st.store);

        if (ix.outcome == OutcomeClass::Success2xx && first_success_pending &&
            !st.intensifier.triggered(op_index)) {
            const auto execute_mutant =
                [&](const MutantRequest& mutant) -> std::optional<Interaction> {
                if (!st.budget_left() || !st.wall_clock_left()) return std::nullopt;
                ConcreteRequest mreq = build_request(op, mutant.assignments, auth);
                mreq.method = mutant.method;
                for (const auto& [name, value] : mutant.assignments) {
                    Provenance prov;
                    prov.value = value;
                    prov.source = name == mutant.target.parameter
                                      ? "mutated:" + std::string(to_string(mutant.target.op))
                                      : "base";
                    mreq.provenance[name] = std::move(prov);
                }
                Interaction mix = execute(mreq, *st.backend, ++st.sequence);
                mix.kind = InteractionKind::Mutant;
                mix.mutator = to_string(mutant.target.op);
                st.record(mix);
                // mutant outcomes feed dictionaries and metrics, never the
                // DRL or bandit rewards; request values only from nominal
                // mutants, whose requests still satisfy the OAS
                if (auto warning = harvest(mix, st.dicts, is_nominal(mutant.target.op)))
                    st.warnings.push_back(*warning);
                return mix;
            };
            st.intensifier.intensify(assignments.values, op, st.rng, execute_mutant);
        }

        st.timeline.maybe_periodic(st.elapsed_s());
        return ix.outcome;
    };

    while (st.budget_left() && st.wall_clock_left()) {
        const bool covered_at_start = st.all_covered();
        st.backend->reset();  // sims replay from their initial state
        EpisodeResult episode = explorer.run_episode(step);
        ++report.episodes;

        if (config.explorer_mode == ExplorerMode::Ppo && !episode.buffer.empty()) {
            for (auto& r : episode.buffer.rewards) r *= ppo_cfg.reward_scale;
            const double bootstrap =
                rl::policy_forward(params, episode.final_observation.normalized()).value;
            rl::compute_gae(episode.buffer, ppo_cfg.gamma, ppo_cfg.gae_lambda, bootstrap);
            try {
                report.ppo_history.push_back(ppo_update(params, episode.buffer, ppo_cfg, st.rng));
            } catch (const rl::NonFiniteLoss& e) {
                st.warnings.push_back(std::string("PPO update skipped: ") + e.what());
            }
        }

        if (episode.budget_exhausted) break;
        if (!config.run_to_budget && covered_at_start && episode.complete && st.all_covered())
            break;
    }

    report.api = st.api;
    report.policy = params;
    report.log = std::move(st.log);
    report.timeline = st.timeline;
    report.coverage = metrics::operation_coverage(report.log, report.api);
    report.unique_faults = st.faults.unique_count();
    report.experience = st.store;
    report.warnings = st.warnings;
    report.summary = metrics::summary_json(report.log, report.api);

    json ppo_stats = json::array();
    for (const auto& u : report.ppo_history) {
        ppo_stats.push_back({{"policy_loss", u.policy_loss},
                             {"value_loss", u.value_loss},
                             {"entropy", u.entropy},
                             {"clip_fraction", u.clip_fraction},
                             {"minibatches", u.minibatches}});
    }
    report.learning = {{"episodes", report.episodes},
                       {"ppo_updates", ppo_stats},
                       {"experience", st.store.to_json()},
                       {"warnings", report.warnings}};

    write_artifacts(config, report);
    return report;
}

}  // namespace restprobe
