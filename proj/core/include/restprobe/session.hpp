#pragma once

#include <optional>
#include <string>
#include <vector>

#include "restprobe/explorer.hpp"
#include "restprobe/input_generator.hpp"
#include "restprobe/intensifier.hpp"
#include "restprobe/interaction.hpp"
#include "restprobe/metrics.hpp"
#include "restprobe/oas_model.hpp"
#include "restprobe/rl/ppo.hpp"

namespace restprobe {

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TargetUnreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SessionConfig {
    // target: exactly one of (spec_path + base_url) or sim must be set
    std::string spec_path;
    std::string base_url;
    std::string sim;

    std::uint64_t request_budget = 1000;
    std::optional<double> wall_clock_budget_s;
    std::uint64_t seed = 0;
    double epsilon = 0.1;
    rl::PpoConfig ppo;
    std::size_t intensification_cap = 50;
    std::vector<std::pair<std::string, std::string>> auth_headers;  // ${VAR} expanded
    std::string llm_dict_path;
    std::string llm_endpoint;
    std::string out_dir;  // empty: keep artifacts in memory only
    ExplorerMode explorer_mode = ExplorerMode::Ppo;
    double http_timeout_s = 10.0;
    /// Keep running after full coverage instead of stopping one episode later.
    bool run_to_budget = false;

    void validate() const;  // throws ConfigInvalid
};

struct SessionReport {
    oas::ApiModel api;
    std::vector<Interaction> log;
    metrics::Timeline timeline;
    metrics::CoverageResult coverage;
    std::size_t unique_faults = 0;
    std::vector<rl::UpdateStats> ppo_history;
    rl::PolicyParams policy;  // final trained policy
    json summary;   // recomputable from interactions.jsonl alone
    json learning;  // PPO loss history + experience snapshot
    ExperienceStore experience;
    std::vector<std::string> warnings;
    int episodes = 0;
};

/// Runs one budgeted testing session: episodes of curiosity-driven
/// exploration, bandit-built inputs, first-success intensification bursts
/// and a PPO update per episode. Artifacts (interactions.jsonl,
/// timeline.csv, summary.json, learning.json) land in config.out_dir when
/// set. Throws ConfigInvalid or TargetUnreachable.
SessionReport run_session(const SessionConfig& config);

/// Reads an interactions.jsonl file back into memory.
std::vector<Interaction> read_interaction_log(const std::string& path);

/// Replaces ${VAR} with the environment value; unknown variables expand to
/// an empty string.
std::string substitute_env_vars(const std::string& text);

}  // namespace restprobe
