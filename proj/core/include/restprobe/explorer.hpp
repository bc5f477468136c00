#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "restprobe/interaction.hpp"
#include "restprobe/rl/ppo.hpp"

namespace restprobe {

/// Per-operation success counters, the policy's view of the API state.
struct StateObservation {
    static constexpr int kCounterCap = 20;

    std::vector<int> counters;

    explicit StateObservation(std::size_t num_operations = 0) : counters(num_operations, 0) {}

    std::size_t size() const { return counters.size(); }
    void reset() { std::fill(counters.begin(), counters.end(), 0); }

    /// Counters scaled into [0, 1] for the tanh networks.
    rl::VectorXd normalized() const;
};

/// Reward table: +1000 for an operation's first success, -100 for a repeat
/// success, -1 for any rejection or transport failure.
double compute_reward(const StateObservation& prev, int op_index, OutcomeClass outcome);

struct TransitionResult {
    StateObservation observation;
    bool cap_hit = false;  // the counter was already at the cap before this success
};

/// Success increments the acted-on counter (saturating at the cap); any
/// other outcome leaves the observation unchanged.
TransitionResult transition(const StateObservation& obs, int op_index, OutcomeClass outcome);

/// Episode length rule: 20 steps per documented operation.
int episode_length(std::size_t num_operations);

struct EpisodeState {
    int step_count = 0;
    int ep_length = 0;
    bool truncated = false;
};

enum class ExplorerMode { Ppo, Uniform };

struct EpisodeResult {
    rl::RolloutBuffer buffer;
    StateObservation final_observation{0};
    bool budget_exhausted = false;
    bool truncated = false;
    /// True when the episode ran to its natural end or cap truncation,
    /// i.e. was not cut short by the budget.
    bool complete = false;
};

/// Chooses operations with the PPO policy (or uniformly in ablation mode),
/// drives one step of the environment through the supplied callback, and
/// accumulates the rollout. The callback owns request building, execution
/// and all non-DRL bookkeeping; it returns the outcome of the step, or
/// nullopt when the request budget is exhausted.
class Explorer {
public:
    using StepFn = std::function<std::optional<OutcomeClass>(int op_index)>;

    Explorer(std::size_t num_operations, rl::PolicyParams& params, DetRng& rng,
             ExplorerMode mode = ExplorerMode::Ppo)
        : num_operations_(num_operations), params_(params), rng_(rng), mode_(mode) {}

    /// Samples the next operation for the given observation.
    int select_operation(const StateObservation& obs) const;

    /// Runs one episode: the observation starts at all zeros, the policy,
    /// experience stores and dictionaries persist across episodes.
    EpisodeResult run_episode(const StepFn& step);

    const StateObservation& observation() const { return obs_; }
    ExplorerMode mode() const { return mode_; }

private:
    std::size_t num_operations_;
    rl::PolicyParams& params_;
    DetRng& rng_;
    ExplorerMode mode_;
    StateObservation obs_{0};
};

}  // namespace restprobe
