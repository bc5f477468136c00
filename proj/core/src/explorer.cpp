#include "restprobe/explorer.hpp"

#include <algorithm>
#include <cmath>

namespace restprobe {

rl::VectorXd StateObservation::normalized() const {
    rl::VectorXd v(counters.size());
    for (std::size_t i = 0; i < counters.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = static_cast<double>(counters[i]) / kCounterCap;
    return v;
}

double compute_reward(const StateObservation& prev, int op_index, OutcomeClass outcome) {
    if (outcome == OutcomeClass::Success2xx)
        return prev.counters[static_cast<std::size_t>(op_index)] == 0 ? 1000.0 : -100.0;
    return -1.0;
}

TransitionResult transition(const StateObservation& obs, int op_index, OutcomeClass outcome) {
    TransitionResult out{obs, false};
    if (outcome != OutcomeClass::Success2xx) return out;
    auto& counter = out.observation.counters[static_cast<std::size_t>(op_index)];
    if (counter >= StateObservation::kCounterCap) {
        out.cap_hit = true;  // saturated; the episode should truncate
        return out;
    }
    ++counter;
    return out;
}

int episode_length(std::size_t num_operations) { return 20 * static_cast<int>(num_operations); }

int Explorer::select_operation(const StateObservation& obs) const {
    if (num_operations_ == 1) return 0;
    if (mode_ == ExplorerMode::Uniform)
        return static_cast<int>(rng_.range(0, static_cast<std::int64_t>(num_operations_) - 1));
    const auto fwd = rl::policy_forward(params_, obs.normalized());
    return rl::sample_action(fwd.probabilities, rng_).action;
}

EpisodeResult Explorer::run_episode(const StepFn& step) {
    obs_ = StateObservation(num_operations_);
    EpisodeResult result;
    const int ep_len = episode_length(num_operations_);

    for (int t = 0; t < ep_len; ++t) {
        const rl::VectorXd encoded = obs_.normalized();
        int action;
        double log_prob;
        double value;
        if (mode_ == ExplorerMode::Uniform) {
            action = static_cast<int>(rng_.range(0, static_cast<std::int64_t>(num_operations_) - 1));
            log_prob = -std::log(static_cast<double>(num_operations_));
            value = 0.0;
        } else {
            const auto fwd = rl::policy_forward(params_, encoded);
            const auto sampled = rl::sample_action(fwd.probabilities, rng_);
            action = sampled.action;
            log_prob = sampled.log_prob;
            value = fwd.value;
        }

        const auto outcome = step(action);
        if (!outcome) {
            result.budget_exhausted = true;
            break;  // partial buffer, still valid for an update
        }

        const double reward = compute_reward(obs_, action, *outcome);
        auto next = transition(obs_, action, *outcome);

        const bool truncate = next.cap_hit;
        const bool last_step = truncate || t + 1 == ep_len;
        result.buffer.push(encoded, action, log_prob, reward, value, last_step);
        obs_ = std::move(next.observation);

        if (truncate) {
            result.truncated = true;
            break;
        }
    }

    result.complete = !result.budget_exhausted;
    if (result.budget_exhausted && !result.buffer.empty()) {
        // budget ran out mid-episode; close the trajectory where it stands
        result.buffer.episode_ends.back() = true;
    }
    result.final_observation = obs_;
    return result;
}

}  // namespace restprobe
