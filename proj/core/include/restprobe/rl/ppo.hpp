#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "restprobe/rl/mlp.hpp"

namespace restprobe::rl {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_ratio = 0.2;
    double learning_rate = 3e-4;
    int rollout_length = 0;  // 0 means "one episode, whatever its length"
    int minibatch_size = 64;
    int update_epochs = 10;
    double entropy_coef = 0.0;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-5;
    /// Uniform scale applied to rewards before GAE inside the training loop.
    /// Normalized advantages make the policy update invariant to it; it only
    /// conditions the value-regression targets. The curiosity rewards span
    /// 1e0..1e3, so 1e-3 keeps value targets O(1).
    double reward_scale = 1e-3;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on out-of-range values. When
    /// rollout_length is pinned (> 0) it must be a multiple of
    /// minibatch_size; episode-sized rollouts may leave a shorter tail batch.
    void validate() const;
};

/// Separate policy and value networks sharing the observation encoding:
/// input dim n (one success counter per operation), two tanh hidden layers
/// of width `hidden`, a logit head of size n and a scalar value head.
struct PolicyParams {
    int num_actions = 0;
    int hidden = 64;
    Mlp policy;
    Mlp value;

    static PolicyParams init(int num_actions, int hidden, DetRng& rng);
    bool all_finite() const;
};

struct RolloutBuffer {
    std::vector<VectorXd> observations;
    std::vector<int> actions;
    std::vector<double> log_probs;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<bool> episode_ends;

    std::vector<double> advantages;  // populated by compute_gae
    std::vector<double> returns;

    void push(VectorXd obs, int action, double log_prob, double reward, double value,
              bool episode_end);
    std::size_t size() const { return actions.size(); }
    bool empty() const { return actions.empty(); }
    bool finalized() const { return advantages.size() == actions.size() && !actions.empty(); }
};

struct ForwardResult {
    VectorXd probabilities;
    double value = 0.0;
};

/// Evaluates both networks on one observation. Masked-out actions receive
/// probability zero; the mask must keep at least one action available.
ForwardResult policy_forward(const PolicyParams& params, const VectorXd& obs,
                             const std::vector<bool>* mask = nullptr);

struct SampledAction {
    int action = 0;
    double log_prob = 0.0;
};

SampledAction sample_action(const VectorXd& probabilities, DetRng& rng);

/// Generalized advantage estimation, computed in place.
///   delta_t = r_t + gamma * V(s_{t+1}) - V(s_t)
///   A_t     = delta_t + gamma * lambda * A_{t+1}
/// The recursion resets across episode boundaries; V(s_{t+1}) is zero for a
/// step flagged as an interior episode end, and `bootstrap_value` for the
/// final step (pass 0 for a terminal state, V(s_T) to bootstrap a truncated
/// episode). returns_t = A_t + V(s_t).
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda, double bootstrap_value);

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    int minibatches = 0;
};

/// A minibatch view used by the loss; exposed so tests can evaluate the exact
/// objective the optimizer descends.
struct MiniBatch {
    std::vector<VectorXd> observations;
    std::vector<int> actions;
    std::vector<double> old_log_probs;
    std::vector<double> advantages;
    std::vector<double> returns;
};

struct LossBreakdown {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

/// Mean clipped-surrogate loss over the batch:
///   L = -mean(min(ratio*A, clip(ratio, 1-eps, 1+eps)*A))
///       + value_coef * mean((V - return)^2) - entropy_coef * mean(H).
LossBreakdown ppo_loss(const PolicyParams& params, const MiniBatch& batch, const PpoConfig& cfg);

/// Same objective with analytic gradients accumulated into the given
/// gradient buffers (already zeroed by the caller).
LossBreakdown ppo_loss_and_grads(const PolicyParams& params, const MiniBatch& batch,
                                 const PpoConfig& cfg, Mlp::Grads& policy_grads,
                                 Mlp::Grads& value_grads);

/// Runs cfg.update_epochs passes of minibatch Adam on the clipped objective.
/// Advantages are normalized to zero mean and unit variance once per update.
/// Throws NonFiniteLoss (leaving params unchanged) if any loss or gradient
/// goes non-finite.
UpdateStats ppo_update(PolicyParams& params, const RolloutBuffer& buffer, const PpoConfig& cfg,
                       DetRng& rng);

/// Versioned JSON checkpoint of all weights plus the config header.
void save_checkpoint(const PolicyParams& params, const PpoConfig& cfg, const std::string& path);
struct Checkpoint {
    PolicyParams params;
    PpoConfig config;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace restprobe::rl
