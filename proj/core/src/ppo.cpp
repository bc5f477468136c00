#include "restprobe/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace restprobe::rl {

namespace {

VectorXd softmax(VectorXd logits) {
    const double m = logits.maxCoeff();
    VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int step = 0;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    void apply(std::vector<double>& params, const std::vector<double>& grads,
               const PpoConfig& cfg) {
        ++step;
        const double b1 = cfg.adam_beta1;
        const double b2 = cfg.adam_beta2;
        const double bc1 = 1.0 - std::pow(b1, step);
        const double bc2 = 1.0 - std::pow(b2, step);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grads[i] * grads[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }
};

std::vector<double> flatten_grads(const Mlp::Grads& pg, const Mlp::Grads& vg) {
    std::vector<double> flat;
    const auto push = [&flat](const Mlp::Grads& g) {
        for (const auto& w : g.weights)
            for (int j = 0; j < w.cols(); ++j)
                for (int i = 0; i < w.rows(); ++i) flat.push_back(w(i, j));
        for (const auto& b : g.biases)
            for (int i = 0; i < b.size(); ++i) flat.push_back(b(i));
    };
    push(pg);
    push(vg);
    return flat;
}

}  // namespace

void PpoConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw std::invalid_argument("gae_lambda must be in [0, 1]");
    if (!(clip_ratio > 0.0)) throw std::invalid_argument("clip_ratio must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (minibatch_size < 1) throw std::invalid_argument("minibatch_size must be >= 1");
    if (update_epochs < 1) throw std::invalid_argument("update_epochs must be >= 1");
    if (rollout_length < 0) throw std::invalid_argument("rollout_length must be >= 0");
    if (rollout_length > 0 && rollout_length % minibatch_size != 0)
        throw std::invalid_argument("rollout_length must be divisible by minibatch_size");
    if (!(max_grad_norm > 0.0)) throw std::invalid_argument("max_grad_norm must be positive");
    if (value_coef < 0.0 || entropy_coef < 0.0)
        throw std::invalid_argument("loss coefficients must be non-negative");
}

PolicyParams PolicyParams::init(int num_actions, int hidden, DetRng& rng) {
    if (num_actions < 1) throw std::invalid_argument("num_actions must be >= 1");
    PolicyParams p;
    p.num_actions = num_actions;
    p.hidden = hidden;
    // Small-gain logit head keeps the initial policy near uniform.
    p.policy = Mlp::make(num_actions, hidden, num_actions, 2, 0.01, rng);
    p.value = Mlp::make(num_actions, hidden, 1, 2, 1.0, rng);
    return p;
}

bool PolicyParams::all_finite() const { return policy.all_finite() && value.all_finite(); }

void RolloutBuffer::push(VectorXd obs, int action, double log_prob, double reward, double value,
                         bool episode_end) {
    observations.push_back(std::move(obs));
    actions.push_back(action);
    log_probs.push_back(log_prob);
    rewards.push_back(reward);
    values.push_back(value);
    episode_ends.push_back(episode_end);
}

ForwardResult policy_forward(const PolicyParams& params, const VectorXd& obs,
                             const std::vector<bool>* mask) {
    if (obs.size() != params.num_actions)
        throw ShapeMismatch("observation length " + std::to_string(obs.size()) +
                            " does not match action count " + std::to_string(params.num_actions));
    if (mask) {
        if (static_cast<int>(mask->size()) != params.num_actions)
            throw ShapeMismatch("mask length does not match action count");
        if (std::none_of(mask->begin(), mask->end(), [](bool b) { return b; }))
            throw ShapeMismatch("mask disables every action");
    }
    VectorXd logits = params.policy.forward(obs);
    ForwardResult out;
    if (mask) {
        // explicit masked softmax so disabled actions get an exact zero
        double m = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < logits.size(); ++i)
            if ((*mask)[static_cast<std::size_t>(i)]) m = std::max(m, logits(i));
        VectorXd probs = VectorXd::Zero(logits.size());
        double sum = 0.0;
        for (int i = 0; i < logits.size(); ++i) {
            if (!(*mask)[static_cast<std::size_t>(i)]) continue;
            probs(i) = std::exp(logits(i) - m);
            sum += probs(i);
        }
        out.probabilities = probs / sum;
    } else {
        out.probabilities = softmax(std::move(logits));
    }
    out.value = params.value.forward(obs)(0);
    return out;
}

SampledAction sample_action(const VectorXd& probabilities, DetRng& rng) {
    const double u = rng.unit();
    double acc = 0.0;
    int chosen = static_cast<int>(probabilities.size()) - 1;
    for (int i = 0; i < probabilities.size(); ++i) {
        acc += probabilities(i);
        if (u < acc) {
            chosen = i;
            break;
        }
    }
    return {chosen, std::log(probabilities(chosen))};
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda, double bootstrap_value) {
    const auto n = buffer.size();
    buffer.advantages.assign(n, 0.0);
    buffer.returns.assign(n, 0.0);
    double carry = 0.0;
    for (std::size_t idx = n; idx-- > 0;) {
        const bool last = idx + 1 == n;
        const bool boundary = buffer.episode_ends[idx];
        const double next_value = last ? bootstrap_value : (boundary ? 0.0 : buffer.values[idx + 1]);
        if (boundary) carry = 0.0;  // the chain never crosses an episode end
        const double delta = buffer.rewards[idx] + gamma * next_value - buffer.values[idx];
        carry = delta + gamma * lambda * carry;
        buffer.advantages[idx] = carry;
        buffer.returns[idx] = carry + buffer.values[idx];
    }
}

LossBreakdown ppo_loss(const PolicyParams& params, const MiniBatch& batch, const PpoConfig& cfg) {
    auto pg = params.policy.zero_grads();
    auto vg = params.value.zero_grads();
    return ppo_loss_and_grads(params, batch, cfg, pg, vg);
}

LossBreakdown ppo_loss_and_grads(const PolicyParams& params, const MiniBatch& batch,
                                 const PpoConfig& cfg, Mlp::Grads& policy_grads,
                                 Mlp::Grads& value_grads) {
    const auto m = batch.observations.size();
    if (m == 0) throw std::invalid_argument("empty minibatch");
    const double inv_m = 1.0 / static_cast<double>(m);
    const double eps = cfg.clip_ratio;

    LossBreakdown out;
    int clipped = 0;

    for (std::size_t i = 0; i < m; ++i) {
        Mlp::Trace ptrace;
        const VectorXd logits = params.policy.forward(batch.observations[i], ptrace);
        const VectorXd probs = softmax(logits);
        const int a = batch.actions[i];
        const double logp = std::log(probs(a));
        const double ratio = std::exp(logp - batch.old_log_probs[i]);
        const double adv = batch.advantages[i];

        const double unclipped = ratio * adv;
        const double clamped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
        const double objective = std::min(unclipped, clamped);
        out.policy += -objective * inv_m;
        if (std::abs(ratio - 1.0) > eps) ++clipped;

        double entropy = 0.0;
        for (int k = 0; k < probs.size(); ++k) {
            if (probs(k) > 0.0) entropy -= probs(k) * std::log(probs(k));
        }
        out.entropy += entropy * inv_m;

        // d(-objective)/d(logp): gradient flows only through the branch the
        // min selected; the clamped branch is flat in the saturated region.
        const double dobj_dlogp = (unclipped <= clamped) ? unclipped : 0.0;
        // d entropy / d logit_k = -p_k (log p_k + H)
        VectorXd logit_grad = VectorXd::Zero(probs.size());
        for (int k = 0; k < probs.size(); ++k) {
            const double dlogp_dlogit = ((k == a) ? 1.0 : 0.0) - probs(k);
            double g = -dobj_dlogp * dlogp_dlogit;
            if (cfg.entropy_coef != 0.0 && probs(k) > 0.0) {
                const double dH = -probs(k) * (std::log(probs(k)) + entropy);
                g -= cfg.entropy_coef * dH;
            }
            logit_grad(k) = g * inv_m;
        }
        params.policy.backward(ptrace, logit_grad, policy_grads);

        Mlp::Trace vtrace;
        const double v = params.value.forward(batch.observations[i], vtrace)(0);
        const double err = v - batch.returns[i];
        out.value += err * err * inv_m;
        VectorXd vgrad(1);
        vgrad(0) = cfg.value_coef * 2.0 * err * inv_m;
        params.value.backward(vtrace, vgrad, value_grads);
    }

    out.clip_fraction = static_cast<double>(clipped) * inv_m;
    out.total = out.policy + cfg.value_coef * out.value - cfg.entropy_coef * out.entropy;
    return out;
}

UpdateStats ppo_update(PolicyParams& params, const RolloutBuffer& buffer, const PpoConfig& cfg,
                       DetRng& rng) {
    cfg.validate();
    if (!buffer.finalized())
        throw std::invalid_argument("ppo_update requires a buffer with computed advantages");

    // Normalize advantages once per update.
    const auto n = buffer.size();
    std::vector<double> adv(buffer.advantages);
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double stddev = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / (stddev + 1e-8);

    const PolicyParams snapshot = params;
    std::vector<double> flat_policy = params.policy.flatten();
    std::vector<double> flat_value = params.value.flatten();
    AdamState adam(flat_policy.size() + flat_value.size());

    UpdateStats stats;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    const auto batch_size = static_cast<std::size_t>(std::min<std::size_t>(
        static_cast<std::size_t>(cfg.minibatch_size), n));

    double stat_weight = 0.0;
    for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t stop = std::min(start + batch_size, n);
            MiniBatch mb;
            for (std::size_t k = start; k < stop; ++k) {
                const auto idx = order[k];
                mb.observations.push_back(buffer.observations[idx]);
                mb.actions.push_back(buffer.actions[idx]);
                mb.old_log_probs.push_back(buffer.log_probs[idx]);
                mb.advantages.push_back(adv[idx]);
                mb.returns.push_back(buffer.returns[idx]);
            }

            auto pg = params.policy.zero_grads();
            auto vg = params.value.zero_grads();
            LossBreakdown loss;
            try {
                loss = ppo_loss_and_grads(params, mb, cfg, pg, vg);
            } catch (const std::exception&) {
                params = snapshot;
                throw NonFiniteLoss("loss evaluation failed");
            }
            const double gnorm2 = pg.squared_norm() + vg.squared_norm();
            if (!std::isfinite(loss.total) || !std::isfinite(gnorm2)) {
                params = snapshot;
                throw NonFiniteLoss("non-finite loss or gradient, update aborted");
            }
            const double gnorm = std::sqrt(gnorm2);
            if (gnorm > cfg.max_grad_norm && gnorm > 0.0) {
                const double s = cfg.max_grad_norm / gnorm;
                pg.scale(s);
                vg.scale(s);
            }

            std::vector<double> flat_grads = flatten_grads(pg, vg);
            std::vector<double> flat_params(flat_policy);
            flat_params.insert(flat_params.end(), flat_value.begin(), flat_value.end());
            adam.apply(flat_params, flat_grads, cfg);
            std::copy(flat_params.begin(),
                      flat_params.begin() + static_cast<std::ptrdiff_t>(flat_policy.size()),
                      flat_policy.begin());
            std::copy(flat_params.begin() + static_cast<std::ptrdiff_t>(flat_policy.size()),
                      flat_params.end(), flat_value.begin());
            params.policy.unflatten(flat_policy);
            params.value.unflatten(flat_value);

            stats.policy_loss += loss.policy;
            stats.value_loss += loss.value;
            stats.entropy += loss.entropy;
            stats.clip_fraction += loss.clip_fraction;
            stat_weight += 1.0;
            ++stats.minibatches;
        }
    }
    if (!params.all_finite()) {
        params = snapshot;
        throw NonFiniteLoss("non-finite parameters after update");
    }
    if (stat_weight > 0.0) {
        stats.policy_loss /= stat_weight;
        stats.value_loss /= stat_weight;
        stats.entropy /= stat_weight;
        stats.clip_fraction /= stat_weight;
    }
    return stats;
}

namespace {

nlohmann::json config_to_json(const PpoConfig& c) {
    return {{"gamma", c.gamma},
            {"gae_lambda", c.gae_lambda},
            {"clip_ratio", c.clip_ratio},
            {"learning_rate", c.learning_rate},
            {"rollout_length", c.rollout_length},
            {"minibatch_size", c.minibatch_size},
            {"update_epochs", c.update_epochs},
            {"entropy_coef", c.entropy_coef},
            {"value_coef", c.value_coef},
            {"max_grad_norm", c.max_grad_norm},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_eps", c.adam_eps},
            {"seed", c.seed}};
}

PpoConfig config_from_json(const nlohmann::json& j) {
    PpoConfig c;
    c.gamma = j.value("gamma", c.gamma);
    c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
    c.clip_ratio = j.value("clip_ratio", c.clip_ratio);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.rollout_length = j.value("rollout_length", c.rollout_length);
    c.minibatch_size = j.value("minibatch_size", c.minibatch_size);
    c.update_epochs = j.value("update_epochs", c.update_epochs);
    c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
    c.value_coef = j.value("value_coef", c.value_coef);
    c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.seed = j.value("seed", c.seed);
    return c;
}

}  // namespace

void save_checkpoint(const PolicyParams& params, const PpoConfig& cfg, const std::string& path) {
    nlohmann::json j;
    j["version"] = 1;
    j["num_actions"] = params.num_actions;
    j["hidden"] = params.hidden;
    j["policy"] = params.policy.flatten();
    j["value"] = params.value.flatten();
    j["config"] = config_to_json(cfg);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, true);
    if (j.value("version", 0) != 1)
        throw std::runtime_error("unsupported checkpoint version in " + path);

    Checkpoint ck;
    ck.config = config_from_json(j.at("config"));
    const int n = j.at("num_actions").get<int>();
    const int hidden = j.at("hidden").get<int>();
    DetRng scratch(0);
    ck.params = PolicyParams::init(n, hidden, scratch);
    const auto policy_flat = j.at("policy").get<std::vector<double>>();
    const auto value_flat = j.at("value").get<std::vector<double>>();
    if (policy_flat.size() != ck.params.policy.parameter_count() ||
        value_flat.size() != ck.params.value.parameter_count())
        throw std::runtime_error("checkpoint shape mismatch in " + path);
    ck.params.policy.unflatten(policy_flat);
    ck.params.value.unflatten(value_flat);
    return ck;
}

}  // namespace restprobe::rl
