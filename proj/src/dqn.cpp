#include "edgeq/dqn.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace edgeq {

ReplayMemory::ReplayMemory(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
    if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
    entries_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayMemory::remember(Experience exp) {
    if (entries_.size() == capacity_) {
        // Evict a uniformly random old experience.
        const std::size_t victim = static_cast<std::size_t>(rng_.below(entries_.size()));
        entries_[victim] = std::move(entries_.back());
        entries_.pop_back();
    }
    entries_.push_back(std::move(exp));
}

std::vector<const Experience*> ReplayMemory::sample(std::size_t batch) {
    if (entries_.empty()) throw DimensionMismatchError("cannot sample from an empty replay memory");
    std::vector<const Experience*> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        out.push_back(&entries_[static_cast<std::size_t>(rng_.below(entries_.size()))]);
    }
    return out;
}

int masked_argmax(const std::vector<double>& values, const ActionMask& mask) {
    if (values.size() != mask.size()) {
        throw DimensionMismatchError("value/mask length mismatch");
    }
    int best = -1;
    double best_value = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask[i]) continue;
        if (best < 0 || values[i] > best_value) {
            best = static_cast<int>(i);
            best_value = values[i];
        }
    }
    if (best < 0) throw InvalidActionError("mask has no valid action");
    return best;
}

double q_target(int reward, const std::vector<double>& next_q, const ActionMask& next_mask,
                double gamma) {
    const int best = masked_argmax(next_q, next_mask);
    return static_cast<double>(reward) + gamma * next_q[static_cast<std::size_t>(best)];
}

namespace {

std::vector<int> agent_layer_sizes(int devices, const AgentConfig& cfg) {
    std::vector<int> sizes;
    sizes.push_back(devices + 2);
    for (int i = 0; i < cfg.hidden_layers; ++i) sizes.push_back(cfg.hidden_width);
    sizes.push_back(action_count(devices));
    return sizes;
}

}  // namespace

DqnAgent::DqnAgent(int devices, const AgentConfig& cfg, std::uint64_t seed)
    : devices_(devices),
      cfg_(cfg),
      eval_(MlpNetwork::glorot_init(agent_layer_sizes(devices, cfg), cfg.activation,
                                    derive_seed(seed, "weights"))),
      target_(eval_),
      memory_(cfg.memory_capacity, derive_seed(seed, "memory")),
      action_rng_(derive_seed(seed, "action")),
      env_(initial_state(devices, 0)),
      next_env_(initial_state(devices, 1)),
      epsilon_(cfg.greedy ? 0.0 : cfg.epsilon.start) {
    if (devices < 1) throw ConfigError("cluster size must be at least 1");
    if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be positive");
    if (cfg.step_norm <= 0.0) throw ConfigError("step_norm must be positive");
}

int DqnAgent::select_action(const EnvironmentState& state) {
    const ActionMask mask = generate_mask(state);
    const double eps = cfg_.greedy ? 0.0 : epsilon_;
    if (action_rng_.uniform01() < eps) {
        std::vector<int> valid;
        valid.reserve(mask.size());
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) valid.push_back(static_cast<int>(i));
        }
        return valid[static_cast<std::size_t>(action_rng_.below(valid.size()))];
    }
    const std::vector<double> q = eval_.forward(encode_observation(state, cfg_.step_norm));
    return masked_argmax(q, mask);
}

std::optional<double> DqnAgent::train_step() {
    if (memory_.size() <= static_cast<std::size_t>(cfg_.start_size)) {
        return std::nullopt;
    }
    const auto batch = memory_.sample(static_cast<std::size_t>(cfg_.batch_size));
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    std::vector<int> actions;
    inputs.reserve(batch.size());
    targets.reserve(batch.size());
    actions.reserve(batch.size());
    for (const Experience* exp : batch) {
        const std::vector<double> next_q = target_.forward(exp->next_env);
        targets.push_back(q_target(exp->reward, next_q, exp->next_mask, cfg_.gamma));
        inputs.push_back(exp->env);
        actions.push_back(exp->action);
    }
    const double loss = eval_.train_batch(inputs, targets, actions, cfg_.training);
    ++train_steps_;
    if (cfg_.target_sync_period > 0 &&
        train_steps_ % static_cast<std::uint64_t>(cfg_.target_sync_period) == 0) {
        target_ = eval_;
    }
    return loss;
}

std::vector<bool> DqnAgent::decide(bool prev_disrupted) {
    if (last_action_ >= 0) {
        // Fold the previous execution's outcome into the pending state, score
        // it, and learn from the completed transition.
        next_env_.failed = prev_disrupted;
        last_reward_ = compute_reward(next_env_.blocked, prev_disrupted);
        ActionMask next_mask = generate_mask(next_env_);
        memory_.remember(Experience{encode_observation(env_, cfg_.step_norm),
                                    encode_observation(next_env_, cfg_.step_norm), last_action_,
                                    last_reward_, std::move(next_mask)});
        train_step();
    }
    env_ = next_env_;
    last_action_ = select_action(env_);
    next_env_ = apply_action(env_, last_action_);
    ++decisions_;
    if (!cfg_.greedy) {
        epsilon_ = std::max(cfg_.epsilon.min, epsilon_ * cfg_.epsilon.decay);
    }
    return next_env_.blocked;
}

void DqnAgent::load_weights(const MlpNetwork& net) {
    if (net.input_size() != devices_ + 2 || net.output_size() != action_count(devices_)) {
        throw DimensionMismatchError(
            "checkpoint network shape does not match a cluster of " + std::to_string(devices_) +
            " devices (expected " + std::to_string(devices_ + 2) + " inputs, " +
            std::to_string(action_count(devices_)) + " outputs)");
    }
    eval_ = net;
    target_ = net;
}

}  // namespace edgeq
