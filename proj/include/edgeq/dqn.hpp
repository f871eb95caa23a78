#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "edgeq/core.hpp"
#include "edgeq/nn.hpp"
#include "edgeq/policies.hpp"
#include "edgeq/rng.hpp"

namespace edgeq {

// One replay tuple: observation, successor observation, the action taken,
// the reward observed on the successor, and the successor's action mask.
struct Experience {
    std::vector<double> env;
    std::vector<double> next_env;
    int action = -1;
    int reward = 0;
    ActionMask next_mask;
};

// Bounded experience store. When full, a uniformly random old entry makes
// room for the new one. Owns the random stream used for eviction and
// sampling.
class ReplayMemory {
public:
    ReplayMemory(std::size_t capacity, std::uint64_t seed);

    void remember(Experience exp);

    // `batch` uniform draws with replacement. Pointers stay valid until the
    // next remember().
    std::vector<const Experience*> sample(std::size_t batch);

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience& at(std::size_t i) const { return entries_[i]; }

private:
    std::size_t capacity_;
    std::vector<Experience> entries_;
    Rng rng_;
};

struct EpsilonSchedule {
    double start = 0.1;
    double min = 0.01;
    double decay = 0.999;  // multiplicative, applied once per decision
};

struct AgentConfig {
    double gamma = 0.1;  // discount factor, (0, 1]
    int batch_size = 10;
    int start_size = 10;  // training begins once memory size exceeds this
    std::size_t memory_capacity = 100000;
    int target_sync_period = 100;  // training steps between target refreshes
    EpsilonSchedule epsilon;
    bool greedy = false;  // disable exploration entirely
    int hidden_layers = 1;
    int hidden_width = 150;
    Activation activation = Activation::Relu;
    double step_norm = 1.0;
    TrainingConfig training;
};

// Index of the largest value among mask-valid entries; ties go to the
// lowest index. The no-op entry keeps the valid set nonempty.
int masked_argmax(const std::vector<double>& values, const ActionMask& mask);

// Bootstrap target: reward + gamma * max over mask-valid next Q-values.
double q_target(int reward, const std::vector<double>& next_q, const ActionMask& next_mask,
                double gamma);

// Deep Q-learning admission agent. decide() runs one iteration of the
// learning loop: fold in the previous outcome, store the experience, train,
// then pick and apply the next action.
class DqnAgent {
public:
    DqnAgent(int devices, const AgentConfig& cfg, std::uint64_t seed);

    // Blocked vector for the next service execution.
    std::vector<bool> decide(bool prev_disrupted);

    // Epsilon-greedy masked selection on the evaluation network.
    int select_action(const EnvironmentState& state);

    // One training step, or nothing while the memory is still warming up.
    std::optional<double> train_step();

    // Replaces both networks with `net` (e.g. from a checkpoint).
    void load_weights(const MlpNetwork& net);

    int device_count() const { return devices_; }
    const AgentConfig& config() const { return cfg_; }
    MlpNetwork& evaluation_net() { return eval_; }
    const MlpNetwork& evaluation_net() const { return eval_; }
    const MlpNetwork& target_net() const { return target_; }
    ReplayMemory& memory() { return memory_; }
    const EnvironmentState& env() const { return env_; }
    const EnvironmentState& next_env() const { return next_env_; }
    double epsilon() const { return epsilon_; }
    std::uint64_t decisions() const { return decisions_; }
    std::uint64_t training_steps() const { return train_steps_; }
    int last_action() const { return last_action_; }
    int last_reward() const { return last_reward_; }

private:
    int devices_;
    AgentConfig cfg_;
    MlpNetwork eval_;
    MlpNetwork target_;
    ReplayMemory memory_;
    Rng action_rng_;
    EnvironmentState env_;
    EnvironmentState next_env_;
    int last_action_ = -1;
    int last_reward_ = 0;
    double epsilon_;
    std::uint64_t decisions_ = 0;
    std::uint64_t train_steps_ = 0;
};

// AdmissionPolicy adapter around DqnAgent.
class DqnPolicy : public AdmissionPolicy {
public:
    DqnPolicy(int devices, const AgentConfig& cfg, std::uint64_t seed)
        : agent_(devices, cfg, seed) {}

    std::vector<bool> decide(bool prev_disrupted) override { return agent_.decide(prev_disrupted); }
    void update(const ExecutionOutcome&) override {}  // outcome arrives via decide()
    std::string_view name() const override { return "drl"; }

    DqnAgent& agent() { return agent_; }
    const DqnAgent& agent() const { return agent_; }

private:
    DqnAgent agent_;
};

}  // namespace edgeq
