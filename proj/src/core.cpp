#include "edgeq/core.hpp"

#include <string>

namespace edgeq {

EnvironmentState initial_state(int devices, std::uint64_t step) {
    EnvironmentState state;
    state.blocked.assign(static_cast<std::size_t>(devices), false);
    state.failed = false;
    state.step = step;
    return state;
}

std::vector<double> encode_observation(const EnvironmentState& state, double step_norm) {
    const std::size_t n = state.blocked.size();
    std::vector<double> obs(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        obs[i] = state.blocked[i] ? 1.0 : 0.0;
    }
    obs[n] = state.failed ? 1.0 : 0.0;
    obs[n + 1] = static_cast<double>(state.step) / step_norm;
    return obs;
}

ActionMask generate_mask(const EnvironmentState& state) {
    const int n = state.device_count();
    ActionMask mask(static_cast<std::size_t>(action_count(n)), false);
    for (int i = 0; i < n; ++i) {
        mask[static_cast<std::size_t>(allow_action(i))] = state.blocked[static_cast<std::size_t>(i)];
        mask[static_cast<std::size_t>(block_action(i))] = !state.blocked[static_cast<std::size_t>(i)];
    }
    mask[static_cast<std::size_t>(noop_action(n))] = true;
    return mask;
}

EnvironmentState apply_action(const EnvironmentState& state, int action) {
    const int n = state.device_count();
    if (action < 0 || action >= action_count(n)) {
        throw InvalidActionError("action index " + std::to_string(action) + " out of range for " +
                                 std::to_string(n) + " devices");
    }
    const ActionMask mask = generate_mask(state);
    if (!mask[static_cast<std::size_t>(action)]) {
        throw InvalidActionError("action " + std::to_string(action) + " is masked out in the current state");
    }
    EnvironmentState next = state;
    if (action != noop_action(n)) {
        const auto device = static_cast<std::size_t>(action / 2);
        next.blocked[device] = (action % 2 == 1);  // odd index = block, even = allow
    }
    next.failed = false;
    next.step = state.step + 1;
    return next;
}

int compute_reward(const std::vector<bool>& blocked, bool disrupted) {
    int total = 0;
    for (bool b : blocked) {
        if (b) {
            total += disrupted ? kBlockedDisruptedPoints : kBlockedCleanPoints;
        } else {
            total += disrupted ? kAllowedDisruptedPoints : kAllowedCleanPoints;
        }
    }
    return total;
}

}  // namespace edgeq
