#pragma once

#include <cstdint>
#include <vector>

#include "edgeq/errors.hpp"

namespace edgeq {

// State of one edge cluster as seen by an admission policy: which devices
// are blocked for allocation, whether the previous service execution was
// disrupted, and the execution counter.
struct EnvironmentState {
    std::vector<bool> blocked;  // true = device blocked for allocation
    bool failed = false;        // previous execution was disrupted
    std::uint64_t step = 0;

    int device_count() const { return static_cast<int>(blocked.size()); }

    bool operator==(const EnvironmentState&) const = default;
};

EnvironmentState initial_state(int devices, std::uint64_t step = 0);

// Validity vector over the 2N+1 discrete actions. Layout: index 2i = allow
// device i, index 2i+1 = block device i, index 2N = no-op.
using ActionMask = std::vector<bool>;

constexpr int allow_action(int device) { return 2 * device; }
constexpr int block_action(int device) { return 2 * device + 1; }
constexpr int noop_action(int devices) { return 2 * devices; }
constexpr int action_count(int devices) { return 2 * devices + 1; }

// Per-device points when the service completes cleanly / is disrupted.
constexpr int kAllowedCleanPoints = 10;
constexpr int kAllowedDisruptedPoints = -10;
constexpr int kBlockedCleanPoints = 0;
constexpr int kBlockedDisruptedPoints = -10;

// Observation vector of length N+2: the per-device block flags, the failure
// flag, and the step counter divided by `step_norm`.
std::vector<double> encode_observation(const EnvironmentState& state, double step_norm = 1.0);

// Mask for `state`: a device can be allowed only if currently blocked and
// blocked only if currently allowed; the no-op entry is always valid.
ActionMask generate_mask(const EnvironmentState& state);

// Transition to the next state. Throws InvalidActionError when the mask for
// `state` forbids `action`. The failure flag is cleared; the simulator sets
// it from the next execution's outcome.
EnvironmentState apply_action(const EnvironmentState& state, int action);

// Sum of per-device points for an execution outcome.
int compute_reward(const std::vector<bool>& blocked, bool disrupted);

}  // namespace edgeq
