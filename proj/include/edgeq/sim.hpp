#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "edgeq/policies.hpp"
#include "edgeq/rng.hpp"

namespace edgeq {

// Per-device failure probability, fixed for the whole run.
struct DeviceProfile {
    double fail_probability = 0.0;
};

// One probability per device, drawn from U(0,1) with the given seed.
std::vector<DeviceProfile> draw_profiles(int devices, std::uint64_t seed);

enum class DisruptionRule {
    // Disrupted when the fraction of allowed devices that stayed up falls
    // below the acceptance ratio.
    AvailableFraction,
    // Literal variant for comparison: disrupted when volatile/allowed
    // exceeds the acceptance ratio.
    Literal,
};

enum class VolatilityModel {
    FixedProfile,   // per-device probability drawn once per run
    FreshUniform,   // probability redrawn per device per execution
};

struct SimOptions {
    DisruptionRule disruption_rule = DisruptionRule::AvailableFraction;
    VolatilityModel volatility_model = VolatilityModel::FixedProfile;
};

// Draws this execution's failures. Blocked devices are never volatile.
std::vector<bool> draw_volatility(const std::vector<DeviceProfile>& profiles,
                                  const std::vector<bool>& blocked, Rng& rng,
                                  VolatilityModel model = VolatilityModel::FixedProfile);

// Disruption decision for one execution. With zero allowed devices the
// execution counts as disrupted under either rule.
bool is_disrupted(const std::vector<bool>& blocked, const std::vector<bool>& volatile_devices,
                  double acceptance_ratio, DisruptionRule rule = DisruptionRule::AvailableFraction);

struct ExecutionRecord {
    std::uint64_t step = 0;
    std::vector<bool> blocked;
    std::vector<bool> volatile_devices;
    bool disrupted = false;
    int reward = 0;
    std::chrono::nanoseconds decision_latency{0};
};

// Drives one policy through service executions on a fixed cluster. Strictly
// sequential; independent simulators may run in parallel.
class ServiceSimulator {
public:
    ServiceSimulator(std::vector<DeviceProfile> profiles, double acceptance_ratio,
                     std::uint64_t volatility_seed, SimOptions options = {});

    // One service execution: ask the policy for a blocked vector (timing the
    // call), draw volatility, evaluate disruption, feed the outcome back.
    ExecutionRecord run_execution(AdmissionPolicy& policy);

    int device_count() const { return static_cast<int>(profiles_.size()); }
    double acceptance_ratio() const { return acceptance_ratio_; }
    const std::vector<DeviceProfile>& profiles() const { return profiles_; }
    std::uint64_t executions() const { return step_; }

private:
    std::vector<DeviceProfile> profiles_;
    double acceptance_ratio_;
    SimOptions options_;
    Rng rng_;
    std::uint64_t step_ = 0;
    bool prev_disrupted_ = false;
};

}  // namespace edgeq
