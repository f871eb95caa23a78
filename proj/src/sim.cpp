#include "edgeq/sim.hpp"

#include <string>

#include "edgeq/core.hpp"

namespace edgeq {

std::vector<DeviceProfile> draw_profiles(int devices, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<DeviceProfile> profiles(static_cast<std::size_t>(devices));
    for (auto& p : profiles) {
        p.fail_probability = rng.uniform01();
    }
    return profiles;
}

std::vector<bool> draw_volatility(const std::vector<DeviceProfile>& profiles,
                                  const std::vector<bool>& blocked, Rng& rng,
                                  VolatilityModel model) {
    if (profiles.size() != blocked.size()) {
        throw DimensionMismatchError("profile/blocked length mismatch");
    }
    std::vector<bool> volatile_devices(profiles.size(), false);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        // Draw for every device so the stream does not depend on the block
        // pattern; blocked devices just cannot register as volatile.
        const double p = model == VolatilityModel::FixedProfile ? profiles[i].fail_probability
                                                                : rng.uniform01();
        const bool fails = rng.uniform01() < p;
        volatile_devices[i] = fails && !blocked[i];
    }
    return volatile_devices;
}

bool is_disrupted(const std::vector<bool>& blocked, const std::vector<bool>& volatile_devices,
                  double acceptance_ratio, DisruptionRule rule) {
    int used = 0;
    int failed = 0;
    for (std::size_t i = 0; i < blocked.size(); ++i) {
        if (!blocked[i]) {
            ++used;
            if (i < volatile_devices.size() && volatile_devices[i]) ++failed;
        }
    }
    if (used == 0) return true;  // a service with no devices cannot run
    if (rule == DisruptionRule::Literal) {
        return static_cast<double>(failed) / static_cast<double>(used) > acceptance_ratio;
    }
    return static_cast<double>(used - failed) / static_cast<double>(used) < acceptance_ratio;
}

ServiceSimulator::ServiceSimulator(std::vector<DeviceProfile> profiles, double acceptance_ratio,
                                   std::uint64_t volatility_seed, SimOptions options)
    : profiles_(std::move(profiles)),
      acceptance_ratio_(acceptance_ratio),
      options_(options),
      rng_(volatility_seed) {
    if (profiles_.empty()) throw ConfigError("cluster must contain at least one device");
    if (!(acceptance_ratio_ > 0.0 && acceptance_ratio_ <= 1.0)) {
        throw InvalidAcceptanceRatioError("acceptance_ratio must lie in (0, 1], got " +
                                          std::to_string(acceptance_ratio_));
    }
}

ExecutionRecord ServiceSimulator::run_execution(AdmissionPolicy& policy) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<bool> blocked = policy.decide(prev_disrupted_);
    const auto t1 = std::chrono::steady_clock::now();
    if (blocked.size() != profiles_.size()) {
        throw DimensionMismatchError("policy returned a blocked vector of wrong length");
    }

    ExecutionRecord record;
    record.step = step_;
    record.decision_latency = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0);
    record.volatile_devices = draw_volatility(profiles_, blocked, rng_, options_.volatility_model);
    record.disrupted =
        is_disrupted(blocked, record.volatile_devices, acceptance_ratio_, options_.disruption_rule);
    record.reward = compute_reward(blocked, record.disrupted);
    record.blocked = std::move(blocked);

    policy.update(ExecutionOutcome{record.volatile_devices, record.disrupted});
    prev_disrupted_ = record.disrupted;
    ++step_;
    return record;
}

}  // namespace edgeq
