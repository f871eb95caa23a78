#pragma once

#include <chrono>
#include <cstdint>
#include <string_view>
#include <vector>

#include "edgeq/errors.hpp"
#include "edgeq/rng.hpp"

namespace edgeq {

// Feedback pushed to a policy after each service execution.
struct ExecutionOutcome {
    std::vector<bool> volatile_devices;  // allowed devices that failed, one flag per device
    bool disrupted = false;
};

// Decision interface shared by the learning agent and the baselines. One
// instance drives one cluster; calls are externally serialized.
class AdmissionPolicy {
public:
    virtual ~AdmissionPolicy() = default;

    // Blocked vector for the next service execution. `prev_disrupted` is the
    // outcome of the previous execution (false on the first call).
    virtual std::vector<bool> decide(bool prev_disrupted) = 0;

    // Telemetry from the execution that just ran.
    virtual void update(const ExecutionOutcome& outcome) = 0;

    virtual std::string_view name() const = 0;
};

// Number of devices to block for a cluster of `devices` at acceptance ratio
// `a`: floor(N - N*a). Throws InvalidAcceptanceRatioError unless a in (0, 1].
int block_count(int devices, double acceptance_ratio);

struct DeviceAvailability {
    std::uint64_t executions_observed = 0;
    std::uint64_t failures_observed = 0;
    double availability = 1.0;
};

// Empirical availability per device. Everything starts optimistic (1.0,
// zero counters); estimates recompute only after disrupted executions.
struct AvailabilityTable {
    explicit AvailabilityTable(int devices, bool laplace_smoothing = false);

    int device_count() const { return static_cast<int>(devices.size()); }

    std::vector<DeviceAvailability> devices;
    bool laplace_smoothing = false;
};

// Increments every device's execution counter; when `disrupted`, also counts
// the volatile devices as failures and recomputes availabilities.
void tel_update(AvailabilityTable& table, const std::vector<bool>& volatile_devices, bool disrupted);

struct PolicyDecision {
    std::vector<bool> blocked;
    std::chrono::nanoseconds latency{0};
};

// Blocks the `block_target` devices with lowest availability; ties broken
// uniformly at random with `rng`.
PolicyDecision tel_decide(const AvailabilityTable& table, int block_target, Rng& rng);

// Blocks a uniformly random subset of `block_target` devices.
PolicyDecision rnd_decide(int devices, int block_target, Rng& rng);

// Telemetry heuristic: block the least-available devices.
class TelPolicy : public AdmissionPolicy {
public:
    TelPolicy(int devices, double acceptance_ratio, std::uint64_t seed, bool laplace_smoothing = false);

    std::vector<bool> decide(bool prev_disrupted) override;
    void update(const ExecutionOutcome& outcome) override;
    std::string_view name() const override { return "tel"; }

    const AvailabilityTable& table() const { return table_; }
    int block_target() const { return block_target_; }

private:
    AvailabilityTable table_;
    int block_target_;
    Rng rng_;
};

// Random baseline: block a fresh uniform subset each execution.
class RndPolicy : public AdmissionPolicy {
public:
    RndPolicy(int devices, double acceptance_ratio, std::uint64_t seed);

    std::vector<bool> decide(bool prev_disrupted) override;
    void update(const ExecutionOutcome& outcome) override {}
    std::string_view name() const override { return "rnd"; }

    int block_target() const { return block_target_; }

private:
    int devices_;
    int block_target_;
    Rng rng_;
};

}  // namespace edgeq
