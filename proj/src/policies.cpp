#include "edgeq/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace edgeq {

int block_count(int devices, double acceptance_ratio) {
    if (!(acceptance_ratio > 0.0 && acceptance_ratio <= 1.0)) {
        throw InvalidAcceptanceRatioError("acceptance_ratio must lie in (0, 1], got " +
                                          std::to_string(acceptance_ratio));
    }
    // Nudge before flooring so decimal ratios hit their exact integer result
    // (10 - 10*0.3 evaluates to 6.999... in binary floating point).
    const double raw = static_cast<double>(devices) - static_cast<double>(devices) * acceptance_ratio;
    int b = static_cast<int>(std::floor(raw + 1e-9));
    if (b < 0) b = 0;
    if (b >= devices) b = devices - 1;
    return b;
}

AvailabilityTable::AvailabilityTable(int device_count, bool smoothing)
    : devices(static_cast<std::size_t>(device_count)), laplace_smoothing(smoothing) {}

namespace {

double estimate_availability(const DeviceAvailability& d, bool smoothing) {
    if (smoothing) {
        return 1.0 - static_cast<double>(d.failures_observed + 1) /
                         static_cast<double>(d.executions_observed + 2);
    }
    return 1.0 - static_cast<double>(d.failures_observed) /
                     static_cast<double>(std::max<std::uint64_t>(1, d.executions_observed));
}

}  // namespace

void tel_update(AvailabilityTable& table, const std::vector<bool>& volatile_devices, bool disrupted) {
    for (auto& d : table.devices) {
        ++d.executions_observed;
    }
    if (!disrupted) return;
    for (std::size_t i = 0; i < table.devices.size() && i < volatile_devices.size(); ++i) {
        if (volatile_devices[i]) {
            ++table.devices[i].failures_observed;
        }
    }
    for (auto& d : table.devices) {
        d.availability = estimate_availability(d, table.laplace_smoothing);
    }
}

PolicyDecision tel_decide(const AvailabilityTable& table, int block_target, Rng& rng) {
    const int n = table.device_count();
    // Fresh random key per device so ties are broken uniformly.
    std::vector<double> tie_key(static_cast<std::size_t>(n));
    for (auto& k : tie_key) k = rng.uniform01();

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double av_a = table.devices[static_cast<std::size_t>(a)].availability;
        const double av_b = table.devices[static_cast<std::size_t>(b)].availability;
        if (av_a != av_b) return av_a < av_b;
        return tie_key[static_cast<std::size_t>(a)] < tie_key[static_cast<std::size_t>(b)];
    });

    PolicyDecision decision;
    decision.blocked.assign(static_cast<std::size_t>(n), false);
    for (int i = 0; i < block_target && i < n; ++i) {
        decision.blocked[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
    }
    return decision;
}

PolicyDecision rnd_decide(int devices, int block_target, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(devices));
    std::iota(idx.begin(), idx.end(), 0);
    PolicyDecision decision;
    decision.blocked.assign(static_cast<std::size_t>(devices), false);
    // Partial Fisher-Yates: the first block_target entries are a uniform subset.
    for (int j = 0; j < block_target && j < devices; ++j) {
        const auto pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(devices - j)));
        std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick)]);
        decision.blocked[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] = true;
    }
    return decision;
}

TelPolicy::TelPolicy(int devices, double acceptance_ratio, std::uint64_t seed, bool laplace_smoothing)
    : table_(devices, laplace_smoothing),
      block_target_(block_count(devices, acceptance_ratio)),
      rng_(seed) {}

std::vector<bool> TelPolicy::decide(bool /*prev_disrupted*/) {
    return tel_decide(table_, block_target_, rng_).blocked;
}

void TelPolicy::update(const ExecutionOutcome& outcome) {
    tel_update(table_, outcome.volatile_devices, outcome.disrupted);
}

RndPolicy::RndPolicy(int devices, double acceptance_ratio, std::uint64_t seed)
    : devices_(devices), block_target_(block_count(devices, acceptance_ratio)), rng_(seed) {}

std::vector<bool> RndPolicy::decide(bool /*prev_disrupted*/) {
    return rnd_decide(devices_, block_target_, rng_).blocked;
}

}  // namespace edgeq
