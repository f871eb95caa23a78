#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "edgeq/policies.hpp"

using namespace edgeq;

namespace {

int count_blocked(const std::vector<bool>& blocked) {
    int n = 0;
    for (bool b : blocked) n += b ? 1 : 0;
    return n;
}

AvailabilityTable table_with(const std::vector<double>& availabilities) {
    AvailabilityTable table(static_cast<int>(availabilities.size()));
    for (std::size_t i = 0; i < availabilities.size(); ++i) {
        table.devices[i].availability = availabilities[i];
    }
    return table;
}

}  // namespace

TEST_CASE("block_count floors N - N*a") {
    CHECK(block_count(5, 1.0) == 0);
    CHECK(block_count(5, 0.5) == 2);
    CHECK(block_count(10, 0.3) == 7);  // 10*0.3 rounds awkwardly in binary
    CHECK(block_count(10, 0.7) == 3);
    CHECK(block_count(5, 0.9) == 0);
    CHECK(block_count(15, 0.3) == 10);
    CHECK(block_count(1, 0.5) == 0);
    CHECK_THROWS_AS(block_count(5, 0.0), InvalidAcceptanceRatioError);
    CHECK_THROWS_AS(block_count(5, 1.5), InvalidAcceptanceRatioError);
    CHECK_THROWS_AS(block_count(5, -0.1), InvalidAcceptanceRatioError);
}

TEST_CASE("tel_decide blocks the least available devices") {
    Rng rng(1);
    const auto decision = tel_decide(table_with({0.2, 0.9, 0.8, 1.0, 1.0}), 2, rng);
    CHECK(decision.blocked == std::vector<bool>{true, false, true, false, false});
}

TEST_CASE("tel_decide with nothing to block") {
    Rng rng(1);
    CHECK(count_blocked(tel_decide(table_with({0.5, 0.5, 0.5}), 0, rng).blocked) == 0);
}

TEST_CASE("tel_decide ties replay the seeded keys") {
    const std::uint64_t seed = 404;
    Rng rng(seed);
    const auto decision = tel_decide(table_with({1.0, 1.0, 1.0, 1.0, 1.0}), 2, rng);

    Rng replay(seed);
    std::vector<double> keys(5);
    for (auto& k : keys) k = replay.uniform01();
    std::vector<int> order{0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
    });
    std::vector<bool> expected(5, false);
    expected[static_cast<std::size_t>(order[0])] = true;
    expected[static_cast<std::size_t>(order[1])] = true;
    CHECK(decision.blocked == expected);
}

TEST_CASE("tel_decide always blocks exactly the target") {
    Rng rng(12);
    Rng shape(13);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(shape.below(10));
        const int b = static_cast<int>(shape.below(static_cast<std::uint64_t>(n)));
        std::vector<double> avail(static_cast<std::size_t>(n));
        for (auto& a : avail) a = shape.uniform01();
        CHECK(count_blocked(tel_decide(table_with(avail), b, rng).blocked) == b);
    }
}

TEST_CASE("tel_decide depends only on the availability ordering") {
    const std::vector<double> base{0.25, 0.5, 0.5, 1.0, 0.125};
    std::vector<double> scaled = base;
    for (auto& a : scaled) a *= 0.5;  // exact in binary floating point
    Rng rng_a(7);
    Rng rng_b(7);
    for (int round = 0; round < 50; ++round) {
        CHECK(tel_decide(table_with(base), 2, rng_a).blocked ==
              tel_decide(table_with(scaled), 2, rng_b).blocked);
    }
}

TEST_CASE("tel_update only reacts to disrupted executions") {
    AvailabilityTable table(3);
    tel_update(table, {false, true, false}, false);
    CHECK(table.devices[0].executions_observed == 1);
    CHECK(table.devices[1].failures_observed == 0);
    for (const auto& d : table.devices) CHECK(d.availability == 1.0);

    tel_update(table, {false, true, false}, true);
    CHECK(table.devices[1].failures_observed == 1);
    CHECK(table.devices[1].availability < table.devices[0].availability);
    CHECK(table.devices[1].availability < table.devices[2].availability);
}

TEST_CASE("a device that fails in every disruption becomes the minimum and stays blocked") {
    AvailabilityTable table(4);
    Rng rng(3);
    for (int round = 0; round < 6; ++round) {
        tel_update(table, {false, false, true, false}, true);
    }
    const double min_avail =
        std::min_element(table.devices.begin(), table.devices.end(), [](const auto& a, const auto& b) {
            return a.availability < b.availability;
        })->availability;
    CHECK(table.devices[2].availability == min_avail);
    for (int round = 0; round < 20; ++round) {
        const auto decision = tel_decide(table, 1, rng);
        CHECK(decision.blocked == std::vector<bool>{false, false, true, false});
    }
}

TEST_CASE("laplace smoothing softens fresh estimates") {
    AvailabilityTable table(2, true);
    tel_update(table, {true, false}, true);
    // (failures + 1) / (executions + 2) = 2/3 failure mass on device 0
    CHECK(table.devices[0].availability == doctest::Approx(1.0 - 2.0 / 3.0));
    CHECK(table.devices[1].availability == doctest::Approx(1.0 - 1.0 / 3.0));
}

TEST_CASE("rnd_decide draws uniform subsets") {
    Rng rng(5);
    CHECK(count_blocked(rnd_decide(6, 0, rng).blocked) == 0);

    const std::uint64_t seed = 11;
    Rng seeded(seed);
    const auto decision = rnd_decide(4, 3, seeded);
    CHECK(count_blocked(decision.blocked) == 3);

    Rng replay(seed);
    std::vector<int> idx{0, 1, 2, 3};
    std::vector<bool> expected(4, false);
    for (int j = 0; j < 3; ++j) {
        const int pick = j + static_cast<int>(replay.below(static_cast<std::uint64_t>(4 - j)));
        std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick)]);
        expected[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] = true;
    }
    CHECK(decision.blocked == expected);
}

TEST_CASE("rnd policy is deterministic per seed") {
    RndPolicy a(5, 0.5, 123);
    RndPolicy b(5, 0.5, 123);
    for (int i = 0; i < 20; ++i) {
        CHECK(a.decide(false) == b.decide(false));
    }
}

TEST_CASE("policy constructors derive the block target from the ratio") {
    TelPolicy tel(5, 0.5, 1);
    CHECK(tel.block_target() == 2);
    RndPolicy rnd(10, 0.3, 1);
    CHECK(rnd.block_target() == 7);
    CHECK(count_blocked(tel.decide(false)) == 2);
    CHECK(count_blocked(rnd.decide(false)) == 7);
}
