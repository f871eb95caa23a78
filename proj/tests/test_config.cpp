#include <doctest.h>

#include <string>

#include <nlohmann/json.hpp>

#include "edgeq/config.hpp"

using namespace edgeq;
using nlohmann::json;

TEST_CASE("config sections map onto the spec") {
    ExperimentSpec spec;
    const json doc = json::parse(R"({
        "experiment": {
            "cluster_sizes": [5],
            "acceptance_ratios": [0.7, 1.0],
            "executions": 1234,
            "policies": ["tel", "rnd"],
            "seed": 99,
            "window": 500
        },
        "agent": {
            "gamma": 0.2,
            "batch_size": 16,
            "epsilon_start": 0.5,
            "activation": "tanh"
        },
        "training": {"learning_rate": 0.01},
        "tel": {"laplace_smoothing": true},
        "sim": {"disruption_rule": "literal", "step_norm": 250.0}
    })");
    apply_config_json(doc, spec);
    CHECK(spec.cluster_sizes == std::vector<int>{5});
    CHECK(spec.acceptance_ratios == std::vector<double>{0.7, 1.0});
    CHECK(spec.executions == 1234);
    CHECK(spec.policies == std::vector<PolicyKind>{PolicyKind::Tel, PolicyKind::Rnd});
    CHECK(spec.seeds == std::vector<std::uint64_t>{99});
    CHECK(spec.window == 500);
    CHECK(spec.agent.gamma == 0.2);
    CHECK(spec.agent.batch_size == 16);
    CHECK(spec.agent.epsilon.start == 0.5);
    CHECK(spec.agent.activation == Activation::Tanh);
    CHECK(spec.agent.training.learning_rate == 0.01);
    CHECK(spec.tel.laplace_smoothing);
    CHECK(spec.sim.disruption_rule == DisruptionRule::Literal);
    CHECK(spec.agent.step_norm == 250.0);
}

TEST_CASE("unknown keys are rejected with their full path") {
    ExperimentSpec spec;
    try {
        apply_config_json(json::parse(R"({"agent": {"gama": 0.1}})"), spec);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("agent.gama") != std::string::npos);
    }
    try {
        apply_config_json(json::parse(R"({"experiments": {}})"), spec);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("experiments") != std::string::npos);
    }
}

TEST_CASE("type errors name the offending key") {
    ExperimentSpec spec;
    try {
        apply_config_json(json::parse(R"({"experiment": {"executions": "many"}})"), spec);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("experiment.executions") != std::string::npos);
    }
}

TEST_CASE("bad enum values are rejected") {
    ExperimentSpec spec;
    CHECK_THROWS_AS(apply_config_json(json::parse(R"({"sim": {"disruption_rule": "strict"}})"), spec),
                    ConfigError);
    CHECK_THROWS_AS(
        apply_config_json(json::parse(R"({"experiment": {"policies": ["dqn"]}})"), spec),
        ConfigError);
    CHECK_THROWS_AS(apply_config_json(json::parse(R"({"agent": {"activation": "sigmoid"}})"), spec),
                    ConfigError);
}

TEST_CASE("effective config echoes every accepted key and re-applies cleanly") {
    ExperimentSpec spec;
    spec.agent.gamma = 0.3;
    spec.agent.step_norm = 123.0;
    spec.tel.laplace_smoothing = true;
    spec.sim.volatility_model = VolatilityModel::FreshUniform;
    const auto echo = effective_config(spec);

    ExperimentSpec round;
    apply_config_json(echo, round);
    CHECK(round.agent.gamma == 0.3);
    CHECK(round.agent.step_norm == 123.0);
    CHECK(round.tel.laplace_smoothing);
    CHECK(round.sim.volatility_model == VolatilityModel::FreshUniform);
    CHECK(round.cluster_sizes == spec.cluster_sizes);
    CHECK(round.acceptance_ratios == spec.acceptance_ratios);
    CHECK(effective_config(round) == echo);
}

TEST_CASE("enum names round-trip") {
    CHECK(disruption_rule_from_name(disruption_rule_name(DisruptionRule::Literal)) ==
          DisruptionRule::Literal);
    CHECK(volatility_model_from_name(volatility_model_name(VolatilityModel::FreshUniform)) ==
          VolatilityModel::FreshUniform);
    CHECK(policy_kind_from_name("drl") == PolicyKind::Drl);
    CHECK_THROWS_AS(policy_kind_from_name("bogus"), ConfigError);
}
