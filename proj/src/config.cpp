#include "edgeq/config.hpp"

#include <fstream>

namespace edgeq {

using nlohmann::json;

std::string_view disruption_rule_name(DisruptionRule rule) {
    return rule == DisruptionRule::AvailableFraction ? "available-fraction" : "literal";
}

DisruptionRule disruption_rule_from_name(std::string_view name) {
    if (name == "available-fraction") return DisruptionRule::AvailableFraction;
    if (name == "literal") return DisruptionRule::Literal;
    throw ConfigError("unknown disruption_rule '" + std::string(name) +
                      "' (expected available-fraction or literal)");
}

std::string_view volatility_model_name(VolatilityModel model) {
    return model == VolatilityModel::FixedProfile ? "fixed-profile" : "fresh-uniform";
}

VolatilityModel volatility_model_from_name(std::string_view name) {
    if (name == "fixed-profile") return VolatilityModel::FixedProfile;
    if (name == "fresh-uniform") return VolatilityModel::FreshUniform;
    throw ConfigError("unknown volatility_model '" + std::string(name) +
                      "' (expected fixed-profile or fresh-uniform)");
}

namespace {

[[noreturn]] void type_error(const std::string& path, const char* expected) {
    throw ConfigError("config key " + path + " must be " + expected);
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) type_error(path, "a number");
    return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) type_error(path, "an integer");
    return v.get<std::int64_t>();
}

std::uint64_t as_uint(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
        type_error(path, "a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) type_error(path, "a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) type_error(path, "a string");
    return v.get<std::string>();
}

void apply_experiment(const json& section, ExperimentSpec& spec) {
    for (const auto& [key, value] : section.items()) {
        const std::string path = "experiment." + key;
        if (key == "cluster_sizes") {
            if (!value.is_array()) type_error(path, "an array of integers");
            spec.cluster_sizes.clear();
            for (const auto& v : value) spec.cluster_sizes.push_back(static_cast<int>(as_int(v, path)));
        } else if (key == "acceptance_ratios") {
            if (!value.is_array()) type_error(path, "an array of numbers");
            spec.acceptance_ratios.clear();
            for (const auto& v : value) spec.acceptance_ratios.push_back(as_double(v, path));
        } else if (key == "executions") {
            spec.executions = as_uint(value, path);
        } else if (key == "policies") {
            if (!value.is_array()) type_error(path, "an array of policy names");
            spec.policies.clear();
            for (const auto& v : value) spec.policies.push_back(policy_kind_from_name(as_string(v, path)));
        } else if (key == "seed") {
            spec.seeds = {as_uint(value, path)};
        } else if (key == "seeds") {
            if (!value.is_array()) type_error(path, "an array of seeds");
            spec.seeds.clear();
            for (const auto& v : value) spec.seeds.push_back(as_uint(v, path));
        } else if (key == "window") {
            spec.window = static_cast<int>(as_int(value, path));
        } else if (key == "max_series_points") {
            spec.max_series_points = static_cast<std::size_t>(as_uint(value, path));
        } else if (key == "parallel_runs") {
            spec.parallel_runs = static_cast<int>(as_int(value, path));
        } else if (key == "latency_warmup") {
            spec.latency_warmup = static_cast<int>(as_int(value, path));
        } else if (key == "export_latencies") {
            spec.export_latencies = as_bool(value, path);
        } else {
            throw ConfigError("unknown config key: " + path);
        }
    }
}

void apply_agent(const json& section, ExperimentSpec& spec) {
    for (const auto& [key, value] : section.items()) {
        const std::string path = "agent." + key;
        if (key == "gamma") {
            spec.agent.gamma = as_double(value, path);
        } else if (key == "batch_size") {
            spec.agent.batch_size = static_cast<int>(as_int(value, path));
        } else if (key == "start_size") {
            spec.agent.start_size = static_cast<int>(as_int(value, path));
        } else if (key == "memory_capacity") {
            spec.agent.memory_capacity = static_cast<std::size_t>(as_uint(value, path));
        } else if (key == "target_sync_period") {
            spec.agent.target_sync_period = static_cast<int>(as_int(value, path));
        } else if (key == "epsilon_start") {
            spec.agent.epsilon.start = as_double(value, path);
        } else if (key == "epsilon_min") {
            spec.agent.epsilon.min = as_double(value, path);
        } else if (key == "epsilon_decay") {
            spec.agent.epsilon.decay = as_double(value, path);
        } else if (key == "greedy") {
            spec.agent.greedy = as_bool(value, path);
        } else if (key == "hidden_layers") {
            spec.agent.hidden_layers = static_cast<int>(as_int(value, path));
        } else if (key == "hidden_width") {
            spec.agent.hidden_width = static_cast<int>(as_int(value, path));
        } else if (key == "activation") {
            spec.agent.activation = activation_from_name(as_string(value, path));
        } else {
            throw ConfigError("unknown config key: " + path);
        }
    }
}

void apply_training(const json& section, ExperimentSpec& spec) {
    for (const auto& [key, value] : section.items()) {
        const std::string path = "training." + key;
        if (key == "learning_rate") {
            spec.agent.training.learning_rate = as_double(value, path);
        } else {
            throw ConfigError("unknown config key: " + path);
        }
    }
}

void apply_tel(const json& section, ExperimentSpec& spec) {
    for (const auto& [key, value] : section.items()) {
        const std::string path = "tel." + key;
        if (key == "laplace_smoothing") {
            spec.tel.laplace_smoothing = as_bool(value, path);
        } else {
            throw ConfigError("unknown config key: " + path);
        }
    }
}

void apply_sim(const json& section, ExperimentSpec& spec) {
    for (const auto& [key, value] : section.items()) {
        const std::string path = "sim." + key;
        if (key == "disruption_rule") {
            spec.sim.disruption_rule = disruption_rule_from_name(as_string(value, path));
        } else if (key == "volatility_model") {
            spec.sim.volatility_model = volatility_model_from_name(as_string(value, path));
        } else if (key == "step_norm") {
            spec.agent.step_norm = as_double(value, path);
        } else {
            throw ConfigError("unknown config key: " + path);
        }
    }
}

}  // namespace

void apply_config_json(const json& doc, ExperimentSpec& spec) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (!value.is_object()) {
            throw ConfigError("config section " + key + " must be an object");
        }
        if (key == "experiment") {
            apply_experiment(value, spec);
        } else if (key == "agent") {
            apply_agent(value, spec);
        } else if (key == "training") {
            apply_training(value, spec);
        } else if (key == "tel") {
            apply_tel(value, spec);
        } else if (key == "sim") {
            apply_sim(value, spec);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
}

void load_config_file(const std::filesystem::path& path, ExperimentSpec& spec) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    apply_config_json(doc, spec);
}

nlohmann::ordered_json effective_config(const ExperimentSpec& spec) {
    nlohmann::ordered_json doc;
    auto& experiment = doc["experiment"];
    experiment["cluster_sizes"] = spec.cluster_sizes;
    experiment["acceptance_ratios"] = spec.acceptance_ratios;
    experiment["executions"] = spec.executions;
    {
        std::vector<std::string> names;
        for (PolicyKind kind : spec.policies) names.emplace_back(policy_kind_name(kind));
        experiment["policies"] = names;
    }
    experiment["seeds"] = spec.seeds;
    experiment["window"] = spec.window;
    experiment["max_series_points"] = spec.max_series_points;
    experiment["parallel_runs"] = spec.parallel_runs;
    experiment["latency_warmup"] = spec.latency_warmup;
    experiment["export_latencies"] = spec.export_latencies;

    auto& agent = doc["agent"];
    agent["gamma"] = spec.agent.gamma;
    agent["batch_size"] = spec.agent.batch_size;
    agent["start_size"] = spec.agent.start_size;
    agent["memory_capacity"] = spec.agent.memory_capacity;
    agent["target_sync_period"] = spec.agent.target_sync_period;
    agent["epsilon_start"] = spec.agent.epsilon.start;
    agent["epsilon_min"] = spec.agent.epsilon.min;
    agent["epsilon_decay"] = spec.agent.epsilon.decay;
    agent["greedy"] = spec.agent.greedy;
    agent["hidden_layers"] = spec.agent.hidden_layers;
    agent["hidden_width"] = spec.agent.hidden_width;
    agent["activation"] = std::string(activation_name(spec.agent.activation));

    doc["training"]["learning_rate"] = spec.agent.training.learning_rate;
    doc["tel"]["laplace_smoothing"] = spec.tel.laplace_smoothing;

    auto& sim = doc["sim"];
    sim["disruption_rule"] = std::string(disruption_rule_name(spec.sim.disruption_rule));
    sim["volatility_model"] = std::string(volatility_model_name(spec.sim.volatility_model));
    sim["step_norm"] = spec.agent.step_norm;
    return doc;
}

}  // namespace edgeq
