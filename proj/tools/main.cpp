#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgeq/config.hpp"
#include "edgeq/dqn.hpp"
#include "edgeq/harness.hpp"

namespace fs = std::filesystem;
using namespace edgeq;

namespace {

constexpr int kExitRunFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
    std::string config_path;
    std::vector<int> devices;
    std::vector<double> ratios;
    std::vector<std::string> policies;
    std::uint64_t executions = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    bool greedy = false;
    std::string disruption_rule;
    std::string volatility_model;
    int window = -1;
    double step_norm = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    int hidden_width = 0;
    int hidden_layers = 0;
    std::string activation;
    int parallel = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--devices", flags.devices, "cluster size(s)");
    cmd->add_option("--ratio", flags.ratios, "acceptance ratio(s) in (0,1]");
    cmd->add_option("--policy", flags.policies, "policy: drl, tel or rnd (repeatable)");
    cmd->add_option("--executions", flags.executions, "service executions per run");
    cmd->add_option("--seed", flags.seed, "master seed (random if omitted)");
    cmd->add_option("--seeds", flags.seeds, "multiple master seeds, one run set each");
    cmd->add_flag("--greedy", flags.greedy, "disable exploration (pure argmax selection)");
    cmd->add_option("--disruption-rule", flags.disruption_rule,
                    "available-fraction (default) or literal");
    cmd->add_option("--volatility-model", flags.volatility_model,
                    "fixed-profile (default) or fresh-uniform");
    cmd->add_option("--window", flags.window, "running-average window (0 = cumulative)");
    cmd->add_option("--step-norm", flags.step_norm, "step normalization constant");
    cmd->add_option("--alpha", flags.alpha, "SGD learning rate");
    cmd->add_option("--gamma", flags.gamma, "discount factor");
    cmd->add_option("--hidden-width", flags.hidden_width, "hidden layer width");
    cmd->add_option("--hidden-layers", flags.hidden_layers, "number of hidden layers");
    cmd->add_option("--activation", flags.activation, "relu or tanh");
    cmd->add_option("--parallel", flags.parallel, "number of runs executed concurrently");
}

// Build the effective spec: defaults, then config file, then flags.
ExperimentSpec build_spec(const CLI::App* cmd, const CommonFlags& flags, bool& seed_given) {
    ExperimentSpec spec;
    if (!flags.config_path.empty()) {
        load_config_file(flags.config_path, spec);
    }
    seed_given = false;
    if (cmd->count("--config")) {
        // Config may carry seed/seeds; treat that as explicitly chosen.
        seed_given = true;
    }
    if (cmd->count("--devices")) spec.cluster_sizes = flags.devices;
    if (cmd->count("--ratio")) spec.acceptance_ratios = flags.ratios;
    if (cmd->count("--policy")) {
        spec.policies.clear();
        for (const auto& name : flags.policies) spec.policies.push_back(policy_kind_from_name(name));
    }
    if (cmd->count("--executions")) spec.executions = flags.executions;
    if (cmd->count("--seed")) {
        spec.seeds = {flags.seed};
        seed_given = true;
    }
    if (cmd->count("--seeds")) {
        spec.seeds = flags.seeds;
        seed_given = true;
    }
    if (cmd->count("--greedy")) spec.agent.greedy = true;
    if (cmd->count("--disruption-rule")) {
        spec.sim.disruption_rule = disruption_rule_from_name(flags.disruption_rule);
    }
    if (cmd->count("--volatility-model")) {
        spec.sim.volatility_model = volatility_model_from_name(flags.volatility_model);
    }
    if (cmd->count("--window")) spec.window = flags.window;
    if (cmd->count("--step-norm")) spec.agent.step_norm = flags.step_norm;
    if (cmd->count("--alpha")) spec.agent.training.learning_rate = flags.alpha;
    if (cmd->count("--gamma")) spec.agent.gamma = flags.gamma;
    if (cmd->count("--hidden-width")) spec.agent.hidden_width = flags.hidden_width;
    if (cmd->count("--hidden-layers")) spec.agent.hidden_layers = flags.hidden_layers;
    if (cmd->count("--activation")) spec.agent.activation = activation_from_name(flags.activation);
    if (cmd->count("--parallel")) spec.parallel_runs = flags.parallel;
    return spec;
}

std::uint64_t random_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path make_run_dir(const fs::path& out_dir, std::uint64_t first_seed) {
    const std::string base = "run-" + timestamp_now() + "-seed" + std::to_string(first_seed);
    fs::path dir = out_dir / base;
    for (int suffix = 2; fs::exists(dir); ++suffix) {
        dir = out_dir / (base + "-" + std::to_string(suffix));
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::string series_file_name(const RunSummary& s) {
    return "series_" + std::string(policy_kind_name(s.policy)) + "_n" + std::to_string(s.devices) +
           "_r" + format_ratio(s.acceptance_ratio) + "_s" + std::to_string(s.seed) + ".csv";
}

int cmd_run(const CLI::App* cmd, const CommonFlags& flags, const std::string& out_dir) {
    bool seed_given = false;
    ExperimentSpec spec = build_spec(cmd, flags, seed_given);
    if (!seed_given) {
        spec.seeds = {random_seed()};
        std::cout << "seed not given, using " << spec.seeds.front() << "\n";
    }
    validate_spec(spec);

    const fs::path dir = make_run_dir(out_dir, spec.seeds.front());
    {
        std::ofstream cfg(dir / "config.json");
        if (!cfg) throw IoError("cannot write " + (dir / "config.json").string());
        cfg << effective_config(spec).dump(2) << '\n';
    }

    const std::vector<RunSummary> summaries = run_experiment(spec);

    export_results(summaries, ExportFormat::Csv, dir / "results.csv", spec.export_latencies);
    export_results(summaries, ExportFormat::Json, dir / "results.json", spec.export_latencies);
    for (const RunSummary& s : summaries) {
        if (s.failed) continue;
        std::ofstream out(dir / series_file_name(s));
        if (!out) throw IoError("cannot write series file in " + dir.string());
        write_series_csv(s, out);
    }

    bool any_failed = false;
    for (const RunSummary& s : summaries) {
        if (s.failed) {
            any_failed = true;
            std::cout << "policy=" << policy_kind_name(s.policy) << " devices=" << s.devices
                      << " ratio=" << format_ratio(s.acceptance_ratio) << " seed=" << s.seed
                      << " FAILED: " << s.error << "\n";
            continue;
        }
        char line[256];
        std::snprintf(line, sizeof(line),
                      "policy=%s devices=%d ratio=%s executions=%llu seed=%llu error_ratio=%.6f "
                      "latency_mean_us=%.3f wall_s=%.2f",
                      std::string(policy_kind_name(s.policy)).c_str(), s.devices,
                      format_ratio(s.acceptance_ratio).c_str(),
                      static_cast<unsigned long long>(s.executions),
                      static_cast<unsigned long long>(s.seed), s.error_ratio, s.latency_mean_us,
                      s.wall_seconds);
        std::cout << line << "\n";
    }
    std::cout << "wrote " << dir.string() << "\n";
    return any_failed ? kExitRunFailed : 0;
}

int cmd_bench(const CLI::App* cmd, const CommonFlags& flags, double bench_ratio, int warmup,
              int reps) {
    bool seed_given = false;
    ExperimentSpec spec = build_spec(cmd, flags, seed_given);
    if (!seed_given) {
        spec.seeds = {random_seed()};
        std::cout << "seed not given, using " << spec.seeds.front() << "\n";
    }
    spec.acceptance_ratios = {bench_ratio};
    validate_spec(spec);

    const auto results = run_bench(spec, bench_ratio, warmup, reps);
    for (const BenchResult& r : results) {
        char line[160];
        std::snprintf(line, sizeof(line), "policy=%s devices=%d latency_ms=%.3f std_ms=%.3f",
                      std::string(policy_kind_name(r.policy)).c_str(), r.devices, r.mean_ms,
                      r.std_ms);
        std::cout << line << "\n";
    }
    return 0;
}

struct CheckpointCell {
    int devices = 5;
    double ratio = 0.8;
    std::uint64_t executions = 10000;
    std::uint64_t seed = 1;
};

// Runs one DRL cell and returns the trained policy.
std::unique_ptr<DqnPolicy> run_drl_cell(const ExperimentSpec& spec, const CheckpointCell& cell,
                                        double* error_ratio, const MlpNetwork* initial_weights) {
    const auto profiles =
        draw_profiles(cell.devices, profile_seed(cell.seed, cell.devices));
    ServiceSimulator sim(profiles, cell.ratio,
                         volatility_seed(cell.seed, cell.devices), spec.sim);
    auto policy = std::make_unique<DqnPolicy>(
        cell.devices, spec.agent,
        policy_stream_seed(cell.seed, cell.devices, cell.ratio, PolicyKind::Drl));
    if (initial_weights != nullptr) {
        policy->agent().load_weights(*initial_weights);
    }
    std::uint64_t disrupted = 0;
    for (std::uint64_t i = 0; i < cell.executions; ++i) {
        disrupted += sim.run_execution(*policy).disrupted ? 1 : 0;
    }
    if (error_ratio != nullptr) {
        *error_ratio = static_cast<double>(disrupted) / static_cast<double>(cell.executions);
    }
    return policy;
}

void write_checkpoint_meta(const fs::path& net_path, const ExperimentSpec& spec, int devices) {
    nlohmann::ordered_json meta;
    meta["devices"] = devices;
    meta["activation"] = std::string(activation_name(spec.agent.activation));
    meta["hidden_layers"] = spec.agent.hidden_layers;
    meta["hidden_width"] = spec.agent.hidden_width;
    meta["step_norm"] = spec.agent.step_norm;
    const fs::path meta_path = net_path.string() + ".meta.json";
    std::ofstream out(meta_path);
    if (!out) throw IoError("cannot write " + meta_path.string());
    out << meta.dump(2) << '\n';
}

void read_checkpoint_meta(const fs::path& net_path, ExperimentSpec& spec) {
    const fs::path meta_path = net_path.string() + ".meta.json";
    std::ifstream in(meta_path);
    if (!in) return;  // sidecar is optional; flags/config decide
    nlohmann::json meta;
    try {
        in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad checkpoint metadata " + meta_path.string() + ": " + e.what());
    }
    if (meta.contains("activation")) {
        spec.agent.activation = activation_from_name(meta["activation"].get<std::string>());
    }
    if (meta.contains("hidden_layers")) spec.agent.hidden_layers = meta["hidden_layers"].get<int>();
    if (meta.contains("hidden_width")) spec.agent.hidden_width = meta["hidden_width"].get<int>();
    if (meta.contains("step_norm")) spec.agent.step_norm = meta["step_norm"].get<double>();
}

int cmd_checkpoint_save(const CLI::App* cmd, const CommonFlags& flags, const std::string& out_path) {
    bool seed_given = false;
    ExperimentSpec spec = build_spec(cmd, flags, seed_given);
    CheckpointCell cell;
    if (!spec.cluster_sizes.empty()) cell.devices = spec.cluster_sizes.front();
    if (!spec.acceptance_ratios.empty()) cell.ratio = spec.acceptance_ratios.front();
    cell.executions = cmd->count("--executions") ? spec.executions : 10000;
    cell.seed = seed_given ? spec.seeds.front() : random_seed();
    spec.cluster_sizes = {cell.devices};
    spec.acceptance_ratios = {cell.ratio};
    validate_spec(spec);

    double error_ratio = 0.0;
    const auto policy = run_drl_cell(spec, cell, &error_ratio, nullptr);
    save_checkpoint(policy->agent().evaluation_net(), out_path);
    write_checkpoint_meta(out_path, spec, cell.devices);
    char line[160];
    std::snprintf(line, sizeof(line), "trained devices=%d ratio=%s executions=%llu error_ratio=%.6f",
                  cell.devices, format_ratio(cell.ratio).c_str(),
                  static_cast<unsigned long long>(cell.executions), error_ratio);
    std::cout << line << "\nsaved " << out_path << "\n";
    return 0;
}

int cmd_checkpoint_load(const CLI::App* cmd, const CommonFlags& flags, const std::string& in_path) {
    bool seed_given = false;
    ExperimentSpec spec = build_spec(cmd, flags, seed_given);
    read_checkpoint_meta(in_path, spec);
    const MlpNetwork net = load_checkpoint(in_path, spec.agent.activation);

    CheckpointCell cell;
    cell.devices = (net.input_size() - 2);
    if (cmd->count("--devices") && !spec.cluster_sizes.empty() &&
        spec.cluster_sizes.front() != cell.devices) {
        throw ConfigError("checkpoint was trained for " + std::to_string(cell.devices) +
                          " devices, --devices disagrees");
    }
    if (!spec.acceptance_ratios.empty()) cell.ratio = spec.acceptance_ratios.front();
    cell.executions = cmd->count("--executions") ? spec.executions : 10000;
    cell.seed = seed_given ? spec.seeds.front() : random_seed();
    spec.cluster_sizes = {cell.devices};
    spec.acceptance_ratios = {cell.ratio};
    validate_spec(spec);

    double error_ratio = 0.0;
    run_drl_cell(spec, cell, &error_ratio, &net);
    char line[160];
    std::snprintf(line, sizeof(line),
                  "resumed devices=%d ratio=%s executions=%llu seed=%llu error_ratio=%.6f",
                  cell.devices, format_ratio(cell.ratio).c_str(),
                  static_cast<unsigned long long>(cell.executions),
                  static_cast<unsigned long long>(cell.seed), error_ratio);
    std::cout << line << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-cluster admission policy simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string out_dir = "results";
    CLI::App* run = app.add_subcommand("run", "run experiment sweeps and export results");
    add_common_flags(run, run_flags);
    run->add_option("--out-dir", out_dir, "directory that receives the run directory");

    CommonFlags bench_flags;
    double bench_ratio = 0.5;
    int bench_warmup = 10;
    int bench_reps = 100;
    CLI::App* bench = app.add_subcommand("bench", "measure per-decision latency");
    add_common_flags(bench, bench_flags);
    bench->add_option("--bench-ratio", bench_ratio, "acceptance ratio used for timing");
    bench->add_option("--warmup", bench_warmup, "untimed decisions per policy");
    bench->add_option("--reps", bench_reps, "timed decisions per policy");

    CLI::App* checkpoint = app.add_subcommand("checkpoint", "save or resume agent networks");
    checkpoint->require_subcommand(1);
    CommonFlags save_flags;
    std::string save_path;
    CLI::App* save = checkpoint->add_subcommand("save", "train a DRL agent and save its network");
    add_common_flags(save, save_flags);
    save->add_option("--out", save_path, "checkpoint file to write")->required();
    CommonFlags load_flags;
    std::string load_path;
    CLI::App* load = checkpoint->add_subcommand("load", "resume a run from a saved network");
    add_common_flags(load, load_flags);
    load->add_option("--in", load_path, "checkpoint file to read")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(run, run_flags, out_dir);
        if (bench->parsed()) return cmd_bench(bench, bench_flags, bench_ratio, bench_warmup, bench_reps);
        if (save->parsed()) return cmd_checkpoint_save(save, save_flags, save_path);
        if (load->parsed()) return cmd_checkpoint_load(load, load_flags, load_path);
    } catch (const InvalidAcceptanceRatioError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitIo;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailed;
    }
    return 0;
}
