#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "edgeq/dqn.hpp"
#include "edgeq/sim.hpp"

namespace edgeq {

enum class PolicyKind { Drl, Tel, Rnd };

std::string_view policy_kind_name(PolicyKind kind);
PolicyKind policy_kind_from_name(std::string_view name);  // throws ConfigError

struct TelConfig {
    bool laplace_smoothing = false;
};

// Agent defaults for long experiment runs: identical to AgentConfig except
// that the step input is scaled down to keep network inputs bounded.
AgentConfig harness_agent_defaults();

struct ExperimentSpec {
    std::vector<int> cluster_sizes{5, 10, 15};
    std::vector<double> acceptance_ratios{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::uint64_t executions = 100000;
    std::vector<PolicyKind> policies{PolicyKind::Drl, PolicyKind::Tel, PolicyKind::Rnd};
    std::vector<std::uint64_t> seeds{1};
    AgentConfig agent = harness_agent_defaults();
    TelConfig tel;
    SimOptions sim;
    int window = 0;  // running-average window; 0 = cumulative
    std::size_t max_series_points = 5000;
    int parallel_runs = 1;
    int latency_warmup = 10;
    // Wall-clock latencies vary between runs; they are kept out of the
    // exported files by default so identical specs export identical bytes.
    bool export_latencies = false;
    std::vector<double> profile_override;  // fixed fail probabilities (tests)
};

struct SeriesPoint {
    std::uint64_t step = 0;  // 1-based execution count
    double running_avg = 0.0;
};

struct RunSummary {
    PolicyKind policy = PolicyKind::Rnd;
    int devices = 0;
    double acceptance_ratio = 0.0;
    std::uint64_t executions = 0;
    std::uint64_t seed = 0;  // master seed the run was derived from
    double error_ratio = 0.0;
    double latency_mean_us = 0.0;
    double latency_std_us = 0.0;
    bool latency_valid = false;
    std::vector<SeriesPoint> series;
    std::vector<double> profiles;  // device fail probabilities used
    double wall_seconds = 0.0;
    bool failed = false;
    std::string error;
};

// Derived per-run random streams. Profiles and volatility depend only on
// the master seed and the cluster size: every policy and every acceptance
// ratio sees the same physical cluster, so sweep columns are comparable.
std::uint64_t profile_seed(std::uint64_t master, int devices);
std::uint64_t volatility_seed(std::uint64_t master, int devices);
std::uint64_t policy_stream_seed(std::uint64_t master, int devices, double ratio, PolicyKind kind);

RunSummary run_single(const ExperimentSpec& spec, PolicyKind kind, int devices, double ratio,
                      std::uint64_t master_seed);

// One run per (seed x size x ratio x policy). A failing run is recorded as
// failed and does not abort the sweep. Results come back sorted by
// (policy, devices, ratio, seed).
std::vector<RunSummary> run_experiment(const ExperimentSpec& spec);

void validate_spec(const ExperimentSpec& spec);  // throws ConfigError and friends

// Cumulative mean when window <= 0, otherwise the mean of the last
// `window` flags.
std::vector<double> running_average(const std::vector<std::uint8_t>& flags, int window = 0);

struct LatencyStats {
    double mean_us = 0.0;
    double std_us = 0.0;
};

// Mean and sample standard deviation after dropping `warmup` leading
// samples. Throws InsufficientSamplesError when nothing remains.
LatencyStats latency_stats(const std::vector<double>& latencies_us, int warmup = 10);

enum class ExportFormat { Csv, Json };

void write_results_csv(const std::vector<RunSummary>& summaries, std::ostream& out,
                       bool include_latency = false);
void write_results_json(const std::vector<RunSummary>& summaries, std::ostream& out,
                        bool include_latency = false);
std::vector<RunSummary> read_results_json(std::istream& in);
void write_series_csv(const RunSummary& summary, std::ostream& out);

void export_results(const std::vector<RunSummary>& summaries, ExportFormat format,
                    const std::filesystem::path& path, bool include_latency = false);

struct BenchResult {
    PolicyKind policy = PolicyKind::Rnd;
    int devices = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
};

// Decision-latency benchmark: per (size, policy), `warmup` untimed
// executions followed by `reps` timed ones.
std::vector<BenchResult> run_bench(const ExperimentSpec& spec, double ratio, int warmup = 10,
                                   int reps = 100);

std::string format_ratio(double ratio);  // "0.3", "1.0"

}  // namespace edgeq
