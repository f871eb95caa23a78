#include "edgeq/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

namespace edgeq {

using ordered_json = nlohmann::ordered_json;

std::string_view policy_kind_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Drl: return "drl";
        case PolicyKind::Tel: return "tel";
        case PolicyKind::Rnd: return "rnd";
    }
    return "?";
}

PolicyKind policy_kind_from_name(std::string_view name) {
    if (name == "drl") return PolicyKind::Drl;
    if (name == "tel") return PolicyKind::Tel;
    if (name == "rnd") return PolicyKind::Rnd;
    throw ConfigError("unknown policy '" + std::string(name) + "' (expected drl, tel or rnd)");
}

AgentConfig harness_agent_defaults() {
    AgentConfig cfg;
    cfg.step_norm = 100000.0;
    return cfg;
}

std::string format_ratio(double ratio) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", ratio);
    std::string s(buf);
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

namespace {

std::string cell_tag(std::string_view stream, int devices, double ratio) {
    // The ratio enters the tag in milli-units so 0.3 and 0.30 derive the
    // same stream.
    const long milli = std::lround(ratio * 1000.0);
    return std::string(stream) + "/n" + std::to_string(devices) + "/r" + std::to_string(milli);
}

}  // namespace

std::uint64_t profile_seed(std::uint64_t master, int devices) {
    return derive_seed(master, "profiles/n" + std::to_string(devices));
}

std::uint64_t volatility_seed(std::uint64_t master, int devices) {
    return derive_seed(master, "volatility/n" + std::to_string(devices));
}

std::uint64_t policy_stream_seed(std::uint64_t master, int devices, double ratio, PolicyKind kind) {
    return derive_seed(master,
                       cell_tag("policy", devices, ratio) + "/" + std::string(policy_kind_name(kind)));
}

std::vector<double> running_average(const std::vector<std::uint8_t>& flags, int window) {
    std::vector<double> avg(flags.size(), 0.0);
    if (flags.empty()) return avg;
    if (window <= 0) {
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i < flags.size(); ++i) {
            sum += flags[i];
            avg[i] = static_cast<double>(sum) / static_cast<double>(i + 1);
        }
    } else {
        const std::size_t w = static_cast<std::size_t>(window);
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i < flags.size(); ++i) {
            sum += flags[i];
            if (i >= w) sum -= flags[i - w];
            avg[i] = static_cast<double>(sum) / static_cast<double>(std::min(i + 1, w));
        }
    }
    return avg;
}

LatencyStats latency_stats(const std::vector<double>& latencies_us, int warmup) {
    const std::size_t skip = warmup > 0 ? static_cast<std::size_t>(warmup) : 0;
    if (latencies_us.size() <= skip) {
        throw InsufficientSamplesError("no latency samples left after discarding " +
                                       std::to_string(skip) + " warmup samples");
    }
    const std::size_t n = latencies_us.size() - skip;
    double sum = 0.0;
    for (std::size_t i = skip; i < latencies_us.size(); ++i) sum += latencies_us[i];
    LatencyStats stats;
    stats.mean_us = sum / static_cast<double>(n);
    if (n > 1) {
        double sq = 0.0;
        for (std::size_t i = skip; i < latencies_us.size(); ++i) {
            const double d = latencies_us[i] - stats.mean_us;
            sq += d * d;
        }
        stats.std_us = std::sqrt(sq / static_cast<double>(n - 1));
    }
    return stats;
}

namespace {

std::vector<SeriesPoint> downsample(const std::vector<double>& avg, std::size_t max_points) {
    std::vector<SeriesPoint> series;
    const std::size_t n = avg.size();
    if (n == 0 || max_points == 0) return series;
    const std::size_t stride = (n + max_points - 1) / max_points;
    series.reserve(n / stride + 1);
    for (std::size_t i = stride - 1; i < n; i += stride) {
        series.push_back(SeriesPoint{i + 1, avg[i]});
    }
    // Always report the final value.
    if (!series.empty() && series.back().step != n) {
        series.back() = SeriesPoint{n, avg[n - 1]};
    }
    return series;
}

std::unique_ptr<AdmissionPolicy> make_policy(const ExperimentSpec& spec, PolicyKind kind,
                                             int devices, double ratio, std::uint64_t seed) {
    switch (kind) {
        case PolicyKind::Tel:
            return std::make_unique<TelPolicy>(devices, ratio, seed, spec.tel.laplace_smoothing);
        case PolicyKind::Rnd:
            return std::make_unique<RndPolicy>(devices, ratio, seed);
        case PolicyKind::Drl:
            return std::make_unique<DqnPolicy>(devices, spec.agent, seed);
    }
    throw ConfigError("unknown policy kind");
}

}  // namespace

RunSummary run_single(const ExperimentSpec& spec, PolicyKind kind, int devices, double ratio,
                      std::uint64_t master_seed) {
    RunSummary summary;
    summary.policy = kind;
    summary.devices = devices;
    summary.acceptance_ratio = ratio;
    summary.executions = spec.executions;
    summary.seed = master_seed;

    std::vector<DeviceProfile> profiles;
    if (!spec.profile_override.empty()) {
        if (spec.profile_override.size() != static_cast<std::size_t>(devices)) {
            throw ConfigError("profile_override length does not match the cluster size");
        }
        profiles.resize(static_cast<std::size_t>(devices));
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            profiles[i].fail_probability = spec.profile_override[i];
        }
    } else {
        profiles = draw_profiles(devices, profile_seed(master_seed, devices));
    }
    summary.profiles.reserve(profiles.size());
    for (const auto& p : profiles) summary.profiles.push_back(p.fail_probability);

    ServiceSimulator sim(profiles, ratio, volatility_seed(master_seed, devices), spec.sim);
    const auto policy =
        make_policy(spec, kind, devices, ratio, policy_stream_seed(master_seed, devices, ratio, kind));

    std::vector<std::uint8_t> flags;
    std::vector<double> latencies_us;
    flags.reserve(spec.executions);
    latencies_us.reserve(spec.executions);

    const auto wall0 = std::chrono::steady_clock::now();
    std::uint64_t disrupted_count = 0;
    for (std::uint64_t k = 0; k < spec.executions; ++k) {
        const ExecutionRecord rec = sim.run_execution(*policy);
        flags.push_back(rec.disrupted ? 1 : 0);
        latencies_us.push_back(static_cast<double>(rec.decision_latency.count()) / 1000.0);
        disrupted_count += rec.disrupted ? 1 : 0;
    }
    const auto wall1 = std::chrono::steady_clock::now();
    summary.wall_seconds = std::chrono::duration<double>(wall1 - wall0).count();

    summary.error_ratio = static_cast<double>(disrupted_count) / static_cast<double>(spec.executions);
    summary.series = downsample(running_average(flags, spec.window), spec.max_series_points);
    if (latencies_us.size() > static_cast<std::size_t>(std::max(0, spec.latency_warmup))) {
        const LatencyStats stats = latency_stats(latencies_us, spec.latency_warmup);
        summary.latency_mean_us = stats.mean_us;
        summary.latency_std_us = stats.std_us;
        summary.latency_valid = true;
    }
    return summary;
}

void validate_spec(const ExperimentSpec& spec) {
    if (spec.executions < 1) throw ConfigError("executions must be at least 1");
    if (spec.cluster_sizes.empty()) throw ConfigError("cluster_sizes must not be empty");
    for (int n : spec.cluster_sizes) {
        if (n < 1) throw ConfigError("cluster sizes must be at least 1");
    }
    if (spec.acceptance_ratios.empty()) throw ConfigError("acceptance_ratios must not be empty");
    for (double a : spec.acceptance_ratios) {
        if (!(a > 0.0 && a <= 1.0)) {
            throw InvalidAcceptanceRatioError("acceptance_ratio must lie in (0, 1], got " +
                                              format_ratio(a));
        }
    }
    if (spec.policies.empty()) throw ConfigError("policies must not be empty");
    if (spec.seeds.empty()) throw ConfigError("at least one seed is required");
    if (!(spec.agent.gamma > 0.0 && spec.agent.gamma <= 1.0)) {
        throw ConfigError("gamma must lie in (0, 1]");
    }
    if (!(spec.agent.training.learning_rate > 0.0 && spec.agent.training.learning_rate <= 1.0)) {
        throw ConfigError("learning_rate must lie in (0, 1]");
    }
    if (spec.agent.batch_size < 1) throw ConfigError("batch_size must be positive");
    if (spec.agent.start_size < 0) throw ConfigError("start_size must not be negative");
    if (spec.agent.memory_capacity < 1) throw ConfigError("memory_capacity must be positive");
    if (spec.agent.target_sync_period < 1) throw ConfigError("target_sync_period must be positive");
    if (spec.agent.hidden_layers < 1) throw ConfigError("hidden_layers must be positive");
    if (spec.agent.hidden_width < 1) throw ConfigError("hidden_width must be positive");
    if (spec.agent.step_norm <= 0.0) throw ConfigError("step_norm must be positive");
    if (spec.parallel_runs < 1) throw ConfigError("parallel_runs must be positive");
}

std::vector<RunSummary> run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);

    struct Job {
        std::uint64_t seed;
        int devices;
        double ratio;
        PolicyKind kind;
    };
    std::vector<Job> jobs;
    for (std::uint64_t seed : spec.seeds) {
        for (int devices : spec.cluster_sizes) {
            for (double ratio : spec.acceptance_ratios) {
                for (PolicyKind kind : spec.policies) {
                    jobs.push_back(Job{seed, devices, ratio, kind});
                }
            }
        }
    }

    std::vector<RunSummary> results(jobs.size());
    auto work_one = [&](std::size_t i) {
        const Job& job = jobs[i];
        try {
            results[i] = run_single(spec, job.kind, job.devices, job.ratio, job.seed);
        } catch (const std::exception& e) {
            RunSummary failed;
            failed.policy = job.kind;
            failed.devices = job.devices;
            failed.acceptance_ratio = job.ratio;
            failed.executions = spec.executions;
            failed.seed = job.seed;
            failed.failed = true;
            failed.error = e.what();
            results[i] = std::move(failed);
        }
    };

    const int workers = std::min<int>(spec.parallel_runs, static_cast<int>(jobs.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) work_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
                    work_one(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::sort(results.begin(), results.end(), [](const RunSummary& a, const RunSummary& b) {
        return std::make_tuple(policy_kind_name(a.policy), a.devices, a.acceptance_ratio, a.seed) <
               std::make_tuple(policy_kind_name(b.policy), b.devices, b.acceptance_ratio, b.seed);
    });
    return results;
}

namespace {

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
}

}  // namespace

void write_results_csv(const std::vector<RunSummary>& summaries, std::ostream& out,
                       bool include_latency) {
    out << "policy,devices,acceptance_ratio,executions,seed,error_ratio,latency_mean_us,latency_std_us\n";
    for (const RunSummary& s : summaries) {
        out << policy_kind_name(s.policy) << ',' << s.devices << ',' << format_ratio(s.acceptance_ratio)
            << ',' << s.executions << ',' << s.seed << ',';
        if (s.failed) {
            out << "nan";
        } else {
            out << format_fixed(s.error_ratio, 6);
        }
        out << ',';
        if (include_latency && s.latency_valid && !s.failed) {
            out << format_fixed(s.latency_mean_us, 3) << ',' << format_fixed(s.latency_std_us, 3);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

void write_series_csv(const RunSummary& summary, std::ostream& out) {
    out << "step,running_avg\n";
    for (const SeriesPoint& p : summary.series) {
        out << p.step << ',' << format_fixed(p.running_avg, 6) << '\n';
    }
}

void write_results_json(const std::vector<RunSummary>& summaries, std::ostream& out,
                        bool include_latency) {
    ordered_json arr = ordered_json::array();
    for (const RunSummary& s : summaries) {
        ordered_json row;
        row["policy"] = std::string(policy_kind_name(s.policy));
        row["devices"] = s.devices;
        row["acceptance_ratio"] = s.acceptance_ratio;
        row["executions"] = s.executions;
        row["seed"] = s.seed;
        if (s.failed) {
            row["error_ratio"] = nullptr;
        } else {
            row["error_ratio"] = s.error_ratio;
        }
        if (include_latency && s.latency_valid && !s.failed) {
            row["latency_mean_us"] = s.latency_mean_us;
            row["latency_std_us"] = s.latency_std_us;
        } else {
            row["latency_mean_us"] = nullptr;
            row["latency_std_us"] = nullptr;
        }
        row["failed"] = s.failed;
        if (s.failed) row["error"] = s.error;
        arr.push_back(std::move(row));
    }
    out << arr.dump(2) << '\n';
}

std::vector<RunSummary> read_results_json(std::istream& in) {
    ordered_json arr;
    try {
        in >> arr;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad results JSON: ") + e.what());
    }
    if (!arr.is_array()) throw FormatError("results JSON must be an array");
    std::vector<RunSummary> out;
    out.reserve(arr.size());
    for (const auto& row : arr) {
        RunSummary s;
        s.policy = policy_kind_from_name(row.at("policy").get<std::string>());
        s.devices = row.at("devices").get<int>();
        s.acceptance_ratio = row.at("acceptance_ratio").get<double>();
        s.executions = row.at("executions").get<std::uint64_t>();
        s.seed = row.at("seed").get<std::uint64_t>();
        if (!row.at("error_ratio").is_null()) s.error_ratio = row.at("error_ratio").get<double>();
        if (row.contains("latency_mean_us") && !row.at("latency_mean_us").is_null()) {
            s.latency_mean_us = row.at("latency_mean_us").get<double>();
            s.latency_std_us = row.at("latency_std_us").get<double>();
            s.latency_valid = true;
        }
        if (row.contains("failed")) s.failed = row.at("failed").get<bool>();
        if (row.contains("error")) s.error = row.at("error").get<std::string>();
        out.push_back(std::move(s));
    }
    return out;
}

void export_results(const std::vector<RunSummary>& summaries, ExportFormat format,
                    const std::filesystem::path& path, bool include_latency) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    if (format == ExportFormat::Csv) {
        write_results_csv(summaries, out, include_latency);
    } else {
        write_results_json(summaries, out, include_latency);
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<BenchResult> run_bench(const ExperimentSpec& spec, double ratio, int warmup, int reps) {
    if (warmup < 0 || reps < 1) throw ConfigError("bench needs warmup >= 0 and reps >= 1");
    std::vector<BenchResult> results;
    const std::uint64_t master = spec.seeds.front();
    for (int devices : spec.cluster_sizes) {
        for (PolicyKind kind : spec.policies) {
            std::vector<DeviceProfile> profiles =
                draw_profiles(devices, profile_seed(master, devices));
            ServiceSimulator sim(profiles, ratio, volatility_seed(master, devices), spec.sim);
            const auto policy =
                make_policy(spec, kind, devices, ratio, policy_stream_seed(master, devices, ratio, kind));
            for (int i = 0; i < warmup; ++i) sim.run_execution(*policy);
            std::vector<double> us;
            us.reserve(static_cast<std::size_t>(reps));
            for (int i = 0; i < reps; ++i) {
                const ExecutionRecord rec = sim.run_execution(*policy);
                us.push_back(static_cast<double>(rec.decision_latency.count()) / 1000.0);
            }
            const LatencyStats stats = latency_stats(us, 0);
            results.push_back(
                BenchResult{kind, devices, stats.mean_us / 1000.0, stats.std_us / 1000.0});
        }
    }
    return results;
}

}  // namespace edgeq
