#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vtmig/baselines.hpp"
#include "vtmig/checkpoint.hpp"
#include "vtmig/learner.hpp"
#include "vtmig/metrics.hpp"

namespace vtmig {

struct RunSummary {
    std::string algorithm;
    double final_reward = 0.0;   // mean episode reward over the final window
    double mean_loss = 0.0;
    double mean_latency = 0.0;
    double mean_energy = 0.0;
    double mean_cost = 0.0;
    double mean_qoe = 0.0;
    double migration_success_rate = 0.0;
    int episodes = 0;
    std::uint64_t config_hash = 0;
    double wall_clock_s = 0.0;
};

inline const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> a = {"mo-maddpg", "maddpg", "madqn", "ga", "random"};
    return a;
}

namespace harness_detail {

/// Episode-level metric names written for every algorithm.
inline void write_episode_stats(MetricsSink& sink, std::uint64_t seed, const EpisodeStats& st,
                                const std::string& suffix) {
    sink.append(seed, st.episode, -1, "episode_reward" + suffix, st.reward);
    sink.append(seed, st.episode, -1, "loss" + suffix, st.critic_loss);
    sink.append(seed, st.episode, -1, "latency" + suffix, st.mean_latency);
    sink.append(seed, st.episode, -1, "energy" + suffix, st.mean_energy);
    sink.append(seed, st.episode, -1, "cost" + suffix, st.mean_cost);
    sink.append(seed, st.episode, -1, "qoe" + suffix, st.mean_ux);
    sink.append(seed, st.episode, -1, "utility" + suffix, st.mean_utility);
    sink.append(seed, st.episode, -1, "msr" + suffix, st.migration_success_rate);
    sink.append(seed, st.episode, -1, "violations" + suffix, st.violations);
}

inline void write_step_metrics(MetricsSink& sink, std::uint64_t seed, int episode, int step,
                               const StepMetrics& m) {
    sink.append(seed, episode, step, "r_ux", m.reward.r_ux);
    sink.append(seed, episode, step, "r_util", m.reward.r_util);
    sink.append(seed, episode, step, "r_lat", m.reward.r_lat);
    sink.append(seed, episode, step, "r_en", m.reward.r_en);
    sink.append(seed, episode, step, "r_cost", m.reward.r_cost);
    sink.append(seed, episode, step, "scalar_reward", m.scalar_reward);
    sink.append(seed, episode, step, "raw_latency", m.mean_latency_s);
    sink.append(seed, episode, step, "raw_energy", m.mean_energy_j);
    sink.append(seed, episode, step, "raw_cost", m.mean_cost);
    sink.append(seed, episode, step, "raw_ux", m.mean_ux);
    sink.append(seed, episode, step, "raw_utility", m.system_utility);
    sink.append(seed, episode, step, "migration_success", m.migration_successes);
    int violated = 0;
    for (int c = 0; c < 10; ++c) violated += m.tallies.violated[static_cast<std::size_t>(c)];
    sink.append(seed, episode, step, "violations", violated);
}

/// Run one (algorithm, seed) stream and append its records.
inline std::vector<EpisodeStats> run_stream(const ExperimentConfig& cfg, const std::string& algo,
                                            std::uint64_t stream_seed, MetricsSink& sink,
                                            std::uint64_t seed_label, const std::string& suffix,
                                            const std::string& checkpoint_path) {
    Env env(cfg, stream_seed);
    std::vector<EpisodeStats> history;
    if (algo == "mo-maddpg" || algo == "maddpg") {
        MoMaddpgTrainer trainer(cfg, env, stream_seed, algo == "mo-maddpg" ? 5 : 1);
        if (cfg.log_step_metrics && suffix.empty())
            trainer.callbacks().on_step = [&](int ep, int s, const StepMetrics& m) {
                write_step_metrics(sink, seed_label, ep, s, m);
            };
        history = trainer.train();
        if (!checkpoint_path.empty()) trainer.save_checkpoint(checkpoint_path, config_hash(cfg));
    } else if (algo == "madqn") {
        MadqnTrainer trainer(cfg, env, stream_seed);
        history = trainer.train();
    } else if (algo == "ga") {
        GaOptimizer ga(cfg, env, stream_seed);
        history = ga.run();
    } else if (algo == "random") {
        history = random_rollout(cfg, env, stream_seed, cfg.episodes);
    } else {
        throw std::invalid_argument("unknown algorithm: " + algo);
    }
    for (const auto& st : history) write_episode_stats(sink, seed_label, st, suffix);
    return history;
}

inline RunSummary summarize_history(const std::string& algo,
                                    const std::vector<std::vector<EpisodeStats>>& per_seed,
                                    int trend_window) {
    RunSummary s;
    s.algorithm = algo;
    double rew = 0, loss = 0, lat = 0, en = 0, cost = 0, qoe = 0, msr = 0;
    int n = 0;
    for (const auto& hist : per_seed) {
        const int start = std::max(0, static_cast<int>(hist.size()) - trend_window);
        for (std::size_t i = static_cast<std::size_t>(start); i < hist.size(); ++i) {
            rew += hist[i].reward;
            loss += hist[i].critic_loss;
            lat += hist[i].mean_latency;
            en += hist[i].mean_energy;
            cost += hist[i].mean_cost;
            qoe += hist[i].mean_ux;
            msr += hist[i].migration_success_rate;
            ++n;
        }
        s.episodes = static_cast<int>(hist.size());
    }
    if (n > 0) {
        s.final_reward = rew / n;
        s.mean_loss = loss / n;
        s.mean_latency = lat / n;
        s.mean_energy = en / n;
        s.mean_cost = cost / n;
        s.mean_qoe = qoe / n;
        s.migration_success_rate = msr / n;
    }
    return s;
}

}  // namespace harness_detail

/// Execute every (algorithm, seed) pair, persisting metrics under
/// out_dir/run_id/<algorithm>.csv. Sweep axes declared in the config add
/// bracket-suffixed series from short runs at each grid point.
inline std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg,
                                              const std::vector<std::string>& algorithms,
                                              const std::vector<std::uint64_t>& seeds,
                                              const std::string& out_dir,
                                              const std::string& run_id) {
    if (algorithms.empty() || seeds.empty())
        throw std::invalid_argument("run_experiment: need at least one algorithm and one seed");
    std::vector<RunSummary> summaries;
    const std::string dir = out_dir + "/" + run_id;
    for (const auto& algo : algorithms) {
        const auto t0 = std::chrono::steady_clock::now();
        MetricsSink sink(dir, run_id, algo);
        std::vector<std::vector<EpisodeStats>> per_seed;
        for (std::uint64_t seed : seeds) {
            // counter-based: adding algorithms or seeds never shifts existing streams
            const std::uint64_t stream = splitmix64(fnv1a64(algo) ^ seed);
            const std::string ckpt = (algo == "mo-maddpg" || algo == "maddpg")
                                         ? dir + "/" + algo + "_seed" + std::to_string(seed) + ".ckpt"
                                         : std::string{};
            per_seed.push_back(
                harness_detail::run_stream(cfg, algo, stream, sink, seed, "", ckpt));

            // sweep grids: short runs per point, bracket-tagged series
            auto sweep = [&](const std::string& axis, const std::vector<double>& points,
                             auto patch) {
                for (double p : points) {
                    ExperimentConfig c2 = cfg;
                    c2.episodes = cfg.sweep_episodes;
                    c2.log_step_metrics = false;
                    patch(c2, p);
                    char tag[64];
                    std::snprintf(tag, sizeof tag, "[%s=%g]", axis.c_str(), p);
                    const std::uint64_t s2 =
                        splitmix64(fnv1a64(algo + axis) ^ seed ^ fnv1a64(tag));
                    harness_detail::run_stream(c2, algo, s2, sink, seed, tag, "");
                }
            };
            sweep("task_size_mb", cfg.sweep_task_size_mb, [](ExperimentConfig& c, double p) {
                c.task_size_min_mb = p;
                c.task_size_max_mb = p;
            });
            sweep("resource_scale", cfg.sweep_resource_scale, [](ExperimentConfig& c, double p) {
                c.edge_cpu_min_hz *= p;
                c.edge_cpu_max_hz *= p;
                c.cloud_cpu_min_hz *= p;
                c.cloud_cpu_max_hz *= p;
                c.edge_bandwidth_hz *= p;
                c.cloud_bandwidth_hz *= p;
            });
            sweep("demand_scale", cfg.sweep_demand_scale, [](ExperimentConfig& c, double p) {
                c.task_arrival_prob = clamp01(c.task_arrival_prob * p);
            });
        }
        sink.flush();
        RunSummary s = harness_detail::summarize_history(algo, per_seed, cfg.trend_window);
        s.config_hash = config_hash(cfg);
        s.wall_clock_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        summaries.push_back(s);
    }
    return summaries;
}

/// Rebuild summaries from persisted records and write a comparison table.
inline std::vector<RunSummary> summarize(const std::string& run_dir, int trend_window = 50) {
    const auto records = read_metrics_dir(run_dir);
    if (records.empty()) throw std::runtime_error("summarize: no metrics under " + run_dir);

    // per (algorithm, seed): episode -> value, for each metric of interest
    struct Series {
        std::map<int, double> reward, loss, latency, energy, cost, qoe, msr;
    };
    std::map<std::string, std::map<std::uint64_t, Series>> by_algo;
    for (const auto& r : records) {
        if (r.step >= 0) continue;
        auto& s = by_algo[r.algorithm][r.seed];
        if (r.metric == "episode_reward") s.reward[r.episode] = r.value;
        else if (r.metric == "loss") s.loss[r.episode] = r.value;
        else if (r.metric == "latency") s.latency[r.episode] = r.value;
        else if (r.metric == "energy") s.energy[r.episode] = r.value;
        else if (r.metric == "cost") s.cost[r.episode] = r.value;
        else if (r.metric == "qoe") s.qoe[r.episode] = r.value;
        else if (r.metric == "msr") s.msr[r.episode] = r.value;
    }

    std::vector<RunSummary> out;
    for (const auto& [algo, seeds] : by_algo) {
        RunSummary s;
        s.algorithm = algo;
        auto win_mean = [&](const std::map<int, double>& m) {
            if (m.empty()) return 0.0;
            const int last = m.rbegin()->first;
            const int start = std::max(0, last - trend_window + 1);
            double sum = 0;
            int n = 0;
            for (const auto& [ep, v] : m)
                if (ep >= start) {
                    sum += v;
                    ++n;
                }
            return n > 0 ? sum / n : 0.0;
        };
        double rew = 0, loss = 0, lat = 0, en = 0, cost = 0, qoe = 0, msr = 0;
        int n = 0;
        for (const auto& [seed, series] : seeds) {
            rew += win_mean(series.reward);
            loss += win_mean(series.loss);
            lat += win_mean(series.latency);
            en += win_mean(series.energy);
            cost += win_mean(series.cost);
            qoe += win_mean(series.qoe);
            msr += win_mean(series.msr);
            ++n;
            if (!series.reward.empty())
                s.episodes = series.reward.rbegin()->first + 1;
        }
        s.final_reward = rew / n;
        s.mean_loss = loss / n;
        s.mean_latency = lat / n;
        s.mean_energy = en / n;
        s.mean_cost = cost / n;
        s.mean_qoe = qoe / n;
        s.migration_success_rate = msr / n;
        out.push_back(s);
    }

    // comparison table: per-metric deltas of the first algorithm vs the rest
    std::ofstream table(run_dir + "/summary.csv");
    table << "algorithm,final_reward,mean_loss,mean_latency,mean_energy,mean_cost,mean_qoe,msr,episodes\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (const auto& s : out)
        table << s.algorithm << ',' << num(s.final_reward) << ',' << num(s.mean_loss) << ','
              << num(s.mean_latency) << ',' << num(s.mean_energy) << ',' << num(s.mean_cost) << ','
              << num(s.mean_qoe) << ',' << num(s.migration_success_rate) << ',' << s.episodes
              << '\n';
    if (out.size() > 1) {
        table << "\npair,reward_delta_pct,latency_delta_pct,cost_delta_pct,qoe_delta_pct\n";
        auto pct = [](double a, double b) { return b != 0.0 ? 100.0 * (a - b) / std::fabs(b) : 0.0; };
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (i == j) continue;
                table << out[i].algorithm << "-vs-" << out[j].algorithm << ','
                      << num(pct(out[i].final_reward, out[j].final_reward)) << ','
                      << num(pct(out[i].mean_latency, out[j].mean_latency)) << ','
                      << num(pct(out[i].mean_cost, out[j].mean_cost)) << ','
                      << num(pct(out[i].mean_qoe, out[j].mean_qoe)) << '\n';
            }
    }
    return out;
}

/// Write tidy per-figure data files (one row per algorithm/axis point).
/// Missing series are skipped with a warning naming the gap.
inline std::vector<std::string> emit_plots_data(const std::string& run_dir) {
    const auto records = read_metrics_dir(run_dir);
    if (records.empty()) throw std::runtime_error("emit-plots: no metrics under " + run_dir);
    const std::string plot_dir = run_dir + "/plots";
    std::filesystem::create_directories(plot_dir);
    std::vector<std::string> written;

    // vs-episode series, averaged over seeds
    auto emit_vs_episode = [&](const std::string& metric, const std::string& file) {
        std::map<std::string, std::map<int, std::pair<double, int>>> agg;  // algo -> ep -> (sum, n)
        for (const auto& r : records)
            if (r.step < 0 && r.metric == metric) {
                auto& cell = agg[r.algorithm][r.episode];
                cell.first += r.value;
                ++cell.second;
            }
        if (agg.empty()) {
            std::fprintf(stderr, "emit-plots: no '%s' series, skipping %s\n", metric.c_str(),
                         file.c_str());
            return;
        }
        std::ofstream out(plot_dir + "/" + file);
        out << "algorithm,episode," << metric << "\n";
        char buf[64];
        for (const auto& [algo, eps] : agg)
            for (const auto& [ep, cell] : eps) {
                std::snprintf(buf, sizeof buf, "%.17g", cell.first / cell.second);
                out << algo << ',' << ep << ',' << buf << '\n';
            }
        written.push_back(file);
    };
    emit_vs_episode("episode_reward", "reward_vs_episode.csv");
    emit_vs_episode("loss", "loss_vs_episode.csv");
    emit_vs_episode("energy", "ec_vs_episode.csv");
    emit_vs_episode("qoe", "qoe_vs_episode.csv");
    emit_vs_episode("latency", "latency_vs_episode.csv");
    emit_vs_episode("msr", "msr_vs_episode.csv");
    emit_vs_episode("cost", "cost_vs_episode.csv");

    // sweep series: metric[axis=value] records, final-window mean per point
    auto emit_vs_axis = [&](const std::string& metric, const std::string& axis,
                            const std::string& file) {
        // algo -> point -> (sum, n) over all episodes/seeds
        std::map<std::string, std::map<double, std::pair<double, int>>> agg;
        const std::string prefix = metric + "[" + axis + "=";
        for (const auto& r : records) {
            if (r.step >= 0 || r.metric.rfind(prefix, 0) != 0) continue;
            const auto close = r.metric.find(']', prefix.size());
            if (close == std::string::npos) continue;
            const double point = std::stod(r.metric.substr(prefix.size(), close - prefix.size()));
            auto& cell = agg[r.algorithm][point];
            cell.first += r.value;
            ++cell.second;
        }
        if (agg.empty()) {
            std::fprintf(stderr, "emit-plots: no '%s' sweep for axis '%s', skipping %s\n",
                         metric.c_str(), axis.c_str(), file.c_str());
            return;
        }
        std::ofstream out(plot_dir + "/" + file);
        out << "algorithm," << axis << ',' << metric << "\n";
        char buf[64];
        for (const auto& [algo, pts] : agg)
            for (const auto& [pt, cell] : pts) {
                std::snprintf(buf, sizeof buf, "%.17g", cell.first / cell.second);
                out << algo << ',' << pt << ',' << buf << '\n';
            }
        written.push_back(file);
    };
    emit_vs_axis("energy", "task_size_mb", "ec_vs_task_size.csv");
    emit_vs_axis("latency", "task_size_mb", "latency_vs_task_size.csv");
    emit_vs_axis("qoe", "resource_scale", "qoe_vs_resources.csv");
    emit_vs_axis("latency", "resource_scale", "latency_vs_resources.csv");
    emit_vs_axis("msr", "resource_scale", "msr_vs_resources.csv");
    emit_vs_axis("cost", "resource_scale", "cost_vs_resources.csv");
    emit_vs_axis("latency", "demand_scale", "latency_vs_demand.csv");
    emit_vs_axis("msr", "demand_scale", "msr_vs_demand.csv");
    return written;
}

}  // namespace vtmig
