#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vtmig/common.hpp"

namespace vtmig {

/// Pricing basis for migration cost. Per-MB matches the published cost
/// range; per-cycle is the alternative resource-unit form.
enum class PriceMode { PerMb, PerCycle };

/// Full experiment configuration. Field defaults reproduce the reference
/// simulation setup; every field can be overridden from the config file.
struct ExperimentConfig {
    // world
    int vehicles = 100;
    int edges = 10;
    int clouds = 3;
    double ring_length_m = 10000.0;
    double coverage_radius_m = 500.0;
    double speed_min_mps = 10.0;  // 36 km/h
    double speed_max_mps = 30.0;  // 108 km/h
    double vehicle_cloud_distance_m = 1000.0;
    double backhaul_distance_m = 50000.0;
    double step_seconds = 1.0;

    // tasks
    double task_size_min_mb = 10.0;
    double task_size_max_mb = 50.0;
    double task_cycles_min_gc = 0.6;
    double task_cycles_max_gc = 1.6;
    double task_deadline_min_s = 5.0;
    double task_deadline_max_s = 10.0;
    double task_bw_req_min_hz = 1e6;
    double task_bw_req_max_hz = 5e6;
    double task_arrival_prob = 0.8;
    int priority_classes = 3;

    // compute / radio
    double vehicle_cpu_min_hz = 0.5e9;
    double vehicle_cpu_max_hz = 1.5e9;
    double edge_cpu_min_hz = 5e9;
    double edge_cpu_max_hz = 10e9;
    double cloud_cpu_min_hz = 20e9;
    double cloud_cpu_max_hz = 50e9;
    double edge_power_min_w = 10.0;
    double edge_power_max_w = 50.0;
    double cloud_power_min_w = 50.0;
    double cloud_power_max_w = 200.0;
    double vehicle_tx_power_min_w = 0.5;
    double vehicle_tx_power_max_w = 1.0;
    double edge_bandwidth_hz = 20e6;
    double cloud_bandwidth_hz = 100e6;
    double backhaul_bandwidth_hz = 50e6;
    double system_bandwidth_hz = 60e6;
    double channel_bandwidth_hz = 2e6;
    int cloud_server_count = 4;
    double channel_gain = 1.0;
    double noise_power = 5e-7;
    double pathloss_exp = 2.0;
    double backhaul_gain = 4000.0;
    double backhaul_pathloss_exp = 2.0;

    // costs & experience
    PriceMode price_mode = PriceMode::PerMb;
    double price_min_per_mb = 0.30;
    double price_max_per_mb = 0.50;
    double price_per_cycle = 4e-10;
    bool energy_times_cycles = false;
    double ux_w_l = 1.0 / 3.0;
    double ux_w_q = 1.0 / 3.0;
    double ux_w_r = 1.0 / 3.0;
    double ux_a_l = 1.0, ux_b_l = 0.3;
    double ux_a_q = 1.0, ux_b_q = 3.0;
    double ux_a_r = 1.0, ux_b_r = 3.0;

    // thresholds
    double thr_latency_s = 10.0;
    double thr_energy_j = 50.0;
    double thr_cost = 20.0;
    double thr_ux_min = 0.3;
    double thr_rel_min = 0.5;
    double thr_qual_min = 0.5;
    double utility_norm = 50.0;
    double penalty_coeff = 1.0;
    double overload_threshold = 0.9;

    // pricing game
    double game_eta_vehicle = 2.0;
    double game_eta_edge = 2.0;
    double game_cost_edge = 0.05;
    double game_cost_cloud = 0.02;
    double game_capacity_edge = 50.0;
    double game_capacity_cloud = 500.0;
    double game_price_lo = 0.1;
    double game_price_hi = 5.0;
    int game_price_grid = 200;
    double game_service_floor = 0.0;

    // objective weights
    double omega_ux = 0.2;
    double omega_util = 0.2;
    double omega_lat = 0.2;
    double omega_en = 0.2;
    double omega_cost = 0.2;

    // learner
    double gamma = 0.95;
    int episodes = 3000;
    int steps_per_episode = 100;
    int replay_capacity = 100000;
    int batch_size = 128;
    int warmup_experiences = 1000;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double gcn_lr = 1e-3;
    double tau = 1e-3;
    int hidden1 = 64;
    int hidden2 = 64;
    int gcn_hidden = 16;
    int gcn_out = 8;
    double noise_start = 0.2;
    double noise_end = 0.01;
    int updates_per_episode = 4;
    int update_every_steps = 0;  // 0: update at episode end
    bool share_tier_weights = false;
    int scenario_cycle = 50;  // episode scenario seeds repeat with this period (0 = never)

    // baselines
    int madqn_bins = 5;
    double madqn_eps_start = 1.0;
    double madqn_eps_end = 0.05;
    int ga_population = 50;
    int ga_generations = 100;
    int ga_tournament = 3;
    double ga_crossover = 0.9;
    double ga_mutation = 0.02;
    int ga_elitism = 1;

    // harness
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds;  // empty: use {seed}
    std::vector<double> sweep_task_size_mb;
    std::vector<double> sweep_resource_scale;
    std::vector<double> sweep_demand_scale;
    int sweep_episodes = 20;
    int ewma_window = 10;
    int trend_window = 50;
    bool log_step_metrics = true;

    std::vector<std::uint64_t> effective_seeds() const {
        return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
    }
    double task_cycles_mean() const { return 0.5e9 * (task_cycles_min_gc + task_cycles_max_gc); }
};

namespace detail {

enum class FieldKind { Int, Real, Bool, U64, U64List, RealList, Price };

struct FieldDesc {
    const char* name;
    FieldKind kind;
    void* (*ptr)(ExperimentConfig&);
};

// One entry per schema key. Defined as accessor functions so the table is a
// plain static array.
#define VTMIG_FIELD(key, kind, member)                                               \
    FieldDesc { #key, FieldKind::kind, +[](ExperimentConfig& c) -> void* { return &c.member; } }

inline const std::vector<FieldDesc>& schema() {
    static const std::vector<FieldDesc> s = {
        VTMIG_FIELD(vehicles, Int, vehicles),
        VTMIG_FIELD(edges, Int, edges),
        VTMIG_FIELD(clouds, Int, clouds),
        VTMIG_FIELD(ring_length_m, Real, ring_length_m),
        VTMIG_FIELD(coverage_radius_m, Real, coverage_radius_m),
        VTMIG_FIELD(speed_min_mps, Real, speed_min_mps),
        VTMIG_FIELD(speed_max_mps, Real, speed_max_mps),
        VTMIG_FIELD(vehicle_cloud_distance_m, Real, vehicle_cloud_distance_m),
        VTMIG_FIELD(backhaul_distance_m, Real, backhaul_distance_m),
        VTMIG_FIELD(step_seconds, Real, step_seconds),
        VTMIG_FIELD(task_size_min_mb, Real, task_size_min_mb),
        VTMIG_FIELD(task_size_max_mb, Real, task_size_max_mb),
        VTMIG_FIELD(task_cycles_min_gc, Real, task_cycles_min_gc),
        VTMIG_FIELD(task_cycles_max_gc, Real, task_cycles_max_gc),
        VTMIG_FIELD(task_deadline_min_s, Real, task_deadline_min_s),
        VTMIG_FIELD(task_deadline_max_s, Real, task_deadline_max_s),
        VTMIG_FIELD(task_bw_req_min_hz, Real, task_bw_req_min_hz),
        VTMIG_FIELD(task_bw_req_max_hz, Real, task_bw_req_max_hz),
        VTMIG_FIELD(task_arrival_prob, Real, task_arrival_prob),
        VTMIG_FIELD(priority_classes, Int, priority_classes),
        VTMIG_FIELD(vehicle_cpu_min_hz, Real, vehicle_cpu_min_hz),
        VTMIG_FIELD(vehicle_cpu_max_hz, Real, vehicle_cpu_max_hz),
        VTMIG_FIELD(edge_cpu_min_hz, Real, edge_cpu_min_hz),
        VTMIG_FIELD(edge_cpu_max_hz, Real, edge_cpu_max_hz),
        VTMIG_FIELD(cloud_cpu_min_hz, Real, cloud_cpu_min_hz),
        VTMIG_FIELD(cloud_cpu_max_hz, Real, cloud_cpu_max_hz),
        VTMIG_FIELD(edge_power_min_w, Real, edge_power_min_w),
        VTMIG_FIELD(edge_power_max_w, Real, edge_power_max_w),
        VTMIG_FIELD(cloud_power_min_w, Real, cloud_power_min_w),
        VTMIG_FIELD(cloud_power_max_w, Real, cloud_power_max_w),
        VTMIG_FIELD(vehicle_tx_power_min_w, Real, vehicle_tx_power_min_w),
        VTMIG_FIELD(vehicle_tx_power_max_w, Real, vehicle_tx_power_max_w),
        VTMIG_FIELD(edge_bandwidth_hz, Real, edge_bandwidth_hz),
        VTMIG_FIELD(cloud_bandwidth_hz, Real, cloud_bandwidth_hz),
        VTMIG_FIELD(backhaul_bandwidth_hz, Real, backhaul_bandwidth_hz),
        VTMIG_FIELD(system_bandwidth_hz, Real, system_bandwidth_hz),
        VTMIG_FIELD(channel_bandwidth_hz, Real, channel_bandwidth_hz),
        VTMIG_FIELD(cloud_server_count, Int, cloud_server_count),
        VTMIG_FIELD(channel_gain, Real, channel_gain),
        VTMIG_FIELD(noise_power, Real, noise_power),
        VTMIG_FIELD(pathloss_exp, Real, pathloss_exp),
        VTMIG_FIELD(backhaul_gain, Real, backhaul_gain),
        VTMIG_FIELD(backhaul_pathloss_exp, Real, backhaul_pathloss_exp),
        VTMIG_FIELD(price_mode, Price, price_mode),
        VTMIG_FIELD(price_min_per_mb, Real, price_min_per_mb),
        VTMIG_FIELD(price_max_per_mb, Real, price_max_per_mb),
        VTMIG_FIELD(price_per_cycle, Real, price_per_cycle),
        VTMIG_FIELD(energy_times_cycles, Bool, energy_times_cycles),
        VTMIG_FIELD(ux_w_l, Real, ux_w_l),
        VTMIG_FIELD(ux_w_q, Real, ux_w_q),
        VTMIG_FIELD(ux_w_r, Real, ux_w_r),
        VTMIG_FIELD(ux_a_l, Real, ux_a_l),
        VTMIG_FIELD(ux_b_l, Real, ux_b_l),
        VTMIG_FIELD(ux_a_q, Real, ux_a_q),
        VTMIG_FIELD(ux_b_q, Real, ux_b_q),
        VTMIG_FIELD(ux_a_r, Real, ux_a_r),
        VTMIG_FIELD(ux_b_r, Real, ux_b_r),
        VTMIG_FIELD(thr_latency_s, Real, thr_latency_s),
        VTMIG_FIELD(thr_energy_j, Real, thr_energy_j),
        VTMIG_FIELD(thr_cost, Real, thr_cost),
        VTMIG_FIELD(thr_ux_min, Real, thr_ux_min),
        VTMIG_FIELD(thr_rel_min, Real, thr_rel_min),
        VTMIG_FIELD(thr_qual_min, Real, thr_qual_min),
        VTMIG_FIELD(utility_norm, Real, utility_norm),
        VTMIG_FIELD(penalty_coeff, Real, penalty_coeff),
        VTMIG_FIELD(overload_threshold, Real, overload_threshold),
        VTMIG_FIELD(game_eta_vehicle, Real, game_eta_vehicle),
        VTMIG_FIELD(game_eta_edge, Real, game_eta_edge),
        VTMIG_FIELD(game_cost_edge, Real, game_cost_edge),
        VTMIG_FIELD(game_cost_cloud, Real, game_cost_cloud),
        VTMIG_FIELD(game_capacity_edge, Real, game_capacity_edge),
        VTMIG_FIELD(game_capacity_cloud, Real, game_capacity_cloud),
        VTMIG_FIELD(game_price_lo, Real, game_price_lo),
        VTMIG_FIELD(game_price_hi, Real, game_price_hi),
        VTMIG_FIELD(game_price_grid, Int, game_price_grid),
        VTMIG_FIELD(game_service_floor, Real, game_service_floor),
        VTMIG_FIELD(omega_ux, Real, omega_ux),
        VTMIG_FIELD(omega_util, Real, omega_util),
        VTMIG_FIELD(omega_lat, Real, omega_lat),
        VTMIG_FIELD(omega_en, Real, omega_en),
        VTMIG_FIELD(omega_cost, Real, omega_cost),
        VTMIG_FIELD(gamma, Real, gamma),
        VTMIG_FIELD(episodes, Int, episodes),
        VTMIG_FIELD(steps_per_episode, Int, steps_per_episode),
        VTMIG_FIELD(replay_capacity, Int, replay_capacity),
        VTMIG_FIELD(batch_size, Int, batch_size),
        VTMIG_FIELD(warmup_experiences, Int, warmup_experiences),
        VTMIG_FIELD(actor_lr, Real, actor_lr),
        VTMIG_FIELD(critic_lr, Real, critic_lr),
        VTMIG_FIELD(gcn_lr, Real, gcn_lr),
        VTMIG_FIELD(tau, Real, tau),
        VTMIG_FIELD(hidden1, Int, hidden1),
        VTMIG_FIELD(hidden2, Int, hidden2),
        VTMIG_FIELD(gcn_hidden, Int, gcn_hidden),
        VTMIG_FIELD(gcn_out, Int, gcn_out),
        VTMIG_FIELD(noise_start, Real, noise_start),
        VTMIG_FIELD(noise_end, Real, noise_end),
        VTMIG_FIELD(updates_per_episode, Int, updates_per_episode),
        VTMIG_FIELD(update_every_steps, Int, update_every_steps),
        VTMIG_FIELD(share_tier_weights, Bool, share_tier_weights),
        VTMIG_FIELD(scenario_cycle, Int, scenario_cycle),
        VTMIG_FIELD(madqn_bins, Int, madqn_bins),
        VTMIG_FIELD(madqn_eps_start, Real, madqn_eps_start),
        VTMIG_FIELD(madqn_eps_end, Real, madqn_eps_end),
        VTMIG_FIELD(ga_population, Int, ga_population),
        VTMIG_FIELD(ga_generations, Int, ga_generations),
        VTMIG_FIELD(ga_tournament, Int, ga_tournament),
        VTMIG_FIELD(ga_crossover, Real, ga_crossover),
        VTMIG_FIELD(ga_mutation, Real, ga_mutation),
        VTMIG_FIELD(ga_elitism, Int, ga_elitism),
        VTMIG_FIELD(seed, U64, seed),
        VTMIG_FIELD(seeds, U64List, seeds),
        VTMIG_FIELD(sweep_task_size_mb, RealList, sweep_task_size_mb),
        VTMIG_FIELD(sweep_resource_scale, RealList, sweep_resource_scale),
        VTMIG_FIELD(sweep_demand_scale, RealList, sweep_demand_scale),
        VTMIG_FIELD(sweep_episodes, Int, sweep_episodes),
        VTMIG_FIELD(ewma_window, Int, ewma_window),
        VTMIG_FIELD(trend_window, Int, trend_window),
        VTMIG_FIELD(log_step_metrics, Bool, log_step_metrics),
    };
    return s;
}

#undef VTMIG_FIELD

inline std::string trim(std::string s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw ConfigError("bad number for '" + key + "': " + v);
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("bad number for '" + key + "': " + v);
    }
}

inline void assign_field(ExperimentConfig& cfg, const FieldDesc& f, const std::string& key,
                         const std::string& value) {
    switch (f.kind) {
        case FieldKind::Int: {
            const double x = parse_real(key, value);
            if (x != std::floor(x)) throw ConfigError("expected integer for '" + key + "'");
            *static_cast<int*>(f.ptr(cfg)) = static_cast<int>(x);
            break;
        }
        case FieldKind::Real:
            *static_cast<double*>(f.ptr(cfg)) = parse_real(key, value);
            break;
        case FieldKind::Bool: {
            if (value == "true" || value == "1")
                *static_cast<bool*>(f.ptr(cfg)) = true;
            else if (value == "false" || value == "0")
                *static_cast<bool*>(f.ptr(cfg)) = false;
            else
                throw ConfigError("expected true/false for '" + key + "'");
            break;
        }
        case FieldKind::U64: {
            const double x = parse_real(key, value);
            if (x < 0 || x != std::floor(x)) throw ConfigError("expected unsigned integer for '" + key + "'");
            *static_cast<std::uint64_t*>(f.ptr(cfg)) = static_cast<std::uint64_t>(x);
            break;
        }
        case FieldKind::U64List: {
            auto& list = *static_cast<std::vector<std::uint64_t>*>(f.ptr(cfg));
            list.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                const double x = parse_real(key, item);
                if (x < 0 || x != std::floor(x))
                    throw ConfigError("expected unsigned integer list for '" + key + "'");
                list.push_back(static_cast<std::uint64_t>(x));
            }
            break;
        }
        case FieldKind::RealList: {
            auto& list = *static_cast<std::vector<double>*>(f.ptr(cfg));
            list.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = trim(item);
                if (!item.empty()) list.push_back(parse_real(key, item));
            }
            break;
        }
        case FieldKind::Price: {
            if (value == "per_mb")
                *static_cast<PriceMode*>(f.ptr(cfg)) = PriceMode::PerMb;
            else if (value == "per_cycle")
                *static_cast<PriceMode*>(f.ptr(cfg)) = PriceMode::PerCycle;
            else
                throw ConfigError("expected per_mb|per_cycle for '" + key + "'");
            break;
        }
    }
}

}  // namespace detail

/// Check cross-field invariants. Throws ConfigError naming the offending key.
inline void validate_config(const ExperimentConfig& c) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    auto range = [&](double lo, double hi, const std::string& key) {
        require(lo <= hi, "empty range for '" + key + "' (min > max)");
    };
    require(c.vehicles >= 0, "vehicles must be >= 0");
    require(c.edges >= 1, "edges must be >= 1");
    require(c.clouds >= 1, "clouds must be >= 1");
    require(c.ring_length_m > 0, "ring_length_m must be > 0");
    require(c.coverage_radius_m > 0, "coverage_radius_m must be > 0");
    range(c.speed_min_mps, c.speed_max_mps, "speed_min_mps");
    range(c.task_size_min_mb, c.task_size_max_mb, "task_size_min_mb");
    range(c.task_cycles_min_gc, c.task_cycles_max_gc, "task_cycles_min_gc");
    range(c.task_deadline_min_s, c.task_deadline_max_s, "task_deadline_min_s");
    require(c.task_deadline_min_s > 0, "task_deadline_min_s must be > 0");
    range(c.task_bw_req_min_hz, c.task_bw_req_max_hz, "task_bw_req_min_hz");
    require(c.task_arrival_prob >= 0 && c.task_arrival_prob <= 1, "task_arrival_prob out of [0,1]");
    require(c.priority_classes >= 1, "priority_classes must be >= 1");
    range(c.vehicle_cpu_min_hz, c.vehicle_cpu_max_hz, "vehicle_cpu_min_hz");
    range(c.edge_cpu_min_hz, c.edge_cpu_max_hz, "edge_cpu_min_hz");
    range(c.cloud_cpu_min_hz, c.cloud_cpu_max_hz, "cloud_cpu_min_hz");
    require(c.cloud_cpu_min_hz >= c.edge_cpu_max_hz,
            "cloud_cpu_min_hz must be >= edge_cpu_max_hz (cloud is resource-rich)");
    range(c.edge_power_min_w, c.edge_power_max_w, "edge_power_min_w");
    range(c.cloud_power_min_w, c.cloud_power_max_w, "cloud_power_min_w");
    range(c.vehicle_tx_power_min_w, c.vehicle_tx_power_max_w, "vehicle_tx_power_min_w");
    require(c.vehicle_tx_power_min_w > 0, "vehicle_tx_power_min_w must be > 0");
    require(c.edge_bandwidth_hz > 0, "edge_bandwidth_hz must be > 0");
    require(c.cloud_bandwidth_hz > 0, "cloud_bandwidth_hz must be > 0");
    require(c.cloud_server_count >= 1, "cloud_server_count must be >= 1");
    require(c.channel_gain > 0, "channel_gain must be > 0");
    require(c.noise_power > 0, "noise_power must be > 0");
    range(c.price_min_per_mb, c.price_max_per_mb, "price_min_per_mb");
    require(c.price_min_per_mb >= 0, "price_min_per_mb must be >= 0");
    const double wsum = c.ux_w_l + c.ux_w_q + c.ux_w_r;
    require(c.ux_w_l >= 0 && c.ux_w_q >= 0 && c.ux_w_r >= 0, "ux weights must be >= 0");
    require(std::abs(wsum - 1.0) < 1e-9, "ux weights must sum to 1");
    require(c.omega_ux >= 0 && c.omega_util >= 0 && c.omega_lat >= 0 && c.omega_en >= 0 &&
                c.omega_cost >= 0,
            "objective weights must be >= 0");
    if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ConfigError("gamma out of (0,1)");
    require(c.episodes >= 1, "episodes must be >= 1");
    require(c.steps_per_episode >= 1, "steps_per_episode must be >= 1");
    require(c.replay_capacity >= 1, "replay_capacity must be >= 1");
    require(c.batch_size >= 1, "batch_size must be >= 1");
    require(c.tau > 0 && c.tau <= 1, "tau out of (0,1]");
    require(c.game_price_lo >= 0, "game_price_lo must be >= 0");
    require(c.game_price_lo < c.game_price_hi, "game_price_lo must be < game_price_hi");
    require(c.game_price_grid >= 2, "game_price_grid must be >= 2");
    require(c.game_eta_vehicle > 0 && c.game_eta_edge > 0, "game eta must be > 0");
    require(c.game_capacity_edge > 0 && c.game_capacity_cloud > 0, "game capacities must be > 0");
    require(c.ga_population >= 2, "ga_population must be >= 2");
    require(c.ga_tournament >= 1, "ga_tournament must be >= 1");
    require(c.madqn_bins >= 2, "madqn_bins must be >= 2");
}

/// Parse a key=value config file. Unknown keys are hard errors; omitted keys
/// keep their defaults. '#' starts a comment.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const auto& schema = detail::schema();
        const auto it = std::find_if(schema.begin(), schema.end(),
                                     [&](const auto& f) { return key == f.name; });
        if (it == schema.end()) throw ConfigError("unknown config key '" + key + "'");
        detail::assign_field(cfg, *it, key, value);
    }
    validate_config(cfg);
    return cfg;
}

/// Canonical text rendering (schema order); basis for the config hash.
inline std::string dump_config(const ExperimentConfig& cfg) {
    std::string out;
    char buf[64];
    auto real = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    ExperimentConfig& c = const_cast<ExperimentConfig&>(cfg);
    for (const auto& f : detail::schema()) {
        out += f.name;
        out += " = ";
        switch (f.kind) {
            case detail::FieldKind::Int:
                out += std::to_string(*static_cast<int*>(f.ptr(c)));
                break;
            case detail::FieldKind::Real:
                out += real(*static_cast<double*>(f.ptr(c)));
                break;
            case detail::FieldKind::Bool:
                out += *static_cast<bool*>(f.ptr(c)) ? "true" : "false";
                break;
            case detail::FieldKind::U64:
                out += std::to_string(*static_cast<std::uint64_t*>(f.ptr(c)));
                break;
            case detail::FieldKind::U64List: {
                const auto& v = *static_cast<std::vector<std::uint64_t>*>(f.ptr(c));
                for (std::size_t i = 0; i < v.size(); ++i)
                    out += (i ? "," : "") + std::to_string(v[i]);
                break;
            }
            case detail::FieldKind::RealList: {
                const auto& v = *static_cast<std::vector<double>*>(f.ptr(c));
                for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + real(v[i]);
                break;
            }
            case detail::FieldKind::Price:
                out += *static_cast<PriceMode*>(f.ptr(c)) == PriceMode::PerMb ? "per_mb" : "per_cycle";
                break;
        }
        out += "\n";
    }
    return out;
}

inline std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a64(dump_config(cfg)); }

}  // namespace vtmig
