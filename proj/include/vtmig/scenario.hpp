#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vtmig/common.hpp"
#include "vtmig/config.hpp"

namespace vtmig {

/// One VT task: data volume D, per-bit compute demand, deadline, priority
/// and bandwidth requirement. Total cycles = compute_demand * data_volume.
struct VtTaskProfile {
    double data_volume_bits = 0.0;   // D
    double compute_demand = 0.0;     // cycles per bit
    double deadline_s = 1.0;         // per-task latency bound
    int priority_class = 1;          // 1 = highest priority (smallest queue weight)
    double bandwidth_req_hz = 0.0;   // channel bandwidth the task asks for

    double total_cycles() const { return compute_demand * data_volume_bits; }
};

enum class VtStatus { Local, HostedEdge, HostedCloud, Migrating };

struct Vehicle {
    int id = 0;
    double position_m = 0.0;
    double velocity_mps = 0.0;
    double tx_power_w = 1.0;
    double local_cpu_hz = 1e9;
    std::optional<VtTaskProfile> pending_task;
    VtStatus vt_status = VtStatus::Local;
    int host_id = -1;  // edge or cloud id when hosted
};

struct EdgeNode {
    int id = 0;
    double position_m = 0.0;
    double coverage_radius_m = 500.0;
    double cpu_hz = 5e9;
    double bandwidth_hz = 20e6;
    int channel_count = 10;
    double switch_capacitance = 1e-18;  // kappa, calibrated so kappa*f^2 = power draw
    double tx_power_w = 30.0;
    double load_ratio = 0.0;
    double capacity_units = 50.0;  // game capacity
};

struct CloudServer {
    int id = 0;
    double cpu_hz = 30e9;
    double bandwidth_hz = 100e6;
    double switch_capacitance = 1e-19;
    int server_count = 4;
    double capacity_units = 500.0;
};

/// Complete mutable world state; a plain value, cheap to copy.
struct World {
    std::vector<Vehicle> vehicles;
    std::vector<EdgeNode> edges;
    std::vector<CloudServer> clouds;
    double ring_length_m = 10000.0;

    /// Shortest distance along the ring.
    double ring_distance(double a, double b) const {
        double d = std::fabs(a - b);
        return std::min(d, ring_length_m - d);
    }
};

/// Candidate hosts for one vehicle: covering edges plus every cloud.
struct AssociationResult {
    std::vector<int> edge_ids;   // within coverage, ascending id
    std::vector<int> cloud_ids;  // always all clouds
    int nearest_edge = -1;       // -1 when no edge covers the vehicle
};

inline VtTaskProfile sample_task(Rng& rng, const ExperimentConfig& cfg) {
    VtTaskProfile t;
    t.data_volume_bits = rng.uniform(cfg.task_size_min_mb, cfg.task_size_max_mb) * 8e6;
    // The published demand figure is total cycles; back out the per-bit rate.
    const double total_cycles = rng.uniform(cfg.task_cycles_min_gc, cfg.task_cycles_max_gc) * 1e9;
    t.compute_demand = t.data_volume_bits > 0 ? total_cycles / t.data_volume_bits : 0.0;
    t.deadline_s = rng.uniform(cfg.task_deadline_min_s, cfg.task_deadline_max_s);
    t.priority_class = rng.uniform_int(1, cfg.priority_classes);
    t.bandwidth_req_hz = rng.uniform(cfg.task_bw_req_min_hz, cfg.task_bw_req_max_hz);
    return t;
}

/// Sample a fresh world: vehicles uniformly on the ring with per-episode
/// constant speeds, edges equally spaced, clouds off-ring.
inline World make_world(Rng& rng, const ExperimentConfig& cfg) {
    World w;
    w.ring_length_m = cfg.ring_length_m;
    w.vehicles.reserve(static_cast<std::size_t>(cfg.vehicles));
    for (int v = 0; v < cfg.vehicles; ++v) {
        Vehicle veh;
        veh.id = v;
        veh.position_m = rng.uniform(0.0, cfg.ring_length_m);
        const double speed = rng.uniform(cfg.speed_min_mps, cfg.speed_max_mps);
        veh.velocity_mps = rng.uniform() < 0.5 ? speed : -speed;
        veh.tx_power_w = rng.uniform(cfg.vehicle_tx_power_min_w, cfg.vehicle_tx_power_max_w);
        veh.local_cpu_hz = rng.uniform(cfg.vehicle_cpu_min_hz, cfg.vehicle_cpu_max_hz);
        w.vehicles.push_back(veh);
    }
    w.edges.reserve(static_cast<std::size_t>(cfg.edges));
    for (int j = 0; j < cfg.edges; ++j) {
        EdgeNode e;
        e.id = j;
        e.position_m = cfg.ring_length_m * (static_cast<double>(j) / cfg.edges);
        e.coverage_radius_m = cfg.coverage_radius_m;
        e.cpu_hz = rng.uniform(cfg.edge_cpu_min_hz, cfg.edge_cpu_max_hz);
        e.bandwidth_hz = cfg.edge_bandwidth_hz;
        e.channel_count = std::max(1, static_cast<int>(cfg.edge_bandwidth_hz / cfg.channel_bandwidth_hz));
        const double power_w = rng.uniform(cfg.edge_power_min_w, cfg.edge_power_max_w);
        e.switch_capacitance = power_w / (e.cpu_hz * e.cpu_hz);
        e.tx_power_w = power_w;
        e.capacity_units = cfg.game_capacity_edge;
        w.edges.push_back(e);
    }
    w.clouds.reserve(static_cast<std::size_t>(cfg.clouds));
    for (int i = 0; i < cfg.clouds; ++i) {
        CloudServer c;
        c.id = i;
        c.cpu_hz = rng.uniform(cfg.cloud_cpu_min_hz, cfg.cloud_cpu_max_hz);
        c.bandwidth_hz = cfg.cloud_bandwidth_hz;
        const double power_w = rng.uniform(cfg.cloud_power_min_w, cfg.cloud_power_max_w);
        c.switch_capacitance = power_w / (c.cpu_hz * c.cpu_hz);
        c.server_count = cfg.cloud_server_count;
        c.capacity_units = cfg.game_capacity_cloud;
        w.clouds.push_back(c);
    }
    return w;
}

/// Advance every vehicle by dt along the ring. Positions stay in
/// [0, ring_length).
inline void step_mobility(World& w, double dt_s) {
    if (dt_s <= 0.0) throw std::invalid_argument("step_mobility: dt_s must be > 0");
    for (auto& v : w.vehicles) {
        double p = std::fmod(v.position_m + v.velocity_mps * dt_s, w.ring_length_m);
        if (p < 0) p += w.ring_length_m;
        if (p >= w.ring_length_m) p = 0.0;  // fmod can land exactly on the modulus
        v.position_m = p;
    }
}

/// Candidate hosts for a vehicle. Clouds are always reachable; edges only
/// within coverage. Nearest-edge ties break toward the lowest id.
inline AssociationResult associate(const Vehicle& v, const World& w) {
    AssociationResult r;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : w.edges) {
        const double d = w.ring_distance(v.position_m, e.position_m);
        if (d <= e.coverage_radius_m) {
            r.edge_ids.push_back(e.id);
            if (d < best) {  // strict: first (lowest-id) edge wins ties
                best = d;
                r.nearest_edge = e.id;
            }
        }
    }
    for (const auto& c : w.clouds) r.cloud_ids.push_back(c.id);
    return r;
}

/// One JSON line per entity, for debugging dumps.
inline void dump_world(const World& w, std::ostream& os) {
    char buf[256];
    for (const auto& v : w.vehicles) {
        std::snprintf(buf, sizeof buf,
                      R"({"kind":"vehicle","id":%d,"pos_m":%.6f,"vel_mps":%.6f,"cpu_hz":%.6g,"tx_w":%.6g,"status":%d,"host":%d})",
                      v.id, v.position_m, v.velocity_mps, v.local_cpu_hz, v.tx_power_w,
                      static_cast<int>(v.vt_status), v.host_id);
        os << buf << "\n";
    }
    for (const auto& e : w.edges) {
        std::snprintf(buf, sizeof buf,
                      R"({"kind":"edge","id":%d,"pos_m":%.6f,"cpu_hz":%.6g,"bw_hz":%.6g,"load":%.6f})",
                      e.id, e.position_m, e.cpu_hz, e.bandwidth_hz, e.load_ratio);
        os << buf << "\n";
    }
    for (const auto& c : w.clouds) {
        std::snprintf(buf, sizeof buf,
                      R"({"kind":"cloud","id":%d,"cpu_hz":%.6g,"bw_hz":%.6g,"servers":%d})",
                      c.id, c.cpu_hz, c.bandwidth_hz, c.server_count);
        os << buf << "\n";
    }
}

}  // namespace vtmig
