#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtmig/scenario.hpp"

namespace vtmig {

/// Parameters of one radio/backhaul link.
struct LinkParams {
    double bandwidth_hz = 1e6;
    double tx_power_w = 1.0;
    double channel_gain = 1.0;
    double distance_m = 100.0;
    double pathloss_exp = 2.0;
    double noise_psd = 1e-7;
};

/// Which migration route a task takes this slot. At most one route is
/// active per vehicle per slot.
enum class Route { None, VehicleToEdge, VehicleToCloud, EdgeToCloud };

struct MigrationDecision {
    Route route = Route::None;
    int source_edge = -1;   // set for EdgeToCloud
    int destination = -1;   // edge id or cloud id depending on route

    bool active() const { return route != Route::None; }
};

/// Raw (possibly multi-set) migration flags, used by the constraint checker
/// before masking turns them into a MigrationDecision.
struct MigrationFlags {
    int vehicle = 0;
    bool to_edge = false;
    bool to_cloud = false;
    bool edge_to_cloud = false;
    int edge_id = -1;
    int cloud_id = -1;

    int count() const { return (to_edge ? 1 : 0) + (to_cloud ? 1 : 0) + (edge_to_cloud ? 1 : 0); }
};

/// M/M/s queue descriptor at one server.
struct QueueState {
    double arrival_rate = 0.0;   // lambda
    double service_rate = 1.0;   // mu, per server
    int servers = 1;             // s
    double queue_length = 0.0;   // Lambda_q, tasks waiting
    double priority_weight = 1.0;  // rho; class 1 = weight 1 = served first
};

inline void validate_link(const LinkParams& p) {
    if (p.bandwidth_hz <= 0 || p.tx_power_w <= 0 || p.channel_gain <= 0 || p.distance_m <= 0 ||
        p.pathloss_exp <= 0 || p.noise_psd <= 0)
        throw std::domain_error("shannon_rate: all link parameters must be > 0");
}

/// Link rate b*log2(1 + SNR), SNR = delta*k*d^-eps / N0.
inline double shannon_rate(const LinkParams& p) {
    validate_link(p);
    const double snr = p.tx_power_w * p.channel_gain * std::pow(p.distance_m, -p.pathloss_exp) /
                       p.noise_psd;
    return p.bandwidth_hz * std::log2(1.0 + snr);
}

/// Upload time of the task input.
inline double tx_latency(const VtTaskProfile& task, double rate_bps) {
    if (rate_bps <= 0) throw std::domain_error("tx_latency: rate must be > 0");
    return task.data_volume_bits / rate_bps;
}

/// Execution time at a host with the given allocated CPU.
inline double exec_latency(const VtTaskProfile& task, double cpu_hz) {
    if (cpu_hz <= 0) throw std::domain_error("exec_latency: cpu_hz must be > 0");
    return task.total_cycles() / cpu_hz;
}

/// Non-preemptive priority M/M/s waiting time: rho * Lq / (mu (s mu - lambda)).
inline double queue_delay(const QueueState& q) {
    if (q.service_rate <= 0) throw std::domain_error("queue_delay: service rate must be > 0");
    if (q.servers < 1) throw std::domain_error("queue_delay: servers must be >= 1");
    if (q.queue_length == 0.0) return 0.0;
    const double smu = q.servers * q.service_rate;
    if (q.arrival_rate >= smu)
        throw std::domain_error("queue_delay: unstable queue (lambda >= s*mu)");
    return q.priority_weight * q.queue_length / (q.service_rate * (smu - q.arrival_rate));
}

/// Environment preparation time at the destination: total cycles / f_dest.
inline double reinstantiation_delay(const VtTaskProfile& task, double dest_cpu_hz) {
    if (dest_cpu_hz <= 0) throw std::domain_error("reinstantiation_delay: cpu must be > 0");
    return task.total_cycles() / dest_cpu_hz;
}

/// Per-route latency components; inactive entries must be zero.
struct LatencyComponents {
    double tx = 0.0;       // vehicle uplink
    double exec = 0.0;     // execution at the serving node
    double migrate = 0.0;  // edge->cloud transfer
    double queue = 0.0;    // waiting at the serving/destination node
    double reinstate = 0.0;  // re-instantiation at the destination
};

/// Route-gated total: vehicle->edge and vehicle->cloud use {tx, exec, queue};
/// edge->cloud relay uses all five terms.
inline double total_latency(const MigrationDecision& d, const LatencyComponents& c) {
    switch (d.route) {
        case Route::VehicleToEdge:
        case Route::VehicleToCloud:
            return c.tx + c.exec + c.queue;
        case Route::EdgeToCloud:
            return c.tx + c.exec + c.migrate + c.queue + c.reinstate;
        case Route::None:
            break;
    }
    throw std::invalid_argument("total_latency: no active route");
}

enum class ViolationKind { MultipleAssociation, Bandwidth };

struct ChannelViolation {
    ViolationKind kind;
    int subject_id;       // vehicle for association, server for bandwidth
    bool server_is_edge;  // meaningful for Bandwidth
    double magnitude;     // excess flags or excess bandwidth (Hz)
};

/// Check the single-association and per-server bandwidth-sum constraints.
/// Violations are returned as data; nothing throws.
inline std::vector<ChannelViolation> check_channel_constraints(
    const World& w, const std::vector<MigrationFlags>& flags,
    const std::vector<VtTaskProfile>& tasks) {
    std::vector<ChannelViolation> out;
    std::vector<double> edge_bw(w.edges.size(), 0.0);
    std::vector<double> cloud_bw(w.clouds.size(), 0.0);
    for (std::size_t i = 0; i < flags.size(); ++i) {
        const auto& f = flags[i];
        if (f.count() > 1)
            out.push_back({ViolationKind::MultipleAssociation, f.vehicle, false,
                           static_cast<double>(f.count() - 1)});
        const double bw = i < tasks.size() ? tasks[i].bandwidth_req_hz : 0.0;
        // uplink consumption: to_edge and edge_to_cloud load the edge,
        // to_cloud loads the cloud
        if ((f.to_edge || f.edge_to_cloud) && f.edge_id >= 0 &&
            f.edge_id < static_cast<int>(edge_bw.size()))
            edge_bw[static_cast<std::size_t>(f.edge_id)] += bw;
        if (f.to_cloud && f.cloud_id >= 0 && f.cloud_id < static_cast<int>(cloud_bw.size()))
            cloud_bw[static_cast<std::size_t>(f.cloud_id)] += bw;
    }
    for (std::size_t j = 0; j < edge_bw.size(); ++j)
        if (edge_bw[j] > w.edges[j].bandwidth_hz)
            out.push_back({ViolationKind::Bandwidth, static_cast<int>(j), true,
                           edge_bw[j] - w.edges[j].bandwidth_hz});
    for (std::size_t i = 0; i < cloud_bw.size(); ++i)
        if (cloud_bw[i] > w.clouds[i].bandwidth_hz)
            out.push_back({ViolationKind::Bandwidth, static_cast<int>(i), false,
                           cloud_bw[i] - w.clouds[i].bandwidth_hz});
    return out;
}

}  // namespace vtmig
