#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtmig/netlink.hpp"

namespace vtmig {

/// Per-route energy terms in joules; inactive terms are zero.
struct EnergyBreakdown {
    double upload = 0.0;    // vehicle transmit energy P_v * D / R
    double exec_src = 0.0;  // execution at the source edge, kappa_j f^2
    double migrate = 0.0;   // edge->cloud transfer, P_j * D / R_ji
    double exec_dst = 0.0;  // execution at the destination, kappa_i f^2
    double total = 0.0;
};

struct UxParams {
    double w_l = 1.0 / 3.0, w_q = 1.0 / 3.0, w_r = 1.0 / 3.0;
    double a_l = 1.0, b_l = 0.3;
    double a_q = 1.0, b_q = 3.0;
    double a_r = 1.0, b_r = 3.0;

    static UxParams from_config(const ExperimentConfig& c) {
        return {c.ux_w_l, c.ux_w_q, c.ux_w_r, c.ux_a_l, c.ux_b_l,
                c.ux_a_q, c.ux_b_q, c.ux_a_r, c.ux_b_r};
    }
};

struct Thresholds {
    double latency_max_s = 10.0;
    double energy_max_j = 50.0;
    double cost_max = 20.0;
    double ux_min = 0.3;
    double reliability_min = 0.5;
    double quality_min = 0.5;

    static Thresholds from_config(const ExperimentConfig& c) {
        return {c.thr_latency_s, c.thr_energy_j, c.thr_cost,
                c.thr_ux_min, c.thr_rel_min, c.thr_qual_min};
    }
};

/// Inputs for the energy model of one served task.
struct EnergyInputs {
    double vehicle_tx_power_w = 1.0;
    double edge_tx_power_w = 30.0;
    double uplink_rate_bps = 1.0;     // vehicle -> serving node
    double backhaul_rate_bps = 1.0;   // edge -> cloud, EdgeToCloud only
    double src_capacitance = 0.0;     // kappa_j
    double src_cpu_hz = 0.0;          // f used at the source edge
    double dst_capacitance = 0.0;     // kappa_i
    double dst_cpu_hz = 0.0;          // f used at the destination
    bool energy_times_cycles = false;  // multiply exec terms by cycle count
};

inline double exec_energy(double capacitance, double cpu_hz, double cycles, bool times_cycles) {
    const double base = capacitance * cpu_hz * cpu_hz;
    return times_cycles ? base * cycles : base;
}

inline EnergyBreakdown energy(const MigrationDecision& d, const VtTaskProfile& task,
                              const EnergyInputs& in) {
    EnergyBreakdown e;
    if (!d.active()) return e;  // all-zero breakdown
    const double cycles = task.total_cycles();
    switch (d.route) {
        case Route::VehicleToEdge:
            if (in.uplink_rate_bps <= 0) throw std::domain_error("energy: zero uplink rate");
            e.upload = in.vehicle_tx_power_w * task.data_volume_bits / in.uplink_rate_bps;
            e.exec_src = exec_energy(in.src_capacitance, in.src_cpu_hz, cycles, in.energy_times_cycles);
            break;
        case Route::VehicleToCloud:
            if (in.uplink_rate_bps <= 0) throw std::domain_error("energy: zero uplink rate");
            e.upload = in.vehicle_tx_power_w * task.data_volume_bits / in.uplink_rate_bps;
            e.exec_dst = exec_energy(in.dst_capacitance, in.dst_cpu_hz, cycles, in.energy_times_cycles);
            break;
        case Route::EdgeToCloud:
            if (in.uplink_rate_bps <= 0 || in.backhaul_rate_bps <= 0)
                throw std::domain_error("energy: zero rate on an active link");
            e.upload = in.vehicle_tx_power_w * task.data_volume_bits / in.uplink_rate_bps;
            e.exec_src = exec_energy(in.src_capacitance, in.src_cpu_hz, cycles, in.energy_times_cycles);
            e.migrate = in.edge_tx_power_w * task.data_volume_bits / in.backhaul_rate_bps;
            e.exec_dst = exec_energy(in.dst_capacitance, in.dst_cpu_hz, cycles, in.energy_times_cycles);
            break;
        case Route::None:
            break;
    }
    e.total = e.upload + e.exec_src + e.migrate + e.exec_dst;
    return e;
}

/// Price charged by the destination for the resources the task consumes.
/// Per-MB mode prices the transferred volume; per-cycle mode prices compute.
inline double migration_cost(const VtTaskProfile& task, double price, PriceMode mode) {
    if (price < 0) throw std::domain_error("migration_cost: negative price");
    const double qty =
        mode == PriceMode::PerMb ? task.data_volume_bits / 8e6 : task.total_cycles();
    return qty * price;
}

/// Experience rating: exponential latency decay plus saturating quality and
/// reliability terms.
inline double ux_rating(double latency_s, double quality, double reliability, const UxParams& p) {
    if (latency_s < 0 || quality < 0 || reliability < 0)
        throw std::domain_error("ux_rating: inputs must be >= 0");
    return p.w_l * p.a_l * std::exp(-p.b_l * latency_s) +
           p.w_q * p.a_q * (1.0 - std::exp(-p.b_q * quality)) +
           p.w_r * p.a_r * (1.0 - std::exp(-p.b_r * reliability));
}

/// Mean of the per-task ratings, gated by the migration decision.
inline double vehicle_ux(const std::vector<double>& ratings, const MigrationDecision& d) {
    if (!d.active()) return 0.0;
    if (ratings.empty()) throw std::invalid_argument("vehicle_ux: no ratings for active decision");
    double sum = 0.0;
    for (double r : ratings) sum += r;
    return sum / static_cast<double>(ratings.size());
}

/// Names of violated thresholds, in a stable order. Bounds are inclusive:
/// a metric exactly at its threshold satisfies it.
inline std::vector<std::string> check_qos_constraints(double latency_s, double energy_j,
                                                      double cost, double ux, double reliability,
                                                      double quality, const Thresholds& t) {
    std::vector<std::string> v;
    if (latency_s > t.latency_max_s) v.push_back("latency");
    if (energy_j > t.energy_max_j) v.push_back("energy");
    if (cost > t.cost_max) v.push_back("cost");
    if (ux < t.ux_min) v.push_back("ux");
    if (reliability < t.reliability_min) v.push_back("reliability");
    if (quality < t.quality_min) v.push_back("quality");
    return v;
}

}  // namespace vtmig
