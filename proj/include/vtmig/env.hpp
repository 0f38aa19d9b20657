#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <vector>

#include "vtmig/costs.hpp"
#include "vtmig/gcn.hpp"
#include "vtmig/graph.hpp"
#include "vtmig/netlink.hpp"
#include "vtmig/scenario.hpp"
#include "vtmig/stackelberg.hpp"

namespace vtmig {

// ---------------------------------------------------------------------------
// Reward vector and scalarization
// ---------------------------------------------------------------------------

/// Raw per-objective reward components. ux and util are gains; lat, en and
/// cost are expenditures (the scalarizer applies the signs).
struct RewardVector {
    double r_ux = 0.0;
    double r_util = 0.0;
    double r_lat = 0.0;
    double r_en = 0.0;
    double r_cost = 0.0;

    Vec as_vec() const {
        Vec v(5);
        v << r_ux, r_util, r_lat, r_en, r_cost;
        return v;
    }
    static RewardVector from_vec(const Vec& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
};

struct ObjectiveWeights {
    double ux = 0.2, util = 0.2, lat = 0.2, en = 0.2, cost = 0.2;

    static ObjectiveWeights from_config(const ExperimentConfig& c) {
        return {c.omega_ux, c.omega_util, c.omega_lat, c.omega_en, c.omega_cost};
    }
    /// Signed weights in objective order (ux, util, lat, en, cost).
    std::array<double, 5> signed_weights() const { return {ux, util, -lat, -en, -cost}; }
};

/// omega1*ux + omega2*util - (omega3*lat + omega4*en + omega5*cost)
inline double scalarize(const ObjectiveWeights& w, const RewardVector& r) {
    return w.ux * r.r_ux + w.util * r.r_util - (w.lat * r.r_lat + w.en * r.r_en + w.cost * r.r_cost);
}

// ---------------------------------------------------------------------------
// Action layout
// ---------------------------------------------------------------------------

/// Per-agent action slices within the flat joint-action vector.
/// vehicle: [local, edge, cloud, resource_request, offload_fraction, qos]
/// edge:    [alloc, host, link_split]
/// cloud:   [alloc, analyse, host]
struct ActionLayout {
    int n_vehicles = 0;
    int n_edges = 0;
    int n_clouds = 0;

    static constexpr int kVehicleDims = 6;
    static constexpr int kEdgeDims = 3;
    static constexpr int kCloudDims = 3;

    int total() const { return kVehicleDims * n_vehicles + kEdgeDims * n_edges + kCloudDims * n_clouds; }
    int vehicle_offset(int v) const { return kVehicleDims * v; }
    int edge_offset(int j) const { return kVehicleDims * n_vehicles + kEdgeDims * j; }
    int cloud_offset(int i) const {
        return kVehicleDims * n_vehicles + kEdgeDims * n_edges + kCloudDims * i;
    }
    int agent_count() const { return n_vehicles + n_edges + n_clouds; }
    int agent_offset(int agent) const {
        if (agent < n_vehicles) return vehicle_offset(agent);
        if (agent < n_vehicles + n_edges) return edge_offset(agent - n_vehicles);
        return cloud_offset(agent - n_vehicles - n_edges);
    }
    int agent_dims(int agent) const {
        if (agent < n_vehicles) return kVehicleDims;
        if (agent < n_vehicles + n_edges) return kEdgeDims;
        return kCloudDims;
    }
};

// ---------------------------------------------------------------------------
// Step bookkeeping
// ---------------------------------------------------------------------------

/// Tallies for constraints C1..C10 (index 0 = C1).
struct ConstraintTallies {
    std::array<int, 10> checked{};
    std::array<int, 10> violated{};
    std::array<double, 10> magnitude{};  // summed normalized violation sizes

    void note(int c, bool ok, double mag = 1.0) {
        ++checked[static_cast<std::size_t>(c - 1)];
        if (!ok) {
            ++violated[static_cast<std::size_t>(c - 1)];
            magnitude[static_cast<std::size_t>(c - 1)] += mag;
        }
    }
};

/// Per-task outcome of one step, for metric sinks and composition tests.
struct TaskRecord {
    int vehicle = -1;
    Route route = Route::None;
    int dest = -1;
    double latency_s = 0.0;
    double energy_j = 0.0;
    double cost = 0.0;
    double ux = 0.0;
    double uplink_rate_bps = 0.0;
    bool success = false;   // active route finished within the task deadline
    bool denied_bw = false;
};

struct StepMetrics {
    RewardVector reward;
    double scalar_reward = 0.0;
    double mean_latency_s = 0.0;  // over active (migrated) tasks
    double mean_energy_j = 0.0;
    double mean_cost = 0.0;
    double mean_ux = 0.0;
    double system_utility = 0.0;
    int active_tasks = 0;
    int local_tasks = 0;
    int migration_attempts = 0;
    int migration_successes = 0;
    int mask_events = 0;  // multi-flag requests resolved by masking
    ConstraintTallies tallies;
    std::vector<TaskRecord> tasks;
    std::vector<MigrationFlags> final_flags;   // post-masking decision flags
    std::vector<VtTaskProfile> final_tasks;    // offloaded task shares, same order
    bool game_resolved = false;
};

/// Observation bundle handed to learners.
struct EnvView {
    Mat features;   // raw node features, nodes x 5
    Mat adjacency;  // current communication graph
    Vec global;     // global state vector
    std::vector<Vec> locals;  // one per agent: vehicles, then edges, then clouds
};

struct StepResult {
    EnvView next;
    RewardVector reward;
    bool done = false;
    StepMetrics metrics;
};

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

/// Discrete-time three-tier world: routing, radio physics, queueing,
/// energy/cost/UX accounting, pricing-game refresh and the team reward.
class Env {
public:
    static constexpr int kGlobalDims = 18;
    static constexpr int kVehicleObsDims = 16;
    static constexpr int kEdgeObsDims = 10;
    static constexpr int kCloudObsDims = 10;

    Env(const ExperimentConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), seed_(seed), weights_(ObjectiveWeights::from_config(cfg)),
          ux_params_(UxParams::from_config(cfg)), thresholds_(Thresholds::from_config(cfg)) {
        layout_.n_vehicles = cfg.vehicles;
        layout_.n_edges = cfg.edges;
        layout_.n_clouds = cfg.clouds;
    }

    const ActionLayout& layout() const { return layout_; }
    const World& world() const { return world_; }
    const ObjectiveWeights& weights() const { return weights_; }
    int steps_per_episode() const { return cfg_.steps_per_episode; }

    int obs_dims(int agent) const {
        if (agent < layout_.n_vehicles) return kVehicleObsDims;
        if (agent < layout_.n_vehicles + layout_.n_edges) return kEdgeObsDims;
        return kCloudObsDims;
    }

    /// Start an episode. Worlds repeat with the configured scenario cycle so
    /// that trend windows compare like-for-like scenario batches.
    EnvView reset(int episode) {
        episode_ = episode;
        const int scenario =
            cfg_.scenario_cycle > 0 ? episode % cfg_.scenario_cycle : episode;
        rng_ = Rng(derive_seed(seed_, "scenario", static_cast<std::uint64_t>(scenario)));
        world_ = make_world(rng_, cfg_);
        step_ = 0;
        edge_state_.assign(world_.edges.size(), ServerState{});
        cloud_state_.assign(world_.clouds.size(), ServerState{});
        for (auto& s : cloud_state_) s.reliability = Ewma(0.1, 1.0);
        for (auto& s : edge_state_) s.reliability = Ewma(0.1, 1.0);
        last_beta_.assign(world_.vehicles.size(), 0.0);
        last_util_v_.assign(world_.vehicles.size(), 0.0);
        vehicle_metrics_.assign(world_.vehicles.size(), TaskRecord{});
        traffic_local_ = Ewma(2.0 / (cfg_.ewma_window + 1.0));
        traffic_edge_ = Ewma(2.0 / (cfg_.ewma_window + 1.0));
        traffic_cloud_ = Ewma(2.0 / (cfg_.ewma_window + 1.0));
        perf_ = RewardVector{};
        game_outcome_ = StackelbergOutcome{};
        game_trigger_ = true;  // refresh pricing at episode start
        spawn_tasks();
        return view();
    }

    /// Apply one joint action. Invalid continuous components are clipped and
    /// conflicting decision flags masked; a wrong action size is a fault.
    StepResult step(const Vec& joint_action) {
        if (joint_action.size() != layout_.total())
            throw std::invalid_argument("env step: joint action dimension mismatch");
        if (step_ >= cfg_.steps_per_episode) throw std::logic_error("env step: episode finished");

        Vec a = joint_action.cwiseMax(0.0).cwiseMin(1.0);
        StepMetrics m;
        std::fill(vehicle_metrics_.begin(), vehicle_metrics_.end(), TaskRecord{});

        // --- decode and route -------------------------------------------------
        struct Plan {
            int vehicle;
            MigrationDecision decision;
            VtTaskProfile remote;   // offloaded share
            double local_cycles;    // cycles kept on the vehicle
            double res_req = 0.5;
            bool denied = false;
        };
        std::vector<Plan> plans;

        for (auto& v : world_.vehicles) {
            if (!v.pending_task) continue;
            const auto& task = *v.pending_task;
            const int off = layout_.vehicle_offset(v.id);
            const bool req_edge = a[off + 1] > 0.5;
            const bool req_cloud = a[off + 2] > 0.5;

            int tier;  // 0 local, 1 edge, 2 cloud
            if (req_edge && req_cloud) {
                ++m.mask_events;
                m.tallies.note(2, false);  // C2 violation before masking
                tier = a[off + 1] >= a[off + 2] ? 1 : 2;
            } else {
                m.tallies.note(2, true);
                tier = req_edge ? 1 : (req_cloud ? 2 : 0);
            }
            m.tallies.note(1, true);  // decisions are binary by construction

            const auto assoc = associate(v, world_);
            Plan p;
            p.vehicle = v.id;
            p.res_req = a[off + 3];
            const double offload = clamp01(a[off + 4]);
            p.remote = task;
            p.remote.data_volume_bits = task.data_volume_bits * offload;
            p.local_cycles = task.total_cycles() * (1.0 - offload);
            // qos action re-classes the task before queueing
            p.remote.priority_class =
                1 + std::min(cfg_.priority_classes - 1,
                             static_cast<int>(clamp01(a[off + 5]) * cfg_.priority_classes));

            const bool hosted_edge = v.vt_status == VtStatus::HostedEdge && v.host_id >= 0;
            const bool exited = hosted_edge && !covers(v.host_id, v);
            const bool overloaded =
                hosted_edge &&
                edge_state_[static_cast<std::size_t>(v.host_id)].load_ratio > cfg_.overload_threshold;
            if (exited || overloaded) game_trigger_ = true;

            if (tier == 0) {
                p.decision.route = Route::None;
                p.local_cycles = task.total_cycles();  // everything stays on board
            } else if (hosted_edge && (exited || overloaded) &&
                       edge_forwarding(a, v.host_id) && cloud_accepting(a)) {
                p.decision.route = Route::EdgeToCloud;
                p.decision.source_edge = v.host_id;
                p.decision.destination = pick_cloud();
            } else if (tier == 1 && assoc.nearest_edge >= 0) {
                p.decision.route = Route::VehicleToEdge;
                p.decision.destination = assoc.nearest_edge;
            } else {
                // cloud tier, or edge tier without coverage
                if (cloud_accepting(a)) {
                    p.decision.route = Route::VehicleToCloud;
                    p.decision.destination = pick_cloud();
                } else if (assoc.nearest_edge >= 0) {
                    p.decision.route = Route::VehicleToEdge;
                    p.decision.destination = assoc.nearest_edge;
                } else {
                    p.decision.route = Route::None;
                    p.local_cycles = task.total_cycles();
                }
            }
            plans.push_back(std::move(p));
        }

        // --- bandwidth arbitration (C4): grant uplinks in priority order ------
        std::vector<double> edge_bw_used(world_.edges.size(), 0.0);
        std::vector<double> cloud_bw_used(world_.clouds.size(), 0.0);
        {
            std::vector<std::size_t> order(plans.size());
            std::iota(order.begin(), order.end(), 0u);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                if (plans[x].remote.priority_class != plans[y].remote.priority_class)
                    return plans[x].remote.priority_class < plans[y].remote.priority_class;
                return plans[x].vehicle < plans[y].vehicle;
            });
            for (auto idx : order) {
                auto& p = plans[idx];
                if (p.decision.route == Route::None) {
                    m.tallies.note(4, true);
                    continue;
                }
                const double bw = p.remote.bandwidth_req_hz;
                double* pool = nullptr;
                double cap = 0.0;
                if (p.decision.route == Route::VehicleToCloud) {
                    pool = &cloud_bw_used[static_cast<std::size_t>(p.decision.destination)];
                    cap = world_.clouds[static_cast<std::size_t>(p.decision.destination)].bandwidth_hz;
                } else {
                    const int j = p.decision.route == Route::EdgeToCloud ? p.decision.source_edge
                                                                         : p.decision.destination;
                    pool = &edge_bw_used[static_cast<std::size_t>(j)];
                    cap = world_.edges[static_cast<std::size_t>(j)].bandwidth_hz;
                }
                if (*pool + bw > cap + 1e-9) {
                    // no channel available: run locally this slot
                    m.tallies.note(4, false, bw / cap);
                    p.decision = MigrationDecision{};
                    p.local_cycles = world_.vehicles[static_cast<std::size_t>(p.vehicle)]
                                         .pending_task->total_cycles();
                    p.denied = true;
                } else {
                    *pool += bw;
                    m.tallies.note(4, true);
                }
            }
        }

        // post-masking flags, for the channel-constraint invariant
        for (const auto& p : plans) {
            MigrationFlags f;
            f.vehicle = p.vehicle;
            switch (p.decision.route) {
                case Route::VehicleToEdge:
                    f.to_edge = true;
                    f.edge_id = p.decision.destination;
                    break;
                case Route::VehicleToCloud:
                    f.to_cloud = true;
                    f.cloud_id = p.decision.destination;
                    break;
                case Route::EdgeToCloud:
                    f.edge_to_cloud = true;
                    f.edge_id = p.decision.source_edge;
                    f.cloud_id = p.decision.destination;
                    break;
                case Route::None:
                    break;
            }
            m.final_flags.push_back(f);
            m.final_tasks.push_back(p.remote);
        }

        // --- execution placement counts (for CPU sharing and queues) ----------
        std::vector<int> edge_exec(world_.edges.size(), 0);
        std::vector<int> cloud_exec(world_.clouds.size(), 0);
        for (const auto& p : plans) {
            if (p.decision.route == Route::VehicleToEdge)
                ++edge_exec[static_cast<std::size_t>(p.decision.destination)];
            else if (p.decision.route != Route::None)
                ++cloud_exec[static_cast<std::size_t>(p.decision.destination)];
        }

        // --- pricing game refresh ---------------------------------------------
        for (int i = 0; i < layout_.n_clouds; ++i)
            if (a[layout_.cloud_offset(i) + 1] > 0.5) game_trigger_ = true;
        if (game_trigger_) {
            resolve_game(plans, a);
            game_trigger_ = false;
            m.game_resolved = true;
        }
        m.system_utility = game_outcome_.system_utility;

        // --- physics, costs, experience ---------------------------------------
        const double dt = cfg_.step_seconds;
        const double mean_cycles = cfg_.task_cycles_mean();
        std::vector<int> tier_counts(3, 0);
        double sum_lat = 0, sum_en = 0, sum_cost = 0, sum_ux = 0;
        double pen_lat = 0, pen_en = 0, pen_cost = 0, pen_ux = 0;

        for (auto& p : plans) {
            auto& v = world_.vehicles[static_cast<std::size_t>(p.vehicle)];
            TaskRecord rec;
            rec.vehicle = p.vehicle;
            rec.route = p.decision.route;
            rec.dest = p.decision.destination;
            rec.denied_bw = p.denied;

            if (p.decision.route == Route::None) {
                ++m.local_tasks;
                ++tier_counts[0];
                rec.latency_s = v.local_cpu_hz > 0 ? p.local_cycles / v.local_cpu_hz : 0.0;
                vehicle_metrics_[static_cast<std::size_t>(p.vehicle)] = rec;
                v.vt_status = VtStatus::Local;
                v.host_id = -1;
                continue;
            }

            ++m.active_tasks;
            ++m.migration_attempts;

            const bool to_edge = p.decision.route == Route::VehicleToEdge;
            const int dest = p.decision.destination;
            const int src_edge = p.decision.source_edge;
            ++tier_counts[to_edge ? 1 : 2];

            // uplink rate
            LinkParams up;
            up.bandwidth_hz = p.remote.bandwidth_req_hz;
            up.tx_power_w = v.tx_power_w;
            up.channel_gain = cfg_.channel_gain;
            up.pathloss_exp = cfg_.pathloss_exp;
            up.noise_psd = cfg_.noise_power;
            if (p.decision.route == Route::VehicleToCloud) {
                up.distance_m = cfg_.vehicle_cloud_distance_m;
            } else {
                const int j = to_edge ? dest : src_edge;
                up.distance_m = std::max(
                    1.0, world_.ring_distance(v.position_m,
                                              world_.edges[static_cast<std::size_t>(j)].position_m));
            }
            const double rate_up = shannon_rate(up);
            rec.uplink_rate_bps = rate_up;

            LatencyComponents lat;
            EnergyInputs en_in;
            en_in.vehicle_tx_power_w = v.tx_power_w;
            en_in.energy_times_cycles = cfg_.energy_times_cycles;
            double price_theta = 0.0;
            double reliability = 1.0;

            lat.tx = tx_latency(p.remote, rate_up);

            if (to_edge) {
                const auto& e = world_.edges[static_cast<std::size_t>(dest)];
                auto& es = edge_state_[static_cast<std::size_t>(dest)];
                const double alloc = 0.25 + 0.75 * a[layout_.edge_offset(dest) + 0];
                const double f_share =
                    alloc * e.cpu_hz / std::max(1, edge_exec[static_cast<std::size_t>(dest)]);
                lat.exec = exec_latency(p.remote, f_share);
                lat.queue = server_queue_delay(es, 1, alloc * e.cpu_hz / mean_cycles,
                                               edge_exec[static_cast<std::size_t>(dest)],
                                               p.remote.priority_class);
                en_in.src_capacitance = e.switch_capacitance;
                en_in.src_cpu_hz = f_share;
                en_in.uplink_rate_bps = rate_up;
                price_theta = es.price_theta;
                reliability = es.reliability.value();
                v.vt_status = VtStatus::HostedEdge;
                v.host_id = dest;
            } else {
                const auto& c = world_.clouds[static_cast<std::size_t>(dest)];
                auto& cs = cloud_state_[static_cast<std::size_t>(dest)];
                const double alloc = 0.25 + 0.75 * a[layout_.cloud_offset(dest) + 0];
                const double f_share =
                    alloc * c.cpu_hz / std::max(1, cloud_exec[static_cast<std::size_t>(dest)]);
                const double mu = alloc * c.cpu_hz / mean_cycles / c.server_count;
                lat.queue = server_queue_delay(cs, c.server_count, mu,
                                               cloud_exec[static_cast<std::size_t>(dest)],
                                               p.remote.priority_class);
                en_in.dst_capacitance = c.switch_capacitance;
                en_in.dst_cpu_hz = f_share;
                en_in.uplink_rate_bps = rate_up;
                price_theta = cs.price_theta;
                reliability = cs.reliability.value();
                if (p.decision.route == Route::EdgeToCloud) {
                    const auto& se = world_.edges[static_cast<std::size_t>(src_edge)];
                    LinkParams bh;
                    bh.bandwidth_hz = cfg_.backhaul_bandwidth_hz *
                                      (0.25 + 0.75 * a[layout_.edge_offset(src_edge) + 2]);
                    bh.tx_power_w = se.tx_power_w;
                    bh.channel_gain = cfg_.backhaul_gain;
                    bh.distance_m = cfg_.backhaul_distance_m;
                    bh.pathloss_exp = cfg_.backhaul_pathloss_exp;
                    bh.noise_psd = cfg_.noise_power;
                    const double rate_bh = shannon_rate(bh);
                    lat.migrate = tx_latency(p.remote, rate_bh);
                    lat.reinstate = reinstantiation_delay(p.remote, f_share);
                    // the source edge also burns execution energy before handing off
                    const double src_alloc = 0.25 + 0.75 * a[layout_.edge_offset(src_edge) + 0];
                    en_in.src_capacitance = se.switch_capacitance;
                    en_in.src_cpu_hz = src_alloc * se.cpu_hz;
                    en_in.edge_tx_power_w = se.tx_power_w;
                    en_in.backhaul_rate_bps = rate_bh;
                    lat.exec = 0.0;  // execution happens at the destination after re-instantiation
                    v.vt_status = VtStatus::Migrating;
                } else {
                    lat.exec = exec_latency(p.remote, f_share);
                    v.vt_status = VtStatus::HostedCloud;
                }
                v.host_id = dest;
            }

            const double remote_latency = total_latency(p.decision, lat);
            const double local_latency = v.local_cpu_hz > 0 ? p.local_cycles / v.local_cpu_hz : 0.0;
            rec.latency_s = std::max(remote_latency, local_latency);

            const auto energy_parts = energy(p.decision, p.remote, en_in);
            rec.energy_j = energy_parts.total;

            const double theta_norm =
                (price_theta - cfg_.game_price_lo) / (cfg_.game_price_hi - cfg_.game_price_lo);
            const double price =
                cfg_.price_mode == PriceMode::PerMb
                    ? cfg_.price_min_per_mb +
                          (cfg_.price_max_per_mb - cfg_.price_min_per_mb) * clamp01(theta_norm)
                    : cfg_.price_per_cycle * (0.5 + clamp01(theta_norm));
            rec.cost = migration_cost(p.remote, price, cfg_.price_mode);

            // service quality: share of the task's QoS budget respected
            int q_ok = 0;
            q_ok += rec.latency_s <= thresholds_.latency_max_s ? 1 : 0;
            q_ok += rec.energy_j <= thresholds_.energy_max_j ? 1 : 0;
            q_ok += rec.cost <= thresholds_.cost_max ? 1 : 0;
            const double quality = q_ok / 3.0;

            const double rating = ux_rating(rec.latency_s, quality, reliability, ux_params_);
            rec.ux = vehicle_ux({rating}, p.decision);

            rec.success = rec.latency_s <= p.remote.deadline_s;

            // threshold constraints C5..C10 become penalties
            m.tallies.note(5, rec.latency_s <= thresholds_.latency_max_s,
                           std::max(0.0, rec.latency_s - thresholds_.latency_max_s) /
                               thresholds_.latency_max_s);
            m.tallies.note(6, rec.energy_j <= thresholds_.energy_max_j,
                           std::max(0.0, rec.energy_j - thresholds_.energy_max_j) /
                               thresholds_.energy_max_j);
            m.tallies.note(7, rec.cost <= thresholds_.cost_max,
                           std::max(0.0, rec.cost - thresholds_.cost_max) / thresholds_.cost_max);
            m.tallies.note(8, rec.ux >= thresholds_.ux_min,
                           std::max(0.0, thresholds_.ux_min - rec.ux) /
                               std::max(1e-9, thresholds_.ux_min));
            m.tallies.note(9, reliability >= thresholds_.reliability_min,
                           std::max(0.0, thresholds_.reliability_min - reliability));
            m.tallies.note(10, quality >= thresholds_.quality_min,
                           std::max(0.0, thresholds_.quality_min - quality));

            pen_lat += std::max(0.0, rec.latency_s - thresholds_.latency_max_s) /
                       thresholds_.latency_max_s;
            pen_en +=
                std::max(0.0, rec.energy_j - thresholds_.energy_max_j) / thresholds_.energy_max_j;
            pen_cost += std::max(0.0, rec.cost - thresholds_.cost_max) / thresholds_.cost_max;
            pen_ux += std::max(0.0, thresholds_.ux_min - rec.ux) / std::max(1e-9, thresholds_.ux_min) +
                      std::max(0.0, thresholds_.reliability_min - reliability) +
                      std::max(0.0, thresholds_.quality_min - quality);

            sum_lat += rec.latency_s;
            sum_en += rec.energy_j;
            sum_cost += rec.cost;
            sum_ux += rec.ux;
            vehicle_metrics_[static_cast<std::size_t>(p.vehicle)] = rec;

            // reliability feedback to the serving node
            if (to_edge)
                edge_state_[static_cast<std::size_t>(dest)].reliability.observe(rec.success ? 1.0 : 0.0);
            else
                cloud_state_[static_cast<std::size_t>(dest)].reliability.observe(rec.success ? 1.0 : 0.0);
        }

        m.migration_successes = 0;
        for (const auto& p : plans) {
            const auto& rec = vehicle_metrics_[static_cast<std::size_t>(p.vehicle)];
            if (p.decision.route != Route::None && rec.success) ++m.migration_successes;
        }

        // --- compute-capacity bookkeeping (C3) ---------------------------------
        for (std::size_t j = 0; j < world_.edges.size(); ++j) {
            double cycles = 0.0;
            for (const auto& p : plans)
                if (p.decision.route == Route::VehicleToEdge &&
                    p.decision.destination == static_cast<int>(j))
                    cycles += p.remote.total_cycles();
            const double budget = world_.edges[j].cpu_hz * dt;
            edge_state_[j].load_ratio = clamp01(cycles / budget);
            if (edge_exec[j] > 0) {
                const double over = std::max(0.0, cycles - budget) / budget;
                m.tallies.note(3, cycles <= budget, over);
                pen_lat += over;
            }
        }
        for (std::size_t i = 0; i < world_.clouds.size(); ++i) {
            double cycles = 0.0;
            for (const auto& p : plans)
                if (p.decision.route != Route::None &&
                    p.decision.route != Route::VehicleToEdge &&
                    p.decision.destination == static_cast<int>(i))
                    cycles += p.remote.total_cycles();
            const double budget =
                world_.clouds[i].cpu_hz * world_.clouds[i].server_count * dt;
            cloud_state_[i].load_ratio = clamp01(cycles / budget);
            if (cloud_exec[i] > 0) {
                const double over = std::max(0.0, cycles - budget) / budget;
                m.tallies.note(3, cycles <= budget, over);
                pen_lat += over;
            }
        }

        // --- queues advance -----------------------------------------------------
        const double mean_cycles_all = cfg_.task_cycles_mean();
        for (std::size_t j = 0; j < world_.edges.size(); ++j) {
            auto& es = edge_state_[j];
            const double alloc = 0.25 + 0.75 * a[layout_.edge_offset(static_cast<int>(j)) + 0];
            const double mu = alloc * world_.edges[j].cpu_hz / mean_cycles_all;
            es.lambda.observe(edge_exec[j] / dt);
            es.queue_len = std::max(0.0, es.queue_len + edge_exec[j] - mu * dt);
            es.bw_used_frac = edge_bw_used[j] / world_.edges[j].bandwidth_hz;
        }
        for (std::size_t i = 0; i < world_.clouds.size(); ++i) {
            auto& cs = cloud_state_[i];
            const double alloc = 0.25 + 0.75 * a[layout_.cloud_offset(static_cast<int>(i)) + 0];
            const double mu =
                alloc * world_.clouds[i].cpu_hz / mean_cycles_all * world_.clouds[i].server_count;
            cs.lambda.observe(cloud_exec[i] / dt);
            cs.queue_len = std::max(0.0, cs.queue_len + cloud_exec[i] - mu * dt);
            cs.bw_used_frac = cloud_bw_used[i] / world_.clouds[i].bandwidth_hz;
        }

        // --- EWMAs, rewards -----------------------------------------------------
        const double nveh = std::max(1, layout_.n_vehicles);
        traffic_local_.observe(tier_counts[0] / nveh);
        traffic_edge_.observe(tier_counts[1] / nveh);
        traffic_cloud_.observe(tier_counts[2] / nveh);

        RewardVector r;
        if (m.active_tasks > 0) {
            const double n = m.active_tasks;
            m.mean_latency_s = sum_lat / n;
            m.mean_energy_j = sum_en / n;
            m.mean_cost = sum_cost / n;
            m.mean_ux = sum_ux / n;
            r.r_ux = m.mean_ux / thresholds_.ux_min - cfg_.penalty_coeff * pen_ux / n;
            r.r_lat = m.mean_latency_s / thresholds_.latency_max_s + cfg_.penalty_coeff * pen_lat / n;
            r.r_en = m.mean_energy_j / thresholds_.energy_max_j + cfg_.penalty_coeff * pen_en / n;
            r.r_cost = m.mean_cost / thresholds_.cost_max + cfg_.penalty_coeff * pen_cost / n;
        }
        r.r_util = m.system_utility / cfg_.utility_norm;
        m.reward = r;
        m.scalar_reward = scalarize(weights_, r);
        perf_ = r;
        m.tasks.reserve(plans.size());
        for (const auto& p : plans) m.tasks.push_back(vehicle_metrics_[static_cast<std::size_t>(p.vehicle)]);
        last_tallies_ = m.tallies;

        // --- world advances -----------------------------------------------------
        step_mobility(world_, dt);
        ++step_;
        const bool done = step_ >= cfg_.steps_per_episode;
        spawn_tasks();

        StepResult out;
        out.next = view();
        out.reward = r;
        out.done = done;
        out.metrics = std::move(m);
        return out;
    }

    /// Tallies of the constraints checked during the last step.
    const ConstraintTallies& feasibility_report() const { return last_tallies_; }

    const StackelbergOutcome& game_outcome() const { return game_outcome_; }

    /// Current observation bundle (also returned by reset/step).
    EnvView view() const {
        EnvView v;
        const auto graph = build_graph(world_);
        v.adjacency = graph.adjacency;
        v.features = assemble_features(graph);
        v.global = assemble_global();
        v.locals.reserve(static_cast<std::size_t>(layout_.agent_count()));
        for (int agent = 0; agent < layout_.agent_count(); ++agent)
            v.locals.push_back(assemble_local(agent));
        return v;
    }

    struct ServerState {
        double queue_len = 0.0;
        Ewma lambda{0.2};
        Ewma reliability{0.1, 1.0};
        double price_theta = 0.0;
        double utility = 0.0;
        double load_ratio = 0.0;
        double bw_used_frac = 0.0;
    };

    const std::vector<ServerState>& edge_states() const { return edge_state_; }
    const std::vector<ServerState>& cloud_states() const { return cloud_state_; }

private:
    bool covers(int edge_id, const Vehicle& v) const {
        const auto& e = world_.edges[static_cast<std::size_t>(edge_id)];
        return world_.ring_distance(v.position_m, e.position_m) <= e.coverage_radius_m;
    }

    bool edge_forwarding(const Vec& a, int edge_id) const {
        return a[layout_.edge_offset(edge_id) + 1] > 0.5;
    }

    bool cloud_accepting(const Vec& a) const {
        for (int i = 0; i < layout_.n_clouds; ++i)
            if (a[layout_.cloud_offset(i) + 2] > 0.5) return true;
        return false;
    }

    /// Least-backlogged cloud, lowest id on ties.
    int pick_cloud() const {
        int best = 0;
        for (std::size_t i = 1; i < cloud_state_.size(); ++i)
            if (cloud_state_[i].queue_len < cloud_state_[best].queue_len)
                best = static_cast<int>(i);
        return best;
    }

    double server_queue_delay(const ServerState& s, int servers, double mu_per_server,
                              int arrivals, int priority_class) const {
        QueueState q;
        q.servers = servers;
        q.service_rate = std::max(1e-9, mu_per_server);
        q.queue_length = s.queue_len + arrivals;
        q.priority_weight = priority_class;
        // the analytic form needs a stable queue; cap the smoothed arrivals
        q.arrival_rate = std::min(s.lambda.value(), 0.99 * q.servers * q.service_rate);
        return queue_delay(q);
    }

    void spawn_tasks() {
        for (auto& v : world_.vehicles) {
            if (rng_.uniform() < cfg_.task_arrival_prob)
                v.pending_task = sample_task(rng_, cfg_);
            else
                v.pending_task.reset();
        }
    }

    template <typename Plans>
    void resolve_game(const Plans& plans, const Vec&) {
        GameSpec spec;
        spec.price_lo = cfg_.game_price_lo;
        spec.price_hi = cfg_.game_price_hi;
        spec.price_grid = cfg_.game_price_grid;
        spec.service_floor = cfg_.game_service_floor;
        std::vector<int> buyer_vehicle;
        for (const auto& p : plans) {
            if (p.decision.route == Route::None) continue;
            VehicleBuyer b;
            b.eta = cfg_.game_eta_vehicle * (0.5 + p.res_req);
            if (p.decision.route == Route::VehicleToCloud)
                b.seller_cloud = p.decision.destination;
            else
                b.seller_edge = p.decision.route == Route::EdgeToCloud ? p.decision.source_edge
                                                                       : p.decision.destination;
            buyer_vehicle.push_back(p.vehicle);
            spec.vehicles.push_back(b);
        }
        for (std::size_t j = 0; j < world_.edges.size(); ++j) {
            EdgePlayer e;
            e.eta = cfg_.game_eta_edge * (0.5 + edge_state_[j].load_ratio);
            e.cost = cfg_.game_cost_edge;
            e.capacity = world_.edges[j].capacity_units;
            e.seller_cloud = static_cast<int>(j) % std::max(1, layout_.n_clouds);
            spec.edges.push_back(e);
        }
        for (const auto& c : world_.clouds)
            spec.clouds.push_back({cfg_.game_cost_cloud, c.capacity_units});

        game_outcome_ = backward_induction(spec);
        for (std::size_t j = 0; j < world_.edges.size(); ++j) {
            edge_state_[j].price_theta = game_outcome_.theta_j[j];
            edge_state_[j].utility = game_outcome_.util_j[j];
        }
        for (std::size_t i = 0; i < world_.clouds.size(); ++i) {
            cloud_state_[i].price_theta = game_outcome_.theta_i[i];
            cloud_state_[i].utility = game_outcome_.util_i[i];
        }
        std::fill(last_beta_.begin(), last_beta_.end(), 0.0);
        std::fill(last_util_v_.begin(), last_util_v_.end(), 0.0);
        for (std::size_t k = 0; k < buyer_vehicle.size(); ++k) {
            last_beta_[static_cast<std::size_t>(buyer_vehicle[k])] = game_outcome_.beta_v[k];
            last_util_v_[static_cast<std::size_t>(buyer_vehicle[k])] = game_outcome_.util_v[k];
        }
    }

    Mat assemble_features(const NetworkGraph& g) const {
        Mat h = Mat::Zero(g.node_count(), NodeFeature::kDims);
        for (const auto& v : world_.vehicles) {
            const auto& rec = vehicle_metrics_[static_cast<std::size_t>(v.id)];
            NodeFeature f;
            f.ux = rec.ux;
            f.utility = last_util_v_[static_cast<std::size_t>(v.id)];
            f.latency = rec.latency_s;
            f.energy = rec.energy_j;
            f.mig_cost = rec.cost;
            h.row(g.vehicle_node(v.id)) = f.as_vec().transpose();
        }
        auto server_row = [&](int node, const ServerState& s, auto pred) {
            double n = 0, lat = 0, en = 0, cost = 0, ux = 0;
            for (const auto& rec : vehicle_metrics_)
                if (rec.vehicle >= 0 && pred(rec)) {
                    ++n;
                    lat += rec.latency_s;
                    en += rec.energy_j;
                    cost += rec.cost;
                    ux += rec.ux;
                }
            NodeFeature f;
            f.utility = s.utility;
            if (n > 0) {
                f.ux = ux / n;
                f.latency = lat / n;
                f.energy = en / n;
                f.mig_cost = cost / n;
            }
            h.row(node) = f.as_vec().transpose();
        };
        for (std::size_t j = 0; j < world_.edges.size(); ++j)
            server_row(g.edge_node(static_cast<int>(j)), edge_state_[j], [&](const TaskRecord& r) {
                return r.route == Route::VehicleToEdge && r.dest == static_cast<int>(j);
            });
        for (std::size_t i = 0; i < world_.clouds.size(); ++i)
            server_row(g.cloud_node(static_cast<int>(i)), cloud_state_[i], [&](const TaskRecord& r) {
                return (r.route == Route::VehicleToCloud || r.route == Route::EdgeToCloud) &&
                       r.dest == static_cast<int>(i);
            });
        return h;
    }

    Vec assemble_global() const {
        Vec g = Vec::Zero(kGlobalDims);
        double edge_load = 0, edge_bw = 0, cloud_load = 0, cloud_bw = 0;
        for (const auto& s : edge_state_) {
            edge_load += s.load_ratio;
            edge_bw += s.bw_used_frac;
        }
        for (const auto& s : cloud_state_) {
            cloud_load += s.load_ratio;
            cloud_bw += s.bw_used_frac;
        }
        const double ne = std::max<std::size_t>(1, edge_state_.size());
        const double nc = std::max<std::size_t>(1, cloud_state_.size());
        double veh_cpu = 0;
        int covered = 0, loc = 0, hosted_e = 0, hosted_c = 0;
        for (const auto& v : world_.vehicles) {
            veh_cpu += v.local_cpu_hz / cfg_.vehicle_cpu_max_hz;
            if (associate(v, world_).nearest_edge >= 0) ++covered;
            switch (v.vt_status) {
                case VtStatus::Local: ++loc; break;
                case VtStatus::HostedEdge: ++hosted_e; break;
                default: ++hosted_c; break;
            }
        }
        const double nv = std::max(1, layout_.n_vehicles);
        g[0] = 1.0 - edge_load / ne;
        g[1] = 1.0 - cloud_load / nc;
        g[2] = 1.0 - edge_bw / ne;
        g[3] = 1.0 - cloud_bw / nc;
        g[4] = veh_cpu / nv;
        g[5] = edge_load / ne;
        g[6] = traffic_local_.value();
        g[7] = traffic_edge_.value();
        g[8] = traffic_cloud_.value();
        g[9] = covered / nv;
        g[10] = loc / nv;
        g[11] = hosted_e / nv;
        g[12] = hosted_c / nv;
        g[13] = perf_.r_lat;
        g[14] = perf_.r_en;
        g[15] = perf_.r_ux;
        g[16] = perf_.r_cost;
        g[17] = perf_.r_util;
        return g;
    }

    Vec assemble_local(int agent) const {
        if (agent < layout_.n_vehicles) {
            const auto& v = world_.vehicles[static_cast<std::size_t>(agent)];
            const auto assoc = associate(v, world_);
            Vec o = Vec::Zero(kVehicleObsDims);
            o[0] = v.position_m / world_.ring_length_m;
            o[1] = v.velocity_mps / std::max(1.0, cfg_.speed_max_mps);
            o[2] = assoc.nearest_edge >= 0 ? 1.0 : 0.0;
            o[3] = assoc.edge_ids.size() / std::max(1.0, static_cast<double>(layout_.n_edges));
            o[4] = v.vt_status == VtStatus::Local ? 1.0 : 0.0;
            o[5] = v.vt_status == VtStatus::HostedEdge ? 1.0 : 0.0;
            o[6] = v.vt_status == VtStatus::HostedCloud ? 1.0 : 0.0;
            if (v.pending_task) {
                const auto& t = *v.pending_task;
                o[7] = 1.0;
                o[8] = t.data_volume_bits / (cfg_.task_size_max_mb * 8e6);
                o[9] = t.total_cycles() / (cfg_.task_cycles_max_gc * 1e9);
                o[10] = t.deadline_s / cfg_.thr_latency_s;
                o[11] = static_cast<double>(t.priority_class) / cfg_.priority_classes;
                o[12] = t.bandwidth_req_hz / cfg_.task_bw_req_max_hz;
            }
            o[13] = v.local_cpu_hz / cfg_.vehicle_cpu_max_hz;
            o[14] = last_beta_[static_cast<std::size_t>(agent)] / 10.0;
            o[15] = v.vt_status == VtStatus::Migrating ? 1.0 : 0.0;
            return o;
        }
        if (agent < layout_.n_vehicles + layout_.n_edges) {
            const int j = agent - layout_.n_vehicles;
            const auto& e = world_.edges[static_cast<std::size_t>(j)];
            const auto& s = edge_state_[static_cast<std::size_t>(j)];
            Vec o = Vec::Zero(kEdgeObsDims);
            o[0] = e.cpu_hz / cfg_.edge_cpu_max_hz;
            o[1] = s.bw_used_frac;
            o[2] = s.load_ratio;
            o[3] = s.queue_len / 10.0;
            o[4] = s.lambda.value() / std::max(1.0, static_cast<double>(layout_.n_vehicles));
            o[5] = s.reliability.value();
            o[6] = (s.price_theta - cfg_.game_price_lo) / (cfg_.game_price_hi - cfg_.game_price_lo);
            o[7] = s.utility / cfg_.utility_norm;
            o[8] = s.load_ratio > cfg_.overload_threshold ? 1.0 : 0.0;
            o[9] = e.capacity_units / std::max(1.0, cfg_.game_capacity_edge);
            return o;
        }
        const int i = agent - layout_.n_vehicles - layout_.n_edges;
        const auto& c = world_.clouds[static_cast<std::size_t>(i)];
        const auto& s = cloud_state_[static_cast<std::size_t>(i)];
        Vec o = Vec::Zero(kCloudObsDims);
        o[0] = c.cpu_hz / cfg_.cloud_cpu_max_hz;
        o[1] = s.bw_used_frac;
        o[2] = s.queue_len / 10.0;
        o[3] = s.load_ratio;
        o[4] = s.lambda.value() / std::max(1.0, static_cast<double>(layout_.n_vehicles));
        o[5] = s.reliability.value();
        o[6] = (s.price_theta - cfg_.game_price_lo) / (cfg_.game_price_hi - cfg_.game_price_lo);
        o[7] = s.utility / cfg_.utility_norm;
        o[8] = c.server_count / 8.0;
        o[9] = traffic_cloud_.value();
        return o;
    }

    ExperimentConfig cfg_;
    std::uint64_t seed_;
    ObjectiveWeights weights_;
    UxParams ux_params_;
    Thresholds thresholds_;
    ActionLayout layout_;
    Rng rng_{0};
    World world_;
    int episode_ = 0;
    int step_ = 0;
    std::vector<ServerState> edge_state_;
    std::vector<ServerState> cloud_state_;
    std::vector<double> last_beta_;
    std::vector<double> last_util_v_;
    std::vector<TaskRecord> vehicle_metrics_;
    Ewma traffic_local_{0.18};
    Ewma traffic_edge_{0.18};
    Ewma traffic_cloud_{0.18};
    RewardVector perf_;
    StackelbergOutcome game_outcome_;
    bool game_trigger_ = true;
    ConstraintTallies last_tallies_;
};

}  // namespace vtmig
