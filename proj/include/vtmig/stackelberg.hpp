#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtmig/common.hpp"

namespace vtmig {

struct GameInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A vehicle buyer in the pricing game. It buys from exactly one seller:
/// its serving edge or, for direct cloud hosting, a cloud.
struct VehicleBuyer {
    double eta = 2.0;      // satisfaction coefficient
    int seller_edge = -1;  // exactly one of these is >= 0
    int seller_cloud = -1;
};

/// An edge node: leader toward its vehicles, follower toward its cloud.
struct EdgePlayer {
    double eta = 2.0;       // satisfaction coefficient for cloud resources
    double cost = 0.05;     // marginal cost of serving a resource unit
    double capacity = 50.0; // chi_j
    int seller_cloud = 0;   // which cloud it buys from
};

struct CloudPlayer {
    double cost = 0.02;
    double capacity = 500.0;  // chi_i, shared by its edges and direct vehicles
};

struct GameSpec {
    std::vector<VehicleBuyer> vehicles;
    std::vector<EdgePlayer> edges;
    std::vector<CloudPlayer> clouds;
    double price_lo = 0.1;
    double price_hi = 5.0;
    int price_grid = 200;
    double service_floor = 0.0;  // minimum allocation per served buyer

    void validate() const {
        if (price_lo < 0 || price_lo >= price_hi || price_grid < 2)
            throw std::invalid_argument("game spec: bad price grid");
        for (const auto& v : vehicles) {
            if (v.eta <= 0) throw std::invalid_argument("game spec: vehicle eta must be > 0");
            if ((v.seller_edge >= 0) == (v.seller_cloud >= 0))
                throw std::invalid_argument("game spec: vehicle needs exactly one seller");
        }
        for (const auto& e : edges)
            if (e.eta <= 0 || e.capacity <= 0)
                throw std::invalid_argument("game spec: edge eta/capacity must be > 0");
        for (const auto& c : clouds)
            if (c.capacity <= 0) throw std::invalid_argument("game spec: cloud capacity must be > 0");
    }
};

struct StackelbergOutcome {
    std::vector<double> beta_v;   // per vehicle
    std::vector<double> beta_j;   // per edge
    std::vector<double> theta_j;  // per edge
    std::vector<double> theta_i;  // per cloud
    std::vector<double> util_v;
    std::vector<double> util_j;
    std::vector<double> util_i;
    double system_utility = 0.0;
};

/// Buyer surplus: diminishing-returns satisfaction minus payment.
inline double follower_utility(double eta, double theta, double beta) {
    return eta * std::log1p(beta) - theta * beta;
}

/// Maximizer of eta*ln(1+beta) - theta*beta on [0, cap]:
/// beta* = clamp(eta/theta - 1, 0, cap).
inline double follower_best_response(double eta, double theta, double capacity_cap) {
    if (eta <= 0) throw std::domain_error("follower_best_response: eta must be > 0");
    if (theta <= 0) {
        if (!std::isfinite(capacity_cap))
            throw std::domain_error("follower_best_response: zero price with unbounded cap");
        return std::max(0.0, capacity_cap);
    }
    return clamp(eta / theta - 1.0, 0.0, std::max(0.0, capacity_cap));
}

namespace gamedetail {

/// Best response with the service floor and individual rationality applied:
/// a buyer either takes at least the floor (when worth it) or opts out.
inline double floored_response(double eta, double theta, double cap, double floor) {
    double b = follower_best_response(eta, theta, cap);
    if (b <= 0.0) return 0.0;
    if (floor > 0.0) {
        if (floor > cap) return 0.0;  // cannot serve at the floor
        b = std::max(b, floor);
    }
    return follower_utility(eta, theta, b) < 0.0 ? 0.0 : b;
}

struct PriceSolution {
    double theta = 0.0;
    std::vector<double> demands;
    double profit = 0.0;
    bool feasible = true;  // false: every grid price overloads capacity
};

/// Grid argmax of (theta - cost) * sum(beta(theta)) over feasible prices.
/// Ties break toward the lowest price. When no price is feasible, returns
/// feasible=false with demands at price_hi proportionally clamped.
inline PriceSolution price_grid_argmax(const std::vector<double>& etas, double cost,
                                       double capacity, double lo, double hi, int n,
                                       double floor, double per_buyer_cap) {
    PriceSolution best;
    bool found = false;
    std::vector<double> demands(etas.size());
    for (int t = 0; t < n; ++t) {
        const double theta = lo + (hi - lo) * static_cast<double>(t) / (n - 1);
        double sum = 0.0;
        for (std::size_t k = 0; k < etas.size(); ++k) {
            demands[k] = floored_response(etas[k], theta, per_buyer_cap, floor);
            sum += demands[k];
        }
        if (sum > capacity + 1e-12) continue;  // infeasible price
        const double profit = (theta - cost) * sum;
        if (!found || profit > best.profit + 1e-12) {
            best = {theta, demands, profit, true};
            found = true;
        }
    }
    if (found) return best;
    // no feasible price: sell at the cap, hard-clamped proportionally
    best.theta = hi;
    best.feasible = false;
    double sum = 0.0;
    for (std::size_t k = 0; k < etas.size(); ++k) {
        demands[k] = floored_response(etas[k], hi, per_buyer_cap, floor);
        sum += demands[k];
    }
    if (sum > capacity) {
        const double scale = capacity / sum;
        for (auto& d : demands) {
            d *= scale;
            if (floor > 0.0 && d > 0.0 && d < floor) d = 0.0;  // floor wins over the clamp
        }
    }
    sum = 0.0;
    for (double d : demands) sum += d;
    best.demands = demands;
    best.profit = (hi - cost) * sum;
    return best;
}

}  // namespace gamedetail

/// Optimal price for one leader over its followers, per the grid rule.
/// Throws when the followers list is empty or no grid price is feasible.
inline double leader_price(const GameSpec& spec, const std::vector<double>& follower_etas,
                           double marginal_cost, double capacity) {
    if (follower_etas.empty()) throw std::invalid_argument("leader_price: no followers");
    auto sol = gamedetail::price_grid_argmax(follower_etas, marginal_cost, capacity, spec.price_lo,
                                             spec.price_hi, spec.price_grid, spec.service_floor,
                                             capacity);
    if (!sol.feasible) throw GameInfeasible("leader_price: empty feasible price set");
    return sol.theta;
}

/// Two-stage backward induction. The inner stage (edges pricing vehicles)
/// is solved first; then the outer stage (clouds pricing edges and any
/// directly hosted vehicles) against the induced demands.
inline StackelbergOutcome backward_induction(const GameSpec& spec) {
    spec.validate();
    const std::size_t nv = spec.vehicles.size();
    const std::size_t ne = spec.edges.size();
    const std::size_t nc = spec.clouds.size();
    StackelbergOutcome out;
    out.beta_v.assign(nv, 0.0);
    out.beta_j.assign(ne, 0.0);
    out.theta_j.assign(ne, spec.price_lo);
    out.theta_i.assign(nc, spec.price_lo);
    out.util_v.assign(nv, 0.0);
    out.util_j.assign(ne, 0.0);
    out.util_i.assign(nc, 0.0);

    if (spec.service_floor > 0.0) {
        for (const auto& e : spec.edges)
            if (spec.service_floor > e.capacity)
                throw GameInfeasible("backward_induction: capacity below service floor");
        for (const auto& c : spec.clouds)
            if (spec.service_floor > c.capacity)
                throw GameInfeasible("backward_induction: capacity below service floor");
    }

    // stage 2: each edge prices the vehicles it serves
    for (std::size_t j = 0; j < ne; ++j) {
        std::vector<double> etas;
        std::vector<std::size_t> members;
        for (std::size_t v = 0; v < nv; ++v)
            if (spec.vehicles[v].seller_edge == static_cast<int>(j)) {
                etas.push_back(spec.vehicles[v].eta);
                members.push_back(v);
            }
        const auto& e = spec.edges[j];
        auto sol = gamedetail::price_grid_argmax(etas, e.cost, e.capacity, spec.price_lo,
                                                 spec.price_hi, spec.price_grid,
                                                 spec.service_floor, e.capacity);
        out.theta_j[j] = sol.theta;
        for (std::size_t k = 0; k < members.size(); ++k) out.beta_v[members[k]] = sol.demands[k];
    }

    // stage 1: each cloud prices its edge followers and direct vehicles.
    // Vehicle demand served by its edges passes through to the cloud pool,
    // so the cloud's own sales fit into the remaining capacity.
    for (std::size_t i = 0; i < nc; ++i) {
        double passthrough = 0.0;
        for (std::size_t v = 0; v < nv; ++v) {
            const int se = spec.vehicles[v].seller_edge;
            if (se >= 0 && spec.edges[static_cast<std::size_t>(se)].seller_cloud == static_cast<int>(i))
                passthrough += out.beta_v[v];
        }
        const auto& c = spec.clouds[i];
        if (passthrough > c.capacity) {
            // hierarchy overloaded: scale the hosted vehicle demand to fit
            const double scale = c.capacity / passthrough;
            for (std::size_t v = 0; v < nv; ++v) {
                const int se = spec.vehicles[v].seller_edge;
                if (se >= 0 &&
                    spec.edges[static_cast<std::size_t>(se)].seller_cloud == static_cast<int>(i))
                    out.beta_v[v] *= scale;
            }
            passthrough = c.capacity;
        }
        const double free_capacity = c.capacity - passthrough;

        std::vector<double> etas;
        std::vector<int> kinds;  // 0 = edge follower, 1 = direct vehicle
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < ne; ++j)
            if (spec.edges[j].seller_cloud == static_cast<int>(i)) {
                etas.push_back(spec.edges[j].eta);
                kinds.push_back(0);
                members.push_back(j);
            }
        for (std::size_t v = 0; v < nv; ++v)
            if (spec.vehicles[v].seller_cloud == static_cast<int>(i)) {
                etas.push_back(spec.vehicles[v].eta);
                kinds.push_back(1);
                members.push_back(v);
            }
        auto sol = gamedetail::price_grid_argmax(etas, c.cost, free_capacity, spec.price_lo,
                                                 spec.price_hi, spec.price_grid,
                                                 spec.service_floor, free_capacity);
        out.theta_i[i] = sol.theta;
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (kinds[k] == 0)
                out.beta_j[members[k]] = sol.demands[k];
            else
                out.beta_v[members[k]] = sol.demands[k];
        }
        out.util_i[i] = sol.profit;
    }

    // utilities, from the final (possibly clamped) demands
    for (std::size_t v = 0; v < nv; ++v) {
        const auto& b = spec.vehicles[v];
        const double theta =
            b.seller_edge >= 0 ? out.theta_j[static_cast<std::size_t>(b.seller_edge)]
                               : out.theta_i[static_cast<std::size_t>(b.seller_cloud)];
        out.util_v[v] = follower_utility(b.eta, theta, out.beta_v[v]);
    }
    for (std::size_t j = 0; j < ne; ++j) {
        const auto& e = spec.edges[j];
        double sold = 0.0;
        for (std::size_t v = 0; v < nv; ++v)
            if (spec.vehicles[v].seller_edge == static_cast<int>(j)) sold += out.beta_v[v];
        out.util_j[j] =
            (out.theta_j[j] - e.cost) * sold +
            follower_utility(e.eta, out.theta_i[static_cast<std::size_t>(e.seller_cloud)],
                             out.beta_j[j]);
    }
    out.system_utility = 0.0;
    for (double u : out.util_v) out.system_utility += u;
    for (double u : out.util_j) out.system_utility += u;
    for (double u : out.util_i) out.system_utility += u;
    return out;
}

struct SeReport {
    bool is_se = true;
    double worst_gain = 0.0;
    std::string worst_player;
};

namespace gamedetail {

/// Leader payoff at an arbitrary price with its followers re-responding.
/// Returns -inf when the induced demand is infeasible.
inline double leader_payoff(const std::vector<double>& etas, double theta, double cost,
                            double capacity, double floor) {
    double sum = 0.0;
    for (double eta : etas) sum += floored_response(eta, theta, capacity, floor);
    if (sum > capacity + 1e-12) return -std::numeric_limits<double>::infinity();
    return (theta - cost) * sum;
}

}  // namespace gamedetail

/// Check Definition-1 stability: no player can raise its own utility by a
/// unilateral grid deviation. Follower deviations respect remaining seller
/// capacity and the service floor; leader deviations assume followers
/// re-respond.
inline SeReport verify_se(const StackelbergOutcome& out, const GameSpec& spec, double grid_step) {
    SeReport rep;
    auto consider = [&](double gain, const std::string& who) {
        if (gain > rep.worst_gain) {
            rep.worst_gain = gain;
            rep.worst_player = who;
        }
    };

    // follower deviations: scan beta on {0} U [floor, beta* + slack]
    auto scan_follower = [&](double eta, double theta, double beta_star, double slack,
                             const std::string& who) {
        const double base = follower_utility(eta, theta, beta_star);
        const double cap = beta_star + std::max(0.0, slack);
        consider(follower_utility(eta, theta, 0.0) - base, who);
        const double lo = spec.service_floor;
        for (double b = lo; b <= cap + 1e-15; b += grid_step)
            consider(follower_utility(eta, theta, std::min(b, cap)) - base, who);
    };

    // capacity use along the hierarchy; edge-hosted vehicle demand also
    // occupies the backing cloud's pool
    std::vector<double> edge_used(spec.edges.size(), 0.0);
    std::vector<double> cloud_used(spec.clouds.size(), 0.0);
    for (std::size_t v = 0; v < spec.vehicles.size(); ++v) {
        const auto& b = spec.vehicles[v];
        if (b.seller_edge >= 0) {
            edge_used[static_cast<std::size_t>(b.seller_edge)] += out.beta_v[v];
            cloud_used[static_cast<std::size_t>(
                spec.edges[static_cast<std::size_t>(b.seller_edge)].seller_cloud)] += out.beta_v[v];
        } else {
            cloud_used[static_cast<std::size_t>(b.seller_cloud)] += out.beta_v[v];
        }
    }
    for (std::size_t j = 0; j < spec.edges.size(); ++j)
        cloud_used[static_cast<std::size_t>(spec.edges[j].seller_cloud)] += out.beta_j[j];

    for (std::size_t v = 0; v < spec.vehicles.size(); ++v) {
        const auto& b = spec.vehicles[v];
        const bool via_edge = b.seller_edge >= 0;
        const double theta = via_edge ? out.theta_j[static_cast<std::size_t>(b.seller_edge)]
                                      : out.theta_i[static_cast<std::size_t>(b.seller_cloud)];
        double slack;
        if (via_edge) {
            const auto je = static_cast<std::size_t>(b.seller_edge);
            const auto ic = static_cast<std::size_t>(spec.edges[je].seller_cloud);
            slack = std::min(spec.edges[je].capacity - edge_used[je],
                             spec.clouds[ic].capacity - cloud_used[ic]);
        } else {
            const auto ic = static_cast<std::size_t>(b.seller_cloud);
            slack = spec.clouds[ic].capacity - cloud_used[ic];
        }
        scan_follower(b.eta, theta, out.beta_v[v], slack, "vehicle " + std::to_string(v));
    }

    // edges: follower role toward their cloud, leader role toward vehicles
    for (std::size_t j = 0; j < spec.edges.size(); ++j) {
        const auto& e = spec.edges[j];
        const auto ci = static_cast<std::size_t>(e.seller_cloud);
        scan_follower(e.eta, out.theta_i[ci], out.beta_j[j], spec.clouds[ci].capacity - cloud_used[ci],
                      "edge " + std::to_string(j) + " (demand)");

        std::vector<double> etas;
        std::vector<double> betas;
        for (std::size_t v = 0; v < spec.vehicles.size(); ++v)
            if (spec.vehicles[v].seller_edge == static_cast<int>(j)) {
                etas.push_back(spec.vehicles[v].eta);
                betas.push_back(out.beta_v[v]);
            }
        double sold = 0.0;
        for (double b : betas) sold += b;
        const double base = (out.theta_j[j] - e.cost) * sold;
        for (double th = spec.price_lo; th <= spec.price_hi + 1e-15; th += grid_step) {
            const double pay = gamedetail::leader_payoff(etas, std::min(th, spec.price_hi), e.cost,
                                                         e.capacity, spec.service_floor);
            consider(pay - base, "edge " + std::to_string(j) + " (price)");
        }
    }

    for (std::size_t i = 0; i < spec.clouds.size(); ++i) {
        const auto& c = spec.clouds[i];
        std::vector<double> etas;
        double sold = 0.0;
        double passthrough = 0.0;
        for (std::size_t v = 0; v < spec.vehicles.size(); ++v) {
            const int se = spec.vehicles[v].seller_edge;
            if (se >= 0 &&
                spec.edges[static_cast<std::size_t>(se)].seller_cloud == static_cast<int>(i))
                passthrough += out.beta_v[v];
        }
        for (std::size_t j = 0; j < spec.edges.size(); ++j)
            if (spec.edges[j].seller_cloud == static_cast<int>(i)) {
                etas.push_back(spec.edges[j].eta);
                sold += out.beta_j[j];
            }
        for (std::size_t v = 0; v < spec.vehicles.size(); ++v)
            if (spec.vehicles[v].seller_cloud == static_cast<int>(i)) {
                etas.push_back(spec.vehicles[v].eta);
                sold += out.beta_v[v];
            }
        const double free_capacity = std::max(0.0, c.capacity - passthrough);
        const double base = (out.theta_i[i] - c.cost) * sold;
        for (double th = spec.price_lo; th <= spec.price_hi + 1e-15; th += grid_step) {
            const double pay = gamedetail::leader_payoff(etas, std::min(th, spec.price_hi), c.cost,
                                                         free_capacity, spec.service_floor);
            consider(pay - base, "cloud " + std::to_string(i) + " (price)");
        }
    }

    rep.is_se = rep.worst_gain <= 1e-6;
    return rep;
}

}  // namespace vtmig
