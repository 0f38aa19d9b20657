#pragma once

// Independent reference implementations used to check the library: grid
// searches, finite differences, a discrete-event M/M/s priority queue and a
// two-dimensional Stackelberg solver. Nothing here calls the code paths it
// verifies.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <vector>

#include "vtmig/common.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// 1-D grid argmax
// ---------------------------------------------------------------------------

struct GridResult {
    double x = 0.0;
    double value = -std::numeric_limits<double>::infinity();
};

inline GridResult grid_argmax(const std::function<double(double)>& f, double lo, double hi,
                              double step) {
    GridResult best;
    for (double x = lo; x <= hi + 1e-15; x += step) {
        const double v = f(std::min(x, hi));
        if (v > best.value) {
            best.value = v;
            best.x = std::min(x, hi);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Central finite differences
// ---------------------------------------------------------------------------

/// Gradient of f at x by central differences with step h.
inline std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                             std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f(x);
        x[i] = saved - h;
        const double fm = f(x);
        x[i] = saved;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b,
                            double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Discrete-event M/M/s queue with non-preemptive priorities
// ---------------------------------------------------------------------------

struct MmsResult {
    double mean_wait = 0.0;          // over all completed jobs
    std::vector<double> class_wait;  // per priority class (1 = highest first)
    double mean_queue_length = 0.0;  // time average of the waiting count
    long completed = 0;
};

/// Poisson arrivals split across priority classes, exponential service,
/// s servers, service never preempted. Event-driven; O(events log events).
inline MmsResult simulate_mms(const std::vector<double>& lambda_per_class, double mu, int servers,
                              long total_events, std::uint64_t seed) {
    vtmig::Rng rng(seed);
    const std::size_t classes = lambda_per_class.size();
    double lambda_total = 0.0;
    for (double l : lambda_per_class) lambda_total += l;

    struct Dep {
        double time;
        bool operator>(const Dep& o) const { return time > o.time; }
    };
    std::priority_queue<Dep, std::vector<Dep>, std::greater<Dep>> departures;
    std::vector<std::deque<double>> waiting(classes);  // arrival times, FIFO per class

    double now = 0.0;
    double next_arrival = rng.exponential(lambda_total);
    int busy = 0;
    long arrivals = 0;
    double wait_sum = 0.0;
    std::vector<double> class_wait_sum(classes, 0.0);
    std::vector<long> class_count(classes, 0);
    long completed = 0;
    double qlen_integral = 0.0;
    double last_time = 0.0;

    auto queue_size = [&]() {
        std::size_t n = 0;
        for (const auto& q : waiting) n += q.size();
        return static_cast<double>(n);
    };
    auto start_service = [&](int cls, double arrived) {
        wait_sum += now - arrived;
        class_wait_sum[static_cast<std::size_t>(cls)] += now - arrived;
        ++class_count[static_cast<std::size_t>(cls)];
        ++completed;  // counted at service start; waiting stats are what we need
        ++busy;
        departures.push({now + rng.exponential(mu)});
    };

    while (arrivals < total_events) {
        const double next_dep =
            departures.empty() ? std::numeric_limits<double>::infinity() : departures.top().time;
        const double t = std::min(next_arrival, next_dep);
        qlen_integral += queue_size() * (t - last_time);
        last_time = t;
        now = t;
        if (next_arrival <= next_dep) {
            ++arrivals;
            // class by thinning
            double u = rng.uniform() * lambda_total;
            std::size_t cls = 0;
            for (; cls + 1 < classes; ++cls) {
                if (u < lambda_per_class[cls]) break;
                u -= lambda_per_class[cls];
            }
            if (busy < servers)
                start_service(static_cast<int>(cls), now);
            else
                waiting[cls].push_back(now);
            next_arrival = now + rng.exponential(lambda_total);
        } else {
            departures.pop();
            --busy;
            for (std::size_t cls = 0; cls < classes; ++cls) {
                if (!waiting[cls].empty()) {
                    const double arrived = waiting[cls].front();
                    waiting[cls].pop_front();
                    start_service(static_cast<int>(cls), arrived);
                    break;
                }
            }
        }
    }

    MmsResult r;
    r.completed = completed;
    r.mean_wait = completed > 0 ? wait_sum / completed : 0.0;
    r.class_wait.resize(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c)
        if (class_count[c] > 0) r.class_wait[c] = class_wait_sum[c] / class_count[c];
    r.mean_queue_length = last_time > 0 ? qlen_integral / last_time : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Exhaustive two-stage pricing-game solver (1 vehicle, 1 edge, 1 cloud)
// ---------------------------------------------------------------------------

struct TinyGame {
    double eta_v = 2.0;
    double eta_j = 2.0;
    double cost_j = 0.0;
    double cost_i = 0.0;
    double cap_j = 100.0;   // edge capacity
    double cap_i = 1000.0;  // cloud capacity
    double price_lo = 0.1;
    double price_hi = 5.0;
    int price_grid = 200;
};

struct TinySolution {
    double theta_j = 0.0, theta_i = 0.0;
    double beta_v = 0.0, beta_j = 0.0;
    double util_v = 0.0, util_j = 0.0, util_i = 0.0;
};

/// Brute force: follower responses by fine grid search (no closed forms),
/// leaders by exhaustive scans over the full (theta_j, theta_i) grid.
inline TinySolution tiny_game_grid_oracle(const TinyGame& g, double beta_step = 1e-3) {
    auto surplus = [](double eta, double theta, double beta) {
        return eta * std::log1p(beta) - theta * beta;
    };
    auto respond = [&](double eta, double theta, double cap) {
        return grid_argmax([&](double b) { return surplus(eta, theta, b); }, 0.0, cap, beta_step);
    };
    auto grid_price = [&](int t) {
        return g.price_lo + (g.price_hi - g.price_lo) * static_cast<double>(t) / (g.price_grid - 1);
    };

    TinySolution best;
    double best_uj = -std::numeric_limits<double>::infinity();
    // stage 2: edge picks theta_j against the vehicle's gridded response
    for (int t = 0; t < g.price_grid; ++t) {
        const double theta_j = grid_price(t);
        const auto bv = respond(g.eta_v, theta_j, g.cap_j);
        if (bv.x > g.cap_j + 1e-12) continue;
        const double uj = (theta_j - g.cost_j) * bv.x;
        if (uj > best_uj + 1e-12) {
            best_uj = uj;
            best.theta_j = theta_j;
            best.beta_v = bv.x;
        }
    }
    // stage 1: cloud picks theta_i against the edge's gridded response
    double best_ui = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < g.price_grid; ++t) {
        const double theta_i = grid_price(t);
        const auto bj = respond(g.eta_j, theta_i, g.cap_i);
        if (best.beta_v + bj.x > g.cap_i + 1e-12) continue;
        const double ui = (theta_i - g.cost_i) * bj.x;
        if (ui > best_ui + 1e-12) {
            best_ui = ui;
            best.theta_i = theta_i;
            best.beta_j = bj.x;
        }
    }
    best.util_v = surplus(g.eta_v, best.theta_j, best.beta_v);
    best.util_j = (best.theta_j - g.cost_j) * best.beta_v +
                  surplus(g.eta_j, best.theta_i, best.beta_j);
    best.util_i = (best.theta_i - g.cost_i) * best.beta_j;
    return best;
}

// ---------------------------------------------------------------------------
// Compensated accumulation (order-independent reference summation)
// ---------------------------------------------------------------------------

inline double kahan_sum(const std::vector<double>& xs) {
    double sum = 0.0, c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace oracle
