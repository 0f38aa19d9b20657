#pragma once

// Compact oracle battery behind the `selftest` CLI subcommand. The heavier
// acceptance suite covers the same ground with more samples.

#include <cstdio>

#include "support/oracles.hpp"
#include "vtmig/vtmig.hpp"

namespace vtmig::selftest {

inline bool check(bool ok, const char* name) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name);
    return ok;
}

inline int run() {
    bool all = true;
    Rng rng(20240817);

    // closed-form link and cost formulas against spot oracles
    {
        bool ok = true;
        for (int k = 0; k < 25; ++k) {
            LinkParams p;
            p.bandwidth_hz = rng.uniform(1e5, 5e7);
            p.tx_power_w = rng.uniform(0.1, 10.0);
            p.channel_gain = rng.uniform(0.01, 10.0);
            p.distance_m = rng.uniform(10.0, 5e4);
            p.pathloss_exp = rng.uniform(1.5, 4.0);
            p.noise_psd = rng.uniform(1e-9, 1e-5);
            const double snr =
                p.tx_power_w * p.channel_gain * std::pow(p.distance_m, -p.pathloss_exp) / p.noise_psd;
            const double expect = p.bandwidth_hz * std::log(1.0 + snr) / std::log(2.0);
            ok = ok && std::fabs(shannon_rate(p) - expect) <= 1e-9 * std::max(1.0, expect);
        }
        all &= check(ok, "shannon_rate matches independent evaluation");
    }
    {
        QueueState q{2.0, 1.0, 4, 4.0, 1.0};
        all &= check(std::fabs(queue_delay(q) - 2.0) < 1e-12, "queue_delay worked example");
        const auto sim = oracle::simulate_mms({2.0}, 1.0, 4, 200000, 7);
        QueueState qs{2.0, 1.0, 4, sim.mean_queue_length, 1.0};
        const double rel = std::fabs(queue_delay(qs) - sim.mean_wait) / sim.mean_wait;
        all &= check(rel < 0.05, "queue_delay within 5% of M/M/s simulation");
    }
    {
        // two-node propagation: normalized mixing of [1,3] -> [2,2]
        World w;
        w.ring_length_m = 1000;
        w.edges.push_back({0, 0.0, 500.0});
        w.clouds.push_back({});
        const auto g = build_graph(w);
        Gcn gcn({1, 1}, rng);
        gcn.layers()[0].weight(0, 0) = 1.0;
        gcn.layers()[0].activation = Activation::Identity;
        Mat h(2, 1);
        h << 1.0, 3.0;
        const auto out = gcn.forward(h, g).output;
        all &= check(std::fabs(out(0, 0) - 2.0) < 1e-12 && std::fabs(out(1, 0) - 2.0) < 1e-12,
                     "gcn two-node hand case");
    }
    {
        oracle::TinyGame tg;
        tg.eta_v = 2.0;
        tg.eta_j = 2.0;
        GameSpec spec;
        spec.vehicles.push_back({tg.eta_v, 0, -1});
        spec.edges.push_back({tg.eta_j, tg.cost_j, tg.cap_j, 0});
        spec.clouds.push_back({tg.cost_i, tg.cap_i});
        spec.price_lo = tg.price_lo;
        spec.price_hi = tg.price_hi;
        spec.price_grid = tg.price_grid;
        const auto got = backward_induction(spec);
        const auto want = oracle::tiny_game_grid_oracle(tg);
        const double step = (tg.price_hi - tg.price_lo) / (tg.price_grid - 1);
        bool ok = std::fabs(got.theta_j[0] - want.theta_j) <= step + 1e-9 &&
                  std::fabs(got.theta_i[0] - want.theta_i) <= step + 1e-9;
        const auto rep = verify_se(got, spec, step);
        ok = ok && rep.is_se;
        all &= check(ok, "stackelberg backward induction + equilibrium verifier");
    }
    {
        ExperimentConfig cfg;
        cfg.vehicles = 4;
        cfg.edges = 2;
        cfg.clouds = 1;
        cfg.steps_per_episode = 5;
        Env env1(cfg, 99), env2(cfg, 99);
        env1.reset(0);
        env2.reset(0);
        Rng arng(3);
        bool ok = true;
        for (int s = 0; s < 5; ++s) {
            Vec a(env1.layout().total());
            for (Eigen::Index d = 0; d < a.size(); ++d) a[d] = arng.uniform();
            const auto r1 = env1.step(a);
            const auto r2 = env2.step(a);
            ok = ok && r1.metrics.scalar_reward == r2.metrics.scalar_reward;
        }
        all &= check(ok, "environment replay determinism");
    }
    std::printf("%s\n", all ? "selftest: all checks passed" : "selftest: FAILURES");
    return all ? 0 : 3;
}

}  // namespace vtmig::selftest
