// Command-line front end: experiment runner, metric post-processing,
// equilibrium verifier and the oracle selftest battery.
//
// Exit codes: 0 ok, 1 usage, 2 config fault, 3 runtime fault.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "selftest.hpp"
#include "vtmig/vtmig.hpp"

namespace {

vtmig::GameSpec load_game_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vtmig::ConfigError("game spec not found: " + path);
    nlohmann::json j;
    in >> j;
    vtmig::GameSpec spec;
    spec.price_lo = j.value("price_lo", 0.1);
    spec.price_hi = j.value("price_hi", 5.0);
    spec.price_grid = j.value("price_grid", 200);
    spec.service_floor = j.value("service_floor", 0.0);
    for (const auto& v : j.value("vehicles", nlohmann::json::array())) {
        vtmig::VehicleBuyer b;
        b.eta = v.value("eta", 2.0);
        b.seller_edge = v.value("seller_edge", -1);
        b.seller_cloud = v.value("seller_cloud", -1);
        spec.vehicles.push_back(b);
    }
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
        vtmig::EdgePlayer p;
        p.eta = e.value("eta", 2.0);
        p.cost = e.value("cost", 0.05);
        p.capacity = e.value("capacity", 50.0);
        p.seller_cloud = e.value("seller_cloud", 0);
        spec.edges.push_back(p);
    }
    for (const auto& c : j.value("clouds", nlohmann::json::array())) {
        vtmig::CloudPlayer p;
        p.cost = c.value("cost", 0.02);
        p.capacity = c.value("capacity", 500.0);
        spec.clouds.push_back(p);
    }
    return spec;
}

int cmd_run(const std::string& config_path, std::uint64_t seed_override, bool seed_given,
            std::vector<std::string> algos, const std::string& out_dir, std::string run_id,
            bool dump_embeddings) {
    auto cfg = vtmig::load_config(config_path);
    if (seed_given) {
        cfg.seed = seed_override;
        cfg.seeds.clear();
    }
    if (algos.empty()) algos = {"mo-maddpg"};
    for (const auto& a : algos) {
        const auto& known = vtmig::known_algorithms();
        if (std::find(known.begin(), known.end(), a) == known.end())
            throw vtmig::ConfigError("unknown algorithm '" + a + "'");
    }
    if (run_id.empty())
        run_id = "run-" + std::to_string(vtmig::config_hash(cfg) % 100000000ull);

    if (dump_embeddings) {
        // dedicated single-stream run with per-step embedding records
        vtmig::Env env(cfg, cfg.seed);
        vtmig::MoMaddpgTrainer trainer(cfg, env, cfg.seed, 5);
        std::filesystem::create_directories(out_dir + "/" + run_id);
        std::ofstream dump(out_dir + "/" + run_id + "/embeddings.csv");
        dump << "episode,step,node,dims...\n";
        trainer.callbacks().on_embeddings = [&](int ep, int s, const vtmig::Mat& z) {
            for (Eigen::Index n = 0; n < z.rows(); ++n) {
                dump << ep << ',' << s << ',' << n;
                for (Eigen::Index d = 0; d < z.cols(); ++d) dump << ',' << z(n, d);
                dump << '\n';
            }
        };
        trainer.train();
        std::printf("embeddings written under %s/%s\n", out_dir.c_str(), run_id.c_str());
        return 0;
    }

    const auto summaries =
        vtmig::run_experiment(cfg, algos, cfg.effective_seeds(), out_dir, run_id);
    std::printf("%-12s %12s %10s %10s %10s %8s %10s\n", "algorithm", "final_rew", "loss",
                "latency", "energy", "qoe", "wall_s");
    for (const auto& s : summaries)
        std::printf("%-12s %12.4f %10.4f %10.3f %10.3f %8.4f %10.1f\n", s.algorithm.c_str(),
                    s.final_reward, s.mean_loss, s.mean_latency, s.mean_energy, s.mean_qoe,
                    s.wall_clock_s);
    std::printf("metrics under %s/%s\n", out_dir.c_str(), run_id.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-tier twin-migration simulator and learner"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "train/evaluate algorithms and persist metrics");
    std::string config_path, out_dir = "runs", run_id;
    std::vector<std::string> algos;
    std::uint64_t seed = 0;
    bool dump_embeddings = false;
    run->add_option("--config", config_path, "experiment config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
    run->add_option("--algo", algos, "mo-maddpg|maddpg|madqn|ga|random (repeatable)");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--run-id", run_id, "run identifier (default: config hash)");
    run->add_flag("--dump-embeddings", dump_embeddings, "write per-step node embeddings");

    // summarize
    auto* sum = app.add_subcommand("summarize", "aggregate a run directory into summary.csv");
    std::string sum_dir;
    int trend_window = 50;
    sum->add_option("dir", sum_dir, "run directory with metric csv files")->required();
    sum->add_option("--window", trend_window, "final-window length");

    // emit-plots
    auto* plots = app.add_subcommand("emit-plots", "write tidy per-figure data files");
    std::string plots_dir;
    plots->add_option("dir", plots_dir, "run directory with metric csv files")->required();

    // verify-equilibrium
    auto* veq = app.add_subcommand("verify-equilibrium", "solve a game spec and check the SE");
    std::string game_path;
    double grid_step = 0.0;
    veq->add_option("spec", game_path, "game spec json file")->required();
    veq->add_option("--grid-step", grid_step, "deviation grid step (default: solver grid)");

    // dump-world
    auto* dump = app.add_subcommand("dump-world", "sample a world and print it as json lines");
    std::string dump_config;
    std::uint64_t dump_seed = 0;
    int dump_steps = 0;
    dump->add_option("--config", dump_config, "experiment config file")->required();
    auto* dump_seed_opt = dump->add_option("--seed", dump_seed, "override the config seed");
    dump->add_option("--steps", dump_steps, "mobility steps to advance before dumping");

    // selftest
    app.add_subcommand("selftest", "run the built-in oracle battery");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand("run"))
            return cmd_run(config_path, seed, seed_opt->count() > 0, algos, out_dir, run_id,
                           dump_embeddings);
        if (app.got_subcommand("summarize")) {
            const auto summaries = vtmig::summarize(sum_dir, trend_window);
            std::printf("%-12s %12s %10s %10s %10s %8s %8s\n", "algorithm", "final_rew", "loss",
                        "latency", "energy", "qoe", "msr");
            for (const auto& s : summaries)
                std::printf("%-12s %12.4f %10.4f %10.3f %10.3f %8.4f %8.4f\n", s.algorithm.c_str(),
                            s.final_reward, s.mean_loss, s.mean_latency, s.mean_energy, s.mean_qoe,
                            s.migration_success_rate);
            std::printf("table written to %s/summary.csv\n", sum_dir.c_str());
            return 0;
        }
        if (app.got_subcommand("emit-plots")) {
            const auto files = vtmig::emit_plots_data(plots_dir);
            for (const auto& f : files) std::printf("wrote %s/plots/%s\n", plots_dir.c_str(), f.c_str());
            return 0;
        }
        if (app.got_subcommand("verify-equilibrium")) {
            const auto spec = load_game_spec(game_path);
            const auto outcome = vtmig::backward_induction(spec);
            std::printf("prices theta_j:");
            for (double t : outcome.theta_j) std::printf(" %.6g", t);
            std::printf("\nprices theta_i:");
            for (double t : outcome.theta_i) std::printf(" %.6g", t);
            std::printf("\ndemands beta_v:");
            for (double b : outcome.beta_v) std::printf(" %.6g", b);
            std::printf("\ndemands beta_j:");
            for (double b : outcome.beta_j) std::printf(" %.6g", b);
            std::printf("\nsystem utility: %.6g\n", outcome.system_utility);
            const double step =
                grid_step > 0 ? grid_step
                              : (spec.price_hi - spec.price_lo) / (spec.price_grid - 1);
            const auto rep = vtmig::verify_se(outcome, spec, step);
            std::printf("stackelberg equilibrium: %s (worst deviation gain %.3g%s%s)\n",
                        rep.is_se ? "yes" : "NO", rep.worst_gain,
                        rep.worst_player.empty() ? "" : ", by ",
                        rep.worst_player.c_str());
            return rep.is_se ? 0 : 3;
        }
        if (app.got_subcommand("dump-world")) {
            auto cfg = vtmig::load_config(dump_config);
            if (dump_seed_opt->count() > 0) cfg.seed = dump_seed;
            vtmig::Rng rng(vtmig::derive_seed(cfg.seed, "scenario", 0));
            auto world = vtmig::make_world(rng, cfg);
            for (int s = 0; s < dump_steps; ++s) vtmig::step_mobility(world, cfg.step_seconds);
            vtmig::dump_world(world, std::cout);
            return 0;
        }
        if (app.got_subcommand("selftest")) return vtmig::selftest::run();
    } catch (const vtmig::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
