#pragma once

#include <algorithm>
#include <vector>

#include "vtmig/learner.hpp"

namespace vtmig {

/// Independent per-agent DQN over the discretized action grid; trains on the
/// pre-scalarized team reward.
class MadqnTrainer {
public:
    MadqnTrainer(const ExperimentConfig& cfg, Env& env, std::uint64_t seed)
        : cfg_(cfg), env_(env), seed_(seed), weights_(ObjectiveWeights::from_config(cfg)),
          buffer_(static_cast<std::size_t>(cfg.replay_capacity)), norm_(NodeFeature::kDims),
          sample_rng_(derive_seed(seed, "sample")), explore_rng_(derive_seed(seed, "explore")) {
        const auto& layout = env.layout();
        n_agents_ = layout.agent_count();
        Rng grng(derive_seed(seed, "gcn"));
        gcn_ = Gcn({NodeFeature::kDims, cfg.gcn_hidden, cfg.gcn_out}, grng);
        for (int x = 0; x < n_agents_; ++x) {
            const int obs = cfg.gcn_out + env.obs_dims(x);
            const int actions = grid_size(x);
            Rng qrng(derive_seed(seed, "qnet", static_cast<std::uint64_t>(x)));
            Mlp q({obs, cfg.hidden1, cfg.hidden2, actions}, {Act::ReLU, Act::ReLU, Act::Identity},
                  qrng);
            targets_.push_back(q);
            nets_.push_back(std::move(q));
            opts_.emplace_back(cfg.critic_lr);
        }
    }

    int grid_size(int agent) const {
        int n = 1;
        for (int d = 0; d < env_.layout().agent_dims(agent); ++d) n *= cfg_.madqn_bins;
        return n;
    }

    /// Decode a flat grid index into this agent's action components.
    Vec decode(int agent, int index) const {
        const int dims = env_.layout().agent_dims(agent);
        Vec a(dims);
        for (int d = 0; d < dims; ++d) {
            a[d] = static_cast<double>(index % cfg_.madqn_bins) / (cfg_.madqn_bins - 1);
            index /= cfg_.madqn_bins;
        }
        return a;
    }

    int encode(int agent, const Eigen::Ref<const Vec>& slice) const {
        const int dims = env_.layout().agent_dims(agent);
        int idx = 0;
        for (int d = dims - 1; d >= 0; --d) {
            const int bin = static_cast<int>(std::lround(slice[d] * (cfg_.madqn_bins - 1)));
            idx = idx * cfg_.madqn_bins + std::clamp(bin, 0, cfg_.madqn_bins - 1);
        }
        return idx;
    }

    Vec act(const EnvView& view, double epsilon) {
        const Mat z = gcn_.forward_sn(norm_.normalize_rows(view.features),
                                      normalized_adjacency(view.adjacency))
                          .output;
        const auto& layout = env_.layout();
        Vec joint(layout.total());
        for (int x = 0; x < n_agents_; ++x) {
            int idx;
            if (explore_rng_.uniform() < epsilon) {
                idx = explore_rng_.uniform_int(0, grid_size(x) - 1);
            } else {
                Vec obs(cfg_.gcn_out + view.locals[static_cast<std::size_t>(x)].size());
                obs.head(cfg_.gcn_out) = z.row(x).transpose();
                obs.tail(view.locals[static_cast<std::size_t>(x)].size()) =
                    view.locals[static_cast<std::size_t>(x)];
                const auto c = nets_[static_cast<std::size_t>(x)].forward(obs.transpose());
                Eigen::Index best;
                c.out.row(0).maxCoeff(&best);
                idx = static_cast<int>(best);
            }
            joint.segment(layout.agent_offset(x), layout.agent_dims(x)) = decode(x, idx);
        }
        return joint;
    }

    const std::vector<EpisodeStats>& train(int episodes_override = -1) {
        const int episodes = episodes_override > 0 ? episodes_override : cfg_.episodes;
        for (int ep = 0; ep < episodes; ++ep) {
            EnvView view = env_.reset(ep);
            EpisodeStats st;
            st.episode = ep;
            const double frac = episodes > 1 ? static_cast<double>(ep) / (episodes - 1) : 1.0;
            const double eps =
                cfg_.madqn_eps_start + (cfg_.madqn_eps_end - cfg_.madqn_eps_start) * frac;
            double lat = 0, en = 0, cost = 0, ux = 0, util = 0;
            int active_steps = 0, attempts = 0, successes = 0;
            for (int s = 0; s < cfg_.steps_per_episode; ++s) {
                norm_.observe_rows(view.features);
                const Vec action = act(view, eps);
                auto res = env_.step(action);
                Experience e;
                e.features = view.features;
                e.adjacency = pack_adjacency(view.adjacency);
                e.global = view.global;
                e.locals = view.locals;
                e.action = action;
                e.reward = res.reward.as_vec();
                e.next_features = res.next.features;
                e.next_adjacency = pack_adjacency(res.next.adjacency);
                e.next_global = res.next.global;
                e.next_locals = res.next.locals;
                e.terminal = res.done;
                buffer_.add(std::move(e));
                st.reward += res.metrics.scalar_reward;
                if (res.metrics.active_tasks > 0) {
                    ++active_steps;
                    lat += res.metrics.mean_latency_s;
                    en += res.metrics.mean_energy_j;
                    cost += res.metrics.mean_cost;
                    ux += res.metrics.mean_ux;
                }
                util += res.metrics.system_utility;
                attempts += res.metrics.migration_attempts;
                successes += res.metrics.migration_successes;
                view = std::move(res.next);
            }
            if (buffer_.size() >=
                static_cast<std::size_t>(std::max(cfg_.warmup_experiences, cfg_.batch_size))) {
                double loss = 0;
                for (int u = 0; u < cfg_.updates_per_episode; ++u) loss += update_round();
                st.critic_loss = loss / cfg_.updates_per_episode;
            }
            if (active_steps > 0) {
                st.mean_latency = lat / active_steps;
                st.mean_energy = en / active_steps;
                st.mean_cost = cost / active_steps;
                st.mean_ux = ux / active_steps;
            }
            st.mean_utility = util / cfg_.steps_per_episode;
            st.migration_success_rate =
                attempts > 0 ? static_cast<double>(successes) / attempts : 0.0;
            history_.push_back(st);
        }
        return history_;
    }

private:
    double update_round() {
        double loss_total = 0.0;
        for (int x = 0; x < n_agents_; ++x) {
            const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), sample_rng_);
            const auto B = static_cast<Eigen::Index>(batch.size());
            const int od = cfg_.gcn_out + env_.obs_dims(x);
            Mat obs(B, od), obs_next(B, od);
            std::vector<int> taken(static_cast<std::size_t>(B));
            Vec target(B);
            for (Eigen::Index k = 0; k < B; ++k) {
                const auto& e = buffer_[batch[static_cast<std::size_t>(k)]];
                obs.row(k) = agent_obs(x, e.features, e.adjacency, e.locals).transpose();
                obs_next.row(k) =
                    agent_obs(x, e.next_features, e.next_adjacency, e.next_locals).transpose();
                taken[static_cast<std::size_t>(k)] = encode(
                    x, e.action.segment(env_.layout().agent_offset(x), env_.layout().agent_dims(x)));
                target[k] = scalarize(weights_, RewardVector::from_vec(e.reward));
            }
            const auto tnext = targets_[static_cast<std::size_t>(x)].forward(obs_next);
            for (Eigen::Index k = 0; k < B; ++k) {
                const auto& e = buffer_[batch[static_cast<std::size_t>(k)]];
                if (!e.terminal) target[k] += cfg_.gamma * tnext.out.row(k).maxCoeff();
            }
            const auto cache = nets_[static_cast<std::size_t>(x)].forward(obs);
            Mat dout = Mat::Zero(B, cache.out.cols());
            double loss = 0.0;
            for (Eigen::Index k = 0; k < B; ++k) {
                const double q = cache.out(k, taken[static_cast<std::size_t>(k)]);
                const double err = q - target[k];
                loss += err * err;
                dout(k, taken[static_cast<std::size_t>(k)]) = 2.0 * err / static_cast<double>(B);
            }
            loss /= static_cast<double>(B);
            auto grads = nets_[static_cast<std::size_t>(x)].backward(cache, dout);
            opts_[static_cast<std::size_t>(x)].step(nets_[static_cast<std::size_t>(x)], grads);
            soft_update(nets_[static_cast<std::size_t>(x)], targets_[static_cast<std::size_t>(x)],
                        cfg_.tau);
            loss_total += loss;
        }
        return loss_total / std::max(1, n_agents_);
    }

    Vec agent_obs(int agent, const Mat& features, const std::vector<std::uint8_t>& adjacency,
                  const std::vector<Vec>& locals) const {
        const Mat adj = unpack_adjacency(adjacency, features.rows());
        const Mat z =
            gcn_.forward_sn(norm_.normalize_rows(features), normalized_adjacency(adj)).output;
        Vec obs(cfg_.gcn_out + locals[static_cast<std::size_t>(agent)].size());
        obs.head(cfg_.gcn_out) = z.row(agent).transpose();
        obs.tail(locals[static_cast<std::size_t>(agent)].size()) =
            locals[static_cast<std::size_t>(agent)];
        return obs;
    }

    ExperimentConfig cfg_;
    Env& env_;
    std::uint64_t seed_;
    ObjectiveWeights weights_;
    int n_agents_ = 0;
    Gcn gcn_;  // fixed feature extractor; MADQN has no gradient path into it
    std::vector<Mlp> nets_, targets_;
    std::vector<Adam> opts_;
    ReplayBuffer buffer_;
    RunningNorm norm_;
    Rng sample_rng_;
    Rng explore_rng_;
    std::vector<EpisodeStats> history_;
};

/// Genetic algorithm over one episode's joint action schedule (open loop).
/// Fitness is the episodic scalarized objective; each generation evaluates
/// the whole population on a common scenario.
class GaOptimizer {
public:
    GaOptimizer(const ExperimentConfig& cfg, Env& env, std::uint64_t seed)
        : cfg_(cfg), env_(env), rng_(derive_seed(seed, "ga")) {}

    const std::vector<EpisodeStats>& run(int generations_override = -1) {
        const int generations =
            generations_override > 0 ? generations_override : cfg_.ga_generations;
        const int genes = cfg_.steps_per_episode * env_.layout().total();
        std::vector<std::vector<double>> pop(static_cast<std::size_t>(cfg_.ga_population));
        for (auto& ind : pop) {
            ind.resize(static_cast<std::size_t>(genes));
            for (auto& g : ind) g = rng_.uniform();
        }
        std::vector<double> fitness(pop.size());
        for (int gen = 0; gen < generations; ++gen) {
            for (std::size_t i = 0; i < pop.size(); ++i)
                fitness[i] = evaluate(pop[i], gen).reward;
            std::size_t best = 0;
            for (std::size_t i = 1; i < pop.size(); ++i)
                if (fitness[i] > fitness[best]) best = i;

            EpisodeStats st = evaluate(pop[best], gen);
            st.episode = gen;
            history_.push_back(st);

            // next generation: elitism, tournament selection, crossover, mutation
            std::vector<std::vector<double>> next;
            next.reserve(pop.size());
            std::vector<std::size_t> order(pop.size());
            std::iota(order.begin(), order.end(), 0u);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
            for (int e = 0; e < cfg_.ga_elitism && e < static_cast<int>(pop.size()); ++e)
                next.push_back(pop[order[static_cast<std::size_t>(e)]]);
            while (next.size() < pop.size()) {
                auto a = tournament(fitness);
                auto b = tournament(fitness);
                std::vector<double> child_a = pop[a];
                std::vector<double> child_b = pop[b];
                if (rng_.uniform() < cfg_.ga_crossover) {
                    const auto cut = static_cast<std::size_t>(rng_.uniform_int(1, genes - 1));
                    for (std::size_t g = cut; g < child_a.size(); ++g)
                        std::swap(child_a[g], child_b[g]);
                }
                mutate(child_a);
                next.push_back(std::move(child_a));
                if (next.size() < pop.size()) {
                    mutate(child_b);
                    next.push_back(std::move(child_b));
                }
            }
            pop = std::move(next);
        }
        return history_;
    }

    /// Roll one chromosome through a full episode on the given scenario.
    EpisodeStats evaluate(const std::vector<double>& chromosome, int scenario) {
        env_.reset(scenario);
        EpisodeStats st;
        const int dims = env_.layout().total();
        double lat = 0, en = 0, cost = 0, ux = 0, util = 0;
        int active_steps = 0, attempts = 0, successes = 0;
        for (int s = 0; s < cfg_.steps_per_episode; ++s) {
            Vec a(dims);
            for (int d = 0; d < dims; ++d)
                a[d] = chromosome[static_cast<std::size_t>(s * dims + d)];
            auto res = env_.step(a);
            st.reward += res.metrics.scalar_reward;
            if (res.metrics.active_tasks > 0) {
                ++active_steps;
                lat += res.metrics.mean_latency_s;
                en += res.metrics.mean_energy_j;
                cost += res.metrics.mean_cost;
                ux += res.metrics.mean_ux;
            }
            util += res.metrics.system_utility;
            attempts += res.metrics.migration_attempts;
            successes += res.metrics.migration_successes;
        }
        if (active_steps > 0) {
            st.mean_latency = lat / active_steps;
            st.mean_energy = en / active_steps;
            st.mean_cost = cost / active_steps;
            st.mean_ux = ux / active_steps;
        }
        st.mean_utility = util / cfg_.steps_per_episode;
        st.migration_success_rate = attempts > 0 ? static_cast<double>(successes) / attempts : 0.0;
        return st;
    }

private:
    std::size_t tournament(const std::vector<double>& fitness) {
        std::size_t best = static_cast<std::size_t>(
            rng_.uniform_int(0, static_cast<int>(fitness.size()) - 1));
        for (int t = 1; t < cfg_.ga_tournament; ++t) {
            const auto c = static_cast<std::size_t>(
                rng_.uniform_int(0, static_cast<int>(fitness.size()) - 1));
            if (fitness[c] > fitness[best]) best = c;
        }
        return best;
    }

    void mutate(std::vector<double>& ind) {
        for (auto& g : ind)
            if (rng_.uniform() < cfg_.ga_mutation) g = rng_.uniform();
    }

    ExperimentConfig cfg_;
    Env& env_;
    Rng rng_;
    std::vector<EpisodeStats> history_;
};

/// Uniform-random policy rollouts; the physics-only reference.
inline std::vector<EpisodeStats> random_rollout(const ExperimentConfig& cfg, Env& env,
                                                std::uint64_t seed, int episodes) {
    Rng rng(derive_seed(seed, "random"));
    std::vector<EpisodeStats> history;
    for (int ep = 0; ep < episodes; ++ep) {
        env.reset(ep);
        EpisodeStats st;
        st.episode = ep;
        double lat = 0, en = 0, cost = 0, ux = 0, util = 0;
        int active_steps = 0, attempts = 0, successes = 0;
        for (int s = 0; s < cfg.steps_per_episode; ++s) {
            Vec a(env.layout().total());
            for (Eigen::Index d = 0; d < a.size(); ++d) a[d] = rng.uniform();
            auto res = env.step(a);
            st.reward += res.metrics.scalar_reward;
            if (res.metrics.active_tasks > 0) {
                ++active_steps;
                lat += res.metrics.mean_latency_s;
                en += res.metrics.mean_energy_j;
                cost += res.metrics.mean_cost;
                ux += res.metrics.mean_ux;
            }
            util += res.metrics.system_utility;
            attempts += res.metrics.migration_attempts;
            successes += res.metrics.migration_successes;
        }
        if (active_steps > 0) {
            st.mean_latency = lat / active_steps;
            st.mean_energy = en / active_steps;
            st.mean_cost = cost / active_steps;
            st.mean_ux = ux / active_steps;
        }
        st.mean_utility = util / cfg.steps_per_episode;
        st.migration_success_rate = attempts > 0 ? static_cast<double>(successes) / attempts : 0.0;
        history.push_back(st);
    }
    return history;
}

}  // namespace vtmig
