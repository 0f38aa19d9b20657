#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vtmig/checkpoint.hpp"
#include "vtmig/env.hpp"
#include "vtmig/gcn.hpp"
#include "vtmig/nn.hpp"
#include "vtmig/replay.hpp"

namespace vtmig {

/// Bellman target for one objective: r when terminal, else r + gamma * Q'.
inline double bellman_target(double reward, double gamma, double q_next, bool terminal) {
    return terminal ? reward : reward + gamma * q_next;
}

struct CriticEval {
    double loss = 0.0;
    Mlp::Grads grads;
};

/// Mean squared TD error of one critic against precomputed targets, with
/// gradients w.r.t. that critic's parameters.
inline CriticEval critic_td_loss(const Mlp& critic, const Mat& input, const Vec& target) {
    if (input.rows() == 0) throw std::invalid_argument("critic_td_loss: empty batch");
    const auto cache = critic.forward(input);
    const double n = static_cast<double>(input.rows());
    Vec err = cache.out.col(0) - target;
    CriticEval ev;
    ev.loss = err.squaredNorm() / n;
    Mat dout = (2.0 / n) * err;
    ev.grads = critic.backward(cache, dout);
    return ev;
}

/// Signed objective value of component `obj` (0..4): gains keep their sign,
/// expenditures are negated, matching the scalarized objective.
inline double signed_component(const RewardVector& r, int obj) {
    switch (obj) {
        case 0: return r.r_ux;
        case 1: return r.r_util;
        case 2: return -r.r_lat;
        case 3: return -r.r_en;
        case 4: return -r.r_cost;
    }
    throw std::invalid_argument("signed_component: objective out of range");
}

struct EpisodeStats {
    int episode = 0;
    double reward = 0.0;        // sum of scalarized step rewards
    double critic_loss = 0.0;   // mean over this episode's update rounds
    double actor_objective = 0.0;
    double mean_latency = 0.0;
    double mean_energy = 0.0;
    double mean_cost = 0.0;
    double mean_ux = 0.0;
    double mean_utility = 0.0;
    double migration_success_rate = 0.0;
    int violations = 0;
    int mask_events = 0;
};

/// All networks of one agent.
struct AgentBundle {
    Mlp actor;
    Mlp actor_target;
    std::vector<Mlp> critics;         // one per objective
    std::vector<Mlp> critic_targets;
    Adam actor_opt;
    std::vector<Adam> critic_opts;
    double noise_scale = 0.0;
};

/// MO-MADDPG: decentralized deterministic actors over GCN embeddings,
/// centralized per-objective critics, per-episode batched updates.
/// With objectives=1 this is the plain MADDPG baseline trained on the
/// pre-scalarized reward.
class MoMaddpgTrainer {
public:
    struct Callbacks {
        std::function<void(int episode, int step, const StepMetrics&)> on_step;
        std::function<void(int episode, int step, const Mat& embeddings)> on_embeddings;
    };

    MoMaddpgTrainer(const ExperimentConfig& cfg, Env& env, std::uint64_t seed, int objectives = 5)
        : cfg_(cfg), env_(env), seed_(seed), n_obj_(objectives),
          weights_(ObjectiveWeights::from_config(cfg)), buffer_(static_cast<std::size_t>(cfg.replay_capacity)),
          norm_(NodeFeature::kDims), sample_rng_(derive_seed(seed, "sample")),
          noise_rng_(derive_seed(seed, "noise")) {
        const auto& layout = env.layout();
        n_agents_ = layout.agent_count();
        const int zdim = cfg.gcn_out;
        {
            Rng rng(derive_seed(seed, "gcn"));
            gcn_ = Gcn({NodeFeature::kDims, cfg.gcn_hidden, cfg.gcn_out}, rng);
            gcn_target_ = gcn_;
            gcn_opt_ = Adam(cfg.gcn_lr);
        }
        critic_input_dim_ = Env::kGlobalDims + 3 * zdim + layout.total();
        for (int x = 0; x < n_agents_; ++x) {
            const int shared = shared_agent(x);
            if (shared != x) {
                agent_bundle_index_.push_back(agent_bundle_index_[static_cast<std::size_t>(shared)]);
                continue;
            }
            AgentBundle b;
            const int obs = zdim + env.obs_dims(x);
            const int act = layout.agent_dims(x);
            Rng arng(derive_seed(seed, "actor", static_cast<std::uint64_t>(x)));
            b.actor = Mlp({obs, cfg.hidden1, cfg.hidden2, act},
                          {Act::ReLU, Act::ReLU, Act::Sigmoid}, arng);
            b.actor_target = b.actor;
            b.actor_opt = Adam(cfg.actor_lr);
            for (int o = 0; o < n_obj_; ++o) {
                Rng crng(derive_seed(seed, "critic", static_cast<std::uint64_t>(x) * 16 +
                                                         static_cast<std::uint64_t>(o)));
                Mlp critic({critic_input_dim_, cfg.hidden1, cfg.hidden2, 1},
                           {Act::ReLU, Act::ReLU, Act::Identity}, crng);
                b.critic_targets.push_back(critic);
                b.critics.push_back(std::move(critic));
                b.critic_opts.emplace_back(cfg.critic_lr);
            }
            b.noise_scale = cfg.noise_start;
            bundles_.push_back(std::move(b));
            agent_bundle_index_.push_back(static_cast<int>(bundles_.size()) - 1);
        }
        agents_.reserve(static_cast<std::size_t>(n_agents_));
        for (int x = 0; x < n_agents_; ++x)
            agents_.push_back(&bundles_[static_cast<std::size_t>(agent_bundle_index_[static_cast<std::size_t>(x)])]);
    }

    Callbacks& callbacks() { return callbacks_; }
    const std::vector<EpisodeStats>& history() const { return history_; }
    const std::vector<AgentBundle>& bundles() const { return bundles_; }
    ReplayBuffer& buffer() { return buffer_; }
    Gcn& gcn() { return gcn_; }
    RunningNorm& feature_norm() { return norm_; }

    /// Run the full training loop; returns per-episode stats.
    const std::vector<EpisodeStats>& train(int episodes_override = -1) {
        const int episodes = episodes_override > 0 ? episodes_override : cfg_.episodes;
        for (int ep = 0; ep < episodes; ++ep) run_episode(ep, episodes, true);
        return history_;
    }

    /// One greedy (noise-free) evaluation episode; returns episode stats.
    EpisodeStats evaluate(int episode_index) {
        return run_episode(episode_index, std::max(1, cfg_.episodes), false);
    }

    /// Normalized GCN embeddings for the observation bundle (online weights).
    Mat embeddings(const EnvView& view) const {
        return embeddings_with(gcn_, view.features, view.adjacency);
    }

    /// Greedy joint action for the current observations.
    Vec act(const EnvView& view, bool with_noise, double noise_scale) {
        const Mat z = embeddings(view);
        const auto& layout = env_.layout();
        Vec joint(layout.total());
        for (int x = 0; x < n_agents_; ++x) {
            const Vec obs = actor_obs(x, z, view.locals);
            const auto cache = agents_[static_cast<std::size_t>(x)]->actor.forward(obs.transpose());
            for (int d = 0; d < layout.agent_dims(x); ++d) {
                double v = cache.out(0, d);
                if (with_noise) v += noise_rng_.normal(0.0, noise_scale);
                joint[layout.agent_offset(x) + d] = clamp01(v);
            }
        }
        return joint;
    }

    /// Per-objective critic update over one sampled batch for one agent.
    /// Returns the Eq.-25 averaged loss. Accumulates GCN gradients.
    double update_critics(int agent, const std::vector<std::size_t>& batch,
                          Gcn::Gradients* gcn_accum) {
        auto& b = *agents_[static_cast<std::size_t>(agent)];
        const auto B = static_cast<Eigen::Index>(batch.size());

        Mat critic_in(B, critic_input_dim_);
        Mat critic_in_next(B, critic_input_dim_);
        std::vector<GcnForwardCache> caches(static_cast<std::size_t>(B));
        Mat rewards(B, n_obj_);
        std::vector<bool> terminal(static_cast<std::size_t>(B));

        for (Eigen::Index k = 0; k < B; ++k) {
            const auto& e = buffer_[batch[static_cast<std::size_t>(k)]];
            const Mat adj = unpack_adjacency(e.adjacency, e.features.rows());
            const Mat feats = norm_.normalize_rows(e.features);
            caches[static_cast<std::size_t>(k)] = gcn_.forward_sn(feats, normalized_adjacency(adj));
            const Mat& z = caches[static_cast<std::size_t>(k)].output;
            critic_in.row(k) = critic_input(e.global, z, e.action).transpose();

            const Mat adj2 = unpack_adjacency(e.next_adjacency, e.next_features.rows());
            const Mat z2 = embeddings_with(gcn_target_, e.next_features, adj2);
            Vec next_action(env_.layout().total());
            for (int y = 0; y < n_agents_; ++y) {
                const Vec obs = actor_obs(y, z2, e.next_locals);
                const auto c = agents_[static_cast<std::size_t>(y)]->actor_target.forward(obs.transpose());
                for (int d = 0; d < env_.layout().agent_dims(y); ++d)
                    next_action[env_.layout().agent_offset(y) + d] = clamp01(c.out(0, d));
            }
            critic_in_next.row(k) = critic_input(e.next_global, z2, next_action).transpose();

            const RewardVector rv = RewardVector::from_vec(e.reward);
            for (int o = 0; o < n_obj_; ++o)
                rewards(k, o) = n_obj_ == 1 ? scalarize(weights_, rv) : signed_component(rv, o);
            terminal[static_cast<std::size_t>(k)] = e.terminal;
        }

        double loss_sum = 0.0;
        Mat dz_pool = Mat::Zero(B, 3 * cfg_.gcn_out);
        for (int o = 0; o < n_obj_; ++o) {
            const auto tcache = b.critic_targets[static_cast<std::size_t>(o)].forward(critic_in_next);
            Vec target(B);
            for (Eigen::Index k = 0; k < B; ++k)
                target[k] = bellman_target(rewards(k, o), cfg_.gamma, tcache.out(k, 0),
                                           terminal[static_cast<std::size_t>(k)]);
            auto ev = critic_td_loss(b.critics[static_cast<std::size_t>(o)], critic_in, target);
            loss_sum += ev.loss;
            dz_pool += ev.grads.input.middleCols(Env::kGlobalDims, 3 * cfg_.gcn_out);
            b.critic_opts[static_cast<std::size_t>(o)].step(b.critics[static_cast<std::size_t>(o)], ev.grads);
        }

        if (gcn_accum) accumulate_gcn_grads(caches, dz_pool, gcn_accum);
        return loss_sum / n_obj_;
    }

    /// Deterministic policy-gradient step on one agent's actor: ascend the
    /// signed-weight sum of its critics at a = pi(s).
    double update_actor(int agent, const std::vector<std::size_t>& batch) {
        auto& b = *agents_[static_cast<std::size_t>(agent)];
        const auto B = static_cast<Eigen::Index>(batch.size());
        const auto& layout = env_.layout();
        const int off = layout.agent_offset(agent);
        const int adim = layout.agent_dims(agent);

        Mat obs(B, cfg_.gcn_out + env_.obs_dims(agent));
        Mat critic_in(B, critic_input_dim_);
        for (Eigen::Index k = 0; k < B; ++k) {
            const auto& e = buffer_[batch[static_cast<std::size_t>(k)]];
            const Mat adj = unpack_adjacency(e.adjacency, e.features.rows());
            const Mat z = embeddings_with(gcn_, e.features, adj);
            obs.row(k) = actor_obs(agent, z, e.locals).transpose();
            critic_in.row(k) = critic_input(e.global, z, e.action).transpose();
        }

        const auto acache = b.actor.forward(obs);
        critic_in.middleCols(Env::kGlobalDims + 3 * cfg_.gcn_out + off, adim) = acache.out;

        const auto sw = weights_.signed_weights();
        Mat da = Mat::Zero(B, adim);
        double objective = 0.0;
        for (int o = 0; o < n_obj_; ++o) {
            const double w = n_obj_ == 1 ? 1.0 : sw[static_cast<std::size_t>(o)];
            if (w == 0.0) continue;
            const auto ccache = b.critics[static_cast<std::size_t>(o)].forward(critic_in);
            objective += w * ccache.out.col(0).mean();
            const Mat dout = Mat::Constant(B, 1, w / static_cast<double>(B));
            const auto cgrads = b.critics[static_cast<std::size_t>(o)].backward(ccache, dout);
            da += cgrads.input.middleCols(Env::kGlobalDims + 3 * cfg_.gcn_out + off, adim);
        }
        auto agrads = b.actor.backward(acache, -da);  // ascend
        b.actor_opt.step(b.actor, agrads);
        return objective;
    }

    /// One full update round: every agent's critics and actor, one shared GCN
    /// step, then soft target updates.
    std::pair<double, double> update_round() {
        double loss = 0.0, obj = 0.0;
        Gcn::Gradients gcn_grads;
        gcn_grads.weights.resize(gcn_.layers().size());
        for (std::size_t l = 0; l < gcn_.layers().size(); ++l)
            gcn_grads.weights[l] = Mat::Zero(gcn_.layers()[l].weight.rows(), gcn_.layers()[l].weight.cols());
        int updated = 0;
        for (int x = 0; x < n_agents_; ++x) {
            if (shared_agent(x) != x) continue;  // shared bundles update once
            const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), sample_rng_);
            loss += update_critics(x, batch, &gcn_grads);
            obj += update_actor(x, batch);
            ++updated;
        }
        gcn_opt_step(gcn_grads);
        for (auto& b : bundles_) {
            soft_update(b.actor, b.actor_target, cfg_.tau);
            for (int o = 0; o < n_obj_; ++o)
                soft_update(b.critics[static_cast<std::size_t>(o)],
                            b.critic_targets[static_cast<std::size_t>(o)], cfg_.tau);
        }
        soft_update_gcn(cfg_.tau);
        return {loss / std::max(1, updated), obj / std::max(1, updated)};
    }

    Vec actor_obs(int agent, const Mat& z, const std::vector<Vec>& locals) const {
        const Vec& local = locals[static_cast<std::size_t>(agent)];
        Vec obs(cfg_.gcn_out + local.size());
        obs.head(cfg_.gcn_out) = z.row(agent).transpose();
        obs.tail(local.size()) = local;
        return obs;
    }

    /// Centralized critic input: global state, tier-pooled embeddings, the
    /// full joint action.
    Vec critic_input(const Vec& global, const Mat& z, const Vec& action) const {
        const auto& layout = env_.layout();
        const int zd = cfg_.gcn_out;
        Vec in(critic_input_dim_);
        in.head(Env::kGlobalDims) = global;
        Vec pool = Vec::Zero(3 * zd);
        if (layout.n_vehicles > 0)
            pool.segment(0, zd) =
                z.topRows(layout.n_vehicles).colwise().mean().transpose();
        if (layout.n_edges > 0)
            pool.segment(zd, zd) =
                z.middleRows(layout.n_vehicles, layout.n_edges).colwise().mean().transpose();
        if (layout.n_clouds > 0)
            pool.segment(2 * zd, zd) =
                z.bottomRows(layout.n_clouds).colwise().mean().transpose();
        in.segment(Env::kGlobalDims, 3 * zd) = pool;
        in.tail(layout.total()) = action;
        return in;
    }

    void soft_update_gcn(double tau) {
        for (std::size_t l = 0; l < gcn_.layers().size(); ++l)
            gcn_target_.layers()[l].weight =
                tau * gcn_.layers()[l].weight + (1.0 - tau) * gcn_target_.layers()[l].weight;
    }

    void save_checkpoint(const std::string& path, std::uint64_t cfg_hash) const {
        CheckpointWriter w(path, cfg_hash);
        w.add("gcn", gcn_);
        for (std::size_t b = 0; b < bundles_.size(); ++b) {
            const std::string tag = "agent" + std::to_string(b);
            w.add(tag + ".actor", bundles_[b].actor);
            for (int o = 0; o < n_obj_; ++o)
                w.add(tag + ".critic" + std::to_string(o),
                      bundles_[b].critics[static_cast<std::size_t>(o)]);
        }
    }

    void load_checkpoint(const std::string& path, std::uint64_t cfg_hash) {
        CheckpointReader r(path);
        if (r.config_hash() != cfg_hash)
            throw std::runtime_error("checkpoint: config hash mismatch (different experiment)");
        r.restore("gcn", gcn_);
        gcn_target_ = gcn_;
        for (std::size_t b = 0; b < bundles_.size(); ++b) {
            const std::string tag = "agent" + std::to_string(b);
            r.restore(tag + ".actor", bundles_[b].actor);
            bundles_[b].actor_target = bundles_[b].actor;
            for (int o = 0; o < n_obj_; ++o) {
                r.restore(tag + ".critic" + std::to_string(o),
                          bundles_[b].critics[static_cast<std::size_t>(o)]);
                bundles_[b].critic_targets[static_cast<std::size_t>(o)] =
                    bundles_[b].critics[static_cast<std::size_t>(o)];
            }
        }
    }

private:
    int shared_agent(int x) const {
        if (!cfg_.share_tier_weights) return x;
        const auto& layout = env_.layout();
        if (x < layout.n_vehicles) return 0;
        if (x < layout.n_vehicles + layout.n_edges) return layout.n_vehicles;
        return layout.n_vehicles + layout.n_edges;
    }

    Mat embeddings_with(const Gcn& gcn, const Mat& features, const Mat& adjacency) const {
        const Mat feats = norm_.normalize_rows(features);
        return gcn.forward_sn(feats, normalized_adjacency(adjacency)).output;
    }

    void accumulate_gcn_grads(const std::vector<GcnForwardCache>& caches, const Mat& dz_pool,
                              Gcn::Gradients* accum) {
        const auto& layout = env_.layout();
        const int zd = cfg_.gcn_out;
        for (std::size_t k = 0; k < caches.size(); ++k) {
            Mat dz = Mat::Zero(caches[k].output.rows(), zd);
            if (layout.n_vehicles > 0)
                dz.topRows(layout.n_vehicles) = (dz_pool.row(static_cast<Eigen::Index>(k))
                                                     .segment(0, zd) /
                                                 layout.n_vehicles)
                                                    .replicate(layout.n_vehicles, 1);
            if (layout.n_edges > 0)
                dz.middleRows(layout.n_vehicles, layout.n_edges) =
                    (dz_pool.row(static_cast<Eigen::Index>(k)).segment(zd, zd) / layout.n_edges)
                        .replicate(layout.n_edges, 1);
            if (layout.n_clouds > 0)
                dz.bottomRows(layout.n_clouds) =
                    (dz_pool.row(static_cast<Eigen::Index>(k)).segment(2 * zd, zd) /
                     layout.n_clouds)
                        .replicate(layout.n_clouds, 1);
            const auto g = gcn_.gradients(caches[k], dz);
            for (std::size_t l = 0; l < accum->weights.size(); ++l)
                accum->weights[l] += g.weights[l];
        }
    }

    void gcn_opt_step(const Gcn::Gradients& grads) {
        // Adam over the GCN weights, kept local to avoid exposing optimizer
        // state in the Gcn type itself.
        if (gcn_m_.empty()) {
            for (const auto& l : gcn_.layers()) {
                gcn_m_.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
                gcn_v_.push_back(Mat::Zero(l.weight.rows(), l.weight.cols()));
            }
        }
        ++gcn_t_;
        const double bc1 = 1.0 - std::pow(0.9, gcn_t_);
        const double bc2 = 1.0 - std::pow(0.999, gcn_t_);
        for (std::size_t l = 0; l < gcn_.layers().size(); ++l) {
            gcn_m_[l] = 0.9 * gcn_m_[l] + 0.1 * grads.weights[l];
            gcn_v_[l] = 0.999 * gcn_v_[l] + 0.001 * grads.weights[l].cwiseProduct(grads.weights[l]);
            gcn_.layers()[l].weight -=
                (cfg_.gcn_lr * (gcn_m_[l] / bc1).array() / ((gcn_v_[l] / bc2).array().sqrt() + 1e-8))
                    .matrix();
        }
    }

    EpisodeStats run_episode(int ep, int total_episodes, bool learn) {
        EnvView view = env_.reset(ep);
        EpisodeStats st;
        st.episode = ep;
        const double half = std::max(1.0, total_episodes / 2.0);
        const double frac = std::min(1.0, ep / half);
        const double noise = learn ? cfg_.noise_start + (cfg_.noise_end - cfg_.noise_start) * frac : 0.0;

        double lat = 0, en = 0, cost = 0, ux = 0, util = 0;
        int active_steps = 0, attempts = 0, successes = 0;
        double loss_sum = 0, obj_sum = 0;
        int rounds = 0;

        for (int s = 0; s < cfg_.steps_per_episode; ++s) {
            norm_.observe_rows(view.features);
            if (callbacks_.on_embeddings) callbacks_.on_embeddings(ep, s, embeddings(view));
            const Vec action = act(view, learn, noise);
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
            if (learn) buffer_.add(std::move(e));

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
            st.mask_events += res.metrics.mask_events;
            for (int c = 2; c < 10; ++c)
                st.violations += res.metrics.tallies.violated[static_cast<std::size_t>(c)];
            if (callbacks_.on_step) callbacks_.on_step(ep, s, res.metrics);
            view = std::move(res.next);

            if (learn && cfg_.update_every_steps > 0 &&
                buffer_.size() >= static_cast<std::size_t>(std::max(cfg_.warmup_experiences, cfg_.batch_size)) &&
                (s + 1) % cfg_.update_every_steps == 0) {
                auto [l, o] = update_round();
                loss_sum += l;
                obj_sum += o;
                ++rounds;
            }
        }
        if (learn && cfg_.update_every_steps == 0 &&
            buffer_.size() >= static_cast<std::size_t>(std::max(cfg_.warmup_experiences, cfg_.batch_size))) {
            for (int u = 0; u < cfg_.updates_per_episode; ++u) {
                auto [l, o] = update_round();
                loss_sum += l;
                obj_sum += o;
                ++rounds;
            }
        }

        st.critic_loss = rounds > 0 ? loss_sum / rounds : 0.0;
        st.actor_objective = rounds > 0 ? obj_sum / rounds : 0.0;
        if (active_steps > 0) {
            st.mean_latency = lat / active_steps;
            st.mean_energy = en / active_steps;
            st.mean_cost = cost / active_steps;
            st.mean_ux = ux / active_steps;
        }
        st.mean_utility = util / cfg_.steps_per_episode;
        st.migration_success_rate = attempts > 0 ? static_cast<double>(successes) / attempts : 0.0;
        history_.push_back(st);
        return st;
    }

    ExperimentConfig cfg_;
    Env& env_;
    std::uint64_t seed_;
    int n_obj_;
    ObjectiveWeights weights_;
    int n_agents_ = 0;
    int critic_input_dim_ = 0;
    std::vector<AgentBundle> bundles_;
    std::vector<int> agent_bundle_index_;
    std::vector<AgentBundle*> agents_;
    Gcn gcn_, gcn_target_;
    Adam gcn_opt_;
    std::vector<Mat> gcn_m_, gcn_v_;
    long gcn_t_ = 0;
    ReplayBuffer buffer_;
    RunningNorm norm_;
    Rng sample_rng_;
    Rng noise_rng_;
    Callbacks callbacks_;
    std::vector<EpisodeStats> history_;
};

}  // namespace vtmig
