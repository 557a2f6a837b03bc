#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nn.hpp"
#include "rng.hpp"

namespace hlponav {

struct TrainConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip = 0.2;
    double learning_rate = 0.00025;
    int mini_batches = 2;
    int rollout_length = 32;
    int num_workers = 1;
    int envs_per_worker = 8;
    int ppo_epochs = 2;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    uint64_t seed = 0;
    long total_env_steps = 100000;
    double entropy_floor = 0.01;   // nats; sustained collapse aborts training
    int entropy_patience = 50;     // updates
};

// Per-rollout transition storage for one worker, indexed [t][env].
struct RolloutBuffer {
    int T = 0;
    int W = 0;
    std::vector<std::vector<std::vector<double>>> obs;
    std::vector<std::vector<int>> actions;
    std::vector<std::vector<double>> log_probs;
    std::vector<std::vector<double>> rewards;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<uint8_t>> dones;
    std::vector<std::vector<double>> initial_hidden; // [env][h]
    std::vector<double> bootstrap_values;            // [env]
    std::vector<std::vector<double>> advantages;     // raw
    std::vector<std::vector<double>> norm_advantages;
    std::vector<std::vector<double>> returns;

    RolloutBuffer() = default;
    RolloutBuffer(int t, int w, int hidden_dim) : T(t), W(w) {
        obs.assign(T, std::vector<std::vector<double>>(W));
        actions.assign(T, std::vector<int>(W, 0));
        log_probs.assign(T, std::vector<double>(W, 0.0));
        rewards.assign(T, std::vector<double>(W, 0.0));
        values.assign(T, std::vector<double>(W, 0.0));
        dones.assign(T, std::vector<uint8_t>(W, 0));
        initial_hidden.assign(W, std::vector<double>(hidden_dim, 0.0));
        bootstrap_values.assign(W, 0.0);
    }
};

// Recursive GAE over one env stream: A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}
// with delta_t = r_t + gamma*(1-done_t)*V_{t+1} - V_t and V_T = bootstrap.
inline void compute_gae_stream(const std::vector<double>& rewards,
                               const std::vector<double>& values,
                               const std::vector<uint8_t>& dones, double bootstrap, double gamma,
                               double lambda, std::vector<double>& advantages,
                               std::vector<double>& returns) {
    int T = int(rewards.size());
    advantages.assign(T, 0.0);
    returns.assign(T, 0.0);
    double gae = 0.0;
    for (int t = T - 1; t >= 0; --t) {
        double mask = dones[t] ? 0.0 : 1.0;
        double next_v = (t == T - 1) ? bootstrap : values[t + 1];
        double delta = rewards[t] + gamma * mask * next_v - values[t];
        gae = delta + gamma * lambda * mask * gae;
        advantages[t] = gae;
        returns[t] = gae + values[t];
    }
}

inline void compute_gae(RolloutBuffer& buf, double gamma, double lambda) {
    buf.advantages.assign(buf.T, std::vector<double>(buf.W, 0.0));
    buf.returns.assign(buf.T, std::vector<double>(buf.W, 0.0));
    std::vector<double> r(buf.T), v(buf.T), adv, ret;
    std::vector<uint8_t> d(buf.T);
    for (int w = 0; w < buf.W; ++w) {
        for (int t = 0; t < buf.T; ++t) {
            r[t] = buf.rewards[t][w];
            v[t] = buf.values[t][w];
            d[t] = buf.dones[t][w];
        }
        compute_gae_stream(r, v, d, buf.bootstrap_values[w], gamma, lambda, adv, ret);
        for (int t = 0; t < buf.T; ++t) {
            buf.advantages[t][w] = adv[t];
            buf.returns[t][w] = ret[t];
        }
    }
}

// Mean-0 / std-1 normalization across every sample of every buffer, done once
// per update. Global across workers, and summed in time-major global-env order
// so the result is bitwise invariant to how envs are split across workers.
inline void normalize_advantages(std::vector<RolloutBuffer*> buffers, double std_floor = 1e-8) {
    int T = buffers.front()->T;
    for (auto* b : buffers)
        if (b->T != T) throw std::invalid_argument("normalize_advantages: ragged buffers");
    double sum = 0.0;
    long n = 0;
    for (int t = 0; t < T; ++t)
        for (auto* b : buffers)
            for (int w = 0; w < b->W; ++w) {
                sum += b->advantages[t][w];
                ++n;
            }
    double mean = sum / n;
    double var = 0.0;
    for (int t = 0; t < T; ++t)
        for (auto* b : buffers)
            for (int w = 0; w < b->W; ++w) {
                double d = b->advantages[t][w] - mean;
                var += d * d;
            }
    double stddev = std::sqrt(var / n);
    double denom = std::max(stddev, std_floor);
    for (auto* b : buffers) {
        b->norm_advantages.assign(b->T, std::vector<double>(b->W, 0.0));
        for (int t = 0; t < b->T; ++t)
            for (int w = 0; w < b->W; ++w)
                b->norm_advantages[t][w] = (b->advantages[t][w] - mean) / denom;
    }
}

struct PpoLossStats {
    double loss = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    long samples = 0;
};

// Clipped-surrogate PPO loss and exact gradient over the given env streams,
// backpropagated through time across the whole rollout segment. Gradients are
// normalized by the number of samples in the minibatch.
inline PpoLossStats ppo_loss(const ActorCritic& net, const ParamVec& params,
                             const RolloutBuffer& buf, const std::vector<int>& env_indices,
                             const TrainConfig& cfg, ParamVec& grad) {
    const int T = buf.T;
    const int A = net.config().num_actions;
    PpoLossStats stats;
    stats.samples = long(T) * env_indices.size();
    const double scale = 1.0 / double(stats.samples);

    std::vector<ActorCritic::Cache> caches(T);
    std::vector<std::vector<double>> dlogits(T, std::vector<double>(A, 0.0));
    std::vector<double> dvalue(T, 0.0);

    for (int w : env_indices) {
        // forward through time (recurrent state resets after done steps)
        std::vector<double> h = buf.initial_hidden[w];
        for (int t = 0; t < T; ++t) {
            auto out = net.forward(params, buf.obs[t][w], h, &caches[t]);
            h = buf.dones[t][w] ? net.initial_hidden() : out.hidden;

            int a = buf.actions[t][w];
            double lp_new = log_softmax_at(out.logits, a);
            double lp_old = buf.log_probs[t][w];
            double adv = buf.norm_advantages[t][w];
            double ratio = std::exp(lp_new - lp_old);
            double surr1 = ratio * adv;
            double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
            double surr2 = clipped * adv;
            double surr = std::min(surr1, surr2);

            double v = out.value;
            double ret = buf.returns[t][w];
            double ent = entropy(out.logits);

            stats.policy_loss += -surr * scale;
            stats.value_loss += 0.5 * (v - ret) * (v - ret) * scale;
            stats.entropy += ent * scale;

            auto p = softmax(out.logits);
            // d(-surr)/dlogits through lp_new when the unclipped branch is active
            double dlp = (surr1 <= surr2) ? -ratio * adv : 0.0;
            for (int j = 0; j < A; ++j)
                dlogits[t][j] = scale * dlp * ((j == a ? 1.0 : 0.0) - p[j]);
            // entropy bonus: loss term -c_e * H
            for (int j = 0; j < A; ++j) {
                double dH = -p[j] * (std::log(std::max(p[j], 1e-300)) + ent);
                dlogits[t][j] += scale * (-cfg.entropy_coef) * dH;
            }
            dvalue[t] = scale * cfg.value_coef * (v - ret);
        }
        // backward through time
        std::vector<double> dh(net.config().hidden_dim, 0.0);
        for (int t = T - 1; t >= 0; --t) {
            if (buf.dones[t][w]) std::fill(dh.begin(), dh.end(), 0.0);
            dh = net.backward(params, caches[t], dlogits[t], dvalue[t], dh, grad);
        }
    }
    stats.loss = stats.policy_loss + cfg.value_coef * stats.value_loss -
                 cfg.entropy_coef * stats.entropy;
    if (!std::isfinite(stats.loss)) throw std::runtime_error("ppo_loss: non-finite loss");
    return stats;
}

// Mean reduction over per-worker gradients (the AR step).
inline ParamVec allreduce_mean(const std::vector<ParamVec>& grads) {
    if (grads.empty()) throw std::invalid_argument("allreduce_mean: no gradients");
    size_t n = grads.front().size();
    for (const auto& g : grads)
        if (g.size() != n) throw std::runtime_error("allreduce_mean: gradient shape mismatch");
    ParamVec out(n, 0.0);
    for (const auto& g : grads)
        for (size_t i = 0; i < n; ++i) out[i] += g[i];
    for (auto& v : out) v /= double(grads.size());
    return out;
}

inline double clip_grad_norm(ParamVec& grad, double max_norm) {
    double sq = 0.0;
    for (double v : grad) sq += v * v;
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0) {
        double s = max_norm / norm;
        for (auto& v : grad) v *= s;
    }
    return norm;
}

// Adaptive moment estimation; the PU step applied identically on all replicas.
struct Adam {
    double lr = 0.00025;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-5;
    ParamVec m, v;
    long t = 0;

    void step(ParamVec& params, const ParamVec& grad) {
        if (m.empty()) {
            m.assign(params.size(), 0.0);
            v.assign(params.size(), 0.0);
        }
        ++t;
        double bc1 = 1.0 - std::pow(beta1, double(t));
        double bc2 = 1.0 - std::pow(beta2, double(t));
        for (size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
};

// Averaged-gradient optimizer step: clip, then Adam, observed by all workers.
inline void allreduce_update(const std::vector<ParamVec>& worker_gradients, Adam& opt,
                             ParamVec& params, double max_grad_norm) {
    ParamVec g = allreduce_mean(worker_gradients);
    clip_grad_norm(g, max_grad_norm);
    opt.step(params, g);
}

// ---------------------------------------------------------------------------
// Rollout environment contract for the trainer.

struct EpisodeMetrics {
    bool success = false;
    double spl = 0.0;
    double distance_to_goal = 0.0;
    double explored_area = 0.0; // m^2
    int steps = 0;
};

class RolloutEnv {
  public:
    struct EnvStep {
        std::vector<double> obs;
        double reward = 0.0;
        bool done = false;
    };
    virtual ~RolloutEnv() = default;
    virtual std::vector<double> reset() = 0;
    // On done the env has already reset itself; obs is the next episode's first
    // observation and episode_metrics() describes the finished episode.
    virtual EnvStep step(int action) = 0;
    virtual EpisodeMetrics episode_metrics() const = 0;
    virtual int obs_dim() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<RolloutEnv>(int global_env_index, uint64_t seed)>;

struct UpdateMetrics {
    int update = 0;
    long env_steps = 0;
    double mean_reward = 0.0;
    double entropy = 0.0;
    double loss = 0.0;
    double value_loss = 0.0;
    int episodes = 0;
    double success_rate = 0.0;
    double mean_spl = 0.0;
    double mean_distance_to_goal = 0.0;
    double mean_explored_area = 0.0;
    double mean_episode_steps = 0.0;
};

struct TrainResult {
    ParamVec params;
    std::vector<UpdateMetrics> curve;
    bool diverged = false;
    std::string divergence_reason;
};

// Synchronous multi-worker PPO: every worker collects rollout_length steps on
// its envs, advantages are normalized globally, then each epoch/minibatch the
// per-worker gradients are mean-reduced and one optimizer step is applied.
class Trainer {
  public:
    Trainer(const ActorCritic& net, const TrainConfig& cfg, EnvFactory factory)
        : net_(net), cfg_(cfg) {
        const int E = cfg.envs_per_worker;
        workers_.resize(cfg.num_workers);
        for (int w = 0; w < cfg.num_workers; ++w) {
            Worker& wk = workers_[w];
            for (int e = 0; e < E; ++e) {
                int gi = w * E + e;
                wk.envs.push_back(factory(gi, hash_combine(cfg.seed, 0xE000 + gi)));
                wk.rngs.push_back(make_rng(cfg.seed, 0xA000 + gi));
                wk.hidden.push_back(net.initial_hidden());
            }
            wk.buffer = RolloutBuffer(cfg.rollout_length, E, net.config().hidden_dim);
        }
    }

    // Optional explicit minibatch partitioning (groups of GLOBAL env indices);
    // defaults to contiguous splits over all envs.
    void set_minibatch_partition(std::vector<std::vector<int>> groups) {
        partition_ = std::move(groups);
    }

    TrainResult train() {
        params_ = net_.init_params(cfg_.seed);
        return train_from(params_, 0);
    }

    TrainResult train_from(ParamVec params, long start_env_steps) {
        params_ = std::move(params);
        Adam opt;
        opt.lr = cfg_.learning_rate;
        TrainResult result;
        for (auto& wk : workers_) {
            wk.obs.clear();
            for (auto& env : wk.envs) wk.obs.push_back(env->reset());
        }
        long env_steps = start_env_steps;
        const long steps_per_update =
            long(cfg_.rollout_length) * cfg_.num_workers * cfg_.envs_per_worker;
        int update = 0;
        int entropy_low_streak = 0;

        while (env_steps < cfg_.total_env_steps) {
            ++update;
            UpdateMetrics um;
            um.update = update;

            parallel_over_workers([&](Worker& wk) { collect(wk); });
            env_steps += steps_per_update;
            um.env_steps = env_steps;

            std::vector<RolloutBuffer*> bufs;
            for (auto& wk : workers_) bufs.push_back(&wk.buffer);
            for (auto* b : bufs) compute_gae(*b, cfg_.gamma, cfg_.gae_lambda);
            normalize_advantages(bufs);

            const int E = cfg_.envs_per_worker;
            auto groups = partition_.empty()
                              ? contiguous_groups(cfg_.num_workers * E, cfg_.mini_batches)
                              : partition_;
            std::vector<PpoLossStats> all_stats;
            try {
                for (int epoch = 0; epoch < cfg_.ppo_epochs; ++epoch) {
                    for (const auto& group : groups) {
                        // Per-env gradients, then a reduction in global env
                        // order, so the update is bitwise invariant to the
                        // worker decomposition.
                        std::vector<ParamVec> env_grads(group.size());
                        std::vector<PpoLossStats> env_stats(group.size());
                        parallel_over_workers([&](Worker& wk) {
                            int wi = int(&wk - workers_.data());
                            for (size_t gi = 0; gi < group.size(); ++gi) {
                                int g = group[gi];
                                if (g / E != wi) continue;
                                env_grads[gi].assign(params_.size(), 0.0);
                                env_stats[gi] = ppo_loss(net_, params_, wk.buffer, {g % E},
                                                         cfg_, env_grads[gi]);
                            }
                        });
                        ParamVec g(params_.size(), 0.0);
                        for (const auto& eg : env_grads)
                            for (size_t i = 0; i < g.size(); ++i) g[i] += eg[i];
                        for (auto& v : g) v /= double(group.size());
                        clip_grad_norm(g, cfg_.max_grad_norm);
                        opt.step(params_, g);
                        for (auto& s : env_stats) all_stats.push_back(s);
                    }
                }
            } catch (const std::runtime_error& e) {
                result.diverged = true;
                result.divergence_reason = e.what();
                break;
            }

            // update metrics
            double rew = 0.0;
            long n = 0;
            for (auto& wk : workers_)
                for (int t = 0; t < cfg_.rollout_length; ++t)
                    for (int w = 0; w < cfg_.envs_per_worker; ++w) {
                        rew += wk.buffer.rewards[t][w];
                        ++n;
                    }
            um.mean_reward = rew / n;
            double loss = 0, vloss = 0, ent = 0;
            for (auto& s : all_stats) {
                loss += s.loss;
                vloss += s.value_loss;
                ent += s.entropy;
            }
            um.loss = loss / all_stats.size();
            um.value_loss = vloss / all_stats.size();
            um.entropy = ent / all_stats.size();
            int eps = 0;
            double sr = 0, mspl = 0, dtg = 0, exa = 0, mlen = 0;
            for (auto& wk : workers_) {
                for (auto& m : wk.finished) {
                    ++eps;
                    sr += m.success ? 1 : 0;
                    mspl += m.spl;
                    dtg += m.distance_to_goal;
                    exa += m.explored_area;
                    mlen += m.steps;
                }
                wk.finished.clear();
            }
            um.episodes = eps;
            if (eps > 0) {
                um.success_rate = sr / eps;
                um.mean_spl = mspl / eps;
                um.mean_distance_to_goal = dtg / eps;
                um.mean_explored_area = exa / eps;
                um.mean_episode_steps = mlen / eps;
            }
            result.curve.push_back(um);
            if (on_update) on_update(um, params_);

            entropy_low_streak = um.entropy < cfg_.entropy_floor ? entropy_low_streak + 1 : 0;
            if (entropy_low_streak >= cfg_.entropy_patience) {
                result.diverged = true;
                result.divergence_reason = "entropy collapse";
                break;
            }
        }
        result.params = params_;
        return result;
    }

    std::function<void(const UpdateMetrics&, const ParamVec&)> on_update;

    static std::vector<std::vector<int>> contiguous_groups(int n_envs, int n_groups) {
        std::vector<std::vector<int>> groups(n_groups);
        for (int i = 0; i < n_envs; ++i) groups[i * n_groups / n_envs].push_back(i);
        return groups;
    }

  private:
    struct Worker {
        std::vector<std::unique_ptr<RolloutEnv>> envs;
        std::vector<Rng> rngs;
        std::vector<std::vector<double>> hidden;
        std::vector<std::vector<double>> obs;
        RolloutBuffer buffer;
        std::vector<EpisodeMetrics> finished;
    };

    void collect(Worker& wk) {
        RolloutBuffer& buf = wk.buffer;
        for (int e = 0; e < int(wk.envs.size()); ++e) buf.initial_hidden[e] = wk.hidden[e];
        for (int t = 0; t < cfg_.rollout_length; ++t) {
            for (int e = 0; e < int(wk.envs.size()); ++e) {
                auto out = net_.forward(params_, wk.obs[e], wk.hidden[e]);
                int a = sample_categorical(out.logits, wk.rngs[e]);
                auto sr = wk.envs[e]->step(a);
                buf.obs[t][e] = wk.obs[e];
                buf.actions[t][e] = a;
                buf.log_probs[t][e] = log_softmax_at(out.logits, a);
                buf.rewards[t][e] = sr.reward;
                buf.values[t][e] = out.value;
                buf.dones[t][e] = sr.done ? 1 : 0;
                wk.obs[e] = sr.obs;
                wk.hidden[e] = sr.done ? net_.initial_hidden() : out.hidden;
                if (sr.done) wk.finished.push_back(wk.envs[e]->episode_metrics());
            }
        }
        for (int e = 0; e < int(wk.envs.size()); ++e)
            buf.bootstrap_values[e] = net_.forward(params_, wk.obs[e], wk.hidden[e]).value;
    }

    void parallel_over_workers(const std::function<void(Worker&)>& fn) {
        if (workers_.size() == 1) {
            fn(workers_[0]);
            return;
        }
        std::vector<std::thread> threads;
        for (auto& wk : workers_) threads.emplace_back([&fn, &wk] { fn(wk); });
        for (auto& th : threads) th.join();
    }

    ActorCritic net_;
    TrainConfig cfg_;
    std::vector<Worker> workers_;
    std::vector<std::vector<int>> partition_;
    ParamVec params_;
};

} // namespace hlponav
