#pragma once
// Dataset and experiment plumbing shared by the command-line tool and the
// self-check binary: build/save/load scene corpora, wire skill training
// environments, and run evaluation suites over the method matrix.
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "eval.hpp"
#include "hlpo.hpp"
#include "io.hpp"

namespace hlponav {

struct Dataset {
    ScenegenConfig gen;
    uint64_t seed = 0;
    std::string cfg_hash;
    std::vector<std::string> categories;
    std::vector<Scene> train_scenes, eval_scenes;
    std::vector<std::string> train_ids, eval_ids;
    std::vector<EpisodeSpec> episodes;

    const Scene* scene_by_id(const std::string& id) const {
        for (size_t i = 0; i < eval_ids.size(); ++i)
            if (eval_ids[i] == id) return &eval_scenes[i];
        for (size_t i = 0; i < train_ids.size(); ++i)
            if (train_ids[i] == id) return &train_scenes[i];
        return nullptr;
    }
    RoomObjectStats stats() const { return compute_room_object_stats(train_scenes); }
};

inline Dataset build_dataset(const ScenegenConfig& gen, int n_train, int n_eval, int n_episodes,
                             double min_geodesic, uint64_t seed,
                             std::vector<std::string> categories = default_categories()) {
    Dataset ds;
    ds.gen = gen;
    ds.seed = seed;
    ds.categories = std::move(categories);
    ds.cfg_hash = config_hash(to_json(gen));
    for (int i = 0; i < n_train; ++i) {
        ds.train_scenes.push_back(generate_scene(gen, hash_combine(seed, 0x7100 + i)));
        char buf[32];
        snprintf(buf, sizeof buf, "train_%03d", i);
        ds.train_ids.push_back(buf);
    }
    for (int i = 0; i < n_eval; ++i) {
        ds.eval_scenes.push_back(generate_scene(gen, hash_combine(seed, 0xE100 + i)));
        char buf[32];
        snprintf(buf, sizeof buf, "eval_%03d", i);
        ds.eval_ids.push_back(buf);
    }
    // Episodes round-robin over eval scenes and the categories present there.
    Rng rng = make_rng(seed, 0xE250);
    int scene_idx = 0;
    int guard = 0;
    while (int(ds.episodes.size()) < n_episodes && guard++ < n_episodes * 50) {
        const Scene& s = ds.eval_scenes[scene_idx % n_eval];
        const std::string& id = ds.eval_ids[scene_idx % n_eval];
        ++scene_idx;
        std::vector<std::string> present;
        for (const auto& c : ds.categories)
            if (!s.goal_positions(c).empty()) present.push_back(c);
        if (present.empty()) continue;
        const std::string& cat = present[uniform_int(rng, 0, int(present.size()) - 1)];
        try {
            auto eps = sample_episodes(s, id, cat, 1, min_geodesic, rng());
            ds.episodes.push_back(eps[0]);
        } catch (const std::runtime_error&) {
            // no start far enough in this scene for this category; try the next
        }
    }
    if (int(ds.episodes.size()) < n_episodes)
        throw std::runtime_error("build_dataset: could not sample enough episodes; "
                                 "lower min_geodesic or enlarge scenes");
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "scenes");
    json manifest;
    manifest["config_hash"] = ds.cfg_hash;
    manifest["seed"] = ds.seed;
    manifest["scenegen_config"] = to_json(ds.gen);
    manifest["categories"] = ds.categories;
    auto dump_split = [&](const std::vector<Scene>& scenes, const std::vector<std::string>& ids,
                          const char* key) {
        json files = json::array();
        for (size_t i = 0; i < scenes.size(); ++i) {
            std::string rel = "scenes/" + ids[i] + ".json";
            json sj = to_json(scenes[i]);
            sj["scene_id"] = ids[i];
            write_json((fs::path(dir) / rel).string(), sj);
            files.push_back(rel);
        }
        manifest[key] = files;
    };
    dump_split(ds.train_scenes, ds.train_ids, "train_scenes");
    dump_split(ds.eval_scenes, ds.eval_ids, "eval_scenes");
    json eps = json::array();
    for (const auto& e : ds.episodes) eps.push_back(to_json(e));
    write_json((fs::path(dir) / "episodes.json").string(), eps);
    manifest["episodes"] = "episodes.json";
    write_json((fs::path(dir) / "manifest.json").string(), manifest);
}

inline Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    json manifest = read_json((fs::path(dir) / "manifest.json").string());
    Dataset ds;
    ds.cfg_hash = manifest.at("config_hash");
    ds.seed = manifest.at("seed");
    ds.gen = scenegen_config_from_json(manifest.at("scenegen_config"));
    ds.categories = manifest.at("categories").get<std::vector<std::string>>();
    auto load_split = [&](const char* key, std::vector<Scene>& scenes,
                          std::vector<std::string>& ids) {
        for (const auto& rel : manifest.at(key)) {
            json sj = read_json((fs::path(dir) / std::string(rel)).string());
            scenes.push_back(scene_from_json(sj));
            ids.push_back(sj.at("scene_id"));
        }
    };
    load_split("train_scenes", ds.train_scenes, ds.train_ids);
    load_split("eval_scenes", ds.eval_scenes, ds.eval_ids);
    for (const auto& ej :
         read_json((fs::path(dir) / std::string(manifest.at("episodes"))).string()))
        ds.episodes.push_back(episode_from_json(ej));
    return ds;
}

// ---------------------------------------------------------------------------
// Skill training wiring

inline NetConfig net_config_for(const std::string& skill, int num_rays, int num_categories,
                                int enc_dim = 32, int hidden_dim = 64) {
    NetConfig nc;
    nc.enc_dim = enc_dim;
    nc.hidden_dim = hidden_dim;
    if (skill == "pointnav")
        nc.obs_dim = pointnav_obs_dim(num_rays);
    else if (skill == "explore")
        nc.obs_dim = explore_obs_dim(num_rays);
    else if (skill == "reacher")
        nc.obs_dim = reacher_obs_dim(num_rays);
    else if (skill == "e2e")
        nc.obs_dim = E2eAgent::obs_dim(num_rays, num_categories);
    else
        throw std::runtime_error("net_config_for: unknown skill '" + skill + "'");
    return nc;
}

inline int default_env_count(const std::string& skill) {
    if (skill == "pointnav") return 22;
    if (skill == "explore") return 20;
    if (skill == "reacher") return 28;
    return 24; // e2e
}

inline EnvFactory make_env_factory(const std::string& skill,
                                   std::shared_ptr<const std::vector<Scene>> scenes,
                                   const SkillEnvConfig& env_cfg,
                                   std::vector<std::string> categories,
                                   std::string reacher_category) {
    if (skill == "pointnav")
        return [scenes, env_cfg](int, uint64_t seed) -> std::unique_ptr<RolloutEnv> {
            return std::make_unique<PointNavEnv>(scenes, env_cfg, seed);
        };
    if (skill == "explore")
        return [scenes, env_cfg](int, uint64_t seed) -> std::unique_ptr<RolloutEnv> {
            return std::make_unique<ExploreEnv>(scenes, env_cfg, seed);
        };
    if (skill == "reacher")
        return [scenes, env_cfg, reacher_category](int,
                                                   uint64_t seed) -> std::unique_ptr<RolloutEnv> {
            return std::make_unique<ReacherEnv>(scenes, env_cfg, reacher_category, seed);
        };
    if (skill == "e2e")
        return [scenes, env_cfg, categories](int, uint64_t seed) -> std::unique_ptr<RolloutEnv> {
            return std::make_unique<E2eEnv>(scenes, env_cfg, categories, seed);
        };
    throw std::runtime_error("make_env_factory: unknown skill '" + skill + "'");
}

// ---------------------------------------------------------------------------
// Suite evaluation

struct EvalSpec {
    std::vector<std::string> methods;
    int runs = 3;
    SemanticNoiseModel noise;
    uint64_t seed = 0;
    int jobs = 1; // episode-level parallelism; results are order-independent
    SimConfig sim;
    ControllerConfig controller;
    std::map<std::string, Checkpoint> checkpoints; // keyed by skill name / "e2e"
};

inline AgentSpec agent_spec_for(const std::string& method, const EvalSpec& spec,
                                const Dataset& ds) {
    AgentSpec a;
    a.method = method;
    a.sim = spec.sim;
    a.controller = spec.controller;
    a.map_width = ds.gen.grid_width;
    a.map_height = ds.gen.grid_height;
    auto pick = [&](const char* key) -> std::optional<SkillCheckpoint> {
        auto it = spec.checkpoints.find(key);
        if (it == spec.checkpoints.end()) return std::nullopt;
        return SkillCheckpoint{it->second.net, it->second.params};
    };
    a.pointnav = pick("pointnav");
    a.explore = pick("explore");
    a.reacher = pick("reacher");
    a.e2e = pick("e2e");
    return a;
}

inline std::vector<EpisodeResult> evaluate_method(const std::string& method, const EvalSpec& spec,
                                                  const Dataset& ds, const RoomObjectStats& stats,
                                                  uint64_t run_seed,
                                                  std::vector<TrajectoryLog>* logs = nullptr) {
    const int n = int(ds.episodes.size());
    std::vector<EpisodeResult> results(n);
    std::vector<TrajectoryLog> local_logs(logs ? n : 0);
    // Each worker owns an agent, so episode results are independent of the
    // episode-to-worker assignment.
    auto work = [&](int begin, int end) {
        auto agent = make_agent(agent_spec_for(method, spec, ds));
        for (int i = begin; i < end; ++i) {
            const EpisodeSpec& ep = ds.episodes[i];
            const Scene* scene = ds.scene_by_id(ep.scene_id);
            if (!scene)
                throw std::runtime_error("evaluate_method: unknown scene '" + ep.scene_id + "'");
            EvalContext ctx;
            ctx.scene = scene;
            ctx.stats = &stats;
            ctx.sim = spec.sim;
            ctx.noise = spec.noise;
            ctx.categories = ds.categories;
            ctx.seed = run_seed;
            EpisodeResult r = run_episode(ctx, ep, *agent, logs ? &local_logs[i] : nullptr);
            r.method = method;
            r.seed = run_seed;
            results[i] = r;
            if (logs) local_logs[i].method = method;
        }
    };
    const int jobs = std::max(1, std::min(spec.jobs, n));
    if (jobs == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errs(jobs);
        for (int j = 0; j < jobs; ++j)
            threads.emplace_back([&, j] {
                try {
                    work(j * n / jobs, (j + 1) * n / jobs);
                } catch (...) {
                    errs[j] = std::current_exception();
                }
            });
        for (auto& t : threads) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    if (logs)
        for (auto& l : local_logs) logs->push_back(std::move(l));
    return results;
}

inline std::vector<RunResults> evaluate_suite(const EvalSpec& spec, const Dataset& ds) {
    RoomObjectStats stats = ds.stats();
    std::vector<RunResults> runs;
    for (int r = 0; r < spec.runs; ++r) {
        RunResults run;
        for (const auto& method : spec.methods)
            run[method] =
                evaluate_method(method, spec, ds, stats, hash_combine(spec.seed, 0x40 + r));
        runs.push_back(std::move(run));
    }
    return runs;
}

inline json report_to_json(const SuiteReport& rep) {
    json j;
    j["runs"] = rep.runs;
    j["episodes_per_run"] = rep.episodes_per_run;
    for (const auto& [method, m] : rep.mean)
        j["mean"][method] = {{"success", m.success}, {"spl", m.spl}, {"soft_spl", m.soft_spl}};
    for (const auto& [method, m] : rep.dispersion)
        j["dispersion"][method] = {
            {"success", m.success}, {"spl", m.spl}, {"soft_spl", m.soft_spl}};
    return j;
}

} // namespace hlponav
