// Command-line harness: dataset generation, skill training, suite evaluation,
// dataset statistics, and trajectory rendering.
//
// Exit codes: 0 success, 1 runtime failure, 2 validation failure (bad
// arguments, missing or mismatched inputs), 3 training divergence.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hlponav/harness.hpp"
#include "hlponav/render.hpp"

namespace fs = std::filesystem;
using namespace hlponav;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
    std::string out;
    std::string config; // optional scene generator config JSON
    uint64_t seed = 1;
    int train_scenes = 8;
    int eval_scenes = 6;
    int episodes = 100;
    double min_geodesic = 3.0;
    std::vector<std::string> categories;
};

int cmd_gen(const GenOpts& o) {
    ScenegenConfig gen = default_scenegen_config();
    if (!o.config.empty()) {
        if (!fs::exists(o.config)) throw ValidationError("config file not found: " + o.config);
        gen = scenegen_config_from_json(read_json(o.config));
    }
    Dataset ds = o.categories.empty()
                     ? build_dataset(gen, o.train_scenes, o.eval_scenes, o.episodes,
                                     o.min_geodesic, o.seed)
                     : build_dataset(gen, o.train_scenes, o.eval_scenes, o.episodes,
                                     o.min_geodesic, o.seed, o.categories);
    save_dataset(ds, o.out);

    std::map<std::string, int> room_hist, goal_hist;
    auto count_rooms = [&](const std::vector<Scene>& scenes) {
        for (const auto& s : scenes)
            for (const auto& r : s.rooms) ++room_hist[r.room_type];
    };
    count_rooms(ds.train_scenes);
    count_rooms(ds.eval_scenes);
    for (const auto& e : ds.episodes) ++goal_hist[e.goal_category];

    std::cout << "dataset " << o.out << "\n"
              << "  config_hash " << ds.cfg_hash << "  seed " << ds.seed << "\n"
              << "  scenes " << ds.train_scenes.size() << " train + " << ds.eval_scenes.size()
              << " eval, episodes " << ds.episodes.size() << " (min geodesic " << o.min_geodesic
              << " m)\n";
    std::cout << "  room types:";
    for (const auto& [k, v] : room_hist) std::cout << " " << k << "=" << v;
    std::cout << "\n  goal categories:";
    for (const auto& [k, v] : goal_hist) std::cout << " " << k << "=" << v;
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    std::string skill; // pointnav | explore | reacher | e2e
    std::string dataset;
    std::string out;       // checkpoint JSON
    std::string curve;     // metrics CSV; defaults next to checkpoint
    std::string resume;    // checkpoint to continue from
    std::string category = "chair"; // reacher goal category
    long steps = 200000;
    uint64_t seed = 1;
    int workers = 1;
    int envs = 0;          // 0 = per-skill default
    int max_episode_steps = 128;
    double pn_min_dist = 1.0;
    double pn_max_dist = 4.0;
    int hidden = 64;
    int enc = 32;
    double lr = 0.00025;
    double entropy = 0.01;
};

int cmd_train(const TrainOpts& o) {
    if (!fs::exists(fs::path(o.dataset) / "manifest.json"))
        throw ValidationError("dataset not found: " + o.dataset);
    Dataset ds = load_dataset(o.dataset);
    auto scenes = std::make_shared<const std::vector<Scene>>(ds.train_scenes);

    SkillEnvConfig env_cfg;
    env_cfg.max_episode_steps = o.max_episode_steps;
    env_cfg.pointnav_min_dist = o.pn_min_dist;
    env_cfg.pointnav_max_dist = o.pn_max_dist;
    if (o.skill == "e2e") env_cfg.max_episode_steps = std::max(o.max_episode_steps, 256);

    TrainConfig tc;
    tc.seed = o.seed;
    tc.total_env_steps = o.steps;
    tc.num_workers = o.workers;
    tc.learning_rate = o.lr;
    tc.entropy_coef = o.entropy;
    int envs = o.envs > 0 ? o.envs : default_env_count(o.skill);
    if (envs % o.workers != 0)
        throw ValidationError("env count " + std::to_string(envs) + " not divisible by " +
                              std::to_string(o.workers) + " workers");
    tc.envs_per_worker = envs / o.workers;

    NetConfig nc = net_config_for(o.skill, env_cfg.sim.num_rays, int(ds.categories.size()), o.enc,
                                  o.hidden);
    ActorCritic net(nc);
    Trainer trainer(net, tc,
                    make_env_factory(o.skill, scenes, env_cfg, ds.categories, o.category));

    json run_cfg = {{"skill", o.skill},       {"dataset_hash", ds.cfg_hash},
                    {"seed", o.seed},         {"total_env_steps", o.steps},
                    {"workers", o.workers},   {"envs", envs},
                    {"lr", o.lr},             {"entropy", o.entropy},
                    {"hidden", o.hidden},     {"enc", o.enc},
                    {"max_episode_steps", env_cfg.max_episode_steps}};
    const std::string run_hash = config_hash(run_cfg);
    const std::string curve_path =
        o.curve.empty() ? (fs::path(o.out).replace_extension(".curve.csv").string()) : o.curve;

    std::ostringstream curve;
    curve << "# config_hash=" << run_hash << " seed=" << o.seed << "\n"
          << "step,update,mean_reward,entropy,loss,value_loss,success_rate,mean_spl,"
             "mean_distance_to_goal,mean_explored_area,mean_episode_steps\n";
    trainer.on_update = [&](const UpdateMetrics& m, const ParamVec&) {
        curve << m.env_steps << "," << m.update << "," << m.mean_reward << "," << m.entropy << ","
              << m.loss << "," << m.value_loss << "," << m.success_rate << "," << m.mean_spl << ","
              << m.mean_distance_to_goal << "," << m.mean_explored_area << ","
              << m.mean_episode_steps << "\n";
        if (m.update % 25 == 0)
            std::cout << "step " << m.env_steps << " reward " << m.mean_reward << " success "
                      << m.success_rate << " entropy " << m.entropy << "\n";
    };

    TrainResult result;
    long start_steps = 0;
    if (!o.resume.empty()) {
        if (!fs::exists(o.resume)) throw ValidationError("resume checkpoint not found: " + o.resume);
        Checkpoint prev = checkpoint_from_json(read_json(o.resume));
        if (prev.skill != o.skill)
            throw ValidationError("resume checkpoint is for skill '" + prev.skill + "', not '" +
                                  o.skill + "'");
        if (!(prev.net == nc))
            throw ValidationError("resume checkpoint network shape differs from requested shape");
        start_steps = prev.env_steps;
        tc.total_env_steps += start_steps;
        Trainer resumed(net, tc,
                        make_env_factory(o.skill, scenes, env_cfg, ds.categories, o.category));
        resumed.on_update = trainer.on_update;
        result = resumed.train_from(prev.params, start_steps);
    } else {
        result = trainer.train();
    }

    Checkpoint ck;
    ck.skill = o.skill;
    ck.net = nc;
    ck.params = result.params;
    ck.env_steps = result.curve.empty() ? start_steps : result.curve.back().env_steps;
    ck.cfg_hash = run_hash;
    if (!fs::path(o.out).parent_path().empty())
        fs::create_directories(fs::path(o.out).parent_path());
    write_json(o.out, to_json(ck));
    write_text(curve_path, curve.str());
    std::cout << "checkpoint " << o.out << " (" << ck.env_steps << " env steps)\ncurve "
              << curve_path << "\n";
    if (result.diverged) {
        std::cerr << "training diverged: " << result.divergence_reason << "\n";
        return kExitDivergence;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
    std::string dataset;
    std::string out;
    std::vector<std::string> methods;
    std::string semantics = "gt"; // gt | noisy
    double p_fn = 0.3;
    double p_fp = 0.02;
    int runs = 3;
    uint64_t seed = 1;
    int jobs = 1;
    int max_steps = 500;
    double landmark_radius = 4.0;
    std::string pointnav_ck, explore_ck, reacher_ck, e2e_ck;
    bool logs = true;
};

int cmd_eval(const EvalOpts& o) {
    if (!fs::exists(fs::path(o.dataset) / "manifest.json"))
        throw ValidationError("dataset not found: " + o.dataset);
    if (o.semantics != "gt" && o.semantics != "noisy")
        throw ValidationError("semantics must be 'gt' or 'noisy'");
    Dataset ds = load_dataset(o.dataset);

    EvalSpec spec;
    spec.methods = o.methods;
    spec.runs = o.runs;
    spec.seed = o.seed;
    spec.jobs = o.jobs;
    spec.sim.max_steps = o.max_steps;
    spec.controller.landmark_radius = o.landmark_radius;
    if (o.semantics == "noisy") spec.noise = {o.p_fn, o.p_fp};
    auto add_ck = [&](const char* key, const std::string& path) {
        if (path.empty()) return;
        if (!fs::exists(path)) throw ValidationError("checkpoint not found: " + path);
        spec.checkpoints[key] = checkpoint_from_json(read_json(path));
    };
    add_ck("pointnav", o.pointnav_ck);
    add_ck("explore", o.explore_ck);
    add_ck("reacher", o.reacher_ck);
    add_ck("e2e", o.e2e_ck);

    // Surface missing-checkpoint errors as validation failures before running.
    for (const auto& m : spec.methods) {
        try {
            make_agent(agent_spec_for(m, spec, ds));
        } catch (const std::runtime_error& e) {
            throw ValidationError(e.what());
        }
    }

    fs::create_directories(o.out);
    RoomObjectStats stats = ds.stats();
    std::vector<RunResults> runs;
    std::vector<EpisodeResult> all;
    for (int r = 0; r < spec.runs; ++r) {
        RunResults run;
        for (const auto& method : spec.methods) {
            std::vector<TrajectoryLog> logs;
            auto res = evaluate_method(method, spec, ds, stats, hash_combine(spec.seed, 0x40 + r),
                                       (o.logs && r == 0) ? &logs : nullptr);
            all.insert(all.end(), res.begin(), res.end());
            run[method] = std::move(res);
            if (o.logs && r == 0) {
                fs::create_directories(fs::path(o.out) / "trajectories");
                for (size_t i = 0; i < logs.size(); ++i) {
                    char name[64];
                    snprintf(name, sizeof name, "%s_%03zu.jsonl", method.c_str(), i);
                    write_text((fs::path(o.out) / "trajectories" / name).string(),
                               trajectory_to_jsonl(logs[i]));
                }
            }
        }
        runs.push_back(std::move(run));
    }

    SuiteReport rep = aggregate(runs);
    json report = report_to_json(rep);
    report["config_hash"] = ds.cfg_hash;
    report["seed"] = spec.seed;
    report["semantics"] = o.semantics;
    report["noise"] = {{"false_negative_rate", spec.noise.false_negative_rate},
                       {"false_positive_rate", spec.noise.false_positive_rate}};
    write_json((fs::path(o.out) / "report.json").string(), report);
    write_text((fs::path(o.out) / "episodes.csv").string(), results_to_csv(all));

    std::cout << "suite: " << rep.episodes_per_run << " episodes x " << rep.runs << " runs, "
              << o.semantics << " semantics\n";
    printf("%-10s %8s %8s %8s %12s\n", "method", "success", "spl", "softspl", "dispersion");
    for (const auto& m : spec.methods)
        printf("%-10s %8.3f %8.3f %8.3f %12.3f\n", m.c_str(), rep.mean[m].success, rep.mean[m].spl,
               rep.mean[m].soft_spl, rep.dispersion[m].success);
    std::cout << "report " << (fs::path(o.out) / "report.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// stats

int cmd_stats(const std::string& dataset, const std::string& out) {
    if (!fs::exists(fs::path(dataset) / "manifest.json"))
        throw ValidationError("dataset not found: " + dataset);
    Dataset ds = load_dataset(dataset);
    RoomObjectStats stats = ds.stats();

    std::ostringstream csv;
    csv << "room_type,category,probability\n";
    printf("%-12s %-10s %s\n", "room_type", "category", "P(room|category)");
    for (const auto& [key, p] : stats.table) {
        csv << key.first << "," << key.second << "," << p << "\n";
        printf("%-12s %-10s %.4f\n", key.first.c_str(), key.second.c_str(), p);
    }
    if (!out.empty()) {
        write_text(out, csv.str());
        std::cout << "written " << out << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// render

int cmd_render(const std::string& scene_path, const std::string& log_path, const std::string& out,
               double landmark_radius) {
    if (!fs::exists(scene_path)) throw ValidationError("scene file not found: " + scene_path);
    if (!fs::exists(log_path)) throw ValidationError("trajectory log not found: " + log_path);
    json sj = read_json(scene_path);
    Scene scene = scene_from_json(sj);
    TrajectoryLog log = trajectory_from_jsonl(read_text(log_path));
    std::string scene_id = sj.value("scene_id", "");
    if (!log.scene_id.empty() && !scene_id.empty() && log.scene_id != scene_id)
        throw ValidationError("trajectory was recorded in scene '" + log.scene_id +
                              "' but the given scene file is '" + scene_id + "'");
    write_text(out, render_svg(scene, log, landmark_radius));
    std::cout << "rendered " << log.steps.size() << " steps to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Landmark-guided object-goal navigation: datasets, training, evaluation"};
    app.require_subcommand(1);

    GenOpts g;
    auto* gen = app.add_subcommand("gen", "Generate a scene + episode dataset");
    gen->add_option("--out", g.out, "Output dataset directory")->required();
    gen->add_option("--config", g.config, "Scene generator config JSON (defaults built in)");
    gen->add_option("--seed", g.seed, "Generation seed");
    gen->add_option("--train-scenes", g.train_scenes, "Training scene count");
    gen->add_option("--eval-scenes", g.eval_scenes, "Held-out scene count");
    gen->add_option("--episodes", g.episodes, "Evaluation episode count");
    gen->add_option("--min-geodesic", g.min_geodesic, "Minimum start-goal geodesic (m)");
    gen->add_option("--categories", g.categories,
                    "Goal category whitelist (default: all known categories)")
        ->delimiter(',');

    TrainOpts t;
    auto* train = app.add_subcommand("train", "Train a navigation skill with PPO");
    train->add_option("--skill", t.skill, "pointnav | explore | reacher | e2e")
        ->required()
        ->check(CLI::IsMember({"pointnav", "explore", "reacher", "e2e"}));
    train->add_option("--dataset", t.dataset, "Dataset directory")->required();
    train->add_option("--out", t.out, "Checkpoint output path (JSON)")->required();
    train->add_option("--curve", t.curve, "Training curve CSV path");
    train->add_option("--resume", t.resume, "Checkpoint to continue from");
    train->add_option("--steps", t.steps, "Total environment steps");
    train->add_option("--seed", t.seed, "Training seed");
    train->add_option("--workers", t.workers, "Rollout workers");
    train->add_option("--envs", t.envs, "Total env count (0 = skill default)");
    train->add_option("--category", t.category, "Goal category for reacher training");
    train->add_option("--episode-steps", t.max_episode_steps, "Max steps per training episode");
    train->add_option("--pn-min-dist", t.pn_min_dist, "PointNav target band lower bound (m)");
    train->add_option("--pn-max-dist", t.pn_max_dist, "PointNav target band upper bound (m)");
    train->add_option("--hidden", t.hidden, "Recurrent hidden size");
    train->add_option("--enc", t.enc, "Encoder width");
    train->add_option("--lr", t.lr, "Learning rate");
    train->add_option("--entropy", t.entropy, "Entropy bonus coefficient");

    EvalOpts e;
    auto* eval = app.add_subcommand("eval", "Evaluate methods on a dataset");
    eval->add_option("--dataset", e.dataset, "Dataset directory")->required();
    eval->add_option("--out", e.out, "Output directory")->required();
    eval->add_option("--methods", e.methods,
                     "Methods: e2e_rl planning two_rl hlpo hlpo_plan hlpo_map")
        ->required()
        ->delimiter(',');
    eval->add_option("--semantics", e.semantics, "gt | noisy");
    eval->add_option("--p-fn", e.p_fn, "Noisy semantics: per-step goal miss rate");
    eval->add_option("--p-fp", e.p_fp, "Noisy semantics: per-step false detection rate");
    eval->add_option("--runs", e.runs, "Independent evaluation runs");
    eval->add_option("--seed", e.seed, "Evaluation seed");
    eval->add_option("--jobs", e.jobs, "Episode-level parallelism");
    eval->add_option("--max-steps", e.max_steps, "Per-episode step budget");
    eval->add_option("--landmark-radius", e.landmark_radius, "Landmark area radius (m)");
    eval->add_option("--pointnav", e.pointnav_ck, "PointNav checkpoint");
    eval->add_option("--explore", e.explore_ck, "Exploration checkpoint");
    eval->add_option("--reacher", e.reacher_ck, "GoalReacher checkpoint");
    eval->add_option("--e2e", e.e2e_ck, "End-to-end policy checkpoint");
    eval->add_flag("--no-logs{false}", e.logs, "Skip trajectory logs");

    std::string st_dataset, st_out;
    auto* stats = app.add_subcommand("stats", "Room/object co-occurrence statistics");
    stats->add_option("--dataset", st_dataset, "Dataset directory")->required();
    stats->add_option("--out", st_out, "Optional CSV output path");

    std::string r_scene, r_log, r_out;
    double r_radius = 2.0;
    auto* render = app.add_subcommand("render", "Render a trajectory over its scene as SVG");
    render->add_option("--scene", r_scene, "Scene JSON file")->required();
    render->add_option("--log", r_log, "Trajectory JSONL file")->required();
    render->add_option("--out", r_out, "SVG output path")->required();
    render->add_option("--landmark-radius", r_radius, "Landmark disk radius (m)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        int code = app.exit(err);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (gen->parsed()) return cmd_gen(g);
        if (train->parsed()) return cmd_train(t);
        if (eval->parsed()) return cmd_eval(e);
        if (stats->parsed()) return cmd_stats(st_dataset, st_out);
        if (render->parsed()) return cmd_render(r_scene, r_log, r_out, r_radius);
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
