#pragma once
#include <string>
#include <vector>

#include "hlpo.hpp"
#include "metrics.hpp"
#include "sim.hpp"

namespace hlponav {

struct StepRecord {
    int step = 0;
    AgentPose pose;
    Action action = Action::Stop;
    bool collision = false;
    std::string skill;
};

struct TrajectoryLog {
    std::string scene_id;
    std::string goal_category;
    std::string method;
    std::vector<StepRecord> steps;
};

struct EvalContext {
    const Scene* scene = nullptr;
    const RoomObjectStats* stats = nullptr;
    SimConfig sim;
    SemanticNoiseModel noise;
    std::vector<std::string> categories;
    uint64_t seed = 0;
};

inline EpisodeResult run_episode(const EvalContext& ctx, const EpisodeSpec& episode, Agent& agent,
                                 TrajectoryLog* log = nullptr) {
    const Scene& scene = *ctx.scene;
    if (auto* lm = dynamic_cast<UsesLandmarks*>(&agent))
        lm->set_landmarks(scene.landmarks, *ctx.stats);
    if (auto* gt = dynamic_cast<UsesGroundTruthMap*>(&agent)) gt->set_gt_map(scene.grid);

    uint64_t ep_key = hash_combine(uint64_t(episode.start.x * 4096) * 65537 +
                                       uint64_t(episode.start.y * 4096),
                                   std::hash<std::string>{}(episode.goal_category));
    // Semantic-noise draws key on the episode alone, not the run seed: a
    // detector's errors are a systematic property of the surfaces it sees,
    // so repeated runs disagree only through policy stochasticity.
    Simulator sim(scene, episode, ctx.sim, ctx.noise, hash_combine(0xD7EC7, ep_key));
    Observation obs = sim.reset();
    EpisodeContext ectx{episode, ctx.sim, ctx.categories,
                        hash_combine(hash_combine(ctx.seed, ep_key), 0xA6)};
    agent.reset(ectx);

    if (log) {
        log->scene_id = episode.scene_id;
        log->goal_category = episode.goal_category;
        log->steps.clear();
    }
    while (!sim.done()) {
        Action a = agent.act(obs);
        auto sr = sim.step(a);
        if (log)
            log->steps.push_back(
                {sim.steps(), sim.pose(), a, sr.info.collision, agent.skill_tag()});
        obs = sr.observation;
    }

    EpisodeResult r;
    r.success = sim.success();
    r.shortest_path_length = episode.shortest_path_length;
    r.agent_path_length = sim.path_length();
    r.steps = sim.steps();
    r.initial_distance_to_goal = episode.shortest_path_length;
    r.seed = ctx.seed;
    // final geodesic distance to the closest goal instance
    std::vector<Cell> goal_cells;
    for (const Vec2& p : scene.goal_positions(episode.goal_category))
        goal_cells.push_back(scene.grid.world_to_cell(p));
    OccupancyMap m = OccupancyMap::from_grid(scene.grid);
    DistanceField df = fmm_distance_field(m, goal_cells, {.obstacle_inflation = 0});
    Cell fin = scene.grid.world_to_cell(sim.pose().position);
    r.final_distance_to_goal = df.reachable(fin) ? df.at(fin) : episode.shortest_path_length;
    return r;
}

} // namespace hlponav
