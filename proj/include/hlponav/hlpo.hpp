#pragma once
#include <algorithm>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapper.hpp"
#include "skills.hpp"

namespace hlponav {

// ---------------------------------------------------------------------------
// Global landmark policy: rank rooms by P(goal | room type) / distance.

struct LandmarkPlan {
    std::vector<std::pair<int, double>> ranked; // (landmark index, score), best first
    std::set<int> visited;
    int current = -1;
    bool nearest_first_fallback = false; // category unseen in every present room type
};

struct RankConfig {
    double min_distance = 1.0; // meters, floor for the distance divisor
};

inline LandmarkPlan rank_landmarks(const LandmarkList& landmarks, const RoomObjectStats& stats,
                                   const std::string& goal_category, const Vec2& agent_position,
                                   const std::set<int>& visited = {},
                                   const RankConfig& cfg = {}) {
    LandmarkPlan plan;
    plan.visited = visited;
    std::vector<int> idx;
    std::vector<double> dist(landmarks.size()), score(landmarks.size());
    for (int i = 0; i < int(landmarks.size()); ++i) {
        if (visited.count(i)) continue;
        dist[i] = distance(agent_position, landmarks[i].center);
        score[i] = stats.prob(landmarks[i].room_type, goal_category) /
                   std::max(dist[i], cfg.min_distance);
        idx.push_back(i);
    }
    bool all_zero = true;
    for (int i : idx)
        if (score[i] > 0.0) all_zero = false;
    if (all_zero && !idx.empty()) {
        plan.nearest_first_fallback = true;
        for (int i : idx) score[i] = 1.0 / std::max(dist[i], cfg.min_distance);
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] > score[b];
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    for (int i : idx) plan.ranked.emplace_back(i, score[i]);
    if (!plan.ranked.empty()) plan.current = plan.ranked.front().first;
    return plan;
}

// ---------------------------------------------------------------------------
// Hierarchical controller (the explicit skill sequence)

enum class Phase { GoToLandmark, ExploreLandmark, ReachGoal, Fallback, Done };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::GoToLandmark: return "goto_landmark";
        case Phase::ExploreLandmark: return "explore_landmark";
        case Phase::ReachGoal: return "reach_goal";
        case Phase::Fallback: return "fallback_explore";
        case Phase::Done: return "done";
    }
    return "?";
}

struct ControllerConfig {
    double landmark_radius = 2.0;
    int per_landmark_budget = 100; // explore steps within one landmark area
    int goto_budget = 150;         // travel steps toward one landmark before giving up on it
    int mask_lost_timeout = 20;    // steps without a goal mask before leaving ReachGoal
    bool rerank_after_visit = true;
    RankConfig rank;
};

// Algorithm-structured state machine: PointNav to the ranked landmark,
// explore inside its area, hand control to the reacher once the goal mask is
// seen; visited landmarks are never re-selected.
class HlpoController {
  public:
    HlpoController(SkillPolicy* pointnav, SkillPolicy* explore, SkillPolicy* reacher,
                   const ControllerConfig& cfg = {})
        : pointnav_(pointnav), explore_(explore), reacher_(reacher), cfg_(cfg) {}

    void reset(const LandmarkList& landmarks, const RoomObjectStats& stats,
               const std::string& goal_category, const Vec2& start_position) {
        landmarks_ = landmarks;
        stats_ = stats;
        goal_ = goal_category;
        plan_ = rank_landmarks(landmarks_, stats_, goal_, start_position, {}, cfg_.rank);
        phase_ = plan_.current >= 0 ? Phase::GoToLandmark : Phase::Fallback;
        explore_steps_ = 0;
        goto_steps_ = 0;
        mask_lost_ = 0;
        pointnav_->reset();
        explore_->reset();
        reacher_->reset();
    }

    Action act(const SkillInputs& in) {
        const Observation& obs = *in.observation;
        switch (phase_) {
            case Phase::GoToLandmark: {
                if (inside_current(in.pose)) {
                    enter_explore();
                    return act(in);
                }
                if (++goto_steps_ > cfg_.goto_budget) {
                    // Travel stalled; write the landmark off and try the next.
                    advance_landmark(in.pose.position);
                    return act(in);
                }
                SkillInputs pin = in;
                pin.target = landmarks_[plan_.current].center;
                active_ = pointnav_;
                Action a = pointnav_->act(pin);
                return a == Action::Stop ? Action::Forward : a;
            }
            case Phase::ExploreLandmark: {
                if (obs.goal_visible()) {
                    phase_ = Phase::ReachGoal;
                    mask_lost_ = 0;
                    reacher_->reset();
                    return act(in);
                }
                if (!inside_current(in.pose) || explore_steps_ >= cfg_.per_landmark_budget) {
                    advance_landmark(in.pose.position);
                    return act(in);
                }
                ++explore_steps_;
                active_ = explore_;
                Action a = explore_->act(in);
                if (a == Action::Stop) {
                    // Scripted explore ran out of frontiers; treat the room as done.
                    advance_landmark(in.pose.position);
                    return act(in);
                }
                return a;
            }
            case Phase::ReachGoal: {
                mask_lost_ = obs.goal_visible() ? 0 : mask_lost_ + 1;
                if (mask_lost_ > cfg_.mask_lost_timeout) {
                    phase_ = plan_.current >= 0 ? Phase::ExploreLandmark : Phase::Fallback;
                    explore_->reset();
                    return act(in);
                }
                active_ = reacher_;
                Action a = reacher_->act(in);
                if (a == Action::Stop) phase_ = Phase::Done;
                return a;
            }
            case Phase::Fallback: {
                if (obs.goal_visible()) {
                    phase_ = Phase::ReachGoal;
                    mask_lost_ = 0;
                    reacher_->reset();
                    return act(in);
                }
                active_ = explore_;
                Action a = explore_->act(in);
                if (a == Action::Stop) phase_ = Phase::Done;
                return a;
            }
            case Phase::Done:
                return Action::Stop;
        }
        return Action::Stop;
    }

    Phase phase() const { return phase_; }
    const LandmarkPlan& plan() const { return plan_; }
    const char* skill_tag() const {
        if (phase_ == Phase::Done) return "done";
        if (!active_) return "none";
        return skill_name(active_->kind());
    }

  private:
    bool inside_current(const AgentPose& pose) const {
        return plan_.current >= 0 &&
               inside_landmark_area(pose, landmarks_[plan_.current], cfg_.landmark_radius);
    }

    void enter_explore() {
        phase_ = Phase::ExploreLandmark;
        explore_steps_ = 0;
        explore_->reset();
    }

    void advance_landmark(const Vec2& position) {
        plan_.visited.insert(plan_.current);
        if (int(plan_.visited.size()) >= int(landmarks_.size())) {
            plan_.current = -1;
            phase_ = Phase::Fallback;
            return;
        }
        if (cfg_.rerank_after_visit) {
            auto visited = plan_.visited;
            plan_ = rank_landmarks(landmarks_, stats_, goal_, position, visited, cfg_.rank);
            plan_.visited = visited;
        } else {
            plan_.current = -1;
            for (auto& [i, s] : plan_.ranked)
                if (!plan_.visited.count(i)) {
                    plan_.current = i;
                    break;
                }
        }
        if (plan_.current < 0) {
            phase_ = Phase::Fallback;
        } else {
            phase_ = Phase::GoToLandmark;
            goto_steps_ = 0;
            pointnav_->reset();
        }
    }

    SkillPolicy* pointnav_;
    SkillPolicy* explore_;
    SkillPolicy* reacher_;
    SkillPolicy* active_ = nullptr;
    ControllerConfig cfg_;
    LandmarkList landmarks_;
    RoomObjectStats stats_;
    std::string goal_;
    LandmarkPlan plan_;
    Phase phase_ = Phase::Done;
    int explore_steps_ = 0;
    int goto_steps_ = 0;
    int mask_lost_ = 0;
};

// ---------------------------------------------------------------------------
// Composed agents (the evaluation-method matrix)

struct EpisodeContext {
    EpisodeSpec episode;
    SimConfig sim;
    std::vector<std::string> categories;
    uint64_t seed = 0; // per-episode stream for stochastic policies
};

class Agent {
  public:
    virtual ~Agent() = default;
    virtual void reset(const EpisodeContext& ctx) = 0;
    virtual Action act(const Observation& obs) = 0;
    virtual std::string skill_tag() const { return "agent"; }
};

// Capability interfaces: only agents that expose these ever receive the data.
class UsesLandmarks {
  public:
    virtual ~UsesLandmarks() = default;
    virtual void set_landmarks(const LandmarkList& landmarks, const RoomObjectStats& stats) = 0;
};

class UsesGroundTruthMap {
  public:
    virtual ~UsesGroundTruthMap() = default;
    virtual void set_gt_map(const Grid& grid) = 0;
};

namespace agent_detail {

// Pose dead-reckoned from GPS+compass; exact because odometry is noiseless.
inline AgentPose pose_from_obs(const Observation& obs, const EpisodeSpec& ep) {
    double c = std::cos(ep.start_heading), s = std::sin(ep.start_heading);
    return {{ep.start.x + obs.gps.x * c - obs.gps.y * s,
             ep.start.y + obs.gps.x * s + obs.gps.y * c},
            wrap_angle(ep.start_heading + obs.compass)};
}

// Shared online reconstruction used by every map-consuming agent.
class MapBuilder {
  public:
    void reset(const SimConfig& cfg, int width, int height, double cell_size) {
        cfg_ = cfg;
        map_ = OccupancyMap(width, height, cell_size);
    }
    void integrate(const Observation& obs, const AgentPose& pose) {
        int n = int(obs.depth_rays.size());
        std::vector<double> angles(n);
        for (int i = 0; i < n; ++i) {
            double frac = n == 1 ? 0.5 : double(i) / (n - 1);
            angles[i] = pose.heading - cfg_.fov * 0.5 + frac * cfg_.fov;
        }
        integrate_scan(map_, pose.position, obs.depth_rays, angles, cfg_.max_range);
    }
    OccupancyMap& map() { return map_; }

  private:
    SimConfig cfg_;
    OccupancyMap map_;
};

} // namespace agent_detail

struct SkillCheckpoint {
    NetConfig net;
    ParamVec params;
};

// Full HLPO agent; backend mix is whatever SkillPolicy set it is built with.
class HlpoAgent : public Agent, public UsesLandmarks {
  public:
    HlpoAgent(std::unique_ptr<SkillPolicy> pointnav, std::unique_ptr<SkillPolicy> explore,
              std::unique_ptr<SkillPolicy> reacher, const ControllerConfig& cfg = {},
              int map_width = 0, int map_height = 0, double cell_size = 0.25)
        : pointnav_(std::move(pointnav)), explore_(std::move(explore)),
          reacher_(std::move(reacher)),
          controller_(pointnav_.get(), explore_.get(), reacher_.get(), cfg),
          map_width_(map_width), map_height_(map_height), cell_size_(cell_size) {}

    void set_landmarks(const LandmarkList& landmarks, const RoomObjectStats& stats) override {
        landmarks_ = landmarks;
        stats_ = stats;
    }

    void reset(const EpisodeContext& ctx) override {
        ctx_ = ctx;
        builder_.reset(ctx.sim, map_width_, map_height_, cell_size_);
        pointnav_->seed(hash_combine(ctx.seed, 1));
        explore_->seed(hash_combine(ctx.seed, 2));
        reacher_->seed(hash_combine(ctx.seed, 3));
        controller_.reset(landmarks_, stats_, ctx.episode.goal_category, ctx.episode.start);
    }

    Action act(const Observation& obs) override {
        AgentPose pose = agent_detail::pose_from_obs(obs, ctx_.episode);
        builder_.integrate(obs, pose);
        SkillInputs in{&obs, pose, &builder_.map(), {}};
        return controller_.act(in);
    }

    std::string skill_tag() const override { return controller_.skill_tag(); }
    const HlpoController& controller() const { return controller_; }

  private:
    std::unique_ptr<SkillPolicy> pointnav_, explore_, reacher_;
    HlpoController controller_;
    agent_detail::MapBuilder builder_;
    LandmarkList landmarks_;
    RoomObjectStats stats_;
    EpisodeContext ctx_;
    int map_width_, map_height_;
    double cell_size_;
};

// GT-map-planning PointNav backend used by HLPO (Map).
class GtMapPointNav : public SkillPolicy {
  public:
    GtMapPointNav(const SimConfig& sim_cfg, const OccupancyMap* gt_map)
        : sim_cfg_(sim_cfg), gt_map_(gt_map) {}
    SkillKind kind() const override { return SkillKind::PointNav; }
    SkillBackend backend() const override { return SkillBackend::Scripted; }
    void reset() override {}
    Action act(const SkillInputs& in) override {
        return plan_or_recover(*gt_map_, in.pose, in.target, sim_cfg_.turn_angle, {});
    }

  private:
    SimConfig sim_cfg_;
    const OccupancyMap* gt_map_;
};

// HLPO (Map): GoToLandmark plans on the ground-truth obstacle grid; the
// in-room skills stay whatever they were built as.
class HlpoMapAgent : public HlpoAgent, public UsesGroundTruthMap {
  public:
    HlpoMapAgent(std::unique_ptr<SkillPolicy> explore, std::unique_ptr<SkillPolicy> reacher,
                 const SimConfig& sim_cfg, const ControllerConfig& cfg, int map_width,
                 int map_height, double cell_size)
        : HlpoAgent(std::make_unique<GtMapPointNav>(sim_cfg, &gt_map_), std::move(explore),
                    std::move(reacher), cfg, map_width, map_height, cell_size) {}
    void set_gt_map(const Grid& grid) override { gt_map_ = OccupancyMap::from_grid(grid); }
    const OccupancyMap& gt_map() const { return gt_map_; }

  private:
    OccupancyMap gt_map_;
};

// Explore-until-seen-then-reach composition shared by 2RL and Planning; no
// landmark knowledge at all.
class ExploreReachAgent : public Agent {
  public:
    ExploreReachAgent(std::unique_ptr<SkillPolicy> explore, std::unique_ptr<SkillPolicy> reacher,
                      int mask_lost_timeout, int map_width, int map_height, double cell_size)
        : explore_(std::move(explore)), reacher_(std::move(reacher)),
          mask_lost_timeout_(mask_lost_timeout), map_width_(map_width),
          map_height_(map_height), cell_size_(cell_size) {}

    void reset(const EpisodeContext& ctx) override {
        ctx_ = ctx;
        builder_.reset(ctx.sim, map_width_, map_height_, cell_size_);
        explore_->seed(hash_combine(ctx.seed, 2));
        reacher_->seed(hash_combine(ctx.seed, 3));
        explore_->reset();
        reacher_->reset();
        reaching_ = false;
        mask_lost_ = 0;
        tag_ = "explore";
    }

    Action act(const Observation& obs) override {
        AgentPose pose = agent_detail::pose_from_obs(obs, ctx_.episode);
        builder_.integrate(obs, pose);
        SkillInputs in{&obs, pose, &builder_.map(), {}};
        if (obs.goal_visible() && !reaching_) {
            reaching_ = true;
            mask_lost_ = 0;
            reacher_->reset();
        }
        if (reaching_) {
            mask_lost_ = obs.goal_visible() ? 0 : mask_lost_ + 1;
            if (mask_lost_ > mask_lost_timeout_) {
                reaching_ = false;
                explore_->reset();
            } else {
                tag_ = "reacher";
                return reacher_->act(in);
            }
        }
        tag_ = "explore";
        Action a = explore_->act(in);
        return a; // scripted explore may Stop when no frontier remains
    }

    std::string skill_tag() const override { return tag_; }

  private:
    std::unique_ptr<SkillPolicy> explore_, reacher_;
    agent_detail::MapBuilder builder_;
    EpisodeContext ctx_;
    bool reaching_ = false;
    int mask_lost_ = 0;
    int mask_lost_timeout_;
    int map_width_, map_height_;
    double cell_size_;
    std::string tag_ = "explore";
};

// End-to-end learned policy over the full observation plus goal category.
class E2eAgent : public Agent {
  public:
    E2eAgent(const SkillCheckpoint& ckpt, double max_range)
        : net_(ckpt.net), params_(ckpt.params), max_range_(max_range) {}

    static int obs_dim(int num_rays, int num_categories) {
        return 2 * num_rays + 8 + num_categories;
    }

    static std::vector<double> encode(const Observation& o, double max_range,
                                      const std::vector<std::string>& categories,
                                      const std::string& goal) {
        std::vector<double> v;
        for (double d : o.depth_rays) v.push_back(d / max_range);
        for (double m : o.goal_mask) v.push_back(m);
        v.push_back(o.gps.x * 0.1);
        v.push_back(o.gps.y * 0.1);
        v.push_back(std::sin(o.compass));
        v.push_back(std::cos(o.compass));
        for (int a = 0; a < kNumActions; ++a)
            v.push_back(int(o.prev_action) == a ? 1.0 : 0.0);
        for (const auto& c : categories) v.push_back(c == goal ? 1.0 : 0.0);
        return v;
    }

    void reset(const EpisodeContext& ctx) override {
        ctx_ = ctx;
        hidden_ = net_.initial_hidden();
        rng_ = make_rng(ctx.seed, 4);
    }

    Action act(const Observation& obs) override {
        auto v = encode(obs, max_range_, ctx_.categories, ctx_.episode.goal_category);
        auto out = net_.forward(params_, v, hidden_);
        hidden_ = out.hidden;
        return Action(sample_categorical(out.logits, rng_));
    }

    std::string skill_tag() const override { return "e2e"; }

  private:
    ActorCritic net_;
    ParamVec params_;
    double max_range_;
    EpisodeContext ctx_;
    Rng rng_{0};
    std::vector<double> hidden_;
};

// Training environment for the end-to-end policy: full task MDP with geodesic
// progress shaping and the terminal stop bonus/penalty.
class E2eEnv : public SkillEnvBase {
  public:
    E2eEnv(std::shared_ptr<const std::vector<Scene>> scenes, const SkillEnvConfig& cfg,
           std::vector<std::string> categories, uint64_t seed)
        : SkillEnvBase(std::move(scenes), cfg, seed), categories_(std::move(categories)) {}

    std::vector<double> reset() override {
        for (;;) {
            const Scene& s = random_scene();
            const std::string& cat = categories_[uniform_int(rng_, 0, int(categories_.size()) - 1)];
            auto goals = s.goal_positions(cat);
            if (goals.empty()) continue;
            EpisodeSpec ep;
            ep.scene_id = "train";
            ep.goal_category = cat;
            ep.start = random_free_point(s);
            ep.start_heading = random_heading();
            sim_ = std::make_unique<Simulator>(s, ep, cfg_.sim, cfg_.noise, rng_());
            auto obs = sim_->reset();
            std::vector<Cell> goal_cells;
            for (const Vec2& p : goals) goal_cells.push_back(s.grid.world_to_cell(p));
            OccupancyMap m = OccupancyMap::from_grid(s.grid);
            field_ = fmm_distance_field(m, goal_cells, {.obstacle_inflation = 0});
            prev_dist_ = field_dist();
            initial_dist_ = std::max(prev_dist_, 1e-9);
            current_ = {};
            return E2eAgent::encode(obs, cfg_.sim.max_range, categories_, cat);
        }
    }

    EnvStep step(int action) override {
        Action a = Action(action);
        auto sr = sim_->step(a);
        double d = field_dist();
        double reward = cfg_.rewards.distance_gain * (prev_dist_ - d) - cfg_.rewards.slack;
        if (a == Action::Stop)
            reward += sr.info.success ? cfg_.rewards.success_bonus : -cfg_.rewards.stop_penalty;
        prev_dist_ = d;
        if (sr.done) {
            current_.success = sr.info.success;
            current_.distance_to_goal = d;
            current_.steps = sim_->steps();
            double p = sim_->path_length();
            current_.spl = sr.info.success
                               ? initial_dist_ / std::max(std::max(p, initial_dist_), 1e-9)
                               : 0.0;
            finished_ = current_;
            return {reset(), reward, true};
        }
        return {E2eAgent::encode(sr.observation, cfg_.sim.max_range, categories_,
                                 sim_->episode().goal_category),
                reward, false};
    }

    int obs_dim() const override {
        return E2eAgent::obs_dim(cfg_.sim.num_rays, int(categories_.size()));
    }

  private:
    double field_dist() const {
        Cell c = sim_->scene().grid.world_to_cell(sim_->pose().position);
        double d = field_.at(c);
        return d < kInf ? d : 50.0;
    }
    std::vector<std::string> categories_;
    DistanceField field_;
    double prev_dist_ = 0.0;
    double initial_dist_ = 0.0;
};

// ---------------------------------------------------------------------------
// Agent factory

struct AgentSpec {
    std::string method; // e2e_rl | planning | two_rl | hlpo | hlpo_plan | hlpo_map
    SimConfig sim;
    ControllerConfig controller;
    int map_width = 0;
    int map_height = 0;
    // learned checkpoints; required per method
    std::optional<SkillCheckpoint> pointnav, explore, reacher, e2e;
};

inline std::unique_ptr<Agent> make_agent(const AgentSpec& spec) {
    const double cs = 0.25;
    auto learned = [&](SkillKind k, const std::optional<SkillCheckpoint>& c) {
        if (!c)
            throw std::runtime_error("make_agent: missing checkpoint for skill " +
                                     std::string(skill_name(k)));
        return std::make_unique<LearnedSkill>(k, c->net, c->params, spec.sim.max_range);
    };
    auto scripted = [&](SkillKind k) { return std::make_unique<ScriptedSkill>(k, spec.sim); };

    if (spec.method == "e2e_rl") {
        if (!spec.e2e) throw std::runtime_error("make_agent: missing checkpoint for e2e policy");
        return std::make_unique<E2eAgent>(*spec.e2e, spec.sim.max_range);
    }
    if (spec.method == "planning")
        return std::make_unique<ExploreReachAgent>(scripted(SkillKind::Explore),
                                                   scripted(SkillKind::Reacher),
                                                   spec.controller.mask_lost_timeout,
                                                   spec.map_width, spec.map_height, cs);
    if (spec.method == "two_rl")
        return std::make_unique<ExploreReachAgent>(
            learned(SkillKind::Explore, spec.explore), learned(SkillKind::Reacher, spec.reacher),
            spec.controller.mask_lost_timeout, spec.map_width, spec.map_height, cs);
    if (spec.method == "hlpo")
        return std::make_unique<HlpoAgent>(
            learned(SkillKind::PointNav, spec.pointnav), learned(SkillKind::Explore, spec.explore),
            learned(SkillKind::Reacher, spec.reacher), spec.controller, spec.map_width,
            spec.map_height, cs);
    if (spec.method == "hlpo_plan")
        return std::make_unique<HlpoAgent>(scripted(SkillKind::PointNav),
                                           scripted(SkillKind::Explore),
                                           scripted(SkillKind::Reacher), spec.controller,
                                           spec.map_width, spec.map_height, cs);
    if (spec.method == "hlpo_map")
        return std::make_unique<HlpoMapAgent>(
            learned(SkillKind::Explore, spec.explore), learned(SkillKind::Reacher, spec.reacher),
            spec.sim, spec.controller, spec.map_width, spec.map_height, cs);
    throw std::runtime_error("make_agent: unknown method '" + spec.method + "'");
}

} // namespace hlponav
