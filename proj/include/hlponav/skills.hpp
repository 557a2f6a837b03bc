#pragma once
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapper.hpp"
#include "nn.hpp"
#include "rlcore.hpp"
#include "scenegen.hpp"
#include "sim.hpp"

namespace hlponav {

enum class SkillKind { PointNav, Explore, Reacher };
enum class SkillBackend { Learned, Scripted };

inline const char* skill_name(SkillKind k) {
    switch (k) {
        case SkillKind::PointNav: return "pointnav";
        case SkillKind::Explore: return "explore";
        case SkillKind::Reacher: return "reacher";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Rewards

struct RewardConstants {
    double distance_gain = 1.0;   // per meter of progress
    double slack = 0.01;          // per step
    double success_bonus = 2.5;
    double stop_penalty = 2.5;    // reacher stopping without success
    double explore_gain = 0.1;    // per m^2 newly freed
    double pointnav_success_radius = 0.5; // meters to the target point
};

inline double pointnav_reward(double prev_dist, double new_dist, bool reached,
                              const RewardConstants& k = {}) {
    return k.distance_gain * (prev_dist - new_dist) - k.slack +
           (reached ? k.success_bonus : 0.0);
}

inline double explore_reward(int cells_freed, double cell_size, const RewardConstants& k = {}) {
    return k.explore_gain * (cells_freed * cell_size * cell_size) - k.slack;
}

inline double reacher_reward(double prev_dist, double new_dist, bool stopped, bool success,
                             const RewardConstants& k = {}) {
    double r = k.distance_gain * (prev_dist - new_dist) - k.slack;
    if (stopped) r += success ? k.success_bonus : -k.stop_penalty;
    return r;
}

// ---------------------------------------------------------------------------
// Observation adapters (what each skill's policy actually sees)

inline int pointnav_obs_dim(int num_rays) { return num_rays + 11; }
inline int explore_obs_dim(int num_rays) { return num_rays + 21; }
inline int reacher_obs_dim(int num_rays) { return 2 * num_rays + 6; }

namespace skill_detail {
inline void push_common(std::vector<double>& v, const Observation& o, bool with_compass) {
    v.push_back(o.gps.x * 0.1);
    v.push_back(o.gps.y * 0.1);
    if (with_compass) {
        v.push_back(std::sin(o.compass));
        v.push_back(std::cos(o.compass));
    }
    for (int a = 0; a < kNumActions; ++a)
        v.push_back(int(o.prev_action) == a ? 1.0 : 0.0);
}
} // namespace skill_detail

// PointNav: depth + egocentric polar offset to the target + GPS/compass + prev action.
inline std::vector<double> pointnav_obs(const Observation& o, const AgentPose& pose,
                                        const Vec2& target, double max_range) {
    std::vector<double> v;
    v.reserve(pointnav_obs_dim(int(o.depth_rays.size())));
    for (double d : o.depth_rays) v.push_back(d / max_range);
    Vec2 delta = target - pose.position;
    double dist = delta.norm();
    double rel = wrap_angle(std::atan2(delta.y, delta.x) - pose.heading);
    v.push_back(dist * 0.1);
    v.push_back(std::sin(rel));
    v.push_back(std::cos(rel));
    skill_detail::push_common(v, o, true);
    return v;
}

namespace skill_detail {
// Eight egocentric sectors of unknown-cell fraction within sense_radius, plus
// the overall known fraction; steers the explorer toward unmapped space.
inline void push_map_summary(std::vector<double>& v, const AgentPose& pose,
                             const OccupancyMap& m, double sense_radius = 4.0) {
    double unknown[8] = {};
    int total[8] = {};
    Cell a = m.world_to_cell(pose.position);
    int r = int(sense_radius / m.cell_size);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            if (dx == 0 && dy == 0) continue;
            Cell c{a.x + dx, a.y + dy};
            if (!m.in_bounds(c)) continue;
            if (std::hypot(double(dx), double(dy)) * m.cell_size > sense_radius) continue;
            double ang = wrap_angle(std::atan2(double(dy), double(dx)) - pose.heading);
            int s = std::min(7, int((ang + M_PI) / (2.0 * M_PI) * 8.0));
            ++total[s];
            if (m.at(c) == MapCell::Unknown) unknown[s] += 1.0;
        }
    for (int s = 0; s < 8; ++s) v.push_back(total[s] ? unknown[s] / total[s] : 0.0);
    int known = 0;
    for (MapCell c : m.cells)
        if (c != MapCell::Unknown) ++known;
    v.push_back(double(known) / double(m.cells.size()));
}

// Egocentric polar offset to the nearest frontier centroid of the agent's own
// map (presence flag, scaled distance, bearing); long-range pull the local
// sector summary cannot provide.
inline void push_nearest_frontier(std::vector<double>& v, const AgentPose& pose,
                                  const OccupancyMap& m) {
    auto frontiers = extract_frontiers(m, 2);
    const Vec2* best = nullptr;
    double best_d = kInf;
    for (const auto& f : frontiers) {
        double d = distance(f.centroid, pose.position);
        if (d < best_d) {
            best_d = d;
            best = &f.centroid;
        }
    }
    if (!best) {
        v.insert(v.end(), {0.0, 0.0, 0.0, 0.0});
        return;
    }
    Vec2 delta = *best - pose.position;
    double rel = wrap_angle(std::atan2(delta.y, delta.x) - pose.heading);
    v.push_back(1.0);
    v.push_back(best_d * 0.1);
    v.push_back(std::sin(rel));
    v.push_back(std::cos(rel));
}
} // namespace skill_detail

inline std::vector<double> explore_obs(const Observation& o, const AgentPose& pose,
                                       const OccupancyMap& map, double max_range) {
    std::vector<double> v;
    v.reserve(explore_obs_dim(int(o.depth_rays.size())));
    for (double d : o.depth_rays) v.push_back(d / max_range);
    skill_detail::push_map_summary(v, pose, map);
    skill_detail::push_nearest_frontier(v, pose, map);
    skill_detail::push_common(v, o, true);
    return v;
}

// GoalReacher sees no goal coordinates, only the semantic mask.
inline std::vector<double> reacher_obs(const Observation& o, double max_range) {
    std::vector<double> v;
    v.reserve(reacher_obs_dim(int(o.depth_rays.size())));
    for (double d : o.depth_rays) v.push_back(d / max_range);
    for (double m : o.goal_mask) v.push_back(m);
    skill_detail::push_common(v, o, false);
    return v;
}

// ---------------------------------------------------------------------------
// Policy interface shared by learned and scripted backends

struct SkillInputs {
    const Observation* observation = nullptr;
    AgentPose pose;
    const OccupancyMap* map = nullptr; // agent-built reconstruction
    Vec2 target;                       // pointnav only
};

class SkillPolicy {
  public:
    virtual ~SkillPolicy() = default;
    virtual SkillKind kind() const = 0;
    virtual SkillBackend backend() const = 0;
    virtual void reset() = 0;
    virtual Action act(const SkillInputs& in) = 0;
    // Deterministic per-episode reseed for stochastic backends; scripted
    // backends ignore it.
    virtual void seed(uint64_t) {}
};

// Intermediate waypoint for long-range point goals: descend the distance
// field on the agent-built map (unknown traversable) from the agent toward
// the target for roughly `lookahead` meters. A reactive policy trained on
// short goals then only ever sees a nearby subgoal. Falls back to the raw
// target when no field can be computed.
inline Vec2 pointnav_waypoint(const OccupancyMap& map, const Vec2& position, const Vec2& target,
                              double lookahead) {
    Cell goal = map.world_to_cell(target);
    auto ok = detail::traversable_mask(map, {});
    if (!map.in_bounds(goal) || !ok[size_t(goal.y) * map.width + goal.x]) {
        double best = kInf;
        Cell pick{-1, -1};
        for (int y = 0; y < map.height; ++y)
            for (int x = 0; x < map.width; ++x)
                if (ok[size_t(y) * map.width + x]) {
                    double d = distance(map.cell_center({x, y}), target);
                    if (d < best) {
                        best = d;
                        pick = {x, y};
                    }
                }
        if (pick.x < 0) return target;
        goal = pick;
    }
    DistanceField df;
    try {
        df = fmm_distance_field(map, {goal}, {});
    } catch (const std::exception&) {
        return target;
    }
    Cell cur = map.world_to_cell(position);
    if (!map.in_bounds(cur)) return target;
    if (!df.reachable(cur)) {
        double best = kInf;
        Cell pick = cur;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                Cell n{cur.x + dx, cur.y + dy};
                if (map.in_bounds(n) && df.at(n) < best) {
                    best = df.at(n);
                    pick = n;
                }
            }
        if (!df.reachable(pick)) return target;
        cur = pick;
    }
    double walked = 0.0;
    while (walked < lookahead && df.at(cur) > map.cell_size) {
        Cell next = cur;
        double best = df.at(cur);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                Cell n{cur.x + dx, cur.y + dy};
                if (map.in_bounds(n) && df.at(n) < best - 1e-12) {
                    best = df.at(n);
                    next = n;
                }
            }
        if (next == cur) break;
        walked += map.cell_size * ((next.x != cur.x && next.y != cur.y) ? std::sqrt(2.0) : 1.0);
        cur = next;
    }
    return df.at(cur) <= map.cell_size ? target : map.cell_center(cur);
}

class LearnedSkill : public SkillPolicy {
  public:
    static constexpr double kWaypointLookahead = 2.5; // meters
    static constexpr int kWaypointRefresh = 25;       // steps before replanning
    static constexpr int kStuckWindow = 12;           // steps of pose history
    static constexpr double kStuckRadius = 0.3;       // meters of net motion
    static constexpr int kBurstLength = 6;            // sampled steps once stuck
    LearnedSkill(SkillKind kind, const NetConfig& net_cfg, ParamVec params, double max_range)
        : kind_(kind), net_(net_cfg), params_(std::move(params)), max_range_(max_range),
          rng_(make_rng(0x5EED, uint64_t(kind))) {
        hidden_ = net_.initial_hidden();
    }

    SkillKind kind() const override { return kind_; }
    SkillBackend backend() const override { return SkillBackend::Learned; }
    void reset() override {
        hidden_ = net_.initial_hidden();
        wp_age_ = -1;
        recent_.clear();
        burst_ = 0;
    }
    void seed(uint64_t s) override { rng_ = make_rng(s, uint64_t(kind_)); }

    Action act(const SkillInputs& in) override {
        std::vector<double> obs;
        switch (kind_) {
            case SkillKind::PointNav: {
                Vec2 tgt = in.target;
                if (in.map && distance(in.pose.position, in.target) > kWaypointLookahead) {
                    // Hold each waypoint until reached or stale; recomputing
                    // every step dithers between alternate routes as the map
                    // fills in.
                    if (wp_age_ < 0 || wp_age_ >= kWaypointRefresh ||
                        distance(in.pose.position, waypoint_) < 0.75) {
                        waypoint_ = pointnav_waypoint(*in.map, in.pose.position, in.target,
                                                      kWaypointLookahead);
                        wp_age_ = 0;
                    } else {
                        ++wp_age_;
                    }
                    tgt = waypoint_;
                } else {
                    wp_age_ = -1;
                }
                obs = pointnav_obs(*in.observation, in.pose, tgt, max_range_);
                break;
            }
            case SkillKind::Explore:
                if (!in.map)
                    throw std::invalid_argument("LearnedSkill: explore needs the built map");
                obs = explore_obs(*in.observation, in.pose, *in.map, max_range_);
                break;
            case SkillKind::Reacher:
                obs = reacher_obs(*in.observation, max_range_);
                break;
        }
        auto out = net_.forward(params_, obs, hidden_);
        hidden_ = out.hidden;
        // Greedy by default; greedy action selection can deadlock the
        // recurrent policy in a turn loop, so when the pose stops making
        // progress, sample from the policy for a short burst to break out.
        // Determinism comes from the per-episode reseed. Only GoalReacher may
        // terminate an episode, so the motion skills never pick Stop.
        track_progress(in.pose.position);
        int n = kind_ == SkillKind::Reacher ? kNumActions : kNumActions - 1;
        if (burst_ > 0) {
            --burst_;
            std::vector<double> logits(out.logits.begin(), out.logits.begin() + n);
            return Action(sample_categorical(logits, rng_));
        }
        int best = 0;
        for (int a = 1; a < n; ++a)
            if (out.logits[a] > out.logits[best]) best = a;
        return Action(best);
    }

    const ActorCritic& net() const { return net_; }
    const ParamVec& params() const { return params_; }

  private:
    void track_progress(const Vec2& position) {
        recent_.push_back(position);
        if (int(recent_.size()) < kStuckWindow) return;
        if (int(recent_.size()) > kStuckWindow) recent_.erase(recent_.begin());
        if (burst_ > 0) return;
        double span = 0.0;
        for (const Vec2& p : recent_) span = std::max(span, distance(p, recent_.front()));
        if (span < kStuckRadius) {
            burst_ = kBurstLength;
            recent_.clear();
        }
    }

    SkillKind kind_;
    ActorCritic net_;
    ParamVec params_;
    double max_range_;
    Rng rng_;
    std::vector<double> hidden_;
    Vec2 waypoint_;
    int wp_age_ = -1;
    std::vector<Vec2> recent_;
    int burst_ = 0;
};

// Planner call hardened for partial maps: a spurious sensed obstacle can seal
// the only corridor, in which case the strict planner reports isolation. Retry
// without inflation, and if even that fails spin in place so the episode times
// out as a failure instead of aborting the whole run.
inline Action plan_or_recover(const OccupancyMap& map, const AgentPose& pose, const Vec2& target,
                              double turn_angle, const PlannerOptions& opt) {
    try {
        return plan_next_action(map, pose.position, pose.heading, target, turn_angle, opt);
    } catch (const std::runtime_error&) {
    }
    try {
        PlannerOptions relaxed = opt;
        relaxed.obstacle_inflation = 0;
        return plan_next_action(map, pose.position, pose.heading, target, turn_angle, relaxed);
    } catch (const std::runtime_error&) {
        return Action::TurnLeft;
    }
}

// Map-and-planner backend for all three skills (the "(Plan)" ablation).
class ScriptedSkill : public SkillPolicy {
  public:
    ScriptedSkill(SkillKind kind, const SimConfig& sim_cfg, const PlannerOptions& opt = {})
        : kind_(kind), sim_cfg_(sim_cfg), opt_(opt) {}

    SkillKind kind() const override { return kind_; }
    SkillBackend backend() const override { return SkillBackend::Scripted; }
    void reset() override { spotted_.clear(); }

    Action act(const SkillInputs& in) override {
        switch (kind_) {
            case SkillKind::PointNav:
                return plan_or_recover(*in.map, in.pose, in.target, sim_cfg_.turn_angle, opt_);
            case SkillKind::Explore: {
                auto frontiers = extract_frontiers(*in.map, 2);
                if (frontiers.empty()) return Action::Stop; // nothing left to explore
                const Frontier* best = &frontiers[0];
                double best_d = kInf;
                for (const auto& f : frontiers) {
                    double d = distance(f.centroid, in.pose.position);
                    if (d < best_d) {
                        best_d = d;
                        best = &f;
                    }
                }
                return plan_or_recover(*in.map, in.pose, best->centroid, sim_cfg_.turn_angle,
                                       opt_);
            }
            case SkillKind::Reacher: {
                remember_spotted(in);
                if (spotted_.empty()) return Action::Stop;
                const Vec2* best = &spotted_[0];
                double best_d = kInf;
                for (const auto& p : spotted_) {
                    double d = distance(p, in.pose.position);
                    if (d < best_d) {
                        best_d = d;
                        best = &p;
                    }
                }
                if (best_d <= stop_distance_) return Action::Stop;
                return plan_or_recover(*in.map, in.pose, *best, sim_cfg_.turn_angle, opt_);
            }
        }
        return Action::Stop;
    }

  private:
    // Project goal-mask hits to world points and keep them for the episode.
    void remember_spotted(const SkillInputs& in) {
        const Observation& o = *in.observation;
        int n = int(o.depth_rays.size());
        for (int i = 0; i < n; ++i) {
            if (o.goal_mask[i] < 0.5) continue;
            double frac = n == 1 ? 0.5 : double(i) / (n - 1);
            double ang = in.pose.heading - sim_cfg_.fov * 0.5 + frac * sim_cfg_.fov;
            Vec2 p = in.pose.position +
                     Vec2{std::cos(ang), std::sin(ang)} * o.depth_rays[i];
            bool known = false;
            for (const auto& q : spotted_)
                if (distance(p, q) < 0.3) known = true;
            if (!known) spotted_.push_back(p);
        }
    }

    SkillKind kind_;
    SimConfig sim_cfg_;
    PlannerOptions opt_;
    double stop_distance_ = 0.8;
    std::vector<Vec2> spotted_;
};

// ---------------------------------------------------------------------------
// Training environments (RolloutEnv implementations per skill)

struct SkillEnvConfig {
    SimConfig sim;
    RewardConstants rewards;
    int max_episode_steps = 128;
    SemanticNoiseModel noise;
    // PointNav target sampling band (geodesic meters from the start); spans
    // same-room hops up to door-crossing multi-room routes.
    double pointnav_min_dist = 1.0;
    double pointnav_max_dist = 4.0;
};

class SkillEnvBase : public RolloutEnv {
  public:
    SkillEnvBase(std::shared_ptr<const std::vector<Scene>> scenes, const SkillEnvConfig& cfg,
                 uint64_t seed)
        : scenes_(std::move(scenes)), cfg_(cfg), rng_(make_rng(seed, 0x5E0F)) {
        if (scenes_->empty()) throw std::invalid_argument("SkillEnvBase: no scenes");
        cfg_.sim.max_steps = cfg_.max_episode_steps;
    }
    EpisodeMetrics episode_metrics() const override { return finished_; }

  protected:
    const Scene& random_scene() {
        return (*scenes_)[uniform_int(rng_, 0, int(scenes_->size()) - 1)];
    }
    Vec2 random_free_point(const Scene& s) {
        std::vector<Cell> frees;
        for (int y = 0; y < s.grid.height; ++y)
            for (int x = 0; x < s.grid.width; ++x)
                if (s.grid.at({x, y}) == CellState::Free) frees.push_back({x, y});
        return s.grid.cell_center(frees[uniform_int(rng_, 0, int(frees.size()) - 1)]);
    }
    double random_heading() { return uniform_int(rng_, 0, 11) * (M_PI / 6.0); }

    std::shared_ptr<const std::vector<Scene>> scenes_;
    SkillEnvConfig cfg_;
    Rng rng_;
    std::unique_ptr<Simulator> sim_;
    EpisodeMetrics finished_;
    EpisodeMetrics current_;
};

// Reach a sampled target point; shaped by geodesic progress on the GT grid.
class PointNavEnv : public SkillEnvBase {
  public:
    using SkillEnvBase::SkillEnvBase;

    std::vector<double> reset() override {
        const Scene& s = random_scene();
        EpisodeSpec ep;
        ep.scene_id = "train";
        ep.goal_category = "";
        ep.start = random_free_point(s);
        ep.start_heading = random_heading();
        // Target: a free cell whose geodesic distance from the start falls in
        // the configured band.
        OccupancyMap gt = OccupancyMap::from_grid(s.grid);
        DistanceField from_start = fmm_distance_field(gt, {s.grid.world_to_cell(ep.start)},
                                                      {.obstacle_inflation = 0});
        std::vector<Cell> candidates;
        for (int y = 0; y < s.grid.height; ++y)
            for (int x = 0; x < s.grid.width; ++x) {
                double d = from_start.at({x, y});
                if (s.grid.at({x, y}) == CellState::Free && d >= cfg_.pointnav_min_dist &&
                    d <= cfg_.pointnav_max_dist)
                    candidates.push_back({x, y});
            }
        if (candidates.empty()) return reset();
        target_ = s.grid.cell_center(candidates[uniform_int(rng_, 0, int(candidates.size()) - 1)]);
        sim_ = std::make_unique<Simulator>(s, ep, cfg_.sim, cfg_.noise, rng_());
        auto obs = sim_->reset();
        OccupancyMap m = OccupancyMap::from_grid(s.grid);
        field_ = fmm_distance_field(m, {s.grid.world_to_cell(target_)},
                                    {.obstacle_inflation = 0});
        prev_dist_ = field_dist();
        initial_dist_ = prev_dist_;
        current_ = {};
        current_.distance_to_goal = prev_dist_;
        return pointnav_obs(obs, sim_->pose(), target_, cfg_.sim.max_range);
    }

    EnvStep step(int action) override {
        Action a = Action(action);
        if (a == Action::Stop) a = Action::Forward; // stop is a no-op for this skill
        auto sr = sim_->step(a);
        double d = field_dist();
        bool reached = distance(sim_->pose().position, target_) <=
                       cfg_.rewards.pointnav_success_radius;
        double reward = pointnav_reward(prev_dist_, d, reached, cfg_.rewards);
        prev_dist_ = d;
        bool done = reached || sr.done;
        if (done) {
            current_.success = reached;
            current_.distance_to_goal = d;
            current_.steps = sim_->steps();
            double p = sim_->path_length();
            current_.spl =
                reached ? initial_dist_ / std::max(std::max(p, initial_dist_), 1e-9) : 0.0;
            finished_ = current_;
            return {reset(), reward, true};
        }
        return {pointnav_obs(sr.observation, sim_->pose(), target_, cfg_.sim.max_range), reward,
                false};
    }

    int obs_dim() const override { return pointnav_obs_dim(cfg_.sim.num_rays); }

  private:
    double field_dist() const {
        Cell c = sim_->scene().grid.world_to_cell(sim_->pose().position);
        double d = field_.at(c);
        return d < kInf ? d : 50.0;
    }
    Vec2 target_;
    DistanceField field_;
    double prev_dist_ = 0.0;
    double initial_dist_ = 0.0;
};

// Maximize newly observed area; fixed-length episodes.
class ExploreEnv : public SkillEnvBase {
  public:
    using SkillEnvBase::SkillEnvBase;

    std::vector<double> reset() override {
        const Scene& s = random_scene();
        EpisodeSpec ep;
        ep.scene_id = "train";
        ep.goal_category = "";
        ep.start = random_free_point(s);
        ep.start_heading = random_heading();
        sim_ = std::make_unique<Simulator>(s, ep, cfg_.sim, cfg_.noise, rng_());
        auto obs = sim_->reset();
        map_ = OccupancyMap(s.grid.width, s.grid.height, s.grid.cell_size);
        integrate_current(obs);
        known_ = known_cells();
        current_ = {};
        return explore_obs(obs, sim_->pose(), map_, cfg_.sim.max_range);
    }

    EnvStep step(int action) override {
        Action a = Action(action);
        if (a == Action::Stop) a = Action::Forward;
        auto sr = sim_->step(a);
        integrate_current(sr.observation);
        int now = known_cells();
        double reward = explore_reward(now - known_, map_.cell_size, cfg_.rewards);
        known_ = now;
        if (sr.done) {
            current_.explored_area = known_ * map_.cell_size * map_.cell_size;
            current_.steps = sim_->steps();
            finished_ = current_;
            return {reset(), reward, true};
        }
        return {explore_obs(sr.observation, sim_->pose(), map_, cfg_.sim.max_range), reward,
                false};
    }

    int obs_dim() const override { return explore_obs_dim(cfg_.sim.num_rays); }

  private:
    void integrate_current(const Observation& obs) {
        integrate_scan(map_, sim_->pose().position, obs.depth_rays, sim_->ray_angles(),
                       cfg_.sim.max_range);
    }
    int known_cells() const {
        return int(map_.cells.size()) - map_.count(MapCell::Unknown);
    }
    OccupancyMap map_;
    int known_ = 0;
};

// Approach and stop at a visible goal instance; Euclidean shaping plus
// terminal stop bonus/penalty.
class ReacherEnv : public SkillEnvBase {
  public:
    ReacherEnv(std::shared_ptr<const std::vector<Scene>> scenes, const SkillEnvConfig& cfg,
               std::string goal_category, uint64_t seed)
        : SkillEnvBase(std::move(scenes), cfg, seed), category_(std::move(goal_category)) {}

    std::vector<double> reset() override {
        for (int tries = 0;; ++tries) {
            const Scene& s = random_scene();
            auto goals = s.goal_positions(category_);
            if (goals.empty()) continue;
            EpisodeSpec ep;
            ep.scene_id = "train";
            ep.goal_category = category_;
            ep.start = random_free_point(s);
            ep.start_heading = random_heading();
            if (distance(ep.start, goals[0]) < 0.8 && tries < 100) continue;
            sim_ = std::make_unique<Simulator>(s, ep, cfg_.sim, cfg_.noise, rng_());
            auto obs = sim_->reset();
            // The reacher takes over once the goal has been sighted, so an
            // episode must open with the goal mask active.
            bool visible = false;
            for (double m : obs.goal_mask)
                if (m > 0.5) visible = true;
            if (!visible && tries < 400) continue;
            prev_dist_ = sim_->distance_to_goal();
            current_ = {};
            return reacher_obs(obs, cfg_.sim.max_range);
        }
    }

    EnvStep step(int action) override {
        Action a = Action(action);
        auto sr = sim_->step(a);
        double d = sim_->distance_to_goal();
        bool stopped = a == Action::Stop;
        double reward = reacher_reward(prev_dist_, d, stopped, sr.info.success, cfg_.rewards);
        prev_dist_ = d;
        if (sr.done) {
            current_.success = sr.info.success;
            current_.distance_to_goal = d;
            current_.steps = sim_->steps();
            finished_ = current_;
            return {reset(), reward, true};
        }
        return {reacher_obs(sr.observation, cfg_.sim.max_range), reward, false};
    }

    int obs_dim() const override { return reacher_obs_dim(cfg_.sim.num_rays); }

  private:
    std::string category_;
    double prev_dist_ = 0.0;
};

} // namespace hlponav
