#pragma once
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "action.hpp"
#include "geometry.hpp"
#include "rng.hpp"
#include "scene.hpp"

namespace hlponav {

struct SimConfig {
    double forward_step = 0.25;        // meters
    double turn_angle = M_PI / 6.0;    // 30 degrees
    int num_rays = 32;
    double fov = M_PI / 2.0;           // 90 degrees
    double max_range = 5.0;            // meters
    int max_steps = 500;
    double success_radius = 1.0;       // meters
    double landmark_radius = 2.0;      // meters
    bool operator==(const SimConfig&) const = default;
};

// "Learned semantic" stand-in: per-surface Bernoulli flips that stay
// consistent within an episode (the same wall patch misfires every time).
struct SemanticNoiseModel {
    double false_negative_rate = 0.0;
    double false_positive_rate = 0.0;
    bool is_ground_truth() const {
        return false_negative_rate == 0.0 && false_positive_rate == 0.0;
    }
    bool operator==(const SemanticNoiseModel&) const = default;
};

struct AgentPose {
    Vec2 position;
    double heading = 0.0;
    bool operator==(const AgentPose&) const = default;
};

struct Observation {
    std::vector<double> depth_rays;
    std::vector<double> goal_mask; // 1.0 where the ray hits a goal instance
    Vec2 gps;                      // start frame, meters
    double compass = 0.0;          // radians relative to start
    Action prev_action = Action::Stop;

    bool goal_visible() const {
        for (double v : goal_mask)
            if (v > 0.5) return true;
        return false;
    }
};

struct StepInfo {
    bool collision = false;
    double distance_to_goal = 0.0; // Euclidean to nearest goal instance
    bool success = false;
};

struct StepResult {
    Observation observation;
    double reward = 0.0; // filled by the skill reward shaper
    bool done = false;
    StepInfo info;
};

inline bool inside_landmark_area(const AgentPose& pose, const Landmark& lm, double radius) {
    if (radius <= 0) throw std::invalid_argument("inside_landmark_area: radius must be positive");
    return distance(pose.position, lm.center) <= radius; // closed disk
}

// Unobstructed straight segment between two world points.
inline bool line_of_sight(const Grid& grid, const Vec2& a, const Vec2& b) {
    double len = distance(a, b);
    if (len < 1e-12) return true;
    Vec2 dir = (b - a) * (1.0 / len);
    const double step = grid.cell_size * 0.25;
    for (double t = 0.0; t <= len; t += step) {
        Cell c = grid.world_to_cell(a + dir * t);
        if (!grid.in_bounds(c) || grid.at(c) == CellState::Obstacle) return false;
    }
    return true;
}

// Stop succeeds within 1.0 m Euclidean of a goal instance the agent could see
// by turning in place, i.e. with grid line-of-sight.
inline bool evaluate_stop(const AgentPose& pose, const Scene& scene,
                          const std::string& goal_category, double success_radius = 1.0) {
    for (const auto& obj : scene.objects) {
        if (obj.category != goal_category) continue;
        if (distance(pose.position, obj.position) > success_radius) continue;
        if (line_of_sight(scene.grid, pose.position, obj.position)) return true;
    }
    return false;
}

namespace sim_detail {

struct RayHit {
    double depth = 0.0;
    bool goal = false;          // first surface hit is a goal instance
    Cell surface{-1, -1};       // hit cell, (-1,-1) when open to max range
    bool open = false;          // reached max range without a hit
};

inline RayHit cast_ray(const Scene& scene, const std::string& goal_category, const Vec2& origin,
                       double angle, double max_range) {
    const Grid& g = scene.grid;
    Vec2 dir{std::cos(angle), std::sin(angle)};
    const double step = g.cell_size * 0.25;
    Cell prev{-1, -1};
    for (double t = step; t <= max_range; t += step) {
        Cell c = g.world_to_cell(origin + dir * t);
        if (c == prev) continue;
        prev = c;
        if (!g.in_bounds(c) || g.at(c) == CellState::Obstacle)
            return {t, false, c, false};
        // Goal instances are visible, opaque point objects on free cells.
        for (const auto& obj : scene.objects)
            if (obj.category == goal_category && g.world_to_cell(obj.position) == c)
                return {t, true, c, false};
    }
    return {max_range, false, {-1, -1}, true};
}

} // namespace sim_detail

// Flip the goal channel per the noise model. Draws hash on (episode seed,
// surface cell), so they persist across steps within an episode.
inline std::vector<double> apply_semantic_noise(const std::vector<double>& goal_mask,
                                                const std::vector<sim_detail::RayHit>& hits,
                                                const SemanticNoiseModel& noise,
                                                uint64_t episode_seed) {
    std::vector<double> out = goal_mask;
    for (size_t i = 0; i < hits.size(); ++i) {
        const auto& h = hits[i];
        if (h.open) continue;
        uint64_t cell_key = uint64_t(uint32_t(h.surface.y)) << 32 | uint32_t(h.surface.x);
        if (h.goal) {
            if (hash_uniform(hash_combine(hash_combine(episode_seed, 0xF17Aull), cell_key)) <
                noise.false_negative_rate)
                out[i] = 0.0;
        } else {
            if (hash_uniform(hash_combine(hash_combine(episode_seed, 0xF17Bull), cell_key)) <
                noise.false_positive_rate)
                out[i] = 1.0;
        }
    }
    return out;
}

// One ObjectNav episode MDP: four discrete actions, ray sensors, GPS+compass
// relative to the episode start, stop-triggered success evaluation.
class Simulator {
  public:
    Simulator(const Scene& scene, const EpisodeSpec& episode, const SimConfig& config = {},
              const SemanticNoiseModel& noise = {}, uint64_t noise_seed = 0)
        : scene_(&scene), episode_(episode), cfg_(config), noise_(noise),
          noise_seed_(hash_combine(noise_seed, episode.scene_id.empty()
                                                   ? 0
                                                   : std::hash<std::string>{}(episode.scene_id))) {}

    Observation reset() {
        Cell start = scene_->grid.world_to_cell(episode_.start);
        if (!scene_->grid.free_at(start))
            throw std::runtime_error("Simulator::reset: start cell is occupied");
        pose_ = {episode_.start, episode_.start_heading};
        steps_ = 0;
        done_ = false;
        success_ = false;
        collision_ = false;
        path_length_ = 0.0;
        prev_action_ = Action::Stop;
        return observe();
    }

    StepResult step(Action a) {
        if (done_) throw std::runtime_error("Simulator::step called after episode end");
        collision_ = false;
        switch (a) {
            case Action::Forward: {
                Vec2 target = pose_.position + Vec2{std::cos(pose_.heading) * cfg_.forward_step,
                                                    std::sin(pose_.heading) * cfg_.forward_step};
                if (move_clear(pose_.position, target)) {
                    pose_.position = target;
                    path_length_ += cfg_.forward_step;
                } else {
                    collision_ = true; // blocked move leaves the pose unchanged
                }
                break;
            }
            case Action::TurnLeft:
                pose_.heading = wrap_angle(pose_.heading + cfg_.turn_angle);
                break;
            case Action::TurnRight:
                pose_.heading = wrap_angle(pose_.heading - cfg_.turn_angle);
                break;
            case Action::Stop:
                done_ = true;
                success_ = evaluate_stop(pose_, *scene_, episode_.goal_category,
                                         cfg_.success_radius);
                break;
        }
        prev_action_ = a;
        ++steps_;
        if (steps_ >= cfg_.max_steps) done_ = true;

        StepResult r;
        r.observation = observe();
        r.done = done_;
        r.info.collision = collision_;
        r.info.distance_to_goal = distance_to_goal();
        r.info.success = success_;
        return r;
    }

    const AgentPose& pose() const { return pose_; }
    const Scene& scene() const { return *scene_; }
    const EpisodeSpec& episode() const { return episode_; }
    const SimConfig& config() const { return cfg_; }
    bool done() const { return done_; }
    bool success() const { return success_; }
    int steps() const { return steps_; }
    double path_length() const { return path_length_; }

    double distance_to_goal() const {
        double best = kInfDist;
        for (const auto& obj : scene_->objects)
            if (obj.category == episode_.goal_category)
                best = std::min(best, distance(pose_.position, obj.position));
        return best;
    }

    Observation observe() const {
        Observation o;
        o.depth_rays.resize(cfg_.num_rays);
        o.goal_mask.assign(cfg_.num_rays, 0.0);
        std::vector<sim_detail::RayHit> hits(cfg_.num_rays);
        for (int i = 0; i < cfg_.num_rays; ++i) {
            double frac = cfg_.num_rays == 1 ? 0.5 : double(i) / (cfg_.num_rays - 1);
            double ang = pose_.heading - cfg_.fov * 0.5 + frac * cfg_.fov;
            hits[i] = sim_detail::cast_ray(*scene_, episode_.goal_category, pose_.position, ang,
                                           cfg_.max_range);
            o.depth_rays[i] = hits[i].depth;
            o.goal_mask[i] = hits[i].goal ? 1.0 : 0.0;
        }
        if (!noise_.is_ground_truth())
            o.goal_mask = apply_semantic_noise(o.goal_mask, hits, noise_, noise_seed_);
        // GPS in the start frame: world offset rotated by -start heading.
        Vec2 d = pose_.position - episode_.start;
        double c = std::cos(-episode_.start_heading), s = std::sin(-episode_.start_heading);
        o.gps = {d.x * c - d.y * s, d.x * s + d.y * c};
        o.compass = wrap_angle(pose_.heading - episode_.start_heading);
        o.prev_action = prev_action_;
        return o;
    }

    std::vector<double> ray_angles() const {
        std::vector<double> a(cfg_.num_rays);
        for (int i = 0; i < cfg_.num_rays; ++i) {
            double frac = cfg_.num_rays == 1 ? 0.5 : double(i) / (cfg_.num_rays - 1);
            a[i] = pose_.heading - cfg_.fov * 0.5 + frac * cfg_.fov;
        }
        return a;
    }

  private:
    static constexpr double kInfDist = 1e18;

    bool move_clear(const Vec2& from, const Vec2& to) const {
        const Grid& g = scene_->grid;
        const double step = g.cell_size * 0.25;
        double len = distance(from, to);
        Vec2 dir = (to - from) * (1.0 / len);
        for (double t = step; t <= len + 1e-9; t += step) {
            Cell c = g.world_to_cell(from + dir * std::min(t, len));
            if (!g.free_at(c)) return false;
        }
        return true;
    }

    const Scene* scene_;
    EpisodeSpec episode_;
    SimConfig cfg_;
    SemanticNoiseModel noise_;
    uint64_t noise_seed_;
    AgentPose pose_;
    Action prev_action_ = Action::Stop;
    int steps_ = 0;
    bool done_ = false;
    bool success_ = false;
    bool collision_ = false;
    double path_length_ = 0.0;
};

} // namespace hlponav
