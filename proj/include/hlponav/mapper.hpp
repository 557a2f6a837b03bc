#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "action.hpp"
#include "geometry.hpp"
#include "scene.hpp"

namespace hlponav {

enum class MapCell : uint8_t { Unknown = 0, Free = 1, Obstacle = 2 };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Agent-built occupancy reconstruction. Cells only ever leave Unknown, and an
// Obstacle observation wins over Free on conflict.
struct OccupancyMap {
    int width = 0;
    int height = 0;
    double cell_size = 0.25;
    std::vector<MapCell> cells;

    OccupancyMap() = default;
    OccupancyMap(int w, int h, double cs)
        : width(w), height(h), cell_size(cs), cells(size_t(w) * h, MapCell::Unknown) {}

    static OccupancyMap from_grid(const Grid& g) {
        OccupancyMap m(g.width, g.height, g.cell_size);
        for (size_t i = 0; i < g.cells.size(); ++i)
            m.cells[i] = g.cells[i] == CellState::Free ? MapCell::Free : MapCell::Obstacle;
        return m;
    }

    bool in_bounds(const Cell& c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }
    MapCell at(const Cell& c) const { return cells[size_t(c.y) * width + c.x]; }

    void observe_free(const Cell& c) {
        if (!in_bounds(c)) return;
        MapCell& s = cells[size_t(c.y) * width + c.x];
        if (s == MapCell::Unknown) s = MapCell::Free; // sticky obstacles
    }
    void observe_obstacle(const Cell& c) {
        if (!in_bounds(c)) return;
        cells[size_t(c.y) * width + c.x] = MapCell::Obstacle;
    }

    Cell world_to_cell(const Vec2& p) const {
        return {int(p.x / cell_size), int(p.y / cell_size)};
    }
    Vec2 cell_center(const Cell& c) const {
        return {(c.x + 0.5) * cell_size, (c.y + 0.5) * cell_size};
    }
    int count(MapCell s) const {
        return int(std::count(cells.begin(), cells.end(), s));
    }
    bool operator==(const OccupancyMap&) const = default;
};

struct Frontier {
    std::vector<Cell> cells;
    Vec2 centroid;
    int size() const { return int(cells.size()); }
};

struct DistanceField {
    int width = 0;
    int height = 0;
    double cell_size = 0.25;
    std::vector<double> dist; // meters, kInf = unreachable

    double at(const Cell& c) const { return dist[size_t(c.y) * width + c.x]; }
    bool reachable(const Cell& c) const { return at(c) < kInf; }
};

// March free cells along each ray up to the hit distance, then mark the hit
// cell as obstacle. Rays reported at max range mark no obstacle.
inline void integrate_scan(OccupancyMap& map, const Vec2& origin,
                           const std::vector<double>& depths,
                           const std::vector<double>& angles, double max_range) {
    const double step = map.cell_size * 0.5;
    for (size_t i = 0; i < depths.size(); ++i) {
        const double d = depths[i];
        const Vec2 dir{std::cos(angles[i]), std::sin(angles[i])};
        Cell last{-1, -1};
        for (double t = 0.0; t < d - 1e-9; t += step) {
            Cell c = map.world_to_cell(origin + dir * t);
            if (c != last) {
                map.observe_free(c);
                last = c;
            }
        }
        // The reported depth already lies inside the hit cell; projecting any
        // further would misattribute grazing hits to cells behind the corner.
        if (d < max_range - 1e-9) map.observe_obstacle(map.world_to_cell(origin + dir * d));
    }
}

namespace detail {
inline const Cell kNeighbors8[8] = {{1, 0}, {-1, 0}, {0, 1},  {0, -1},
                                    {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
inline const Cell kNeighbors4[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

inline bool is_frontier_cell(const OccupancyMap& m, const Cell& c) {
    if (m.at(c) != MapCell::Free) return false;
    for (const Cell& d : kNeighbors4) {
        Cell n{c.x + d.x, c.y + d.y};
        if (m.in_bounds(n) && m.at(n) == MapCell::Unknown) return true;
    }
    return false;
}
} // namespace detail

// Maximal 8-connected frontier components with at least min_size cells,
// largest first; equal sizes ordered by centroid (x, then y).
inline std::vector<Frontier> extract_frontiers(const OccupancyMap& map, int min_size = 1) {
    std::vector<uint8_t> frontier(map.cells.size(), 0);
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x)
            if (detail::is_frontier_cell(map, {x, y}))
                frontier[size_t(y) * map.width + x] = 1;

    std::vector<uint8_t> seen(map.cells.size(), 0);
    std::vector<Frontier> out;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            size_t idx = size_t(y) * map.width + x;
            if (!frontier[idx] || seen[idx]) continue;
            Frontier f;
            std::vector<Cell> stack{{x, y}};
            seen[idx] = 1;
            while (!stack.empty()) {
                Cell c = stack.back();
                stack.pop_back();
                f.cells.push_back(c);
                for (const Cell& d : detail::kNeighbors8) {
                    Cell n{c.x + d.x, c.y + d.y};
                    if (!map.in_bounds(n)) continue;
                    size_t ni = size_t(n.y) * map.width + n.x;
                    if (frontier[ni] && !seen[ni]) {
                        seen[ni] = 1;
                        stack.push_back(n);
                    }
                }
            }
            Vec2 sum{0, 0};
            for (const Cell& c : f.cells) sum = sum + map.cell_center(c);
            f.centroid = sum * (1.0 / f.cells.size());
            if (f.size() >= min_size) out.push_back(std::move(f));
        }
    }
    std::sort(out.begin(), out.end(), [](const Frontier& a, const Frontier& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        if (a.centroid.x != b.centroid.x) return a.centroid.x < b.centroid.x;
        return a.centroid.y < b.centroid.y;
    });
    return out;
}

struct PlannerOptions {
    int obstacle_inflation = 1;  // cells
    bool unknown_traversable = true;
};

namespace detail {
inline std::vector<uint8_t> traversable_mask(const OccupancyMap& m, const PlannerOptions& opt) {
    std::vector<uint8_t> ok(m.cells.size(), 0);
    for (size_t i = 0; i < m.cells.size(); ++i)
        ok[i] = m.cells[i] == MapCell::Free ||
                (opt.unknown_traversable && m.cells[i] == MapCell::Unknown);
    if (opt.obstacle_inflation > 0) {
        const int r = opt.obstacle_inflation;
        std::vector<uint8_t> blocked(m.cells.size(), 0);
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at({x, y}) == MapCell::Obstacle)
                    for (int dy = -r; dy <= r; ++dy)
                        for (int dx = -r; dx <= r; ++dx) {
                            Cell n{x + dx, y + dy};
                            if (m.in_bounds(n)) blocked[size_t(n.y) * m.width + n.x] = 1;
                        }
        for (size_t i = 0; i < ok.size(); ++i)
            if (blocked[i]) ok[i] = 0;
    }
    return ok;
}
} // namespace detail

// Multi-source shortest-path wavefront, 8-connected with sqrt(2) diagonal
// cost. The coarse-grid realization of fast-marching planning.
inline DistanceField fmm_distance_field(const OccupancyMap& map, const std::vector<Cell>& sources,
                                        const PlannerOptions& opt = {}) {
    if (sources.empty()) throw std::invalid_argument("fmm_distance_field: no sources");
    auto ok = detail::traversable_mask(map, opt);
    DistanceField df;
    df.width = map.width;
    df.height = map.height;
    df.cell_size = map.cell_size;
    df.dist.assign(map.cells.size(), kInf);

    using QE = std::pair<double, int>; // (dist, index)
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    bool any = false;
    for (const Cell& s : sources) {
        if (!map.in_bounds(s)) continue;
        size_t i = size_t(s.y) * map.width + s.x;
        if (!ok[i]) continue;
        df.dist[i] = 0.0;
        pq.emplace(0.0, int(i));
        any = true;
    }
    if (!any) throw std::runtime_error("fmm_distance_field: all sources blocked");

    const double straight = map.cell_size;
    const double diag = map.cell_size * std::sqrt(2.0);
    while (!pq.empty()) {
        auto [d, idx] = pq.top();
        pq.pop();
        if (d > df.dist[idx] + 1e-15) continue;
        Cell c{idx % map.width, idx / map.width};
        for (int k = 0; k < 8; ++k) {
            const Cell& dn = detail::kNeighbors8[k];
            Cell n{c.x + dn.x, c.y + dn.y};
            if (!map.in_bounds(n)) continue;
            size_t ni = size_t(n.y) * map.width + n.x;
            if (!ok[ni]) continue;
            double nd = d + (k < 4 ? straight : diag);
            if (nd < df.dist[ni] - 1e-15) {
                df.dist[ni] = nd;
                pq.emplace(nd, int(ni));
            }
        }
    }
    return df;
}

// One discrete action of greedy distance-field descent toward goal_point.
// Turns when the angular error to the descent direction exceeds half the turn
// angle; a goal exactly behind resolves to TurnLeft.
inline Action plan_next_action(const OccupancyMap& map, const Vec2& position, double heading,
                               const Vec2& goal_point, double turn_angle,
                               const PlannerOptions& opt = {}) {
    Cell goal = map.world_to_cell(goal_point);
    DistanceField df;
    {
        // Substitute the nearest traversable cell when the goal itself is blocked.
        auto ok = detail::traversable_mask(map, opt);
        if (!map.in_bounds(goal) || !ok[size_t(goal.y) * map.width + goal.x]) {
            double best = kInf;
            Cell best_cell{-1, -1};
            for (int y = 0; y < map.height; ++y)
                for (int x = 0; x < map.width; ++x)
                    if (ok[size_t(y) * map.width + x]) {
                        double d = distance(map.cell_center({x, y}), goal_point);
                        if (d < best) {
                            best = d;
                            best_cell = {x, y};
                        }
                    }
            if (best_cell.x < 0) throw std::runtime_error("plan_next_action: no traversable cells");
            goal = best_cell;
        }
        df = fmm_distance_field(map, {goal}, opt);
    }

    Cell agent = map.world_to_cell(position);
    if (!map.in_bounds(agent)) throw std::runtime_error("plan_next_action: agent out of bounds");
    Cell from = agent;
    if (!df.reachable(from)) {
        // Inflation can swallow the agent's own cell; step out via a neighbor.
        double best = kInf;
        for (const Cell& d : detail::kNeighbors8) {
            Cell n{agent.x + d.x, agent.y + d.y};
            if (map.in_bounds(n) && df.reachable(n) && df.at(n) < best) {
                best = df.at(n);
                from = n;
            }
        }
        if (!df.reachable(from)) throw std::runtime_error("plan_next_action: agent isolated from goal");
    }

    Cell next = from;
    double best = df.at(from);
    for (const Cell& d : detail::kNeighbors8) {
        Cell n{from.x + d.x, from.y + d.y};
        if (map.in_bounds(n) && df.at(n) < best - 1e-12) {
            best = df.at(n);
            next = n;
        }
    }
    Vec2 target = (next == agent) ? goal_point : map.cell_center(next);
    Vec2 delta = target - position;
    if (delta.norm() < 1e-9) return Action::Forward;
    double err = wrap_angle(std::atan2(delta.y, delta.x) - heading);
    if (std::abs(err) <= turn_angle * 0.5 + 1e-12) return Action::Forward;
    return err > 0 ? Action::TurnLeft : Action::TurnRight;
}

} // namespace hlponav
