#pragma once
#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapper.hpp"
#include "rng.hpp"
#include "scene.hpp"

namespace hlponav {

struct ObjectPrior {
    std::string category;
    int min_count = 1;
    int max_count = 1;
    double prob = 1.0; // chance the prior fires at all for a room
    bool operator==(const ObjectPrior&) const = default;
};

struct RoomTypePrior {
    std::string room_type;
    double weight = 1.0;
    std::vector<ObjectPrior> objects;
    bool operator==(const RoomTypePrior&) const = default;
};

struct ScenegenConfig {
    int grid_width = 48;   // cells
    int grid_height = 48;  // cells
    double cell_size = 0.25;
    int min_rooms = 2;
    int max_rooms = 6;
    int min_room_span = 5;  // interior cells per axis
    int door_width = 3;     // cells; wide enough to stay passable after 1-cell inflation
    double extra_door_prob = 0.15;
    int max_retries = 32;
    std::vector<RoomTypePrior> room_palette;
    // When non-empty its size fixes the room count and types are assigned in
    // room index order instead of sampled from palette weights.
    std::vector<std::string> forced_room_types;

    bool operator==(const ScenegenConfig&) const = default;
};

inline ScenegenConfig default_scenegen_config() {
    ScenegenConfig c;
    c.room_palette = {
        {"lounge", 1.0, {{"couch", 1, 2, 0.95}, {"tv", 1, 1, 0.6}, {"table", 1, 1, 0.5}, {"plant", 1, 1, 0.4}}},
        {"bathroom", 0.8, {{"sink", 1, 1, 0.95}, {"toilet", 1, 1, 0.9}}},
        {"kitchen", 0.8, {{"sink", 1, 1, 0.7}, {"table", 1, 1, 0.8}, {"chair", 1, 2, 0.6}}},
        {"bedroom", 1.0, {{"bed", 1, 1, 0.95}, {"plant", 1, 1, 0.3}, {"chair", 1, 1, 0.4}}},
        {"hallway", 0.6, {{"plant", 1, 1, 0.3}}},
        {"office", 0.8, {{"chair", 1, 2, 0.9}, {"table", 1, 1, 0.8}, {"tv", 1, 1, 0.3}}},
    };
    return c;
}

inline const std::vector<std::string>& default_categories() {
    static const std::vector<std::string> cats = {"couch", "sink", "chair", "bed",
                                                  "toilet", "table", "plant", "tv"};
    return cats;
}

namespace scenegen_detail {

struct Layout {
    int nx = 0, ny = 0;
    std::vector<int> xs; // wall column positions between rooms (nx-1 entries)
    std::vector<int> ys;
};

// Split `span` interior cells into n parts with 1-cell walls between them.
inline std::vector<int> split_axis(int span, int n, int min_span, Rng& rng) {
    int usable = span - (n - 1);
    if (usable < n * min_span) throw std::runtime_error("scenegen: rooms cannot fit grid span");
    std::vector<int> sizes(n, min_span);
    int slack = usable - n * min_span;
    for (int i = 0; i < slack; ++i) sizes[uniform_int(rng, 0, n - 1)]++;
    return sizes;
}

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};

inline Scene try_generate(const ScenegenConfig& cfg, uint64_t seed) {
    if (cfg.room_palette.empty()) throw std::runtime_error("scenegen: empty room palette");
    Rng rng = make_rng(seed, 0x5ce9e);

    int n_rooms;
    if (!cfg.forced_room_types.empty())
        n_rooms = int(cfg.forced_room_types.size());
    else
        n_rooms = uniform_int(rng, cfg.min_rooms, cfg.max_rooms);

    // Room grid shape: pick among balanced (nx, ny) factorizations of n_rooms
    // so rooms stay compact instead of degenerating into full-span strips.
    // Counts with only elongated factorizations (primes above 3) are reduced
    // by one unless the room types are forced.
    auto balanced_shapes = [](int n) {
        std::vector<std::pair<int, int>> shapes;
        for (int nx = 1; nx <= n; ++nx)
            if (n % nx == 0 && std::max(nx, n / nx) <= 3 * std::min(nx, n / nx))
                shapes.emplace_back(nx, n / nx);
        return shapes;
    };
    auto shapes = balanced_shapes(n_rooms);
    if (shapes.empty() && cfg.forced_room_types.empty()) shapes = balanced_shapes(--n_rooms);
    if (shapes.empty()) {
        for (int nx = 1; nx <= n_rooms; ++nx)
            if (n_rooms % nx == 0) shapes.emplace_back(nx, n_rooms / nx);
    }
    auto [nx, ny] = shapes[uniform_int(rng, 0, int(shapes.size()) - 1)];

    auto col_sizes = split_axis(cfg.grid_width - 2, nx, cfg.min_room_span, rng);
    auto row_sizes = split_axis(cfg.grid_height - 2, ny, cfg.min_room_span, rng);

    Scene scene;
    scene.seed = seed;
    scene.grid.width = cfg.grid_width;
    scene.grid.height = cfg.grid_height;
    scene.grid.cell_size = cfg.cell_size;
    scene.grid.cells.assign(size_t(cfg.grid_width) * cfg.grid_height, CellState::Obstacle);

    // Carve room interiors.
    std::vector<int> x0s(nx), y0s(ny);
    {
        int x = 1;
        for (int i = 0; i < nx; ++i) {
            x0s[i] = x;
            x += col_sizes[i] + 1;
        }
        int y = 1;
        for (int j = 0; j < ny; ++j) {
            y0s[j] = y;
            y += row_sizes[j] + 1;
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            Room r;
            r.id = j * nx + i;
            r.x0 = x0s[i];
            r.y0 = y0s[j];
            r.x1 = x0s[i] + col_sizes[i] - 1;
            r.y1 = y0s[j] + row_sizes[j] - 1;
            for (int y = r.y0; y <= r.y1; ++y)
                for (int x = r.x0; x <= r.x1; ++x)
                    scene.grid.at({x, y}) = CellState::Free;
            r.center = {(r.x0 + r.x1 + 1) * 0.5 * cfg.cell_size,
                        (r.y0 + r.y1 + 1) * 0.5 * cfg.cell_size};
            scene.rooms.push_back(r);
        }
    }

    // Doors: spanning tree over the room grid plus random extras.
    struct Edge {
        int a, b;
        bool horizontal; // shared wall is a vertical line between horizontally adjacent rooms
    };
    std::vector<Edge> edges;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int id = j * nx + i;
            if (i + 1 < nx) edges.push_back({id, id + 1, true});
            if (j + 1 < ny) edges.push_back({id, id + nx, false});
        }
    std::shuffle(edges.begin(), edges.end(), rng);
    UnionFind uf(n_rooms);
    auto carve_door = [&](const Edge& e) {
        const Room& a = scene.rooms[e.a];
        const Room& b = scene.rooms[e.b];
        if (e.horizontal) {
            int wall_x = a.x1 + 1;
            int lo = std::max(a.y0, b.y0);
            int hi = std::min(a.y1, b.y1) - (cfg.door_width - 1);
            int y = hi >= lo ? uniform_int(rng, lo, hi) : lo;
            for (int k = 0; k < cfg.door_width; ++k)
                if (scene.grid.in_bounds({wall_x, y + k}))
                    scene.grid.at({wall_x, y + k}) = CellState::Free;
        } else {
            int wall_y = a.y1 + 1;
            int lo = std::max(a.x0, b.x0);
            int hi = std::min(a.x1, b.x1) - (cfg.door_width - 1);
            int x = hi >= lo ? uniform_int(rng, lo, hi) : lo;
            for (int k = 0; k < cfg.door_width; ++k)
                if (scene.grid.in_bounds({x + k, wall_y}))
                    scene.grid.at({x + k, wall_y}) = CellState::Free;
        }
    };
    for (const Edge& e : edges)
        if (uf.unite(e.a, e.b))
            carve_door(e);
        else if (uniform(rng) < cfg.extra_door_prob)
            carve_door(e);

    // Room types.
    if (!cfg.forced_room_types.empty()) {
        for (int i = 0; i < n_rooms; ++i) scene.rooms[i].room_type = cfg.forced_room_types[i];
    } else {
        double total_w = 0;
        for (const auto& p : cfg.room_palette) total_w += p.weight;
        for (auto& r : scene.rooms) {
            double u = uniform(rng, 0.0, total_w);
            for (const auto& p : cfg.room_palette) {
                u -= p.weight;
                if (u <= 0 || &p == &cfg.room_palette.back()) {
                    r.room_type = p.room_type;
                    break;
                }
            }
        }
    }

    // Objects from per-room-type priors, on distinct free cells.
    for (const auto& r : scene.rooms) {
        const RoomTypePrior* prior = nullptr;
        for (const auto& p : cfg.room_palette)
            if (p.room_type == r.room_type) prior = &p;
        if (!prior) continue;
        std::vector<Cell> spots;
        for (int y = r.y0; y <= r.y1; ++y)
            for (int x = r.x0; x <= r.x1; ++x) spots.push_back({x, y});
        std::shuffle(spots.begin(), spots.end(), rng);
        size_t next = 0;
        for (const auto& op : prior->objects) {
            if (uniform(rng) >= op.prob) continue;
            int count = uniform_int(rng, op.min_count, op.max_count);
            for (int k = 0; k < count && next < spots.size(); ++k) {
                PlacedObject obj;
                obj.category = op.category;
                obj.position = scene.grid.cell_center(spots[next++]);
                obj.room_id = r.id;
                scene.objects.push_back(obj);
            }
        }
    }

    for (const auto& r : scene.rooms) scene.landmarks.push_back({r.room_type, r.center});

    // Free space must be one connected component.
    {
        OccupancyMap m = OccupancyMap::from_grid(scene.grid);
        Cell seed_cell{scene.rooms[0].x0, scene.rooms[0].y0};
        DistanceField df = fmm_distance_field(m, {seed_cell}, {.obstacle_inflation = 0});
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.at({x, y}) == MapCell::Free && !df.reachable({x, y}))
                    throw std::runtime_error("scenegen: free space disconnected");
    }
    return scene;
}

} // namespace scenegen_detail

// Deterministic for fixed (config, seed). Retries with derived seeds when a
// sampled layout violates a constraint; gives up naming the failure.
inline Scene generate_scene(const ScenegenConfig& cfg, uint64_t seed) {
    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        try {
            return scenegen_detail::try_generate(cfg, hash_combine(seed, uint64_t(attempt)));
        } catch (const std::runtime_error& e) {
            last_error = e.what();
            if (std::string(e.what()).find("cannot fit") != std::string::npos) throw;
        }
    }
    throw std::runtime_error("scenegen: generation failed after retries: " + last_error);
}

inline RoomObjectStats compute_room_object_stats(const std::vector<Scene>& scenes) {
    if (scenes.empty()) throw std::invalid_argument("compute_room_object_stats: empty corpus");
    std::map<std::pair<std::string, std::string>, double> counts;
    std::map<std::string, double> totals;
    for (const Scene& s : scenes)
        for (const PlacedObject& o : s.objects) {
            counts[{s.rooms[o.room_id].room_type, o.category}] += 1.0;
            totals[o.category] += 1.0;
        }
    RoomObjectStats stats;
    for (const auto& [key, c] : counts) stats.table[key] = c / totals[key.second];
    return stats;
}

inline std::vector<EpisodeSpec> sample_episodes(const Scene& scene, const std::string& scene_id,
                                                const std::string& goal_category, int n,
                                                double min_geodesic, uint64_t seed) {
    std::vector<Cell> goal_cells;
    for (const Vec2& p : scene.goal_positions(goal_category))
        goal_cells.push_back(scene.grid.world_to_cell(p));
    if (goal_cells.empty())
        throw std::runtime_error("sample_episodes: no instance of '" + goal_category + "' in scene");

    OccupancyMap m = OccupancyMap::from_grid(scene.grid);
    DistanceField df = fmm_distance_field(m, goal_cells, {.obstacle_inflation = 0});

    std::vector<Cell> candidates;
    for (int y = 0; y < scene.grid.height; ++y)
        for (int x = 0; x < scene.grid.width; ++x) {
            Cell c{x, y};
            if (scene.grid.at(c) == CellState::Free && df.reachable(c) &&
                df.at(c) >= min_geodesic)
                candidates.push_back(c);
        }
    if (candidates.empty())
        throw std::runtime_error("sample_episodes: no start cell at geodesic >= " +
                                 std::to_string(min_geodesic));

    Rng rng = make_rng(seed, 0xe915);
    std::vector<EpisodeSpec> out;
    for (int i = 0; i < n; ++i) {
        Cell c = candidates[uniform_int(rng, 0, int(candidates.size()) - 1)];
        EpisodeSpec ep;
        ep.scene_id = scene_id;
        ep.start = scene.grid.cell_center(c);
        ep.start_heading = uniform_int(rng, 0, 11) * (M_PI / 6.0);
        ep.goal_category = goal_category;
        ep.shortest_path_length = df.at(c);
        out.push_back(ep);
    }
    return out;
}

} // namespace hlponav
