#pragma once
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace hlponav {

enum class CellState : uint8_t { Free = 0, Obstacle = 1 };

// Static world occupancy; row-major, cell (0,0) at world origin corner.
struct Grid {
    int width = 0;
    int height = 0;
    double cell_size = 0.25;
    std::vector<CellState> cells;

    bool in_bounds(const Cell& c) const {
        return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
    }
    CellState at(const Cell& c) const { return cells[size_t(c.y) * width + c.x]; }
    CellState& at(const Cell& c) { return cells[size_t(c.y) * width + c.x]; }
    bool free_at(const Cell& c) const { return in_bounds(c) && at(c) == CellState::Free; }

    Cell world_to_cell(const Vec2& p) const {
        return {int(p.x / cell_size), int(p.y / cell_size)};
    }
    Vec2 cell_center(const Cell& c) const {
        return {(c.x + 0.5) * cell_size, (c.y + 0.5) * cell_size};
    }
    bool operator==(const Grid&) const = default;
};

struct Room {
    int id = 0;
    std::string room_type;
    // Axis-aligned interior rectangle in cells (inclusive bounds).
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    Vec2 center; // meters

    bool contains(const Cell& c) const {
        return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1;
    }
    int cell_count() const { return (x1 - x0 + 1) * (y1 - y0 + 1); }
    bool operator==(const Room&) const = default;
};

struct PlacedObject {
    std::string category;
    Vec2 position;
    int room_id = 0;
    bool operator==(const PlacedObject&) const = default;
};

struct Landmark {
    std::string room_type;
    Vec2 center;
    bool operator==(const Landmark&) const = default;
};

using LandmarkList = std::vector<Landmark>;

struct Scene {
    Grid grid;
    std::vector<Room> rooms;
    std::vector<PlacedObject> objects;
    LandmarkList landmarks;
    uint64_t seed = 0;

    std::vector<Vec2> goal_positions(const std::string& category) const {
        std::vector<Vec2> out;
        for (const auto& o : objects)
            if (o.category == category) out.push_back(o.position);
        return out;
    }
    bool operator==(const Scene&) const = default;
};

// P(room_type | category): fraction of a category's instances found in each
// room type across a training corpus. Categories never seen are absent.
struct RoomObjectStats {
    std::map<std::pair<std::string, std::string>, double> table; // (room_type, category) -> p

    double prob(const std::string& room_type, const std::string& category) const {
        auto it = table.find({room_type, category});
        return it == table.end() ? 0.0 : it->second;
    }
    bool operator==(const RoomObjectStats&) const = default;
};

struct EpisodeSpec {
    std::string scene_id;
    Vec2 start;
    double start_heading = 0.0;
    std::string goal_category;
    double shortest_path_length = 0.0; // geodesic to closest goal instance, meters
    bool operator==(const EpisodeSpec&) const = default;
};

} // namespace hlponav
