#include <catch2/catch_amalgamated.hpp>

#include "hlponav/mapper.hpp"
#include "hlponav/rng.hpp"
#include "oracles.hpp"

using namespace hlponav;

namespace {

OccupancyMap random_partial_map(Rng& rng, int w, int h, double p_obstacle, double p_unknown) {
    OccupancyMap m(w, h, 0.25);
    for (auto& c : m.cells) {
        double u = uniform(rng);
        c = u < p_unknown ? MapCell::Unknown
            : u < p_unknown + p_obstacle ? MapCell::Obstacle
                                         : MapCell::Free;
    }
    return m;
}

} // namespace

TEST_CASE("integrate_scan frees cells along the ray and marks the hit cell") {
    OccupancyMap m(40, 40, 0.25);
    Vec2 origin{5.0, 5.0};
    integrate_scan(m, origin, {2.0}, {0.0}, 5.0);
    // cells from x=5.0 to x=7.0 at y=5.0 freed, hit cell beyond is obstacle
    int freed = m.count(MapCell::Free);
    int obstacles = m.count(MapCell::Obstacle);
    CHECK(freed == 8);
    CHECK(obstacles == 1);
    CHECK(m.at({28, 20}) == MapCell::Obstacle);
}

TEST_CASE("integrate_scan at max range marks no obstacle") {
    OccupancyMap m(40, 40, 0.25);
    integrate_scan(m, {5.0, 5.0}, {5.0}, {0.0}, 5.0);
    CHECK(m.count(MapCell::Obstacle) == 0);
}

TEST_CASE("integrate_scan is idempotent") {
    OccupancyMap m(40, 40, 0.25);
    std::vector<double> depths{2.0, 3.0, 1.5};
    std::vector<double> angles{0.0, 1.0, 2.5};
    integrate_scan(m, {5.0, 5.0}, depths, angles, 5.0);
    OccupancyMap before = m;
    integrate_scan(m, {5.0, 5.0}, depths, angles, 5.0);
    CHECK(m == before);
}

TEST_CASE("obstacle observations dominate free") {
    OccupancyMap m(10, 10, 0.25);
    m.observe_obstacle({3, 3});
    m.observe_free({3, 3});
    CHECK(m.at({3, 3}) == MapCell::Obstacle);
}

TEST_CASE("extract_frontiers on fully explored map is empty") {
    OccupancyMap m(20, 20, 0.25);
    for (auto& c : m.cells) c = MapCell::Free;
    CHECK(extract_frontiers(m).empty());
}

TEST_CASE("frontier cells match brute-force definition on random partial maps") {
    Rng rng = make_rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        OccupancyMap m = random_partial_map(rng, 30, 30, 0.2, 0.3);
        auto frontiers = extract_frontiers(m, 1);
        std::vector<uint8_t> extracted(m.cells.size(), 0);
        for (const auto& f : frontiers)
            for (const Cell& c : f.cells) {
                // partition: no duplicates across components
                REQUIRE(extracted[c.y * m.width + c.x] == 0);
                extracted[c.y * m.width + c.x] = 1;
            }
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                REQUIRE(bool(extracted[y * m.width + x]) == oracles::is_frontier(m, x, y));
    }
}

TEST_CASE("frontiers sorted by size descending with centroid tie-break") {
    Rng rng = make_rng(11);
    OccupancyMap m = random_partial_map(rng, 30, 30, 0.2, 0.3);
    auto frontiers = extract_frontiers(m, 1);
    for (size_t i = 1; i < frontiers.size(); ++i) {
        CHECK(frontiers[i - 1].size() >= frontiers[i].size());
        if (frontiers[i - 1].size() == frontiers[i].size()) {
            auto& a = frontiers[i - 1].centroid;
            auto& b = frontiers[i].centroid;
            CHECK((a.x < b.x || (a.x == b.x && a.y <= b.y)));
        }
    }
}

TEST_CASE("distance field on a straight corridor") {
    OccupancyMap m(12, 3, 0.25);
    for (auto& c : m.cells) c = MapCell::Obstacle;
    for (int x = 1; x <= 10; ++x) m.cells[1 * 12 + x] = MapCell::Free;
    auto df = fmm_distance_field(m, {{1, 1}}, {.obstacle_inflation = 0});
    CHECK(df.at({1, 1}) == 0.0);
    CHECK(df.at({10, 1}) == Catch::Approx(9 * 0.25));
}

TEST_CASE("fmm matches Dijkstra oracle exactly on random maps") {
    Rng rng = make_rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        OccupancyMap m = random_partial_map(rng, 40, 40, 0.25, 0.1);
        PlannerOptions opt{.obstacle_inflation = 0, .unknown_traversable = true};
        // pick a free source
        std::vector<int> frees;
        for (int i = 0; i < 40 * 40; ++i)
            if (m.cells[i] != MapCell::Obstacle) frees.push_back(i);
        if (frees.empty()) continue;
        int s = frees[uniform_int(rng, 0, int(frees.size()) - 1)];
        auto df = fmm_distance_field(m, {{s % 40, s / 40}}, opt);
        std::vector<bool> passable(m.cells.size());
        for (size_t i = 0; i < m.cells.size(); ++i) passable[i] = m.cells[i] != MapCell::Obstacle;
        auto ref = oracles::dijkstra8(40, 40, passable, {s}, 0.25);
        for (size_t i = 0; i < ref.size(); ++i) {
            if (std::isinf(ref[i]))
                REQUIRE(df.dist[i] == kInf);
            else
                REQUIRE(df.dist[i] == Catch::Approx(ref[i]).epsilon(0).margin(1e-12));
        }
    }
}

TEST_CASE("distance field never underestimates the Euclidean metric") {
    Rng rng = make_rng(5);
    OccupancyMap m = random_partial_map(rng, 30, 30, 0.2, 0.0);
    std::vector<Cell> frees;
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x)
            if (m.at({x, y}) == MapCell::Free) frees.push_back({x, y});
    Cell s = frees[0];
    auto df = fmm_distance_field(m, {s}, {.obstacle_inflation = 0});
    for (const Cell& c : frees)
        if (df.reachable(c))
            CHECK(df.at(c) >= distance(m.cell_center(s), m.cell_center(c)) - 1e-9);
}

TEST_CASE("fmm errors when all sources are blocked") {
    OccupancyMap m(10, 10, 0.25);
    for (auto& c : m.cells) c = MapCell::Obstacle;
    CHECK_THROWS(fmm_distance_field(m, {{5, 5}}, {.obstacle_inflation = 0}));
}

TEST_CASE("plan_next_action goes forward in a clear corridor") {
    OccupancyMap m(40, 7, 0.25);
    for (auto& c : m.cells) c = MapCell::Free;
    for (int x = 0; x < 40; ++x) {
        m.cells[0 * 40 + x] = MapCell::Obstacle;
        m.cells[6 * 40 + x] = MapCell::Obstacle;
    }
    Vec2 pos{1.0, 3.5 * 0.25};
    Vec2 goal{8.0, 3.5 * 0.25};
    Action a = plan_next_action(m, pos, 0.0, goal, M_PI / 6.0, {.obstacle_inflation = 1});
    CHECK(a == Action::Forward);
}

TEST_CASE("goal directly behind turns left") {
    OccupancyMap m(40, 40, 0.25);
    for (auto& c : m.cells) c = MapCell::Free;
    Vec2 pos{5.0, 5.0};
    Vec2 goal{2.0, 5.0};
    Action a = plan_next_action(m, pos, 0.0, goal, M_PI / 6.0, {.obstacle_inflation = 0});
    CHECK(a == Action::TurnLeft);
}

TEST_CASE("closed-loop planner rollout reaches the goal within 4x shortest steps") {
    Rng rng = make_rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        OccupancyMap m(30, 30, 0.25);
        for (auto& c : m.cells) c = MapCell::Free;
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 30; ++x)
                if ((x == 0 || x == 29 || y == 0 || y == 29)) m.cells[y * 30 + x] = MapCell::Obstacle;
        // a wall with a gap
        for (int y = 1; y < 25; ++y) m.cells[y * 30 + 15] = MapCell::Obstacle;
        Vec2 pos{2.0, 2.0};
        double heading = 0.0;
        Vec2 goal{6.5, 6.5};
        auto df = fmm_distance_field(m, {m.world_to_cell(goal)}, {.obstacle_inflation = 1});
        double shortest_m = df.at(m.world_to_cell(pos));
        int budget = int(4 * (shortest_m / 0.25 + 12));
        bool reached = false;
        for (int i = 0; i < budget; ++i) {
            if (distance(pos, goal) < 0.3) {
                reached = true;
                break;
            }
            Action a = plan_next_action(m, pos, heading, goal, M_PI / 6.0, {.obstacle_inflation = 1});
            if (a == Action::Forward) {
                Vec2 next = pos + Vec2{std::cos(heading), std::sin(heading)} * 0.25;
                if (m.at(m.world_to_cell(next)) != MapCell::Obstacle) pos = next;
            } else if (a == Action::TurnLeft) {
                heading = wrap_angle(heading + M_PI / 6.0);
            } else if (a == Action::TurnRight) {
                heading = wrap_angle(heading - M_PI / 6.0);
            }
        }
        CHECK(reached);
    }
}
