#include <catch2/catch_amalgamated.hpp>

#include "hlponav/io.hpp"
#include "hlponav/render.hpp"

using namespace hlponav;

TEST_CASE("grid rle round-trips and rejects malformed input") {
    ScenegenConfig c = default_scenegen_config();
    Scene s = generate_scene(c, 2);
    std::string rle = grid_to_rle(s.grid);
    auto cells = rle_to_cells(rle, s.grid.cells.size());
    CHECK(cells == s.grid.cells);
    CHECK_THROWS(rle_to_cells(rle, s.grid.cells.size() + 1));
    CHECK_THROWS(rle_to_cells("12", 12));
    CHECK_THROWS(rle_to_cells("3f2x", 5));
}

TEST_CASE("scene json round-trip preserves every field") {
    ScenegenConfig c = default_scenegen_config();
    for (uint64_t seed : {0ULL, 5ULL, 9ULL}) {
        Scene s = generate_scene(c, seed);
        Scene back = scene_from_json(to_json(s));
        CHECK(back == s);
    }
}

TEST_CASE("episode json round-trip is exact including doubles") {
    EpisodeSpec e;
    e.scene_id = "scene_7";
    e.start = {1.0 / 3.0, 2.625};
    e.start_heading = M_PI / 6.0;
    e.goal_category = "couch";
    e.shortest_path_length = 7.0710678118654755;
    EpisodeSpec back = episode_from_json(to_json(e));
    CHECK(back == e);
}

TEST_CASE("scenegen config json round-trip") {
    ScenegenConfig c = default_scenegen_config();
    c.grid_width = 40;
    c.forced_room_types = {"lounge", "bathroom"};
    ScenegenConfig back = scenegen_config_from_json(to_json(c));
    CHECK(back == c);
}

TEST_CASE("config hash is stable and sensitive") {
    json a = to_json(default_scenegen_config());
    CHECK(config_hash(a) == config_hash(a));
    CHECK(config_hash(a).size() == 16);
    json b = a;
    b["grid_width"] = 49;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("checkpoint json round-trip preserves parameters bit-exactly") {
    NetConfig nc{.obs_dim = 7, .enc_dim = 4, .hidden_dim = 5, .num_actions = 4};
    ActorCritic net(nc);
    Checkpoint ck;
    ck.skill = "pointnav";
    ck.net = nc;
    ck.params = net.init_params(77);
    ck.env_steps = 123456;
    ck.cfg_hash = "deadbeefdeadbeef";
    Checkpoint back = checkpoint_from_json(to_json(ck));
    CHECK(back.skill == ck.skill);
    CHECK(back.net == ck.net);
    CHECK(back.env_steps == ck.env_steps);
    CHECK(back.cfg_hash == ck.cfg_hash);
    REQUIRE(back.params.size() == ck.params.size());
    for (size_t i = 0; i < ck.params.size(); ++i) REQUIRE(back.params[i] == ck.params[i]);
}

TEST_CASE("trajectory jsonl round-trips") {
    TrajectoryLog log;
    log.scene_id = "sc";
    log.goal_category = "sink";
    log.method = "hlpo";
    log.steps = {{1, {{1.0, 2.0}, 0.5}, Action::Forward, false, "pointnav"},
                 {2, {{1.25, 2.0}, 0.5}, Action::TurnLeft, true, "explore"},
                 {3, {{1.25, 2.0}, 1.02}, Action::Stop, false, "reacher"}};
    TrajectoryLog back = trajectory_from_jsonl(trajectory_to_jsonl(log));
    CHECK(back.scene_id == log.scene_id);
    CHECK(back.goal_category == log.goal_category);
    CHECK(back.method == log.method);
    REQUIRE(back.steps.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(back.steps[i].step == log.steps[i].step);
        CHECK(back.steps[i].pose == log.steps[i].pose);
        CHECK(back.steps[i].action == log.steps[i].action);
        CHECK(back.steps[i].collision == log.steps[i].collision);
        CHECK(back.steps[i].skill == log.steps[i].skill);
    }
}

TEST_CASE("results csv has a header and one line per episode") {
    std::vector<EpisodeResult> rs(2);
    rs[0].method = "hlpo";
    rs[0].success = true;
    rs[0].shortest_path_length = 5.0;
    rs[0].agent_path_length = 6.5;
    rs[1].method = "planning";
    std::string csv = results_to_csv(rs);
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 3);
    CHECK(csv.find("method,seed,success") == 0);
    CHECK(csv.find("hlpo,0,1,5,6.5") != std::string::npos);
}

TEST_CASE("pgm export carries the three occupancy tones") {
    OccupancyMap m(3, 2, 0.25);
    m.cells = {MapCell::Free, MapCell::Obstacle, MapCell::Unknown,
               MapCell::Unknown, MapCell::Free, MapCell::Obstacle};
    std::string pgm = map_to_pgm(m);
    CHECK(pgm.find("P2\n3 2\n255\n") == 0);
    CHECK(pgm.find("255 0 127") != std::string::npos);
}

TEST_CASE("svg render includes obstacles, landmarks, goal, and trajectory") {
    ScenegenConfig c = default_scenegen_config();
    c.grid_width = 24;
    c.grid_height = 24;
    c.forced_room_types = {"lounge"};
    c.room_palette = {{"lounge", 1.0, {{"couch", 1, 1, 1.0}}}};
    Scene s = generate_scene(c, 4);
    TrajectoryLog log;
    log.goal_category = "couch";
    log.steps = {{1, {{2.0, 2.0}, 0.0}, Action::Forward, false, "pointnav"},
                 {2, {{2.25, 2.0}, 0.0}, Action::Forward, false, "reacher"}};
    std::string svg = render_svg(s, log);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("lounge") != std::string::npos);      // landmark label
    CHECK(svg.find("#d62728") != std::string::npos);        // reacher-colored segment
    CHECK(svg.find("fill='#e91e63'") != std::string::npos); // goal marker
}

TEST_CASE("file helpers write and read back") {
    std::string path = "/tmp/hlponav_io_test.json";
    json j = {{"a", 1}, {"b", "two"}};
    write_json(path, j);
    CHECK(read_json(path) == j);
    CHECK_THROWS(read_text("/nonexistent/nope.txt"));
}
