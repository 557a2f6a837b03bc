#pragma once
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval.hpp"
#include "nn.hpp"
#include "scene.hpp"
#include "scenegen.hpp"

namespace hlponav {

using nlohmann::json;

// FNV-1a over a canonical JSON dump; embedded in artifacts for provenance.
inline std::string config_hash(const json& j) {
    std::string s = j.dump();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

// --- grid RLE ---------------------------------------------------------------

inline std::string grid_to_rle(const Grid& g) {
    std::string out;
    size_t i = 0;
    while (i < g.cells.size()) {
        size_t j = i;
        while (j < g.cells.size() && g.cells[j] == g.cells[i]) ++j;
        out += std::to_string(j - i);
        out += g.cells[i] == CellState::Free ? 'f' : 'o';
        i = j;
    }
    return out;
}

inline std::vector<CellState> rle_to_cells(const std::string& rle, size_t expected) {
    std::vector<CellState> cells;
    size_t i = 0;
    while (i < rle.size()) {
        size_t n = 0;
        while (i < rle.size() && isdigit(rle[i])) n = n * 10 + (rle[i++] - '0');
        if (i >= rle.size()) throw std::runtime_error("grid rle: truncated run");
        char c = rle[i++];
        CellState s = c == 'f' ? CellState::Free : CellState::Obstacle;
        if (c != 'f' && c != 'o') throw std::runtime_error("grid rle: bad symbol");
        cells.insert(cells.end(), n, s);
    }
    if (cells.size() != expected) throw std::runtime_error("grid rle: size mismatch");
    return cells;
}

// --- scene / episode json ---------------------------------------------------

inline json to_json(const Vec2& v) { return json::array({v.x, v.y}); }
inline Vec2 vec2_from_json(const json& j) { return {j.at(0), j.at(1)}; }

inline json to_json(const Scene& s) {
    json j;
    j["seed"] = s.seed;
    j["grid"] = {{"width", s.grid.width},
                 {"height", s.grid.height},
                 {"cell_size", s.grid.cell_size},
                 {"rle", grid_to_rle(s.grid)}};
    for (const auto& r : s.rooms)
        j["rooms"].push_back({{"id", r.id},
                              {"room_type", r.room_type},
                              {"x0", r.x0},
                              {"y0", r.y0},
                              {"x1", r.x1},
                              {"y1", r.y1},
                              {"center", to_json(r.center)}});
    j["objects"] = json::array();
    for (const auto& o : s.objects)
        j["objects"].push_back(
            {{"category", o.category}, {"position", to_json(o.position)}, {"room_id", o.room_id}});
    j["landmarks"] = json::array();
    for (const auto& l : s.landmarks)
        j["landmarks"].push_back({{"room_type", l.room_type}, {"center", to_json(l.center)}});
    return j;
}

inline Scene scene_from_json(const json& j) {
    Scene s;
    s.seed = j.at("seed");
    const json& g = j.at("grid");
    s.grid.width = g.at("width");
    s.grid.height = g.at("height");
    s.grid.cell_size = g.at("cell_size");
    s.grid.cells = rle_to_cells(g.at("rle"), size_t(s.grid.width) * s.grid.height);
    for (const auto& rj : j.value("rooms", json::array())) {
        Room r;
        r.id = rj.at("id");
        r.room_type = rj.at("room_type");
        r.x0 = rj.at("x0");
        r.y0 = rj.at("y0");
        r.x1 = rj.at("x1");
        r.y1 = rj.at("y1");
        r.center = vec2_from_json(rj.at("center"));
        s.rooms.push_back(r);
    }
    for (const auto& oj : j.value("objects", json::array()))
        s.objects.push_back(
            {oj.at("category"), vec2_from_json(oj.at("position")), oj.at("room_id")});
    for (const auto& lj : j.value("landmarks", json::array()))
        s.landmarks.push_back({lj.at("room_type"), vec2_from_json(lj.at("center"))});
    return s;
}

inline json to_json(const EpisodeSpec& e) {
    return {{"scene_id", e.scene_id},
            {"start", to_json(e.start)},
            {"start_heading", e.start_heading},
            {"goal_category", e.goal_category},
            {"shortest_path_length", e.shortest_path_length}};
}

inline EpisodeSpec episode_from_json(const json& j) {
    EpisodeSpec e;
    e.scene_id = j.at("scene_id");
    e.start = vec2_from_json(j.at("start"));
    e.start_heading = j.at("start_heading");
    e.goal_category = j.at("goal_category");
    e.shortest_path_length = j.at("shortest_path_length");
    return e;
}

inline json to_json(const ScenegenConfig& c) {
    json palette = json::array();
    for (const auto& p : c.room_palette) {
        json objs = json::array();
        for (const auto& o : p.objects)
            objs.push_back({{"category", o.category},
                            {"min_count", o.min_count},
                            {"max_count", o.max_count},
                            {"prob", o.prob}});
        palette.push_back({{"room_type", p.room_type}, {"weight", p.weight}, {"objects", objs}});
    }
    return {{"grid_width", c.grid_width},
            {"grid_height", c.grid_height},
            {"cell_size", c.cell_size},
            {"min_rooms", c.min_rooms},
            {"max_rooms", c.max_rooms},
            {"min_room_span", c.min_room_span},
            {"door_width", c.door_width},
            {"extra_door_prob", c.extra_door_prob},
            {"room_palette", palette},
            {"forced_room_types", c.forced_room_types}};
}

inline ScenegenConfig scenegen_config_from_json(const json& j) {
    ScenegenConfig c;
    c.grid_width = j.value("grid_width", c.grid_width);
    c.grid_height = j.value("grid_height", c.grid_height);
    c.cell_size = j.value("cell_size", c.cell_size);
    c.min_rooms = j.value("min_rooms", c.min_rooms);
    c.max_rooms = j.value("max_rooms", c.max_rooms);
    c.min_room_span = j.value("min_room_span", c.min_room_span);
    c.door_width = j.value("door_width", c.door_width);
    c.extra_door_prob = j.value("extra_door_prob", c.extra_door_prob);
    if (j.contains("room_palette")) {
        c.room_palette.clear();
        for (const auto& pj : j.at("room_palette")) {
            RoomTypePrior p;
            p.room_type = pj.at("room_type");
            p.weight = pj.value("weight", 1.0);
            for (const auto& oj : pj.value("objects", json::array()))
                p.objects.push_back({oj.at("category"), oj.value("min_count", 1),
                                     oj.value("max_count", 1), oj.value("prob", 1.0)});
            c.room_palette.push_back(p);
        }
    } else {
        c.room_palette = default_scenegen_config().room_palette;
    }
    c.forced_room_types = j.value("forced_room_types", c.forced_room_types);
    return c;
}

// --- checkpoints -------------------------------------------------------------

struct Checkpoint {
    int version = 1;
    std::string skill;
    NetConfig net;
    ParamVec params;
    long env_steps = 0;
    std::string cfg_hash;
};

inline json to_json(const Checkpoint& c) {
    return {{"version", c.version},
            {"skill", c.skill},
            {"net",
             {{"obs_dim", c.net.obs_dim},
              {"enc_dim", c.net.enc_dim},
              {"hidden_dim", c.net.hidden_dim},
              {"num_actions", c.net.num_actions}}},
            {"params", c.params},
            {"env_steps", c.env_steps},
            {"config_hash", c.cfg_hash}};
}

inline Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint c;
    c.version = j.at("version");
    c.skill = j.at("skill");
    const json& n = j.at("net");
    c.net = {n.at("obs_dim"), n.at("enc_dim"), n.at("hidden_dim"), n.at("num_actions")};
    c.params = j.at("params").get<ParamVec>();
    c.env_steps = j.value("env_steps", 0L);
    c.cfg_hash = j.value("config_hash", "");
    return c;
}

// --- plain file helpers ------------------------------------------------------

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(1)); }
inline json read_json(const std::string& path) { return json::parse(read_text(path)); }

// --- trajectory log (one json object per step, line-delimited) ---------------

inline std::string trajectory_to_jsonl(const TrajectoryLog& log) {
    std::ostringstream out;
    json header = {{"scene_id", log.scene_id},
                   {"goal_category", log.goal_category},
                   {"method", log.method}};
    out << header.dump() << "\n";
    for (const auto& s : log.steps) {
        json j = {{"step", s.step},          {"x", s.pose.position.x},
                  {"y", s.pose.position.y},  {"heading", s.pose.heading},
                  {"action", action_name(s.action)}, {"collision", s.collision},
                  {"skill", s.skill}};
        out << j.dump() << "\n";
    }
    return out.str();
}

inline TrajectoryLog trajectory_from_jsonl(const std::string& text) {
    TrajectoryLog log;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (first) {
            log.scene_id = j.value("scene_id", "");
            log.goal_category = j.value("goal_category", "");
            log.method = j.value("method", "");
            first = false;
            continue;
        }
        StepRecord s;
        s.step = j.at("step");
        s.pose.position = {j.at("x"), j.at("y")};
        s.pose.heading = j.at("heading");
        std::string an = j.at("action");
        for (int a = 0; a < kNumActions; ++a)
            if (an == action_name(Action(a))) s.action = Action(a);
        s.collision = j.value("collision", false);
        s.skill = j.value("skill", "");
        log.steps.push_back(s);
    }
    return log;
}

// --- results CSV -------------------------------------------------------------

inline std::string results_to_csv(const std::vector<EpisodeResult>& results) {
    std::ostringstream out;
    out << "method,seed,success,shortest_path_length,agent_path_length,steps,"
           "initial_distance,final_distance\n";
    for (const auto& r : results)
        out << r.method << "," << r.seed << "," << (r.success ? 1 : 0) << ","
            << r.shortest_path_length << "," << r.agent_path_length << "," << r.steps << ","
            << r.initial_distance_to_goal << "," << r.final_distance_to_goal << "\n";
    return out.str();
}

// --- map export --------------------------------------------------------------

inline std::string map_to_pgm(const OccupancyMap& m) {
    std::ostringstream out;
    out << "P2\n" << m.width << " " << m.height << "\n255\n";
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            int v = m.at({x, y}) == MapCell::Free ? 255
                    : m.at({x, y}) == MapCell::Obstacle ? 0
                                                        : 127;
            out << v << (x + 1 < m.width ? " " : "");
        }
        out << "\n";
    }
    return out.str();
}

} // namespace hlponav
