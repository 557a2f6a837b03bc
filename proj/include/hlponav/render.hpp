#pragma once
#include <map>
#include <sstream>
#include <string>

#include "eval.hpp"
#include "scene.hpp"

namespace hlponav {

// Top-down SVG: obstacles, landmark disks, goal markers, and the trajectory
// with one color per skill-in-control.
inline std::string render_svg(const Scene& scene, const TrajectoryLog& log,
                              double landmark_radius = 2.0, double px_per_m = 40.0) {
    const Grid& g = scene.grid;
    double wm = g.width * g.cell_size, hm = g.height * g.cell_size;
    auto X = [&](double x) { return x * px_per_m; };
    auto Y = [&](double y) { return (hm - y) * px_per_m; }; // y up

    static const std::map<std::string, std::string> palette = {
        {"pointnav", "#1f77b4"}, {"explore", "#2ca02c"}, {"reacher", "#d62728"},
        {"e2e", "#9467bd"},      {"agent", "#8c564b"},   {"done", "#7f7f7f"},
    };
    auto color = [&](const std::string& skill) {
        auto it = palette.find(skill);
        return it != palette.end() ? it->second : std::string("#17becf");
    };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << int(X(wm)) << "' height='"
        << int(hm * px_per_m) << "' viewBox='0 0 " << X(wm) << " " << hm * px_per_m << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (g.at({x, y}) == CellState::Obstacle)
                svg << "<rect x='" << X(x * g.cell_size) << "' y='" << Y((y + 1) * g.cell_size)
                    << "' width='" << g.cell_size * px_per_m << "' height='"
                    << g.cell_size * px_per_m << "' fill='#444'/>\n";
    for (const auto& lm : scene.landmarks)
        svg << "<circle cx='" << X(lm.center.x) << "' cy='" << Y(lm.center.y) << "' r='"
            << landmark_radius * px_per_m
            << "' fill='#ffd54f' fill-opacity='0.25' stroke='#f9a825'/>\n"
            << "<text x='" << X(lm.center.x) << "' y='" << Y(lm.center.y)
            << "' font-size='10' text-anchor='middle' fill='#795548'>" << lm.room_type
            << "</text>\n";
    for (const auto& obj : scene.objects) {
        bool is_goal = obj.category == log.goal_category;
        svg << "<circle cx='" << X(obj.position.x) << "' cy='" << Y(obj.position.y) << "' r='"
            << (is_goal ? 6 : 3) << "' fill='" << (is_goal ? "#e91e63" : "#90a4ae") << "'/>\n";
    }
    for (size_t i = 1; i < log.steps.size(); ++i) {
        const auto& a = log.steps[i - 1];
        const auto& b = log.steps[i];
        svg << "<line x1='" << X(a.pose.position.x) << "' y1='" << Y(a.pose.position.y)
            << "' x2='" << X(b.pose.position.x) << "' y2='" << Y(b.pose.position.y)
            << "' stroke='" << color(b.skill) << "' stroke-width='2'/>\n";
    }
    if (!log.steps.empty()) {
        const auto& s0 = log.steps.front();
        svg << "<circle cx='" << X(s0.pose.position.x) << "' cy='" << Y(s0.pose.position.y)
            << "' r='5' fill='none' stroke='black' stroke-width='2'/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace hlponav
