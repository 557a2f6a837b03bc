#pragma once
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlponav {

struct EpisodeResult {
    bool success = false;
    double shortest_path_length = 0.0; // l_i, meters
    double agent_path_length = 0.0;    // p_i, meters
    int steps = 0;
    double initial_distance_to_goal = 0.0; // geodesic at start (= l_i)
    double final_distance_to_goal = 0.0;   // geodesic at stop
    std::string method;
    uint64_t seed = 0;
};

inline double spl(const std::vector<EpisodeResult>& results) {
    if (results.empty()) throw std::invalid_argument("spl: empty suite");
    double sum = 0.0;
    for (const auto& r : results)
        if (r.success)
            sum += r.shortest_path_length / std::max(r.agent_path_length, r.shortest_path_length);
    return sum / results.size();
}

inline double success_rate(const std::vector<EpisodeResult>& results) {
    if (results.empty()) throw std::invalid_argument("success_rate: empty suite");
    double n = 0;
    for (const auto& r : results) n += r.success ? 1.0 : 0.0;
    return n / results.size();
}

// Progress times path efficiency, independent of the success flag.
inline double soft_spl(const std::vector<EpisodeResult>& results) {
    if (results.empty()) throw std::invalid_argument("soft_spl: empty suite");
    double sum = 0.0;
    for (const auto& r : results) {
        double progress =
            r.initial_distance_to_goal > 0
                ? std::max(0.0, 1.0 - r.final_distance_to_goal / r.initial_distance_to_goal)
                : 0.0;
        sum += progress *
               (r.shortest_path_length /
                std::max(r.agent_path_length, r.shortest_path_length));
    }
    return sum / results.size();
}

struct MethodMetrics {
    double success = 0.0;
    double spl = 0.0;
    double soft_spl = 0.0;
};

struct SuiteReport {
    // method -> mean metrics over runs, plus max-minus-min dispersion per metric
    std::map<std::string, MethodMetrics> mean;
    std::map<std::string, MethodMetrics> dispersion;
    int runs = 0;
    int episodes_per_run = 0;
};

// One run = every method evaluated on the same episode set under one seed.
using RunResults = std::map<std::string, std::vector<EpisodeResult>>;

inline SuiteReport aggregate(const std::vector<RunResults>& runs) {
    if (runs.size() < 1) throw std::invalid_argument("aggregate: need at least one run");
    SuiteReport rep;
    rep.runs = int(runs.size());
    for (const auto& [method, results] : runs.front()) {
        rep.episodes_per_run = int(results.size());
        std::vector<double> sr, sp, ss;
        for (const auto& run : runs) {
            auto it = run.find(method);
            if (it == run.end() || it->second.size() != results.size())
                throw std::runtime_error("aggregate: mismatched episode sets across runs");
            sr.push_back(success_rate(it->second));
            sp.push_back(spl(it->second));
            ss.push_back(soft_spl(it->second));
        }
        auto mean = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += x;
            return s / v.size();
        };
        auto disp = [](const std::vector<double>& v) {
            return *std::max_element(v.begin(), v.end()) -
                   *std::min_element(v.begin(), v.end());
        };
        rep.mean[method] = {mean(sr), mean(sp), mean(ss)};
        rep.dispersion[method] = {disp(sr), disp(sp), disp(ss)};
    }
    return rep;
}

} // namespace hlponav
