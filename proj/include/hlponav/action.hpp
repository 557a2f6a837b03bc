#pragma once
#include <array>
#include <cstdint>
#include <string>

namespace hlponav {

enum class Action : uint8_t { Forward = 0, TurnLeft = 1, TurnRight = 2, Stop = 3 };

inline constexpr int kNumActions = 4;

inline const char* action_name(Action a) {
    switch (a) {
        case Action::Forward: return "forward";
        case Action::TurnLeft: return "turn_left";
        case Action::TurnRight: return "turn_right";
        case Action::Stop: return "stop";
    }
    return "?";
}

} // namespace hlponav
