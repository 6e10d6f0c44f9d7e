#pragma once

#include "ggiwt/linalg.hpp"

#include <cstdint>
#include <vector>

namespace ggiwt {

/// A per-scan sequence of kinematic states and extents, contiguous from
/// birth_time. Produced by both filters and by the ground truth.
struct EstimatedTrajectory {
    int birth_time = 0;
    std::vector<Vec5> states;
    std::vector<Mat2> extents;
    double rate = 0.0;
    bool alive = true;
    /// Component label (labeled baseline only; -1 otherwise).
    std::int64_t label = -1;
    bool smoothed = false;
    /// Steps where extent smoothing produced a non-SPD scale and the filtered
    /// value was kept instead.
    std::vector<int> smoothing_fallback_steps;

    [[nodiscard]] int length() const { return static_cast<int>(states.size()); }
    [[nodiscard]] int end_time() const { return birth_time + length() - 1; }
    [[nodiscard]] bool exists_at(int t) const { return t >= birth_time && t <= end_time(); }
};

}  // namespace ggiwt
