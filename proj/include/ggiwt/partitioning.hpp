#pragma once

#include "ggiwt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ggiwt {

/// Sorted measurement indices hypothesized to come from one source.
struct Cell {
    std::vector<std::size_t> indices;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Disjoint cover of one scan's measurements.
struct Partition {
    std::vector<Cell> cells;

    friend bool operator==(const Partition&, const Partition&) = default;
};

namespace detail {

inline void canonicalize(Partition& p) {
    for (auto& c : p.cells) std::sort(c.indices.begin(), c.indices.end());
    std::sort(p.cells.begin(), p.cells.end(),
              [](const Cell& a, const Cell& b) { return a.indices.front() < b.indices.front(); });
}

}  // namespace detail

/// True when every index 0..num_points-1 appears in exactly one non-empty,
/// strictly increasing cell.
[[nodiscard]] inline bool is_valid_partition(const Partition& p, std::size_t num_points) {
    std::vector<int> seen(num_points, 0);
    for (const auto& c : p.cells) {
        if (c.indices.empty()) return false;
        for (std::size_t i = 0; i < c.indices.size(); ++i) {
            if (c.indices[i] >= num_points) return false;
            if (i > 0 && c.indices[i] <= c.indices[i - 1]) return false;
            ++seen[c.indices[i]];
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

/// DBSCAN where points left unclustered become singleton cells, so the
/// result always covers the scan. With min_pts = 1 the cells are the
/// connected components of the eps-neighbourhood graph.
[[nodiscard]] inline Partition dbscan(std::span<const Vec2> points, double eps, std::size_t min_pts = 1) {
    const std::size_t n = points.size();
    const double eps2 = eps * eps;
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if ((points[i] - points[j]).squaredNorm() <= eps2) nbrs[i].push_back(j);
        }
    }

    constexpr int kUnassigned = -1;
    std::vector<int> label(n, kUnassigned);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnassigned || nbrs[i].size() < min_pts) continue;
        const int id = next++;
        label[i] = id;
        std::vector<std::size_t> frontier{i};
        while (!frontier.empty()) {
            const std::size_t p = frontier.back();
            frontier.pop_back();
            // only core points expand
            if (nbrs[p].size() < min_pts) continue;
            for (std::size_t q : nbrs[p]) {
                if (label[q] == kUnassigned) {
                    label[q] = id;
                    frontier.push_back(q);
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == kUnassigned) label[i] = next++;
    }

    Partition part;
    part.cells.resize(static_cast<std::size_t>(next));
    for (std::size_t i = 0; i < n; ++i) part.cells[static_cast<std::size_t>(label[i])].indices.push_back(i);
    detail::canonicalize(part);
    return part;
}

/// One DBSCAN partition per eps, duplicates removed, first-occurrence order.
[[nodiscard]] inline std::vector<Partition> generate_partitions(std::span<const Vec2> points,
                                                                std::span<const double> eps_grid) {
    if (points.empty()) return {Partition{}};
    std::vector<Partition> out;
    for (double eps : eps_grid) {
        Partition p = dbscan(points, eps, 1);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
    return out;
}

/// Log-spaced eps values between lo and hi inclusive.
[[nodiscard]] inline std::vector<double> log_spaced_grid(double lo, double hi, int count) {
    std::vector<double> grid;
    if (count <= 1 || hi <= lo) return {lo};
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) grid.push_back(lo * std::exp(step * i));
    return grid;
}

}  // namespace ggiwt
