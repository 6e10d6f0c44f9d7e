#pragma once

#include "ggiwt/models.hpp"
#include "ggiwt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace ggiwt {

struct ScenarioConfig {
    int id = 1;
    double x_min = 50.0, x_max = 450.0;
    double y_min = -200.0, y_max = 200.0;
    /// Scans 0..num_scans-1.
    int num_scans = 61;
    double clutter_rate = 100.0;
    /// True expected measurements per object and scan.
    double object_rate = 10.0;
    double semi_major = 4.0;
    double semi_minor = 2.0;
    double speed = 5.0;

    [[nodiscard]] double area() const { return (x_max - x_min) * (y_max - y_min); }
};

struct GroundTruthObject {
    int birth = 0;
    int death = 0;  // last scan the object exists
    std::vector<KinematicState> states;
    std::vector<Mat2> extents;
    double rate = 10.0;

    [[nodiscard]] bool alive_at(int k) const { return k >= birth && k <= death; }
    [[nodiscard]] const KinematicState& state_at(int k) const { return states[static_cast<std::size_t>(k - birth)]; }
    [[nodiscard]] const Mat2& extent_at(int k) const { return extents[static_cast<std::size_t>(k - birth)]; }

    /// The object's trajectory restricted to scans up to k.
    [[nodiscard]] EstimatedTrajectory trajectory_until(int k) const {
        EstimatedTrajectory t;
        t.birth_time = birth;
        t.rate = rate;
        for (int s = birth; s <= std::min(k, death); ++s) {
            t.states.push_back(state_at(s));
            t.extents.push_back(extent_at(s));
        }
        t.alive = alive_at(k);
        return t;
    }
};

/// Extent ellipse with its major axis along the heading.
[[nodiscard]] inline Mat2 aligned_extent(double heading, double semi_major, double semi_minor) {
    const Mat2 r = linalg::rotation(heading);
    const Vec2 d(semi_major * semi_major, semi_minor * semi_minor);
    Mat2 x = r * d.asDiagonal() * r.transpose();
    linalg::symmetrize(x);
    return x;
}

namespace detail {

/// Straight motion, then a constant-rate turn from turn_start until the
/// heading magnitude reaches max_heading, then straight again. Yaw rates are
/// stored so the noiseless motion model reproduces the positions exactly.
inline GroundTruthObject make_turning_object(const ScenarioConfig& cfg, const MotionConfig& motion, Vec2 start,
                                             int turn_start, double turn_rate, double max_heading) {
    const int n = cfg.num_scans;
    std::vector<double> heading(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) {
        double h = heading[static_cast<std::size_t>(k - 1)];
        if (k - 1 >= turn_start) h += turn_rate * motion.Ts;
        if (std::abs(h) > max_heading) h = std::copysign(max_heading, h);
        heading[static_cast<std::size_t>(k)] = h;
    }
    GroundTruthObject obj;
    obj.birth = 0;
    obj.death = n - 1;
    obj.rate = cfg.object_rate;
    KinematicState x;
    x << start.x(), start.y(), cfg.speed, 0.0, 0.0;
    for (int k = 0; k < n; ++k) {
        x(kHeading) = heading[static_cast<std::size_t>(k)];
        x(kYawRate) = k + 1 < n ? (heading[static_cast<std::size_t>(k + 1)] - heading[static_cast<std::size_t>(k)]) / motion.Ts : 0.0;
        obj.states.push_back(x);
        obj.extents.push_back(aligned_extent(x(kHeading), cfg.semi_major, cfg.semi_minor));
        x = predict_kinematics(x, motion);
    }
    return obj;
}

}  // namespace detail

/// Scenario 1: two objects 40 m apart on parallel eastbound tracks turn
/// toward each other at k = 15 and cross near k = 35.
/// Scenario 2: two objects 6 m apart on parallel tracks diverge from k = 20.
/// Both objects live for every scan.
[[nodiscard]] inline std::vector<GroundTruthObject> generate_scenario(const ScenarioConfig& cfg,
                                                                      const MotionConfig& motion) {
    constexpr double deg = std::numbers::pi / 180.0;
    switch (cfg.id) {
        case 1:
            return {detail::make_turning_object(cfg, motion, {100.0, 20.0}, 15, -2.0 * deg, 15.0 * deg),
                    detail::make_turning_object(cfg, motion, {100.0, -20.0}, 15, 2.0 * deg, 15.0 * deg)};
        case 2:
            return {detail::make_turning_object(cfg, motion, {100.0, 3.0}, 19, 2.0 * deg, 20.0 * deg),
                    detail::make_turning_object(cfg, motion, {100.0, -3.0}, 19, -2.0 * deg, 20.0 * deg)};
        default:
            throw UnknownScenario("unknown scenario " + std::to_string(cfg.id));
    }
}

/// Object detections N(position, rho X + R(position)) with Poisson counts,
/// plus Poisson clutter uniform over the area, shuffled together.
template <typename Rng>
[[nodiscard]] std::vector<Vec2> generate_scan(const std::vector<GroundTruthObject>& truth, int k,
                                              const ScenarioConfig& cfg, const MeasModel& mm, Rng& rng) {
    std::vector<Vec2> scan;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& obj : truth) {
        if (!obj.alive_at(k)) continue;
        std::poisson_distribution<int> count(obj.rate);
        const int m = obj.rate > 0.0 ? count(rng) : 0;
        const Vec2 pos = obj.state_at(k).head<2>();
        const Mat2 cov = mm.rho * obj.extent_at(k) + converted_noise_cov(pos, mm);
        const Mat2 l = cov.llt().matrixL();
        for (int i = 0; i < m; ++i) {
            const double a = normal(rng);
            const double b = normal(rng);
            scan.push_back(pos + l * Vec2(a, b));
        }
    }
    if (cfg.clutter_rate > 0.0) {
        std::poisson_distribution<int> clutter(cfg.clutter_rate);
        std::uniform_real_distribution<double> ux(cfg.x_min, cfg.x_max);
        std::uniform_real_distribution<double> uy(cfg.y_min, cfg.y_max);
        const int c = clutter(rng);
        for (int i = 0; i < c; ++i) {
            const double x = ux(rng);
            const double y = uy(rng);
            scan.emplace_back(x, y);
        }
    }
    std::shuffle(scan.begin(), scan.end(), rng);
    return scan;
}

}  // namespace ggiwt
