#pragma once

#include "ggiwt/config.hpp"
#include "ggiwt/ggiw_phd.hpp"
#include "ggiwt/ggiwt_phd.hpp"

#include <random>
#include <vector>

namespace ggiwt::test {

inline GGIWParams make_ggiw(double x, double y, double speed = 5.0, double heading = 0.0, double yaw = 0.0,
                            double dof = 20.0, const Mat2& ext_mean = 9.0 * Mat2::Identity(),
                            GammaParams rate = {20.0, 2.0}, double pos_var = 2.0) {
    GGIWParams g;
    g.rate = rate;
    g.kin.mean << x, y, speed, heading, yaw;
    Vec5 var;
    var << pos_var, pos_var, 1.0, 0.01, 1e-4;
    g.kin.cov = var.asDiagonal();
    g.ext.dof = dof;
    g.ext.scale = (dof - InverseWishartParams::kMinDof) * ext_mean;
    return g;
}

/// n draws from N(center, rho X + R(center)).
inline std::vector<Vec2> sample_object(const Vec2& center, const Mat2& extent, int n, const MeasModel& mm,
                                       std::mt19937_64& rng) {
    const Mat2 l = Mat2(mm.rho * extent + converted_noise_cov(center, mm)).llt().matrixL();
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<Vec2> out;
    for (int i = 0; i < n; ++i) out.push_back(center + l * Vec2(z(rng), z(rng)));
    return out;
}

inline std::vector<Vec2> sample_clutter(int n, std::mt19937_64& rng, double x0 = 50.0, double x1 = 450.0,
                                        double y0 = -200.0, double y1 = 200.0) {
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    std::vector<Vec2> out;
    for (int i = 0; i < n; ++i) {
        const double x = ux(rng);
        out.emplace_back(x, uy(rng));
    }
    return out;
}

inline Partition one_cell_per_group(const std::vector<std::size_t>& sizes) {
    Partition p;
    std::size_t next = 0;
    for (std::size_t s : sizes) {
        Cell c;
        for (std::size_t i = 0; i < s; ++i) c.indices.push_back(next++);
        p.cells.push_back(std::move(c));
    }
    return p;
}

inline Partition singletons(std::size_t n) {
    Partition p;
    for (std::size_t i = 0; i < n; ++i) p.cells.push_back(Cell{{i}});
    return p;
}

}  // namespace ggiwt::test
