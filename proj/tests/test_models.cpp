#include <gtest/gtest.h>

#include "ggiwt/models.hpp"
#include "oracles.hpp"

#include <numbers>
#include <random>

using namespace ggiwt;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

MotionConfig motion(double ts) {
    MotionConfig m;
    m.Ts = ts;
    return m;
}

Vec5 state(double x, double y, double v, double phi, double w) {
    Vec5 s;
    s << x, y, v, phi, w;
    return s;
}

}  // namespace

TEST(PredictKinematics, Examples) {
    EXPECT_LT((predict_kinematics(state(0, 0, 1, 0, 0), motion(1.0)) - state(1, 0, 1, 0, 0)).norm(), 1e-15);
    EXPECT_LT((predict_kinematics(state(0, 0, 0, kPi / 3, 0.1), motion(1.0)) - state(0, 0, 0, kPi / 3 + 0.1, 0.1))
                  .norm(),
              1e-15);
    EXPECT_LT((predict_kinematics(state(2, 3, 2, kPi / 2, 0), motion(0.5)) - state(2, 4, 2, kPi / 2, 0)).norm(),
              1e-15);
}

TEST(PredictKinematics, StraightMotionKeepsHeadingAndSpeed) {
    const Vec5 s = state(10, -4, 3.3, 0.7, 0.0);
    const Vec5 p = predict_kinematics(s, motion(1.3));
    EXPECT_EQ(p(kSpeed), s(kSpeed));
    EXPECT_EQ(p(kHeading), s(kHeading));
}

TEST(KinematicsJacobian, MatchesCentralDifferences) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> pos(-300.0, 300.0), spd(0.0, 20.0), ang(-kPi, kPi), yaw(-0.2, 0.2),
        ts(0.1, 2.0);
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const Vec5 x = state(pos(rng), pos(rng), spd(rng), ang(rng), yaw(rng));
        const MotionConfig m = motion(ts(rng));
        const Mat5 f = kinematics_jacobian(x, m);
        for (int j = 0; j < 5; ++j) {
            Vec5 xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            const Vec5 col = (predict_kinematics(xp, m) - predict_kinematics(xm, m)) / (2.0 * h);
            EXPECT_LT((col - f.col(j)).cwiseAbs().maxCoeff(), 1e-6) << "state " << i << " column " << j;
        }
    }
}

TEST(KinematicsJacobian, SpecialEntries) {
    const Mat5 f0 = kinematics_jacobian(state(1, 2, 0.0, 0.4, 0.0), motion(1.0));
    EXPECT_EQ(f0(kPx, kHeading), 0.0);
    EXPECT_EQ(f0(kPy, kHeading), 0.0);
    const Mat5 f1 = kinematics_jacobian(state(1, 2, 3.0, 0.0, 0.0), motion(1.0));
    EXPECT_EQ(f1(0, 2), 1.0);
    EXPECT_EQ(f1(1, 2), 0.0);
}

TEST(ProcessNoise, Examples) {
    MotionConfig m = motion(1.0);
    m.sigma_v = 0.2;
    m.sigma_omega = 0.2 * kDeg;
    const Mat5 q = process_noise(m);
    EXPECT_NEAR(q(2, 2), 0.04, 1e-15);
    Eigen::FullPivLU<Mat5> lu(q);
    EXPECT_EQ(lu.rank(), 2);

    MotionConfig m2 = motion(2.0);
    m2.sigma_v = 1.0;
    m2.sigma_omega = 1.0;
    const Mat5 q2 = process_noise(m2);
    EXPECT_DOUBLE_EQ(q2(2, 2), 4.0);
    EXPECT_DOUBLE_EQ(q2(4, 4), 4.0);
}

TEST(RotateExtent, QuarterTurnSwapsAxes) {
    const Mat2 r = rotate_extent(Vec2(4.0, 1.0).asDiagonal(), kPi / 2, 1.0);
    EXPECT_LT((r - Mat2(Vec2(1.0, 4.0).asDiagonal())).norm(), 1e-14);
}

TEST(RotateExtent, IsotropicInvariantAndSimilarity) {
    EXPECT_LT((rotate_extent(Mat2::Identity(), 0.37, 2.0) - Mat2::Identity()).norm(), 1e-15);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const Mat2 x = test::random_spd(rng);
        const Mat2 r = rotate_extent(x, 0.1 * i, 0.7);
        EXPECT_NEAR(r.trace(), x.trace(), 1e-12);
        EXPECT_NEAR(r.determinant(), x.determinant(), 1e-10);
    }
}

TEST(PredictExtent, PreservesRotatedMean) {
    std::mt19937_64 rng(4);
    MotionConfig m = motion(1.0);
    m.tau_ext = 5.0;
    for (int i = 0; i < 20; ++i) {
        const InverseWishartParams iw{8.0 + i, 10.0 * test::random_spd(rng)};
        const Vec5 x = state(0, 0, 5, 0.2, 0.03 * i);
        const InverseWishartParams p = predict_extent(iw, x, m);
        EXPECT_LT((iw_mean(p) - rotate_extent(iw_mean(iw), x(kYawRate), m.Ts)).norm(), 1e-12 * iw_mean(iw).norm());
        EXPECT_LT(p.dof, iw.dof);
        EXPECT_GT(p.dof, InverseWishartParams::kMinDof);
    }
}

TEST(PredictExtent, HalvingDecay) {
    MotionConfig m = motion(1.0);
    m.tau_ext = m.Ts / std::log(2.0);
    const InverseWishartParams p = predict_extent({26.0, 20.0 * Mat2::Identity()}, state(0, 0, 1, 0, 0), m);
    EXPECT_NEAR(p.dof, 16.0, 1e-12);
    EXPECT_LT((p.scale - 10.0 * Mat2::Identity()).norm(), 1e-12);
}

TEST(PredictExtent, RejectsSmallDof) {
    EXPECT_THROW((void)predict_extent({6.0, Mat2::Identity()}, state(0, 0, 1, 0, 0), motion(1.0)), DofTooSmall);
}

TEST(TauExt, MatchesWishartRetention) {
    // one-step retained excess dof equals n_e / (n_e + excess)
    const double tau = tau_ext_from_ne(120.0, 20.0, 1.0);
    EXPECT_NEAR(std::exp(-1.0 / tau), 120.0 / 134.0, 1e-15);
}

TEST(PredictRate, Examples) {
    MotionConfig m = motion(1.0);
    m.eta = 2.0;
    const GammaParams g = predict_rate({4.0, 2.0}, m);
    EXPECT_DOUBLE_EQ(g.alpha, 2.0);
    EXPECT_DOUBLE_EQ(g.beta, 1.0);
    EXPECT_DOUBLE_EQ(gamma_mean(g), 2.0);
    EXPECT_DOUBLE_EQ(gamma_variance(g), 2.0);

    m.eta = 1.0 + 1e-9;
    const GammaParams h = predict_rate({10.0, 1.0}, m);
    EXPECT_NEAR(h.alpha, 10.0, 1e-7);
    EXPECT_NEAR(h.beta, 1.0, 1e-8);
}

TEST(PredictRate, VarianceScalesByEta) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> a(0.5, 50.0), b(0.1, 5.0), e(1.01, 5.0);
    for (int i = 0; i < 10; ++i) {
        MotionConfig m = motion(1.0);
        m.eta = e(rng);
        const GammaParams g{a(rng), b(rng)};
        const GammaParams p = predict_rate(g, m);
        EXPECT_NEAR(gamma_mean(p), gamma_mean(g), 1e-12 * gamma_mean(g));
        EXPECT_NEAR(gamma_variance(p) / gamma_variance(g), m.eta, 1e-12 * m.eta);
    }
}

TEST(PolarToCartesian, Examples) {
    EXPECT_LT((polar_to_cartesian(1.0, 0.0) - Vec2(1.0, 0.0)).norm(), 1e-15);
    EXPECT_LT((polar_to_cartesian(2.0, kPi / 2) - Vec2(0.0, 2.0)).norm(), 1e-15);
    EXPECT_LT(polar_to_cartesian(0.0, 1.234).norm(), 1e-15);
}

TEST(ConvertedNoise, TableValues) {
    MeasModel mm;
    mm.sigma_r = 1.0;
    mm.sigma_phi = 0.01 * kDeg;
    const Mat2 r = converted_noise_cov(Vec2(1.0, 0.0), mm);
    EXPECT_NEAR(r(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(r(1, 1), mm.sigma_phi * mm.sigma_phi, 1e-20);
    EXPECT_NEAR(r(0, 1), 0.0, 1e-20);
}

TEST(ConvertedNoise, DeterminantAndDefiniteness) {
    MeasModel mm;
    mm.sigma_r = 0.7;
    mm.sigma_phi = 0.02;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-300.0, 300.0);
    for (int i = 0; i < 20; ++i) {
        const Vec2 p(u(rng), u(rng));
        const Mat2 r = converted_noise_cov(p, mm);
        const double expected = p.squaredNorm() * mm.sigma_r * mm.sigma_r * mm.sigma_phi * mm.sigma_phi;
        EXPECT_NEAR(r.determinant(), expected, 1e-9 * expected);
        EXPECT_EQ(r(0, 1), r(1, 0));
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat2>(r).eigenvalues().minCoeff(), 0.0);
    }
}

TEST(ConvertedNoise, OriginIsAnError) {
    EXPECT_THROW((void)converted_noise_cov(Vec2::Zero(), MeasModel{}), DegeneratePosition);
}
