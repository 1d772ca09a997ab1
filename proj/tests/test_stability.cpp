#include <gtest/gtest.h>

#include <random>

#include "srlab/meanfield.hpp"
#include "srlab/stability.hpp"

using namespace srlab;

namespace {

const double kR2 = std::sqrt(2.0);

FixedPoint find_branch(const std::vector<FixedPoint>& fps, Branch b) {
    for (const auto& fp : fps)
        if (fp.branch == b) return fp;
    ADD_FAILURE() << "branch " << to_string(b) << " missing";
    return {};
}

} // namespace

TEST(Jacobian, NormalPhaseEntries) {
    const auto p = ModelParams::equal_detuning(5.0, 4.5, 0.2, 0.5);
    const Mat5 a = jacobian(SemiclassicalState::ground(), p).matrix;
    EXPECT_DOUBLE_EQ(a(2, 1), kR2 * 4.5 / 2.0);
    EXPECT_DOUBLE_EQ(a(3, 0), kR2 * 4.5 / 2.0);
    EXPECT_EQ(a(2, 4), 0.0);
    EXPECT_EQ(a(3, 4), 0.0);
    EXPECT_EQ(a.row(4).cwiseAbs().maxCoeff(), 0.0);
    // field rows are independent of the fixed point
    EXPECT_DOUBLE_EQ(a(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(a(0, 1), 5.0 - 0.4);
    EXPECT_DOUBLE_EQ(a(0, 3), -kR2 * 4.5);
    EXPECT_DOUBLE_EQ(a(1, 0), -5.0 - 0.4);
    EXPECT_DOUBLE_EQ(a(1, 2), -kR2 * 4.5);
}

TEST(Jacobian, MatchesCentralDifferencesInQuadratureVariables) {
    const auto p = ModelParams::equal_detuning(5.0, 4.5, 0.6, 0.5);
    const auto sp = find_branch(fixed_points(p), Branch::SpPlusPos).state;
    // f = (Q, P, X, Y, Z) with Q = sqrt2 alpha_re, P = sqrt2 alpha_im
    auto rhs_q = [&](const Vec5& f) {
        const SemiclassicalState s{f(0) / kR2, f(1) / kR2, f(2), f(3), f(4)};
        Vec5 d = semiclassical_rhs(s, p);
        d(0) *= kR2;
        d(1) *= kR2;
        return d;
    };
    Vec5 f0;
    f0 << kR2 * sp.alpha_re, kR2 * sp.alpha_im, sp.x, sp.y, sp.z;
    const double h = 1e-5;
    Mat5 fd;
    for (int j = 0; j < 5; ++j) {
        Vec5 a = f0, b = f0;
        a(j) += h;
        b(j) -= h;
        fd.col(j) = (rhs_q(a) - rhs_q(b)) / (2 * h);
    }
    EXPECT_LT((fd - jacobian(sp, p).matrix).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Jacobian, ZeroCouplingIsBlockDiagonal) {
    auto p = ModelParams::equal_detuning(5.0, 0.0, 0.3, 0.5);
    const Mat5 a = jacobian({0.2, 0.1, 0.3, -0.2, 0.1}, p).matrix;
    EXPECT_EQ((a.block<2, 3>(0, 2).cwiseAbs().maxCoeff()), 0.0);
    EXPECT_EQ((a.block<3, 2>(2, 0).cwiseAbs().maxCoeff()), 0.0);
    Eigen::Matrix2d field;
    field << -0.5, 5.0 - 0.6, -5.0 - 0.6, -0.5;
    EXPECT_EQ((a.block<2, 2>(0, 0) - field).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssessStability, NormalPhaseBelowAndAboveThreshold) {
    const auto below = ModelParams::equal_detuning(5.0, 4.5, 0.2, 0.5);
    const auto above = ModelParams::equal_detuning(5.0, 4.5, 0.7, 0.5);
    const auto g = SemiclassicalState::ground();
    EXPECT_TRUE(assess_stability(jacobian(g, below), g).stable);
    EXPECT_FALSE(assess_stability(jacobian(g, above), g).stable);
}

TEST(AssessStability, SuperradiantPlusBranchStable) {
    const auto p = ModelParams::equal_detuning(5.0, 4.5, 0.7, 0.5);
    const auto sp = find_branch(fixed_points(p), Branch::SpPlusPos).state;
    const auto v = assess_stability(jacobian(sp, p), sp);
    EXPECT_TRUE(v.stable);
    EXPECT_EQ(v.deflated_modes, 1);
}

TEST(AssessStability, NormalPhaseSpectrumContainsDecoupledZeroMode) {
    const auto p = ModelParams::equal_detuning(5.0, 4.5, 0.2, 0.5);
    const auto g = SemiclassicalState::ground();
    const auto a = jacobian(g, p);
    const auto full = assess_stability(a);
    EXPECT_TRUE(full.marginal); // the raw 5x5 verdict sees the zero mode
    Eigen::EigenSolver<Eigen::Matrix4d> es(a.matrix.topLeftCorner<4, 4>(), false);
    double block_max = -1e300;
    for (int i = 0; i < 4; ++i) block_max = std::max(block_max, es.eigenvalues()(i).real());
    const auto reduced = assess_stability(a, g);
    EXPECT_NEAR(reduced.max_real_part, block_max, 1e-12);
}

TEST(AssessStability, ConservedSpinLengthGivesZeroEigenvalueAtEveryFixedPoint) {
    const auto p = ModelParams::equal_detuning(5.0, 7.0, 0.6, 0.5);
    for (const auto& fp : fixed_points(p)) {
        double min_abs = 1e300;
        for (const auto& e : fp.spectrum) min_abs = std::min(min_abs, std::abs(e));
        EXPECT_LT(min_abs, 1e-9) << to_string(fp.branch);
    }
}

TEST(AssessStability, TraceIdentity) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto p = ModelParams::equal_detuning(1.0 + 8.0 * u(rng), 2.0 + 7.0 * u(rng), 1.5 * u(rng), 1.0 * u(rng));
        for (const auto& fp : fixed_points(p)) {
            const auto a = jacobian(fp.state, p);
            EXPECT_NEAR(a.matrix.trace(), -2.0 * p.kappa, 1e-12);
            double sum = 0.0;
            for (const auto& e : fp.spectrum) sum += e.real();
            EXPECT_NEAR(sum, -2.0 * p.kappa, 1e-9);
        }
    }
}

TEST(AssessStability, Z2PartnersHaveEqualSpectra) {
    const auto p = ModelParams::equal_detuning(5.0, 7.0, 0.6, 0.5);
    const auto fps = fixed_points(p);
    for (auto [a, b] : {std::pair{Branch::SpPlusPos, Branch::SpPlusNeg}, {Branch::SpMinusPos, Branch::SpMinusNeg}}) {
        const auto fa = find_branch(fps, a), fb = find_branch(fps, b);
        for (int i = 0; i < 5; ++i) EXPECT_LT(std::abs(fa.spectrum[i] - fb.spectrum[i]), 1e-10);
        // similarity by flipping the sign of dZ
        Vec5 t;
        t << 1, 1, 1, 1, -1;
        const Mat5 ja = jacobian(fa.state, p).matrix, jb = jacobian(fb.state, p).matrix;
        EXPECT_LT((t.asDiagonal() * ja * t.asDiagonal() - jb).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(AssessStability, NonFiniteInputRaisesEigenFailure) {
    DriftMatrix a;
    a.matrix(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(assess_stability(a), EigenFailure);
}

TEST(AssessStability, MarginalThresholdIsRelative) {
    DriftMatrix a;
    a.matrix = -Mat5::Identity();
    a.matrix(0, 0) = -1e-12;
    const auto v = assess_stability(a);
    EXPECT_TRUE(v.marginal);
    EXPECT_FALSE(v.stable);
}
