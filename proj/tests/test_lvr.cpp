#include "ammfee/lvr.hpp"

#include "martingale.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ammfee;
using ammfee::fixtures::logGrid;
using ammfee::fixtures::relErr;
using ammfee::fixtures::sampleCurves;

TEST(EffectiveVariance, Examples) {
    EXPECT_DOUBLE_EQ(effectiveVariance({0.0, 0.2, 0.0, 0.0}), 0.04);
    EXPECT_DOUBLE_EQ(effectiveVariance({0.0, 2.0, 1.0, 1.0}), 1.0);
    EXPECT_DOUBLE_EQ(effectiveVariance({0.0, 2.0, 1.0, -1.0}), 9.0);
}

TEST(GbmParams, Validation) {
    EXPECT_THROW((GbmParams{0.0, 1.0, 1.0, 1.5}.validate()), Error);
    EXPECT_THROW((GbmParams{-0.1, 1.0, 1.0, 0.0}.validate()), Error);
    EXPECT_THROW((GbmParams{0.0, -1.0, 1.0, 0.0}.validate()), Error);
    EXPECT_NO_THROW((GbmParams{0.05, 1.0, 0.5, -1.0}.validate()));
}

TEST(InstantaneousLvr, CpmmExamples) {
    const AmmCurve c = AmmCurve::cpmm(1.0);
    EXPECT_DOUBLE_EQ(instantaneousLvr(c, 1.0, {0.0, 1.0, 0.0, 0.0}), 0.25);
    EXPECT_DOUBLE_EQ(instantaneousLvr(c, 4.0, {0.0, 1.0, 0.0, 0.0}), 0.5);
}

TEST(InstantaneousLvr, PerfectlyCorrelatedEqualVolsVanish) {
    for (const auto& nc : sampleCurves()) {
        EXPECT_EQ(instantaneousLvr(nc.curve, std::sqrt(nc.lo * nc.hi), {0.0, 0.7, 0.7, 1.0}), 0.0) << nc.name;
    }
}

TEST(InstantaneousLvr, BothFormsAgreeAndScaleWithEquivalentLiquidity) {
    const GbmParams p{0.0, 0.8, 0.3, 0.5};
    for (const auto& nc : sampleCurves()) {
        for (double q : logGrid(nc.lo, nc.hi, 100)) {
            const double l = instantaneousLvr(nc.curve, q, p);
            EXPECT_GE(l, 0.0);
            EXPECT_LT(relErr(l, instantaneousLvrFromY(nc.curve, q, p)), 1e-8) << nc.name << " q=" << q;
            const double cpmmUnit = effectiveVariance(p) / 4.0 * std::sqrt(q);
            EXPECT_LT(relErr(l, equivalentCpmmLiquidity(nc.curve, q) * cpmmUnit), 1e-8) << nc.name << " q=" << q;
        }
    }
}

TEST(ImpliedFeeRate, Examples) {
    const AmmCurve c = AmmCurve::cpmm(1.0);
    const GbmParams p{0.0, 1.0, 0.0, 0.0};
    EXPECT_DOUBLE_EQ(impliedFeeRateDollars(c, 3.0, 1.0, p), instantaneousLvr(c, 3.0, p));
    EXPECT_DOUBLE_EQ(impliedFeeRateDollars(c, 1.0, 4.0, p), 0.5);
    EXPECT_THROW(impliedFeeRateDollars(c, 1.0, -1.0, p), Error);
}

TEST(ImpliedFeeRate, NumeraireSymmetryForCpmm) {
    const AmmCurve c = AmmCurve::cpmm(1.0);
    const GbmParams p{0.0, 0.6, 0.4, 0.2};
    EXPECT_NEAR(impliedFeeRateDollars(c, 2.0, 3.0, p), impliedFeeRateDollars(c, 3.0, 2.0, p), 1e-15);
}

TEST(CpmmUnitLvrWithRate, Examples) {
    EXPECT_DOUBLE_EQ(cpmmUnitLvrWithRate(1.0, 0.0, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(cpmmUnitLvrWithRate(4.0, 0.05, 0.0), 0.1);
    EXPECT_DOUBLE_EQ(cpmmUnitLvrWithRate(1.0, 0.05, 1.0), 0.3);
}

TEST(ConcentratedLvrWithRate, Examples) {
    EXPECT_DOUBLE_EQ(concentratedLvrWithRate(2.0, 0.0, 1.0, 3.0, 1.0, 4.0), 3.0 * 0.25 * std::sqrt(2.0));
    EXPECT_EQ(concentratedLvrWithRate(0.5, 0.05, 1.0, 1.0, 1.0, 4.0), 0.0);
    EXPECT_DOUBLE_EQ(concentratedLvrWithRate(1.0, 0.05, 1.0, 1.0, 1.0, 4.0), 0.25);
    EXPECT_THROW(concentratedLvrWithRate(1.0, 0.0, 1.0, 1.0, 4.0, 1.0), Error);
}

TEST(ConcentratedLvrWithRate, StrictlyBelowCpmmEquivalentWhenRatePositive) {
    for (double q : logGrid(1.01, 3.99, 20)) {
        EXPECT_LT(concentratedLvrWithRate(q, 0.05, 0.8, 2.0, 1.0, 4.0), 2.0 * cpmmUnitLvrWithRate(q, 0.05, 0.8));
    }
}

TEST(LiteralStablecoinLvr, MatchesClosedFormsForCpmmAndConcentrated) {
    for (double q : {0.5, 1.0, 2.5}) {
        EXPECT_NEAR(literalStablecoinLvr(AmmCurve::cpmm(1.0), q, 0.05, 0.7), cpmmUnitLvrWithRate(q, 0.05, 0.7), 1e-14);
        EXPECT_NEAR(literalStablecoinLvr(AmmCurve::concentrated(2.0, 0.25, 4.0), q, 0.05, 0.7),
                    concentratedLvrWithRate(q, 0.05, 0.7, 2.0, 0.25, 4.0), 1e-14);
    }
}

TEST(RealizedLvrIncrement, Examples) {
    const AmmCurve c = AmmCurve::cpmm(1.0);
    const Holdings h = evalHoldings(c, 1.0);
    EXPECT_EQ(realizedLvrIncrement(h, 1.0, 1.0, 1.0, 1.0, c), 0.0);
    EXPECT_NEAR(realizedLvrIncrement(h, 1.0, 1.21, 1.0, 1.0, c), 0.01, 1e-14);
    EXPECT_NEAR(realizedLvrIncrement(h, 1.0, 0.81, 1.0, 1.0, c), 0.01, 1e-14);
}

TEST(RealizedLvrIncrement, NonnegativeForAnyMove) {
    for (const auto& nc : sampleCurves()) {
        const auto grid = logGrid(nc.lo, nc.hi, 25);
        for (double a : grid) {
            const Holdings h = evalHoldings(nc.curve, a);
            for (double b : grid) {
                for (double py : {0.5, 1.0, 2.0}) {
                    // both legs priced in dollars with py moving as well
                    const double inc = realizedLvrIncrement(h, a * py, b * 1.5, py, 1.5, nc.curve);
                    EXPECT_GE(inc, -1e-12 * poolValue(nc.curve, b)) << nc.name;
                }
            }
        }
    }
}

TEST(RealizedLvrIncrement, SumConvergesToIntegratedRate) {
    // Deterministic exponential path q(t) = e^{t}; the rebalancing gap per
    // step is ~ 1/2 |x'| q^2 (dq/q)^2, i.e. LVR with sigma^2 dt replaced by (dlog q)^2.
    const AmmCurve c = AmmCurve::cpmm(1.0);
    auto gap = [&](int steps) {
        const double dt = 1.0 / steps;
        const double move = 0.2 * std::sqrt(dt);  // Brownian-like scaling
        double realized = 0.0, integral = 0.0;
        double q = 1.0;
        for (int k = 0; k < steps; ++k) {
            const double next = q * std::exp(k % 2 == 0 ? move : -move);
            realized += realizedLvrIncrement(evalHoldings(c, q), q, next, 1.0, 1.0, c);
            integral += instantaneousLvr(c, q, {0.0, 0.2, 0.0, 0.0}) * dt;
            q = next;
        }
        return std::abs(realized - integral);
    };
    const double coarse = gap(200);
    const double fine = gap(400);
    EXPECT_LT(fine, 0.7 * coarse);
    EXPECT_GT(fine, 0.3 * coarse);
}

TEST(Martingale, DiscountedFeesPlusPoolValueSmallRun) {
    const GbmParams p{0.03, 0.8, 0.3, 0.5};
    for (const auto& nc : {fixtures::NamedCurve{"cpmm", AmmCurve::cpmm(1.0), 0, 0},
                           fixtures::NamedCurve{"concentrated", AmmCurve::concentrated(1.0, 0.5, 2.0), 0, 0},
                           fixtures::NamedCurve{"stableswap", AmmCurve::stableSwap(100.0, 2.0, 1.0), 0, 0}}) {
        const auto r = fixtures::martingaleCheck(nc.curve, p, 1.0, 1.0, 0.25, 200, 2000, 7);
        EXPECT_LT(std::abs(r.zScore()), 3.0) << nc.name << " mean=" << r.mean << " se=" << r.stdError;
    }
}
