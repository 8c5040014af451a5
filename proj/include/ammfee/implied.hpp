// Fixed-for-floating fee swap pricing and its inversion to implied volatility
// and implied correlation.
//
// The floating leg of a swap on liquidity tokens over [0, T] is worth
//     Cbar(q0) - E[Cbar(q0 pZ(sigma))],   pZ(sigma) = exp(-sigma^2 T / 2 + sigma sqrt(T) Z),
// per unit of the numeraire asset. Expectations are exact for the CPMM and
// Monte Carlo otherwise.
#pragma once

#include "ammfee/amm_curve.hpp"
#include "ammfee/errors.hpp"
#include "ammfee/market_sim.hpp"
#include "ammfee/parallel.hpp"
#include "ammfee/random.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ammfee {

struct SwapSpec {
    AmmCurve curve;
    double maturityT = 1.0;
    double p0x = 1.0;
    double p0y = 1.0;
    double r = 0.0;
    double liquidityTokens = 1.0;

    void validate() const {
        if (!isPositiveFinite(maturityT)) fail(ErrorCode::InvalidArgument, "maturity T must be positive");
        if (!isPositiveFinite(p0x) || !isPositiveFinite(p0y)) {
            fail(ErrorCode::InvalidArgument, "initial prices must be positive");
        }
        if (!(r >= 0.0)) fail(ErrorCode::InvalidArgument, "rate must be nonnegative");
        if (!(liquidityTokens >= 0.0) || !std::isfinite(liquidityTokens)) {
            fail(ErrorCode::InvalidArgument, "liquidityTokens must be nonnegative");
        }
    }

    double priceRatio() const { return p0x / p0y; }

    /// Dollar value of the escrowed position at inception.
    double positionValue() const { return liquidityTokens * p0y * poolValue(curve, priceRatio()); }
};

struct McConfig {
    std::size_t numPaths = 100000;
    std::uint64_t seed = 42;
    bool antithetic = true;
    /// Regress out Z^2 - 1, whose mean is known to be zero.
    bool controlVariate = true;
    /// Sample even where a closed form exists (used to cross-check the sampler).
    bool forceMonteCarlo = false;
    unsigned workers = 0;

    void validate() const {
        if (numPaths < 2) fail(ErrorCode::InvalidArgument, "numPaths must be at least 2");
    }
};

struct Estimate {
    double value = 0.0;
    double stdError = 0.0;
};

/// Monte Carlo estimate of E[Cbar(p0 pZ(sigma))], always sampled.
inline Estimate monteCarloKernelExpectation(const AmmCurve& curve, double p0, double sigma, double T,
                                            const McConfig& mc) {
    mc.validate();
    if (!(sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma must be nonnegative");
    if (!isPositiveFinite(p0) || !isPositiveFinite(T)) fail(ErrorCode::InvalidArgument, "p0 and T must be positive");
    const double base = poolValue(curve, p0);
    if (sigma == 0.0) return {base, 0.0};

    const std::size_t n = mc.antithetic ? mc.numPaths / 2 : mc.numPaths;
    const double drift = -0.5 * sigma * sigma * T;
    const double diffusion = sigma * std::sqrt(T);
    const NormalStream normals(mc.seed);
    std::vector<double> d(n);
    std::vector<double> h(n);
    parallelFor(
        n,
        [&](std::size_t i) {
            const double z = normals(i);
            double f = poolValueExtended(curve, p0 * std::exp(drift + diffusion * z));
            if (mc.antithetic) f = 0.5 * (f + poolValueExtended(curve, p0 * std::exp(drift - diffusion * z)));
            d[i] = f - base;
            h[i] = z * z - 1.0;
        },
        mc.workers);

    const double count = static_cast<double>(n);
    double meanD = 0.0, meanH = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        meanD += d[i];
        meanH += h[i];
    }
    meanD /= count;
    meanH /= count;
    double beta = 0.0;
    if (mc.controlVariate && n > 2) {
        double shh = 0.0, sdh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            shh += (h[i] - meanH) * (h[i] - meanH);
            sdh += (d[i] - meanD) * (h[i] - meanH);
        }
        if (shh > 0.0) beta = sdh / shh;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = d[i] - meanD - beta * (h[i] - meanH);
        ss += e * e;
    }
    const double dof = count - (beta != 0.0 ? 2.0 : 1.0);
    const double stdError = dof > 0.0 ? std::sqrt(ss / dof / count) : 0.0;
    return {base + meanD - beta * meanH, stdError};
}

/// E[Cbar(p0 pZ(sigma))]: exact 2L sqrt(p0) exp(-sigma^2 T / 8) for the CPMM,
/// Monte Carlo for every other curve.
inline Estimate lognormalKernelExpectation(const AmmCurve& curve, double p0, double sigma, double T,
                                           const McConfig& mc) {
    if (const auto* cp = curve.asCpmm(); cp && !mc.forceMonteCarlo) {
        if (!(sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma must be nonnegative");
        if (!isPositiveFinite(p0) || !isPositiveFinite(T)) {
            fail(ErrorCode::InvalidArgument, "p0 and T must be positive");
        }
        return {cp->poolValue(p0) * std::exp(-sigma * sigma * T / 8.0), 0.0};
    }
    return monteCarloKernelExpectation(curve, p0, sigma, T, mc);
}

/// Fair fixed leg for the fee stream of the escrowed tokens, with its MC error.
inline Estimate floatingLegEstimate(const SwapSpec& spec, double sigma, const McConfig& mc) {
    spec.validate();
    const double q0 = spec.priceRatio();
    const Estimate e = lognormalKernelExpectation(spec.curve, q0, sigma, spec.maturityT, mc);
    const double scale = spec.liquidityTokens * spec.p0y;
    const double value = scale * (poolValue(spec.curve, q0) - e.value);
    return {value > 0.0 ? value : 0.0, scale * e.stdError};
}

inline double floatingLegValue(const SwapSpec& spec, double sigma, const McConfig& mc = {}) {
    return floatingLegEstimate(spec, sigma, mc).value;
}

/// sqrt((8 / T) log(2 sqrt(p0x) / (2 sqrt(p0x) - piBar / L))).
inline double impliedVolCpmmClosedForm(double p0x, double piBar, double T, double liquidityTokens = 1.0) {
    if (!isPositiveFinite(p0x) || !isPositiveFinite(T) || !isPositiveFinite(liquidityTokens)) {
        fail(ErrorCode::InvalidArgument, "p0x, T and L must be positive");
    }
    if (!(piBar >= 0.0)) fail(ErrorCode::ArbitrageViolation, "fixed leg must be nonnegative");
    const double value = 2.0 * std::sqrt(p0x);
    const double ratio = piBar / liquidityTokens / value;
    if (!(ratio < 1.0)) fail(ErrorCode::ArbitrageViolation, "fixed leg is at or above the pool value");
    return std::sqrt(-8.0 / T * std::log1p(-ratio));
}

struct SolveResult {
    double value = 0.0;
    double stdError = 0.0;
    int iterations = 0;
};

namespace detail {

inline constexpr double kSigmaStart = 4.0;
inline constexpr double kSigmaCap = 64.0;
inline constexpr int kMaxBisections = 200;

/// Bisection for floatingLeg(sigma) = piBar on [lo, hi]; the caller guarantees
/// leg(lo) <= piBar <= leg(hi). Common random numbers keep leg monotone.
inline SolveResult bisectSigma(const SwapSpec& spec, double piBar, double lo, double hi, const McConfig& mc,
                               double tol) {
    int iterations = 0;
    while (hi - lo > tol * std::max(1.0, 0.5 * (lo + hi))) {
        if (++iterations > kMaxBisections) fail(ErrorCode::NoConvergence, "bisection exceeded 200 iterations");
        const double mid = 0.5 * (lo + hi);
        if (floatingLegValue(spec, mid, mc) < piBar) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double sigma = 0.5 * (lo + hi);

    // Price error mapped to a sigma error through the local slope.
    const Estimate at = floatingLegEstimate(spec, sigma, mc);
    double stdError = 0.0;
    if (at.stdError > 0.0) {
        const double h = 1e-3 * std::max(sigma, 1e-2);
        const double down = std::max(0.0, sigma - h);
        const double slope =
            (floatingLegValue(spec, sigma + h, mc) - floatingLegValue(spec, down, mc)) / (sigma + h - down);
        stdError = slope > 0.0 ? at.stdError / slope : std::numeric_limits<double>::infinity();
    }
    return {sigma, stdError, iterations};
}

}  // namespace detail

/// Implied volatility for a quoted fixed leg, with the MC error propagated to sigma.
inline SolveResult impliedVolSolve(const SwapSpec& spec, double piBar, const McConfig& mc = {}, double tol = 1e-10) {
    spec.validate();
    if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
    if (!(piBar >= 0.0)) fail(ErrorCode::ArbitrageViolation, "fixed leg must be nonnegative");
    if (!(piBar < spec.positionValue())) {
        fail(ErrorCode::ArbitrageViolation, "fixed leg is at or above the position value");
    }
    if (piBar == 0.0) return {0.0, 0.0, 0};
    double hi = detail::kSigmaStart;
    while (floatingLegValue(spec, hi, mc) < piBar) {
        hi *= 2.0;
        if (hi > detail::kSigmaCap) {
            fail(ErrorCode::ArbitrageViolation, "fixed leg needs a volatility beyond the bracketing cap");
        }
    }
    return detail::bisectSigma(spec, piBar, 0.0, hi, mc, tol);
}

inline double impliedVol(const SwapSpec& spec, double piBar, const McConfig& mc = {}, double tol = 1e-10) {
    return impliedVolSolve(spec, piBar, mc, tol).value;
}

struct PriceBounds {
    double lo = 0.0;
    double hi = 0.0;
};

/// Fixed legs consistent with some correlation in [-1, 1]: the floating leg at
/// effective vols |sigmaX - sigmaY| (rho = +1) and sigmaX + sigmaY (rho = -1).
inline PriceBounds impliedCorrBounds(const SwapSpec& spec, double sigmaX, double sigmaY, const McConfig& mc = {}) {
    if (!isPositiveFinite(sigmaX) || !isPositiveFinite(sigmaY)) {
        fail(ErrorCode::InvalidArgument, "sigmaX and sigmaY must be positive");
    }
    return {floatingLegValue(spec, std::abs(sigmaX - sigmaY), mc), floatingLegValue(spec, sigmaX + sigmaY, mc)};
}

struct CorrResult {
    double rho = 0.0;
    double sigmaBar = 0.0;
    double stdError = 0.0;  // of sigmaBar
    int iterations = 0;
    PriceBounds bounds;
};

/// Implied correlation: the effective vol is solved in units of asset y
/// (q0 = P0x / P0y) and mapped to rho = (sigmaX^2 + sigmaY^2 - sigmaBar^2) / (2 sigmaX sigmaY).
inline CorrResult impliedCorrSolve(const SwapSpec& spec, double sigmaX, double sigmaY, double piBar,
                                   const McConfig& mc = {}, double tol = 1e-10) {
    spec.validate();
    CorrResult out;
    out.bounds = impliedCorrBounds(spec, sigmaX, sigmaY, mc);
    const double snap = 1e-9 * std::max(1.0, spec.positionValue());
    if (!(piBar >= out.bounds.lo - snap && piBar <= out.bounds.hi + snap)) {
        fail(ErrorCode::OutOfBounds, "fixed leg outside the correlation-consistent interval");
    }
    const double sLo = std::abs(sigmaX - sigmaY);
    const double sHi = sigmaX + sigmaY;
    SolveResult solved;
    if (piBar <= out.bounds.lo) {
        solved = {sLo, 0.0, 0};
    } else if (piBar >= out.bounds.hi) {
        solved = {sHi, 0.0, 0};
    } else {
        solved = detail::bisectSigma(spec, piBar, sLo, sHi, mc, tol);
    }
    out.sigmaBar = solved.value;
    out.stdError = solved.stdError;
    out.iterations = solved.iterations;
    const double rho = (sigmaX * sigmaX + sigmaY * sigmaY - out.sigmaBar * out.sigmaBar) / (2.0 * sigmaX * sigmaY);
    out.rho = std::clamp(rho, -1.0, 1.0);
    return out;
}

inline double impliedCorr(const SwapSpec& spec, double sigmaX, double sigmaY, double piBar,
                          const McConfig& mc = {}, double tol = 1e-10) {
    return impliedCorrSolve(spec, sigmaX, sigmaY, piBar, mc, tol).rho;
}

/// CPMM implied correlation in closed form with a = 2 L sqrt(P0x P0y):
/// (sigmaX^2 + sigmaY^2 - (8 / T) log(a / (a - piBar))) / (2 sigmaX sigmaY).
inline double impliedCorrCpmmClosedForm(double p0x, double p0y, double sigmaX, double sigmaY, double piBar, double T,
                                        double liquidityTokens = 1.0) {
    if (!isPositiveFinite(sigmaX) || !isPositiveFinite(sigmaY)) {
        fail(ErrorCode::InvalidArgument, "sigmaX and sigmaY must be positive");
    }
    if (!isPositiveFinite(p0x) || !isPositiveFinite(p0y) || !isPositiveFinite(T) ||
        !isPositiveFinite(liquidityTokens)) {
        fail(ErrorCode::InvalidArgument, "prices, T and L must be positive");
    }
    const double a = 2.0 * liquidityTokens * std::sqrt(p0x * p0y);
    if (!(piBar >= 0.0 && piBar < a)) fail(ErrorCode::ArbitrageViolation, "fixed leg outside [0, pool value)");
    const double sigmaBar2 = -8.0 / T * std::log1p(-piBar / a);
    return (sigmaX * sigmaX + sigmaY * sigmaY - sigmaBar2) / (2.0 * sigmaX * sigmaY);
}

/// Fee volatility: the implied vol at which the realized window fees would be
/// the fair fixed leg. `spec` carries the window-start spot and window length.
inline double feeVolFromRealized(double windowFees, const SwapSpec& spec, const McConfig& mc = {}) {
    spec.validate();
    if (!(windowFees >= 0.0)) fail(ErrorCode::InvalidArgument, "window fees must be nonnegative");
    if (windowFees == 0.0) return 0.0;
    if (const auto* cp = spec.curve.asCpmm(); cp && !mc.forceMonteCarlo) {
        const double tokens = cp->liquidity() * spec.liquidityTokens;
        return impliedVolCpmmClosedForm(spec.priceRatio(), windowFees / spec.p0y, spec.maturityT, tokens);
    }
    return impliedVol(spec, windowFees, mc, 1e-8);
}

/// Fills WindowStat::feeVol using the ledger's pool curve. Windows whose fees
/// are not arbitrage-free are left NaN.
inline void annotateFeeVolatility(std::span<WindowStat> windows, const SimLedger& ledger, const McConfig& mc = {}) {
    for (WindowStat& w : windows) {
        SwapSpec spec{ledger.curve};
        spec.maturityT = static_cast<double>(w.windowEnd - w.windowStart) / kSecondsPerYear;
        spec.p0x = w.startSpot;
        try {
            w.feeVol = feeVolFromRealized(w.fees, spec, mc);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ArbitrageViolation) throw;
            w.feeVol = std::numeric_limits<double>::quiet_NaN();
        }
    }
}

}  // namespace ammfee
