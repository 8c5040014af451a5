// Loss-versus-rebalancing as the risk-neutral implied fee rate.
#pragma once

#include "ammfee/amm_curve.hpp"
#include "ammfee/errors.hpp"

#include <cmath>

namespace ammfee {

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

/// Risk-neutral correlated GBM parameters for the two pool assets.
struct GbmParams {
    double r = 0.0;
    double sigmaX = 0.0;
    double sigmaY = 0.0;
    double rho = 0.0;

    void validate() const {
        if (!(r >= 0.0) || !(sigmaX >= 0.0) || !(sigmaY >= 0.0)) {
            fail(ErrorCode::InvalidArgument, "r, sigmaX and sigmaY must be nonnegative");
        }
        if (!(rho >= -1.0 && rho <= 1.0)) {
            fail(ErrorCode::InvalidArgument, "rho must lie in [-1, 1]");
        }
    }
};

/// Variance rate of log(Px / Py): sigmaX^2 - 2 rho sigmaX sigmaY + sigmaY^2.
inline double effectiveVariance(const GbmParams& params) {
    const double v = params.sigmaX * params.sigmaX - 2.0 * params.rho * params.sigmaX * params.sigmaY +
                     params.sigmaY * params.sigmaY;
    return v < 0.0 ? 0.0 : v;
}

/// Instantaneous LVR l(q) = -1/2 sigmaBar^2 q^2 x'(q), in units of y per year.
inline double instantaneousLvr(const AmmCurve& curve, double q, const GbmParams& params) {
    const HoldingsDerivative d = holdingsDerivative(curve, q);
    return -0.5 * effectiveVariance(params) * q * q * d.xPrime;
}

/// Same rate written through y'(q); agrees with instantaneousLvr on any curve.
inline double instantaneousLvrFromY(const AmmCurve& curve, double q, const GbmParams& params) {
    const HoldingsDerivative d = holdingsDerivative(curve, q);
    return 0.5 * effectiveVariance(params) * q * d.yPrime;
}

/// Dollar fee rate F(px, py) = py * l(px / py) that makes the LP position a
/// martingale.
inline double impliedFeeRateDollars(const AmmCurve& curve, double px, double py, const GbmParams& params) {
    if (!isPositiveFinite(px) || !isPositiveFinite(py)) {
        fail(ErrorCode::DomainError, "dollar prices must be positive");
    }
    return py * instantaneousLvr(curve, px / py, params);
}

/// Unit-liquidity CPMM LVR against a literal stablecoin (dPy = 0):
/// (r + sigma^2 / 4) sqrt(q).
inline double cpmmUnitLvrWithRate(double q, double r, double sigma) {
    if (!isPositiveFinite(q)) fail(ErrorCode::DomainError, "price must be positive");
    return (r + sigma * sigma / 4.0) * std::sqrt(q);
}

/// Concentrated-position LVR against a literal stablecoin:
/// L [(r + sigma^2 / 4) sqrt(q) - r sqrt(pL)] on [pL, pU], zero elsewhere.
inline double concentratedLvrWithRate(double q, double r, double sigma, double liquidity, double priceLow,
                                      double priceHigh) {
    if (!(priceLow > 0.0) || !(priceLow < priceHigh)) {
        fail(ErrorCode::RangeError, "concentrated range requires 0 < pL < pU");
    }
    if (q < priceLow || q > priceHigh) return 0.0;
    return liquidity * ((r + sigma * sigma / 4.0) * std::sqrt(q) - r * std::sqrt(priceLow));
}

/// LVR of any curve when y is a literal stablecoin (dPy = 0) and x has drift r:
/// r y(q) - 1/2 sigma^2 q^2 x'(q).
///
/// Warning: with r > 0 this regime breaks the cross-AMM consistency of the
/// implied fee (a concentrated position earns a strictly smaller rate than its
/// CPMM-equivalent). Pools quoted against a stablecoin should normally model
/// it as a tokenized money-market account, where the rate term cancels.
inline double literalStablecoinLvr(const AmmCurve& curve, double q, double r, double sigma) {
    const Holdings h = evalHoldings(curve, q);
    const HoldingsDerivative d = holdingsDerivative(curve, q);
    return r * h.yQty - 0.5 * sigma * sigma * q * q * d.xPrime;
}

/// Rebalancing-portfolio P&L minus pool P&L over one step, in dollars. The
/// rebalancing portfolio holds `holdings` (the pool's composition at the start
/// of the step) and the pool is marked on its curve at both price pairs.
inline double realizedLvrIncrement(const Holdings& holdings, double pxPrev, double pxNext, double pyPrev,
                                   double pyNext, const AmmCurve& curve) {
    const double hedge = holdings.xQty * (pxNext - pxPrev) + holdings.yQty * (pyNext - pyPrev);
    const double pool = dollarPoolValue(curve, pxNext, pyNext) - dollarPoolValue(curve, pxPrev, pyPrev);
    return hedge - pool;
}

}  // namespace ammfee
