// Two-asset AMMs as portfolio-update curves q -> (x(q), y(q)).
//
// q is the price of asset x in units of the numeraire asset y. Every curve
// kind exposes holdings, first and second derivatives in q, and the derived
// geometric quantities (pool value, curvature, CPMM-equivalent liquidity).
#pragma once

#include "ammfee/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>

namespace ammfee {

enum class CurveKind { Cpmm, ConcentratedCpmm, StableSwap };

inline std::string toString(CurveKind kind) {
    switch (kind) {
    case CurveKind::Cpmm: return "cpmm";
    case CurveKind::ConcentratedCpmm: return "concentrated";
    case CurveKind::StableSwap: return "stableswap";
    }
    return "unknown";
}

struct Holdings {
    double xQty = 0.0;
    double yQty = 0.0;
};

struct HoldingsDerivative {
    double xPrime = 0.0;
    double yPrime = 0.0;
};

struct HoldingsSecondDerivative {
    double xSecond = 0.0;
    double ySecond = 0.0;
};

/// Open price interval on which both holdings are strictly positive.
struct PriceInterval {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    bool containsOpen(double q) const { return q > lo && q < hi; }
};

struct Trade {
    double deltaX = 0.0;
    double deltaY = 0.0;
};

inline bool isPositiveFinite(double v) { return std::isfinite(v) && v > 0.0; }

// ---------------------------------------------------------------------------
// Constant product: x = L / sqrt(q), y = L sqrt(q).

class CpmmModel {
public:
    explicit CpmmModel(double liquidity) : liquidity_(liquidity) {
        if (!isPositiveFinite(liquidity)) {
            fail(ErrorCode::InvalidArgument, "cpmm liquidity must be positive");
        }
    }

    double liquidity() const { return liquidity_; }
    PriceInterval domain() const { return {}; }
    bool accepts(double q) const { return isPositiveFinite(q); }

    Holdings holdings(double q) const {
        const double root = std::sqrt(q);
        return {liquidity_ / root, liquidity_ * root};
    }

    HoldingsDerivative derivative(double q) const {
        const double root = std::sqrt(q);
        return {-liquidity_ / (2.0 * q * root), liquidity_ / (2.0 * root)};
    }

    HoldingsSecondDerivative secondDerivative(double q) const {
        const double root = std::sqrt(q);
        return {3.0 * liquidity_ / (4.0 * q * q * root), -liquidity_ / (4.0 * q * root)};
    }

    double poolValue(double q) const { return 2.0 * liquidity_ * std::sqrt(q); }

    CpmmModel scaled(double factor) const { return CpmmModel(liquidity_ * factor); }

private:
    double liquidity_;
};

// ---------------------------------------------------------------------------
// Concentrated liquidity on [pL, pU]; holdings are frozen outside the range.

class ConcentratedModel {
public:
    ConcentratedModel(double liquidity, double priceLow, double priceHigh)
        : liquidity_(liquidity), priceLow_(priceLow), priceHigh_(priceHigh) {
        if (!isPositiveFinite(liquidity)) {
            fail(ErrorCode::InvalidArgument, "concentrated liquidity must be positive");
        }
        if (!isPositiveFinite(priceLow) || !isPositiveFinite(priceHigh) || priceLow >= priceHigh) {
            fail(ErrorCode::RangeError, "concentrated range requires 0 < pL < pU");
        }
        rootLow_ = std::sqrt(priceLow_);
        rootHigh_ = std::sqrt(priceHigh_);
    }

    double liquidity() const { return liquidity_; }
    double priceLow() const { return priceLow_; }
    double priceHigh() const { return priceHigh_; }
    PriceInterval domain() const { return {priceLow_, priceHigh_}; }
    bool accepts(double q) const { return isPositiveFinite(q); }
    bool inRangeInterior(double q) const { return q > priceLow_ && q < priceHigh_; }

    Holdings holdings(double q) const {
        if (q <= priceLow_) return {liquidity_ * (1.0 / rootLow_ - 1.0 / rootHigh_), 0.0};
        if (q >= priceHigh_) return {0.0, liquidity_ * (rootHigh_ - rootLow_)};
        const double root = std::sqrt(q);
        return {liquidity_ * (1.0 / root - 1.0 / rootHigh_), liquidity_ * (root - rootLow_)};
    }

    HoldingsDerivative derivative(double q) const {
        if (!inRangeInterior(q)) return {};
        const double root = std::sqrt(q);
        return {-liquidity_ / (2.0 * q * root), liquidity_ / (2.0 * root)};
    }

    HoldingsSecondDerivative secondDerivative(double q) const {
        if (!inRangeInterior(q)) return {};
        const double root = std::sqrt(q);
        return {3.0 * liquidity_ / (4.0 * q * q * root), -liquidity_ / (4.0 * q * root)};
    }

    double poolValue(double q) const {
        const Holdings h = holdings(q);
        return q * h.xQty + h.yQty;
    }

    ConcentratedModel scaled(double factor) const {
        return ConcentratedModel(liquidity_ * factor, priceLow_, priceHigh_);
    }

private:
    double liquidity_;
    double priceLow_;
    double priceHigh_;
    double rootLow_ = 0.0;
    double rootHigh_ = 0.0;
};

// ---------------------------------------------------------------------------
// Two-asset stableswap invariant in price-centred units u = x * c, v = y:
//
//     4A (u + v) + D = 4 A D + D^3 / (4 u v)
//
// Along the invariant v is the positive root of a quadratic in v given u, and
// the marginal price of u in v, p(u) = F_u / F_v, is strictly decreasing in u.
// Holdings at a target q are found by safeguarded Newton on s = log u.

class StableSwapModel {
public:
    /// Holdings below this fraction of D (in price-centred units) are outside
    /// the numeric domain.
    static constexpr double kDomainFloor = 1e-12;

    StableSwapModel(double amplification, double invariant, double priceCenter)
        : amp_(amplification), invariant_(invariant), center_(priceCenter) {
        if (!isPositiveFinite(amplification)) {
            fail(ErrorCode::InvalidArgument, "stableswap amplification must be positive");
        }
        if (!isPositiveFinite(invariant)) {
            fail(ErrorCode::InvalidArgument, "stableswap invariant D must be positive");
        }
        if (!isPositiveFinite(priceCenter)) {
            fail(ErrorCode::InvalidArgument, "stableswap price center must be positive");
        }
        k_ = invariant_ * invariant_ * invariant_ / 4.0;
        uMin_ = kDomainFloor * invariant_;
        uMax_ = vOf(uMin_);
        qHigh_ = center_ * priceOf(uMin_, vOf(uMin_));
        qLow_ = center_ * priceOf(uMax_, vOf(uMax_));
    }

    double amplification() const { return amp_; }
    double invariant() const { return invariant_; }
    double priceCenter() const { return center_; }
    PriceInterval domain() const { return {qLow_, qHigh_}; }
    bool accepts(double q) const { return std::isfinite(q) && q >= qLow_ && q <= qHigh_; }

    /// Point on the invariant in price-centred units with its marginal price.
    struct Point {
        double u;
        double v;
        double p;
    };

    /// v on the invariant for a given u (stable quadratic root).
    double vOf(double u) const {
        const double a = 4.0 * amp_;
        const double b = 4.0 * amp_ * u + invariant_ - 4.0 * amp_ * invariant_;
        const double c0 = k_ / u;
        const double disc = std::sqrt(b * b + 4.0 * a * c0);
        return b >= 0.0 ? 2.0 * c0 / (b + disc) : (disc - b) / (2.0 * a);
    }

    double priceOf(double u, double v) const {
        const double w = 4.0 * amp_ * u * u * v * v;
        return (w + k_ * v) / (w + k_ * u);
    }

    /// Solves for the invariant point whose marginal price equals q / c.
    /// `hintU`, when positive, seeds the Newton iteration.
    Point solve(double q, double hintU = 0.0) const {
        if (!accepts(q)) {
            fail(ErrorCode::DomainError, "price " + std::to_string(q) + " outside stableswap domain");
        }
        const double target = std::log(q / center_);
        double sLo = std::log(uMin_);
        double sHi = std::log(uMax_);
        double s = hintU > 0.0 ? std::log(hintU) : std::log(0.5 * invariant_) - 0.5 * target;
        if (!(s > sLo && s < sHi)) s = 0.5 * (sLo + sHi);

        // Newton on a sigmoid can ping-pong across the inflection point, so a
        // step that fails to halve relative to the one before last bisects.
        double stepBeforeLast = sHi - sLo;
        double lastStep = stepBeforeLast;
        for (int iter = 0; iter < kMaxIterations; ++iter) {
            const double u = std::exp(s);
            const double v = vOf(u);
            const double p = priceOf(u, v);
            const double g = std::log(p) - target;
            // Near the centre the price is flat in u, so the residual bottoms
            // out at a few ulps long before the step does.
            if (std::abs(g) <= kResidualFloor) return {u, v, p};
            if (g > 0.0) {
                sLo = s;
            } else {
                sHi = s;
            }
            const double slope = u * priceSlope(u, v, p) / p;
            double next = s - g / slope;
            if (!(next > sLo && next < sHi) || !std::isfinite(next) ||
                std::abs(next - s) > 0.5 * std::abs(stepBeforeLast)) {
                next = 0.5 * (sLo + sHi);
            }
            stepBeforeLast = lastStep;
            lastStep = next - s;
            if (std::abs(next - s) <= 1e-15 * std::max(1.0, std::abs(s)) || sHi - sLo <= 1e-15) {
                const double un = std::exp(next);
                const double vn = vOf(un);
                return {un, vn, priceOf(un, vn)};
            }
            s = next;
        }
        fail(ErrorCode::NoConvergence, "stableswap holdings solve did not converge at q=" + std::to_string(q));
    }

    /// dp/du along the invariant.
    double priceSlope(double u, double v, double p) const {
        const Partials f = partials(u, v);
        return (f.uu - 2.0 * p * f.uv + p * p * f.vv) / f.v;
    }

    Holdings holdings(double q, double hintU = 0.0) const {
        const Point pt = solve(q, hintU);
        return {pt.u / center_, pt.v};
    }

    Holdings holdingsAt(const Point& pt) const { return {pt.u / center_, pt.v}; }

    HoldingsDerivative derivativeAt(const Point& pt) const {
        const double dp = priceSlope(pt.u, pt.v, pt.p);
        return {1.0 / (center_ * center_ * dp), -pt.p / (center_ * dp)};
    }

    HoldingsSecondDerivative secondDerivativeAt(const Point& pt) const {
        const double u = pt.u;
        const double v = pt.v;
        const double p = pt.p;
        const Partials f = partials(u, v);
        const double n = f.uu - 2.0 * p * f.uv + p * p * f.vv;
        const double dp = n / f.v;
        const double dUu = f.uuu - p * f.uuv;
        const double dUv = f.uuv - p * f.uvv;
        const double dVv = f.uvv - p * f.vvv;
        const double dn = dUu - 2.0 * dp * f.uv - 2.0 * p * dUv + 2.0 * p * dp * f.vv + p * p * dVv;
        const double dFv = f.uv - p * f.vv;
        const double d2p = (dn * f.v - n * dFv) / (f.v * f.v);
        const double c2 = center_ * center_;
        const double dp3 = dp * dp * dp;
        return {-d2p / (c2 * center_ * dp3), -(dp * dp - p * d2p) / (c2 * dp3)};
    }

    HoldingsDerivative derivative(double q) const { return derivativeAt(solve(q)); }
    HoldingsSecondDerivative secondDerivative(double q) const { return secondDerivativeAt(solve(q)); }

    double poolValue(double q) const {
        const Holdings h = holdings(q);
        return q * h.xQty + h.yQty;
    }

    StableSwapModel scaled(double factor) const {
        return StableSwapModel(amp_, invariant_ * factor, center_);
    }

private:
    static constexpr int kMaxIterations = 200;
    static constexpr double kResidualFloor = 8.0 * std::numeric_limits<double>::epsilon();

    struct Partials {
        double u, v, uu, uv, vv, uuu, uuv, uvv, vvv;
    };

    Partials partials(double u, double v) const {
        const double a4 = 4.0 * amp_;
        const double ku = k_ / u;
        const double kuv = ku / v;
        return {
            a4 + kuv / u,
            a4 + kuv / v,
            -2.0 * kuv / (u * u),
            -kuv / (u * v),
            -2.0 * kuv / (v * v),
            6.0 * kuv / (u * u * u),
            2.0 * kuv / (u * u * v),
            2.0 * kuv / (u * v * v),
            6.0 * kuv / (v * v * v),
        };
    }

    double amp_;
    double invariant_;
    double center_;
    double k_ = 0.0;
    double uMin_ = 0.0;
    double uMax_ = 0.0;
    double qLow_ = 0.0;
    double qHigh_ = 0.0;
};

// ---------------------------------------------------------------------------

class AmmCurve {
public:
    using Model = std::variant<CpmmModel, ConcentratedModel, StableSwapModel>;

    static AmmCurve cpmm(double liquidity) { return AmmCurve(CpmmModel(liquidity)); }
    static AmmCurve concentrated(double liquidity, double priceLow, double priceHigh) {
        return AmmCurve(ConcentratedModel(liquidity, priceLow, priceHigh));
    }
    static AmmCurve stableSwap(double amplification, double invariant, double priceCenter) {
        return AmmCurve(StableSwapModel(amplification, invariant, priceCenter));
    }

    explicit AmmCurve(Model model) : model_(std::move(model)) {}

    CurveKind kind() const { return static_cast<CurveKind>(model_.index()); }
    const Model& model() const { return model_; }

    template <class Fn>
    decltype(auto) visit(Fn&& fn) const {
        return std::visit(std::forward<Fn>(fn), model_);
    }

    PriceInterval domain() const {
        return visit([](const auto& m) { return m.domain(); });
    }

    /// Prices at which holdings are defined (wider than domain() for
    /// concentrated positions, whose holdings are clamped outside the range).
    bool accepts(double q) const {
        return visit([q](const auto& m) { return m.accepts(q); });
    }

    /// Holdings and pool value scale linearly with `factor`.
    AmmCurve scaled(double factor) const {
        if (!isPositiveFinite(factor)) fail(ErrorCode::InvalidArgument, "scale factor must be positive");
        return visit([factor](const auto& m) { return AmmCurve(Model(m.scaled(factor))); });
    }

    const CpmmModel* asCpmm() const { return std::get_if<CpmmModel>(&model_); }
    const ConcentratedModel* asConcentrated() const { return std::get_if<ConcentratedModel>(&model_); }
    const StableSwapModel* asStableSwap() const { return std::get_if<StableSwapModel>(&model_); }

private:
    Model model_;
};

namespace detail {

inline void requireAccepted(const AmmCurve& curve, double q) {
    if (!curve.accepts(q)) {
        fail(ErrorCode::DomainError,
             "price " + std::to_string(q) + " outside " + toString(curve.kind()) + " domain");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations

inline Holdings evalHoldings(const AmmCurve& curve, double q) {
    detail::requireAccepted(curve, q);
    return curve.visit([q](const auto& m) { return m.holdings(q); });
}

inline double poolValue(const AmmCurve& curve, double q) {
    detail::requireAccepted(curve, q);
    return curve.visit([q](const auto& m) { return m.poolValue(q); });
}

/// Pool value for any q >= 0. Outside a stableswap's numeric domain the
/// holdings are frozen at the nearest endpoint, which evaluates the supporting
/// line there; used by samplers that can draw extreme prices.
inline double poolValueExtended(const AmmCurve& curve, double q) {
    if (!(q > 0.0)) return curve.visit([](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CpmmModel>) {
            return 0.0;
        } else if constexpr (std::is_same_v<M, ConcentratedModel>) {
            return m.holdings(m.priceLow()).yQty;
        } else {
            return m.holdings(m.domain().lo).yQty;
        }
    });
    return curve.visit([q](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, StableSwapModel>) {
            const PriceInterval d = m.domain();
            const double clamped = std::clamp(q, d.lo, d.hi);
            const Holdings h = m.holdings(clamped);
            return q * h.xQty + h.yQty;
        } else if constexpr (std::is_same_v<M, CpmmModel>) {
            return std::isfinite(q) ? m.poolValue(q) : std::numeric_limits<double>::infinity();
        } else {
            return m.poolValue(q);
        }
    });
}

/// Dollar value p_y * Cbar(p_x / p_y) of the pool.
inline double dollarPoolValue(const AmmCurve& curve, double px, double py) {
    if (!isPositiveFinite(px) || !isPositiveFinite(py)) {
        fail(ErrorCode::DomainError, "dollar prices must be positive");
    }
    return py * poolValue(curve, px / py);
}

/// d(x)/dq and d(y)/dq. Zero wherever one of the holdings is exhausted.
inline HoldingsDerivative holdingsDerivative(const AmmCurve& curve, double q) {
    detail::requireAccepted(curve, q);
    return curve.visit([q](const auto& m) { return m.derivative(q); });
}

inline HoldingsSecondDerivative holdingsSecondDerivative(const AmmCurve& curve, double q) {
    detail::requireAccepted(curve, q);
    return curve.visit([q](const auto& m) { return m.secondDerivative(q); });
}

/// Signed curvature (x'y'' - y'x'') / (x'^2 + y'^2)^{3/2} of the curve
/// traversed in increasing q. Negative for every valid AMM; its magnitude
/// equals 1 / (|x'(q)| (1 + q^2)^{3/2}).
inline double curvature(const AmmCurve& curve, double q) {
    const HoldingsDerivative d = holdingsDerivative(curve, q);
    if (d.xPrime == 0.0) {
        fail(ErrorCode::DegenerateCurve, "x'(q) vanishes at q=" + std::to_string(q));
    }
    const HoldingsSecondDerivative s = holdingsSecondDerivative(curve, q);
    const double speed2 = d.xPrime * d.xPrime + d.yPrime * d.yPrime;
    return (d.xPrime * s.ySecond - d.yPrime * s.xSecond) / (speed2 * std::sqrt(speed2));
}

/// Liquidity of the CPMM with the same local price impact: -2 q^{3/2} x'(q).
inline double equivalentCpmmLiquidity(const AmmCurve& curve, double q) {
    detail::requireAccepted(curve, q);
    return curve.visit([q](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CpmmModel>) {
            return m.liquidity();
        } else if constexpr (std::is_same_v<M, ConcentratedModel>) {
            return m.inRangeInterior(q) ? m.liquidity() : 0.0;
        } else {
            return -2.0 * q * std::sqrt(q) * m.derivative(q).xPrime;
        }
    });
}

/// Change in pool holdings when the pool moves from qFrom to qTo along the curve.
inline Trade solveTrade(const AmmCurve& curve, double qFrom, double qTo) {
    if (qFrom == qTo) {
        detail::requireAccepted(curve, qFrom);
        return {};
    }
    const Holdings from = evalHoldings(curve, qFrom);
    const Holdings to = evalHoldings(curve, qTo);
    return {to.xQty - from.xQty, to.yQty - from.yQty};
}

/// Stateful evaluator that warm-starts the stableswap solve from the previous
/// point. Useful along continuous price paths.
class CurveCursor {
public:
    explicit CurveCursor(const AmmCurve& curve) : curve_(&curve) {}

    struct Eval {
        Holdings holdings;
        HoldingsDerivative derivative;
    };

    Eval at(double q) {
        if (const auto* ss = curve_->asStableSwap()) {
            const auto pt = ss->solve(q, hintU_);
            hintU_ = pt.u;
            return {ss->holdingsAt(pt), ss->derivativeAt(pt)};
        }
        return {evalHoldings(*curve_, q), holdingsDerivative(*curve_, q)};
    }

    Holdings holdings(double q) {
        if (const auto* ss = curve_->asStableSwap()) {
            const auto pt = ss->solve(q, hintU_);
            hintU_ = pt.u;
            return ss->holdingsAt(pt);
        }
        return evalHoldings(*curve_, q);
    }

    const AmmCurve& curve() const { return *curve_; }

private:
    const AmmCurve* curve_;
    double hintU_ = 0.0;
};

}  // namespace ammfee
