// Stale-price arbitrage replay of bid/ask ticks against a fee-charging pool,
// with realized fee and realized LVR accounting and rolling-window analysis.
#pragma once

#include "ammfee/amm_curve.hpp"
#include "ammfee/errors.hpp"
#include "ammfee/lvr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ammfee {

struct QuoteTick {
    std::int64_t timestamp = 0;
    double bid = 0.0;
    double ask = 0.0;

    double mid() const { return 0.5 * (bid + ask); }
};

/// Checks the tick-series invariants: nonempty, positive quotes with
/// bid <= ask, strictly increasing timestamps.
inline void validateTicks(std::span<const QuoteTick> ticks) {
    if (ticks.empty()) fail(ErrorCode::EmptyInput, "tick series is empty");
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const QuoteTick& t = ticks[i];
        if (!isPositiveFinite(t.bid) || !isPositiveFinite(t.ask) || t.bid > t.ask) {
            fail(ErrorCode::InvalidArgument, "tick " + std::to_string(i) + " needs 0 < bid <= ask");
        }
        if (i > 0 && t.timestamp <= ticks[i - 1].timestamp) {
            fail(ErrorCode::UnsortedInput, "tick timestamps must be strictly increasing (tick " + std::to_string(i) + ")");
        }
    }
}

enum class FillSide { PoolBuysX, PoolSellsX };

struct Fill {
    std::int64_t timestamp = 0;
    FillSide side = FillSide::PoolSellsX;
    double deltaX = 0.0;  // change in pool holdings of x
    double deltaY = 0.0;  // change in pool holdings of y
    double feePaid = 0.0;  // in the arbitrageur's input asset
    double executionPrice = 0.0;
    bool truncated = false;  // target price clipped to the curve domain
};

/// How the rebalancing portfolio is marked when accruing realized LVR.
enum class LvrValuation {
    PoolSpot,        // rebalance at the pool's own spot price at the end of each step
    ClosingBidAsk,   // rebalance at the external bid or ask, by sign of the trade
};

struct PoolSimState {
    AmmCurve curve;
    double spotPrice = 1.0;
    double feeRate = 0.0;
    double cumFeesX = 0.0;
    double cumFeesY = 0.0;
    double cumLvr = 0.0;
    Holdings holdings{};
    double solverHint = 0.0;  // warm start for stableswap solves

    PoolSimState(AmmCurve c, double spot, double gamma) : curve(std::move(c)), spotPrice(spot), feeRate(gamma) {
        if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorCode::InvalidArgument, "fee rate must lie in [0, 1)");
        holdings = evalHoldings(curve, spot);
    }
};

namespace detail {

inline Holdings holdingsWithHint(PoolSimState& state, double q) {
    if (const auto* ss = state.curve.asStableSwap()) {
        const auto pt = ss->solve(q, state.solverHint);
        state.solverHint = pt.u;
        return ss->holdingsAt(pt);
    }
    return evalHoldings(state.curve, q);
}

inline double clampToCurve(const AmmCurve& curve, double q, bool& truncated) {
    truncated = false;
    if (const auto* ss = curve.asStableSwap()) {
        const PriceInterval d = ss->domain();
        if (q < d.lo || q > d.hi) {
            truncated = true;
            return std::clamp(q, d.lo, d.hi);
        }
    }
    return q;
}

/// Moves the pool to `target` as one arbitrage fill; fees stay outside the pool.
inline void movePool(PoolSimState& state, double target, double executionPrice, std::int64_t ts,
                     std::vector<Fill>& fills) {
    bool truncated = false;
    target = clampToCurve(state.curve, target, truncated);
    if (target == state.spotPrice) return;
    const Holdings next = holdingsWithHint(state, target);
    const double dx = next.xQty - state.holdings.xQty;
    const double dy = next.yQty - state.holdings.yQty;
    const double gamma = state.feeRate;
    state.spotPrice = target;
    state.holdings = next;
    if (dx == 0.0 && dy == 0.0) return;

    Fill fill;
    fill.timestamp = ts;
    fill.deltaX = dx;
    fill.deltaY = dy;
    fill.executionPrice = executionPrice;
    fill.truncated = truncated;
    if (dx < 0.0) {
        // Arbitrageur pays y; net input dy enters the curve, gross = dy / (1 - gamma).
        fill.side = FillSide::PoolSellsX;
        fill.feePaid = gamma * dy / (1.0 - gamma);
        state.cumFeesY += fill.feePaid;
    } else {
        fill.side = FillSide::PoolBuysX;
        fill.feePaid = gamma * dx / (1.0 - gamma);
        state.cumFeesX += fill.feePaid;
    }
    fills.push_back(fill);
}

inline double feesInDollars(std::span<const Fill> fills, double mid) {
    double total = 0.0;
    for (const Fill& f : fills) total += f.side == FillSide::PoolBuysX ? f.feePaid * mid : f.feePaid;
    return total;
}

}  // namespace detail

/// Applies one tick of stale-price arbitrage in place and appends the fills.
///
/// The arbitrageur sells x to the pool's bid side until the post-fee marginal
/// price reaches bid (1 - gamma), or buys x until it reaches ask / (1 - gamma).
/// When both edges are violated, both orderings are evaluated and the one
/// collecting the smaller fee (marked at the tick mid) is kept.
inline void applyArbitrage(PoolSimState& state, const QuoteTick& tick, std::vector<Fill>& fills) {
    const double gamma = state.feeRate;
    const double upEdge = tick.bid * (1.0 - gamma);
    const double downEdge = tick.ask / (1.0 - gamma);
    const bool up = upEdge > state.spotPrice;
    const bool down = downEdge < state.spotPrice;
    if (!up && !down) return;
    if (up && !down) {
        detail::movePool(state, upEdge, tick.bid, tick.timestamp, fills);
        return;
    }
    if (down && !up) {
        detail::movePool(state, downEdge, tick.ask, tick.timestamp, fills);
        return;
    }

    PoolSimState upFirst = state;
    std::vector<Fill> upFills;
    detail::movePool(upFirst, upEdge, tick.bid, tick.timestamp, upFills);
    detail::movePool(upFirst, downEdge, tick.ask, tick.timestamp, upFills);

    PoolSimState downFirst = state;
    std::vector<Fill> downFills;
    detail::movePool(downFirst, downEdge, tick.ask, tick.timestamp, downFills);
    detail::movePool(downFirst, upEdge, tick.bid, tick.timestamp, downFills);

    const double mid = tick.mid();
    if (detail::feesInDollars(downFills, mid) < detail::feesInDollars(upFills, mid)) {
        state = std::move(downFirst);
        fills.insert(fills.end(), downFills.begin(), downFills.end());
    } else {
        state = std::move(upFirst);
        fills.insert(fills.end(), upFills.begin(), upFills.end());
    }
}

struct StepResult {
    PoolSimState state;
    std::vector<Fill> fills;
};

inline StepResult arbitrageStep(const PoolSimState& state, const QuoteTick& tick) {
    StepResult result{state, {}};
    applyArbitrage(result.state, tick, result.fills);
    return result;
}

struct SimConfig {
    LvrValuation valuation = LvrValuation::ClosingBidAsk;
    /// Dollar size of the position at the first tick; <= 0 keeps the curve as given.
    double initialInvestment = 100.0;
    bool recordFills = true;
};

struct LedgerEntry {
    std::int64_t timestamp = 0;
    double spot = 0.0;
    double mid = 0.0;
    double cumFeesUsd = 0.0;
    double cumLvrUsd = 0.0;
};

struct SimLedger {
    AmmCurve curve;
    double feeRate = 0.0;
    std::vector<LedgerEntry> entries;
    std::vector<Fill> fills;

    const LedgerEntry& at(std::int64_t ts) const {
        auto it = std::upper_bound(entries.begin(), entries.end(), ts,
                                   [](std::int64_t t, const LedgerEntry& e) { return t < e.timestamp; });
        if (it == entries.begin()) fail(ErrorCode::InsufficientData, "timestamp precedes the ledger");
        return *std::prev(it);
    }
};

/// Curve rescaled so its pool value at q equals `dollars`.
inline AmmCurve sizedCurve(const AmmCurve& curve, double q, double dollars) {
    if (!(dollars > 0.0)) return curve;
    return curve.scaled(dollars / poolValue(curve, q));
}

inline SimLedger runSimulation(const AmmCurve& curve, std::span<const QuoteTick> ticks, double feeRate,
                               const SimConfig& config = {}) {
    validateTicks(ticks);
    const double q0 = ticks.front().mid();
    SimLedger ledger{sizedCurve(curve, q0, config.initialInvestment), feeRate, {}, {}};
    ledger.entries.reserve(ticks.size());

    PoolSimState state(ledger.curve, q0, feeRate);
    double cumFeesUsd = 0.0;
    std::vector<Fill> step;
    for (const QuoteTick& tick : ticks) {
        step.clear();
        const double qBefore = state.spotPrice;
        const Holdings before = state.holdings;
        applyArbitrage(state, tick, step);

        const double mid = tick.mid();
        cumFeesUsd += detail::feesInDollars(step, mid);
        if (!step.empty()) {
            double lvr = 0.0;
            if (config.valuation == LvrValuation::ClosingBidAsk) {
                for (const Fill& f : step) lvr += -f.deltaX * f.executionPrice - f.deltaY;
            } else {
                lvr = realizedLvrIncrement(before, qBefore, state.spotPrice, 1.0, 1.0, ledger.curve);
            }
            state.cumLvr += lvr;
            if (config.recordFills) ledger.fills.insert(ledger.fills.end(), step.begin(), step.end());
        }
        ledger.entries.push_back({tick.timestamp, state.spotPrice, mid, cumFeesUsd, state.cumLvr});
    }
    return ledger;
}

/// Pre-extracted per-block pool observations for an LP position.
struct PoolEvent {
    std::int64_t timestamp = 0;
    double price = 0.0;
    double feeX = 0.0;
    double feeY = 0.0;
};

/// Builds a ledger from observed pool spots and fee accruals; realized LVR is
/// rebalanced at the pool spot at the end of each block.
inline SimLedger replayPoolEvents(const AmmCurve& curve, std::span<const PoolEvent> events,
                                  double initialInvestment = 0.0) {
    if (events.empty()) fail(ErrorCode::EmptyInput, "pool-event series is empty");
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!isPositiveFinite(events[i].price) || events[i].feeX < 0.0 || events[i].feeY < 0.0) {
            fail(ErrorCode::InvalidArgument, "pool event " + std::to_string(i) + " has invalid price or fees");
        }
        if (i > 0 && events[i].timestamp <= events[i - 1].timestamp) {
            fail(ErrorCode::UnsortedInput, "pool-event timestamps must be strictly increasing");
        }
    }
    SimLedger ledger{sizedCurve(curve, events.front().price, initialInvestment), 0.0, {}, {}};
    ledger.entries.reserve(events.size());
    double cumFees = 0.0;
    double cumLvr = 0.0;
    double prev = events.front().price;
    for (const PoolEvent& e : events) {
        cumFees += e.feeX * e.price + e.feeY;
        if (e.price != prev) {
            cumLvr += realizedLvrIncrement(evalHoldings(ledger.curve, prev), prev, e.price, 1.0, 1.0, ledger.curve);
        }
        prev = e.price;
        ledger.entries.push_back({e.timestamp, e.price, e.price, cumFees, cumLvr});
    }
    return ledger;
}

/// Annualized standard deviation of log returns of `mids`, sampled every
/// `intervalSeconds`. Population normalization (divide by the number of
/// returns); `zeroMean` skips subtracting the sample mean.
inline double historicalVolatility(std::span<const double> mids, double intervalSeconds, bool zeroMean = false) {
    if (mids.size() < 2) fail(ErrorCode::InsufficientData, "need at least two samples");
    if (!(intervalSeconds > 0.0)) fail(ErrorCode::InvalidArgument, "sampling interval must be positive");
    const std::size_t n = mids.size() - 1;
    std::vector<double> returns(n);
    for (std::size_t i = 0; i < n; ++i) returns[i] = std::log(mids[i + 1] / mids[i]);
    double mean = 0.0;
    if (!zeroMean) {
        for (double r : returns) mean += r;
        mean /= static_cast<double>(n);
    }
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    return std::sqrt(ss / static_cast<double>(n) * kSecondsPerYear / intervalSeconds);
}

struct WindowStat {
    std::int64_t windowStart = 0;
    std::int64_t windowEnd = 0;
    double fees = 0.0;
    double lvr = 0.0;
    double histVol = std::numeric_limits<double>::quiet_NaN();
    double feeVol = std::numeric_limits<double>::quiet_NaN();
    double startSpot = 0.0;
};

struct WindowConfig {
    std::int64_t windowSeconds = 30 * 86400;
    std::int64_t strideSeconds = 3600;
    double histIntervalSeconds = 3600.0;
    bool zeroMeanVol = false;
};

/// Fees and LVR earned by an LP present exactly over [start, end], for window
/// starts first + k * stride with end <= last timestamp.
inline std::vector<WindowStat> rollingWindows(const SimLedger& ledger, const WindowConfig& config) {
    if (config.windowSeconds <= 0 || config.strideSeconds <= 0) {
        fail(ErrorCode::InvalidArgument, "window length and stride must be positive");
    }
    if (ledger.entries.empty()) fail(ErrorCode::InsufficientData, "ledger is empty");
    const std::int64_t first = ledger.entries.front().timestamp;
    const std::int64_t last = ledger.entries.back().timestamp;
    if (last - first < config.windowSeconds) {
        fail(ErrorCode::InsufficientData, "ledger spans " + std::to_string(last - first) +
                                              "s, shorter than the " + std::to_string(config.windowSeconds) +
                                              "s window");
    }
    std::vector<WindowStat> out;
    const auto sampleStep = static_cast<std::int64_t>(std::llround(config.histIntervalSeconds));
    std::vector<double> mids;
    for (std::int64_t start = first; start + config.windowSeconds <= last; start += config.strideSeconds) {
        const std::int64_t end = start + config.windowSeconds;
        const LedgerEntry& a = ledger.at(start);
        const LedgerEntry& b = ledger.at(end);
        WindowStat w;
        w.windowStart = start;
        w.windowEnd = end;
        w.fees = b.cumFeesUsd - a.cumFeesUsd;
        w.lvr = b.cumLvrUsd - a.cumLvrUsd;
        w.startSpot = a.spot;
        mids.clear();
        if (sampleStep > 0) {
            for (std::int64_t t = start; t <= end; t += sampleStep) mids.push_back(ledger.at(t).mid);
        }
        if (mids.size() >= 2) w.histVol = historicalVolatility(mids, static_cast<double>(sampleStep), config.zeroMeanVol);
        out.push_back(w);
    }
    return out;
}

struct LinearFitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double correlation = 0.0;
};

/// Least squares of ys on xs (through the origin unless withIntercept) plus
/// the Pearson correlation of the raw series.
inline LinearFitResult linearFit(std::span<const double> xs, std::span<const double> ys, bool withIntercept) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        fail(ErrorCode::DegenerateInput, "linear fit needs two equal-length series of at least 2 points");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0, rxx = 0.0, rxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        rxx += xs[i] * xs[i];
        rxy += xs[i] * ys[i];
    }
    if (sxx == 0.0) fail(ErrorCode::DegenerateInput, "xs has zero variance");
    LinearFitResult fit;
    if (withIntercept) {
        fit.slope = sxy / sxx;
        fit.intercept = my - fit.slope * mx;
    } else {
        fit.slope = rxy / rxx;
    }
    fit.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : std::numeric_limits<double>::quiet_NaN();
    return fit;
}

}  // namespace ammfee
