// Sealed-bid uniform-price batch auction for the fixed leg of fee swaps, and
// arbitrage screening of quoted fixed legs.
#pragma once

#include "ammfee/errors.hpp"
#include "ammfee/fixed_decimal.hpp"
#include "ammfee/implied.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace ammfee {

using Quantity = FixedDecimal<18>;
using Price = FixedDecimal<8>;

enum class OrderSide {
    OfferFloating,  // LP selling its fee stream; asks at least limitPrice per token
    BidFixed,       // buyer paying the fixed leg; pays at most limitPrice per token
};

inline std::string toString(OrderSide side) { return side == OrderSide::OfferFloating ? "ask" : "bid"; }

struct SwapOrder {
    std::string orderId;
    OrderSide side = OrderSide::OfferFloating;
    Price limitPrice;
    Quantity quantity;
    std::int64_t timestamp = 0;
};

struct Allocation {
    std::string orderId;
    OrderSide side = OrderSide::OfferFloating;
    Price limitPrice;
    Quantity requested;
    Quantity filled;
};

struct ClearingResult {
    std::optional<Price> clearingPrice;
    Quantity matchedQuantity;
    std::vector<Allocation> allocations;  // one per order, in input order
    std::vector<SwapOrder> unmatched;     // residual quantities still on the book
};

inline void validateOrders(std::span<const SwapOrder> orders) {
    std::unordered_set<std::string> ids;
    for (const SwapOrder& o : orders) {
        if (o.orderId.empty()) fail(ErrorCode::InvalidArgument, "order id must be nonempty");
        if (!ids.insert(o.orderId).second) fail(ErrorCode::InvalidArgument, "duplicate order id '" + o.orderId + "'");
        if (o.quantity <= Quantity{}) fail(ErrorCode::InvalidArgument, "order '" + o.orderId + "' needs quantity > 0");
        if (o.limitPrice < Price{}) fail(ErrorCode::InvalidArgument, "order '" + o.orderId + "' needs limit >= 0");
    }
}

/// Volume that would trade at price p: min(asks at or below p, bids at or above p).
inline Quantity matchedAt(std::span<const SwapOrder> orders, Price p) {
    Quantity supply, demand;
    for (const SwapOrder& o : orders) {
        if (o.side == OrderSide::OfferFloating && o.limitPrice <= p) supply += o.quantity;
        if (o.side == OrderSide::BidFixed && o.limitPrice >= p) demand += o.quantity;
    }
    return std::min(supply, demand);
}

namespace detail {

/// Fills `target` raw units across `idx` (already in priority order) level by
/// level; the marginal level is split pro-rata by floor with leftover units
/// going one each to the earliest orders (ties by id).
inline void rationSide(std::span<const SwapOrder> orders, std::vector<std::size_t> idx, Quantity::Raw target,
                       std::vector<Quantity::Raw>& filled) {
    std::size_t i = 0;
    while (i < idx.size() && target > 0) {
        std::size_t j = i;
        Quantity::Raw levelTotal = 0;
        while (j < idx.size() && orders[idx[j]].limitPrice == orders[idx[i]].limitPrice) {
            levelTotal += orders[idx[j]].quantity.raw();
            ++j;
        }
        if (levelTotal <= target) {
            for (std::size_t k = i; k < j; ++k) filled[idx[k]] = orders[idx[k]].quantity.raw();
            target -= levelTotal;
        } else {
            Quantity::Raw given = 0;
            for (std::size_t k = i; k < j; ++k) {
                const auto share = Quantity::mulDivFloor(orders[idx[k]].quantity.raw(), target, levelTotal);
                filled[idx[k]] = share;
                given += share;
            }
            std::vector<std::size_t> byTime(idx.begin() + static_cast<std::ptrdiff_t>(i),
                                            idx.begin() + static_cast<std::ptrdiff_t>(j));
            std::sort(byTime.begin(), byTime.end(), [&](std::size_t a, std::size_t b) {
                if (orders[a].timestamp != orders[b].timestamp) return orders[a].timestamp < orders[b].timestamp;
                return orders[a].orderId < orders[b].orderId;
            });
            for (std::size_t k = 0; given < target; k = (k + 1) % byTime.size()) {
                if (filled[byTime[k]] < orders[byTime[k]].quantity.raw()) {
                    ++filled[byTime[k]];
                    ++given;
                }
            }
            target = 0;
        }
        i = j;
    }
}

}  // namespace detail

/// Uniform-price clearing that maximizes matched volume. When several prices
/// clear the same maximal volume, the midpoint of that price interval is used
/// (rounded down to the price grid). The long side is filled in price
/// priority and its marginal level is rationed pro-rata.
inline ClearingResult clearBatch(std::span<const SwapOrder> orders) {
    validateOrders(orders);
    ClearingResult result;

    std::vector<Price> candidates;
    for (const SwapOrder& o : orders) candidates.push_back(o.limitPrice);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    Quantity best;
    std::optional<Price> lo, hi;
    for (Price p : candidates) {
        const Quantity m = matchedAt(orders, p);
        if (m > best) {
            best = m;
            lo = hi = p;
        } else if (m == best && lo) {
            hi = p;
        }
    }

    std::vector<Quantity::Raw> filled(orders.size(), 0);
    if (best > Quantity{}) {
        const Price price = Price::fromRaw(lo->raw() + (hi->raw() - lo->raw()) / 2);
        result.clearingPrice = price;
        result.matchedQuantity = best;

        std::vector<std::size_t> asks, bids;
        for (std::size_t i = 0; i < orders.size(); ++i) {
            const SwapOrder& o = orders[i];
            if (o.side == OrderSide::OfferFloating && o.limitPrice <= price) asks.push_back(i);
            if (o.side == OrderSide::BidFixed && o.limitPrice >= price) bids.push_back(i);
        }
        std::stable_sort(asks.begin(), asks.end(),
                         [&](std::size_t a, std::size_t b) { return orders[a].limitPrice < orders[b].limitPrice; });
        std::stable_sort(bids.begin(), bids.end(),
                         [&](std::size_t a, std::size_t b) { return orders[a].limitPrice > orders[b].limitPrice; });
        detail::rationSide(orders, std::move(asks), best.raw(), filled);
        detail::rationSide(orders, std::move(bids), best.raw(), filled);
    }

    for (std::size_t i = 0; i < orders.size(); ++i) {
        const SwapOrder& o = orders[i];
        const Quantity f = Quantity::fromRaw(filled[i]);
        result.allocations.push_back({o.orderId, o.side, o.limitPrice, o.quantity, f});
        if (f < o.quantity) {
            SwapOrder rest = o;
            rest.quantity = o.quantity - f;
            result.unmatched.push_back(rest);
        }
    }
    return result;
}

enum class QuoteVerdict { Ok, SingleAssetArbitrage, CorrelationBoundViolation };

inline std::string toString(QuoteVerdict v) {
    switch (v) {
    case QuoteVerdict::Ok: return "Ok";
    case QuoteVerdict::SingleAssetArbitrage: return "SingleAssetArbitrage";
    case QuoteVerdict::CorrelationBoundViolation: return "CorrelationBoundViolation";
    }
    return "Unknown";
}

struct AssetVols {
    double sigmaX = 0.0;
    double sigmaY = 0.0;
};

/// Screens a quoted fixed leg: negative, or at or above the position value,
/// it is a risk-free profit; with both asset vols known it must also lie in the
/// interval spanned by correlations in [-1, 1].
inline QuoteVerdict validateQuote(double piBar, const SwapSpec& spec, std::optional<AssetVols> vols = std::nullopt,
                                  const McConfig& mc = {}) {
    spec.validate();
    if (!(piBar >= 0.0 && piBar < spec.positionValue())) return QuoteVerdict::SingleAssetArbitrage;
    if (vols) {
        const PriceBounds b = impliedCorrBounds(spec, vols->sigmaX, vols->sigmaY, mc);
        if (piBar < b.lo || piBar > b.hi) return QuoteVerdict::CorrelationBoundViolation;
    }
    return QuoteVerdict::Ok;
}

}  // namespace ammfee
