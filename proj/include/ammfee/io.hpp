// CSV and JSON plumbing for ticks, pool events, ledgers, windows, orders and
// curve/parameter records, plus a seeded synthetic tick generator.
#pragma once

#include "ammfee/amm_curve.hpp"
#include "ammfee/auction.hpp"
#include "ammfee/errors.hpp"
#include "ammfee/lvr.hpp"
#include "ammfee/market_sim.hpp"
#include "ammfee/random.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ammfee {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting

/// Shortest round-trip text for a double ("nan" for NaN).
inline std::string formatDouble(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// ---------------------------------------------------------------------------
// CSV reading

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> splitCsv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] inline void csvFail(std::size_t lineNo, const std::string& what) {
    fail(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": " + what);
}

inline double parseDouble(std::string_view field, std::size_t lineNo, const char* name) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        csvFail(lineNo, std::string("invalid ") + name + " '" + std::string(field) + "'");
    }
    return v;
}

inline std::int64_t parseInt(std::string_view field, std::size_t lineNo, const char* name) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        csvFail(lineNo, std::string("invalid ") + name + " '" + std::string(field) + "'");
    }
    return v;
}

/// Calls row(fields, lineNo) for each nonblank data line after checking the header.
template <class RowFn>
void readCsv(std::istream& in, const std::vector<std::string_view>& header, RowFn&& row) {
    std::string line;
    std::size_t lineNo = 0;
    bool sawHeader = false;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        auto fields = splitCsv(view);
        if (!sawHeader) {
            if (fields != header) {
                std::string expected;
                for (std::size_t i = 0; i < header.size(); ++i) expected += (i ? "," : "") + std::string(header[i]);
                csvFail(lineNo, "expected header '" + expected + "'");
            }
            sawHeader = true;
            continue;
        }
        if (fields.size() != header.size()) {
            csvFail(lineNo, "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
        }
        row(fields, lineNo);
    }
    if (!sawHeader) fail(ErrorCode::EmptyInput, "missing CSV header");
}

inline std::ifstream openInput(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
    return in;
}

inline std::ofstream openOutput(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    return out;
}

}  // namespace detail

/// Reads `timestamp,bid,ask` rows and validates the resulting series.
inline std::vector<QuoteTick> readTicksCsv(std::istream& in) {
    std::vector<QuoteTick> ticks;
    detail::readCsv(in, {"timestamp", "bid", "ask"}, [&](const auto& f, std::size_t line) {
        QuoteTick t{detail::parseInt(f[0], line, "timestamp"), detail::parseDouble(f[1], line, "bid"),
                    detail::parseDouble(f[2], line, "ask")};
        if (!isPositiveFinite(t.bid) || !isPositiveFinite(t.ask) || t.bid > t.ask) {
            detail::csvFail(line, "quotes need 0 < bid <= ask");
        }
        if (!ticks.empty() && t.timestamp <= ticks.back().timestamp) {
            fail(ErrorCode::UnsortedInput, "line " + std::to_string(line) + ": timestamps must be strictly increasing");
        }
        ticks.push_back(t);
    });
    if (ticks.empty()) fail(ErrorCode::EmptyInput, "tick file has no rows");
    return ticks;
}

inline std::vector<QuoteTick> readTicksCsv(const std::string& path) {
    auto in = detail::openInput(path);
    return readTicksCsv(in);
}

inline void writeTicksCsv(std::ostream& out, std::span<const QuoteTick> ticks) {
    out << "timestamp,bid,ask\n";
    for (const QuoteTick& t : ticks) out << t.timestamp << ',' << formatDouble(t.bid) << ',' << formatDouble(t.ask) << '\n';
}

inline std::vector<PoolEvent> readPoolEventsCsv(std::istream& in) {
    std::vector<PoolEvent> events;
    detail::readCsv(in, {"timestamp", "price", "fee_x", "fee_y"}, [&](const auto& f, std::size_t line) {
        PoolEvent e{detail::parseInt(f[0], line, "timestamp"), detail::parseDouble(f[1], line, "price"),
                    detail::parseDouble(f[2], line, "fee_x"), detail::parseDouble(f[3], line, "fee_y")};
        if (!isPositiveFinite(e.price) || !(e.feeX >= 0.0) || !(e.feeY >= 0.0)) {
            detail::csvFail(line, "need price > 0 and nonnegative fees");
        }
        if (!events.empty() && e.timestamp <= events.back().timestamp) {
            fail(ErrorCode::UnsortedInput, "line " + std::to_string(line) + ": timestamps must be strictly increasing");
        }
        events.push_back(e);
    });
    if (events.empty()) fail(ErrorCode::EmptyInput, "pool-event file has no rows");
    return events;
}

inline std::vector<PoolEvent> readPoolEventsCsv(const std::string& path) {
    auto in = detail::openInput(path);
    return readPoolEventsCsv(in);
}

inline void writeLedgerCsv(std::ostream& out, const SimLedger& ledger) {
    out << "timestamp,spot,cum_fees_usd,cum_lvr_usd\n";
    for (const LedgerEntry& e : ledger.entries) {
        out << e.timestamp << ',' << formatDouble(e.spot) << ',' << formatDouble(e.cumFeesUsd) << ','
            << formatDouble(e.cumLvrUsd) << '\n';
    }
}

inline void writeWindowsCsv(std::ostream& out, std::span<const WindowStat> windows) {
    out << "start,end,fees,lvr,hist_vol,fee_vol\n";
    for (const WindowStat& w : windows) {
        out << w.windowStart << ',' << w.windowEnd << ',' << formatDouble(w.fees) << ',' << formatDouble(w.lvr)
            << ',' << formatDouble(w.histVol) << ',' << formatDouble(w.feeVol) << '\n';
    }
}

inline std::vector<WindowStat> readWindowsCsv(std::istream& in) {
    std::vector<WindowStat> rows;
    auto optional = [](std::string_view field, std::size_t line, const char* name) {
        if (field.empty() || field == "nan" || field == "NaN") return std::numeric_limits<double>::quiet_NaN();
        return detail::parseDouble(field, line, name);
    };
    detail::readCsv(in, {"start", "end", "fees", "lvr", "hist_vol", "fee_vol"}, [&](const auto& f, std::size_t line) {
        WindowStat w;
        w.windowStart = detail::parseInt(f[0], line, "start");
        w.windowEnd = detail::parseInt(f[1], line, "end");
        w.fees = detail::parseDouble(f[2], line, "fees");
        w.lvr = detail::parseDouble(f[3], line, "lvr");
        w.histVol = optional(f[4], line, "hist_vol");
        w.feeVol = optional(f[5], line, "fee_vol");
        rows.push_back(w);
    });
    return rows;
}

inline std::vector<WindowStat> readWindowsCsv(const std::string& path) {
    auto in = detail::openInput(path);
    return readWindowsCsv(in);
}

/// Reads `order_id,side,limit_price,quantity,timestamp`. Side is ask or
/// offer_floating, bid or bid_fixed (case-insensitive).
inline std::vector<SwapOrder> readOrdersCsv(std::istream& in) {
    std::vector<SwapOrder> orders;
    std::unordered_set<std::string> ids;
    detail::readCsv(in, {"order_id", "side", "limit_price", "quantity", "timestamp"},
                    [&](const auto& f, std::size_t line) {
                        SwapOrder o;
                        o.orderId = std::string(f[0]);
                        if (o.orderId.empty()) detail::csvFail(line, "empty order_id");
                        if (!ids.insert(o.orderId).second) {
                            fail(ErrorCode::InvalidArgument,
                                 "line " + std::to_string(line) + ": duplicate order_id '" + o.orderId + "'");
                        }
                        std::string side(f[1]);
                        for (char& c : side) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                        if (side == "ask" || side == "offer_floating" || side == "offerfloating") {
                            o.side = OrderSide::OfferFloating;
                        } else if (side == "bid" || side == "bid_fixed" || side == "bidfixed") {
                            o.side = OrderSide::BidFixed;
                        } else {
                            detail::csvFail(line, "unknown side '" + std::string(f[1]) + "'");
                        }
                        try {
                            o.limitPrice = Price::parse(f[2]);
                            o.quantity = Quantity::parse(f[3]);
                        } catch (const Error& e) {
                            detail::csvFail(line, e.detail());
                        }
                        if (o.limitPrice < Price{}) detail::csvFail(line, "limit_price must be nonnegative");
                        if (o.quantity <= Quantity{}) detail::csvFail(line, "quantity must be positive");
                        o.timestamp = detail::parseInt(f[4], line, "timestamp");
                        orders.push_back(std::move(o));
                    });
    return orders;
}

inline std::vector<SwapOrder> readOrdersCsv(const std::string& path) {
    auto in = detail::openInput(path);
    return readOrdersCsv(in);
}

inline Json clearingResultToJson(const ClearingResult& r) {
    Json out;
    out["clearing_price"] = r.clearingPrice ? Json(r.clearingPrice->toString()) : Json(nullptr);
    out["matched_quantity"] = r.matchedQuantity.toString();
    out["allocations"] = Json::array();
    for (const Allocation& a : r.allocations) {
        out["allocations"].push_back({{"order_id", a.orderId},
                                      {"side", toString(a.side)},
                                      {"limit_price", a.limitPrice.toString()},
                                      {"requested", a.requested.toString()},
                                      {"filled", a.filled.toString()}});
    }
    out["unmatched"] = Json::array();
    for (const SwapOrder& o : r.unmatched) {
        out["unmatched"].push_back({{"order_id", o.orderId},
                                    {"side", toString(o.side)},
                                    {"limit_price", o.limitPrice.toString()},
                                    {"quantity", o.quantity.toString()},
                                    {"timestamp", o.timestamp}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON records

namespace detail {

inline double requireNumber(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        fail(ErrorCode::ParseError, std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

inline double numberOr(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be numeric");
    return j.at(key).get<double>();
}

inline Json parseJson(std::istream& in) {
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::ParseError, e.what());
    }
}

}  // namespace detail

/// {"kind": "cpmm"|"concentrated"|"stableswap", "L", "pL", "pU", "A", "D", "center"};
/// keys that do not apply to the kind are ignored.
inline AmmCurve curveFromJson(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        fail(ErrorCode::ParseError, "curve needs a string field 'kind'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cpmm") return AmmCurve::cpmm(detail::numberOr(j, "L", 1.0));
    if (kind == "concentrated") {
        return AmmCurve::concentrated(detail::numberOr(j, "L", 1.0), detail::requireNumber(j, "pL"),
                                      detail::requireNumber(j, "pU"));
    }
    if (kind == "stableswap") {
        return AmmCurve::stableSwap(detail::requireNumber(j, "A"), detail::numberOr(j, "D", 2.0),
                                    detail::numberOr(j, "center", 1.0));
    }
    fail(ErrorCode::ParseError, "unknown curve kind '" + kind + "'");
}

inline Json curveToJson(const AmmCurve& curve) {
    return curve.visit([](const auto& m) -> Json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CpmmModel>) {
            return {{"kind", "cpmm"}, {"L", m.liquidity()}};
        } else if constexpr (std::is_same_v<M, ConcentratedModel>) {
            return {{"kind", "concentrated"}, {"L", m.liquidity()}, {"pL", m.priceLow()}, {"pU", m.priceHigh()}};
        } else {
            return {{"kind", "stableswap"}, {"A", m.amplification()}, {"D", m.invariant()}, {"center", m.priceCenter()}};
        }
    });
}

inline AmmCurve readCurveJson(const std::string& path) {
    auto in = detail::openInput(path);
    return curveFromJson(detail::parseJson(in));
}

inline GbmParams gbmParamsFromJson(const Json& j) {
    if (!j.is_object()) fail(ErrorCode::ParseError, "GBM parameters must be a JSON object");
    GbmParams p{detail::numberOr(j, "r", 0.0), detail::numberOr(j, "sigmaX", 0.0), detail::numberOr(j, "sigmaY", 0.0),
                detail::numberOr(j, "rho", 0.0)};
    p.validate();
    return p;
}

inline GbmParams readGbmParamsJson(const std::string& path) {
    auto in = detail::openInput(path);
    return gbmParamsFromJson(detail::parseJson(in));
}

// ---------------------------------------------------------------------------
// Synthetic data

struct TickGenConfig {
    double p0 = 100.0;
    double spread = 0.0;  // full relative spread
    std::int64_t startTimestamp = 1'700'000'000;
    std::int64_t durationSeconds = 86400;
    std::int64_t intervalSeconds = 1;
    std::uint64_t seed = 1;
};

/// Exact-discretization GBM for the price ratio Px / Py with drift r and the
/// effective volatility of `params`; one tick every interval including both ends.
inline std::vector<QuoteTick> genSyntheticTicks(const GbmParams& params, const TickGenConfig& config) {
    params.validate();
    if (config.durationSeconds <= 0 || config.intervalSeconds <= 0) {
        fail(ErrorCode::InvalidArgument, "duration and interval must be positive");
    }
    if (!isPositiveFinite(config.p0)) fail(ErrorCode::InvalidArgument, "p0 must be positive");
    if (!(config.spread >= 0.0 && config.spread < 2.0)) fail(ErrorCode::InvalidArgument, "spread must lie in [0, 2)");
    const double sigma = std::sqrt(effectiveVariance(params));
    const double dt = static_cast<double>(config.intervalSeconds) / kSecondsPerYear;
    const double drift = (params.r - 0.5 * sigma * sigma) * dt;
    const double diffusion = sigma * std::sqrt(dt);
    const NormalStream normals(config.seed);
    const auto steps = static_cast<std::size_t>(config.durationSeconds / config.intervalSeconds);
    std::vector<QuoteTick> ticks;
    ticks.reserve(steps + 1);
    double logMid = std::log(config.p0);
    for (std::size_t k = 0; k <= steps; ++k) {
        if (k > 0) logMid += drift + diffusion * normals(k - 1);
        const double mid = std::exp(logMid);
        ticks.push_back({config.startTimestamp + static_cast<std::int64_t>(k) * config.intervalSeconds,
                         mid * (1.0 - 0.5 * config.spread), mid * (1.0 + 0.5 * config.spread)});
    }
    return ticks;
}

}  // namespace ammfee
