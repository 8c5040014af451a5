// Walks through the library end to end: simulate an LP position against a
// synthetic price feed, read the fee volatility off realized fees, then quote
// and auction a fixed-for-floating swap on the next day's fees.

#include "ammfee/ammfee.hpp"

#include <cstdio>

using namespace ammfee;

int main() {
    const GbmParams market{0.0, 0.6, 0.0, 0.0};
    TickGenConfig feed;
    feed.durationSeconds = 7 * 86400;
    feed.intervalSeconds = 5;
    feed.spread = 0.0002;
    const auto ticks = genSyntheticTicks(market, feed);

    const SimLedger ledger = runSimulation(AmmCurve::cpmm(1.0), ticks, 0.0005);
    WindowConfig wc;
    wc.windowSeconds = 86400;
    wc.strideSeconds = 86400;
    auto windows = rollingWindows(ledger, wc);
    annotateFeeVolatility(windows, ledger);

    std::printf("%-4s %10s %10s %9s %9s\n", "day", "fees $", "LVR $", "hist vol", "fee vol");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const WindowStat& w = windows[i];
        std::printf("%-4zu %10.5f %10.5f %9.3f %9.3f\n", i, w.fees, w.lvr, w.histVol, w.feeVol);
    }

    // A one-day swap on a $100 position at the last window's fee volatility.
    SwapSpec spec{ledger.curve};
    spec.maturityT = 86400.0 / kSecondsPerYear;
    spec.p0x = ledger.entries.back().spot;
    const double sigma = windows.back().feeVol;
    const double fair = floatingLegValue(spec, sigma);
    std::printf("\nfair fixed leg for one day at sigma %.3f: $%.5f per position\n", sigma, fair);
    std::printf("implied vol back from that price: %.6f\n", impliedVol(spec, fair));

    const std::vector<SwapOrder> book{
        {"lp-a", OrderSide::OfferFloating, Price::fromDouble(fair * 0.98), Quantity::parse("3"), 1},
        {"lp-b", OrderSide::OfferFloating, Price::fromDouble(fair * 1.05), Quantity::parse("2"), 2},
        {"desk", OrderSide::BidFixed, Price::fromDouble(fair * 1.01), Quantity::parse("4"), 3},
    };
    const ClearingResult cleared = clearBatch(book);
    std::printf("auction clears %s positions at $%s\n", cleared.matchedQuantity.toString().c_str(),
                cleared.clearingPrice ? cleared.clearingPrice->toString().c_str() : "-");
}
