// Command-line front end. runCli is the whole program minus main(), so the
// commands can be driven from tests with in-memory streams.
#pragma once

#include "ammfee/auction.hpp"
#include "ammfee/errors.hpp"
#include "ammfee/implied.hpp"
#include "ammfee/io.hpp"
#include "ammfee/market_sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ammfee {

/// Process exit status for each failure class.
inline int exitCodeFor(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::RangeError: return 2;
    case ErrorCode::InsufficientData:
    case ErrorCode::EmptyInput:
    case ErrorCode::UnsortedInput:
    case ErrorCode::DegenerateInput: return 3;
    case ErrorCode::ArbitrageViolation: return 4;
    case ErrorCode::OutOfBounds: return 5;
    case ErrorCode::NoConvergence: return 6;
    case ErrorCode::DomainError:
    case ErrorCode::DegenerateCurve: return 7;
    }
    return 1;
}

namespace cli {

inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

/// Writes JSON to `path`, or to `fallback` when the path is empty or "-".
inline void emitJson(const Json& j, const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << j.dump(2) << '\n';
        return;
    }
    auto out = detail::openOutput(path);
    out << j.dump(2) << '\n';
}

inline Json readJsonFile(const std::string& path) {
    if (path == "-") return detail::parseJson(std::cin);
    auto in = detail::openInput(path);
    return detail::parseJson(in);
}

struct SimulateOptions {
    std::string ticksPath;
    std::string poolEventsPath;
    std::string curvePath;
    double feeBps = 30.0;
    double windowDays = 30.0;
    std::int64_t windowSeconds = 0;
    std::int64_t strideSeconds = 3600;
    double histIntervalSeconds = 3600.0;
    bool zeroMeanVol = false;
    std::string valuation;
    double investment = 100.0;
    std::string ledgerOut;
    std::string windowsOut;
    bool feeVol = false;
    std::size_t paths = 20000;
    std::uint64_t seed = 42;
};

inline void runSimulate(const SimulateOptions& o, std::ostream& out) {
    const AmmCurve curve = readCurveJson(o.curvePath);
    if (!(o.feeBps >= 0.0 && o.feeBps < 10000.0)) fail(ErrorCode::InvalidArgument, "--fee-bps must lie in [0, 10000)");

    SimLedger ledger{curve, 0.0, {}, {}};
    std::size_t rows = 0;
    std::string valuation = o.valuation;
    if (!o.ticksPath.empty()) {
        if (valuation.empty()) valuation = "bidask";
        SimConfig config;
        if (valuation == "spot") {
            config.valuation = LvrValuation::PoolSpot;
        } else if (valuation != "bidask") {
            fail(ErrorCode::InvalidArgument, "--valuation must be 'spot' or 'bidask'");
        }
        config.initialInvestment = o.investment;
        config.recordFills = false;
        const auto ticks = readTicksCsv(o.ticksPath);
        rows = ticks.size();
        ledger = runSimulation(curve, ticks, o.feeBps / 10000.0, config);
    } else {
        if (valuation.empty()) valuation = "spot";
        if (valuation != "spot") fail(ErrorCode::InvalidArgument, "pool-event replay marks LVR at pool spot only");
        const auto events = readPoolEventsCsv(o.poolEventsPath);
        rows = events.size();
        ledger = replayPoolEvents(curve, events, o.investment);
    }
    if (!o.ledgerOut.empty()) {
        auto f = detail::openOutput(o.ledgerOut);
        writeLedgerCsv(f, ledger);
    }

    WindowConfig wc;
    wc.windowSeconds = o.windowSeconds > 0 ? o.windowSeconds : static_cast<std::int64_t>(std::llround(o.windowDays * 86400.0));
    wc.strideSeconds = o.strideSeconds;
    wc.histIntervalSeconds = o.histIntervalSeconds;
    wc.zeroMeanVol = o.zeroMeanVol;
    auto windows = rollingWindows(ledger, wc);
    if (o.feeVol) {
        McConfig mc;
        mc.numPaths = o.paths;
        mc.seed = o.seed;
        annotateFeeVolatility(windows, ledger, mc);
    }
    if (!o.windowsOut.empty()) {
        auto f = detail::openOutput(o.windowsOut);
        writeWindowsCsv(f, windows);
    }

    const LedgerEntry& last = ledger.entries.back();
    Json summary{{"rows", rows},
                 {"valuation", valuation},
                 {"fee_rate", ledger.feeRate},
                 {"curve", curveToJson(ledger.curve)},
                 {"total_fees_usd", last.cumFeesUsd},
                 {"total_lvr_usd", last.cumLvrUsd},
                 {"window_seconds", wc.windowSeconds},
                 {"stride_seconds", wc.strideSeconds},
                 {"windows", windows.size()}};
    out << summary.dump(2) << '\n';
}

inline Json fitJson(const std::vector<double>& xs, const std::vector<double>& ys) {
    const LinearFitResult origin = linearFit(xs, ys, false);
    const LinearFitResult affine = linearFit(xs, ys, true);
    return {{"n", xs.size()},
            {"correlation", number(affine.correlation)},
            {"slope_origin", origin.slope},
            {"slope", affine.slope},
            {"intercept", affine.intercept}};
}

inline void runAnalyze(const std::string& windowsPath, const std::string& outPath, std::ostream& out) {
    const auto windows = readWindowsCsv(windowsPath);
    if (windows.size() < 2) fail(ErrorCode::InsufficientData, "analysis needs at least two windows");
    std::vector<double> fees, lvr, hist, feeVol;
    for (const WindowStat& w : windows) {
        fees.push_back(w.fees);
        lvr.push_back(w.lvr);
        if (std::isfinite(w.histVol) && std::isfinite(w.feeVol)) {
            hist.push_back(w.histVol);
            feeVol.push_back(w.feeVol);
        }
    }
    Json report{{"windows", windows.size()}, {"lvr_vs_fees", fitJson(fees, lvr)}};
    if (hist.size() >= 2) {
        report["fee_vol_vs_hist_vol"] = fitJson(hist, feeVol);
        report["pairs"] = {{"hist_vol", hist}, {"fee_vol", feeVol}};
    }
    emitJson(report, outPath, out);
}

struct SolveOptions {
    std::string requestPath;
    std::string outPath;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    double tol = 1e-10;
};

struct SolveInputs {
    SwapSpec spec;
    McConfig mc;
};

inline SolveInputs solveInputs(const Json& req, const SolveOptions& o) {
    if (!req.is_object()) fail(ErrorCode::ParseError, "request must be a JSON object");
    const AmmCurve curve = req.contains("curve") ? curveFromJson(req.at("curve")) : AmmCurve::cpmm(1.0);
    SolveInputs in{SwapSpec{curve}, McConfig{}};
    in.spec.maturityT = detail::requireNumber(req, "T");
    in.spec.p0x = detail::numberOr(req, "p0x", 1.0);
    in.spec.p0y = detail::numberOr(req, "p0y", 1.0);
    in.spec.r = detail::numberOr(req, "r", 0.0);
    in.spec.liquidityTokens = detail::numberOr(req, "liquidityTokens", 1.0);
    in.spec.validate();
    if (req.contains("paths")) in.mc.numPaths = req.at("paths").get<std::size_t>();
    if (req.contains("seed")) in.mc.seed = req.at("seed").get<std::uint64_t>();
    if (req.contains("antithetic")) in.mc.antithetic = req.at("antithetic").get<bool>();
    if (o.paths) in.mc.numPaths = *o.paths;
    if (o.seed) in.mc.seed = *o.seed;
    in.mc.validate();
    return in;
}

inline void runSolveVol(const SolveOptions& o, std::ostream& out) {
    const Json req = readJsonFile(o.requestPath);
    const SolveInputs in = solveInputs(req, o);
    const double piBar = detail::requireNumber(req, "piBar");
    const SolveResult r = impliedVolSolve(in.spec, piBar, in.mc, o.tol);
    Json res{{"sigma", r.value}, {"stderr", number(r.stdError)}, {"iterations", r.iterations}, {"request", req}};
    if (const auto* cp = in.spec.curve.asCpmm(); cp && in.spec.p0y == 1.0) {
        res["closed_form"] = impliedVolCpmmClosedForm(in.spec.p0x, piBar, in.spec.maturityT,
                                                      cp->liquidity() * in.spec.liquidityTokens);
    }
    emitJson(res, o.outPath, out);
}

inline void runSolveCorr(const SolveOptions& o, std::ostream& out) {
    const Json req = readJsonFile(o.requestPath);
    const SolveInputs in = solveInputs(req, o);
    const double piBar = detail::requireNumber(req, "piBar");
    const double sx = detail::requireNumber(req, "sigmaX");
    const double sy = detail::requireNumber(req, "sigmaY");
    const CorrResult r = impliedCorrSolve(in.spec, sx, sy, piBar, in.mc, o.tol);
    Json res{{"rho", r.rho},
             {"sigma_bar", r.sigmaBar},
             {"stderr", number(r.stdError)},
             {"iterations", r.iterations},
             {"bounds", {r.bounds.lo, r.bounds.hi}},
             {"request", req}};
    emitJson(res, o.outPath, out);
}

inline void runPriceSwap(const SolveOptions& o, std::ostream& out) {
    const Json req = readJsonFile(o.requestPath);
    const SolveInputs in = solveInputs(req, o);
    double sigmaBar = 0.0;
    if (req.contains("sigma")) {
        sigmaBar = detail::requireNumber(req, "sigma");
    } else {
        const GbmParams p{in.spec.r, detail::requireNumber(req, "sigmaX"), detail::requireNumber(req, "sigmaY"),
                          detail::requireNumber(req, "rho")};
        p.validate();
        sigmaBar = std::sqrt(effectiveVariance(p));
    }
    if (!(sigmaBar >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma must be nonnegative");
    const Estimate leg = floatingLegEstimate(in.spec, sigmaBar, in.mc);
    Json res{{"floating_leg", leg.value},
             {"stderr", leg.stdError},
             {"sigma_bar", sigmaBar},
             {"position_value", in.spec.positionValue()},
             {"request", req}};
    if (req.contains("piBar")) {
        std::optional<AssetVols> vols;
        if (req.contains("sigmaX") && req.contains("sigmaY")) {
            vols = AssetVols{detail::requireNumber(req, "sigmaX"), detail::requireNumber(req, "sigmaY")};
        }
        res["verdict"] = toString(validateQuote(detail::requireNumber(req, "piBar"), in.spec, vols, in.mc));
    }
    emitJson(res, o.outPath, out);
}

inline void runAuction(const std::string& ordersPath, const std::string& outPath, std::ostream& out) {
    const auto orders = readOrdersCsv(ordersPath);
    emitJson(clearingResultToJson(clearBatch(orders)), outPath, out);
}

struct GenTicksOptions {
    std::string paramsPath;
    std::optional<double> sigma;
    std::optional<double> r;
    TickGenConfig config;
    std::string outPath;
};

inline void runGenTicks(const GenTicksOptions& o, std::ostream& out) {
    GbmParams params;
    if (!o.paramsPath.empty()) params = readGbmParamsJson(o.paramsPath);
    if (o.sigma) params = GbmParams{params.r, *o.sigma, 0.0, 0.0};
    if (o.r) params.r = *o.r;
    const auto ticks = genSyntheticTicks(params, o.config);
    if (o.outPath.empty() || o.outPath == "-") {
        writeTicksCsv(out, ticks);
        return;
    }
    auto f = detail::openOutput(o.outPath);
    writeTicksCsv(f, ticks);
}

inline void reportError(std::ostream& err, std::string_view code, const std::string& detail) {
    err << Json{{"error", code}, {"detail", detail}}.dump() << '\n';
}

}  // namespace cli

/// Parses argv, runs one subcommand and returns the process exit status.
/// Failures print {"error": code, "detail": ...} on `err`.
inline int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fee and LVR analytics for automated market makers", "ammfee"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ammfee 1.0.0");

    std::function<void()> action;

    cli::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Replay ticks or pool events and emit ledger and window CSVs");
    auto* ticksOpt = simulate->add_option("--ticks", sim.ticksPath, "Tick CSV (timestamp,bid,ask)");
    auto* eventsOpt = simulate->add_option("--pool-events", sim.poolEventsPath, "Pool-event CSV (timestamp,price,fee_x,fee_y)");
    ticksOpt->excludes(eventsOpt);
    simulate->add_option("--curve", sim.curvePath, "Curve JSON")->required();
    simulate->add_option("--fee-bps", sim.feeBps, "Pool fee in basis points")->capture_default_str();
    simulate->add_option("--window-days", sim.windowDays, "Rolling window length in days")->capture_default_str();
    simulate->add_option("--window-seconds", sim.windowSeconds, "Rolling window length in seconds (overrides days)");
    simulate->add_option("--stride-seconds", sim.strideSeconds, "Offset between window starts")->capture_default_str();
    simulate->add_option("--hist-interval", sim.histIntervalSeconds, "Sampling interval for historical vol, seconds")
        ->capture_default_str();
    simulate->add_flag("--zero-mean-vol", sim.zeroMeanVol, "Do not subtract the mean log return");
    simulate->add_option("--valuation", sim.valuation, "LVR valuation: bidask (ticks default) or spot");
    simulate->add_option("--investment", sim.investment, "Initial position in dollars; 0 keeps the curve size")
        ->capture_default_str();
    simulate->add_option("--ledger-out", sim.ledgerOut, "Ledger CSV path");
    simulate->add_option("--windows-out", sim.windowsOut, "Window CSV path");
    simulate->add_flag("--fee-vol", sim.feeVol, "Compute per-window fee volatility");
    simulate->add_option("--paths", sim.paths, "Monte Carlo paths for non-CPMM fee volatility")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Monte Carlo seed")->capture_default_str();
    simulate->callback([&] {
        action = [&] {
            if (sim.ticksPath.empty() == sim.poolEventsPath.empty()) {
                fail(ErrorCode::InvalidArgument, "give exactly one of --ticks or --pool-events");
            }
            cli::runSimulate(sim, out);
        };
    });

    std::string windowsPath, analyzeOut;
    auto* analyze = app.add_subcommand("analyze", "Correlations and regressions over window statistics");
    analyze->add_option("--windows", windowsPath, "Window CSV")->required();
    analyze->add_option("--out", analyzeOut, "Report JSON path (default stdout)");
    analyze->callback([&] { action = [&] { cli::runAnalyze(windowsPath, analyzeOut, out); }; });

    cli::SolveOptions solve;
    auto addSolve = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--request", solve.requestPath, "Request JSON ('-' for stdin)")->required();
        sub->add_option("--out", solve.outPath, "Response JSON path (default stdout)");
        sub->add_option("--paths", solve.paths, "Monte Carlo paths (overrides request)");
        sub->add_option("--seed", solve.seed, "Monte Carlo seed (overrides request)");
        sub->add_option("--tol", solve.tol, "Relative solver tolerance")->capture_default_str();
        return sub;
    };
    addSolve("solve-vol", "Implied volatility for a fixed leg")->callback([&] {
        action = [&] { cli::runSolveVol(solve, out); };
    });
    addSolve("solve-corr", "Implied correlation for a fixed leg")->callback([&] {
        action = [&] { cli::runSolveCorr(solve, out); };
    });
    addSolve("price-swap", "Floating-leg value for given volatilities")->callback([&] {
        action = [&] { cli::runPriceSwap(solve, out); };
    });

    std::string ordersPath, auctionOut;
    auto* auction = app.add_subcommand("auction", "Clear a batch of fee-swap orders");
    auction->add_option("--orders", ordersPath, "Order CSV")->required();
    auction->add_option("--out", auctionOut, "Result JSON path (default stdout)");
    auction->callback([&] { action = [&] { cli::runAuction(ordersPath, auctionOut, out); }; });

    cli::GenTicksOptions gen;
    auto* genTicks = app.add_subcommand("gen-ticks", "Synthetic GBM tick CSV");
    genTicks->add_option("--params", gen.paramsPath, "GBM parameter JSON");
    genTicks->add_option("--sigma", gen.sigma, "Volatility of the price ratio (overrides --params)");
    genTicks->add_option("--r", gen.r, "Drift rate (overrides --params)");
    genTicks->add_option("--p0", gen.config.p0, "Initial mid")->capture_default_str();
    genTicks->add_option("--spread", gen.config.spread, "Relative bid/ask spread")->capture_default_str();
    genTicks->add_option("--start", gen.config.startTimestamp, "First timestamp")->capture_default_str();
    genTicks->add_option("--duration-seconds", gen.config.durationSeconds, "Series length")->capture_default_str();
    genTicks->add_option("--interval-seconds", gen.config.intervalSeconds, "Tick spacing")->capture_default_str();
    genTicks->add_option("--seed", gen.config.seed, "Random seed")->capture_default_str();
    genTicks->add_option("--out", gen.outPath, "Tick CSV path (default stdout)");
    genTicks->callback([&] { action = [&] { cli::runGenTicks(gen, out); }; });

    try {
        app.parse(argc, argv);
        if (action) action();
        return 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        cli::reportError(err, "UsageError", e.what());
        return 2;
    } catch (const Error& e) {
        cli::reportError(err, toString(e.code()), e.detail());
        return exitCodeFor(e.code());
    } catch (const nlohmann::json::exception& e) {
        cli::reportError(err, toString(ErrorCode::ParseError), e.what());
        return 2;
    } catch (const std::exception& e) {
        cli::reportError(err, "InternalError", e.what());
        return 1;
    }
}

}  // namespace ammfee
