#include "ammfee/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ammfee;
namespace fs = std::filesystem;

namespace {

const std::string kData = AMMFEE_TEST_DATA;

struct CliRun {
    int status;
    std::string out;
    std::string err;
    Json errorJson() const { return Json::parse(err); }
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "ammfee");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = runCli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

class Scratch {
public:
    Scratch() {
        dir_ = fs::temp_directory_path() /
               ("ammfee_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    ~Scratch() { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }
    static std::string read(const std::string& p) {
        std::ifstream in(p);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

private:
    fs::path dir_;
};

std::vector<std::vector<std::string>> csvRows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        rows.push_back(fields);
    }
    return rows;
}

}  // namespace

TEST(CliSimulate, QuietTicksGiveZeroLedger) {
    Scratch s;
    const CliRun r = run({"simulate", "--ticks", kData + "/ticks_flat.csv", "--curve", kData + "/curve_cpmm.json",
                       "--window-seconds", "2", "--ledger-out", s.path("ledger.csv"), "--windows-out",
                       s.path("windows.csv")});
    ASSERT_EQ(r.status, 0) << r.err;
    const Json summary = Json::parse(r.out);
    EXPECT_EQ(summary["rows"], 3);
    EXPECT_EQ(summary["total_fees_usd"], 0.0);
    EXPECT_EQ(summary["total_lvr_usd"], 0.0);
    const auto ledger = csvRows(Scratch::read(s.path("ledger.csv")));
    ASSERT_EQ(ledger.size(), 4u);
    for (std::size_t i = 1; i < ledger.size(); ++i) {
        EXPECT_EQ(ledger[i][2], "0");
        EXPECT_EQ(ledger[i][3], "0");
    }
    const auto windows = csvRows(Scratch::read(s.path("windows.csv")));
    ASSERT_EQ(windows.size(), 2u);
    EXPECT_EQ(windows[1][2], "0");
    EXPECT_EQ(windows[1][3], "0");
}

TEST(CliSimulate, WindowCountFollowsSpanAndStride) {
    Scratch s;
    const std::string ticks = s.path("ticks.csv");
    ASSERT_EQ(run({"gen-ticks", "--sigma", "0.6", "--duration-seconds", "172800", "--interval-seconds", "60",
                   "--spread", "0.0004", "--out", ticks})
                  .status,
              0);
    const std::int64_t span = 172800, window = 86400, stride = 3600;
    const CliRun r = run({"simulate", "--ticks", ticks, "--curve", kData + "/curve_cpmm.json", "--fee-bps", "5",
                       "--window-days", "1", "--stride-seconds", std::to_string(stride), "--windows-out",
                       s.path("windows.csv")});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto expected = static_cast<std::size_t>((span - window) / stride + 1);
    EXPECT_EQ(Json::parse(r.out)["windows"], expected);
    EXPECT_EQ(csvRows(Scratch::read(s.path("windows.csv"))).size(), expected + 1);
}

TEST(CliSimulate, DeterministicOutputs) {
    Scratch s;
    const std::string ticks = s.path("ticks.csv");
    run({"gen-ticks", "--sigma", "0.5", "--duration-seconds", "20000", "--interval-seconds", "10", "--out", ticks});
    auto once = [&](const std::string& tag) {
        const CliRun r = run({"simulate", "--ticks", ticks, "--curve", kData + "/curve_cpmm.json", "--window-seconds",
                           "3600", "--ledger-out", s.path(tag + "_l.csv"), "--windows-out", s.path(tag + "_w.csv")});
        EXPECT_EQ(r.status, 0) << r.err;
        return r.out + Scratch::read(s.path(tag + "_l.csv")) + Scratch::read(s.path(tag + "_w.csv"));
    };
    EXPECT_EQ(once("a"), once("b"));
}

TEST(CliSimulate, MalformedRowExitsTwoWithLineNumber) {
    const CliRun r = run({"simulate", "--ticks", kData + "/ticks_malformed.csv", "--curve", kData + "/curve_cpmm.json"});
    EXPECT_EQ(r.status, 2);
    const Json e = r.errorJson();
    EXPECT_EQ(e["error"], "ParseError");
    EXPECT_NE(e["detail"].get<std::string>().find("line 3"), std::string::npos);
}

TEST(CliSimulate, UsageErrors) {
    EXPECT_EQ(run({"simulate", "--curve", kData + "/curve_cpmm.json"}).status, 2);
    EXPECT_EQ(run({"simulate", "--ticks", kData + "/ticks_flat.csv"}).status, 2);
    EXPECT_EQ(run({"simulate", "--ticks", kData + "/ticks_flat.csv", "--curve", kData + "/curve_cpmm.json",
                   "--valuation", "mid"})
                  .status,
              2);
    EXPECT_EQ(run({"frobnicate"}).errorJson()["error"], "UsageError");
    EXPECT_EQ(run({}).status, 2);
}

TEST(CliSimulate, WindowLongerThanDataIsInsufficient) {
    const CliRun r = run({"simulate", "--ticks", kData + "/ticks_flat.csv", "--curve", kData + "/curve_cpmm.json"});
    EXPECT_EQ(r.status, 3);
    EXPECT_EQ(r.errorJson()["error"], "InsufficientData");
}

TEST(CliAnalyze, IdenticalColumns) {
    Scratch s;
    const std::string w = s.write("w.csv",
                                  "start,end,fees,lvr,hist_vol,fee_vol\n"
                                  "0,10,1.5,1.5,0.4,0.41\n1,11,2.5,2.5,0.5,0.52\n2,12,0.7,0.7,0.6,0.59\n");
    const CliRun r = run({"analyze", "--windows", w});
    ASSERT_EQ(r.status, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_NEAR(j["lvr_vs_fees"]["correlation"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["lvr_vs_fees"]["slope"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["lvr_vs_fees"]["slope_origin"].get<double>(), 1.0, 1e-12);
    EXPECT_EQ(j["pairs"]["hist_vol"].size(), 3u);
    EXPECT_GT(j["fee_vol_vs_hist_vol"]["correlation"].get<double>(), 0.9);
}

TEST(CliAnalyze, ProportionalLvr) {
    Scratch s;
    std::string text = "start,end,fees,lvr,hist_vol,fee_vol\n";
    for (int i = 0; i < 6; ++i) {
        const double fees = 1.0 + i * i * 0.3;
        text += std::to_string(i) + "," + std::to_string(i + 10) + "," + formatDouble(fees) + "," +
                formatDouble(0.97 * fees) + ",nan,nan\n";
    }
    const CliRun r = run({"analyze", "--windows", s.write("w.csv", text), "--out", s.path("report.json")});
    ASSERT_EQ(r.status, 0) << r.err;
    const Json j = Json::parse(Scratch::read(s.path("report.json")));
    EXPECT_NEAR(j["lvr_vs_fees"]["slope_origin"].get<double>(), 0.97, 1e-12);
    EXPECT_NEAR(j["lvr_vs_fees"]["slope"].get<double>(), 0.97, 1e-12);
    EXPECT_NEAR(j["lvr_vs_fees"]["intercept"].get<double>(), 0.0, 1e-12);
    EXPECT_FALSE(j.contains("fee_vol_vs_hist_vol"));
}

TEST(CliAnalyze, SingleRowIsInsufficient) {
    Scratch s;
    const CliRun r =
        run({"analyze", "--windows", s.write("w.csv", "start,end,fees,lvr,hist_vol,fee_vol\n0,1,1,1,nan,nan\n")});
    EXPECT_EQ(r.status, 3);
    EXPECT_EQ(r.errorJson()["error"], "InsufficientData");
}

TEST(CliSolve, CpmmImpliedVol) {
    Scratch s;
    const CliRun r = run({"solve-vol", "--request", s.write("req.json", R"({"piBar": 1, "p0x": 1, "T": 1})")});
    ASSERT_EQ(r.status, 0) << r.err;
    const Json j = Json::parse(r.out);
    // 2 (1 - exp(-sigma^2 / 8)) = 1 at sigma = sqrt(8 ln 2).
    EXPECT_NEAR(j["sigma"].get<double>(), std::sqrt(8.0 * std::log(2.0)), 1e-8);
    EXPECT_NEAR(j["sigma"].get<double>(), 2.3548, 5e-5);
    EXPECT_NEAR(j["closed_form"].get<double>(), j["sigma"].get<double>(), 1e-8);
    EXPECT_EQ(j["request"]["piBar"], 1);
}

TEST(CliSolve, AboveTwoIsArbitrage) {
    Scratch s;
    const CliRun r = run({"solve-vol", "--request", s.write("req.json", R"({"piBar": 2.1, "p0x": 1, "T": 1})")});
    EXPECT_EQ(r.status, 4);
    EXPECT_EQ(r.errorJson()["error"], "ArbitrageViolation");
}

TEST(CliSolve, CorrelationAtBoundEndpoints) {
    Scratch s;
    auto request = [&](double piBar) {
        return s.write("req.json", R"({"piBar": )" + formatDouble(piBar) +
                                       R"(, "sigmaX": 2, "sigmaY": 1, "T": 1, "curve": {"kind": "cpmm", "L": 1}})");
    };
    const double lo = 2.0 * (1.0 - std::exp(-1.0 / 8.0));
    const double hi = 2.0 * (1.0 - std::exp(-9.0 / 8.0));
    CliRun r = run({"solve-corr", "--request", request(lo)});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NEAR(Json::parse(r.out)["rho"].get<double>(), 1.0, 1e-9);
    r = run({"solve-corr", "--request", request(hi)});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NEAR(Json::parse(r.out)["rho"].get<double>(), -1.0, 1e-9);
    EXPECT_NEAR(Json::parse(r.out)["bounds"][1].get<double>(), hi, 1e-12);
    r = run({"solve-corr", "--request", request(1.4)});
    EXPECT_EQ(r.status, 5);
    EXPECT_EQ(r.errorJson()["error"], "OutOfBounds");
}

TEST(CliSolve, PriceSwapAndVerdict) {
    Scratch s;
    const CliRun r = run({"price-swap", "--request",
                       s.write("req.json", R"({"sigma": 2.3548200450309493, "T": 1, "piBar": 2})")});
    ASSERT_EQ(r.status, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_NEAR(j["floating_leg"].get<double>(), 1.0, 1e-9);
    EXPECT_EQ(j["position_value"], 2.0);
    EXPECT_EQ(j["verdict"], "SingleAssetArbitrage");
}

TEST(CliSolve, BadRequest) {
    Scratch s;
    EXPECT_EQ(run({"solve-vol", "--request", s.write("req.json", R"({"piBar": 1})")}).status, 2);
    EXPECT_EQ(run({"solve-vol", "--request", s.write("bad.json", "{not json")}).status, 2);
    EXPECT_EQ(run({"solve-vol", "--request", s.path("missing.json")}).status, 2);
}

TEST(CliAuction, EmptyBook) {
    const CliRun r = run({"auction", "--orders", kData + "/orders_empty.csv"});
    ASSERT_EQ(r.status, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["matched_quantity"], "0.000000000000000000");
    EXPECT_TRUE(j["clearing_price"].is_null());
}

TEST(CliAuction, CrossingPairClearsAtMidpoint) {
    const CliRun r = run({"auction", "--orders", kData + "/orders_cross.csv"});
    ASSERT_EQ(r.status, 0) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["clearing_price"], "1.50000000");
    EXPECT_EQ(j["matched_quantity"], "10.000000000000000000");
    EXPECT_EQ(r.out, run({"auction", "--orders", kData + "/orders_cross.csv"}).out);
}

TEST(CliAuction, DuplicateIdFailsValidation) {
    const CliRun r = run({"auction", "--orders", kData + "/orders_duplicate.csv"});
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.errorJson()["error"], "InvalidArgument");
    EXPECT_NE(r.errorJson()["detail"].get<std::string>().find("line 3"), std::string::npos);
}

TEST(CliGenTicks, ByteIdenticalPerSeed) {
    const std::vector<std::string> args{"gen-ticks", "--sigma", "0.8", "--duration-seconds", "500", "--seed", "9"};
    const CliRun a = run(args);
    const CliRun b = run(args);
    ASSERT_EQ(a.status, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(csvRows(a.out).size(), 502u);
    auto other = args;
    other.back() = "10";
    EXPECT_NE(run(other).out, a.out);
}

TEST(CliGenTicks, ParamsFileAndValidation) {
    Scratch s;
    const std::string params = s.write("p.json", R"({"r": 0, "sigmaX": 0.3, "sigmaY": 0.4, "rho": 0.5})");
    EXPECT_EQ(run({"gen-ticks", "--params", params, "--duration-seconds", "10"}).status, 0);
    const CliRun r = run({"gen-ticks", "--duration-seconds", "0"});
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.errorJson()["error"], "InvalidArgument");
}

TEST(CliExitCodes, Mapping) {
    EXPECT_EQ(exitCodeFor(ErrorCode::ParseError), 2);
    EXPECT_EQ(exitCodeFor(ErrorCode::InsufficientData), 3);
    EXPECT_EQ(exitCodeFor(ErrorCode::ArbitrageViolation), 4);
    EXPECT_EQ(exitCodeFor(ErrorCode::OutOfBounds), 5);
    EXPECT_EQ(exitCodeFor(ErrorCode::NoConvergence), 6);
    EXPECT_EQ(exitCodeFor(ErrorCode::DomainError), 7);
}
