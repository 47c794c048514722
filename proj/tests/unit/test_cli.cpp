#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using mcoupler::ErrorCode;
using mcoupler::app::exit_code_for;
using json = nlohmann::json;

namespace {

const std::string kData = MCOUPLER_DATA_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = mcoupler::app::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// A scratch directory removed when the fixture ends.
class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("mcoupler_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& content) const {
        std::ofstream f(path(name));
        f << content;
        return path(name);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream f(p);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    }

private:
    fs::path dir_;
};

int count_lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(exit_code_for(ErrorCode::InvalidInput), 2);
    EXPECT_EQ(exit_code_for(ErrorCode::EmptyInput), 2);
    EXPECT_EQ(exit_code_for(ErrorCode::InitOutOfBounds), 2);
    EXPECT_EQ(exit_code_for(ErrorCode::NonPositiveDefinite), 2);
    EXPECT_EQ(exit_code_for(ErrorCode::NoSignChange), 3);
    EXPECT_EQ(exit_code_for(ErrorCode::ResonantCoupler), 3);
    EXPECT_EQ(exit_code_for(ErrorCode::SingularJacobian), 3);
    EXPECT_EQ(exit_code_for(ErrorCode::MaxIterations), 4);
    EXPECT_EQ(exit_code_for(ErrorCode::TruncationUnconverged), 4);
}

TEST_F(Cli, SweepWritesRequestedRows) {
    const Result r = run({"sweep", "--config", kData + "/four_bump.json", "--points", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("phi,g_hz\n", 0), 0u);
    EXPECT_EQ(count_lines(r.out), 3);
}

TEST_F(Cli, SweepRejectsSinglePoint) {
    EXPECT_EQ(run({"sweep", "--config", kData + "/four_bump.json", "--points", "1"}).code, 2);
}

TEST_F(Cli, MissingConfigFileIsInputError) {
    const Result r = run({"sweep", "--config", path("absent.json")});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, MissingCouplerSectionNamed) {
    const std::string cfg = write("no_coupler.json", R"({
      "schema": "mcoupler.device/1",
      "qubits": [{"label": "q1", "frequency_hz": 4.29e9, "e_c_hz": 2e8},
                 {"label": "q2", "frequency_hz": 4.39e9, "e_c_hz": 2e8}],
      "couplings": {"g12_hz": -5.2e6, "g1c_hz": 9.4e7, "g2c_hz": 9.4e7}})");
    const Result r = run({"find-zero", "--config", cfg});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("coupler"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownVerbIsInputError) { EXPECT_EQ(run({"frobnicate"}).code, 2); }

TEST_F(Cli, FindZeroReportsRoot) {
    const Result r = run({"find-zero", "--config", kData + "/four_bump.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["command"], "find-zero");
    const double phi = j["result"]["phi_zero"];
    EXPECT_GT(phi, 0.0);
    EXPECT_LT(phi, 0.5);
    EXPECT_LE(std::abs(j["result"]["g_residual_hz"].get<double>()), 100.0);
}

TEST_F(Cli, FindZeroWithoutSignChangeIsNumeric) {
    const Result r =
        run({"find-zero", "--config", kData + "/four_bump.json", "--bracket", "0", "0.01"});
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, SensitivityTable) {
    const Result r = run({"sensitivity", "--network", kData + "/reference_network.json", "--design",
                          "bump-bump", "--heights", "2.5e-6,3.5e-6,4.5e-6"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("height_m,g12_hz,g1c_hz,g2c_hz,max_abs_g_hz,phi_zero\n", 0), 0u);
    EXPECT_EQ(count_lines(r.out), 4);
}

TEST_F(Cli, SensitivityFromConfig) {
    const Result r = run({"sensitivity", "--config", kData + "/network_device.json", "--design",
                          "paddle-paddle", "--heights", "3e-6"});
    EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(Cli, SensitivityInputErrors) {
    const std::string net = kData + "/reference_network.json";
    EXPECT_EQ(run({"sensitivity", "--network", net, "--design", "bump-bump", "--heights", ""}).code, 2);
    EXPECT_EQ(run({"sensitivity", "--network", net, "--design", "glue", "--heights", "3e-6"}).code, 2);
    EXPECT_EQ(run({"sensitivity", "--design", "bump-bump", "--heights", "3e-6"}).code, 2);
}

TEST_F(Cli, FitGRoundTripThroughFiles) {
    const std::string cfg = kData + "/four_bump.json";
    ASSERT_EQ(run({"synth-g", "--config", cfg, "--seed", "7", "--out", path("g.csv")}).code, 0);
    const Result r = run({"fit-g", "--config", cfg, "--data", path("g.csv"), "--out", path("fit.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(slurp(path("fit.json")));
    const json& p = j["result"]["parameters"];
    EXPECT_NEAR(p["g12_abs_hz"]["value"].get<double>(), 5.2e6, 1e6);
    EXPECT_TRUE(j["result"]["converged"].get<bool>());
    EXPECT_EQ(j["result"]["data_points"], 25);
    EXPECT_NE(r.out.find("|g12|"), std::string::npos);
}

TEST_F(Cli, FitGRejectsBadConvention) {
    const std::string cfg = kData + "/four_bump.json";
    ASSERT_EQ(run({"synth-g", "--config", cfg, "--out", path("g.csv")}).code, 0);
    EXPECT_EQ(run({"fit-g", "--config", cfg, "--data", path("g.csv"), "--r-convention", "x"}).code, 2);
}

TEST_F(Cli, FitGTooFewPoints) {
    const std::string csv = write("few.csv", "phi,g_hz\n0,1e6\n0.1,2e6\n");
    EXPECT_EQ(run({"fit-g", "--config", kData + "/four_bump.json", "--data", csv}).code, 2);
}

TEST_F(Cli, FitPurcell) {
    const std::string cfg = kData + "/bump_paddle.json";
    ASSERT_EQ(run({"synth-t1", "--config", cfg, "--seed", "3", "--out", path("t1.csv")}).code, 0);
    const Result r = run({"fit-purcell", "--config", cfg, "--data", path("t1.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const double g = json::parse(r.out)["result"]["parameters"]["g_rc_hz"]["value"];
    EXPECT_NEAR(g, 54e6, 3e6);
}

TEST_F(Cli, FitPurcellNeedsResonator) {
    const std::string csv = write("t1.csv", "omega_c_hz,t1_s\n6.9e9,1e-5\n");
    EXPECT_EQ(run({"fit-purcell", "--data", csv}).code, 2);
    EXPECT_EQ(run({"fit-purcell", "--data", csv, "--omega-r-hz", "7.4e9", "--kappa-r-hz", "1e6"}).code, 0);
}

TEST_F(Cli, FidelityNeedsExplicitAssumption) {
    const std::string cfg = kData + "/four_bump.json";
    const Result refused = run({"fidelity", "--config", cfg});
    EXPECT_EQ(refused.code, 2);
    EXPECT_NE(refused.err.find("--assume-static-equals-modulated"), std::string::npos);
    const Result r = run({"fidelity", "--config", cfg, "--assume-static-equals-modulated"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["result"]["fidelity"].get<double>(), 0.987, 0.001);
    EXPECT_TRUE(j["result"]["static_equals_modulated_assumed"].get<bool>());
}

TEST_F(Cli, RbWithHistory) {
    ASSERT_EQ(run({"synth-rb", "--p", "0.96", "--seed", "1", "--out", path("ref.csv")}).code, 0);
    ASSERT_EQ(run({"synth-rb", "--p", "0.96", "--irb-fidelity", "0.99", "--seed", "2", "--out",
                   path("irb.csv")})
                  .code,
              0);
    const std::string hist = write("hist.csv", "fidelity\n0.985\n0.987\n0.986\n");
    const Result r = run({"rb", "--reference", path("ref.csv"), "--interleaved", path("irb.csv"),
                          "--history", hist});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["result"]["fidelity"].get<double>(), 0.99, 0.01);
    EXPECT_NEAR(j["result"]["history"]["mean"].get<double>(), 0.986, 1e-12);
    EXPECT_EQ(j["result"]["history"]["formatted"], "98.60 ± 0.10%");
}

TEST_F(Cli, RbRejectsSlowerReference) {
    // Interleaved decaying slower than the reference has no gate error to attribute.
    ASSERT_EQ(run({"synth-rb", "--p", "0.90", "--seed", "1", "--out", path("ref.csv")}).code, 0);
    ASSERT_EQ(run({"synth-rb", "--p", "0.99", "--seed", "2", "--out", path("irb.csv")}).code, 0);
    EXPECT_EQ(run({"rb", "--reference", path("ref.csv"), "--interleaved", path("irb.csv")}).code, 3);
}

TEST_F(Cli, ZzReportsSuppression) {
    const Result r = run({"zz", "--config", kData + "/four_bump.json", "--points", "11", "--table",
                          path("zz.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["result"]["rows"].size(), 11u);
    EXPECT_FALSE(j["result"]["zero_coupling"].is_null());
    EXPECT_GT(j["result"]["suppression_ratio"].get<double>(), 10.0);
    EXPECT_EQ(count_lines(slurp(path("zz.csv"))), 12);
    EXPECT_EQ(run({"zz", "--config", kData + "/four_bump.json", "--levels", "2"}).code, 2);
}

TEST_F(Cli, OutputIsDeterministic) {
    const std::vector<std::string> args{"synth-g", "--config", kData + "/bump_bump.json", "--seed", "42"};
    EXPECT_EQ(run(args).out, run(args).out);
    const std::vector<std::string> other{"synth-g", "--config", kData + "/bump_bump.json", "--seed", "43"};
    EXPECT_NE(run(args).out, run(other).out);
}

TEST_F(Cli, EveryJsonReportParses) {
    const std::string fb = kData + "/four_bump.json";
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"find-zero", "--config", fb},
             {"fidelity", "--config", fb, "--assume-static-equals-modulated"},
             {"zz", "--config", fb, "--points", "5"}}) {
        const Result r = run(args);
        ASSERT_EQ(r.code, 0) << args[0] << ": " << r.err;
        const json j = json::parse(r.out);
        EXPECT_EQ(j["tool"], "mcoupler");
        EXPECT_EQ(j["command"], args[0]);
        EXPECT_TRUE(j.contains("input"));
        EXPECT_TRUE(j.contains("version"));
    }
}
