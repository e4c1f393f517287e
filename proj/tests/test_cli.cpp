#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "adjopinf/rom.hpp"
#include "adjopinf/snapshot_io.hpp"
#include "adjopinf_cli/cli.hpp"

namespace fs = std::filesystem;
using adjopinf::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    args.insert(args.begin(), "adjopinf");
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("adjopinf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    std::string small_synthetic_config() const {
        return write("cell.json", R"({
            "pde": "synthetic",
            "synthetic": {"n_snapshots": 801, "horizon": 8.0},
            "split": {"train": 0.6, "val": 0.2, "test": 0.2},
            "r_values": [4], "methods": ["opinf-ord6"],
            "opinf_grid": {"ridge_weights": [0], "tsvd_discards": [0], "stencil_orders": [6]},
            "rollout": {"rtol": 1e-10, "atol": 1e-12}
        })");
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateFomRoundTrip) {
    const std::string cfg = write("b.json", R"({"burgers": {"n_interior": 30, "n_steps": 50, "horizon": 0.1}})");
    const fs::path out = dir_ / "snaps.bin";
    const Result r = call({"generate-fom", "--pde", "burgers", "--config", cfg, "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const adjopinf::SnapshotMatrix snap = adjopinf::read_snapshots(out);
    EXPECT_EQ(snap.rows(), 32);
    EXPECT_EQ(snap.count(), 51);
    std::ifstream meta(adjopinf::sidecar_path(out));
    const nlohmann::json j = nlohmann::json::parse(meta);
    EXPECT_EQ(j["pde"], "burgers");
    EXPECT_EQ(j["count"], 51);
}

TEST_F(Cli, SweepWritesResultsCsv) {
    const std::string cfg = write("sweep.json", R"({
        "pde": "synthetic", "synthetic": {"n_snapshots": 201, "horizon": 4.0},
        "split": {"train": 0.6, "val": 0.2, "test": 0.2},
        "r_values": [2, 4], "methods": ["opinf-ord2"],
        "opinf_grid": {"ridge_weights": [0, 0.1], "tsvd_discards": [0]},
        "noise_levels": [0, 40], "seeds": [1]
    })");
    const Result r = call({"sweep", "--config", cfg, "--out-dir", dir_.string(), "--no-wall-time"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(dir_ / "results.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "pde,method,r,noise_pct,samples,val_rse,test_rse,diverged,wall_ms,hyperparams");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 2 * 2);
}

TEST_F(Cli, TrainThenEvaluateRecoversSyntheticModel) {
    const std::string cfg = small_synthetic_config();
    const fs::path snaps = dir_ / "snaps.bin";
    ASSERT_EQ(call({"generate-fom", "--config", cfg, "--out", snaps.string()}).code, 0);
    const fs::path out = dir_ / "run";
    const Result t = call({"train", "--config", cfg, "--snapshots", snaps.string(), "--method", "opinf-ord6",
                           "--r", "4", "--out-dir", out.string()});
    ASSERT_EQ(t.code, 0) << t.err;
    for (const char* f : {"theta.json", "basis.bin", "basis.bin.json", "train_log.jsonl", "opinf_grid.csv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    std::ifstream theta_in(out / "theta.json");
    const nlohmann::json theta = nlohmann::json::parse(theta_in);
    EXPECT_EQ(theta["hyperparams"]["method"], "opinf-ord6");

    const Result e = call({"evaluate", "--theta", (out / "theta.json").string(), "--snapshots", snaps.string(),
                           "--basis", (out / "basis.bin").string()});
    ASSERT_EQ(e.code, 0) << e.err;
    const nlohmann::json j = nlohmann::json::parse(e.out);
    EXPECT_LE(j["rse"].get<double>(), 1e-6);
    EXPECT_FALSE(j["diverged"].get<bool>());
}

TEST_F(Cli, EvaluateWithoutBasisOnFullStateIsConfigError) {
    const std::string cfg = small_synthetic_config();
    const fs::path snaps = dir_ / "snaps.bin";
    ASSERT_EQ(call({"generate-fom", "--config", cfg, "--out", snaps.string()}).code, 0);
    const std::string theta = write("theta.json", adjopinf::RomParams::zeros(2).to_json());
    const Result e = call({"evaluate", "--theta", theta, "--snapshots", snaps.string()});
    EXPECT_EQ(e.code, 1);
    EXPECT_NE(e.err.find("--basis"), std::string::npos);
}

TEST_F(Cli, DivergentModelExitsWithTwo) {
    Eigen::MatrixXd q(1, 3);
    q << 1.0, 2.0, 3.0;
    const fs::path snaps = dir_ / "q.bin";
    adjopinf::write_snapshots(snaps, adjopinf::SnapshotMatrix(q, Eigen::Vector3d(0.0, 1.0, 2.0)));
    const adjopinf::RomParams blowup(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1),
                                     Eigen::MatrixXd::Constant(1, 1, 10.0), Eigen::MatrixXd::Zero(1, 0));
    const std::string theta = write("theta.json", blowup.to_json());
    const Result e = call({"evaluate", "--theta", theta, "--snapshots", snaps.string()});
    EXPECT_EQ(e.code, 2);
    EXPECT_TRUE(nlohmann::json::parse(e.out)["diverged"].get<bool>());
}

TEST_F(Cli, InvalidConfigExitsWithOne) {
    const std::string cfg = write("bad.json", R"({"pde": "burgers", "bogus": 1})");
    const Result r = call({"generate-fom", "--config", cfg, "--out", (dir_ / "x.bin").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST_F(Cli, UnknownFlagAndMissingSubcommandExitWithOne) {
    EXPECT_EQ(call({"generate-fom", "--frobnicate"}).code, 1);
    EXPECT_EQ(call({}).code, 1);
    EXPECT_EQ(call({"generate-fom", "--pde", "heat"}).code, 1);
}

TEST_F(Cli, HelpExitsCleanly) {
    const Result r = call({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("generate-fom"), std::string::npos);
}
