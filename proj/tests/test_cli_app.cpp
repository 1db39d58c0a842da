#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "polariton/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("polariton_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write_config(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    // reference.ini with every "key = value" line of the given keys rewritten
    // and `extra` appended to the exact_engine section.
    static std::string reference_with(const std::vector<std::pair<std::string, std::string>>& values,
                                      const std::string& extra = "") {
        std::string text = polariton::read_text(std::string(POLARITON_CONFIG_DIR) + "/reference.ini");
        for (const auto& [key, value] : values)
            text = std::regex_replace(text, std::regex("(^|\n)" + key + " = [^\n]*"), "$1" + key + " = " + value);
        const std::string section = "[exact_engine]\n";
        text.insert(text.find(section) + section.size(), extra);
        return text;
    }

    static std::string short_run() { return reference_with({{"t_final", "1"}, {"samples", "5"}, {"n_traj", "20"}}); }

    // Runs the CLI with stderr captured; returns the exit status.
    int run(const std::string& args, const std::string& out_sub = "runs") {
        const std::string cmd = std::string(POLARITON_CLI) + " " + args + " --out " + (dir_ / out_sub).string() + " 2> " +
                                (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        stderr_ = polariton::read_text((dir_ / "stderr.txt").string());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path only_run_dir(const std::string& out_sub = "runs") {
        std::vector<fs::path> dirs;
        for (const auto& e : fs::directory_iterator(dir_ / out_sub)) dirs.push_back(e.path());
        EXPECT_EQ(dirs.size(), 1u);
        return dirs.empty() ? fs::path{} : dirs.front();
    }

    fs::path dir_;
    std::string stderr_;
};

} // namespace

TEST_F(Cli, UnknownKeyExitsTwoAndNamesIt) {
    const std::string cfg = write_config("bad.ini", reference_with({}, "n_trajectories = 5\n"));
    EXPECT_EQ(run("model --config " + cfg), 2);
    EXPECT_NE(stderr_.find("exact_engine.n_trajectories"), std::string::npos) << stderr_;
}

TEST_F(Cli, MissingConfigOptionExitsTwo) {
    EXPECT_EQ(run("model"), 2);
    EXPECT_EQ(run("teleport --config x.ini"), 2);
}

TEST_F(Cli, UnreadableConfigExitsTwo) {
    EXPECT_EQ(run("model --config " + (dir_ / "none.ini").string()), 2);
}

TEST_F(Cli, ModelModeWritesModelAndManifest) {
    const std::string cfg = write_config("ref.ini", reference_with({}));
    ASSERT_EQ(run("model --config " + cfg), 0) << stderr_;
    const fs::path rd = only_run_dir();
    const json model = json::parse(polariton::read_text((rd / "model.json").string()));
    EXPECT_EQ(model["n_sites"], 4);
    EXPECT_EQ(model["provenance"]["hopping_source"], "power_law");
    const json manifest = json::parse(polariton::read_text((rd / "manifest.json").string()));
    for (const char* key : {"config_hash", "seed", "mode", "versions", "started", "elapsed_s", "config", "files", "warnings"})
        EXPECT_TRUE(manifest.contains(key)) << key;
    EXPECT_EQ(manifest["mode"], "model");
    EXPECT_EQ(manifest["seed"], 20240611u);
    EXPECT_EQ(model["provenance"]["config_hash"], manifest["config_hash"]);
    EXPECT_EQ(rd.filename().string().substr(0, 16), manifest["config_hash"].get<std::string>());
}

TEST_F(Cli, RerunsAreByteIdentical) {
    const std::string cfg = write_config("ref.ini", short_run());
    for (const char* mode : {"model", "exact", "wfmc"}) {
        ASSERT_EQ(run(std::string(mode) + " --config " + cfg, std::string("a_") + mode), 0) << stderr_;
        ASSERT_EQ(run(std::string(mode) + " --config " + cfg, std::string("b_") + mode), 0) << stderr_;
        const fs::path a = only_run_dir(std::string("a_") + mode), b = only_run_dir(std::string("b_") + mode);
        for (const auto& e : fs::directory_iterator(a)) {
            const std::string name = e.path().filename().string();
            if (name == "manifest.json") continue;
            EXPECT_EQ(polariton::read_text(e.path().string()), polariton::read_text((b / name).string())) << mode << " " << name;
        }
    }
}

TEST_F(Cli, SeedOverrideChangesHashAndTrajectories) {
    const std::string cfg = write_config("ref.ini", short_run());
    ASSERT_EQ(run("wfmc --config " + cfg, "plain"), 0) << stderr_;
    ASSERT_EQ(run("wfmc --config " + cfg + " --seed 99", "seeded"), 0) << stderr_;
    const fs::path a = only_run_dir("plain"), b = only_run_dir("seeded");
    const json ma = json::parse(polariton::read_text((a / "manifest.json").string()));
    const json mb = json::parse(polariton::read_text((b / "manifest.json").string()));
    EXPECT_EQ(mb["seed"], 99u);
    EXPECT_NE(ma["config_hash"], mb["config_hash"]);
    EXPECT_NE(polariton::read_text((a / "dynamics.csv").string()), polariton::read_text((b / "dynamics.csv").string()));
}

TEST_F(Cli, BandsModeWritesBandTable) {
    const std::string cfg = std::string(POLARITON_CONFIG_DIR) + "/dense_bands.ini";
    ASSERT_EQ(run("bands --config " + cfg), 0) << stderr_;
    const fs::path rd = only_run_dir();
    const std::string csv = polariton::read_text((rd / "bands.csv").string());
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,band_index,label,re_energy,im_energy,e_weight");
    EXPECT_NE(csv.find("dark_upper"), std::string::npos);
    EXPECT_TRUE(fs::exists(rd / "wannier.csv"));
    const json manifest = json::parse(polariton::read_text((rd / "manifest.json").string()));
    EXPECT_GT(manifest["results"]["band_gap"].get<double>(), 0.0);
}
