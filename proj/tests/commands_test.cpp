// End-to-end checks of the leedecay executable: exit codes, artifacts and
// byte-level reproducibility. Configs are kept small so each run is quick.
#include <sys/wait.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSmall = R"([grid]
n_modes = 256
[kernels]
points = 21
[sector]
n_modes = 256
t_points = 201
[master]
n_modes = 16
t_points = 21
[langevin]
n_trajectories = 400
record_points = 50
)";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        static std::atomic<int> counter{0};
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               ("leedecay_" + std::string(info->name()) + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    // Runs the executable with the given arguments; stdout and stderr go to
    // log_. Returns the exit code.
    int run(const std::string& args) {
        log_ = dir_ / "log.txt";
        const std::string cmd = std::string("\"") + LEEDECAY_EXE + "\" " + args + " > \"" +
                                log_.string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string log() const { return read_file(log_); }
    json load_json(const fs::path& p) const { return json::parse(read_file(p)); }

    fs::path dir_;
    fs::path log_;
};

TEST_F(Cli, MalformedConfigExitsTwoAndWritesNothing) {
    const fs::path cfg = write_config("bad.cfg", "[model]\ncoupling = 0.2\nwidth = 3\n");
    const fs::path out = dir_ / "out";
    EXPECT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " pole"), 2);
    EXPECT_NE(log().find("bad.cfg:3"), std::string::npos) << log();
    EXPECT_FALSE(fs::exists(out));
}

TEST_F(Cli, UnknownSubcommandExitsTwo) { EXPECT_EQ(run("frobnicate"), 2); }

TEST_F(Cli, RefusesToOverwrite) {
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("--out " + out.string() + " pole"), 0) << log();
    const std::string before = read_file(out / "pole.json");
    EXPECT_EQ(run("--seed 7 --out " + out.string() + " pole"), 2);
    EXPECT_NE(log().find("pole.json"), std::string::npos) << log();
    EXPECT_EQ(read_file(out / "pole.json"), before);
}

TEST_F(Cli, FreeTheoryPole) {
    const fs::path cfg = write_config("free.cfg", "[model]\ncoupling = 0\n");
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " pole"), 0) << log();
    const json pole = load_json(out / "pole.json");
    EXPECT_EQ(pole["Gamma"].get<double>(), 0.0);
    EXPECT_EQ(pole["Z_V"].get<double>(), 1.0);
    EXPECT_EQ(pole["m_V"].get<double>(), 12.0);
}

TEST_F(Cli, GoldenPoleAndKernels) {
    const fs::path golden = LEEDECAY_GOLDEN_DIR;
    const fs::path out = dir_ / "out";
    const std::string args = "--config " + (golden / "benchmark.cfg").string() + " --out " + out.string();
    ASSERT_EQ(run(args + " pole"), 0) << log();
    ASSERT_EQ(run(args + " kernels"), 0) << log();
    EXPECT_EQ(read_file(out / "pole.json"), read_file(golden / "pole.json"));
    EXPECT_EQ(read_file(out / "kernels.csv"), read_file(golden / "kernels.csv"));
}

TEST_F(Cli, GoldenPoleMatchesReferenceValues) {
    const json pole = load_json(fs::path(LEEDECAY_GOLDEN_DIR) / "pole.json");
    EXPECT_NEAR(pole["m_V"].get<double>(), 11.99347529336531, 1e-12);
    EXPECT_NEAR(pole["Gamma"].get<double>(), 1.099382174444939e-02, 1e-14);
    EXPECT_EQ(pole["meta"]["config_hash"].get<std::string>().rfind("fnv1a64:", 0), 0u);
}

TEST_F(Cli, KernelTableHeaderAndShape) {
    const fs::path cfg = write_config("small.cfg", kSmall);
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " kernels"), 0) << log();
    std::istringstream lines(read_file(out / "kernels.csv"));
    std::string line;
    int comments = 0, rows = 0;
    bool header = false;
    while (std::getline(lines, line)) {
        if (line.starts_with("#")) {
            ++comments;
        } else if (!header) {
            EXPECT_EQ(line, "E,D,B,A");
            header = true;
        } else {
            ++rows;
        }
    }
    EXPECT_EQ(comments, 4);
    EXPECT_EQ(rows, 21);
}

constexpr const char* kUndamped =
    "[master]\nn_modes = 16\nt_max = 50\nt_points = 11\ndecoherence_rate = 0\n"
    "initial_state = superposition\n";

// RK4 phase error on the vacuum coherence grows like dt^4; a quarter of the
// largest stable step keeps the pure state pure to 1e-8 over this window.
TEST_F(Cli, UndampedMasterKeepsPurity) {
    const fs::path cfg = write_config("pure.cfg", std::string(kUndamped) + "dt = 0.0008\n");
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " master"), 0) << log();
    const json m = load_json(out / "master.json");
    EXPECT_EQ(m["kappa"].get<double>(), 0.0);
    EXPECT_LT(m["max_purity_defect"].get<double>(), 1e-8);
    EXPECT_LT(m["max_trace_defect"].get<double>(), 1e-10);
    EXPECT_GT(m["min_eigenvalue"].get<double>(), -1e-8);
}

TEST_F(Cli, PositivityLossExitsThreeWithTime) {
    const fs::path cfg = write_config("coarse.cfg", kUndamped);
    const fs::path out = dir_ / "out";
    EXPECT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " master"), 3) << log();
    EXPECT_NE(log().find("integration failed at t = 5"), std::string::npos) << log();
    EXPECT_FALSE(fs::exists(out));
}

TEST_F(Cli, SectorFitMatchesPoleWidth) {
    const fs::path cfg = write_config("small.cfg", kSmall);
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " sector"), 0) << log();
    const json s = load_json(out / "sector.json");
    const double width = s["Gamma"].get<double>();
    EXPECT_NEAR(s["fit"]["rate"].get<double>(), width, 0.05 * width);
    EXPECT_TRUE(fs::exists(out / "survival.csv"));
}

TEST_F(Cli, LangevinStationaryWithinThreeSigma) {
    const fs::path cfg = write_config("small.cfg", kSmall);
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " langevin"), 0) << log();
    const json l = load_json(out / "langevin.json");
    const double mean = l["stationary"]["mean_sq"].get<double>();
    const double err = l["stationary"]["stderr"].get<double>();
    EXPECT_GT(err, 0.0);
    EXPECT_LT(std::abs(mean - 0.5), 3.0 * err);
}

TEST_F(Cli, RerunsAreByteIdentical) {
    const fs::path cfg = write_config("small.cfg", kSmall);
    for (const char* cmd : {"pole", "kernels", "sector", "langevin"}) {
        const fs::path a = dir_ / (std::string(cmd) + "_a");
        const fs::path b = dir_ / (std::string(cmd) + "_b");
        ASSERT_EQ(run("--config " + cfg.string() + " --out " + a.string() + " " + cmd), 0) << log();
        ASSERT_EQ(run("--threads 3 --config " + cfg.string() + " --out " + b.string() + " " + cmd), 0)
            << log();
        for (const auto& entry : fs::directory_iterator(a)) {
            EXPECT_EQ(read_file(entry.path()), read_file(b / entry.path().filename()))
                << cmd << ": " << entry.path().filename();
        }
    }
}

TEST_F(Cli, SeedChangesLangevinOutput) {
    const fs::path cfg = write_config("small.cfg", kSmall);
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + (dir_ / "a").string() + " langevin"), 0);
    ASSERT_EQ(run("--seed 43 --config " + cfg.string() + " --out " + (dir_ / "b").string() + " langevin"), 0);
    EXPECT_NE(read_file(dir_ / "a" / "langevin.csv"), read_file(dir_ / "b" / "langevin.csv"));
}

TEST_F(Cli, VerifyPassesAndIsReproducible) {
    const fs::path cfg = write_config("small.cfg", kSmall);
    const fs::path out = dir_ / "out";
    ASSERT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " verify"), 0) << log();
    const json report = load_json(out / "report.json");
    EXPECT_EQ(report["criteria"].size(), 11u);
    EXPECT_EQ(read_file(out / "report.json").find("seconds"), std::string::npos);

    const fs::path again = dir_ / "again";
    ASSERT_EQ(run("--threads 2 --config " + cfg.string() + " --out " + again.string() + " verify"), 0);
    for (const auto& entry : fs::directory_iterator(out)) {
        EXPECT_EQ(read_file(entry.path()), read_file(again / entry.path().filename()))
            << entry.path().filename();
    }
}

TEST_F(Cli, VerifyFailsWithUnstableStep) {
    const fs::path cfg = write_config("step.cfg", std::string(kSmall) + "[master]\ndt = 0.5\n");
    const fs::path out = dir_ / "out";
    EXPECT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " verify"), 1) << log();
    EXPECT_NE(log().find("[FAIL] 4"), std::string::npos) << log();
}

TEST_F(Cli, VerifySkipsDecayCriteriaForFreeTheory) {
    const fs::path cfg = write_config("free.cfg", std::string(kSmall) + "[model]\ncoupling = 0\n");
    const fs::path out = dir_ / "out";
    EXPECT_EQ(run("--config " + cfg.string() + " --out " + out.string() + " verify"), 0) << log();
    EXPECT_NE(log().find("[SKIP]"), std::string::npos) << log();
    EXPECT_EQ(log().find("[FAIL]"), std::string::npos) << log();
}

}  // namespace
