#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "randcheck/commands.hpp"
#include "randcheck/errors.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace randcheck;

namespace {

constexpr const char* kTiny = R"(
seed = 3
epsilon = 0.3
[data]
kind = blobs
d = 4
classes = 2
n_per_class = 40
n_test_per_class = 10
noise = 0.1
spread = 0.5
[model]
hidden = [8]
[train]
epochs = 3
)";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::string> data_lines(const fs::path& p) {
    std::istringstream is(slurp(p));
    std::vector<std::string> out;
    for (std::string line; std::getline(is, line);) {
        if (!line.empty() && line.front() != '#') out.push_back(line);
    }
    return out;
}

int run(const std::string& cmd, const fs::path& out, const std::vector<std::string>& overrides = {},
        int workers = 1, std::string* err_text = nullptr) {
    Config cfg = Config::parse(kTiny);
    for (const auto& o : overrides) cfg.set_override(o);
    cfg.set("out", out.string());
    std::ostringstream log, err;
    const int code = run_command(cmd, cfg, workers, log, err);
    if (err_text != nullptr) *err_text = err.str();
    return code;
}

}  // namespace

TEST(Commands, SelectPointsStride) {
    EXPECT_EQ(select_points(10, 5), (std::vector<int>{0, 2, 4, 6, 8}));
    EXPECT_EQ(select_points(3, 3), (std::vector<int>{0, 1, 2}));
    EXPECT_THROW(select_points(3, 4), ConfigError);
    EXPECT_THROW(select_points(3, 0), ConfigError);
}

TEST(Commands, UnknownCommandIsConfigError) {
    EXPECT_EQ(run("fly", randcheck::testing::scratch_dir("cmd_unknown")), kExitConfig);
}

TEST(Commands, GenDataWritesBothSplits) {
    const fs::path a = randcheck::testing::scratch_dir("cmd_gen_a");
    const fs::path b = randcheck::testing::scratch_dir("cmd_gen_b");
    ASSERT_EQ(run("gen-data", a), kExitOk);
    ASSERT_EQ(run("gen-data", b), kExitOk);
    EXPECT_EQ(data_lines(a / "train.csv").size(), 1u + 80u);
    EXPECT_EQ(data_lines(a / "test.csv").size(), 1u + 20u);
    for (const char* f : {"train.csv", "test.csv", "config.resolved.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Commands, TrainOutputsAreReproducible) {
    const fs::path a = randcheck::testing::scratch_dir("cmd_train_a");
    const fs::path b = randcheck::testing::scratch_dir("cmd_train_b");
    ASSERT_EQ(run("train", a), kExitOk);
    ASSERT_EQ(run("train", b), kExitOk);
    EXPECT_EQ(slurp(a / "model.bin"), slurp(b / "model.bin"));
    EXPECT_EQ(slurp(a / "history.csv"), slurp(b / "history.csv"));
    const auto hist = data_lines(a / "history.csv");
    ASSERT_EQ(hist.size(), 4u);
    EXPECT_EQ(hist[0], "epoch,loss,train_acc,test_acc");
}

TEST(Commands, TrainFromGeneratedCsvMatchesInlineData) {
    const fs::path gen = randcheck::testing::scratch_dir("cmd_csv_gen");
    const fs::path inl = randcheck::testing::scratch_dir("cmd_csv_inline");
    const fs::path csv = randcheck::testing::scratch_dir("cmd_csv_file");
    ASSERT_EQ(run("gen-data", gen), kExitOk);
    ASSERT_EQ(run("train", inl), kExitOk);
    ASSERT_EQ(run("train", csv,
                  {"data.train_csv=" + (gen / "train.csv").string(), "data.test_csv=" + (gen / "test.csv").string()}),
              kExitOk);
    EXPECT_EQ(load_network(inl / "model.bin"), load_network(csv / "model.bin"));
}

TEST(Commands, MissingDatasetIsExitTwo) {
    std::string err;
    EXPECT_EQ(run("train", randcheck::testing::scratch_dir("cmd_missing"), {"data.train_csv=/nonexistent/train.csv"},
                  1, &err),
              kExitConfig);
    EXPECT_NE(err.find("/nonexistent/train.csv"), std::string::npos);
}

TEST(Commands, BadConfigValueIsExitTwo) {
    EXPECT_EQ(run("train", randcheck::testing::scratch_dir("cmd_bad"), {"model.activation=sigmoid"}), kExitConfig);
    EXPECT_EQ(run("train", randcheck::testing::scratch_dir("cmd_bad2"), {"train.epochs=many"}), kExitConfig);
}

TEST(Commands, DivergenceIsExitFour) {
    EXPECT_EQ(run("train", randcheck::testing::scratch_dir("cmd_diverge"), {"train.learning_rate=1e300"}),
              kExitNumeric);
}

TEST(Commands, StochasticSweepIsExitThree) {
    EXPECT_EQ(run("sweep", randcheck::testing::scratch_dir("cmd_stoch"),
                  {"sweep.classifier=smoothed", "smoothing.mode=random", "smoothing.n=3", "sweep.points=2",
                   "sweep.dims_bins=[[1,5]]"}),
              kExitPrecondition);
}

TEST(Commands, SweepIndependentOfWorkers) {
    const std::vector<std::string> o{"sweep.points=8", "sweep.dims_bins=[[1,21],[2,11]]", "model.activation=kwta",
                                     "model.gamma=0.25"};
    const fs::path a = randcheck::testing::scratch_dir("cmd_sweep_a");
    const fs::path b = randcheck::testing::scratch_dir("cmd_sweep_b");
    ASSERT_EQ(run("sweep", a, o, 1), kExitOk);
    ASSERT_EQ(run("sweep", b, o, 3), kExitOk);
    EXPECT_EQ(slurp(a / "sweep.json"), slurp(b / "sweep.json"));
    EXPECT_EQ(slurp(a / "sweep_table.csv"), slurp(b / "sweep_table.csv"));
    const auto rows = data_lines(a / "sweep_table.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], "Dims,Bins,Grid-sweep,Rand-sample,PGD1,PGD10,PGD20");
    const auto doc = nlohmann::json::parse(slurp(a / "sweep.json"));
    EXPECT_EQ(doc.at("seed"), 3);
    EXPECT_TRUE(doc.contains("verdict"));
}

TEST(Commands, EmbeddedConfigReproducesOutputs) {
    const std::vector<std::string> o{"sweep.points=6", "sweep.dims_bins=[[2,11]]"};
    const fs::path a = randcheck::testing::scratch_dir("cmd_embed_a");
    ASSERT_EQ(run("sweep", a, o), kExitOk);
    Config again = Config::parse(slurp(a / "config.resolved.json"));
    const fs::path b = randcheck::testing::scratch_dir("cmd_embed_b");
    again.set("out", b.string());
    std::ostringstream log, err;
    ASSERT_EQ(run_command("sweep", again, 2, log, err), kExitOk) << err.str();
    EXPECT_EQ(slurp(a / "sweep_table.csv"), slurp(b / "sweep_table.csv"));
    EXPECT_EQ(slurp(a / "sweep.json"), slurp(b / "sweep.json"));
}

TEST(Commands, NagFixedColumnIsConstant) {
    const fs::path out = randcheck::testing::scratch_dir("cmd_nag");
    ASSERT_EQ(run("nag", out, {"smoothing.n=[1,5]", "nag.base_inferences=200", "nag.points=10"}, 2), kExitOk);
    for (const char* f : {"nag_fixed_n1.csv", "nag_fixed_n5.csv"}) {
        const auto rows = data_lines(out / f);
        ASSERT_EQ(rows.size(), 5u);
        EXPECT_EQ(rows[0], "N,robust_accuracy,ci95");
        std::vector<std::string> acc;
        for (std::size_t i = 1; i < rows.size(); ++i) acc.push_back(rows[i].substr(rows[i].find(',')));
        for (const auto& a : acc) EXPECT_EQ(a, acc.front());
        EXPECT_EQ(rows[4].substr(0, 5), "1000,");
    }
    EXPECT_TRUE(fs::exists(out / "nag_random_n1.csv"));
    EXPECT_TRUE(fs::exists(out / "nag.json"));
}

TEST(Commands, SmoothCompareRowsAndCycleOfOne) {
    const fs::path out = randcheck::testing::scratch_dir("cmd_compare");
    ASSERT_EQ(run("smooth-compare", out, {"compare.points=6", "pgd.steps=5"}), kExitOk);
    EXPECT_EQ(data_lines(out / "smooth_compare.csv").size(), 1u + 12u);

    const fs::path cyc = randcheck::testing::scratch_dir("cmd_compare_cycle");
    ASSERT_EQ(run("smooth-compare", cyc, {"compare.points=6", "pgd.steps=5", "smoothing.cycle_k=1"}), kExitOk);
    const auto doc = nlohmann::json::parse(slurp(cyc / "smooth_compare.json"));
    ASSERT_EQ(doc.at("rows").size(), 18u);
    for (std::size_t i = 0; i < 18; i += 3) {
        const auto& fixed = doc["rows"][i + 1];
        const auto& cycle = doc["rows"][i + 2];
        ASSERT_EQ(fixed.at("mode"), "fixed");
        ASSERT_EQ(cycle.at("mode"), "cycle");
        EXPECT_EQ(fixed.at("robust_accuracy"), cycle.at("robust_accuracy"));
        EXPECT_EQ(fixed.at("outcomes"), cycle.at("outcomes"));
    }
}
