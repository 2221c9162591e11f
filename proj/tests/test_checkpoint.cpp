#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "collatz/census.hpp"

using namespace collatz;
namespace fs = std::filesystem;

namespace {

class CheckpointTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("collatz_ckpt_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    [[nodiscard]] fs::path file(const char* name) const { return dir_ / name; }

    static void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

    fs::path dir_;
};

Checkpoint sample() {
    return Checkpoint{Checkpoint::current_version, MapKind::cr3, 100000, 50001, {16700, 16650, 16650}, 100001,
                      "2026-10-16T12:00:00Z"};
}

CensusConfig config(std::uint64_t chunk, unsigned workers) {
    CensusConfig c;
    c.chunk_size = chunk;
    c.workers = workers;
    return c;
}

} // namespace

TEST_F(CheckpointTest, SaveLoadRoundTrip) {
    const auto p = file("a.json");
    checkpoint_save(p, sample());
    EXPECT_EQ(checkpoint_load(p), sample());
    EXPECT_FALSE(fs::exists(p.string() + ".tmp"));

    Checkpoint pd{Checkpoint::current_version, MapKind::pdcr2, 10, 11, {4, 6, 0}, 11, "t"};
    checkpoint_save(p, pd);
    EXPECT_EQ(checkpoint_load(p), pd);
}

TEST_F(CheckpointTest, TextHasExactlyTheCheckpointFields) {
    const auto j = nlohmann::json::parse(checkpoint_to_text(sample()));
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    EXPECT_EQ(keys, (std::vector<std::string>{"cache_bound", "counts", "created_at", "format_version", "map", "next_n",
                                              "target_s"}));
    EXPECT_EQ(j["counts"]["4"], 16650);
}

TEST_F(CheckpointTest, RejectsMalformedDocuments) {
    auto mutate = [](auto&& f) {
        auto j = nlohmann::json::parse(checkpoint_to_text(sample()));
        f(j);
        return j.dump();
    };
    EXPECT_THROW((void)checkpoint_from_text("{not json"), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text("[]"), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["extra"] = 1; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j.erase("next_n"); })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["format_version"] = 2; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["map"] = "cr"; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["next_n"] = -1; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["next_n"] = "5"; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["next_n"] = 100002; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["counts"]["1"] = 1; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["counts"]["3"] = 0; })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_from_text(mutate([](auto& j) { j["counts"].erase("4"); })), checkpoint_error);
    EXPECT_THROW((void)checkpoint_load(file("missing.json")), checkpoint_error);
}

TEST_F(CheckpointTest, InterruptedRunResumesToTheSameCounts) {
    const auto p = file("run.json");
    const CheckpointOptions opts{p, false, std::chrono::milliseconds(0)};

    std::stop_source stop;
    CensusControl control{stop.get_token(), [&](const ClassCounts& prefix) {
                              if (prefix.hi + 1 >= 50000) stop.request_stop();
                          }};
    EXPECT_THROW((void)run_census(MapKind::cr3, 100000, config(1000, 2), opts, control), census_interrupted);

    const auto saved = checkpoint_load(p);
    EXPECT_GE(saved.next_n, 50000u);
    EXPECT_LT(saved.next_n, 100001u);
    EXPECT_EQ(saved.counts[0] + saved.counts[1] + saved.counts[2], saved.next_n - 1);

    const auto resumed = run_census(MapKind::cr3, 100000, config(777, 3), CheckpointOptions{p, true, {}});
    EXPECT_EQ(resumed.info.resumed_from, saved.next_n);
    EXPECT_EQ(resumed.counts.counts, (std::array<std::uint64_t, 3>{33364, 33311, 33325}));
    EXPECT_EQ(resumed.counts, run_census(MapKind::cr3, 100000, config(1 << 16, 1)).counts);

    // The completed run leaves a final checkpoint that resumes to the same answer.
    EXPECT_EQ(checkpoint_load(p).next_n, 100001u);
    EXPECT_EQ(run_census(MapKind::cr3, 100000, config(10, 1), CheckpointOptions{p, true, {}}).counts, resumed.counts);
}

TEST_F(CheckpointTest, ResumeRefusesMismatchedRuns) {
    const auto p = file("cr3.json");
    checkpoint_save(p, sample());
    EXPECT_THROW((void)run_census(MapKind::pdcr2, 100000, config(1000, 1), CheckpointOptions{p, true, {}}),
                 checkpoint_error);
    EXPECT_THROW((void)run_census(MapKind::cr3, 99999, config(1000, 1), CheckpointOptions{p, true, {}}),
                 checkpoint_error);
    EXPECT_THROW((void)run_census(MapKind::cr3, 100000, config(1000, 1), CheckpointOptions{file("nope.json"), true, {}}),
                 checkpoint_error);
}

TEST_F(CheckpointTest, FreshRunWritesFinalCheckpoint) {
    const auto p = file("fresh.json");
    const auto r = run_census(MapKind::pdcr2, 1000, config(100, 2), CheckpointOptions{p, false, std::chrono::hours(1)});
    const auto saved = checkpoint_load(p);
    EXPECT_EQ(saved.map, MapKind::pdcr2);
    EXPECT_EQ(saved.target_s, 1000u);
    EXPECT_EQ(saved.next_n, 1001u);
    EXPECT_EQ(saved.counts, r.counts.counts);
    EXPECT_EQ(saved.cache_bound, 1001u);
}
