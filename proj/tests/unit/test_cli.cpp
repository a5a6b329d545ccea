#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int pfara(const std::string& args) {
    const std::string cmd = std::string(PFARA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pfara_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, GenerateGrid) {
    const fs::path dir = scratch("grid");
    const auto start = std::chrono::steady_clock::now();
    ASSERT_EQ(pfara("generate-grid --rows 10 --cols 10 --out " + (dir / "g.csv").string()), 0);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
    EXPECT_TRUE(fs::exists(dir / "g.layout.csv"));
    ASSERT_EQ(pfara("generate-grid --rows 5 --cols 5 --out " + (dir / "five.csv").string()), 0);
    const std::string text = slurp(dir / "five.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3 + 80);
}

TEST(Cli, UsageErrors) {
    const fs::path dir = scratch("usage");
    EXPECT_EQ(pfara("generate-grid --rows 1 --cols 5 --out " + (dir / "g.csv").string()), 2);
    EXPECT_EQ(pfara("no-such-command"), 2);
    EXPECT_EQ(pfara(""), 2);
}

TEST(Cli, DensityIsDeterministic) {
    const fs::path dir = scratch("density");
    ASSERT_EQ(pfara("generate-grid --rows 4 --cols 4 --out " + (dir / "g.csv").string()), 0);
    std::ofstream(dir / "zones.csv") << "vertex_id,zone_id\n0,0\n1,0\n2,1\n3,1\n4,0\n5,0\n6,1\n7,1\n"
                                        "8,2\n9,2\n10,3\n11,3\n12,2\n13,2\n14,3\n15,3\n";
    std::ofstream(dir / "demand.csv") << "origin_zone,dest_zone,count\n0,3,13\n2,1,5\n";
    std::ofstream(dir / "zero.csv") << "origin_zone,dest_zone,count\n0,3,0\n";
    const std::string common = " --net " + (dir / "g.csv").string() + " --zones " + (dir / "zones.csv").string();
    ASSERT_EQ(pfara("density" + common + " --demand " + (dir / "demand.csv").string() + " --seed 3 --out " + (dir / "a.csv").string()), 0);
    ASSERT_EQ(pfara("density" + common + " --demand " + (dir / "demand.csv").string() + " --seed 3 --out " + (dir / "b.csv").string()), 0);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    ASSERT_EQ(pfara("density" + common + " --demand " + (dir / "zero.csv").string() + " --out " + (dir / "z.csv").string()), 0);
    EXPECT_EQ(slurp(dir / "z.csv"), slurp(dir / "g.csv"));
}

TEST(Cli, SimulateAndCompare) {
    const fs::path dir = scratch("sim");
    ASSERT_EQ(pfara("make-scenario --kind corner --out-dir " + dir.string()), 0);
    const std::string inputs = " --net " + (dir / "network.csv").string() + " --scenario " + (dir / "scenario.json").string();

    ASSERT_EQ(pfara("simulate" + inputs + " --algorithm alone --out-dir " + (dir / "alone").string()), 0);
    const std::string alone = slurp(dir / "alone" / "events.jsonl");
    EXPECT_EQ(alone.find("\"Formed\""), std::string::npos);
    EXPECT_NE(alone.find("\"Completed\""), std::string::npos);

    ASSERT_EQ(pfara("simulate" + inputs + " --algorithm pfara --out-dir " + (dir / "pfara").string()), 0);
    for (const char* f : {"events.jsonl", "summary.csv", "heatmap.svg"}) EXPECT_TRUE(fs::exists(dir / "pfara" / f)) << f;
    const std::string ev = slurp(dir / "pfara" / "events.jsonl");
    EXPECT_NE(ev.find("\"Split\""), std::string::npos);
    EXPECT_NE(ev.find("\"Formed\""), std::string::npos);

    ASSERT_EQ(pfara("compare" + inputs + " --out " + (dir / "cmp").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "cmp" / "comparison.csv"));
    for (const char* a : {"pfara", "overlap", "alone"})
        EXPECT_TRUE(fs::exists(dir / "cmp" / ("heatmap_" + std::string(a) + ".svg")));

    ASSERT_EQ(pfara("compare" + inputs + " --out " + (dir / "cmp2").string()), 0);
    EXPECT_EQ(slurp(dir / "cmp" / "comparison.csv"), slurp(dir / "cmp2" / "comparison.csv"));
    EXPECT_EQ(slurp(dir / "cmp" / "heatmap_pfara.svg"), slurp(dir / "cmp2" / "heatmap_pfara.svg"));
}
