#include "edgedeploy/cli.hpp"
#include "edgedeploy/config.hpp"
#include "edgedeploy/marl.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace edgedeploy;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("edgedeploy_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        v.push_back(line);
    }
    return v;
}

// Five seconds of video keeps every command quick.
const std::string kShort = "duration_ms=5000";

} // namespace

TEST_CASE("help and usage errors") {
    CHECK(cli({"--help"}).code == kExitOk);
    CHECK(cli({}).code == kExitConfig);
    CHECK(cli({"frobnicate"}).code == kExitConfig);
    CHECK(cli({"simulate", "--rt-tar-ms", "soon"}).code == kExitConfig);
    CHECK(cli({"simulate", "--trace", "a.csv", "--gen", "seed=1"}).code == kExitConfig);
}

TEST_CASE("config errors exit 2") {
    const auto dir = scratch("config");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "bad.json") << R"({"rt_tar_ms": 33, "typo": 1})";
    }
    auto r = cli({"simulate", "--config", (dir / "bad.json").string(), "--out", dir.string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("typo") != std::string::npos);
    CHECK(cli({"simulate", "--config", (dir / "missing.json").string()}).code == kExitConfig);
    CHECK(cli({"simulate", "--strategy", "bogus", "--out", dir.string()}).code == kExitConfig);
    CHECK(cli({"simulate", "--device", "toaster", "--out", dir.string()}).code == kExitConfig);
    CHECK(cli({"simulate", "--gen", "fps=0", "--out", dir.string()}).code == kExitConfig);
    CHECK(cli({"compare", "--strategies", "origin", "--out", dir.string()}).code == kExitConfig);
    CHECK(cli({"compare", "--strategies", "origin,marl", "--out", dir.string()}).code ==
          kExitConfig);
}

TEST_CASE("simulate writes hashed metrics and frames") {
    const auto dir = scratch("simulate");
    const auto r = cli({"simulate", "--gen", kShort, "--out", dir.string()});
    REQUIRE(r.code == kExitOk);

    RunConfig cfg;
    apply_gen_overrides(cfg, kShort);
    cfg.out = dir.string();
    const std::string stamp = "# config-hash: " + config_hash(cfg);

    const auto metrics = lines(slurp(dir / "metrics.csv"));
    REQUIRE(metrics.size() == 3);
    CHECK(metrics[0] == stamp);
    CHECK(metrics[1] == "approach,L/F,KF#,WT,WP,P/V,mAP");
    CHECK(metrics[2].rfind("origin,", 0) == 0);

    const auto frames = lines(slurp(dir / "frames.csv"));
    CHECK(frames[0] == stamp);
    CHECK(frames.size() == 2 + 150);
}

TEST_CASE("one metrics row per seed") {
    const auto dir = scratch("seeds");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "run.json") << R"({"seeds": [1, 2, 3], "gen": {"duration_ms": 3000}})";
    }
    const auto r = cli({"simulate", "--config", (dir / "run.json").string(), "--out",
                        dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(lines(slurp(dir / "metrics.csv")).size() == 2 + 3);
}

TEST_CASE("outputs are byte identical across runs") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    for (const auto& d : {a, b}) {
        // Same --out string so the hashes agree.
        fs::create_directories(d);
        const auto prev = fs::current_path();
        fs::current_path(d);
        REQUIRE(cli({"simulate", "--gen", kShort, "--strategy", "static_0.7", "--out", "o"}).code ==
                kExitOk);
        REQUIRE(cli({"train", "--gen", kShort, "--steps", "300", "--out", "o"}).code == kExitOk);
        fs::current_path(prev);
    }
    for (const char* f : {"metrics.csv", "frames.csv", "checkpoint.txt", "curve.csv"}) {
        INFO(f);
        const auto x = slurp(a / "o" / f);
        CHECK_FALSE(x.empty());
        CHECK(x == slurp(b / "o" / f));
    }
}

TEST_CASE("compare reports power reduction against the first strategy") {
    const auto dir = scratch("compare");
    auto r = cli({"compare", "--gen", kShort, "--strategies", "origin,origin", "--out",
                  dir.string()});
    REQUIRE(r.code == kExitOk);
    auto rows = lines(slurp(dir / "compare.csv"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[1] == "approach,L/F,KF#,WT,WP,P/V,mAP,power_reduction_pct");
    CHECK(rows[2] == rows[3]);
    CHECK(rows[3].substr(rows[3].rfind(',') + 1) == "0.00");

    r = cli({"compare", "--gen", kShort, "--strategies", "origin,static_0.7", "--out",
             dir.string()});
    REQUIRE(r.code == kExitOk);
    rows = lines(slurp(dir / "compare.csv"));
    auto field = [](const std::string& row, int n) {
        std::stringstream ss(row);
        std::string item;
        for (int i = 0; i <= n; ++i) {
            std::getline(ss, item, ',');
        }
        return item;
    };
    CHECK(std::stoul(field(rows[3], 2)) < std::stoul(field(rows[2], 2)));
    CHECK(std::stod(field(rows[3], 7)) > 0.0);
}

TEST_CASE("train, resume and evaluate") {
    const auto dir = scratch("train");
    const auto ckpt = (dir / "agents.txt").string();
    auto r = cli({"train", "--gen", kShort, "--steps", "200", "--checkpoint", ckpt, "--out",
                  dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(slurp(ckpt).rfind("# config-hash: ", 0) == 0);

    const auto dir2 = scratch("train_resume");
    r = cli({"train", "--gen", kShort, "--steps", "100", "--resume", ckpt, "--out",
             dir2.string()});
    REQUIRE(r.code == kExitOk);
    const auto curve = lines(slurp(dir2 / "curve.csv"));
    REQUIRE(curve.size() == 2 + 100);
    CHECK(curve[2].rfind("201,", 0) == 0);
    CHECK(curve.back().rfind("300,", 0) == 0);

    RunConfig cfg;
    apply_gen_overrides(cfg, kShort);
    const auto s = build_scenario(cfg);
    Coordinator coord(s.space, cfg.marl, cfg.seed);
    CHECK(load_checkpoint((dir2 / "checkpoint.txt").string(), coord) == 300);

    r = cli({"compare", "--gen", kShort, "--strategies", "origin,marl", "--checkpoint", ckpt,
             "--out", dir.string()});
    CHECK(r.code == kExitOk);
    CHECK(lines(slurp(dir / "compare.csv")).size() == 4);
}

TEST_CASE("zero steps still writes a checkpoint") {
    const auto dir = scratch("zero");
    const auto r = cli({"train", "--gen", kShort, "--steps", "0", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(fs::exists(dir / "checkpoint.txt"));
    CHECK(lines(slurp(dir / "curve.csv")).size() == 2);
}

TEST_CASE("divergence exits 4 with the last good checkpoint") {
    const auto dir = scratch("diverge");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "run.json") << R"({"marl": {"lr": 1e300, "lr_final": 1e300}})";
    }
    const auto r = cli({"train", "--config", (dir / "run.json").string(), "--gen", kShort,
                        "--steps", "500", "--out", dir.string()});
    CHECK(r.code == kExitDivergence);
    CHECK(r.err.find("non-finite") != std::string::npos);
    REQUIRE(fs::exists(dir / "checkpoint.txt"));
    RunConfig cfg;
    apply_gen_overrides(cfg, kShort);
    const auto s = build_scenario(cfg);
    Coordinator coord(s.space, cfg.marl, cfg.seed);
    CHECK(load_checkpoint((dir / "checkpoint.txt").string(), coord) < 500);
}

TEST_CASE("oracle front and cap") {
    const auto dir = scratch("oracle");
    auto r = cli({"oracle", "--gen", kShort, "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    const auto rows = lines(slurp(dir / "front.csv"));
    CHECK(rows.size() == 2 + 1248);
    CHECK(r.out.find("best:") != std::string::npos);

    r = cli({"oracle", "--gen", kShort, "--cap", "1000", "--out", dir.string()});
    CHECK(r.code == kExitRuntime);
    CHECK(r.err.find("1248") != std::string::npos);
    r = cli({"oracle", "--gen", kShort, "--unbounded", "--out", dir.string()});
    CHECK(r.code == kExitRuntime);
}

TEST_CASE("validate, select and gen-trace") {
    const auto dir = scratch("misc");
    auto r = cli({"validate", "--gen", kShort, "--noise", "0", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("cpu axis: mean 0.00000") != std::string::npos);
    CHECK(fs::exists(dir / "validation.csv"));

    r = cli({"select", "--gen", kShort, "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(lines(slurp(dir / "keyframes.csv")).size() > 2);

    r = cli({"gen-trace", "--gen", "fps=10,duration_ms=1000", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    const auto trace_path = dir / "trace.csv";
    CHECK(slurp(trace_path).rfind("# config-hash: ", 0) == 0);

    // The written trace feeds back in as input.
    r = cli({"simulate", "--trace", trace_path.string(), "--out", (dir / "again").string()});
    CHECK(r.code == kExitOk);
    CHECK(lines(slurp(dir / "again" / "frames.csv")).size() == 2 + 10);
}
