// CLI contract tests: spawn the built `recomp` binary (path via RECOMP_CLI)
// with the real codec driver and check the stdout/stderr/exit-code contract.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "recomp/codec_tool.hpp"
#include "recomp/feature.hpp"
#include "recomp/subprocess.hpp"

using namespace recomp;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("RECOMP_CLI");
    REQUIRE_MESSAGE(env != nullptr, "RECOMP_CLI must point at the built CLI");
    return env;
}

std::string codecd_path() {
    const char* env = std::getenv("RECOMP_CODEC_TOOL");
    REQUIRE_MESSAGE(env != nullptr, "RECOMP_CODEC_TOOL must be set");
    return env;
}

RunResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), cli_path());
    return run_process(args);
}

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "recomp-cli-test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

const fs::path& clip() {
    static fs::path p = [] {
        fs::path c = work_dir() / "clip.mp4";
        CodecTool(codecd_path()).synthesize_clip(c, 320, 240, 24, 30, 31337, {});
        return c;
    }();
    return p;
}

} // namespace

TEST_CASE("usage errors exit 2 with diagnostics on stderr") {
    RunResult none = cli({});
    CHECK(none.exit_code == 2);
    CHECK(none.output.empty());
    CHECK(!none.error.empty());

    RunResult unknown = cli({"frobnicate"});
    CHECK(unknown.exit_code == 2);

    RunResult missing_model = cli({"predict", "--model", "/does/not/exist.model",
                                   clip().string()});
    CHECK(missing_model.exit_code == 2);
    CHECK(missing_model.output.empty());
    CHECK(missing_model.error.find("error:") != std::string::npos);
}

TEST_CASE("--show-config reports layered sources") {
    const fs::path cfg = work_dir() / "recomp.conf";
    std::ofstream(cfg) << "quality = 30\n";
    RunResult r = cli({"--config", cfg.string(), "--gop", "8", "--show-config"});
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("quality = 30    (config-file)") != std::string::npos);
    CHECK(r.output.find("gop = 8    (flag)") != std::string::npos);
    CHECK(r.output.find("bframes = 2    (default)") != std::string::npos);
    CHECK(r.output.find("codec_tool") != std::string::npos);
}

TEST_CASE("extract emits the feature CSV on stdout only") {
    RunResult r = cli({"extract", clip().string(), "-n", "2"});
    REQUIRE(r.exit_code == 0);
    std::istringstream out(r.output);
    auto rows = read_feature_csv(out);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].values.size() == 2);
    CHECK(rows[0].values[0] > 0.0);
    CHECK(!rows[0].label.has_value());
}

TEST_CASE("ladder builds a reusable directory; extract accepts it") {
    const fs::path dir = work_dir() / "clip.ladder";
    RunResult r = cli({"ladder", clip().string(), "-n", "2", "--out", dir.string()});
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find(dir.filename().string()) != std::string::npos);
    CHECK(fs::exists(dir / "ladder.txt"));
    CHECK(fs::exists(dir / "gen2.mv.txt"));

    RunResult e = cli({"extract", dir.string(), "-n", "2"});
    REQUIRE(e.exit_code == 0);
    std::istringstream out(e.output);
    auto rows = read_feature_csv(out);
    REQUIRE(rows.size() == 1);

    // same video through the video path gives identical features
    RunResult direct = cli({"extract", clip().string(), "-n", "2"});
    CHECK(direct.output == e.output);
}

TEST_CASE("full corpus flow: synthesize, evaluate, train, predict") {
    const fs::path corpus = work_dir() / "corpus";
    RunResult syn = cli({"--seed", "77", "synthesize", "--out", corpus.string(),
                         "--originals", "6", "--double", "6", "--resolution", "320x240",
                         "--frames", "48"});
    REQUIRE(syn.exit_code == 0);
    const fs::path manifest = corpus / "manifest.csv";
    CHECK(syn.output.find("manifest.csv") != std::string::npos);
    REQUIRE(fs::exists(manifest));

    // deterministic resynthesis: same seed, same corpus manifest
    const fs::path corpus2 = work_dir() / "corpus2";
    RunResult syn2 = cli({"--seed", "77", "synthesize", "--out", corpus2.string(),
                          "--originals", "6", "--double", "6", "--resolution", "320x240",
                          "--frames", "48"});
    REQUIRE(syn2.exit_code == 0);
    auto read_tail = [](const fs::path& p) {
        std::ifstream in(p);
        std::string line, body;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#') body += line + "\n";
        return body;
    };
    CHECK(read_tail(manifest) == read_tail(corpus2 / "manifest.csv"));

    const fs::path exp = work_dir() / "exp";
    RunResult ev = cli({"--seed", "77", "--jobs", "2", "evaluate", manifest.string(), "-n", "2",
                        "--folds", "3", "--out", exp.string()});
    REQUIRE(ev.exit_code == 0);
    CHECK(ev.output.find("accuracy:") != std::string::npos);
    CHECK(fs::exists(exp / "report.csv"));
    CHECK(fs::exists(exp / "features.csv"));

    // train on the experiment's feature table
    const fs::path model = work_dir() / "binary.model";
    RunResult tr = cli({"--seed", "77", "train", (exp / "features.csv").string(), "--out",
                        model.string(), "--folds", "3"});
    REQUIRE(tr.exit_code == 0);
    REQUIRE(fs::exists(model));
    CHECK(tr.error.find("grid search:") != std::string::npos);

    // predict a fresh original clip: human verdict then JSON shape
    const fs::path probe_clip = work_dir() / "probe.mp4";
    CodecTool(codecd_path()).synthesize_clip(probe_clip, 320, 240, 48, 30, 424242, {});
    RunResult verdict = cli({"predict", "--model", model.string(), probe_clip.string()});
    REQUIRE(verdict.exit_code == 0);
    CHECK((verdict.output.find("original") == 0 || verdict.output.find("recompressed") == 0));
    CHECK(verdict.output.find("v0=") != std::string::npos);

    RunResult jr = cli({"--json", "predict", "--model", model.string(), probe_clip.string()});
    REQUIRE(jr.exit_code == 0);
    auto doc = nlohmann::json::parse(jr.output);
    CHECK(doc.contains("class"));
    CHECK(doc.contains("label"));
    CHECK(doc["features"].size() == 2);
    CHECK((doc["class"] == "original" || doc["class"] == "recompressed"));
}

TEST_CASE("analysis errors exit 1") {
    // a ladder directory shallower than the requested n
    const fs::path dir = work_dir() / "short.ladder";
    RunResult r = cli({"ladder", clip().string(), "-n", "1", "--out", dir.string()});
    REQUIRE(r.exit_code == 0);
    RunResult e = cli({"extract", dir.string(), "-n", "3"});
    CHECK(e.exit_code == 1);
    CHECK(e.error.find("error:") != std::string::npos);
}
