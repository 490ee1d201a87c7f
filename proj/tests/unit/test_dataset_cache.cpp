#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "recomp/cache.hpp"
#include "recomp/dataset.hpp"
#include "recomp/errors.hpp"

using namespace recomp;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir(const char* name) {
    fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}
} // namespace

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("sha256_file_hex matches the in-memory digest") {
    const fs::path p = fs::temp_directory_path() / "recomp_digest_test.bin";
    {
        std::ofstream out(p, std::ios::binary);
        out << "abc";
    }
    CHECK(sha256_file_hex(p) == sha256_hex("abc"));
    fs::remove(p);
}

TEST_CASE("feature cache stores and retrieves full-precision vectors") {
    const fs::path dir = scratch_dir("recomp_cache_test");
    FeatureCache cache(dir);

    FeatureVector v;
    v.values = {34.400000000000006, 1.0 / 3.0};
    v.label = 1;
    const std::string key = FeatureCache::key_for("deadbeef", 2, {}, "tool 1.0");
    CHECK(!cache.lookup(key).has_value());
    cache.store(key, v);
    auto hit = cache.lookup(key);
    REQUIRE(hit.has_value());
    CHECK(hit->values == v.values); // exact round trip
    CHECK(hit->label == 1);

    // key binds every relevant input
    EncodeConfig other;
    other.quality_scale = 24;
    CHECK(FeatureCache::key_for("deadbeef", 2, other, "tool 1.0") != key);
    CHECK(FeatureCache::key_for("deadbeef", 3, {}, "tool 1.0") != key);
    CHECK(FeatureCache::key_for("deadbeef", 2, {}, "tool 2.0") != key);
    CHECK(FeatureCache::key_for("deadbeee", 2, {}, "tool 1.0") != key);
    fs::remove_all(dir);
}

TEST_CASE("manifest save/load round trip with provenance and relative paths") {
    const fs::path dir = scratch_dir("recomp_manifest_test");
    fs::create_directories(dir / "clips");
    for (const char* name : {"a.mp4", "b.mp4", "c.mp4"}) {
        std::ofstream out(dir / "clips" / name);
        out << "x";
    }

    DatasetManifest m;
    m.provenance = {"unit-test corpus", "seed 1"};
    m.entries.push_back({dir / "clips/a.mp4", VideoClass::Original, "other", Split::Train});
    m.entries.push_back({dir / "clips/b.mp4", VideoClass::DoubleCompressed, "other", Split::Train});
    m.entries.push_back({dir / "clips/c.mp4", VideoClass::TripleCompressed, "720x480",
                         Split::Predict});
    m.save(dir / "manifest.csv");

    DatasetManifest back = DatasetManifest::load(dir / "manifest.csv");
    REQUIRE(back.entries.size() == 3);
    CHECK(back.provenance == m.provenance);
    CHECK(back.entries[0].path == dir / "clips/a.mp4");
    CHECK(back.entries[1].label == VideoClass::DoubleCompressed);
    CHECK(back.entries[2].split == Split::Predict);
    CHECK(back.entries[2].resolution == "720x480");

    SUBCASE("missing file fails validation") {
        fs::remove(dir / "clips/b.mp4");
        CHECK_THROWS_AS(DatasetManifest::load(dir / "manifest.csv"), Error);
        CHECK_NOTHROW(DatasetManifest::load(dir / "manifest.csv", false));
    }
    SUBCASE("split disjointness is enforced") {
        DatasetManifest bad = back;
        bad.entries.push_back({dir / "clips/a.mp4", VideoClass::Original, "other",
                               Split::Predict});
        CHECK_THROWS_AS(bad.validate(), Error);
    }
    SUBCASE("bad resolution tag is rejected") {
        DatasetManifest bad = back;
        bad.entries[0].resolution = "640x480";
        CHECK_THROWS_AS(bad.validate(false), Error);
    }
    fs::remove_all(dir);
}

TEST_CASE("resolution tags mirror the evaluation classes") {
    CHECK(resolution_tag(720, 480) == "720x480");
    CHECK(resolution_tag(720, 1280) == "720x1280");
    CHECK(resolution_tag(1920, 1080) == "1920x1080");
    CHECK(resolution_tag(3840, 2160) == "4K");
    CHECK(resolution_tag(320, 240) == "other");
    CHECK(is_valid_resolution_tag("4K"));
    CHECK(!is_valid_resolution_tag("1024x768"));
}

TEST_CASE("class names round trip") {
    for (VideoClass c : {VideoClass::Original, VideoClass::DoubleCompressed,
                         VideoClass::TripleCompressed})
        CHECK(video_class_from_name(video_class_name(c)) == c);
    CHECK_THROWS_AS(video_class_from_name("quadruple"), Error);
}
