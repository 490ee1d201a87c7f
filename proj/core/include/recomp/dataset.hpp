#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace recomp {

enum class VideoClass : int { Original = 0, DoubleCompressed = 1, TripleCompressed = 2 };

const char* video_class_name(VideoClass c);
VideoClass video_class_from_name(std::string_view name);

enum class Split { Train, Predict };

struct ManifestEntry {
    std::filesystem::path path;
    VideoClass label = VideoClass::Original;
    std::string resolution; // one of 720x480, 720x1280, 1920x1080, 4K, other
    Split split = Split::Train;
};

/// Resolution tag for a concrete frame size.
std::string resolution_tag(int width, int height);
bool is_valid_resolution_tag(std::string_view tag);

/// CSV `path,class,resolution,split` with leading `#` provenance comments.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> provenance;

    /// Validates resolution tags, split disjointness by path, and (when
    /// check_paths) that every video exists.
    void validate(bool check_paths = true) const;

    void save(const std::filesystem::path& path) const;

    /// Relative entry paths are resolved against the manifest's directory.
    static DatasetManifest load(const std::filesystem::path& path, bool check_paths = true);
};

} // namespace recomp
