#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "recomp/codec_tool.hpp"
#include "recomp/feature.hpp"

namespace recomp {

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

/// Content-addressed store for extracted feature vectors. The key binds the
/// video bytes, the ladder depth, the encode configuration and the codec
/// tool version, so any relevant change recomputes instead of reusing.
class FeatureCache {
public:
    explicit FeatureCache(std::filesystem::path dir);

    static std::string key_for(const std::string& video_digest, int n,
                               const EncodeConfig& config, const std::string& tool_version);

    std::optional<FeatureVector> lookup(const std::string& key) const;
    void store(const std::string& key, const FeatureVector& value) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

} // namespace recomp
