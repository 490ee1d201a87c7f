#include "recomp/cache.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "recomp/errors.hpp"

namespace recomp {

namespace fs = std::filesystem;

namespace {

std::string digest_to_hex(const unsigned char* digest, unsigned len) {
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

struct EvpCtx {
    EVP_MD_CTX* ctx;
    EvpCtx() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
            throw Error(Errc::Io, "sha256 init failed");
    }
    ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

} // namespace

std::string sha256_hex(std::string_view data) {
    EvpCtx c;
    EVP_DigestUpdate(c.ctx, data.data(), data.size());
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(c.ctx, digest, &len);
    return digest_to_hex(digest, len);
}

std::string sha256_file_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    EvpCtx c;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(c.ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(c.ctx, digest, &len);
    return digest_to_hex(digest, len);
}

FeatureCache::FeatureCache(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
}

std::string FeatureCache::key_for(const std::string& video_digest, int n,
                                  const EncodeConfig& config, const std::string& tool_version) {
    std::ostringstream ss;
    ss << video_digest << '\n' << n << '\n' << config.to_string() << '\n' << tool_version << '\n';
    return sha256_hex(std::move(ss).str());
}

std::optional<FeatureVector> FeatureCache::lookup(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".feat"), std::ios::binary);
    if (!in) return std::nullopt;
    FeatureVector v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "value") {
            double x;
            ss >> x;
            if (ss.fail()) return std::nullopt; // treat corrupt entries as misses
            v.values.push_back(x);
        } else if (tag == "label") {
            int l;
            ss >> l;
            if (!ss.fail()) v.label = l;
        }
    }
    if (v.values.empty()) return std::nullopt;
    return v;
}

void FeatureCache::store(const std::string& key, const FeatureVector& value) const {
    const fs::path final_path = dir_ / (key + ".feat");
    const fs::path tmp_path = dir_ / (key + ".feat.tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary);
        if (!out) throw Error(Errc::Io, "cannot write cache entry " + tmp_path.string());
        char buf[64];
        for (double x : value.values) {
            snprintf(buf, sizeof buf, "value %.17g\n", x);
            out << buf;
        }
        if (value.label) out << "label " << *value.label << "\n";
        if (!out) throw Error(Errc::Io, "short write to cache entry");
    }
    fs::rename(tmp_path, final_path);
}

} // namespace recomp
