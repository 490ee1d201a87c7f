#include "recomp/config.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>

#include "recomp/errors.hpp"

namespace recomp {

void CliConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::FileNotFound, "config file " + path.string());
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::Grammar, line_no, "expected key=value: " + line);
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t");
            size_t e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "quality") encode.quality_scale = std::stoi(value);
            else if (key == "gop") encode.gop_length = std::stoi(value);
            else if (key == "bframes") encode.b_frames = std::stoi(value);
            else if (key == "preset") encode.preset = value;
            else if (key == "codec_tool") codec_tool = value;
            else if (key == "jobs") jobs = std::stoi(value);
            else if (key == "seed") seed = std::stoull(value);
            else throw Error(Errc::Grammar, line_no, "unknown config key '" + key + "'");
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error(Errc::Grammar, line_no, "bad value for '" + key + "': " + value);
        }
        set_source(key, Source::File);
    }
}

void CliConfig::load_env() {
    if (const char* v = std::getenv("RECOMP_CODEC_TOOL"); v && *v) {
        codec_tool = std::filesystem::path(v);
        set_source("codec_tool", Source::Env);
    }
}

CliConfig::Source CliConfig::source_of(const std::string& key) const {
    auto it = sources_.find(key);
    return it == sources_.end() ? Source::Default : it->second;
}

namespace {
const char* source_name(CliConfig::Source s) {
    switch (s) {
    case CliConfig::Source::Default: return "default";
    case CliConfig::Source::File: return "config-file";
    case CliConfig::Source::Env: return "environment";
    case CliConfig::Source::Flag: return "flag";
    }
    return "default";
}
} // namespace

void CliConfig::print_effective(std::ostream& out) const {
    auto row = [&](const std::string& key, const std::string& value) {
        out << key << " = " << value << "    (" << source_name(source_of(key)) << ")\n";
    };
    row("quality", std::to_string(encode.quality_scale));
    row("gop", std::to_string(encode.gop_length));
    row("bframes", std::to_string(encode.b_frames));
    row("preset", encode.preset);
    row("codec_tool", codec_tool ? codec_tool->string() : "(auto-locate)");
    row("jobs", std::to_string(jobs));
    row("seed", std::to_string(seed));
    row("keep", keep ? "true" : "false");
    row("json", json ? "true" : "false");
}

} // namespace recomp
