#include "recomp/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "recomp/errors.hpp"

namespace recomp {

namespace fs = std::filesystem;

const char* video_class_name(VideoClass c) {
    switch (c) {
    case VideoClass::Original: return "original";
    case VideoClass::DoubleCompressed: return "double";
    case VideoClass::TripleCompressed: return "triple";
    }
    return "original";
}

VideoClass video_class_from_name(std::string_view name) {
    if (name == "original") return VideoClass::Original;
    if (name == "double") return VideoClass::DoubleCompressed;
    if (name == "triple") return VideoClass::TripleCompressed;
    throw Error(Errc::Grammar, "unknown class '" + std::string(name) + "'");
}

std::string resolution_tag(int width, int height) {
    if (width == 720 && height == 480) return "720x480";
    if (width == 720 && height == 1280) return "720x1280";
    if (width == 1920 && height == 1080) return "1920x1080";
    if ((width == 3840 && height == 2160) || (width == 4096 && height == 2160)) return "4K";
    return "other";
}

bool is_valid_resolution_tag(std::string_view tag) {
    return tag == "720x480" || tag == "720x1280" || tag == "1920x1080" || tag == "4K" ||
           tag == "other";
}

void DatasetManifest::validate(bool check_paths) const {
    std::set<std::string> train_paths, predict_paths;
    for (const ManifestEntry& e : entries) {
        if (!is_valid_resolution_tag(e.resolution))
            throw Error(Errc::Grammar, "bad resolution tag '" + e.resolution + "' for " +
                                           e.path.string());
        if (check_paths && !fs::exists(e.path))
            throw Error(Errc::FileNotFound, e.path.string());
        (e.split == Split::Train ? train_paths : predict_paths).insert(e.path.string());
    }
    for (const std::string& p : train_paths)
        if (predict_paths.count(p))
            throw Error(Errc::Grammar, "path in both train and predict splits: " + p);
}

void DatasetManifest::save(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write manifest " + path.string());
    for (const std::string& note : provenance) out << "# " << note << "\n";
    out << "path,class,resolution,split\n";
    for (const ManifestEntry& e : entries) {
        fs::path rel = e.path.lexically_proximate(path.parent_path());
        out << rel.string() << ',' << video_class_name(e.label) << ',' << e.resolution << ','
            << (e.split == Split::Train ? "train" : "predict") << "\n";
    }
    if (!out) throw Error(Errc::Io, "short write to manifest");
}

DatasetManifest DatasetManifest::load(const fs::path& path, bool check_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, path.string());
    DatasetManifest m;
    const fs::path base = path.parent_path();
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string note = line.substr(1);
            if (!note.empty() && note.front() == ' ') note.erase(0, 1);
            m.provenance.push_back(note);
            continue;
        }
        if (!header_seen) {
            if (line != "path,class,resolution,split")
                throw Error(Errc::Grammar, line_no, "expected manifest header, got: " + line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 4)
            throw Error(Errc::Grammar, line_no, "expected 4 fields: " + line);
        ManifestEntry e;
        fs::path p(fields[0]);
        e.path = p.is_absolute() ? p : base / p;
        e.label = video_class_from_name(fields[1]);
        e.resolution = fields[2];
        if (fields[3] == "train") e.split = Split::Train;
        else if (fields[3] == "predict") e.split = Split::Predict;
        else throw Error(Errc::Grammar, line_no, "bad split '" + fields[3] + "'");
        m.entries.push_back(std::move(e));
    }
    m.validate(check_paths);
    return m;
}

} // namespace recomp
