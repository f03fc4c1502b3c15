#include "mloc/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace fs = std::filesystem;

namespace mloc {

namespace {

std::string dir_of(const std::string& path) {
    const auto parent = fs::path(path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

std::string resolve(const std::string& base, const std::string& p) {
    if (fs::path(p).is_absolute()) return p;
    return (fs::path(base) / p).string();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

const char* modality_name(Modality m) { return m == Modality::CE ? "CE" : "WCE"; }
const char* split_name(Split s) { return s == Split::Support ? "support" : "eval"; }

std::string DatasetManifest::resolve_path(const DatasetRecord& rec) const {
    return resolve(base_dir, rec.path);
}

std::vector<DatasetRecord> DatasetManifest::split_records(Split s) const {
    std::vector<DatasetRecord> out;
    for (const auto& r : records)
        if (r.split == s) out.push_back(r);
    return out;
}

DatasetManifest load_dataset_manifest(const std::string& path,
                                      const AnatomicalCatalog& catalog) {
    std::ifstream is(path);
    if (!is) throw Error("manifest: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("#MLOC-DS v1", 0) != 0) {
        throw Error("manifest: missing #MLOC-DS v1 header in " + path);
    }
    DatasetManifest manifest;
    manifest.base_dir = dir_of(path);
    std::unordered_set<std::string> ids;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() != 5) {
            throw Error("manifest: line " + std::to_string(line_no) + " has " +
                        std::to_string(f.size()) + " fields, expected 5");
        }
        DatasetRecord rec;
        rec.id = f[0];
        rec.path = f[1];
        try {
            rec.anatomical_index = std::stoi(f[2]);
        } catch (...) {
            throw Error("manifest: bad anatomical index at line " + std::to_string(line_no));
        }
        if (!catalog.contains(rec.anatomical_index)) {
            throw Error("manifest: anatomical index " + f[2] + " at line " +
                        std::to_string(line_no) + " not in catalog");
        }
        if (f[3] == "CE") rec.modality = Modality::CE;
        else if (f[3] == "WCE") rec.modality = Modality::WCE;
        else throw Error("manifest: bad modality \"" + f[3] + "\" at line " + std::to_string(line_no));
        if (f[4] == "support") rec.split = Split::Support;
        else if (f[4] == "eval") rec.split = Split::Eval;
        else throw Error("manifest: bad split \"" + f[4] + "\" at line " + std::to_string(line_no));
        if (!ids.insert(rec.id).second) {
            throw Error("manifest: duplicate id \"" + rec.id + "\" at line " +
                        std::to_string(line_no));
        }
        manifest.records.push_back(std::move(rec));
    }
    return manifest;
}

void save_dataset_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("manifest: cannot write " + path);
    os << "#MLOC-DS v1\n";
    for (const auto& r : manifest.records) {
        os << r.id << "," << r.path << "," << r.anatomical_index << ","
           << modality_name(r.modality) << "," << split_name(r.split) << "\n";
    }
}

std::string VideoManifest::resolve_path(const VideoFrame& frame) const {
    return resolve(base_dir, frame.source);
}

VideoManifest load_video_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("video manifest: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("#MLOC-VID v1", 0) != 0) {
        throw Error("video manifest: missing #MLOC-VID v1 header in " + path);
    }
    VideoManifest manifest;
    manifest.base_dir = dir_of(path);
    const auto pos = line.find("fps=");
    if (pos == std::string::npos) {
        throw Error("video manifest: header must declare fps= in " + path);
    }
    try {
        manifest.fps = std::stoul(line.substr(pos + 4));
    } catch (...) {
        throw Error("video manifest: bad fps in " + path);
    }
    if (manifest.fps < 1) throw Error("video manifest: fps must be >= 1 in " + path);
    std::size_t line_no = 1;
    std::unordered_set<std::string> ids;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() != 2) {
            throw Error("video manifest: line " + std::to_string(line_no) +
                        " must be `frame_id,path_or_embedding_id`");
        }
        if (!ids.insert(f[0]).second) {
            throw Error("video manifest: duplicate frame id \"" + f[0] + "\"");
        }
        manifest.frames.push_back({f[0], f[1]});
    }
    if (manifest.frames.empty()) throw Error("video manifest: no frames in " + path);
    return manifest;
}

void save_video_manifest(const VideoManifest& manifest, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("video manifest: cannot write " + path);
    os << "#MLOC-VID v1 fps=" << manifest.fps << "\n";
    for (const auto& f : manifest.frames) os << f.frame_id << "," << f.source << "\n";
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("config: cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error("config: line " + std::to_string(line_no) + " is not key=value");
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw Error("config: line " + std::to_string(line_no) + " has an empty key");
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::vector<std::pair<std::string, int>> load_label_file(const std::string& path,
                                                         const AnatomicalCatalog& catalog) {
    std::ifstream is(path);
    if (!is) throw Error("labels: cannot open " + path);
    std::vector<std::pair<std::string, int>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() < 2) {
            throw Error("labels: line " + std::to_string(line_no) + " must be `id,label`");
        }
        out.emplace_back(f[0], catalog.index_of(f[1]));
    }
    return out;
}

}  // namespace mloc
