#pragma once

#include <map>
#include <string>
#include <vector>

#include "mloc/catalog.hpp"

namespace mloc {

enum class Modality { CE, WCE };
enum class Split { Support, Eval };

const char* modality_name(Modality m);
const char* split_name(Split s);

struct DatasetRecord {
    std::string id;
    std::string path;  // relative to the manifest's directory unless absolute
    int anatomical_index = 0;
    Modality modality = Modality::CE;
    Split split = Split::Support;
};

// UTF-8, header "#MLOC-DS v1", lines `id,path,anatomical_index,modality,split`.
struct DatasetManifest {
    std::vector<DatasetRecord> records;
    std::string base_dir;  // directory the manifest was loaded from

    std::string resolve_path(const DatasetRecord& rec) const;
    std::vector<DatasetRecord> split_records(Split s) const;
};

DatasetManifest load_dataset_manifest(const std::string& path, const AnatomicalCatalog& catalog);
void save_dataset_manifest(const DatasetManifest& manifest, const std::string& path);

struct VideoFrame {
    std::string frame_id;
    std::string source;  // image path or embedding id
};

// UTF-8, header "#MLOC-VID v1 fps=<n>", lines `frame_id,path_or_embedding_id`.
struct VideoManifest {
    std::size_t fps = 1;
    std::vector<VideoFrame> frames;
    std::string base_dir;

    std::string resolve_path(const VideoFrame& frame) const;
};

VideoManifest load_video_manifest(const std::string& path);
void save_video_manifest(const VideoManifest& manifest, const std::string& path);

// Flat key=value config file; '#' starts a comment line.
std::map<std::string, std::string> load_config_file(const std::string& path);

// Label files: lines `id,label` (label by name or index).
std::vector<std::pair<std::string, int>> load_label_file(const std::string& path,
                                                         const AnatomicalCatalog& catalog);

}  // namespace mloc
