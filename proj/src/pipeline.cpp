#include "mloc/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mloc/embedder.hpp"
#include "mloc/image.hpp"

namespace mloc {

std::vector<TrainItem> train_items_from_manifest(const DatasetManifest& manifest,
                                                 std::size_t image_size) {
    std::vector<TrainItem> items;
    for (const auto& rec : manifest.split_records(Split::Support)) {
        items.push_back({rec.id, rec.anatomical_index,
                         load_image(manifest.resolve_path(rec), image_size)});
    }
    if (items.empty()) throw Error("manifest has no support records");
    return items;
}

std::vector<TrainItem> train_items_from_embeddings(const IngestResult& ingest) {
    std::vector<TrainItem> items;
    for (const auto& rec : ingest.records) {
        if (rec.label_index == 0) continue;  // unlabeled rows cannot train
        items.push_back({rec.id, rec.label_index,
                         Tensor({rec.embedding.values.size()}, rec.embedding.values)});
    }
    if (items.empty()) throw Error("embedding file has no labeled records");
    return items;
}

SupportIndex support_index_from_manifest(const Network& net, const DatasetManifest& manifest,
                                         std::size_t image_size,
                                         const AnatomicalCatalog& catalog) {
    std::map<int, std::vector<EmbeddingVector>> members;
    for (const auto& rec : manifest.split_records(Split::Support)) {
        members[rec.anatomical_index].push_back(
            embed_image(net, load_image(manifest.resolve_path(rec), image_size)));
    }
    return SupportIndex(catalog, std::move(members));
}

SupportIndex support_index_from_embeddings(const Network& head, const IngestResult& ingest,
                                           const AnatomicalCatalog& catalog) {
    std::map<int, std::vector<EmbeddingVector>> members;
    for (const auto& rec : ingest.records) {
        if (rec.label_index == 0) continue;
        members[rec.label_index].push_back(embed_vector(head, rec.embedding.values));
    }
    return SupportIndex(catalog, std::move(members));
}

std::vector<EmbeddingVector> embed_video_frames(const LoadedModel& model,
                                                const VideoManifest& video,
                                                std::size_t image_size,
                                                const IngestResult* embeddings) {
    std::vector<EmbeddingVector> out;
    out.reserve(video.frames.size());
    for (const auto& frame : video.frames) {
        if (model.is_image_model) {
            const std::string path = video.resolve_path(frame);
            if (!std::filesystem::exists(path)) {
                throw Error("video frame \"" + frame.frame_id + "\": cannot resolve image " + path);
            }
            out.push_back(embed_image(model.net, load_image(path, image_size)));
        } else {
            if (!embeddings) {
                throw Error("video frame \"" + frame.frame_id +
                            "\": checkpoint is an embedding head but no embedding file was given");
            }
            const EmbeddingRecord* rec = embeddings->find(frame.source);
            if (!rec) {
                throw Error("video frame \"" + frame.frame_id + "\": embedding id \"" +
                            frame.source + "\" not found");
            }
            out.push_back(embed_vector(model.net, rec->embedding.values));
        }
    }
    return out;
}

void write_frame_dump(const std::vector<std::string>& frame_ids,
                      const std::vector<FramePrediction>& predictions,
                      const SupportIndex& index, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("frame dump: cannot write " + path);
    const auto classes = index.class_indices();
    os << "#frames v1 classes=";
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (i) os << ";";
        os << index.catalog().name_of(classes[i]);
    }
    os << "\n";
    char buf[48];
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", predictions[i].winning_median);
        os << frame_ids[i] << "," << index.catalog().name_of(predictions[i].label) << "," << buf;
        for (int c : classes) {
            std::snprintf(buf, sizeof(buf), "%.17g", predictions[i].per_class_median.at(c));
            os << "," << buf;
        }
        os << "\n";
    }
}

void write_frame_labels(const std::vector<std::string>& frame_ids,
                        const std::vector<int>& labels, const AnatomicalCatalog& catalog,
                        const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("frame labels: cannot write " + path);
    for (std::size_t i = 0; i < frame_ids.size(); ++i) {
        os << frame_ids[i] << "," << catalog.name_of(labels[i]) << "\n";
    }
}

void write_window_predictions(const std::vector<WindowPrediction>& windows,
                              const AnatomicalCatalog& catalog, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("windows: cannot write " + path);
    char buf[48];
    for (const auto& w : windows) {
        std::snprintf(buf, sizeof(buf), "%.17g", w.group_avg_distance);
        os << w.start << "," << w.end << "," << catalog.name_of(w.label) << "," << buf << "\n";
    }
}

FrameDump read_frame_dump(const std::string& path, const AnatomicalCatalog& catalog) {
    std::ifstream is(path);
    if (!is) throw Error("frame dump: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("#frames v1 classes=", 0) != 0) {
        throw Error("frame dump: missing header in " + path);
    }
    FrameDump dump;
    {
        std::stringstream ss(line.substr(std::string("#frames v1 classes=").size()));
        std::string name;
        while (std::getline(ss, name, ';'))
            if (!name.empty()) dump.classes.push_back(catalog.index_of(name));
    }
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string field;
        FramePrediction pred;
        std::string id;
        if (!std::getline(ss, id, ',')) throw Error("frame dump: malformed row in " + path);
        std::getline(ss, field, ',');
        pred.label = catalog.index_of(field);
        std::getline(ss, field, ',');
        pred.winning_median = std::stod(field);
        for (int c : dump.classes) {
            if (!std::getline(ss, field, ',')) {
                throw Error("frame dump: row \"" + id + "\" is missing medians");
            }
            pred.per_class_median[c] = std::stod(field);
        }
        dump.ids.push_back(id);
        dump.predictions.push_back(std::move(pred));
    }
    return dump;
}

}  // namespace mloc
