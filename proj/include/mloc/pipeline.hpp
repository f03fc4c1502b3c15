#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mloc/checkpoint.hpp"
#include "mloc/embedding.hpp"
#include "mloc/inference.hpp"
#include "mloc/manifest.hpp"
#include "mloc/sequence.hpp"
#include "mloc/siamese.hpp"

namespace mloc {

// Orchestration shared by the CLI and the end-to-end tests.

std::vector<TrainItem> train_items_from_manifest(const DatasetManifest& manifest,
                                                 std::size_t image_size);
std::vector<TrainItem> train_items_from_embeddings(const IngestResult& ingest);

SupportIndex support_index_from_manifest(const Network& net, const DatasetManifest& manifest,
                                         std::size_t image_size, const AnatomicalCatalog& catalog);
SupportIndex support_index_from_embeddings(const Network& head, const IngestResult& ingest,
                                           const AnatomicalCatalog& catalog);

// Resolves every video frame to an embedding: through the image model when
// the source is a file, or through the head applied to the ingested record.
std::vector<EmbeddingVector> embed_video_frames(const LoadedModel& model,
                                                const VideoManifest& video,
                                                std::size_t image_size,
                                                const IngestResult* embeddings);

void write_frame_dump(const std::vector<std::string>& frame_ids,
                      const std::vector<FramePrediction>& predictions,
                      const SupportIndex& index, const std::string& path);
void write_frame_labels(const std::vector<std::string>& frame_ids,
                        const std::vector<int>& labels, const AnatomicalCatalog& catalog,
                        const std::string& path);
void write_window_predictions(const std::vector<WindowPrediction>& windows,
                              const AnatomicalCatalog& catalog, const std::string& path);

// Parses a frame dump back into (ids, labels, per-class medians).
struct FrameDump {
    std::vector<int> classes;  // catalog order of the dumped median columns
    std::vector<std::string> ids;
    std::vector<FramePrediction> predictions;
};
FrameDump read_frame_dump(const std::string& path, const AnatomicalCatalog& catalog);

}  // namespace mloc
