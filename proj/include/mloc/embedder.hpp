#pragma once

#include <utility>
#include <vector>

#include "mloc/embedding.hpp"
#include "mloc/layers.hpp"

namespace mloc {

// Argmax positions on the pre-pooling feature map, plus the per-position
// standard deviation across channels (the channel variability map).
struct HeatmapReport {
    std::size_t map_height = 0;
    std::size_t map_width = 0;
    std::vector<std::pair<std::size_t, std::size_t>> positions;  // (row, col) per channel
    std::vector<double> variability;                             // row-major H*W
};

// Pure function of (image, parameters); output is unit-norm.
EmbeddingVector embed_image(const Network& net, const Tensor& image);

// Embeds an already-ingested external feature vector through the head net.
EmbeddingVector embed_vector(const Network& head, const std::vector<double>& values);

HeatmapReport heatmap_positions(const Network& net, const Tensor& image);

}  // namespace mloc
