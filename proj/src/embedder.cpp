#include "mloc/embedder.hpp"

#include <cmath>

namespace mloc {

namespace {

void check_image(const Tensor& image) {
    if (image.shape.size() != 3 || image.shape[0] != 3) {
        throw Error("embed_image: expected a (3,H,W) image, got shape " + shape_str(image.shape));
    }
}

}  // namespace

EmbeddingVector embed_image(const Network& net, const Tensor& image) {
    check_image(image);
    Tensor out = net.forward_value(image);
    if (out.numel() != kEmbeddingDim) {
        throw Error("embed_image: network emits " + std::to_string(out.numel()) +
                    " values, expected " + std::to_string(kEmbeddingDim));
    }
    return EmbeddingVector{std::move(out.data)};
}

EmbeddingVector embed_vector(const Network& head, const std::vector<double>& values) {
    Tensor out = head.forward_value(Tensor({values.size()}, values));
    if (out.numel() != kEmbeddingDim) {
        throw Error("embed_vector: head emits " + std::to_string(out.numel()) +
                    " values, expected " + std::to_string(kEmbeddingDim));
    }
    return EmbeddingVector{std::move(out.data)};
}

HeatmapReport heatmap_positions(const Network& net, const Tensor& image) {
    check_image(image);
    const ForwardTrace trace = net.forward(image);
    // The pre-pooling feature map is the input of the global max pool layer.
    std::size_t pool_index = net.size();
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (net.layer(i).kind() == LayerKind::GlobalMaxPool) {
            pool_index = i;
            break;
        }
    }
    if (pool_index == net.size()) {
        throw Error("heatmap_positions: network has no global_max_pool layer");
    }
    const Tensor& fmap = trace.layer_inputs[pool_index];
    const std::size_t channels = fmap.shape[0], h = fmap.shape[1], w = fmap.shape[2];

    HeatmapReport report;
    report.map_height = h;
    report.map_width = w;
    const auto flat = channel_argmax(fmap);  // same scan global_max_pool uses
    report.positions.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t local = flat[c] - c * h * w;
        report.positions.emplace_back(local / w, local % w);
    }
    report.variability.assign(h * w, 0.0);
    for (std::size_t p = 0; p < h * w; ++p) {
        double mean = 0.0;
        for (std::size_t c = 0; c < channels; ++c) mean += fmap.data[c * h * w + p];
        mean /= static_cast<double>(channels);
        double var = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const double d = fmap.data[c * h * w + p] - mean;
            var += d * d;
        }
        report.variability[p] = std::sqrt(var / static_cast<double>(channels));
    }
    return report;
}

}  // namespace mloc
