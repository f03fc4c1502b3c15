#pragma once

#include <string>

#include "mloc/layers.hpp"

namespace mloc {

// Parameter checkpoint: magic "MLOC1", then one record per parameterized
// layer: [u8 layer kind tag][u8 ndim][u32 LE extents...][f32 LE values...].
// save -> load -> save reproduces the file byte for byte.
void save_checkpoint(const Network& net, const std::string& path);

// Loads into an already-built network; layer kinds and shapes must match.
void load_checkpoint(Network& net, const std::string& path);

// Rebuilds the canonical architecture implied by the checkpoint's records
// (image embedder or external-embedding head) and loads the parameters.
struct LoadedModel {
    Network net;
    bool is_image_model = false;   // otherwise: 64-d embedding head
    std::size_t input_channels = 0;
};
LoadedModel load_checkpoint_auto(const std::string& path);

}  // namespace mloc
