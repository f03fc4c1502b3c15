#pragma once

#include <string>

#include "mloc/manifest.hpp"
#include "mloc/tensor.hpp"

namespace mloc {

// Procedural stand-in for the unavailable endoscopy data. Each class is a
// distinct texture family (base color, band frequency/orientation, blob
// layout); items within a class differ only by seeded pixel noise.
struct SyntheticSpec {
    std::uint64_t seed = 1;
    std::size_t n_classes = 10;
    std::size_t support_per_class = 5;
    std::size_t eval_frames_per_class = 20;
    std::size_t image_size = 64;
    double sigma = 0.05;       // per-pixel gaussian noise level, in [0,1]
    bool include_unknown = false;  // held-out extra class for open-set tests
    std::size_t fps = 5;       // fps of the generated eval "video"
};

// Pure function of (spec, class_index, item): (3,S,S) image in [0,1].
// class_index may exceed n_classes (the held-out unknown class).
Tensor render_synthetic_image(const SyntheticSpec& spec, std::size_t class_index,
                              std::size_t item);

struct SyntheticOutput {
    std::string manifest_path;
    std::string video_manifest_path;
    std::string truth_path;
    std::string unknown_video_path;  // empty unless include_unknown
    std::string unknown_truth_path;
};

// Writes images (PPM), a dataset manifest (support + eval splits), an eval
// video manifest traversing classes in anatomical order, and truth label
// files. Byte-identical output for identical specs.
SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir);

}  // namespace mloc
