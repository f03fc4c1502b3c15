#pragma once

#include <vector>

#include "mloc/inference.hpp"

namespace mloc {

struct Window {
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive
};

struct WindowPrediction {
    std::size_t start = 0;
    std::size_t end = 0;
    int label = kOtherLabel;
    double group_avg_distance = 0.0;  // mean frame distance to the window's class
};

// 1-second windows (length = fps frames) with 0.5-second hop (floor(fps/2),
// at least 1). A trailing partial window is kept when the last full window
// does not reach the final frame.
std::vector<Window> window_frames(std::size_t n_frames, std::size_t fps);

// Most frequent label in the window, Other included. Ties go to the tied
// non-Other label whose frames have the smallest mean winning median; an
// all-Other tie stays Other.
int window_mode(const std::vector<FramePrediction>& frames);

// Repairs anatomical-order inversions: while two consecutive non-Other
// windows are out of order, the one with the larger group average distance
// (tie: the later window) becomes Other.
std::vector<WindowPrediction> enforce_anatomical_order(std::vector<WindowPrediction> windows,
                                                       const AnatomicalCatalog& catalog);

struct VideoResult {
    std::vector<FramePrediction> frame_predictions;
    std::vector<WindowPrediction> windows;           // pre-repair
    std::vector<WindowPrediction> repaired_windows;
    std::vector<int> frame_labels;  // per frame, from the nearest repaired window
};

// Full sequence pipeline: per-frame classification, windowing, per-window
// mode, order repair.
VideoResult classify_video(const std::vector<EmbeddingVector>& frames, const SupportIndex& index,
                           double tau, std::size_t fps);

}  // namespace mloc
