#include "mloc/sequence.hpp"

#include <algorithm>
#include <map>

namespace mloc {

std::vector<Window> window_frames(std::size_t n_frames, std::size_t fps) {
    if (n_frames == 0) throw Error("window_frames: empty frame range");
    if (fps == 0) throw Error("window_frames: fps must be positive");
    const std::size_t hop = std::max<std::size_t>(1, fps / 2);
    std::vector<Window> out;
    std::size_t start = 0;
    while (start + fps <= n_frames) {
        out.push_back({start, start + fps - 1});
        start += hop;
    }
    if (out.empty() || out.back().end + 1 < n_frames) {
        out.push_back({start, n_frames - 1});  // trailing partial window
    }
    return out;
}

int window_mode(const std::vector<FramePrediction>& frames) {
    if (frames.empty()) throw Error("window_mode: empty window");
    std::map<int, std::size_t> counts;
    for (const auto& f : frames) ++counts[f.label];
    std::size_t best_count = 0;
    for (const auto& [label, c] : counts) best_count = std::max(best_count, c);

    int best_label = kOtherLabel;
    double best_mean = 2.0;  // mapped distances are < 1
    bool found_non_other = false;
    for (const auto& [label, c] : counts) {
        if (c != best_count || label == kOtherLabel) continue;
        double sum = 0.0;
        for (const auto& f : frames)
            if (f.label == label) sum += f.winning_median;
        const double mean = sum / static_cast<double>(c);
        if (!found_non_other || mean < best_mean) {
            found_non_other = true;
            best_mean = mean;
            best_label = label;
        }
    }
    return found_non_other ? best_label : kOtherLabel;
}

std::vector<WindowPrediction> enforce_anatomical_order(std::vector<WindowPrediction> windows,
                                                       const AnatomicalCatalog& catalog) {
    for (const auto& w : windows) {
        if (w.label != kOtherLabel && !catalog.contains(w.label)) {
            throw Error("order repair: label " + std::to_string(w.label) + " not in catalog");
        }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        std::size_t prev = windows.size();
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (windows[i].label == kOtherLabel) continue;  // transparent to the order check
            if (prev != windows.size() && windows[prev].label > windows[i].label) {
                // Inversion: drop the window with the larger group distance,
                // the later one on a tie.
                const std::size_t victim =
                    windows[prev].group_avg_distance > windows[i].group_avg_distance ? prev : i;
                windows[victim].label = kOtherLabel;
                changed = true;
                break;
            }
            prev = i;
        }
    }
    return windows;
}

VideoResult classify_video(const std::vector<EmbeddingVector>& frames, const SupportIndex& index,
                           double tau, std::size_t fps) {
    VideoResult result;
    result.frame_predictions = batch_classify(frames, index, tau);
    const auto windows = window_frames(frames.size(), fps);
    result.windows.reserve(windows.size());
    for (const Window& w : windows) {
        std::vector<FramePrediction> members(result.frame_predictions.begin() + w.start,
                                             result.frame_predictions.begin() + w.end + 1);
        WindowPrediction wp;
        wp.start = w.start;
        wp.end = w.end;
        wp.label = window_mode(members);
        double sum = 0.0;
        for (const auto& f : members) {
            sum += wp.label == kOtherLabel ? f.winning_median : f.per_class_median.at(wp.label);
        }
        wp.group_avg_distance = sum / static_cast<double>(members.size());
        result.windows.push_back(wp);
    }
    result.repaired_windows = enforce_anatomical_order(result.windows, index.catalog());

    // Frame label = label of the repaired window whose center is nearest
    // (earlier window on ties).
    result.frame_labels.resize(frames.size(), kOtherLabel);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        double best_dist = -1.0;
        for (const auto& w : result.repaired_windows) {
            if (f < w.start || f > w.end) continue;
            const double center = 0.5 * static_cast<double>(w.start + w.end);
            const double dist = std::abs(static_cast<double>(f) - center);
            if (best_dist < 0.0 || dist < best_dist) {
                best_dist = dist;
                result.frame_labels[f] = w.label;
            }
        }
    }
    return result;
}

}  // namespace mloc
