#include <doctest.h>

#include <algorithm>

#include "mloc/layers.hpp"
#include "mloc/rng.hpp"
#include "mloc/sequence.hpp"

using namespace mloc;

namespace {

FramePrediction frame(int label, double winning) {
    FramePrediction p;
    p.label = label;
    p.winning_median = winning;
    return p;
}

WindowPrediction window(int label, double avg) {
    WindowPrediction w;
    w.label = label;
    w.group_avg_distance = avg;
    return w;
}

std::vector<int> labels_of(const std::vector<WindowPrediction>& ws) {
    std::vector<int> out;
    for (const auto& w : ws) out.push_back(w.label);
    return out;
}

bool non_other_monotone(const std::vector<WindowPrediction>& ws) {
    int prev = 0;
    for (const auto& w : ws) {
        if (w.label == kOtherLabel) continue;
        if (w.label < prev) return false;
        prev = w.label;
    }
    return true;
}

EmbeddingVector unit_axis(std::size_t axis) {
    std::vector<double> v(kEmbeddingDim, 0.0);
    v[axis] = 1.0;
    return EmbeddingVector{v};
}

EmbeddingVector near_axis(std::size_t axis, Rng& rng, double eps) {
    std::vector<double> v(kEmbeddingDim, 0.0);
    v[axis] = 1.0;
    for (double& x : v) x += eps * rng.normal();
    return EmbeddingVector{l2_normalize_vec(v)};
}

}  // namespace

TEST_CASE("standard catalog lists the traversal order") {
    const auto catalog = AnatomicalCatalog::standard();
    const std::vector<std::string> names = {"Esophagus", "Cardia", "Angularis", "Pylorus",
                                            "Duodenum",  "Jejunum", "Ileum",     "Colon",
                                            "Rectum",    "Anus"};
    REQUIRE(catalog.size() == names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        const int idx = static_cast<int>(i) + 1;
        CHECK(catalog.entries()[i].index == idx);
        CHECK(catalog.entries()[i].name == names[i]);
        CHECK(catalog.index_of(names[i]) == idx);
        CHECK(catalog.index_of(std::to_string(idx)) == idx);
    }
    CHECK(catalog.name_of(kOtherLabel) == "Other");
    CHECK(catalog.index_of("Other") == kOtherLabel);
    CHECK_THROWS_AS(catalog.index_of("Stomach"), Error);
    CHECK_FALSE(catalog.contains(11));
}

TEST_CASE("windowing: n=10 fps=4") {
    const auto ws = window_frames(10, 4);
    REQUIRE(ws.size() == 4);
    const std::size_t starts[] = {0, 2, 4, 6}, ends[] = {3, 5, 7, 9};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(ws[i].start == starts[i]);
        CHECK(ws[i].end == ends[i]);
    }
}

TEST_CASE("windowing: video shorter than one window") {
    const auto ws = window_frames(3, 25);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].start == 0);
    CHECK(ws[0].end == 2);
}

TEST_CASE("windowing: n=100 fps=25 covers everything with hop 12") {
    const auto ws = window_frames(100, 25);
    REQUIRE(!ws.empty());
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
        if (i + 2 < ws.size())
            CHECK(ws[i + 1].start - ws[i].start == 12);
        CHECK(ws[i].end + 1 > ws[i + 1].start);  // overlap
    }
    // Full coverage including the tail frame.
    CHECK(ws.front().start == 0);
    CHECK(ws.back().end == 99);
    std::size_t covered = 0;
    for (const auto& w : ws) covered = std::max(covered, w.end + 1);
    CHECK(covered == 100);
}

TEST_CASE("windowing: fps=1 degenerates to per-frame windows") {
    const auto ws = window_frames(5, 1);
    REQUIRE(ws.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(ws[i].start == i);
        CHECK(ws[i].end == i);
    }
}

TEST_CASE("window mode: plain majority") {
    CHECK(window_mode({frame(4, 0.1), frame(4, 0.1), frame(7, 0.1)}) == 4);
}

TEST_CASE("window mode: Other can win the count") {
    CHECK(window_mode({frame(0, 0.9), frame(0, 0.9), frame(3, 0.1)}) == 0);
}

TEST_CASE("window mode: non-Other ties break on mean winning median") {
    CHECK(window_mode({frame(2, 0.1), frame(8, 0.3)}) == 2);
    CHECK(window_mode({frame(2, 0.3), frame(8, 0.1)}) == 8);
    // Mean over the tied label's frames, not a single frame.
    CHECK(window_mode({frame(2, 0.4), frame(2, 0.1), frame(8, 0.2), frame(8, 0.25)}) == 8);
}

TEST_CASE("window mode: Other never wins a tie against a real label") {
    CHECK(window_mode({frame(0, 0.05), frame(6, 0.9)}) == 6);
}

TEST_CASE("order repair: ordered input is untouched") {
    const std::vector<WindowPrediction> in = {window(1, 0.1), window(2, 0.2), window(4, 0.3)};
    const auto out = enforce_anatomical_order(in, AnatomicalCatalog::standard());
    CHECK(labels_of(out) == std::vector<int>{1, 2, 4});
}

TEST_CASE("order repair: out-of-place high-distance window becomes Other") {
    // Esophagus, Colon(.6), Cardia(.2) -> Esophagus, Other, Cardia
    const std::vector<WindowPrediction> in = {window(1, 0.1), window(8, 0.6), window(2, 0.2)};
    const auto out = enforce_anatomical_order(in, AnatomicalCatalog::standard());
    CHECK(labels_of(out) == std::vector<int>{1, 0, 2});
}

TEST_CASE("order repair: the later, higher-distance window loses") {
    // Colon(.2), Cardia(.6) -> Colon, Other
    const std::vector<WindowPrediction> in = {window(8, 0.2), window(2, 0.6)};
    const auto out = enforce_anatomical_order(in, AnatomicalCatalog::standard());
    CHECK(labels_of(out) == std::vector<int>{8, 0});
}

TEST_CASE("order repair: equal distances relabel the later window") {
    const std::vector<WindowPrediction> in = {window(5, 0.3), window(3, 0.3)};
    const auto out = enforce_anatomical_order(in, AnatomicalCatalog::standard());
    CHECK(labels_of(out) == std::vector<int>{5, 0});
}

TEST_CASE("order repair: only relabels to Other, preserving everything else") {
    Rng rng(6);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<WindowPrediction> in;
        const std::size_t n = 1 + rng.index(12);
        for (std::size_t i = 0; i < n; ++i) {
            WindowPrediction w = window(static_cast<int>(rng.index(11)), rng.uniform());
            w.start = i;
            w.end = i;
            in.push_back(w);
        }
        const auto out = enforce_anatomical_order(in, AnatomicalCatalog::standard());
        REQUIRE(out.size() == in.size());
        CHECK(non_other_monotone(out));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK((out[i].label == in[i].label || out[i].label == kOtherLabel));
            CHECK(out[i].start == in[i].start);
            CHECK(out[i].group_avg_distance == in[i].group_avg_distance);
        }
    }
}

TEST_CASE("full video pipeline recovers an ordered traversal under noise") {
    Rng rng(19);
    // Support: classes 1, 2, 4 pinned to orthogonal axes.
    std::map<int, std::vector<EmbeddingVector>> members;
    for (int k : {1, 2, 4})
        for (int j = 0; j < 5; ++j) members[k].push_back(near_axis(k, rng, 0.02));
    const SupportIndex index(AnatomicalCatalog::standard(), std::move(members));

    std::vector<EmbeddingVector> frames;
    std::vector<int> truth;
    for (int k : {1, 2, 4}) {
        for (int j = 0; j < 40; ++j) {
            // ~10% of frames are corrupted toward a wrong axis.
            const bool noisy = rng.uniform() < 0.10;
            const int axis = noisy ? (k == 1 ? 4 : 1) : k;
            frames.push_back(near_axis(axis, rng, 0.05));
            truth.push_back(k);
        }
    }
    const VideoResult res = classify_video(frames, index, 0.5, 8);
    REQUIRE(res.frame_labels.size() == frames.size());
    CHECK(non_other_monotone(res.repaired_windows));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < res.repaired_windows.size(); ++i) {
        const auto& w = res.repaired_windows[i];
        const int want = truth[(w.start + w.end) / 2];
        if (w.label == want) ++correct;
    }
    CHECK(static_cast<double>(correct) / res.repaired_windows.size() >= 0.9);
}

TEST_CASE("constant video gives every window the same label") {
    Rng rng(3);
    std::map<int, std::vector<EmbeddingVector>> members;
    for (int k : {3, 6})
        for (int j = 0; j < 3; ++j) members[k].push_back(near_axis(k, rng, 0.02));
    const SupportIndex index(AnatomicalCatalog::standard(), std::move(members));
    std::vector<EmbeddingVector> frames(20, unit_axis(6));
    const VideoResult res = classify_video(frames, index, 0.5, 5);
    for (const auto& w : res.repaired_windows) CHECK(w.label == 6);
    for (int l : res.frame_labels) CHECK(l == 6);
}

TEST_CASE("single-frame video yields one window with the frame's label") {
    Rng rng(3);
    std::map<int, std::vector<EmbeddingVector>> members;
    members[5] = {unit_axis(5), unit_axis(5)};
    const SupportIndex index(AnatomicalCatalog::standard(), std::move(members));
    const VideoResult res = classify_video({unit_axis(5)}, index, 0.5, 25);
    REQUIRE(res.repaired_windows.size() == 1);
    CHECK(res.repaired_windows[0].label == 5);
    CHECK(res.frame_labels == std::vector<int>{5});
}
