#include "mloc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mloc/image.hpp"
#include "mloc/rng.hpp"

namespace fs = std::filesystem;

namespace mloc {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

struct Rgb {
    double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    return {r + m, g + m, b + m};
}

struct Blob {
    double cx, cy, radius, amp;
};

// Texture family parameters, a pure function of (seed, class).
struct ClassTexture {
    Rgb base;
    double freq, theta, phase, band_amp;
    std::vector<Blob> blobs;
};

ClassTexture class_texture(std::uint64_t seed, std::size_t class_index) {
    Rng rng(combine_seed(seed, 0x70657874ULL + class_index));
    ClassTexture t;
    // Golden-ratio hue spacing keeps any number of classes well separated.
    const double hue = std::fmod(0.61803398874989485 * static_cast<double>(class_index) + 0.15, 1.0);
    t.base = hsv_to_rgb(hue, 0.45 + 0.25 * rng.uniform(), 0.5 + 0.3 * rng.uniform());
    t.freq = 2.0 + static_cast<double>(class_index % 5) + rng.uniform();
    t.theta = rng.uniform(0.0, kTau / 2.0);
    t.phase = rng.uniform(0.0, kTau);
    t.band_amp = 0.10 + 0.08 * rng.uniform();
    const std::size_t n_blobs = 2 + class_index % 5;
    for (std::size_t i = 0; i < n_blobs; ++i) {
        Blob b;
        b.cx = rng.uniform();
        b.cy = rng.uniform();
        b.radius = 0.08 + 0.10 * rng.uniform();
        b.amp = rng.uniform() < 0.5 ? -0.25 : 0.25;
        t.blobs.push_back(b);
    }
    return t;
}

}  // namespace

Tensor render_synthetic_image(const SyntheticSpec& spec, std::size_t class_index,
                              std::size_t item) {
    if (spec.image_size == 0) throw Error("synthetic: image size must be positive");
    if (spec.sigma < 0.0 || spec.sigma > 1.0) throw Error("synthetic: sigma must lie in [0,1]");
    const ClassTexture t = class_texture(spec.seed, class_index);
    const std::size_t s = spec.image_size;
    Tensor img({3, s, s});
    const double ct = std::cos(t.theta), st = std::sin(t.theta);
    for (std::size_t y = 0; y < s; ++y) {
        for (std::size_t x = 0; x < s; ++x) {
            const double u = static_cast<double>(x) / static_cast<double>(s);
            const double v = static_cast<double>(y) / static_cast<double>(s);
            double shade = t.band_amp * std::sin(kTau * t.freq * (u * ct + v * st) + t.phase);
            for (const Blob& b : t.blobs) {
                const double dx = u - b.cx, dy = v - b.cy;
                shade += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.radius * b.radius));
            }
            img.at3(0, y, x) = std::clamp(t.base.r + shade, 0.0, 1.0);
            img.at3(1, y, x) = std::clamp(t.base.g + shade, 0.0, 1.0);
            img.at3(2, y, x) = std::clamp(t.base.b + shade, 0.0, 1.0);
        }
    }
    if (spec.sigma > 0.0) {
        Rng noise(combine_seed(spec.seed, 0x6e6f697aULL + class_index * 100003 + item));
        for (double& p : img.data) p = std::clamp(p + spec.sigma * noise.normal(), 0.0, 1.0);
    }
    return img;
}

SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const std::string& out_dir) {
    if (spec.n_classes == 0 || spec.support_per_class == 0 || spec.eval_frames_per_class == 0) {
        throw Error("synthetic: counts must be positive");
    }
    const AnatomicalCatalog catalog = AnatomicalCatalog::standard();
    if (spec.n_classes > catalog.size()) {
        throw Error("synthetic: n_classes exceeds the anatomical catalog size");
    }
    fs::create_directories(fs::path(out_dir) / "images");

    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    VideoManifest video;
    video.fps = spec.fps;
    video.base_dir = out_dir;
    std::ofstream truth((fs::path(out_dir) / "truth.txt").string());
    if (!truth) throw Error("synthetic: cannot write truth file in " + out_dir);

    auto emit_image = [&](std::size_t class_index, std::size_t item, const std::string& id) {
        const std::string rel = "images/" + id + ".ppm";
        write_ppm(render_synthetic_image(spec, class_index, item),
                  (fs::path(out_dir) / rel).string());
        return rel;
    };

    for (std::size_t k = 1; k <= spec.n_classes; ++k) {
        for (std::size_t j = 0; j < spec.support_per_class; ++j) {
            const std::string id = "s" + std::to_string(k) + "_" + std::to_string(j);
            manifest.records.push_back({id, emit_image(k, j, id), static_cast<int>(k),
                                        Modality::CE, Split::Support});
        }
    }
    // Eval frames traverse the classes in anatomical order, as one video.
    for (std::size_t k = 1; k <= spec.n_classes; ++k) {
        for (std::size_t j = 0; j < spec.eval_frames_per_class; ++j) {
            const std::string id = "v" + std::to_string(k) + "_" + std::to_string(j);
            const std::string rel = emit_image(k, 1000 + j, id);
            manifest.records.push_back({id, rel, static_cast<int>(k), Modality::CE, Split::Eval});
            video.frames.push_back({id, rel});
            truth << id << "," << catalog.name_of(static_cast<int>(k)) << "\n";
        }
    }

    SyntheticOutput out;
    out.manifest_path = (fs::path(out_dir) / "manifest.txt").string();
    out.video_manifest_path = (fs::path(out_dir) / "video.txt").string();
    out.truth_path = (fs::path(out_dir) / "truth.txt").string();
    save_dataset_manifest(manifest, out.manifest_path);
    save_video_manifest(video, out.video_manifest_path);

    if (spec.include_unknown) {
        const std::size_t unknown_class = spec.n_classes + 1;
        VideoManifest unknown_video;
        unknown_video.fps = spec.fps;
        unknown_video.base_dir = out_dir;
        out.unknown_truth_path = (fs::path(out_dir) / "unknown_truth.txt").string();
        std::ofstream unknown_truth(out.unknown_truth_path);
        for (std::size_t j = 0; j < spec.eval_frames_per_class; ++j) {
            const std::string id = "u_" + std::to_string(j);
            unknown_video.frames.push_back({id, emit_image(unknown_class, j, id)});
            unknown_truth << id << ",Other\n";
        }
        out.unknown_video_path = (fs::path(out_dir) / "unknown_video.txt").string();
        save_video_manifest(unknown_video, out.unknown_video_path);
    }
    return out;
}

}  // namespace mloc
