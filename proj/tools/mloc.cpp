// mloc: few-shot metric-learning localization toolkit.
//
// Subcommands: gen-synth, train, classify-frame, classify-video, evaluate,
// export-latents, grad-check. Every run echoes its resolved configuration
// (CLI flags > config file > built-in defaults) for reproducibility audits.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "mloc/embedder.hpp"
#include "mloc/gradcheck.hpp"
#include "mloc/image.hpp"
#include "mloc/metrics.hpp"
#include "mloc/pipeline.hpp"
#include "mloc/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mloc;

namespace {

struct Options {
    std::string config_file;
    std::uint64_t seed = 1;
    double tau = 0.5;
    double alpha = 2.0;
    double lr = 1e-3;
    double sigma = 0.05;
    std::size_t mixes_per_pair = 50;
    std::size_t episodes = 200;
    std::size_t pairs_per_episode = 32;
    std::size_t size = 64;
    std::size_t fps = 5;
    bool no_mixup = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_file, "flat key=value config file");
    cmd->add_option("--seed", o.seed, "rng seed");
    cmd->add_option("--tau", o.tau, "open-set rejection threshold");
    cmd->add_option("--alpha", o.alpha, "Beta(alpha,alpha) mixup parameter");
    cmd->add_option("--mixes-per-pair", o.mixes_per_pair, "mixed latents per pair");
    cmd->add_option("--episodes", o.episodes, "training episodes");
    cmd->add_option("--pairs-per-episode", o.pairs_per_episode, "anchor pairs per episode");
    cmd->add_option("--lr", o.lr, "rmsprop learning rate");
    cmd->add_option("--size", o.size, "square image size (64 or 256 typical)");
    cmd->add_option("--fps", o.fps, "frames per second for generated videos");
    cmd->add_flag("--no-mixup", o.no_mixup, "train on pure pairs only");
    cmd->add_option("--sigma", o.sigma, "synthetic noise level in [0,1]");
}

// CLI flags win over the config file, which wins over the defaults already
// present in `o`.
void apply_config(CLI::App* cmd, Options& o) {
    if (o.config_file.empty()) return;
    const auto cfg = load_config_file(o.config_file);
    auto take = [&](const char* flag, const char* key, auto& dst) {
        const auto it = cfg.find(key);
        if (it == cfg.end() || cmd->count(flag) > 0) return;
        std::stringstream ss(it->second);
        ss >> dst;
        if (ss.fail()) throw Error("config: bad value for " + std::string(key));
    };
    take("--seed", "seed", o.seed);
    take("--tau", "tau", o.tau);
    take("--alpha", "alpha", o.alpha);
    take("--mixes-per-pair", "mixes_per_pair", o.mixes_per_pair);
    take("--episodes", "episodes", o.episodes);
    take("--pairs-per-episode", "pairs_per_episode", o.pairs_per_episode);
    take("--lr", "lr", o.lr);
    take("--size", "size", o.size);
    take("--fps", "fps", o.fps);
    take("--sigma", "sigma", o.sigma);
    if (cfg.count("mixup") && cmd->count("--no-mixup") == 0) {
        o.no_mixup = cfg.at("mixup") == "0" || cfg.at("mixup") == "false";
    }
}

void echo_config(const Options& o, std::size_t fps) {
    const std::size_t hop = std::max<std::size_t>(1, fps / 2);
    std::printf(
        "resolved-config seed=%llu tau=%g alpha=%g mixes_per_pair=%zu fps=%zu hop=%zu "
        "episodes=%zu pairs_per_episode=%zu lr=%g size=%zu sigma=%g mixup=%d\n",
        static_cast<unsigned long long>(o.seed), o.tau, o.alpha, o.mixes_per_pair, fps, hop,
        o.episodes, o.pairs_per_episode, o.lr, o.size, o.sigma, o.no_mixup ? 0 : 1);
}

TrainConfig train_config(const Options& o) {
    TrainConfig tc;
    tc.episodes = o.episodes;
    tc.pairs_per_episode = o.pairs_per_episode;
    tc.seed = o.seed;
    tc.mixup_enabled = !o.no_mixup;
    tc.optimizer.learning_rate = o.lr;
    return tc;
}

int run_gen_synth(const Options& o, const std::string& out_dir, std::size_t classes,
                  std::size_t support, std::size_t eval_frames, bool unknown) {
    SyntheticSpec spec;
    spec.seed = o.seed;
    spec.n_classes = classes;
    spec.support_per_class = support;
    spec.eval_frames_per_class = eval_frames;
    spec.image_size = o.size;
    spec.sigma = o.sigma;
    spec.include_unknown = unknown;
    spec.fps = o.fps;
    const auto out = generate_synthetic(spec, out_dir);
    std::printf("wrote %s\nwrote %s\nwrote %s\n", out.manifest_path.c_str(),
                out.video_manifest_path.c_str(), out.truth_path.c_str());
    if (unknown) {
        std::printf("wrote %s\nwrote %s\n", out.unknown_video_path.c_str(),
                    out.unknown_truth_path.c_str());
    }
    return 0;
}

int run_train(const Options& o, const std::string& manifest_path,
              const std::string& embeddings_path, const std::string& out_dir) {
    const auto catalog = AnatomicalCatalog::standard();
    Rng init_rng(mix_seed(o.seed));
    Network net;
    std::vector<TrainItem> items;
    if (!embeddings_path.empty()) {
        const auto ingest = ingest_embeddings(embeddings_path);
        if (ingest.renormalized > 0) {
            std::fprintf(stderr, "warning: renormalized %zu embedding rows\n",
                         ingest.renormalized);
        }
        items = train_items_from_embeddings(ingest);
        net = build_network(embedding_head_specs(), kEmbeddingDim, true, init_rng);
    } else {
        const auto manifest = load_dataset_manifest(manifest_path, catalog);
        items = train_items_from_manifest(manifest, o.size);
        net = build_network(builtin_embedder_specs(), 3, false, init_rng);
    }
    MixupConfig mixup{o.alpha, o.mixes_per_pair};
    const auto result = train(net, items, train_config(o), mixup);
    fs::create_directories(out_dir);
    const std::string ckpt = (fs::path(out_dir) / "checkpoint.bin").string();
    const std::string trace = (fs::path(out_dir) / "loss_trace.txt").string();
    save_checkpoint(net, ckpt);
    write_loss_trace(result, trace);
    std::printf("trained %zu episodes, final loss %.6g\nwrote %s\nwrote %s\n",
                result.episodes_run, result.loss_trace.back(), ckpt.c_str(), trace.c_str());
    return 0;
}

SupportIndex build_index(const LoadedModel& model, const std::string& manifest_path,
                         const std::string& embeddings_path, std::size_t size,
                         const AnatomicalCatalog& catalog) {
    if (model.is_image_model) {
        return support_index_from_manifest(model.net,
                                           load_dataset_manifest(manifest_path, catalog), size,
                                           catalog);
    }
    if (embeddings_path.empty()) {
        throw Error("checkpoint is an embedding head; --embeddings is required");
    }
    return support_index_from_embeddings(model.net, ingest_embeddings(embeddings_path), catalog);
}

int run_classify_frame(const Options& o, const std::string& checkpoint,
                       const std::string& manifest_path, const std::string& embeddings_path,
                       const std::string& query) {
    const auto catalog = AnatomicalCatalog::standard();
    const auto model = load_checkpoint_auto(checkpoint);
    const auto index = build_index(model, manifest_path, embeddings_path, o.size, catalog);
    EmbeddingVector q;
    if (model.is_image_model) {
        q = embed_image(model.net, load_image(query, o.size));
    } else {
        const auto ingest = ingest_embeddings(embeddings_path);
        const EmbeddingRecord* rec = ingest.find(query);
        if (!rec) throw Error("query id \"" + query + "\" not found in " + embeddings_path);
        q = embed_vector(model.net, rec->embedding.values);
    }
    const auto pred = classify_frame(q, index, o.tau);
    std::printf("%s,%s,%.6f", query.c_str(), catalog.name_of(pred.label).c_str(),
                pred.winning_median);
    for (int c : index.class_indices()) std::printf(",%.6f", pred.per_class_median.at(c));
    std::printf("\n");
    return 0;
}

int run_classify_video(const Options& o, const std::string& checkpoint,
                       const std::string& manifest_path, const std::string& embeddings_path,
                       const std::string& video_path, const std::string& out_dir) {
    const auto catalog = AnatomicalCatalog::standard();
    const auto model = load_checkpoint_auto(checkpoint);
    const auto index = build_index(model, manifest_path, embeddings_path, o.size, catalog);
    const auto video = load_video_manifest(video_path);
    echo_config(o, video.fps);

    std::optional<IngestResult> ingest;
    if (!embeddings_path.empty()) ingest = ingest_embeddings(embeddings_path);
    const auto embeddings =
        embed_video_frames(model, video, o.size, ingest ? &*ingest : nullptr);
    const auto result = classify_video(embeddings, index, o.tau, video.fps);

    std::vector<std::string> ids;
    for (const auto& f : video.frames) ids.push_back(f.frame_id);
    fs::create_directories(out_dir);
    write_frame_dump(ids, result.frame_predictions, index,
                     (fs::path(out_dir) / "frames.txt").string());
    write_window_predictions(result.windows, catalog,
                             (fs::path(out_dir) / "windows_raw.txt").string());
    write_window_predictions(result.repaired_windows, catalog,
                             (fs::path(out_dir) / "windows.txt").string());
    write_frame_labels(ids, result.frame_labels, catalog,
                       (fs::path(out_dir) / "frame_labels.txt").string());
    std::printf("classified %zu frames into %zu windows; outputs in %s\n", ids.size(),
                result.repaired_windows.size(), out_dir.c_str());
    return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& truth_path,
                 const std::string& dump_path, const std::string& out_dir) {
    const auto catalog = AnatomicalCatalog::standard();
    const auto pred = load_label_file(pred_path, catalog);
    const auto truth_list = load_label_file(truth_path, catalog);
    std::map<std::string, int> truth(truth_list.begin(), truth_list.end());
    std::vector<int> y_true, y_pred;
    for (const auto& [id, label] : pred) {
        const auto it = truth.find(id);
        if (it == truth.end()) throw Error("evaluate: no truth label for id \"" + id + "\"");
        y_pred.push_back(label);
        y_true.push_back(it->second);
    }
    const ConfusionMatrix cm(catalog, y_true, y_pred);
    const auto report = per_class_metrics(cm);
    fs::create_directories(out_dir);
    write_metrics_report(report, catalog, (fs::path(out_dir) / "report.txt").string());
    std::printf("items=%zu overall_accuracy=%.4f macro_f1=%.4f macro_auc=%.4f\n", y_true.size(),
                report.overall_accuracy, report.macro_f1, report.macro_auc);

    if (!dump_path.empty()) {
        // ROC per class from negative median distances.
        const auto dump = read_frame_dump(dump_path, catalog);
        std::map<std::string, std::size_t> row;
        for (std::size_t i = 0; i < dump.ids.size(); ++i) row[dump.ids[i]] = i;
        std::vector<RocCurve> curves;
        for (int c : dump.classes) {
            std::vector<double> scores;
            std::vector<int> labels;
            for (const auto& [id, t] : truth) {
                const auto it = row.find(id);
                if (it == row.end()) continue;
                scores.push_back(-dump.predictions[it->second].per_class_median.at(c));
                labels.push_back(t);
            }
            curves.push_back(roc_curve(c, scores, labels));
        }
        write_roc_points(curves, catalog, (fs::path(out_dir) / "roc.txt").string());
    }
    return 0;
}

int run_export_latents(const Options& o, const std::string& checkpoint,
                       const std::string& manifest_path, const std::string& out_path) {
    const auto catalog = AnatomicalCatalog::standard();
    const auto model = load_checkpoint_auto(checkpoint);
    if (!model.is_image_model) {
        throw Error("export-latents requires an image-model checkpoint");
    }
    const auto manifest = load_dataset_manifest(manifest_path, catalog);
    std::vector<EmbeddingRecord> records;
    for (const auto& rec : manifest.records) {
        records.push_back({rec.id, rec.anatomical_index,
                           embed_image(model.net, load_image(manifest.resolve_path(rec), o.size))});
    }
    export_embeddings(records, out_path);
    std::printf("exported %zu latent vectors to %s\n", records.size(), out_path.c_str());
    return 0;
}

int run_grad_check(const Options& o) {
    Rng rng(o.seed);
    Network net = build_network(builtin_embedder_specs(), 3, false, rng);
    const std::size_t s = std::min<std::size_t>(o.size, 16);  // small shapes keep this fast
    Tensor a({3, s, s}), b({3, s, s});
    for (double& v : a.data) v = rng.uniform();
    for (double& v : b.data) v = rng.uniform();
    const auto report = finite_diff_check_siamese(net, a, b, 0.5, 1e-4);
    std::fputs(report.to_string().c_str(), stdout);
    return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-shot metric-learning localization toolkit"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("gen-synth", "generate a seeded synthetic dataset");
    std::string gen_out = "synth";
    std::size_t gen_classes = 10, gen_support = 5, gen_eval = 20;
    bool gen_unknown = false;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--classes", gen_classes, "number of classes (max 10)");
    gen->add_option("--support", gen_support, "support images per class");
    gen->add_option("--eval-frames", gen_eval, "eval frames per class");
    gen->add_flag("--unknown", gen_unknown, "also generate a held-out unknown class");
    add_common(gen, o);

    auto* tr = app.add_subcommand("train", "train the embedding model");
    std::string tr_manifest, tr_embeddings, tr_out = "run";
    tr->add_option("--manifest", tr_manifest, "dataset manifest (#MLOC-DS v1)");
    tr->add_option("--embeddings", tr_embeddings, "train a head on external embeddings instead");
    tr->add_option("--out", tr_out, "output directory");
    add_common(tr, o);

    auto* cf = app.add_subcommand("classify-frame", "classify a single frame");
    std::string cf_ckpt, cf_manifest, cf_embeddings, cf_query;
    cf->add_option("--checkpoint", cf_ckpt)->required();
    cf->add_option("--support-manifest", cf_manifest, "manifest providing the support set");
    cf->add_option("--embeddings", cf_embeddings, "embedding exchange file");
    cf->add_option("--query", cf_query, "image path (or embedding id)")->required();
    add_common(cf, o);

    auto* cv = app.add_subcommand("classify-video", "classify a frame sequence");
    std::string cv_ckpt, cv_manifest, cv_embeddings, cv_video, cv_out = "video_out";
    cv->add_option("--checkpoint", cv_ckpt)->required();
    cv->add_option("--support-manifest", cv_manifest, "manifest providing the support set");
    cv->add_option("--embeddings", cv_embeddings, "embedding exchange file");
    cv->add_option("--video", cv_video, "video manifest (#MLOC-VID v1)")->required();
    cv->add_option("--out", cv_out, "output directory");
    add_common(cv, o);

    auto* ev = app.add_subcommand("evaluate", "score predictions against truth labels");
    std::string ev_pred, ev_truth, ev_dump, ev_out = "eval_out";
    ev->add_option("--pred", ev_pred, "prediction labels `id,label`")->required();
    ev->add_option("--truth", ev_truth, "truth labels `id,label`")->required();
    ev->add_option("--frame-dump", ev_dump, "frames.txt dump for ROC curves");
    ev->add_option("--out", ev_out, "output directory");
    add_common(ev, o);

    auto* ex = app.add_subcommand("export-latents", "export embeddings for external plotting");
    std::string ex_ckpt, ex_manifest, ex_out = "latents.txt";
    ex->add_option("--checkpoint", ex_ckpt)->required();
    ex->add_option("--manifest", ex_manifest)->required();
    ex->add_option("--out", ex_out, "embedding exchange output file");
    add_common(ex, o);

    auto* gc = app.add_subcommand("grad-check", "finite-difference gradient check");
    add_common(gc, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        apply_config(cmd, o);
        if (cmd != cv) echo_config(o, o.fps);  // classify-video echoes the manifest fps
        if (cmd == gen) return run_gen_synth(o, gen_out, gen_classes, gen_support, gen_eval,
                                             gen_unknown);
        if (cmd == tr) {
            if (tr_manifest.empty() && tr_embeddings.empty()) {
                std::fprintf(stderr, "train: --manifest or --embeddings is required\n%s\n",
                             tr->help().c_str());
                return 2;
            }
            return run_train(o, tr_manifest, tr_embeddings, tr_out);
        }
        if (cmd == cf) return run_classify_frame(o, cf_ckpt, cf_manifest, cf_embeddings, cf_query);
        if (cmd == cv) return run_classify_video(o, cv_ckpt, cv_manifest, cv_embeddings, cv_video,
                                                 cv_out);
        if (cmd == ev) return run_evaluate(ev_pred, ev_truth, ev_dump, ev_out);
        if (cmd == ex) return run_export_latents(o, ex_ckpt, ex_manifest, ex_out);
        if (cmd == gc) return run_grad_check(o);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
