#include "mloc/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace mloc {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sample_gamma(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double u = rng.uniform();
        return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze method.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

}  // namespace

double mapped_distance(const std::vector<double>& e1, const std::vector<double>& e2) {
    if (e1.size() != e2.size()) {
        throw Error("mapped_distance: dimension mismatch " + std::to_string(e1.size()) + " vs " +
                    std::to_string(e2.size()));
    }
    return 2.0 * sigmoid(euclidean_distance(e1, e2)) - 1.0;
}

double mapped_distance(const EmbeddingVector& e1, const EmbeddingVector& e2) {
    return mapped_distance(e1.values, e2.values);
}

double contrastive_loss(double mapped_dist, double target) {
    const double miss = std::max(0.0, 1.0 - mapped_dist);
    return (1.0 - target) * mapped_dist * mapped_dist + target * miss * miss;
}

std::vector<double> contrastive_loss_grad_e1(const std::vector<double>& e1,
                                             const std::vector<double>& e2, double target) {
    const double d = euclidean_distance(e1, e2);
    std::vector<double> g(e1.size(), 0.0);
    if (d < 1e-12) return g;  // subgradient at the coincident point
    const double s = sigmoid(d);
    const double mapped = 2.0 * s - 1.0;
    const double dl_dmapped =
        2.0 * (1.0 - target) * mapped - 2.0 * target * std::max(0.0, 1.0 - mapped);
    const double scale = dl_dmapped * 2.0 * s * (1.0 - s) / d;
    for (std::size_t i = 0; i < e1.size(); ++i) g[i] = scale * (e1[i] - e2[i]);
    return g;
}

double sample_lambda(Rng& rng, double alpha) {
    if (alpha <= 0.0) throw Error("sample_lambda: alpha must be positive");
    if (alpha == 2.0) {
        // Median of three independent uniforms is exactly Beta(2,2).
        double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        return std::max(a, b);
    }
    const double g1 = sample_gamma(rng, alpha);
    const double g2 = sample_gamma(rng, alpha);
    return g1 / (g1 + g2);
}

std::vector<TrainingPair> mixup_pairs(int anchor_class, const std::vector<double>& same_class_latent,
                                      int same_class, const std::vector<double>& other_class_latent,
                                      int other_class, const std::vector<double>& lambdas) {
    if (same_class != anchor_class) {
        throw Error("mixup_pairs: first latent must share the anchor's class (anchor " +
                    std::to_string(anchor_class) + ", got " + std::to_string(same_class) + ")");
    }
    if (other_class == anchor_class) {
        throw Error("mixup_pairs: second latent must come from a different class");
    }
    if (same_class_latent.size() != other_class_latent.size()) {
        throw Error("mixup_pairs: latent dimension mismatch");
    }
    std::vector<TrainingPair> pairs;
    pairs.reserve(lambdas.size());
    for (double lambda : lambdas) {
        TrainingPair p;
        p.lambda = lambda;
        p.target = 1.0 - lambda;
        p.partner_latent.resize(same_class_latent.size());
        for (std::size_t i = 0; i < same_class_latent.size(); ++i) {
            p.partner_latent[i] =
                lambda * same_class_latent[i] + (1.0 - lambda) * other_class_latent[i];
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

TrainResult train(Network& net, const std::vector<TrainItem>& items, const TrainConfig& config,
                  const MixupConfig& mixup) {
    if (net.size() == 0 || net.layer(net.size() - 1).kind() != LayerKind::L2Normalize) {
        throw Error("train: network must end with l2_normalize");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < items.size(); ++i) by_class[items[i].label].push_back(i);
    if (by_class.size() < 2) {
        throw Error("train: need at least 2 classes, got " + std::to_string(by_class.size()));
    }
    std::vector<int> classes, anchorable;
    for (const auto& [label, members] : by_class) {
        classes.push_back(label);
        if (members.size() >= 2) anchorable.push_back(label);
    }
    if (anchorable.empty()) {
        throw Error("train: no class has 2+ items, so no positive pair exists");
    }
    if (mixup.alpha <= 0.0 || mixup.mixes_per_pair < 1) {
        throw Error("train: invalid mixup config");
    }

    Rng rng(config.seed);
    Rmsprop optimizer(config.optimizer);
    const std::size_t pairs_per_group = (config.mixup_enabled ? mixup.mixes_per_pair : 0) + 2;
    const double pair_scale =
        1.0 / static_cast<double>(config.pairs_per_episode * pairs_per_group);

    TrainResult result;
    std::size_t calm_episodes = 0;
    for (std::size_t episode = 0; episode < config.episodes; ++episode) {
        net.zero_grads();
        double episode_loss = 0.0;
        for (std::size_t g = 0; g < config.pairs_per_episode; ++g) {
            const int anchor_class = anchorable[rng.index(anchorable.size())];
            const auto& members = by_class[anchor_class];
            const std::size_t anchor_pos = rng.index(members.size());
            std::size_t positive_pos = rng.index(members.size() - 1);
            if (positive_pos >= anchor_pos) ++positive_pos;
            int other_class = anchor_class;
            while (other_class == anchor_class) other_class = classes[rng.index(classes.size())];
            const auto& foreign = by_class[other_class];
            const std::size_t foreign_pos = rng.index(foreign.size());

            const TrainItem& anchor = items[members[anchor_pos]];
            const TrainItem& same = items[members[positive_pos]];
            const TrainItem& other = items[foreign[foreign_pos]];

            ForwardTrace trace_a = net.forward(anchor.input);
            ForwardTrace trace_1 = net.forward(same.input);
            ForwardTrace trace_2 = net.forward(other.input);
            const std::vector<double>& e_a = trace_a.output.data;
            // Mix normalized latents: with unnormalized ones the larger-norm
            // parent dominates the mix regardless of lambda, breaking the
            // lambda <-> target correspondence.
            const std::vector<double>& l1 = trace_1.output.data;
            const std::vector<double>& l2 = trace_2.output.data;

            std::vector<double> lambdas;
            if (config.mixup_enabled) {
                lambdas.reserve(mixup.mixes_per_pair);
                for (std::size_t k = 0; k < mixup.mixes_per_pair; ++k)
                    lambdas.push_back(sample_lambda(rng, mixup.alpha));
            }
            // The two pure pairs are the lambda endpoints.
            lambdas.push_back(1.0);
            lambdas.push_back(0.0);
            const auto pairs = mixup_pairs(anchor.label, l1, same.label, l2, other.label, lambdas);

            std::vector<double> g_ea(e_a.size(), 0.0);
            std::vector<double> g_l1(l1.size(), 0.0);
            std::vector<double> g_l2(l2.size(), 0.0);
            for (const TrainingPair& pair : pairs) {
                const std::vector<double> e_p = l2_normalize_vec(pair.partner_latent);
                episode_loss += contrastive_loss(mapped_distance(e_a, e_p), pair.target);
                const auto ga = contrastive_loss_grad_e1(e_a, e_p, pair.target);
                std::vector<double> gp(ga.size());
                for (std::size_t i = 0; i < ga.size(); ++i) {
                    g_ea[i] += ga[i];
                    gp[i] = -ga[i];
                }
                const auto gm = l2_normalize_grad(pair.partner_latent, gp);
                for (std::size_t i = 0; i < gm.size(); ++i) {
                    g_l1[i] += pair.lambda * gm[i];
                    g_l2[i] += (1.0 - pair.lambda) * gm[i];
                }
            }
            for (double& v : g_ea) v *= pair_scale;
            for (double& v : g_l1) v *= pair_scale;
            for (double& v : g_l2) v *= pair_scale;
            const std::size_t out_dim = g_ea.size(), latent_dim = g_l1.size();
            net.backward(trace_a, Tensor({out_dim}, std::move(g_ea)));
            net.backward(trace_1, Tensor({latent_dim}, std::move(g_l1)));
            net.backward(trace_2, Tensor({latent_dim}, std::move(g_l2)));
        }
        episode_loss *= pair_scale;
        if (!std::isfinite(episode_loss)) {
            throw Error("train: non-finite loss at episode " + std::to_string(episode));
        }
        std::vector<Tensor*> params;
        for (auto& ref : net.params()) params.push_back(ref.value);
        optimizer.step(params);
        result.loss_trace.push_back(episode_loss);
        ++result.episodes_run;

        calm_episodes = episode_loss < config.early_stop_loss ? calm_episodes + 1 : 0;
        if (calm_episodes >= 10) break;
    }
    return result;
}

void write_loss_trace(const TrainResult& result, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("loss trace: cannot write " + path);
    char buf[48];
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, result.loss_trace[i]);
        os << buf;
    }
}

}  // namespace mloc
