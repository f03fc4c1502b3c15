#pragma once

#include <string>
#include <vector>

#include "mloc/embedding.hpp"
#include "mloc/layers.hpp"
#include "mloc/optimizer.hpp"
#include "mloc/rng.hpp"

namespace mloc {

// D = 2*sigmoid(||e1 - e2||) - 1, in [0,1): zero exactly when the embeddings
// coincide and strictly increasing in the Euclidean distance.
double mapped_distance(const std::vector<double>& e1, const std::vector<double>& e2);
double mapped_distance(const EmbeddingVector& e1, const EmbeddingVector& e2);

// Pairwise objective: (1-Y)*D^2 + Y*max(0, 1-D)^2.
double contrastive_loss(double mapped_dist, double target);

// d(loss)/d(e1) of contrastive_loss(mapped_distance(e1,e2), Y); the gradient
// with respect to e2 is its negation.
std::vector<double> contrastive_loss_grad_e1(const std::vector<double>& e1,
                                             const std::vector<double>& e2, double target);

// Beta(alpha, alpha) draw. alpha=2 uses the exact median-of-three-uniforms
// construction; other alphas go through a gamma-ratio sampler.
double sample_lambda(Rng& rng, double alpha = 2.0);

struct TrainingPair {
    std::vector<double> partner_latent;  // pre-normalization latent
    double target = 0.0;                 // Y in [0,1]
    double lambda = 1.0;
};

struct MixupConfig {
    double alpha = 2.0;
    std::size_t mixes_per_pair = 50;
};

struct TrainConfig {
    std::size_t episodes = 200;
    std::size_t pairs_per_episode = 32;
    std::uint64_t seed = 1;
    bool mixup_enabled = true;
    RmspropConfig optimizer;
    // Stop once the episode loss stays below this for 10 consecutive episodes.
    double early_stop_loss = 1e-4;
};

// Mixed partners lambda*x1 + (1-lambda)*x2 with soft target Y = 1-lambda.
// x1 must share the anchor's class and x2 must not.
std::vector<TrainingPair> mixup_pairs(int anchor_class, const std::vector<double>& same_class_latent,
                                      int same_class, const std::vector<double>& other_class_latent,
                                      int other_class, const std::vector<double>& lambdas);

struct TrainItem {
    std::string id;
    int label = 0;
    Tensor input;  // (3,H,W) image or a flat feature vector, per the network
};

struct TrainResult {
    std::vector<double> loss_trace;  // one mean pair loss per episode
    std::size_t episodes_run = 0;
};

// Trains the network's parameters in place with contrastive loss over
// mixup-augmented latent pairs. Requires at least two classes and a class
// with at least two items.
TrainResult train(Network& net, const std::vector<TrainItem>& items, const TrainConfig& config,
                  const MixupConfig& mixup);

void write_loss_trace(const TrainResult& result, const std::string& path);

}  // namespace mloc
