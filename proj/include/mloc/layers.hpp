#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mloc/rng.hpp"
#include "mloc/tensor.hpp"

namespace mloc {

enum class LayerKind : std::uint8_t {
    Conv2d = 1,
    Relu = 2,
    GlobalMaxPool = 3,
    Dense = 4,
    L2Normalize = 5,
};

const char* layer_kind_name(LayerKind k);

// Declarative layer description used to build a Network.
struct LayerSpec {
    LayerKind kind;
    std::size_t out_channels = 0;  // conv2d / dense output size
    std::size_t stride = 1;        // conv2d only (kernel fixed at 3x3, pad 1)

    static LayerSpec conv2d(std::size_t out_channels, std::size_t stride) {
        return {LayerKind::Conv2d, out_channels, stride};
    }
    static LayerSpec relu() { return {LayerKind::Relu}; }
    static LayerSpec global_max_pool() { return {LayerKind::GlobalMaxPool}; }
    static LayerSpec dense(std::size_t out_dim) { return {LayerKind::Dense, out_dim}; }
    static LayerSpec l2_normalize() { return {LayerKind::L2Normalize}; }
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual LayerKind kind() const = 0;
    virtual Tensor forward(const Tensor& in, std::size_t layer_index) const = 0;
    // Accumulates parameter gradients (+=) and returns the input gradient.
    virtual Tensor backward(const Tensor& in, const Tensor& gout, std::size_t layer_index) = 0;
    virtual Tensor* param() { return nullptr; }
    virtual const Tensor* param() const { return nullptr; }
};

// Cached activations from one forward pass; owned by the caller so several
// passes (shared weights, different inputs) can be alive at once.
struct ForwardTrace {
    std::vector<Tensor> layer_inputs;  // input seen by layer i
    Tensor output;
};

struct ParamRef {
    std::string name;
    Tensor* value;
};

// Fixed feed-forward stack over the five supported layer kinds.
class Network {
public:
    Network() = default;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
    std::size_t size() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return *layers_[i]; }

    ForwardTrace forward(const Tensor& input) const;
    Tensor forward_value(const Tensor& input) const { return forward(input).output; }

    // Backpropagates from layer `start_layer` (default: the output) down to
    // the input, accumulating parameter gradients. Returns the input gradient.
    Tensor backward(const ForwardTrace& trace, const Tensor& grad, std::size_t start_layer);
    Tensor backward(const ForwardTrace& trace, const Tensor& grad) {
        return backward(trace, grad, layers_.size());
    }

    std::vector<ParamRef> params();
    std::vector<const Tensor*> params_const() const;
    void zero_grads();

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Builds a network from specs for a (channels,H,W) image input (or, when
// input_is_vector, a flat vector of length input_channels). Parameters are
// initialized uniform in +-sqrt(6/(fan_in+fan_out)) from the given rng.
Network build_network(const std::vector<LayerSpec>& specs, std::size_t input_channels,
                      bool input_is_vector, Rng& rng);

// The built-in image embedder: conv(3->8,s2), relu, conv(8->16,s2), relu,
// global max pool, dense(16->64), l2 normalize.
std::vector<LayerSpec> builtin_embedder_specs();

// Head trained on externally computed 64-d features: dense(64->64), normalize.
std::vector<LayerSpec> embedding_head_specs();

// Shared argmax scan for (C,H,W) tensors: per channel, the flat index of the
// maximum, ties resolved to the smallest row then smallest column.
std::vector<std::size_t> channel_argmax(const Tensor& in);

// Standalone l2-normalize forward/backward on flat vectors, shared with the
// mixup path which normalizes mixed latents outside any network.
std::vector<double> l2_normalize_vec(const std::vector<double>& x);
std::vector<double> l2_normalize_grad(const std::vector<double>& x, const std::vector<double>& gout);

}  // namespace mloc
