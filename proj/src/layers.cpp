#include "mloc/layers.hpp"

#include <algorithm>
#include <cmath>

namespace mloc {

namespace {

constexpr double kNormEps = 1e-12;  // inside the norm, guards the zero vector

void check_finite(const Tensor& t, LayerKind k, std::size_t layer_index, const char* dir) {
    if (!t.all_finite()) {
        throw Error(std::string("layer ") + std::to_string(layer_index) + " (" +
                    layer_kind_name(k) + "): non-finite values in " + dir + " pass");
    }
}

void require_shape_3d(const Tensor& in, LayerKind k, std::size_t layer_index) {
    if (in.shape.size() != 3) {
        throw Error(std::string("layer ") + std::to_string(layer_index) + " (" +
                    layer_kind_name(k) + "): expected a (C,H,W) input, got shape " +
                    shape_str(in.shape));
    }
}

class Conv2dLayer final : public Layer {
public:
    Conv2dLayer(std::size_t in_ch, std::size_t out_ch, std::size_t stride, Rng& rng)
        : stride_(stride), weight_({out_ch, in_ch, 3, 3}) {
        const double fan_in = static_cast<double>(in_ch) * 9.0;
        const double fan_out = static_cast<double>(out_ch) * 9.0;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : weight_.data) w = rng.uniform(-bound, bound);
        weight_.ensure_grad();
    }

    LayerKind kind() const override { return LayerKind::Conv2d; }
    Tensor* param() override { return &weight_; }
    const Tensor* param() const override { return &weight_; }

    Tensor forward(const Tensor& in, std::size_t layer_index) const override {
        require_shape_3d(in, kind(), layer_index);
        const std::size_t cin = weight_.shape[1];
        if (in.shape[0] != cin) {
            throw Error("layer " + std::to_string(layer_index) +
                        " (conv2d): expected " + std::to_string(cin) + " input channels, got " +
                        std::to_string(in.shape[0]) + " (input shape " + shape_str(in.shape) + ")");
        }
        const std::size_t cout = weight_.shape[0];
        const std::size_t h = in.shape[1], w = in.shape[2];
        const std::size_t oh = (h - 1) / stride_ + 1;
        const std::size_t ow = (w - 1) / stride_ + 1;
        Tensor out({cout, oh, ow});
        for (std::size_t oc = 0; oc < cout; ++oc) {
            for (std::size_t y = 0; y < oh; ++y) {
                for (std::size_t x = 0; x < ow; ++x) {
                    double acc = 0.0;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        for (std::size_t kh = 0; kh < 3; ++kh) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(y * stride_ + kh) - 1;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t kw = 0; kw < 3; ++kw) {
                                const std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(x * stride_ + kw) - 1;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                                acc += weight_.at4(oc, ic, kh, kw) *
                                       in.at3(ic, static_cast<std::size_t>(iy),
                                              static_cast<std::size_t>(ix));
                            }
                        }
                    }
                    out.at3(oc, y, x) = acc;
                }
            }
        }
        check_finite(out, kind(), layer_index, "forward");
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor& gout, std::size_t layer_index) override {
        const std::size_t cout = weight_.shape[0], cin = weight_.shape[1];
        const std::size_t h = in.shape[1], w = in.shape[2];
        const std::size_t oh = gout.shape[1], ow = gout.shape[2];
        weight_.ensure_grad();
        Tensor gin(in.shape);
        for (std::size_t oc = 0; oc < cout; ++oc) {
            for (std::size_t y = 0; y < oh; ++y) {
                for (std::size_t x = 0; x < ow; ++x) {
                    const double g = gout.at3(oc, y, x);
                    if (g == 0.0) continue;
                    for (std::size_t ic = 0; ic < cin; ++ic) {
                        for (std::size_t kh = 0; kh < 3; ++kh) {
                            const std::ptrdiff_t iy =
                                static_cast<std::ptrdiff_t>(y * stride_ + kh) - 1;
                            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t kw = 0; kw < 3; ++kw) {
                                const std::ptrdiff_t ix =
                                    static_cast<std::ptrdiff_t>(x * stride_ + kw) - 1;
                                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                                const std::size_t uy = static_cast<std::size_t>(iy);
                                const std::size_t ux = static_cast<std::size_t>(ix);
                                weight_.grad[((oc * cin + ic) * 3 + kh) * 3 + kw] +=
                                    g * in.at3(ic, uy, ux);
                                gin.at3(ic, uy, ux) += g * weight_.at4(oc, ic, kh, kw);
                            }
                        }
                    }
                }
            }
        }
        check_finite(gin, kind(), layer_index, "backward");
        return gin;
    }

private:
    std::size_t stride_;
    Tensor weight_;
};

class ReluLayer final : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Relu; }

    Tensor forward(const Tensor& in, std::size_t) const override {
        Tensor out(in.shape);
        for (std::size_t i = 0; i < in.numel(); ++i) out.data[i] = std::max(0.0, in.data[i]);
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor& gout, std::size_t) override {
        Tensor gin(in.shape);
        for (std::size_t i = 0; i < in.numel(); ++i)
            gin.data[i] = in.data[i] > 0.0 ? gout.data[i] : 0.0;
        return gin;
    }
};

class GlobalMaxPoolLayer final : public Layer {
public:
    LayerKind kind() const override { return LayerKind::GlobalMaxPool; }

    Tensor forward(const Tensor& in, std::size_t layer_index) const override {
        require_shape_3d(in, kind(), layer_index);
        const auto idx = channel_argmax(in);
        Tensor out({in.shape[0]});
        for (std::size_t c = 0; c < in.shape[0]; ++c) out.data[c] = in.data[idx[c]];
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor& gout, std::size_t) override {
        const auto idx = channel_argmax(in);
        Tensor gin(in.shape);
        for (std::size_t c = 0; c < in.shape[0]; ++c) gin.data[idx[c]] += gout.data[c];
        return gin;
    }
};

class DenseLayer final : public Layer {
public:
    DenseLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng)
        : weight_({out_dim, in_dim}) {
        const double bound = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
        for (double& w : weight_.data) w = rng.uniform(-bound, bound);
        weight_.ensure_grad();
    }

    LayerKind kind() const override { return LayerKind::Dense; }
    Tensor* param() override { return &weight_; }
    const Tensor* param() const override { return &weight_; }

    Tensor forward(const Tensor& in, std::size_t layer_index) const override {
        const std::size_t out_dim = weight_.shape[0], in_dim = weight_.shape[1];
        if (in.numel() != in_dim) {
            throw Error("layer " + std::to_string(layer_index) + " (dense): expected input of " +
                        std::to_string(in_dim) + " values, got shape " + shape_str(in.shape));
        }
        Tensor out({out_dim});
        for (std::size_t o = 0; o < out_dim; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < in_dim; ++i) acc += weight_.data[o * in_dim + i] * in.data[i];
            out.data[o] = acc;
        }
        check_finite(out, kind(), layer_index, "forward");
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor& gout, std::size_t) override {
        const std::size_t out_dim = weight_.shape[0], in_dim = weight_.shape[1];
        weight_.ensure_grad();
        Tensor gin(in.shape);
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double g = gout.data[o];
            for (std::size_t i = 0; i < in_dim; ++i) {
                weight_.grad[o * in_dim + i] += g * in.data[i];  // outer product g (x) x
                gin.data[i] += g * weight_.data[o * in_dim + i];
            }
        }
        return gin;
    }

private:
    Tensor weight_;
};

class L2NormalizeLayer final : public Layer {
public:
    LayerKind kind() const override { return LayerKind::L2Normalize; }

    Tensor forward(const Tensor& in, std::size_t layer_index) const override {
        Tensor out(in.shape, l2_normalize_vec(in.data));
        check_finite(out, kind(), layer_index, "forward");
        return out;
    }

    Tensor backward(const Tensor& in, const Tensor& gout, std::size_t) override {
        return Tensor(in.shape, l2_normalize_grad(in.data, gout.data));
    }
};

}  // namespace

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Relu: return "relu";
        case LayerKind::GlobalMaxPool: return "global_max_pool";
        case LayerKind::Dense: return "dense";
        case LayerKind::L2Normalize: return "l2_normalize";
    }
    return "unknown";
}

std::vector<std::size_t> channel_argmax(const Tensor& in) {
    const std::size_t c = in.shape[0], hw = in.shape[1] * in.shape[2];
    std::vector<std::size_t> out(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        std::size_t best = ch * hw;
        for (std::size_t i = 1; i < hw; ++i) {
            // Strict > keeps the first (row-major) maximum on ties.
            if (in.data[ch * hw + i] > in.data[best]) best = ch * hw + i;
        }
        out[ch] = best;
    }
    return out;
}

std::vector<double> l2_normalize_vec(const std::vector<double>& x) {
    const double n = std::sqrt(dot(x, x) + kNormEps);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / n;
    return out;
}

std::vector<double> l2_normalize_grad(const std::vector<double>& x, const std::vector<double>& gout) {
    const double s = dot(x, x) + kNormEps;
    const double n = std::sqrt(s);
    const double xg = dot(x, gout);
    std::vector<double> gin(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gin[i] = gout[i] / n - x[i] * xg / (n * s);
    return gin;
}

ForwardTrace Network::forward(const Tensor& input) const {
    ForwardTrace trace;
    trace.layer_inputs.reserve(layers_.size());
    Tensor cur = input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        trace.layer_inputs.push_back(cur);
        cur = layers_[i]->forward(trace.layer_inputs.back(), i);
    }
    trace.output = std::move(cur);
    return trace;
}

Tensor Network::backward(const ForwardTrace& trace, const Tensor& grad, std::size_t start_layer) {
    if (trace.layer_inputs.size() != layers_.size()) {
        throw Error("backward called without a matching forward trace");
    }
    if (start_layer > layers_.size()) {
        throw Error("backward start layer out of range");
    }
    Tensor g = grad;
    for (std::size_t i = start_layer; i-- > 0;) {
        g = layers_[i]->backward(trace.layer_inputs[i], g, i);
    }
    return g;
}

std::vector<ParamRef> Network::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (Tensor* p = layers_[i]->param()) {
            out.push_back({std::string(layer_kind_name(layers_[i]->kind())) + "_" +
                               std::to_string(i),
                           p});
        }
    }
    return out;
}

std::vector<const Tensor*> Network::params_const() const {
    std::vector<const Tensor*> out;
    for (const auto& l : layers_)
        if (const Tensor* p = l->param()) out.push_back(p);
    return out;
}

void Network::zero_grads() {
    for (auto& ref : params()) {
        ref.value->ensure_grad();
        ref.value->zero_grad();
    }
}

Network build_network(const std::vector<LayerSpec>& specs, std::size_t input_channels,
                      bool input_is_vector, Rng& rng) {
    Network net;
    std::size_t channels = input_channels;
    bool is_vector = input_is_vector;
    for (const LayerSpec& s : specs) {
        switch (s.kind) {
            case LayerKind::Conv2d:
                if (is_vector) throw Error("conv2d layer after a vector-producing layer");
                net.add(std::make_unique<Conv2dLayer>(channels, s.out_channels, s.stride, rng));
                channels = s.out_channels;
                break;
            case LayerKind::Relu:
                net.add(std::make_unique<ReluLayer>());
                break;
            case LayerKind::GlobalMaxPool:
                net.add(std::make_unique<GlobalMaxPoolLayer>());
                is_vector = true;
                break;
            case LayerKind::Dense:
                if (!is_vector) throw Error("dense layer requires a vector input");
                net.add(std::make_unique<DenseLayer>(channels, s.out_channels, rng));
                channels = s.out_channels;
                break;
            case LayerKind::L2Normalize:
                net.add(std::make_unique<L2NormalizeLayer>());
                break;
        }
    }
    return net;
}

std::vector<LayerSpec> builtin_embedder_specs() {
    return {LayerSpec::conv2d(8, 2),  LayerSpec::relu(), LayerSpec::conv2d(16, 2),
            LayerSpec::relu(),        LayerSpec::global_max_pool(),
            LayerSpec::dense(64),     LayerSpec::l2_normalize()};
}

std::vector<LayerSpec> embedding_head_specs() {
    return {LayerSpec::dense(64), LayerSpec::l2_normalize()};
}

}  // namespace mloc
