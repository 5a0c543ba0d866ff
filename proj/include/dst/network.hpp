#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dst/error.hpp"
#include "dst/kernels.hpp"
#include "dst/sparsity.hpp"
#include "dst/tensor.hpp"

namespace dst {

enum class Activation { relu, identity };

struct LayerSpec {
    i64 n_in = 0;
    i64 n_out = 0;
    bool has_bias = true;
    Activation act = Activation::relu;
};

// Feed-forward network description. Loss is softmax cross-entropy over the
// final layer's outputs; hidden layers are ReLU, the final layer identity.
struct NetworkSpec {
    std::vector<LayerSpec> layers;

    static NetworkSpec mlp(const std::vector<i64>& widths, bool bias = true) {
        if (widths.size() < 2) throw ConfigError("network: need at least input and output widths");
        NetworkSpec spec;
        for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
            const bool last = (i + 2 == widths.size());
            spec.layers.push_back({widths[i], widths[i + 1], bias,
                                   last ? Activation::identity : Activation::relu});
        }
        spec.validate();
        return spec;
    }

    void validate() const {
        if (layers.empty()) throw ConfigError("network: no layers");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].n_in <= 0 || layers[i].n_out <= 0)
                throw ConfigError("network: non-positive layer dimension");
            if (i > 0 && layers[i - 1].n_out != layers[i].n_in)
                throw ConfigError("network: layer " + std::to_string(i - 1) + " output " +
                                  std::to_string(layers[i - 1].n_out) + " does not feed layer " +
                                  std::to_string(i) + " input " + std::to_string(layers[i].n_in));
        }
    }

    i64 input_dim() const { return layers.front().n_in; }
    i64 num_classes() const { return layers.back().n_out; }
    i64 num_layers() const { return static_cast<i64>(layers.size()); }

    std::vector<std::vector<i64>> weight_dims() const {
        std::vector<std::vector<i64>> dims;
        for (const auto& l : layers) dims.push_back({l.n_in, l.n_out});
        return dims;
    }
};

template <typename T>
struct LayerParams {
    TensorT<T> weight; // [n_in, n_out]
    TensorT<T> bias;   // [n_out], empty when has_bias is false
};

template <typename T>
using LayerGrads = LayerParams<T>;

template <typename T>
std::vector<LayerParams<T>> zero_params(const NetworkSpec& spec) {
    std::vector<LayerParams<T>> params;
    for (const auto& l : spec.layers) {
        LayerParams<T> p;
        p.weight = TensorT<T>::zeros({l.n_in, l.n_out});
        if (l.has_bias) p.bias = TensorT<T>::zeros({l.n_out});
        params.push_back(std::move(p));
    }
    return params;
}

// All-ones weight masks (dense network).
template <typename T>
std::vector<TensorT<T>> dense_masks(const NetworkSpec& spec) {
    std::vector<TensorT<T>> masks;
    for (const auto& l : spec.layers) masks.push_back(TensorT<T>::full({l.n_in, l.n_out}, T(1)));
    return masks;
}

// Non-owning per-layer view of weights, masks and biases; the single code
// path under both the (params, masks) and the MaskedTensor-based APIs.
template <typename T>
struct NetView {
    std::vector<const TensorT<T>*> weights;
    std::vector<const TensorT<T>*> masks;
    std::vector<const TensorT<T>*> biases; // nullptr where has_bias is false
};

template <typename T>
NetView<T> make_view(const std::vector<LayerParams<T>>& params, const std::vector<TensorT<T>>& masks) {
    if (params.size() != masks.size()) throw ConfigError("view: params/masks layer count mismatch");
    NetView<T> v;
    for (std::size_t l = 0; l < params.size(); ++l) {
        v.weights.push_back(&params[l].weight);
        v.masks.push_back(&masks[l]);
        v.biases.push_back(params[l].bias.size() > 0 ? &params[l].bias : nullptr);
    }
    return v;
}

template <typename T>
NetView<T> make_view(const std::vector<MaskedTensorT<T>>& layers, const std::vector<TensorT<T>>& biases) {
    if (layers.size() != biases.size()) throw ConfigError("view: layers/biases count mismatch");
    NetView<T> v;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        v.weights.push_back(&layers[l].values);
        v.masks.push_back(&layers[l].mask);
        v.biases.push_back(biases[l].size() > 0 ? &biases[l] : nullptr);
    }
    return v;
}

template <typename T>
std::uint64_t params_digest(const NetView<T>& view) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto feed = [&h](const TensorT<T>* t) {
        if (!t) return;
        const auto* bytes = reinterpret_cast<const unsigned char*>(t->values.data());
        for (std::size_t i = 0; i < t->values.size() * sizeof(T); ++i) {
            h ^= bytes[i];
            h *= 0x100000001B3ull;
        }
    };
    for (std::size_t l = 0; l < view.weights.size(); ++l) {
        feed(view.weights[l]);
        feed(view.biases[l]);
    }
    return h;
}

template <typename T>
struct ForwardCache {
    i64 batch_size = 0;
    // acts[0] is the input batch, acts[l+1] the post-activation output of
    // layer l; acts.back() holds the logits.
    std::vector<TensorT<T>> acts;
    TensorT<T> probs; // softmax of the logits, [B, C]
    std::uint64_t params_digest = 0;
};

template <typename T>
struct ForwardResult {
    double loss = 0.0;
    ForwardCache<T> cache;
};

namespace detail {

template <typename T>
void check_view(const NetworkSpec& spec, const NetView<T>& view, const TensorT<T>& batch,
                std::span<const std::uint8_t> labels) {
    spec.validate();
    if (static_cast<i64>(view.weights.size()) != spec.num_layers())
        throw ConfigError("forward: layer count does not match network");
    for (i64 l = 0; l < spec.num_layers(); ++l) {
        const auto& ls = spec.layers[static_cast<std::size_t>(l)];
        const auto* w = view.weights[static_cast<std::size_t>(l)];
        const auto* m = view.masks[static_cast<std::size_t>(l)];
        const auto* b = view.biases[static_cast<std::size_t>(l)];
        if (w->shape != std::vector<i64>{ls.n_in, ls.n_out})
            throw ConfigError("forward: weight shape mismatch in layer " + std::to_string(l));
        if (!w->same_shape(*m))
            throw ConfigError("forward: mask shape mismatch in layer " + std::to_string(l));
        if (ls.has_bias && (!b || b->shape != std::vector<i64>{ls.n_out}))
            throw ConfigError("forward: bias shape mismatch in layer " + std::to_string(l));
    }
    if (batch.shape.size() != 2 || batch.cols() != spec.input_dim())
        throw ConfigError("forward: batch shape " + shape_str(batch.shape) +
                          " does not match input dim " + std::to_string(spec.input_dim()));
    if (static_cast<i64>(labels.size()) != batch.rows())
        throw ConfigError("forward: label count does not match batch size");
    for (auto y : labels)
        if (y >= spec.num_classes()) throw ConfigError("forward: label out of range");
}

template <typename T>
void check_finite(const TensorT<T>& t, i64 layer) {
    for (const T v : t.values)
        if (!std::isfinite(v))
            throw NumericError("non-finite activation in layer " + std::to_string(layer));
}

// effective weight: W elementwise-multiplied by its mask.
template <typename T>
TensorT<T> masked_weight(const TensorT<T>& w, const TensorT<T>& m) {
    TensorT<T> out = w;
    for (i64 i = 0; i < out.size(); ++i) out[i] *= m[i];
    return out;
}

} // namespace detail

// Runs the network on a batch: logits are computed with the effective
// weights (values times mask), the loss is mean softmax cross-entropy.
// Activations sufficient for backward are cached.
template <typename T>
ForwardResult<T> forward(const NetworkSpec& spec, const NetView<T>& view, const TensorT<T>& batch,
                         std::span<const std::uint8_t> labels) {
    detail::check_view(spec, view, batch, labels);
    const i64 B = batch.rows();
    const i64 C = spec.num_classes();

    ForwardCache<T> cache;
    cache.batch_size = B;
    cache.params_digest = params_digest(view);
    cache.acts.reserve(view.weights.size() + 1);
    cache.acts.push_back(batch);

    for (i64 l = 0; l < spec.num_layers(); ++l) {
        const auto& ls = spec.layers[static_cast<std::size_t>(l)];
        const TensorT<T> eff = detail::masked_weight(*view.weights[static_cast<std::size_t>(l)],
                                                     *view.masks[static_cast<std::size_t>(l)]);
        TensorT<T> z = TensorT<T>::zeros({B, ls.n_out});
        kernels::matmul(cache.acts.back().data(), eff.data(), z.data(), B, ls.n_in, ls.n_out);
        if (ls.has_bias) {
            const TensorT<T>& bias = *view.biases[static_cast<std::size_t>(l)];
            for (i64 i = 0; i < B; ++i) {
                T* row = z.data() + i * ls.n_out;
                for (i64 j = 0; j < ls.n_out; ++j) row[j] += bias[j];
            }
        }
        if (ls.act == Activation::relu) {
            for (T& v : z.values) v = v > T(0) ? v : T(0);
        }
        detail::check_finite(z, l);
        cache.acts.push_back(std::move(z));
    }

    // Stable softmax + cross-entropy; loss accumulated in double.
    const TensorT<T>& logits = cache.acts.back();
    cache.probs = TensorT<T>::zeros({B, C});
    double loss_sum = 0.0;
    for (i64 i = 0; i < B; ++i) {
        const T* row = logits.data() + i * C;
        T mx = row[0];
        for (i64 j = 1; j < C; ++j) mx = std::max(mx, row[j]);
        double denom = 0.0;
        T* prow = cache.probs.data() + i * C;
        for (i64 j = 0; j < C; ++j) {
            prow[j] = std::exp(row[j] - mx);
            denom += static_cast<double>(prow[j]);
        }
        const T inv = static_cast<T>(1.0 / denom);
        for (i64 j = 0; j < C; ++j) prow[j] *= inv;
        loss_sum += std::log(denom) - static_cast<double>(row[labels[static_cast<std::size_t>(i)]] - mx);
    }
    const double loss = loss_sum / static_cast<double>(B);
    if (!std::isfinite(loss)) throw NumericError("non-finite loss");
    return {loss, std::move(cache)};
}

template <typename T>
ForwardResult<T> forward(const NetworkSpec& spec, const std::vector<LayerParams<T>>& params,
                         const std::vector<TensorT<T>>& masks, const TensorT<T>& batch,
                         std::span<const std::uint8_t> labels) {
    return forward(spec, make_view(params, masks), batch, labels);
}

template <typename T>
ForwardResult<T> forward(const NetworkSpec& spec, const std::vector<MaskedTensorT<T>>& layers,
                         const std::vector<TensorT<T>>& biases, const TensorT<T>& batch,
                         std::span<const std::uint8_t> labels) {
    return forward(spec, make_view(layers, biases), batch, labels);
}

// Backpropagates the cached forward pass. With dense_mode=false the weight
// gradients of masked-out positions are zeroed (the normal training step);
// with dense_mode=true gradients are returned for all positions — the
// gradient of the effective weight tensor — which mask updates need to
// score non-active weights.
template <typename T>
std::vector<LayerGrads<T>> backward(const NetworkSpec& spec, const NetView<T>& view,
                                    const ForwardCache<T>& cache, std::span<const std::uint8_t> labels,
                                    bool dense_mode = false) {
    if (cache.acts.size() != view.weights.size() + 1 ||
        cache.batch_size != cache.acts.front().rows() ||
        static_cast<i64>(labels.size()) != cache.batch_size)
        throw ContractViolation("backward: cache does not match network/batch");
    if (params_digest(view) != cache.params_digest)
        throw ContractViolation("backward: stale activation cache");

    const i64 B = cache.batch_size;
    const i64 C = spec.num_classes();
    const i64 L = spec.num_layers();

    // dL/dlogits for mean cross-entropy.
    TensorT<T> delta = cache.probs;
    const T invB = T(1) / static_cast<T>(B);
    for (i64 i = 0; i < B; ++i) {
        T* row = delta.data() + i * C;
        row[labels[static_cast<std::size_t>(i)]] -= T(1);
        for (i64 j = 0; j < C; ++j) row[j] *= invB;
    }

    std::vector<LayerGrads<T>> grads(view.weights.size());
    for (i64 l = L - 1; l >= 0; --l) {
        const auto& ls = spec.layers[static_cast<std::size_t>(l)];
        const auto& input = cache.acts[static_cast<std::size_t>(l)];
        auto& g = grads[static_cast<std::size_t>(l)];

        g.weight = TensorT<T>::zeros({ls.n_in, ls.n_out});
        kernels::matmul_at_b(input.data(), delta.data(), g.weight.data(), B, ls.n_in, ls.n_out);

        if (ls.has_bias) {
            g.bias = TensorT<T>::zeros({ls.n_out});
            // column sums, serial over the batch for a fixed reduction order
            for (i64 i = 0; i < B; ++i) {
                const T* row = delta.data() + i * ls.n_out;
                for (i64 j = 0; j < ls.n_out; ++j) g.bias[j] += row[j];
            }
        }

        if (l > 0) {
            const TensorT<T> eff = detail::masked_weight(*view.weights[static_cast<std::size_t>(l)],
                                                         *view.masks[static_cast<std::size_t>(l)]);
            TensorT<T> eff_t = TensorT<T>::zeros({ls.n_out, ls.n_in});
            kernels::transpose(eff.data(), eff_t.data(), ls.n_in, ls.n_out);
            TensorT<T> dx = TensorT<T>::zeros({B, ls.n_in});
            kernels::matmul(delta.data(), eff_t.data(), dx.data(), B, ls.n_out, ls.n_in);
            // previous layer is ReLU: gate by its post-activation sign
            const auto& prev_out = cache.acts[static_cast<std::size_t>(l)];
            for (i64 i = 0; i < dx.size(); ++i)
                if (!(prev_out[i] > T(0))) dx[i] = T(0);
            delta = std::move(dx);
        }

        if (!dense_mode) {
            const auto& m = *view.masks[static_cast<std::size_t>(l)];
            for (i64 i = 0; i < g.weight.size(); ++i) g.weight[i] *= m[i];
        }
    }
    return grads;
}

template <typename T>
std::vector<LayerGrads<T>> backward(const NetworkSpec& spec, const std::vector<LayerParams<T>>& params,
                                    const std::vector<TensorT<T>>& masks, const ForwardCache<T>& cache,
                                    std::span<const std::uint8_t> labels, bool dense_mode = false) {
    return backward(spec, make_view(params, masks), cache, labels, dense_mode);
}

template <typename T>
std::vector<LayerGrads<T>> backward(const NetworkSpec& spec, const std::vector<MaskedTensorT<T>>& layers,
                                    const std::vector<TensorT<T>>& biases, const ForwardCache<T>& cache,
                                    std::span<const std::uint8_t> labels, bool dense_mode = false) {
    return backward(spec, make_view(layers, biases), cache, labels, dense_mode);
}

// Momentum-SGD state; one velocity buffer per parameter tensor. The velocity
// of a masked-out weight is kept exactly zero so a dropped weight cannot be
// moved by stale momentum when regrown.
template <typename T>
struct OptimizerState {
    std::vector<LayerParams<T>> velocity;
    T momentum = T(0.9);
    T base_lr = T(0.1);

    static OptimizerState init(const NetworkSpec& spec, T momentum, T base_lr) {
        OptimizerState s;
        s.velocity = zero_params<T>(spec);
        s.momentum = momentum;
        s.base_lr = base_lr;
        return s;
    }

    void zero_weight_velocity(std::size_t layer, std::span<const i64> indices) {
        auto& v = velocity.at(layer).weight;
        for (i64 i : indices) v[i] = T(0);
    }
};

namespace detail {

template <typename T>
void sgd_step_one(TensorT<T>& w, TensorT<T>& v, const TensorT<T>& g, const TensorT<T>* mask,
                  T momentum, T lr) {
    if (!w.same_shape(g) || !w.same_shape(v) || (mask && !w.same_shape(*mask)))
        throw ContractViolation("sgd_step: shape mismatch");
    for (i64 i = 0; i < w.size(); ++i) {
        if (mask && (*mask)[i] == T(0)) continue;
        v[i] = momentum * v[i] + g[i];
        w[i] -= lr * v[i];
    }
}

} // namespace detail

// v <- mu*v + g ; w <- w - lr*v, applied only where the mask is 1. Bias
// parameters are never masked.
template <typename T>
void sgd_step(std::vector<LayerParams<T>>& params, const std::vector<LayerGrads<T>>& grads,
              const std::vector<TensorT<T>>& masks, OptimizerState<T>& opt, double lr) {
    if (params.size() != grads.size() || params.size() != masks.size() ||
        params.size() != opt.velocity.size())
        throw ContractViolation("sgd_step: layer count mismatch");
    const T lrt = static_cast<T>(lr);
    for (std::size_t l = 0; l < params.size(); ++l) {
        detail::sgd_step_one(params[l].weight, opt.velocity[l].weight, grads[l].weight, &masks[l],
                             opt.momentum, lrt);
        if (params[l].bias.size() > 0)
            detail::sgd_step_one(params[l].bias, opt.velocity[l].bias, grads[l].bias, static_cast<const TensorT<T>*>(nullptr),
                                 opt.momentum, lrt);
    }
}

template <typename T>
void sgd_step(std::vector<MaskedTensorT<T>>& layers, std::vector<TensorT<T>>& biases,
              const std::vector<LayerGrads<T>>& grads, OptimizerState<T>& opt, double lr) {
    if (layers.size() != grads.size() || layers.size() != biases.size() ||
        layers.size() != opt.velocity.size())
        throw ContractViolation("sgd_step: layer count mismatch");
    const T lrt = static_cast<T>(lr);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        detail::sgd_step_one(layers[l].values, opt.velocity[l].weight, grads[l].weight,
                             &layers[l].mask, opt.momentum, lrt);
        if (biases[l].size() > 0)
            detail::sgd_step_one(biases[l], opt.velocity[l].bias, grads[l].bias, static_cast<const TensorT<T>*>(nullptr),
                                 opt.momentum, lrt);
    }
}

// Cosine-annealed learning rate; clamps to lr_min past t_end.
inline double cosine_lr(i64 t, i64 t_end, double lr0, double lr_min) {
    if (t < 0) throw ContractViolation("cosine_lr: negative iteration");
    if (t_end <= 0) throw ContractViolation("cosine_lr: non-positive t_end");
    if (t > t_end) return lr_min;
    return lr_min + 0.5 * (lr0 - lr_min) *
                        (1.0 + std::cos(M_PI * static_cast<double>(t) / static_cast<double>(t_end)));
}

} // namespace dst
