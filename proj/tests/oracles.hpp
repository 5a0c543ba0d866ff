#pragma once

// Independent reference implementations used as test oracles. These must
// stay structurally separate from the library code paths they check: the
// forward pass is per-sample loops with no shared kernels, the ERK solver
// uses bisection instead of the library's fixed-point iteration.

#include <cmath>
#include <cstdint>
#include <vector>

#include "dst/network.hpp"
#include "dst/rng.hpp"
#include "dst/tensor.hpp"

namespace oracle {

using dst::i64;

// Mean softmax cross-entropy of a ReLU MLP (identity final layer), computed
// sample by sample in double.
inline double reference_loss(const std::vector<dst::TensorD>& weights,
                             const std::vector<dst::TensorD>& masks,
                             const std::vector<dst::TensorD>& biases, const dst::TensorD& batch,
                             const std::vector<std::uint8_t>& labels) {
    const i64 B = batch.rows();
    const std::size_t L = weights.size();
    double total = 0.0;
    for (i64 s = 0; s < B; ++s) {
        std::vector<double> x(batch.data() + s * batch.cols(), batch.data() + (s + 1) * batch.cols());
        for (std::size_t l = 0; l < L; ++l) {
            const i64 n_in = weights[l].rows();
            const i64 n_out = weights[l].cols();
            std::vector<double> y(static_cast<std::size_t>(n_out), 0.0);
            for (i64 j = 0; j < n_out; ++j) {
                double acc = biases[l].size() > 0 ? biases[l][j] : 0.0;
                for (i64 i = 0; i < n_in; ++i)
                    acc += x[static_cast<std::size_t>(i)] * weights[l].at(i, j) * masks[l].at(i, j);
                y[static_cast<std::size_t>(j)] = acc;
            }
            if (l + 1 < L)
                for (double& v : y) v = v > 0.0 ? v : 0.0;
            x = std::move(y);
        }
        double mx = x[0];
        for (double v : x) mx = std::max(mx, v);
        double denom = 0.0;
        for (double v : x) denom += std::exp(v - mx);
        total += std::log(denom) - (x[labels[static_cast<std::size_t>(s)]] - mx);
    }
    return total / static_cast<double>(B);
}

// Central finite differences of the reference loss with respect to each
// weight entry (the perturbation passes through the mask, so masked-out
// entries have derivative zero).
inline std::vector<dst::TensorD> fd_weight_grads(std::vector<dst::TensorD> weights,
                                                 const std::vector<dst::TensorD>& masks,
                                                 const std::vector<dst::TensorD>& biases,
                                                 const dst::TensorD& batch,
                                                 const std::vector<std::uint8_t>& labels,
                                                 double h = 1e-5) {
    std::vector<dst::TensorD> grads;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        dst::TensorD g = dst::TensorD::zeros(weights[l].shape);
        for (i64 i = 0; i < g.size(); ++i) {
            const double keep = weights[l][i];
            weights[l][i] = keep + h;
            const double up = reference_loss(weights, masks, biases, batch, labels);
            weights[l][i] = keep - h;
            const double dn = reference_loss(weights, masks, biases, batch, labels);
            weights[l][i] = keep;
            g[i] = (up - dn) / (2.0 * h);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// ERK densities by bisection on the global scale factor f, solving
// sum_l min(1, f*raw_l)*size_l = (1-S)*sum_l size_l.
inline std::vector<double> erk_densities(const std::vector<std::vector<i64>>& layer_dims,
                                         double global_sparsity) {
    const std::size_t L = layer_dims.size();
    std::vector<double> raw(L), size(L);
    double total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        double prod = 1.0, sum = 0.0;
        for (i64 d : layer_dims[l]) {
            prod *= static_cast<double>(d);
            sum += static_cast<double>(d);
        }
        raw[l] = sum / prod;
        size[l] = prod;
        total += prod;
    }
    const double budget = (1.0 - global_sparsity) * total;
    auto nnz_at = [&](double f) {
        double acc = 0.0;
        for (std::size_t l = 0; l < L; ++l) acc += std::min(1.0, f * raw[l]) * size[l];
        return acc;
    };
    double lo = 0.0, hi = 1.0;
    while (nnz_at(hi) < budget) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (nnz_at(mid) < budget ? lo : hi) = mid;
    }
    const double f = 0.5 * (lo + hi);
    std::vector<double> density(L);
    for (std::size_t l = 0; l < L; ++l) density[l] = std::min(1.0, f * raw[l]);
    return density;
}

// Small random double-precision net for gradient checks.
struct RandomNet {
    dst::NetworkSpec spec;
    std::vector<dst::LayerParams<double>> params;
    std::vector<dst::TensorD> masks;
    dst::TensorD batch;
    std::vector<std::uint8_t> labels;
};

inline RandomNet make_random_net(const std::vector<i64>& widths, i64 batch, std::uint64_t seed,
                                 double mask_density = 1.0, bool bias = true) {
    RandomNet net;
    net.spec = dst::NetworkSpec::mlp(widths, bias);
    dst::Rng rng(seed);
    for (const auto& ls : net.spec.layers) {
        dst::LayerParams<double> p;
        p.weight = dst::TensorD::zeros({ls.n_in, ls.n_out});
        for (i64 i = 0; i < p.weight.size(); ++i) p.weight[i] = rng.next_uniform(-0.8, 0.8);
        if (bias) {
            p.bias = dst::TensorD::zeros({ls.n_out});
            for (i64 i = 0; i < p.bias.size(); ++i) p.bias[i] = rng.next_uniform(-0.2, 0.2);
        }
        dst::TensorD m = dst::TensorD::full({ls.n_in, ls.n_out}, 1.0);
        if (mask_density < 1.0) {
            for (i64 i = 0; i < m.size(); ++i)
                if (rng.next_double() >= mask_density) {
                    m[i] = 0.0;
                    p.weight[i] = 0.0;
                }
        }
        net.params.push_back(std::move(p));
        net.masks.push_back(std::move(m));
    }
    net.batch = dst::TensorD::zeros({batch, widths.front()});
    for (i64 i = 0; i < net.batch.size(); ++i) net.batch[i] = rng.next_uniform(-1.0, 1.0);
    net.labels.resize(static_cast<std::size_t>(batch));
    for (auto& y : net.labels)
        y = static_cast<std::uint8_t>(rng.next_below(static_cast<std::uint64_t>(widths.back())));
    return net;
}

inline std::vector<dst::TensorD> bias_list(const std::vector<dst::LayerParams<double>>& params) {
    std::vector<dst::TensorD> out;
    for (const auto& p : params) out.push_back(p.bias); // empty tensor when absent
    return out;
}

inline std::vector<dst::TensorD> weight_list(const std::vector<dst::LayerParams<double>>& params) {
    std::vector<dst::TensorD> out;
    for (const auto& p : params) out.push_back(p.weight);
    return out;
}

} // namespace oracle
