#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dst/error.hpp"
#include "dst/rng.hpp"
#include "dst/tensor.hpp"

namespace dst {

// One layer's sparse weight state: the weight values, the {0,1} mask, the
// per-element count of mask-update rounds in which the element was active,
// and the ever-active bitmap. Masked-out values are exactly zero at all
// times.
template <typename T>
struct MaskedTensorT {
    TensorT<T> values;
    TensorT<T> mask;
    std::vector<std::uint32_t> counter;
    std::vector<std::uint8_t> ever_active;

    i64 size() const { return values.size(); }

    i64 active_count() const {
        i64 n = 0;
        for (const T m : mask.values) n += (m != T(0));
        return n;
    }

    // Test/debug helper for the documented invariants.
    void check_invariants() const {
        if (!values.same_shape(mask) || counter.size() != values.values.size() ||
            ever_active.size() != values.values.size())
            throw ContractViolation("masked tensor: component shapes disagree");
        for (i64 i = 0; i < size(); ++i) {
            const bool active = mask[i] != T(0);
            if (!active && values[i] != T(0))
                throw ContractViolation("masked tensor: nonzero value at masked-out index " + std::to_string(i));
            if (active && ever_active[static_cast<std::size_t>(i)] == 0)
                throw ContractViolation("masked tensor: active index never marked explored");
        }
    }
};

using MaskedTensorF = MaskedTensorT<float>;
using MaskedTensorD = MaskedTensorT<double>;

enum class Allocation { erk, uniform };

// Per-layer target densities for a global sparsity budget.
struct SparsityPlan {
    std::vector<double> per_layer_density;
    double global_sparsity = 0.0;
    Allocation allocation = Allocation::erk;

    i64 layer_budget(std::size_t l, i64 layer_size) const {
        return static_cast<i64>(std::llround(per_layer_density[l] * static_cast<double>(layer_size)));
    }
};

namespace detail {
inline i64 dims_numel(const std::vector<i64>& dims) {
    i64 n = 1;
    for (i64 d : dims) n *= d;
    return n;
}
} // namespace detail

// ERK allocation. Each layer's raw score is sum(dims)/prod(dims) — for a
// fully connected layer (n_in + n_out)/(n_in * n_out) — and densities are
// proportional to the raw score under one global factor chosen so that the
// total nonzero count meets the budget. Layers whose scaled density exceeds
// 1 are clamped dense and the factor is re-solved over the rest until a
// fixed point.
inline SparsityPlan erk_plan(const std::vector<std::vector<i64>>& layer_dims, double global_sparsity) {
    if (layer_dims.empty()) throw ConfigError("erk_plan: no layers");
    if (!(global_sparsity >= 0.0 && global_sparsity < 1.0))
        throw ConfigError("erk_plan: global sparsity must be in [0,1)");

    const std::size_t L = layer_dims.size();
    std::vector<double> raw(L), size(L);
    double total = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        const i64 n = detail::dims_numel(layer_dims[l]);
        if (n <= 0) throw ConfigError("erk_plan: non-positive layer size");
        size[l] = static_cast<double>(n);
        const double s = static_cast<double>(std::accumulate(layer_dims[l].begin(), layer_dims[l].end(), i64(0)));
        raw[l] = s / static_cast<double>(n);
        total += size[l];
    }
    const double budget = (1.0 - global_sparsity) * total;

    std::vector<double> density(L, 0.0);
    std::vector<bool> clamped(L, false);
    while (true) {
        double denom = 0.0, clamped_size = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            if (clamped[l]) clamped_size += size[l];
            else denom += raw[l] * size[l];
        }
        const double remaining = budget - clamped_size;
        if (denom == 0.0) {
            if (remaining > 0.5) // all layers dense and budget still unmet
                throw ConfigError("erk_plan: budget infeasible, all layers clamped dense");
            break;
        }
        const double factor = remaining / denom;
        bool changed = false;
        for (std::size_t l = 0; l < L; ++l) {
            if (clamped[l]) continue;
            density[l] = factor * raw[l];
            if (density[l] > 1.0) {
                clamped[l] = true;
                changed = true;
            }
        }
        if (!changed) break;
    }
    for (std::size_t l = 0; l < L; ++l)
        if (clamped[l]) density[l] = 1.0;

    SparsityPlan plan;
    plan.per_layer_density = std::move(density);
    plan.global_sparsity = global_sparsity;
    plan.allocation = Allocation::erk;
    return plan;
}

inline SparsityPlan uniform_plan(std::size_t num_layers, double global_sparsity) {
    if (!(global_sparsity >= 0.0 && global_sparsity < 1.0))
        throw ConfigError("uniform_plan: global sparsity must be in [0,1)");
    SparsityPlan plan;
    plan.per_layer_density.assign(num_layers, 1.0 - global_sparsity);
    plan.global_sparsity = global_sparsity;
    plan.allocation = Allocation::uniform;
    return plan;
}

enum class CounterInit { mask, zeros };

// Fresh sparse layer: exactly round(density*size) active positions chosen
// uniformly from the seeded stream; values drawn from the dense initializer
// (Kaiming-uniform, fan-in) and then zeroed outside the mask. The counter
// and the ever-active bitmap start equal to the initial mask (counter
// optionally starts at zero).
template <typename T>
MaskedTensorT<T> init_masked(const std::vector<i64>& shape, double density, std::uint64_t seed,
                             CounterInit counter_init = CounterInit::mask) {
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("init_masked: density must be in (0,1]");
    MaskedTensorT<T> out;
    out.values = TensorT<T>::zeros(shape);
    out.mask = TensorT<T>::zeros(shape);
    const i64 n = out.values.size();
    out.counter.assign(static_cast<std::size_t>(n), 0);
    out.ever_active.assign(static_cast<std::size_t>(n), 0);

    Rng rng(seed);
    // dense Kaiming-uniform draw, fan_in = rows for a [n_in, n_out] weight
    const double fan_in = static_cast<double>(shape.front());
    const double bound = std::sqrt(6.0 / fan_in);
    for (i64 i = 0; i < n; ++i) out.values[i] = static_cast<T>(rng.next_uniform(-bound, bound));

    const i64 k = static_cast<i64>(std::llround(density * static_cast<double>(n)));
    // partial Fisher-Yates: first k entries of a shuffled index array
    std::vector<i64> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), i64(0));
    for (i64 i = 0; i < k; ++i) {
        const i64 j = i + static_cast<i64>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    for (i64 i = 0; i < k; ++i) {
        const i64 p = idx[static_cast<std::size_t>(i)];
        out.mask[p] = T(1);
        out.ever_active[static_cast<std::size_t>(p)] = 1;
        if (counter_init == CounterInit::mask) out.counter[static_cast<std::size_t>(p)] = 1;
    }
    for (i64 i = 0; i < n; ++i)
        if (out.mask[i] == T(0)) out.values[i] = T(0);
    return out;
}

// Deactivates the k active positions with smallest |value| (ties broken by
// lowest flat index): mask and value go to zero. Returns the dropped
// indices in ascending order; the caller zeroes the matching momentum.
template <typename T>
std::vector<i64> drop_smallest(MaskedTensorT<T>& layer, i64 k) {
    if (k < 0) throw ContractViolation("drop_smallest: negative k");
    if (k == 0) return {};
    std::vector<i64> active;
    active.reserve(static_cast<std::size_t>(layer.size()));
    for (i64 i = 0; i < layer.size(); ++i)
        if (layer.mask[i] != T(0)) active.push_back(i);
    if (k > static_cast<i64>(active.size()))
        throw ContractViolation("drop_smallest: k=" + std::to_string(k) + " exceeds active count " +
                                std::to_string(active.size()));

    auto closer_to_zero = [&layer](i64 a, i64 b) {
        const T ma = std::abs(layer.values[a]);
        const T mb = std::abs(layer.values[b]);
        if (ma != mb) return ma < mb;
        return a < b;
    };
    std::nth_element(active.begin(), active.begin() + (k - 1), active.end(), closer_to_zero);
    std::vector<i64> dropped(active.begin(), active.begin() + k);
    std::sort(dropped.begin(), dropped.end());
    for (i64 i : dropped) {
        layer.mask[i] = T(0);
        layer.values[i] = T(0);
    }
    return dropped;
}

// Activates the given currently-masked-out positions with value zero, so
// the network function is unchanged at the growth instant.
template <typename T>
void grow(MaskedTensorT<T>& layer, std::span<const i64> indices) {
    for (i64 i : indices) {
        if (i < 0 || i >= layer.size()) throw ContractViolation("grow: index out of range");
        if (layer.mask[i] != T(0)) throw ContractViolation("grow: index " + std::to_string(i) + " already active");
    }
    for (i64 i : indices) {
        layer.mask[i] = T(1);
        layer.values[i] = T(0);
        layer.ever_active[static_cast<std::size_t>(i)] = 1;
    }
}

// counter += mask, called once at the end of each mask-update round.
template <typename T>
void update_counter(MaskedTensorT<T>& layer) {
    for (i64 i = 0; i < layer.size(); ++i)
        if (layer.mask[i] != T(0)) ++layer.counter[static_cast<std::size_t>(i)];
}

} // namespace dst
