#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dst/error.hpp"
#include "dst/network.hpp"
#include "dst/sparsity.hpp"

namespace dst {

// One evaluation snapshot of a run.
struct MetricsRecord {
    i64 iteration = 0;
    i64 round = 0;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    double exploration_rate = 0.0;
    double exploitation_degree = 0.0;
    double grad_norm_sq = 0.0;
    double global_sparsity = 0.0;
    std::vector<double> per_layer_sparsity;
};

// Fraction of all weight positions that have ever been active.
template <typename T>
double exploration_rate(std::span<const MaskedTensorT<T>> layers) {
    double explored = 0.0, total = 0.0;
    for (const auto& l : layers) {
        total += static_cast<double>(l.size());
        for (const std::uint8_t b : l.ever_active) explored += b;
    }
    return total > 0.0 ? explored / total : 0.0;
}

template <typename T>
double exploration_rate(const std::vector<MaskedTensorT<T>>& layers) {
    return exploration_rate(std::span<const MaskedTensorT<T>>(layers));
}

// Loss reduction attributable to a growth decision: evaluates the batch loss
// as-is (grown weights sit at zero) and once more with the grown positions
// set to the probe values, then restores the zeros. Positive means the
// growth reduced the loss. State is restored bit-exactly.
template <typename T>
double exploitation_degree(const NetworkSpec& spec, std::vector<MaskedTensorT<T>>& layers,
                           const std::vector<TensorT<T>>& biases, const TensorT<T>& batch,
                           std::span<const std::uint8_t> labels,
                           const std::vector<std::vector<i64>>& grown,
                           const std::vector<std::vector<T>>& probe_values) {
    if (grown.size() != layers.size() || probe_values.size() != layers.size())
        throw ContractViolation("exploitation_degree: per-layer list size mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (grown[l].size() != probe_values[l].size())
            throw ContractViolation("exploitation_degree: probe/grown length mismatch in layer " +
                                    std::to_string(l));
        for (i64 i : grown[l]) {
            if (i < 0 || i >= layers[l].size())
                throw ContractViolation("exploitation_degree: index out of range");
            if (layers[l].mask[i] == T(0) || layers[l].values[i] != T(0))
                throw ContractViolation("exploitation_degree: grown index must be active with value 0");
        }
    }

    const double loss_before = forward(spec, layers, biases, batch, labels).loss;
    for (std::size_t l = 0; l < layers.size(); ++l)
        for (std::size_t j = 0; j < grown[l].size(); ++j)
            layers[l].values[grown[l][j]] = probe_values[l][j];
    const double loss_after = forward(spec, layers, biases, batch, labels).loss;
    for (std::size_t l = 0; l < layers.size(); ++l)
        for (i64 i : grown[l]) layers[l].values[i] = T(0);
    return loss_before - loss_after;
}

struct ConvergenceSummary {
    double first_decile_mean = 0.0;
    double last_decile_mean = 0.0;
    double min_grad_norm_sq = 0.0;
};

// Means of grad_norm_sq over the first and last 10% of records plus the
// running minimum; a directional stationarity diagnostic.
inline ConvergenceSummary convergence_series(std::span<const MetricsRecord> records) {
    const std::size_t n = records.size();
    if (n < 20) throw ContractViolation("convergence_series: need at least 20 records, got " +
                                        std::to_string(n));
    const std::size_t dec = n / 10;
    ConvergenceSummary out;
    double first = 0.0, last = 0.0, mn = records[0].grad_norm_sq;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < dec) first += records[i].grad_norm_sq;
        if (i >= n - dec) last += records[i].grad_norm_sq;
        mn = std::min(mn, records[i].grad_norm_sq);
    }
    out.first_decile_mean = first / static_cast<double>(dec);
    out.last_decile_mean = last / static_cast<double>(dec);
    out.min_grad_norm_sq = mn;
    return out;
}

inline ConvergenceSummary convergence_series(const std::vector<MetricsRecord>& records) {
    return convergence_series(std::span<const MetricsRecord>(records));
}

} // namespace dst
