#pragma once

#include <cstdint>
#include <vector>

#include "dst/dataset.hpp"
#include "dst/metrics.hpp"
#include "dst/network.hpp"
#include "dst/policy.hpp"
#include "dst/rng.hpp"
#include "dst/sparsity.hpp"

namespace dst {

// Training runs in single precision; tests instantiate the templated
// numerics in double where the oracles demand it.
using real_t = float;

struct TrainConfig {
    NetworkSpec net;
    double global_sparsity = 0.9;
    Allocation allocation = Allocation::erk;
    CounterInit counter_init = CounterInit::mask;
    GrowthPolicy policy;
    DropSchedule drop;
    i64 delta_t = 100;
    i64 t_end = 10000;
    i64 total_iterations = 10000; // may exceed t_end: mask updates stop, training continues
    double lr0 = 0.1;
    double lr_min = 0.0;
    double momentum = 0.9;
    i64 batch_size = 128;
    std::uint64_t seed = 1;
    i64 eval_every = 100;
    i64 probe_batch_size = 256; // fixed seeded batch behind loss/gradient metrics
    bool record_rounds = false; // keep per-round drop/grow index logs (tests)

    void validate() const;
};

// Per-round audit trail, kept only when record_rounds is set.
struct RoundLog {
    i64 iteration = 0;
    std::vector<std::vector<i64>> dropped;
    std::vector<std::vector<i64>> grown;
};

struct TrainState {
    i64 iteration = 0; // iterations processed so far
    i64 round = 0;     // completed mask-update rounds (q)
    std::vector<MaskedTensorT<real_t>> layers;
    std::vector<TensorT<real_t>> biases;
    OptimizerState<real_t> opt;
    SparsityPlan plan;
    std::vector<i64> layer_budgets;
    std::vector<MetricsRecord> metrics;
    std::vector<RoundLog> rounds;
    double last_exploitation = 0.0;
};

// Deterministic epoch cycling: batches are consecutive slices of a seeded
// permutation; when fewer than batch_size samples remain the permutation is
// reshuffled and a new epoch starts (the remainder is dropped).
class BatchStream {
public:
    BatchStream(const Dataset& data, i64 batch_size, std::uint64_t seed);
    void next(TensorT<real_t>& x, std::vector<std::uint8_t>& y);
    i64 batch_size() const { return batch_size_; }

private:
    void reshuffle();
    const Dataset* data_;
    i64 batch_size_;
    Rng rng_;
    std::vector<i64> perm_;
    i64 pos_ = 0;
};

// Builds the initial sparse state: the sparsity plan over the weight
// shapes, seeded masked layers, zero biases, fresh optimizer.
TrainState init_state(const TrainConfig& cfg);

// One drop->score->grow->counter round over all layers at iteration t.
// Exposed for tests; train() calls it on schedule.
void mask_update_round(const TrainConfig& cfg, TrainState& state, const TensorT<real_t>& batch,
                       const std::vector<std::uint8_t>& labels, i64 t,
                       const TensorT<real_t>& probe_x, const std::vector<std::uint8_t>& probe_y);

// Top-1 accuracy with the effective (masked) weights; no state mutation.
double evaluate(const NetworkSpec& spec, const std::vector<MaskedTensorT<real_t>>& layers,
                const std::vector<TensorT<real_t>>& biases, const Dataset& data);

// Runs the full training loop: a masked momentum-SGD step with cosine lr
// each iteration, except at t in {delta_t, 2*delta_t, ...} below t_end,
// where a mask-update round replaces the step. Metrics are logged every
// eval_every iterations plus once after the final iteration.
TrainState train(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data);

} // namespace dst
