#include "dst/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dst/error.hpp"

namespace dst {

void TrainConfig::validate() const {
    net.validate();
    policy.validate();
    if (!(global_sparsity >= 0.0 && global_sparsity < 1.0))
        throw ConfigError("train: global_sparsity must be in [0,1)");
    if (delta_t <= 0) throw ConfigError("train: delta_t must be positive");
    if (!(delta_t <= t_end && t_end <= total_iterations))
        throw ConfigError("train: need delta_t <= t_end <= total_iterations");
    if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
    if (eval_every < 1) throw ConfigError("train: eval_every must be at least 1");
    if (probe_batch_size < 1) throw ConfigError("train: probe_batch_size must be at least 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0,1)");
    if (lr0 < 0.0 || lr_min < 0.0 || lr0 < lr_min) throw ConfigError("train: bad learning rates");
    if (!(drop.initial_fraction > 0.0 && drop.initial_fraction < 1.0))
        throw ConfigError("train: drop fraction must be in (0,1)");
}

BatchStream::BatchStream(const Dataset& data, i64 batch_size, std::uint64_t seed)
    : data_(&data), batch_size_(std::min<i64>(batch_size, data.size())), rng_(seed) {
    if (data.size() <= 0) throw ConfigError("batch stream: empty dataset");
    perm_.resize(static_cast<std::size_t>(data.size()));
    std::iota(perm_.begin(), perm_.end(), i64(0));
    reshuffle();
}

void BatchStream::reshuffle() {
    const i64 n = static_cast<i64>(perm_.size());
    for (i64 i = 0; i < n - 1; ++i) {
        const i64 j = i + static_cast<i64>(rng_.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(perm_[static_cast<std::size_t>(i)], perm_[static_cast<std::size_t>(j)]);
    }
    pos_ = 0;
}

void BatchStream::next(TensorT<real_t>& x, std::vector<std::uint8_t>& y) {
    if (pos_ + batch_size_ > static_cast<i64>(perm_.size())) reshuffle();
    const i64 d = data_->dim;
    if (x.shape != std::vector<i64>{batch_size_, d}) x = TensorT<real_t>::zeros({batch_size_, d});
    y.resize(static_cast<std::size_t>(batch_size_));
    for (i64 i = 0; i < batch_size_; ++i) {
        const i64 src = perm_[static_cast<std::size_t>(pos_ + i)];
        std::copy_n(data_->images.data() + src * d, d, x.data() + i * d);
        y[static_cast<std::size_t>(i)] = data_->labels[static_cast<std::size_t>(src)];
    }
    pos_ += batch_size_;
}

TrainState init_state(const TrainConfig& cfg) {
    cfg.validate();
    TrainState state;
    state.plan = cfg.allocation == Allocation::erk
                     ? erk_plan(cfg.net.weight_dims(), cfg.global_sparsity)
                     : uniform_plan(cfg.net.layers.size(), cfg.global_sparsity);
    for (std::size_t l = 0; l < cfg.net.layers.size(); ++l) {
        const auto& ls = cfg.net.layers[l];
        state.layers.push_back(init_masked<real_t>({ls.n_in, ls.n_out}, state.plan.per_layer_density[l],
                                                   stream_seed(cfg.seed, "init", l), cfg.counter_init));
        state.biases.push_back(ls.has_bias ? TensorT<real_t>::zeros({ls.n_out}) : TensorT<real_t>{});
        state.layer_budgets.push_back(state.layers.back().active_count());
    }
    state.opt = OptimizerState<real_t>::init(cfg.net, static_cast<real_t>(cfg.momentum),
                                             static_cast<real_t>(cfg.lr0));
    return state;
}

void mask_update_round(const TrainConfig& cfg, TrainState& state, const TensorT<real_t>& batch,
                       const std::vector<std::uint8_t>& labels, i64 t,
                       const TensorT<real_t>& probe_x, const std::vector<std::uint8_t>& probe_y) {
    const std::size_t L = state.layers.size();
    const double fraction = drop_fraction(t, cfg.drop);

    // Drop first, all layers: k_i = ceil(fraction * active_i), clamped to
    // the layer's non-active count.
    std::vector<i64> ks(L, 0);
    std::vector<std::vector<i64>> dropped(L);
    for (std::size_t l = 0; l < L; ++l) {
        auto& layer = state.layers[l];
        const i64 active = layer.active_count();
        const i64 zeros = layer.size() - active;
        ks[l] = std::min(drop_count(fraction, active), zeros);
        dropped[l] = drop_smallest(layer, ks[l]);
        state.opt.zero_weight_velocity(l, dropped[l]);
    }

    // One dense backward on the round's batch, after the drop, so freshly
    // dropped positions are score-eligible.
    auto fwd = forward(cfg.net, state.layers, state.biases, batch, labels);
    auto grads = backward(cfg.net, state.layers, state.biases, fwd.cache, labels, /*dense_mode=*/true);

    std::vector<std::vector<i64>> grown(L);
    for (std::size_t l = 0; l < L; ++l) {
        auto& layer = state.layers[l];
        switch (cfg.policy.kind) {
            case GrowthPolicy::Kind::random:
                grown[l] = random_growth(layer.mask, ks[l],
                                         stream_seed(cfg.seed, "policy", l, static_cast<std::uint64_t>(state.round)));
                break;
            case GrowthPolicy::Kind::gradient:
                grown[l] = gradient_growth(grads[l].weight, layer.mask, ks[l], static_cast<i64>(l));
                break;
            case GrowthPolicy::Kind::acquisition_ee: {
                const TensorD scores =
                    acquisition_scores(grads[l].weight, layer.counter, static_cast<double>(t), cfg.policy.c,
                                       cfg.policy.epsilon, cfg.policy.signed_scores, static_cast<i64>(l));
                grown[l] = select_growth(scores, layer.mask, ks[l]);
                break;
            }
        }
        grow(layer, grown[l]);
    }
    for (auto& layer : state.layers) update_counter(layer);
    state.round += 1;

    // Degree-of-exploitation bookkeeping: probe each grown weight at the
    // value one SGD step would give it, on the fixed probe batch.
    const double lr = cosine_lr(t, cfg.total_iterations, cfg.lr0, cfg.lr_min);
    std::vector<std::vector<real_t>> probes(L);
    for (std::size_t l = 0; l < L; ++l)
        for (i64 i : grown[l])
            probes[l].push_back(static_cast<real_t>(-lr) * grads[l].weight[i]);
    state.last_exploitation =
        exploitation_degree(cfg.net, state.layers, state.biases, probe_x, probe_y, grown, probes);

    if (cfg.record_rounds) state.rounds.push_back({t, std::move(dropped), std::move(grown)});
}

double evaluate(const NetworkSpec& spec, const std::vector<MaskedTensorT<real_t>>& layers,
                const std::vector<TensorT<real_t>>& biases, const Dataset& data) {
    if (data.size() <= 0) throw ConfigError("evaluate: empty dataset");
    const i64 chunk = 512;
    i64 correct = 0;
    const i64 C = spec.num_classes();
    for (i64 start = 0; start < data.size(); start += chunk) {
        const i64 b = std::min(chunk, data.size() - start);
        TensorT<real_t> x = TensorT<real_t>::zeros({b, data.dim});
        std::copy_n(data.images.data() + start * data.dim, b * data.dim, x.data());
        std::vector<std::uint8_t> y(data.labels.begin() + start, data.labels.begin() + start + b);
        const auto fwd = forward(spec, layers, biases, x, y);
        const auto& logits = fwd.cache.acts.back();
        for (i64 i = 0; i < b; ++i) {
            const real_t* row = logits.data() + i * C;
            i64 best = 0;
            for (i64 j = 1; j < C; ++j)
                if (row[j] > row[best]) best = j;
            correct += (best == static_cast<i64>(y[static_cast<std::size_t>(i)]));
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

MetricsRecord snapshot(const TrainConfig& cfg, TrainState& state, i64 iteration,
                       const TensorT<real_t>& probe_x, const std::vector<std::uint8_t>& probe_y,
                       const Dataset& test_data) {
    MetricsRecord rec;
    rec.iteration = iteration;
    rec.round = state.round;
    rec.exploitation_degree = state.last_exploitation;
    rec.exploration_rate = exploration_rate(state.layers);

    auto fwd = forward(cfg.net, state.layers, state.biases, probe_x, probe_y);
    rec.train_loss = fwd.loss;
    const auto grads = backward(cfg.net, state.layers, state.biases, fwd.cache, probe_y, false);
    double gsq = 0.0;
    for (const auto& g : grads)
        for (const real_t v : g.weight.values) gsq += static_cast<double>(v) * static_cast<double>(v);
    rec.grad_norm_sq = gsq;

    rec.test_accuracy = test_data.size() > 0 ? evaluate(cfg.net, state.layers, state.biases, test_data) : 0.0;

    double nnz = 0.0, total = 0.0;
    for (const auto& layer : state.layers) {
        const double a = static_cast<double>(layer.active_count());
        const double s = static_cast<double>(layer.size());
        rec.per_layer_sparsity.push_back(1.0 - a / s);
        nnz += a;
        total += s;
    }
    rec.global_sparsity = 1.0 - nnz / total;
    return rec;
}

} // namespace

TrainState train(const TrainConfig& cfg, const Dataset& train_data, const Dataset& test_data) {
    cfg.validate();
    if (train_data.size() <= 0) throw ConfigError("train: empty dataset");
    TrainState state = init_state(cfg);

    BatchStream stream(train_data, cfg.batch_size, stream_seed(cfg.seed, "data"));

    // Fixed probe batch for loss/gradient metrics, seeded independently of
    // the data order.
    const i64 pb = std::min<i64>(cfg.probe_batch_size, train_data.size());
    TensorT<real_t> probe_x = TensorT<real_t>::zeros({pb, train_data.dim});
    std::vector<std::uint8_t> probe_y(static_cast<std::size_t>(pb));
    {
        Rng prng(stream_seed(cfg.seed, "probe"));
        std::vector<i64> idx(static_cast<std::size_t>(train_data.size()));
        std::iota(idx.begin(), idx.end(), i64(0));
        for (i64 i = 0; i < pb; ++i) {
            const i64 j = i + static_cast<i64>(prng.next_below(static_cast<std::uint64_t>(train_data.size() - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        for (i64 i = 0; i < pb; ++i) {
            const i64 src = idx[static_cast<std::size_t>(i)];
            std::copy_n(train_data.images.data() + src * train_data.dim, train_data.dim,
                        probe_x.data() + i * train_data.dim);
            probe_y[static_cast<std::size_t>(i)] = train_data.labels[static_cast<std::size_t>(src)];
        }
    }

    TensorT<real_t> x;
    std::vector<std::uint8_t> y;
    try {
        for (i64 t = 0; t < cfg.total_iterations; ++t) {
            if (t % cfg.eval_every == 0)
                state.metrics.push_back(snapshot(cfg, state, t, probe_x, probe_y, test_data));
            stream.next(x, y);
            if (t % cfg.delta_t == 0 && t > 0 && t < cfg.t_end) {
                mask_update_round(cfg, state, x, y, t, probe_x, probe_y);
            } else {
                auto fwd = forward(cfg.net, state.layers, state.biases, x, y);
                const auto grads = backward(cfg.net, state.layers, state.biases, fwd.cache, y, false);
                sgd_step(state.layers, state.biases, grads, state.opt, cosine_lr(t, cfg.total_iterations, cfg.lr0, cfg.lr_min));
            }
            state.iteration = t + 1;
        }
    } catch (const NumericError& e) {
        throw NumericError("aborted at iteration " + std::to_string(state.iteration) + ": " + e.what());
    }
    state.metrics.push_back(snapshot(cfg, state, cfg.total_iterations, probe_x, probe_y, test_data));
    return state;
}

} // namespace dst
