#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dst/error.hpp"
#include "dst/rng.hpp"
#include "dst/tensor.hpp"

namespace dst {

// Which non-active weights get grown at a mask update.
struct GrowthPolicy {
    enum class Kind { random, gradient, acquisition_ee };
    Kind kind = Kind::acquisition_ee;
    double c = 0.1;         // exploration/exploitation tradeoff coefficient
    double epsilon = 1.0;   // keeps the visit-count denominator nonzero
    bool signed_scores = false; // use the raw gradient instead of |gradient|

    void validate() const {
        if (epsilon <= 0.0) throw ConfigError("policy: epsilon must be positive");
        if (c < 0.0) throw ConfigError("policy: c must be non-negative");
    }
};

// Fraction of active weights dropped per update round; k_i = ceil(fraction *
// active_i) per layer.
struct DropSchedule {
    enum class Mode { constant, cosine };
    Mode mode = Mode::cosine;
    double initial_fraction = 0.3;
    i64 stop_iteration = 0; // no drops at or beyond this iteration

    void validate() const {
        if (!(initial_fraction > 0.0 && initial_fraction < 1.0))
            throw ConfigError("drop schedule: initial fraction must be in (0,1)");
        if (stop_iteration <= 0) throw ConfigError("drop schedule: stop iteration must be positive");
    }
};

inline double drop_fraction(i64 t, const DropSchedule& s) {
    if (t < 0) throw ContractViolation("drop_fraction: negative iteration");
    if (t >= s.stop_iteration) return 0.0;
    if (s.mode == DropSchedule::Mode::constant) return s.initial_fraction;
    return 0.5 * s.initial_fraction *
           (1.0 + std::cos(M_PI * static_cast<double>(t) / static_cast<double>(s.stop_iteration)));
}

inline i64 drop_count(double fraction, i64 active) {
    if (fraction <= 0.0 || active <= 0) return 0;
    return std::min<i64>(active, static_cast<i64>(std::ceil(fraction * static_cast<double>(active))));
}

// Importance scores for growth: |grad| plus the visit-count exploration
// bonus c*ln(t)/(counter + epsilon). Scores are computed in double so that
// adding the bonus never reorders positions with equal counters. ln is
// guarded with max(t,2) so the bonus stays positive for tiny t.
template <typename T>
TensorD acquisition_scores(const TensorT<T>& dense_grad, const std::vector<std::uint32_t>& counter,
                           double t, double c, double epsilon, bool signed_scores = false,
                           i64 layer_id = -1) {
    if (counter.size() != dense_grad.values.size())
        throw ContractViolation("acquisition_scores: counter size mismatch");
    if (epsilon <= 0.0) throw ConfigError("acquisition_scores: epsilon must be positive");
    if (c < 0.0) throw ConfigError("acquisition_scores: c must be non-negative");
    for (const T g : dense_grad.values)
        if (!std::isfinite(g))
            throw NumericError("acquisition_scores: non-finite gradient in layer " + std::to_string(layer_id));

    const double bonus_num = c * std::log(std::max(t, 2.0));
    TensorD scores = TensorD::zeros(dense_grad.shape);
    for (i64 i = 0; i < scores.size(); ++i) {
        const double g = static_cast<double>(dense_grad[i]);
        const double exploit = signed_scores ? g : std::abs(g);
        scores[i] = exploit + bonus_num / (static_cast<double>(counter[static_cast<std::size_t>(i)]) + epsilon);
    }
    return scores;
}

// The k non-active positions with the largest score; ties broken by lowest
// flat index.
template <typename T>
std::vector<i64> select_growth(const TensorD& scores, const TensorT<T>& mask, i64 k) {
    if (scores.size() != mask.size()) throw ContractViolation("select_growth: shape mismatch");
    if (k < 0) throw ContractViolation("select_growth: negative k");
    std::vector<i64> candidates;
    candidates.reserve(static_cast<std::size_t>(mask.size()));
    for (i64 i = 0; i < mask.size(); ++i)
        if (mask[i] == T(0)) candidates.push_back(i);
    if (k > static_cast<i64>(candidates.size()))
        throw ContractViolation("select_growth: k=" + std::to_string(k) + " exceeds non-active count " +
                                std::to_string(candidates.size()));
    if (k == 0) return {};

    auto higher_score = [&scores](i64 a, i64 b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    std::nth_element(candidates.begin(), candidates.begin() + (k - 1), candidates.end(), higher_score);
    std::vector<i64> out(candidates.begin(), candidates.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

// k uniform picks without replacement among non-active positions.
template <typename T>
std::vector<i64> random_growth(const TensorT<T>& mask, i64 k, std::uint64_t seed) {
    if (k < 0) throw ContractViolation("random_growth: negative k");
    std::vector<i64> candidates;
    for (i64 i = 0; i < mask.size(); ++i)
        if (mask[i] == T(0)) candidates.push_back(i);
    if (k > static_cast<i64>(candidates.size()))
        throw ContractViolation("random_growth: k=" + std::to_string(k) + " exceeds non-active count " +
                                std::to_string(candidates.size()));
    Rng rng(seed);
    const i64 n = static_cast<i64>(candidates.size());
    for (i64 i = 0; i < k; ++i) {
        const i64 j = i + static_cast<i64>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
    }
    std::vector<i64> out(candidates.begin(), candidates.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

// Top-k |gradient| growth.
template <typename T>
std::vector<i64> gradient_growth(const TensorT<T>& dense_grad, const TensorT<T>& mask, i64 k,
                                 i64 layer_id = -1) {
    TensorD scores = acquisition_scores(dense_grad, std::vector<std::uint32_t>(dense_grad.values.size(), 0),
                                        2.0, 0.0, 1.0, false, layer_id);
    return select_growth(scores, mask, k);
}

} // namespace dst
