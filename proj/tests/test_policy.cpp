#include <doctest.h>

#include <cmath>

#include "dst/policy.hpp"
#include "dst/rng.hpp"

using namespace dst;

namespace {

TensorD random_grad(i64 n, std::uint64_t seed) {
    Rng rng(seed);
    TensorD g = TensorD::zeros({1, n});
    for (i64 i = 0; i < n; ++i) g[i] = rng.next_uniform(-1.0, 1.0);
    return g;
}

TensorD random_mask(i64 n, double density, std::uint64_t seed) {
    Rng rng(seed);
    TensorD m = TensorD::zeros({1, n});
    for (i64 i = 0; i < n; ++i) m[i] = rng.next_double() < density ? 1.0 : 0.0;
    return m;
}

} // namespace

TEST_CASE("acquisition score arithmetic") {
    // grad 0.5, counter 0, eps 1, c 2, t = e so ln t = 1 -> 0.5 + 2 = 2.5
    TensorD grad({1, 1}, {0.5});
    const auto s = acquisition_scores(grad, {0}, std::exp(1.0), 2.0, 1.0);
    CHECK(s[0] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("acquisition with c = 0 is exactly |grad|") {
    const auto grad = random_grad(64, 5);
    const auto s = acquisition_scores(grad, std::vector<std::uint32_t>(64, 3), 1000.0, 0.0, 1.0);
    for (i64 i = 0; i < 64; ++i) CHECK(s[i] == std::abs(grad[i]));
}

TEST_CASE("never-explored positions outscore explored ones 10x in the spec example") {
    TensorD grad({1, 2}, {0.0, 0.0});
    const auto s = acquisition_scores(grad, {0, 9}, std::exp(1.0), 1.0, 1.0);
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("acquisition rejects non-finite gradients with the layer id") {
    TensorD grad({1, 2}, {0.5, std::nan("")});
    try {
        acquisition_scores(grad, {0, 0}, 10.0, 1.0, 1.0, false, 7);
        CHECK(false);
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("layer 7") != std::string::npos);
    }
}

TEST_CASE("scores are non-negative, strictly positive when c > 0") {
    const auto grad = random_grad(128, 9);
    const auto s0 = acquisition_scores(grad, std::vector<std::uint32_t>(128, 2), 500.0, 0.0, 1.0);
    const auto s1 = acquisition_scores(grad, std::vector<std::uint32_t>(128, 2), 500.0, 0.5, 1.0);
    for (i64 i = 0; i < 128; ++i) {
        CHECK(s0[i] >= 0.0);
        CHECK(s1[i] > 0.0);
    }
}

TEST_CASE("signed scores variant keeps the raw gradient") {
    TensorD grad({1, 2}, {-0.7, 0.2});
    const auto s = acquisition_scores(grad, {0, 0}, std::exp(1.0), 1.0, 1.0, true);
    CHECK(s[0] == doctest::Approx(-0.7 + 1.0).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.2 + 1.0).epsilon(1e-12));
}

TEST_CASE("select_growth picks the top scores among non-active positions") {
    TensorD scores({1, 4}, {9.0, 1.0, 5.0, 7.0});
    TensorD mask({1, 4}, {1.0, 0.0, 0.0, 0.0});
    CHECK(select_growth(scores, mask, 2) == std::vector<i64>{2, 3});
    // k equal to the non-active count returns all of them
    CHECK(select_growth(scores, mask, 3) == std::vector<i64>{1, 2, 3});
    CHECK(select_growth(scores, mask, 0).empty());
    CHECK_THROWS_AS(select_growth(scores, mask, 4), ContractViolation);
}

TEST_CASE("select_growth ties break to the lowest flat index") {
    TensorD scores({1, 5}, {3.0, 3.0, 3.0, 3.0, 3.0});
    TensorD mask({1, 5}, {0.0, 1.0, 0.0, 0.0, 0.0});
    CHECK(select_growth(scores, mask, 2) == std::vector<i64>{0, 2});
}

TEST_CASE("select_growth never returns an active index") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto scores = random_grad(80, seed + 100);
        TensorD abs_scores = scores;
        for (i64 i = 0; i < 80; ++i) abs_scores[i] = std::abs(abs_scores[i]);
        const auto mask = random_mask(80, 0.5, seed + 200);
        i64 zeros = 0;
        for (i64 i = 0; i < 80; ++i) zeros += mask[i] == 0.0;
        if (zeros == 0) continue;
        const auto picked = select_growth(abs_scores, mask, std::min<i64>(zeros, 10));
        for (i64 i : picked) CHECK(mask[i] == 0.0);
    }
}

TEST_CASE("reduction property: acquisition with c = 0 equals gradient growth") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto grad = random_grad(60, seed);
        const auto mask = random_mask(60, 0.4, seed + 1000);
        std::vector<std::uint32_t> counter(60);
        Rng rng(seed + 2000);
        for (auto& c : counter) c = static_cast<std::uint32_t>(rng.next_below(8));
        i64 zeros = 0;
        for (i64 i = 0; i < 60; ++i) zeros += mask[i] == 0.0;
        const i64 k = std::min<i64>(zeros, 7);
        const auto via_ee = select_growth(acquisition_scores(grad, counter, 300.0, 0.0, 1.0), mask, k);
        const auto via_grad = gradient_growth(grad, mask, k);
        CHECK(via_ee == via_grad);
    }
}

TEST_CASE("rank-shift invariance: a constant added to every score keeps the selection") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto scores = random_grad(50, seed + 500);
        for (i64 i = 0; i < 50; ++i) scores[i] = std::abs(scores[i]);
        const auto mask = random_mask(50, 0.5, seed + 600);
        i64 zeros = 0;
        for (i64 i = 0; i < 50; ++i) zeros += mask[i] == 0.0;
        if (zeros < 3) continue;
        const auto base = select_growth(scores, mask, 3);
        TensorD shifted = scores;
        for (i64 i = 0; i < 50; ++i) shifted[i] += 4.25;
        CHECK(select_growth(shifted, mask, 3) == base);
    }
}

TEST_CASE("exploration dominance: zero gradients select minimal-counter positions first") {
    TensorD grad = TensorD::zeros({1, 6});
    TensorD mask = TensorD::zeros({1, 6});
    const std::vector<std::uint32_t> counter = {4, 0, 2, 0, 7, 1};
    const auto scores = acquisition_scores(grad, counter, 100.0, 1.0, 1.0);
    const auto picked = select_growth(scores, mask, 2);
    CHECK(picked == std::vector<i64>{1, 3}); // the two never-explored slots
    const auto three = select_growth(scores, mask, 3);
    CHECK(three == std::vector<i64>{1, 3, 5}); // then the least-visited
}

TEST_CASE("random growth: determinism, exact-fit, and k = 0") {
    TensorD mask({1, 6}, {1.0, 0.0, 0.0, 1.0, 0.0, 0.0});
    CHECK(random_growth(mask, 0, 9).empty());
    const auto a = random_growth(mask, 2, 42);
    const auto b = random_growth(mask, 2, 42);
    CHECK(a == b);
    for (i64 i : a) CHECK(mask[i] == 0.0);
    // k equal to the number of zeros returns all of them deterministically
    CHECK(random_growth(mask, 4, 7) == std::vector<i64>{1, 2, 4, 5});
    CHECK_THROWS_AS(random_growth(mask, 5, 7), ContractViolation);
    // different seeds eventually differ
    bool differs = false;
    for (std::uint64_t s = 0; s < 10 && !differs; ++s) differs = random_growth(mask, 2, s) != a;
    CHECK(differs);
}

TEST_CASE("gradient growth examples") {
    TensorD grad({1, 3}, {-3.0, 2.0, -1.0});
    TensorD mask = TensorD::zeros({1, 3});
    CHECK(gradient_growth(grad, mask, 1) == std::vector<i64>{0});
    TensorD zeros_grad = TensorD::zeros({1, 3});
    CHECK(gradient_growth(zeros_grad, mask, 2) == std::vector<i64>{0, 1});
}

TEST_CASE("drop fraction schedules") {
    DropSchedule cos{DropSchedule::Mode::cosine, 0.3, 1000};
    CHECK(drop_fraction(0, cos) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(drop_fraction(1000, cos) == 0.0);
    CHECK(drop_fraction(500, cos) == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(drop_fraction(2000, cos) == 0.0);

    DropSchedule con{DropSchedule::Mode::constant, 0.3, 1000};
    CHECK(drop_fraction(999, con) == 0.3);
    CHECK(drop_fraction(1000, con) == 0.0);

    CHECK(drop_count(0.3, 100) == 30);
    CHECK(drop_count(0.3, 101) == 31); // ceil
    CHECK(drop_count(0.0, 100) == 0);
    CHECK(drop_count(0.99, 3) == 3);
}

TEST_CASE("policy validation") {
    GrowthPolicy p;
    p.epsilon = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.epsilon = 1.0;
    p.c = -0.1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_THROWS_AS(acquisition_scores(TensorD({1, 1}, {0.1}), {0}, 10.0, 1.0, 0.0), ConfigError);
}
