#include <doctest.h>

#include "dst/kernels.hpp"
#include "dst/rng.hpp"
#include "dst/tensor.hpp"

using namespace dst;

namespace {

TensorD random_matrix(i64 r, i64 c, std::uint64_t seed) {
    Rng rng(seed);
    TensorD m = TensorD::zeros({r, c});
    for (i64 i = 0; i < m.size(); ++i) m[i] = rng.next_uniform(-1.0, 1.0);
    return m;
}

} // namespace

TEST_CASE("matmul matches a naive triple loop") {
    const auto a = random_matrix(7, 5, 11);
    const auto b = random_matrix(5, 9, 12);
    TensorD c = TensorD::zeros({7, 9});
    kernels::matmul(a.data(), b.data(), c.data(), 7, 5, 9);
    for (i64 i = 0; i < 7; ++i)
        for (i64 j = 0; j < 9; ++j) {
            double acc = 0.0;
            for (i64 p = 0; p < 5; ++p) acc += a.at(i, p) * b.at(p, j);
            CHECK(c.at(i, j) == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("matmul_at_b matches transpose-then-multiply") {
    const auto a = random_matrix(6, 4, 21);
    const auto b = random_matrix(6, 8, 22);
    TensorD c = TensorD::zeros({4, 8});
    kernels::matmul_at_b(a.data(), b.data(), c.data(), 6, 4, 8);
    TensorD at = TensorD::zeros({4, 6});
    kernels::transpose(a.data(), at.data(), 6, 4);
    TensorD ref = TensorD::zeros({4, 8});
    kernels::matmul_serial(at.data(), b.data(), ref.data(), 4, 6, 8);
    CHECK(c.values == ref.values);
}

TEST_CASE("OpenMP kernels are bit-identical to the serial reference") {
    // the parallel variants keep the per-element reduction order, so the
    // comparison is exact equality, not approximate
    Rng shapes(77);
    for (int round = 0; round < 20; ++round) {
        const i64 m = 1 + static_cast<i64>(shapes.next_below(40));
        const i64 k = 1 + static_cast<i64>(shapes.next_below(40));
        const i64 n = 1 + static_cast<i64>(shapes.next_below(40));
        const auto a = random_matrix(m, k, 1000 + static_cast<std::uint64_t>(round));
        const auto b = random_matrix(k, n, 2000 + static_cast<std::uint64_t>(round));
        TensorD c1 = TensorD::zeros({m, n}), c2 = TensorD::zeros({m, n});
        kernels::matmul(a.data(), b.data(), c1.data(), m, k, n);
        kernels::matmul_serial(a.data(), b.data(), c2.data(), m, k, n);
        CHECK(c1.values == c2.values);

        const auto b2 = random_matrix(m, n, 3000 + static_cast<std::uint64_t>(round));
        TensorD d1 = TensorD::zeros({k, n}), d2 = TensorD::zeros({k, n});
        kernels::matmul_at_b(a.data(), b2.data(), d1.data(), m, k, n);
        kernels::matmul_at_b_serial(a.data(), b2.data(), d2.data(), m, k, n);
        CHECK(d1.values == d2.values);
    }
}

TEST_CASE("transpose round-trips") {
    const auto a = random_matrix(5, 3, 31);
    TensorD t = TensorD::zeros({3, 5});
    kernels::transpose(a.data(), t.data(), 5, 3);
    TensorD back = TensorD::zeros({5, 3});
    kernels::transpose(t.data(), back.data(), 3, 5);
    CHECK(back.values == a.values);
}
