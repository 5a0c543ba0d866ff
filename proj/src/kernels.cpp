#include "dst/kernels.hpp"

#include <algorithm>

namespace dst::kernels {

// i-k-j loop order: the inner loop is an axpy over a contiguous output row,
// which the compiler vectorizes without reassociating any reduction.

template <typename T>
void matmul_serial(const T* a, const T* b, T* c, i64 m, i64 k, i64 n) {
    std::fill(c, c + m * n, T(0));
    for (i64 i = 0; i < m; ++i) {
        T* crow = c + i * n;
        const T* arow = a + i * k;
        for (i64 p = 0; p < k; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;
            const T* brow = b + p * n;
            for (i64 j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void matmul(const T* a, const T* b, T* c, i64 m, i64 k, i64 n) {
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < m; ++i) {
        T* crow = c + i * n;
        std::fill(crow, crow + n, T(0));
        const T* arow = a + i * k;
        for (i64 p = 0; p < k; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;
            const T* brow = b + p * n;
            for (i64 j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void matmul_at_b_serial(const T* a, const T* b, T* c, i64 m, i64 k, i64 n) {
    std::fill(c, c + k * n, T(0));
    for (i64 i = 0; i < k; ++i) {
        T* crow = c + i * n;
        for (i64 p = 0; p < m; ++p) {
            const T av = a[p * k + i];
            if (av == T(0)) continue;
            const T* brow = b + p * n;
            for (i64 j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void matmul_at_b(const T* a, const T* b, T* c, i64 m, i64 k, i64 n) {
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < k; ++i) {
        T* crow = c + i * n;
        std::fill(crow, crow + n, T(0));
        for (i64 p = 0; p < m; ++p) {
            const T av = a[p * k + i];
            if (av == T(0)) continue;
            const T* brow = b + p * n;
            for (i64 j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void transpose(const T* in, T* out, i64 m, i64 n) {
    for (i64 i = 0; i < m; ++i)
        for (i64 j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
}

template void matmul_serial<float>(const float*, const float*, float*, i64, i64, i64);
template void matmul_serial<double>(const double*, const double*, double*, i64, i64, i64);
template void matmul<float>(const float*, const float*, float*, i64, i64, i64);
template void matmul<double>(const double*, const double*, double*, i64, i64, i64);
template void matmul_at_b_serial<float>(const float*, const float*, float*, i64, i64, i64);
template void matmul_at_b_serial<double>(const double*, const double*, double*, i64, i64, i64);
template void matmul_at_b<float>(const float*, const float*, float*, i64, i64, i64);
template void matmul_at_b<double>(const double*, const double*, double*, i64, i64, i64);
template void transpose<float>(const float*, float*, i64, i64);
template void transpose<double>(const double*, double*, i64, i64);

} // namespace dst::kernels
