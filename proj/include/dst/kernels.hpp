#pragma once

#include <cstdint>

namespace dst::kernels {

using i64 = std::int64_t;

// Matrix kernels behind forward/backward. Each has a serial reference and an
// OpenMP variant parallelized over output rows; every output element is a
// serial reduction in the same order in both, so the two are bit-identical
// for any thread count. The serial versions are kept for testing and for the
// bench_kernels comparison target.

// c[m,n] = a[m,k] * b[k,n]
template <typename T>
void matmul_serial(const T* a, const T* b, T* c, i64 m, i64 k, i64 n);
template <typename T>
void matmul(const T* a, const T* b, T* c, i64 m, i64 k, i64 n);

// c[k,n] = a[m,k]^T * b[m,n]
template <typename T>
void matmul_at_b_serial(const T* a, const T* b, T* c, i64 m, i64 k, i64 n);
template <typename T>
void matmul_at_b(const T* a, const T* b, T* c, i64 m, i64 k, i64 n);

// out[n,m] = in[m,n]^T
template <typename T>
void transpose(const T* in, T* out, i64 m, i64 n);

} // namespace dst::kernels
