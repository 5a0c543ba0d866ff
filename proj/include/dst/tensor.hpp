#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "dst/error.hpp"

namespace dst {

using i64 = std::int64_t;

// Dense row-major tensor. The whole engine stores masks as dense {0,1}
// tensors of the same scalar type as the values; sparse storage formats are
// a non-goal at desk scale.
template <typename T>
struct TensorT {
    std::vector<i64> shape;
    std::vector<T> values;

    TensorT() = default;

    TensorT(std::vector<i64> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
        if (numel(shape) != static_cast<i64>(values.size()))
            throw ContractViolation("tensor: shape/value length mismatch");
    }

    static i64 numel(const std::vector<i64>& s) {
        i64 n = 1;
        for (i64 d : s) {
            if (d <= 0) throw ContractViolation("tensor: non-positive dimension");
            n *= d;
        }
        return n;
    }

    static TensorT zeros(std::vector<i64> s) {
        const i64 n = numel(s);
        return TensorT(std::move(s), std::vector<T>(static_cast<std::size_t>(n), T(0)));
    }

    static TensorT full(std::vector<i64> s, T v) {
        const i64 n = numel(s);
        return TensorT(std::move(s), std::vector<T>(static_cast<std::size_t>(n), v));
    }

    i64 size() const { return static_cast<i64>(values.size()); }

    // 2-D accessors; most of the engine works on matrices.
    i64 rows() const { return shape.at(0); }
    i64 cols() const { return shape.at(1); }

    T& operator[](i64 i) { return values[static_cast<std::size_t>(i)]; }
    const T& operator[](i64 i) const { return values[static_cast<std::size_t>(i)]; }

    T& at(i64 r, i64 c) { return values[static_cast<std::size_t>(r * cols() + c)]; }
    const T& at(i64 r, i64 c) const { return values[static_cast<std::size_t>(r * cols() + c)]; }

    const T* data() const { return values.data(); }
    T* data() { return values.data(); }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    friend bool operator==(const TensorT& a, const TensorT& b) {
        return a.shape == b.shape && a.values == b.values;
    }
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

inline std::string shape_str(const std::vector<i64>& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

} // namespace dst
