#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dst/network.hpp"
#include "dst/sparsity.hpp"
#include "dst/tensor.hpp"

namespace dst {

// On-disk snapshot of the sparse model: a plain-text manifest (shapes,
// counts, seed, round/iteration) followed by, per layer, little-endian
// float32 values, byte-packed mask and ever-active bitmaps (LSB first),
// little-endian uint32 counters, and the float32 bias vector. Round-trips
// bit-exactly.
struct Checkpoint {
    std::uint64_t seed = 0;
    i64 round = 0;
    i64 iteration = 0;
    std::vector<MaskedTensorF> layers;
    std::vector<TensorF> biases; // empty tensor where the layer has no bias

    // The network the shapes describe: ReLU hidden layers, identity final.
    NetworkSpec spec() const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace dst
