#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dst/tensor.hpp"

namespace dst {

// In-memory classification dataset; images are flattened row-major and
// scaled to [0,1].
struct Dataset {
    i64 dim = 0;
    i64 num_classes = 0;
    TensorF images; // [n, dim]
    std::vector<std::uint8_t> labels;

    i64 size() const { return images.shape.empty() ? 0 : images.rows(); }
};

struct MnistData {
    Dataset train;
    Dataset test;
};

// Parses one IDX image/label file pair (big-endian magic 0x00000803 /
// 0x00000801, dimension header, unsigned-byte payload). Pixels are scaled
// by 1/255; labels are validated against the 10 digit classes. Format
// errors report the offending byte offset.
Dataset load_mnist_pair(const std::string& images_path, const std::string& labels_path);

// Loads the standard four files (train-*/t10k-*) from a directory.
MnistData load_mnist(const std::string& dir);

enum class SynthKind { blobs, moons };

// Seeded synthetic datasets.
//
// blobs: class centers evenly spaced on a circle of radius 3 in the first
// two coordinates (remaining coordinates 0), each point = center +
// noise * standard normal per coordinate, class label i for point i mod
// classes.
//
// moons: two interleaved half circles in 2D — class 0 at
// (cos a, sin a), class 1 at (1 - cos a, 0.5 - sin a) with a uniform in
// [0, pi) — plus noise * standard normal per coordinate.
//
// All draws come from one stream seeded by `seed`, in point order
// (angle/center first, then the noise coordinates), so a dataset is a pure
// function of its arguments.
Dataset synth_dataset(SynthKind kind, i64 n, i64 classes, i64 dim, double noise, std::uint64_t seed);

} // namespace dst
