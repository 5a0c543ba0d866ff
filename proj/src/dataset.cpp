#include "dst/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dst/error.hpp"
#include "dst/rng.hpp"

namespace dst {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset, const std::string& path) {
    if (offset + 4 > buf.size())
        throw FormatError(path + ": truncated header, expected 4 bytes at offset " +
                          std::to_string(offset) + ", file has " + std::to_string(buf.size()));
    return (std::uint32_t(buf[offset]) << 24) | (std::uint32_t(buf[offset + 1]) << 16) |
           (std::uint32_t(buf[offset + 2]) << 8) | std::uint32_t(buf[offset + 3]);
}

std::string hex32(std::uint32_t v) {
    char s[16];
    std::snprintf(s, sizeof(s), "0x%08x", v);
    return s;
}

} // namespace

Dataset load_mnist_pair(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_file(images_path);
    const std::uint32_t imagic = read_be32(img, 0, images_path);
    if (imagic != kImagesMagic)
        throw FormatError(images_path + ": magic mismatch at offset 0, expected " + hex32(kImagesMagic) +
                          ", got " + hex32(imagic));
    const std::uint32_t n = read_be32(img, 4, images_path);
    const std::uint32_t rows = read_be32(img, 8, images_path);
    const std::uint32_t cols = read_be32(img, 12, images_path);
    const std::size_t expected = 16 + std::size_t(n) * rows * cols;
    if (img.size() != expected)
        throw FormatError(images_path + ": truncated payload, expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(img.size()));

    const auto lab = read_file(labels_path);
    const std::uint32_t lmagic = read_be32(lab, 0, labels_path);
    if (lmagic != kLabelsMagic)
        throw FormatError(labels_path + ": magic mismatch at offset 0, expected " + hex32(kLabelsMagic) +
                          ", got " + hex32(lmagic));
    const std::uint32_t ln = read_be32(lab, 4, labels_path);
    if (ln != n)
        throw FormatError(labels_path + ": label count " + std::to_string(ln) +
                          " does not match image count " + std::to_string(n));
    if (lab.size() != 8 + std::size_t(ln))
        throw FormatError(labels_path + ": truncated payload, expected " + std::to_string(8 + std::size_t(ln)) +
                          " bytes, got " + std::to_string(lab.size()));

    Dataset out;
    out.dim = static_cast<i64>(rows) * static_cast<i64>(cols);
    out.num_classes = 10;
    out.images = TensorF::zeros({static_cast<i64>(n), out.dim});
    out.labels.resize(n);
    constexpr float kScale = 1.0f / 255.0f;
    for (std::size_t i = 0; i < std::size_t(n) * rows * cols; ++i)
        out.images[static_cast<i64>(i)] = static_cast<float>(img[16 + i]) * kScale;
    for (std::size_t i = 0; i < ln; ++i) {
        const unsigned char y = lab[8 + i];
        if (y > 9)
            throw FormatError(labels_path + ": label value " + std::to_string(int(y)) +
                              " out of range at offset " + std::to_string(8 + i));
        out.labels[i] = y;
    }
    return out;
}

MnistData load_mnist(const std::string& dir) {
    namespace fs = std::filesystem;
    const auto p = [&dir](const char* name) { return (fs::path(dir) / name).string(); };
    MnistData data;
    data.train = load_mnist_pair(p("train-images-idx3-ubyte"), p("train-labels-idx1-ubyte"));
    data.test = load_mnist_pair(p("t10k-images-idx3-ubyte"), p("t10k-labels-idx1-ubyte"));
    return data;
}

Dataset synth_dataset(SynthKind kind, i64 n, i64 classes, i64 dim, double noise, std::uint64_t seed) {
    if (n <= 0) throw ConfigError("synth_dataset: n must be positive");
    if (noise < 0.0) throw ConfigError("synth_dataset: noise must be non-negative");
    if (kind == SynthKind::moons) {
        classes = 2;
        dim = 2;
    }
    if (classes < 2 || classes > 255) throw ConfigError("synth_dataset: classes must be in [2,255]");
    if (dim < 2) throw ConfigError("synth_dataset: dim must be at least 2");

    Dataset out;
    out.dim = dim;
    out.num_classes = classes;
    out.images = TensorF::zeros({n, dim});
    out.labels.resize(static_cast<std::size_t>(n));

    Rng rng(seed);
    constexpr double kRadius = 3.0;
    for (i64 i = 0; i < n; ++i) {
        float* row = out.images.data() + i * dim;
        if (kind == SynthKind::blobs) {
            const i64 c = i % classes;
            const double angle = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(classes);
            row[0] = static_cast<float>(kRadius * std::cos(angle));
            row[1] = static_cast<float>(kRadius * std::sin(angle));
            for (i64 d = 0; d < dim; ++d) row[d] += static_cast<float>(noise * rng.next_gauss());
            out.labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(c);
        } else {
            const i64 c = i % 2;
            const double a = rng.next_uniform(0.0, M_PI);
            if (c == 0) {
                row[0] = static_cast<float>(std::cos(a));
                row[1] = static_cast<float>(std::sin(a));
            } else {
                row[0] = static_cast<float>(1.0 - std::cos(a));
                row[1] = static_cast<float>(0.5 - std::sin(a));
            }
            for (i64 d = 0; d < dim; ++d) row[d] += static_cast<float>(noise * rng.next_gauss());
            out.labels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(c);
        }
    }
    return out;
}

} // namespace dst
