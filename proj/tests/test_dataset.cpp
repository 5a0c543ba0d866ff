#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dst/dataset.hpp"
#include "dst/error.hpp"
#include "dst/network.hpp"
#include "dst/rng.hpp"

using namespace dst;
namespace fs = std::filesystem;

namespace {

void put_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
}

struct TempIdx {
    fs::path images, labels;

    TempIdx(const std::string& tag, std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
            const std::vector<std::uint8_t>& pixels, const std::vector<std::uint8_t>& labs,
            std::uint32_t image_magic = 0x00000803, std::uint32_t label_magic = 0x00000801,
            int truncate_images_by = 0) {
        const fs::path dir = fs::temp_directory_path();
        images = dir / ("dst_test_images_" + tag);
        labels = dir / ("dst_test_labels_" + tag);
        std::string ibuf;
        put_be32(ibuf, image_magic);
        put_be32(ibuf, n);
        put_be32(ibuf, rows);
        put_be32(ibuf, cols);
        ibuf.append(pixels.begin(), pixels.end());
        if (truncate_images_by > 0) ibuf.resize(ibuf.size() - static_cast<std::size_t>(truncate_images_by));
        std::ofstream(images, std::ios::binary) << ibuf;
        std::string lbuf;
        put_be32(lbuf, label_magic);
        put_be32(lbuf, n);
        lbuf.append(labs.begin(), labs.end());
        std::ofstream(labels, std::ios::binary) << lbuf;
    }

    ~TempIdx() {
        fs::remove(images);
        fs::remove(labels);
    }
};

} // namespace

TEST_CASE("idx parser reads a well-formed pair, scaling pixels to [0,1]") {
    std::vector<std::uint8_t> pixels(3 * 4 * 4);
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = static_cast<std::uint8_t>(i * 5 % 256);
    const std::vector<std::uint8_t> labs = {1, 9, 0};
    TempIdx files("ok", 3, 4, 4, pixels, labs);
    const Dataset d = load_mnist_pair(files.images.string(), files.labels.string());
    CHECK(d.size() == 3);
    CHECK(d.dim == 16);
    CHECK(d.num_classes == 10);
    CHECK(d.labels == labs);
    for (i64 i = 0; i < d.images.size(); ++i)
        CHECK(d.images[i] == doctest::Approx(pixels[static_cast<std::size_t>(i)] / 255.0f).epsilon(1e-7));
}

TEST_CASE("idx parser rejects a bad magic with the expected and actual values") {
    TempIdx files("magic", 1, 2, 2, std::vector<std::uint8_t>(4, 0), {3}, 0x00000777);
    try {
        load_mnist_pair(files.images.string(), files.labels.string());
        CHECK(false);
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("0x00000803") != std::string::npos);
        CHECK(msg.find("0x00000777") != std::string::npos);
        CHECK(msg.find("offset 0") != std::string::npos);
    }
}

TEST_CASE("idx parser reports expected vs actual length for truncated files") {
    TempIdx files("trunc", 2, 3, 3, std::vector<std::uint8_t>(18, 7), {1, 2}, 0x00000803, 0x00000801, 5);
    try {
        load_mnist_pair(files.images.string(), files.labels.string());
        CHECK(false);
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("expected 34") != std::string::npos); // 16 + 18
        CHECK(msg.find("got 29") != std::string::npos);
    }
}

TEST_CASE("idx parser rejects labels above 9") {
    TempIdx files("label", 1, 2, 2, std::vector<std::uint8_t>(4, 0), {10});
    CHECK_THROWS_AS(load_mnist_pair(files.images.string(), files.labels.string()), FormatError);
}

TEST_CASE("idx parser rejects image/label count mismatch") {
    const fs::path dir = fs::temp_directory_path();
    TempIdx a("count_a", 2, 2, 2, std::vector<std::uint8_t>(8, 0), {1, 2});
    TempIdx b("count_b", 3, 2, 2, std::vector<std::uint8_t>(12, 0), {1, 2, 3});
    CHECK_THROWS_AS(load_mnist_pair(a.images.string(), b.labels.string()), FormatError);
}

TEST_CASE("bundled mnist files load with the expected shape") {
    if (!fs::exists("data/mnist/train-images-idx3-ubyte")) return; // run from the repo root
    const MnistData d = load_mnist("data/mnist");
    CHECK(d.train.dim == 784);
    CHECK(d.test.dim == 784);
    CHECK(d.train.size() == 8000);
    CHECK(d.test.size() == 2000);
    // pixel range sanity
    float mx = 0.0f;
    for (i64 i = 0; i < d.train.images.size(); ++i) mx = std::max(mx, d.train.images[i]);
    CHECK(mx <= 1.0f);
    CHECK(mx > 0.9f);
}

TEST_CASE("synthetic datasets are pure functions of their arguments") {
    const Dataset a = synth_dataset(SynthKind::blobs, 64, 4, 8, 0.2, 9);
    const Dataset b = synth_dataset(SynthKind::blobs, 64, 4, 8, 0.2, 9);
    CHECK(a.images.values == b.images.values);
    CHECK(a.labels == b.labels);
    const Dataset c = synth_dataset(SynthKind::blobs, 64, 4, 8, 0.2, 10);
    CHECK(a.images.values != c.images.values);
}

TEST_CASE("blobs with zero noise sit exactly on the documented centers") {
    const Dataset d = synth_dataset(SynthKind::blobs, 4, 2, 3, 0.0, 123);
    // class c center: radius 3 at angle 2*pi*c/classes in the first two coords
    for (i64 i = 0; i < 4; ++i) {
        const i64 c = i % 2;
        const double angle = 2.0 * M_PI * static_cast<double>(c) / 2.0;
        CHECK(d.images.at(i, 0) == static_cast<float>(3.0 * std::cos(angle)));
        CHECK(d.images.at(i, 1) == static_cast<float>(3.0 * std::sin(angle)));
        CHECK(d.images.at(i, 2) == 0.0f);
        CHECK(d.labels[static_cast<std::size_t>(i)] == c);
    }
}

TEST_CASE("moons are two classes in 2d") {
    const Dataset d = synth_dataset(SynthKind::moons, 100, 5 /*forced to 2*/, 9 /*forced to 2*/, 0.05, 3);
    CHECK(d.num_classes == 2);
    CHECK(d.dim == 2);
    for (i64 i = 0; i < 100; ++i) CHECK(d.labels[static_cast<std::size_t>(i)] == i % 2);
}

TEST_CASE("synthetic argument validation") {
    CHECK_THROWS_AS(synth_dataset(SynthKind::blobs, 0, 3, 4, 0.1, 1), ConfigError);
    CHECK_THROWS_AS(synth_dataset(SynthKind::blobs, 10, 1, 4, 0.1, 1), ConfigError);
    CHECK_THROWS_AS(synth_dataset(SynthKind::blobs, 10, 3, 4, -0.5, 1), ConfigError);
}
