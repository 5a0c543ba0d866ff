#include "dst/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "dst/error.hpp"

namespace dst {

namespace {

constexpr char kMagic[] = "DSTCKPT v1";

void put_f32_le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

float get_f32_le(const std::string& buf, std::size_t& pos) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i)
        bits |= std::uint32_t(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 4;
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::uint32_t get_u32_le(const std::string& buf, std::size_t& pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= std::uint32_t(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 4;
    return v;
}

// bit j of byte i covers element 8*i + j
void put_bitmap(std::string& out, const std::vector<std::uint8_t>& bits) {
    const std::size_t nbytes = (bits.size() + 7) / 8;
    for (std::size_t i = 0; i < nbytes; ++i) {
        unsigned char b = 0;
        for (std::size_t j = 0; j < 8 && 8 * i + j < bits.size(); ++j)
            if (bits[8 * i + j]) b |= static_cast<unsigned char>(1u << j);
        out.push_back(static_cast<char>(b));
    }
}

std::vector<std::uint8_t> get_bitmap(const std::string& buf, std::size_t& pos, std::size_t n) {
    std::vector<std::uint8_t> bits(n, 0);
    const std::size_t nbytes = (n + 7) / 8;
    for (std::size_t i = 0; i < nbytes; ++i) {
        const unsigned char b = static_cast<unsigned char>(buf[pos + i]);
        for (std::size_t j = 0; j < 8 && 8 * i + j < n; ++j) bits[8 * i + j] = (b >> j) & 1u;
    }
    pos += nbytes;
    return bits;
}

} // namespace

NetworkSpec Checkpoint::spec() const {
    std::vector<i64> widths;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (l == 0) widths.push_back(layers[l].values.rows());
        widths.push_back(layers[l].values.cols());
    }
    const bool bias = !biases.empty() && biases.front().size() > 0;
    return NetworkSpec::mlp(widths, bias);
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    if (ckpt.layers.size() != ckpt.biases.size())
        throw ContractViolation("checkpoint: layer/bias count mismatch");
    std::ostringstream header;
    header << kMagic << "\n";
    header << "seed " << ckpt.seed << "\n";
    header << "round " << ckpt.round << "\n";
    header << "iteration " << ckpt.iteration << "\n";
    header << "layers " << ckpt.layers.size() << "\n";
    for (std::size_t l = 0; l < ckpt.layers.size(); ++l) {
        const auto& layer = ckpt.layers[l];
        header << "layer " << l << " rows " << layer.values.rows() << " cols " << layer.values.cols()
               << " nnz " << layer.active_count() << " bias " << ckpt.biases[l].size() << "\n";
    }
    header << "end\n";

    std::string payload;
    for (std::size_t l = 0; l < ckpt.layers.size(); ++l) {
        const auto& layer = ckpt.layers[l];
        std::vector<std::uint8_t> mask_bits(static_cast<std::size_t>(layer.size()));
        for (i64 i = 0; i < layer.size(); ++i) mask_bits[static_cast<std::size_t>(i)] = layer.mask[i] != 0.0f;
        for (const float v : layer.values.values) put_f32_le(payload, v);
        put_bitmap(payload, mask_bits);
        put_bitmap(payload, layer.ever_active);
        for (const std::uint32_t c : layer.counter) put_u32_le(payload, c);
        for (const float v : ckpt.biases[l].values) put_f32_le(payload, v);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("checkpoint: cannot write " + path);
    const std::string h = header.str();
    out.write(h.data(), static_cast<std::streamsize>(h.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw FormatError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();

    // header is text up to the "end" line
    const std::string end_tag = "\nend\n";
    const auto end_pos = buf.find(end_tag);
    if (end_pos == std::string::npos) throw FormatError("checkpoint: missing end of manifest in " + path);
    std::istringstream header(buf.substr(0, end_pos + 1));
    std::size_t pos = end_pos + end_tag.size();

    std::string line;
    if (!std::getline(header, line) || line != kMagic)
        throw FormatError("checkpoint: bad magic in " + path + ", got '" + line + "'");

    Checkpoint ckpt;
    std::size_t num_layers = 0;
    struct LayerMeta {
        i64 rows, cols, nnz, bias;
    };
    std::vector<LayerMeta> meta;
    while (std::getline(header, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "seed") ls >> ckpt.seed;
        else if (key == "round") ls >> ckpt.round;
        else if (key == "iteration") ls >> ckpt.iteration;
        else if (key == "layers") ls >> num_layers;
        else if (key == "layer") {
            LayerMeta m{};
            std::size_t idx;
            std::string k1, k2, k3, k4;
            ls >> idx >> k1 >> m.rows >> k2 >> m.cols >> k3 >> m.nnz >> k4 >> m.bias;
            if (!ls || k1 != "rows" || k2 != "cols" || k3 != "nnz" || k4 != "bias" || idx != meta.size())
                throw FormatError("checkpoint: malformed layer line '" + line + "'");
            meta.push_back(m);
        } else if (!key.empty()) {
            throw FormatError("checkpoint: unknown manifest key '" + key + "'");
        }
    }
    if (meta.size() != num_layers)
        throw FormatError("checkpoint: manifest declares " + std::to_string(num_layers) + " layers, lists " +
                          std::to_string(meta.size()));

    std::size_t expected = 0;
    for (const auto& m : meta) {
        const std::size_t n = static_cast<std::size_t>(m.rows * m.cols);
        expected += n * 4 + 2 * ((n + 7) / 8) + n * 4 + static_cast<std::size_t>(m.bias) * 4;
    }
    if (buf.size() - pos != expected)
        throw FormatError("checkpoint: payload size mismatch, expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(buf.size() - pos));

    for (const auto& m : meta) {
        const i64 n = m.rows * m.cols;
        MaskedTensorF layer;
        layer.values = TensorF::zeros({m.rows, m.cols});
        layer.mask = TensorF::zeros({m.rows, m.cols});
        for (i64 i = 0; i < n; ++i) layer.values[i] = get_f32_le(buf, pos);
        const auto mask_bits = get_bitmap(buf, pos, static_cast<std::size_t>(n));
        layer.ever_active = get_bitmap(buf, pos, static_cast<std::size_t>(n));
        layer.counter.resize(static_cast<std::size_t>(n));
        i64 nnz = 0;
        for (i64 i = 0; i < n; ++i) {
            layer.mask[i] = mask_bits[static_cast<std::size_t>(i)] ? 1.0f : 0.0f;
            nnz += mask_bits[static_cast<std::size_t>(i)];
        }
        for (i64 i = 0; i < n; ++i) layer.counter[static_cast<std::size_t>(i)] = get_u32_le(buf, pos);
        if (nnz != m.nnz)
            throw FormatError("checkpoint: mask population " + std::to_string(nnz) +
                              " does not match manifest nnz " + std::to_string(m.nnz));
        for (i64 i = 0; i < n; ++i)
            if (layer.mask[i] == 0.0f && layer.values[i] != 0.0f)
                throw FormatError("checkpoint: nonzero value at masked-out position " + std::to_string(i));
        TensorF bias;
        if (m.bias > 0) {
            bias = TensorF::zeros({m.bias});
            for (i64 i = 0; i < m.bias; ++i) bias[i] = get_f32_le(buf, pos);
        }
        ckpt.layers.push_back(std::move(layer));
        ckpt.biases.push_back(std::move(bias));
    }
    return ckpt;
}

} // namespace dst
