#include "dst/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dst/error.hpp"
#include "dst/rng.hpp"

namespace dst {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a real number, got '" + v + "'");
    }
}

i64 parse_int(const std::string& key, const std::string& v) {
    i64 x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_u64(key, item));
    }
    return out;
}

std::vector<i64> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<i64> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    if (out.empty()) throw ConfigError("config: key '" + key + "' expects a comma-separated list");
    return out;
}

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string dataset_kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::mnist: return "mnist";
        case DatasetKind::synthetic_blobs: return "synthetic_blobs";
        case DatasetKind::synthetic_moons: return "synthetic_moons";
    }
    return "?";
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "dataset") {
        if (v == "mnist") cfg.dataset = DatasetKind::mnist;
        else if (v == "synthetic_blobs") cfg.dataset = DatasetKind::synthetic_blobs;
        else if (v == "synthetic_moons") cfg.dataset = DatasetKind::synthetic_moons;
        else throw ConfigError("config: unknown dataset '" + v + "'");
    } else if (key == "data_dir") cfg.data_dir = v;
    else if (key == "synth_n") cfg.synth_n = parse_int(key, v);
    else if (key == "synth_classes") cfg.synth_classes = parse_int(key, v);
    else if (key == "synth_dim") cfg.synth_dim = parse_int(key, v);
    else if (key == "synth_noise") cfg.synth_noise = parse_real(key, v);
    else if (key == "arch") cfg.arch = parse_int_list(key, v);
    else if (key == "bias") cfg.bias = parse_bool(key, v);
    else if (key == "global_sparsity") cfg.global_sparsity = parse_real(key, v);
    else if (key == "allocation") {
        if (v == "erk") cfg.allocation = Allocation::erk;
        else if (v == "uniform") cfg.allocation = Allocation::uniform;
        else throw ConfigError("config: unknown allocation '" + v + "'");
    } else if (key == "counter_init") {
        if (v == "mask") cfg.counter_init = CounterInit::mask;
        else if (v == "zeros") cfg.counter_init = CounterInit::zeros;
        else throw ConfigError("config: unknown counter_init '" + v + "'");
    } else if (key == "policy") {
        if (v == "random") cfg.policy = GrowthPolicy::Kind::random;
        else if (v == "gradient") cfg.policy = GrowthPolicy::Kind::gradient;
        else if (v == "dst_ee") cfg.policy = GrowthPolicy::Kind::acquisition_ee;
        else throw ConfigError("config: unknown policy '" + v + "'");
    } else if (key == "c") cfg.c = parse_real(key, v);
    else if (key == "epsilon") cfg.epsilon = parse_real(key, v);
    else if (key == "signed_scores") cfg.signed_scores = parse_bool(key, v);
    else if (key == "drop_fraction") cfg.drop_fraction = parse_real(key, v);
    else if (key == "drop_schedule") {
        if (v == "constant") cfg.drop_schedule = DropSchedule::Mode::constant;
        else if (v == "cosine") cfg.drop_schedule = DropSchedule::Mode::cosine;
        else throw ConfigError("config: unknown drop_schedule '" + v + "'");
    } else if (key == "delta_t") cfg.delta_t = parse_int(key, v);
    else if (key == "t_end") cfg.t_end = parse_int(key, v);
    else if (key == "total_iterations") cfg.total_iterations = parse_int(key, v);
    else if (key == "lr0") cfg.lr0 = parse_real(key, v);
    else if (key == "lr_min") cfg.lr_min = parse_real(key, v);
    else if (key == "momentum") cfg.momentum = parse_real(key, v);
    else if (key == "batch_size") cfg.batch_size = parse_int(key, v);
    else if (key == "seed") cfg.seed = parse_u64(key, v);
    else if (key == "repeat_seeds") cfg.repeat_seeds = parse_u64_list(key, v);
    else if (key == "eval_every") cfg.eval_every = parse_int(key, v);
    else if (key == "label") cfg.label = v;
    else if (key == "out_dir") cfg.out_dir = v;
    else throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
        apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "dataset = " << dataset_kind_name(cfg.dataset) << "\n";
    out << "data_dir = " << cfg.data_dir << "\n";
    out << "synth_n = " << cfg.synth_n << "\n";
    out << "synth_classes = " << cfg.synth_classes << "\n";
    out << "synth_dim = " << cfg.synth_dim << "\n";
    out << "synth_noise = " << fmt_real(cfg.synth_noise) << "\n";
    out << "arch = ";
    for (std::size_t i = 0; i < cfg.arch.size(); ++i) out << (i ? "," : "") << cfg.arch[i];
    out << "\n";
    out << "bias = " << (cfg.bias ? "true" : "false") << "\n";
    out << "global_sparsity = " << fmt_real(cfg.global_sparsity) << "\n";
    out << "allocation = " << (cfg.allocation == Allocation::erk ? "erk" : "uniform") << "\n";
    out << "counter_init = " << (cfg.counter_init == CounterInit::mask ? "mask" : "zeros") << "\n";
    const char* policy = cfg.policy == GrowthPolicy::Kind::random     ? "random"
                         : cfg.policy == GrowthPolicy::Kind::gradient ? "gradient"
                                                                      : "dst_ee";
    out << "policy = " << policy << "\n";
    out << "c = " << fmt_real(cfg.c) << "\n";
    out << "epsilon = " << fmt_real(cfg.epsilon) << "\n";
    out << "signed_scores = " << (cfg.signed_scores ? "true" : "false") << "\n";
    out << "drop_fraction = " << fmt_real(cfg.drop_fraction) << "\n";
    out << "drop_schedule = " << (cfg.drop_schedule == DropSchedule::Mode::cosine ? "cosine" : "constant")
        << "\n";
    out << "delta_t = " << cfg.delta_t << "\n";
    out << "t_end = " << cfg.t_end << "\n";
    out << "total_iterations = " << cfg.total_iterations << "\n";
    out << "lr0 = " << fmt_real(cfg.lr0) << "\n";
    out << "lr_min = " << fmt_real(cfg.lr_min) << "\n";
    out << "momentum = " << fmt_real(cfg.momentum) << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "repeat_seeds =";
    for (std::size_t i = 0; i < cfg.repeat_seeds.size(); ++i)
        out << (i ? "," : " ") << cfg.repeat_seeds[i];
    out << "\n";
    out << "eval_every = " << cfg.eval_every << "\n";
    out << "label = " << cfg.label << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    return fnv1a64(serialize_config(cfg));
}

} // namespace dst
