#include "dst/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dst/checkpoint.hpp"
#include "dst/error.hpp"

namespace dst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// compact value formatting for labels (c=0.1 -> "0.1")
std::string fmt_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// sample std (n-1 denominator); 0 for a single value
MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

} // namespace

DataBundle load_dataset(const ExperimentConfig& cfg) {
    DataBundle out;
    switch (cfg.dataset) {
        case DatasetKind::mnist: {
            MnistData d = load_mnist(cfg.data_dir);
            out.train = std::move(d.train);
            out.test = std::move(d.test);
            break;
        }
        case DatasetKind::synthetic_blobs:
        case DatasetKind::synthetic_moons: {
            const SynthKind kind =
                cfg.dataset == DatasetKind::synthetic_blobs ? SynthKind::blobs : SynthKind::moons;
            const i64 test_n = std::max<i64>(cfg.synth_n / 5, 100);
            out.train = synth_dataset(kind, cfg.synth_n, cfg.synth_classes, cfg.synth_dim, cfg.synth_noise,
                                      stream_seed(cfg.seed, "synth-train"));
            out.test = synth_dataset(kind, test_n, cfg.synth_classes, cfg.synth_dim, cfg.synth_noise,
                                     stream_seed(cfg.seed, "synth-test"));
            break;
        }
    }
    return out;
}

TrainConfig to_train_config(const ExperimentConfig& cfg) {
    TrainConfig tc;
    tc.net = NetworkSpec::mlp(cfg.arch, cfg.bias);
    tc.global_sparsity = cfg.global_sparsity;
    tc.allocation = cfg.allocation;
    tc.counter_init = cfg.counter_init;
    tc.policy.kind = cfg.policy;
    tc.policy.c = cfg.c;
    tc.policy.epsilon = cfg.epsilon;
    tc.policy.signed_scores = cfg.signed_scores;
    tc.drop.mode = cfg.drop_schedule;
    tc.drop.initial_fraction = cfg.drop_fraction;
    tc.drop.stop_iteration = cfg.t_end;
    tc.delta_t = cfg.delta_t;
    tc.t_end = cfg.t_end;
    tc.total_iterations = cfg.total_iterations;
    tc.lr0 = cfg.lr0;
    tc.lr_min = cfg.lr_min;
    tc.momentum = cfg.momentum;
    tc.batch_size = cfg.batch_size;
    tc.seed = cfg.seed;
    tc.eval_every = cfg.eval_every;
    return tc;
}

std::string metrics_csv_header(std::size_t num_layers) {
    std::string h =
        "iteration,round,train_loss,test_accuracy,exploration_rate,exploitation_degree,grad_norm_sq,"
        "global_sparsity";
    for (std::size_t i = 0; i < num_layers; ++i) h += ",layer" + std::to_string(i) + "_sparsity";
    return h + "\n";
}

std::string metrics_csv_row(const MetricsRecord& rec) {
    std::string row = std::to_string(rec.iteration) + "," + std::to_string(rec.round) + "," +
                      fmt(rec.train_loss) + "," + fmt(rec.test_accuracy) + "," +
                      fmt(rec.exploration_rate) + "," + fmt(rec.exploitation_degree) + "," +
                      fmt(rec.grad_norm_sq) + "," + fmt(rec.global_sparsity);
    for (double s : rec.per_layer_sparsity) row += "," + fmt(s);
    return row + "\n";
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records) {
    if (records.empty()) throw ContractViolation("metrics csv: no records");
    std::string text = metrics_csv_header(records.front().per_layer_sparsity.size());
    for (const auto& r : records) text += metrics_csv_row(r);
    write_text(path, text);
}

RunResult run_train(const ExperimentConfig& cfg, bool resume) {
    const fs::path dir = fs::path(cfg.out_dir) / cfg.label;
    const fs::path marker = dir / ".running";
    const fs::path summary_path = dir / "summary.json";

    RunResult result;
    result.dir = dir.string();

    if (resume && fs::exists(summary_path) && !fs::exists(marker)) {
        const json j = read_json(summary_path);
        result.final_record.test_accuracy = j.at("final_accuracy").get<double>();
        result.final_record.exploration_rate = j.at("final_exploration_rate").get<double>();
        result.final_record.train_loss = j.at("final_train_loss").get<double>();
        result.skipped = true;
        return result;
    }

    fs::create_directories(dir);
    write_text(marker, "in flight\n");

    const auto t0 = std::chrono::steady_clock::now();
    const DataBundle data = load_dataset(cfg);
    const TrainConfig tc = to_train_config(cfg);
    if (tc.net.input_dim() != data.train.dim)
        throw ConfigError("run: arch input " + std::to_string(tc.net.input_dim()) +
                          " does not match dataset dim " + std::to_string(data.train.dim));
    if (tc.net.num_classes() != data.train.num_classes)
        throw ConfigError("run: arch output " + std::to_string(tc.net.num_classes()) +
                          " does not match dataset classes " + std::to_string(data.train.num_classes));

    TrainState state;
    try {
        state = train(tc, data.train, data.test);
    } catch (const NumericError& e) {
        // leave a diagnostic next to the marker so the crashed run explains itself
        write_text(dir / "error.txt", std::string("numeric: ") + e.what() + "\n");
        throw;
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.final_record = state.metrics.back();

    write_text(dir / "config.effective", serialize_config(cfg));
    write_metrics_csv((dir / "metrics.csv").string(), state.metrics);

    Checkpoint ckpt;
    ckpt.seed = cfg.seed;
    ckpt.round = state.round;
    ckpt.iteration = state.iteration;
    ckpt.layers = state.layers;
    ckpt.biases = state.biases;
    save_checkpoint((dir / "checkpoint.ckpt").string(), ckpt);

    json summary;
    summary["label"] = cfg.label;
    summary["config_hash"] = config_hash(cfg);
    summary["seed"] = cfg.seed;
    summary["iterations"] = state.iteration;
    summary["rounds"] = state.round;
    summary["final_accuracy"] = result.final_record.test_accuracy;
    summary["final_exploration_rate"] = result.final_record.exploration_rate;
    summary["final_train_loss"] = result.final_record.train_loss;
    summary["final_grad_norm_sq"] = result.final_record.grad_norm_sq;
    summary["wall_seconds"] = result.wall_seconds;
    write_text(summary_path, summary.dump(2) + "\n");

    fs::remove(marker);
    return result;
}

std::vector<RunResult> run_repeat(const ExperimentConfig& cfg, bool resume) {
    std::vector<RunResult> results;
    if (cfg.repeat_seeds.empty()) {
        results.push_back(run_train(cfg, resume));
        return results;
    }
    for (std::uint64_t s : cfg.repeat_seeds) {
        ExperimentConfig one = cfg;
        one.seed = s;
        one.repeat_seeds.clear();
        one.label = cfg.label + "_seed" + std::to_string(s);
        results.push_back(run_train(one, resume));
    }
    return results;
}

void SweepSpec::validate() const {
    static const std::vector<std::string> allowed = {"c", "epsilon", "global_sparsity", "drop_fraction"};
    if (std::find(allowed.begin(), allowed.end(), parameter) == allowed.end())
        throw ConfigError("sweep: parameter must be one of c, epsilon, global_sparsity, drop_fraction");
    if (values.empty()) throw ConfigError("sweep: value list is empty");
    if (seeds.empty()) throw ConfigError("sweep: seed list is empty");
    for (double v : values) {
        ExperimentConfig probe = base;
        apply_override(probe, parameter, fmt(v));
        to_train_config(probe).validate(); // rejects out-of-range values
    }
}

std::string run_sweep(const SweepSpec& spec, bool resume) {
    spec.validate();
    const fs::path root = fs::path(spec.base.out_dir) / (spec.base.label + "_sweep_" + spec.parameter);
    fs::create_directories(root);

    struct Row {
        double value;
        std::uint64_t seed;
        std::string label;
    };
    std::vector<Row> rows;
    for (double v : spec.values)
        for (std::uint64_t s : spec.seeds) {
            ExperimentConfig cfg = spec.base;
            apply_override(cfg, spec.parameter, fmt(v));
            cfg.seed = s;
            cfg.out_dir = root.string();
            cfg.label = spec.parameter + "=" + fmt_label(v) + "_seed" + std::to_string(s);
            run_train(cfg, resume);
            rows.push_back({v, s, cfg.label});
        }

    // aggregate keyed by (value, seed), recomputed from the per-run files
    std::string agg = "parameter,value,seed,final_accuracy,final_exploration_rate,final_train_loss\n";
    json summary;
    summary["parameter"] = spec.parameter;
    json per_value = json::array();
    for (double v : spec.values) {
        std::vector<double> accs, rates;
        for (const auto& row : rows) {
            if (row.value != v) continue;
            const json j = read_json(root / row.label / "summary.json");
            const double acc = j.at("final_accuracy").get<double>();
            const double rate = j.at("final_exploration_rate").get<double>();
            agg += spec.parameter + "," + fmt(row.value) + "," + std::to_string(row.seed) + "," + fmt(acc) +
                   "," + fmt(rate) + "," + fmt(j.at("final_train_loss").get<double>()) + "\n";
            accs.push_back(acc);
            rates.push_back(rate);
        }
        const MeanStd acc = mean_std(accs);
        const MeanStd rate = mean_std(rates);
        json row;
        row["value"] = v;
        row["accuracy_mean"] = acc.mean;
        row["accuracy_std"] = acc.std;
        row["exploration_rate_mean"] = rate.mean;
        row["exploration_rate_std"] = rate.std;
        row["seeds"] = spec.seeds;
        per_value.push_back(row);
    }
    summary["results"] = per_value;
    write_text(root / "aggregate.csv", agg);
    write_text(root / "aggregate_summary.json", summary.dump(2) + "\n");
    return root.string();
}

std::string run_compare(const ExperimentConfig& base, const std::vector<std::string>& policies,
                        const std::vector<std::uint64_t>& seeds, bool resume) {
    if (policies.empty()) throw ConfigError("compare: policy list is empty");
    if (seeds.empty()) throw ConfigError("compare: seed list is empty");
    const fs::path root = fs::path(base.out_dir) / (base.label + "_compare");
    fs::create_directories(root);

    for (const auto& policy : policies)
        for (std::uint64_t s : seeds) {
            ExperimentConfig cfg = base;
            apply_override(cfg, "policy", policy); // throws on unknown policy
            cfg.seed = s;
            cfg.out_dir = root.string();
            cfg.label = policy + "_seed" + std::to_string(s);
            run_train(cfg, resume);
        }

    std::string csv = "policy,seed,final_accuracy,final_exploration_rate,final_train_loss\n";
    json summary = json::array();
    for (const auto& policy : policies) {
        std::vector<double> accs, rates;
        for (std::uint64_t s : seeds) {
            const json j = read_json(root / (policy + "_seed" + std::to_string(s)) / "summary.json");
            const double acc = j.at("final_accuracy").get<double>();
            const double rate = j.at("final_exploration_rate").get<double>();
            csv += policy + "," + std::to_string(s) + "," + fmt(acc) + "," + fmt(rate) + "," +
                   fmt(j.at("final_train_loss").get<double>()) + "\n";
            accs.push_back(acc);
            rates.push_back(rate);
        }
        const MeanStd acc = mean_std(accs);
        const MeanStd rate = mean_std(rates);
        json row;
        row["policy"] = policy;
        row["accuracy_mean"] = acc.mean;
        row["accuracy_std"] = acc.std;
        row["exploration_rate_mean"] = rate.mean;
        row["exploration_rate_std"] = rate.std;
        row["seeds"] = seeds;
        summary.push_back(row);
    }
    write_text(root / "compare.csv", csv);
    write_text(root / "compare_summary.json", summary.dump(2) + "\n");
    return root.string();
}

} // namespace dst
