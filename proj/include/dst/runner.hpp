#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dst/config.hpp"
#include "dst/dataset.hpp"
#include "dst/metrics.hpp"
#include "dst/trainer.hpp"

namespace dst {

// Train/test pair for whichever dataset the config selects.
struct DataBundle {
    Dataset train;
    Dataset test;
};

DataBundle load_dataset(const ExperimentConfig& cfg);

// Maps the flat experiment config onto the trainer's config.
TrainConfig to_train_config(const ExperimentConfig& cfg);

struct RunResult {
    std::string dir;
    MetricsRecord final_record;
    double wall_seconds = 0.0;
    bool skipped = false; // resume hit a completed run
};

// Executes one training run and writes its artifacts under
// <out_dir>/<label>/: config.effective, metrics.csv, summary.json,
// checkpoint.ckpt. A .running marker exists while the run is in flight so
// crashes are detectable; with resume=true a completed run is skipped.
RunResult run_train(const ExperimentConfig& cfg, bool resume = false);

// One run per entry of repeat_seeds (labels <label>_seed<N>); falls back to
// a single run with cfg.seed when the list is empty.
std::vector<RunResult> run_repeat(const ExperimentConfig& cfg, bool resume = false);

struct SweepSpec {
    std::string parameter; // c | epsilon | global_sparsity | drop_fraction
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
    ExperimentConfig base;

    void validate() const;
};

// One run per (value, seed) plus aggregate.csv keyed by both and an
// aggregate_summary.json with mean/std per value.
std::string run_sweep(const SweepSpec& spec, bool resume = false);

// Each policy on identical seeds and data order; emits compare.csv and a
// side-by-side compare_summary.json (mean and std over seeds).
std::string run_compare(const ExperimentConfig& base, const std::vector<std::string>& policies,
                        const std::vector<std::uint64_t>& seeds, bool resume = false);

// The exact metrics file layout (header pinned by the schema contract).
std::string metrics_csv_header(std::size_t num_layers);
std::string metrics_csv_row(const MetricsRecord& rec);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& records);

} // namespace dst
