#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dst/policy.hpp"
#include "dst/sparsity.hpp"
#include "dst/tensor.hpp"

namespace dst {

enum class DatasetKind { mnist, synthetic_blobs, synthetic_moons };

// Everything a run needs, as a flat key=value config. CLI flags override
// file values; the effective config is written alongside the outputs.
struct ExperimentConfig {
    // dataset
    DatasetKind dataset = DatasetKind::mnist;
    std::string data_dir = "data/mnist";
    i64 synth_n = 2000;
    i64 synth_classes = 4;
    i64 synth_dim = 16;
    double synth_noise = 0.3;

    // model
    std::vector<i64> arch = {784, 300, 100, 10};
    bool bias = true;

    // sparsity
    double global_sparsity = 0.9;
    Allocation allocation = Allocation::erk;
    CounterInit counter_init = CounterInit::mask;

    // growth policy
    GrowthPolicy::Kind policy = GrowthPolicy::Kind::acquisition_ee;
    double c = 0.1;
    double epsilon = 1.0;
    bool signed_scores = false;

    // drop schedule
    double drop_fraction = 0.3;
    DropSchedule::Mode drop_schedule = DropSchedule::Mode::cosine;

    // training schedule
    i64 delta_t = 100;
    i64 t_end = 10000;
    i64 total_iterations = 10000;

    // optimizer
    double lr0 = 0.1;
    double lr_min = 0.0;
    double momentum = 0.9;
    i64 batch_size = 128;

    // run
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> repeat_seeds; // when set, one run per seed
    i64 eval_every = 100;
    std::string label = "run";
    std::string out_dir = "out";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parses the flat key=value format ('#' starts a comment, blank lines
// ignored). Unknown keys are rejected.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Applies one "key=value" override.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Serializes every key; parse(serialize(cfg)) == cfg.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a of the serialized config, reported in run summaries.
std::uint64_t config_hash(const ExperimentConfig& cfg);

std::string dataset_kind_name(DatasetKind k);

} // namespace dst
