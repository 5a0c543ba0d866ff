#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dst/checkpoint.hpp"
#include "dst/config.hpp"
#include "dst/error.hpp"
#include "dst/runner.hpp"
#include "dst/trainer.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

dst::ExperimentConfig load_with_overrides(const std::string& config_path,
                                          const std::vector<std::string>& sets) {
    dst::ExperimentConfig cfg = dst::load_config(config_path);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw dst::ConfigError("--set expects key=value, got '" + kv + "'");
        dst::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic sparse training engine"};
    app.require_subcommand(1);

    std::string config_path, out_dir, label, checkpoint_path, data_dir;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    bool seed_given = false, resume = false;

    // train
    auto* train_cmd = app.add_subcommand("train", "run one training experiment");
    train_cmd->add_option("--config", config_path, "config file")->required();
    train_cmd->add_option("--seed", seed, "master seed override");
    train_cmd->add_option("--out", out_dir, "output directory override");
    train_cmd->add_option("--label", label, "run label override");
    train_cmd->add_option("--set", sets, "key=value config override (repeatable)");
    train_cmd->add_flag("--resume", resume, "skip the run if it already completed");

    // eval
    std::string eval_dataset = "mnist";
    std::int64_t synth_n = 2000, synth_classes = 4, synth_dim = 16;
    double synth_noise = 0.3;
    std::uint64_t synth_seed = 1;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval_cmd->add_option("--dataset", eval_dataset, "mnist | synthetic_blobs | synthetic_moons");
    eval_cmd->add_option("--data-dir", data_dir, "directory with the IDX files (mnist)");
    eval_cmd->add_option("--synth-n", synth_n, "synthetic sample count");
    eval_cmd->add_option("--synth-classes", synth_classes, "synthetic class count");
    eval_cmd->add_option("--synth-dim", synth_dim, "synthetic dimension");
    eval_cmd->add_option("--synth-noise", synth_noise, "synthetic noise level");
    eval_cmd->add_option("--synth-seed", synth_seed, "synthetic generator seed");

    // sweep
    std::string param, values_str, seeds_str;
    auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep over one parameter");
    sweep_cmd->add_option("--config", config_path, "config file")->required();
    sweep_cmd->add_option("--param", param, "c | epsilon | global_sparsity | drop_fraction")->required();
    sweep_cmd->add_option("--values", values_str, "comma-separated values")->required();
    sweep_cmd->add_option("--seeds", seeds_str, "comma-separated master seeds")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory override");
    sweep_cmd->add_option("--set", sets, "key=value config override (repeatable)");
    sweep_cmd->add_flag("--resume", resume, "skip runs that already completed");

    // compare
    std::string policies_str;
    auto* compare_cmd = app.add_subcommand("compare", "run several growth policies side by side");
    compare_cmd->add_option("--config", config_path, "config file")->required();
    compare_cmd->add_option("--policies", policies_str, "comma-separated policies")->required();
    compare_cmd->add_option("--seeds", seeds_str, "comma-separated master seeds")->required();
    compare_cmd->add_option("--out", out_dir, "output directory override");
    compare_cmd->add_option("--set", sets, "key=value config override (repeatable)");
    compare_cmd->add_flag("--resume", resume, "skip runs that already completed");

    try {
        app.parse(argc, argv);
        seed_given = train_cmd->count("--seed") > 0;

        if (*train_cmd) {
            dst::ExperimentConfig cfg = load_with_overrides(config_path, sets);
            if (seed_given) {
                cfg.seed = seed;
                cfg.repeat_seeds.clear();
            }
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (!label.empty()) cfg.label = label;
            for (const auto& result : dst::run_repeat(cfg, resume))
                std::printf("%s %s accuracy %.17g exploration_rate %.17g\n",
                            result.skipped ? "skipped" : "completed", result.dir.c_str(),
                            result.final_record.test_accuracy, result.final_record.exploration_rate);
        } else if (*eval_cmd) {
            const dst::Checkpoint ckpt = dst::load_checkpoint(checkpoint_path);
            dst::ExperimentConfig dcfg;
            dst::apply_override(dcfg, "dataset", eval_dataset);
            if (!data_dir.empty()) dcfg.data_dir = data_dir;
            dcfg.synth_n = synth_n;
            dcfg.synth_classes = synth_classes;
            dcfg.synth_dim = synth_dim;
            dcfg.synth_noise = synth_noise;
            dcfg.seed = synth_seed;
            const dst::DataBundle data = dst::load_dataset(dcfg);
            const double acc = dst::evaluate(ckpt.spec(), ckpt.layers, ckpt.biases, data.test);
            std::printf("accuracy %.17g\n", acc);
        } else if (*sweep_cmd) {
            dst::SweepSpec spec;
            spec.base = load_with_overrides(config_path, sets);
            if (!out_dir.empty()) spec.base.out_dir = out_dir;
            spec.parameter = param;
            for (const auto& v : split_csv(values_str)) spec.values.push_back(std::stod(v));
            for (const auto& s : split_csv(seeds_str)) spec.seeds.push_back(std::stoull(s));
            const std::string root = dst::run_sweep(spec, resume);
            std::printf("sweep written to %s\n", root.c_str());
        } else if (*compare_cmd) {
            dst::ExperimentConfig base = load_with_overrides(config_path, sets);
            if (!out_dir.empty()) base.out_dir = out_dir;
            std::vector<std::uint64_t> seeds_list;
            for (const auto& s : split_csv(seeds_str)) seeds_list.push_back(std::stoull(s));
            const std::string root = dst::run_compare(base, split_csv(policies_str), seeds_list, resume);
            std::printf("comparison written to %s\n", root.c_str());
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const dst::ConfigError& e) {
        std::fprintf(stderr, "ERROR config: %s\n", e.what());
        return 2;
    } catch (const dst::FormatError& e) {
        std::fprintf(stderr, "ERROR format: %s\n", e.what());
        return 3;
    } catch (const dst::NumericError& e) {
        std::fprintf(stderr, "ERROR numeric: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ERROR internal: %s\n", e.what());
        return 1;
    }
}
