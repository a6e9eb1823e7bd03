// betagan: experiment runner for annealed adversarial training.
//
// Subcommands:
//   synth   write a synthetic dataset (CSV + sidecar spec)
//   train   run one training experiment and dump all artifacts
//   eval    score a sample file against a dataset sidecar
//   sweep   run seed replicas of one experiment
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 training
// fault, 1 anything else. BETAGAN_LOG={error|info|debug} controls verbosity.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "betagan/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitTraining = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string mode;
    std::int64_t seed = -1;  // <0: keep the config's seed

    betagan::ExperimentConfig load() const {
        betagan::KvMap kv = config_path.empty() ? betagan::KvMap()
                                                : betagan::KvMap::load(config_path);
        if (seed >= 0) kv.set("seed", static_cast<long long>(seed));
        if (!mode.empty()) kv.set("mode", mode);
        return betagan::ExperimentConfig::from_kv(kv);
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_mode = true) {
    cmd->add_option("--config", args.config_path, "experiment config (key = value file)");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_dir, "output directory");
    if (with_mode)
        cmd->add_option("--mode", args.mode, "beta_gan or vanilla (overrides config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"annealed adversarial training lab"};
    app.require_subcommand(1);

    CommonArgs synth_args, train_args, sweep_args;
    std::string eval_samples, eval_sidecar, eval_out = "out";
    std::size_t sweep_replicas = 10, sweep_jobs = 1;

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset");
    add_common(synth, synth_args, false);

    CLI::App* train = app.add_subcommand("train", "run one training experiment");
    add_common(train, train_args);

    CLI::App* eval = app.add_subcommand("eval", "score samples against a dataset spec");
    eval->add_option("samples", eval_samples, "sample CSV")->required();
    eval->add_option("spec", eval_sidecar, "dataset sidecar (.spec.kv)")->required();
    eval->add_option("--out", eval_out, "output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "run seed replicas");
    add_common(sweep, sweep_args);
    sweep->add_option("--replicas", sweep_replicas, "number of seeds");
    sweep->add_option("--jobs", sweep_jobs, "concurrent replicas");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            betagan::cmd_synth(synth_args.load(), synth_args.out_dir);
        } else if (train->parsed()) {
            betagan::cmd_train(train_args.load(), train_args.out_dir);
        } else if (eval->parsed()) {
            betagan::cmd_eval(eval_samples, eval_sidecar, eval_out);
        } else if (sweep->parsed()) {
            betagan::cmd_sweep(sweep_args.load(), sweep_args.out_dir, sweep_replicas,
                               sweep_jobs);
        }
    } catch (const betagan::TrainingFault& e) {
        betagan::log_error(std::string("training fault: ") + e.what());
        return kExitTraining;
    } catch (const betagan::IoError& e) {
        betagan::log_error(std::string("i/o error: ") + e.what());
        return kExitIo;
    } catch (const betagan::ParseError& e) {
        betagan::log_error(std::string("parse error: ") + e.what());
        return kExitConfig;
    } catch (const betagan::ConstraintError& e) {
        betagan::log_error(std::string("config error: ") + e.what());
        return kExitConfig;
    } catch (const betagan::ContractError& e) {
        betagan::log_error(std::string("config error: ") + e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        betagan::log_error(e.what());
        return kExitOther;
    }
    return kExitOk;
}
