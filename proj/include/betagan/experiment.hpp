#pragma once

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "betagan/config.hpp"
#include "betagan/dataset.hpp"
#include "betagan/diagnostics.hpp"
#include "betagan/errors.hpp"
#include "betagan/synthetic.hpp"
#include "betagan/trainer.hpp"

namespace betagan {

// --- logging ---------------------------------------------------------------

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("BETAGAN_LOG");
        if (!env) return LogLevel::Info;
        const std::string v(env);
        if (v == "error") return LogLevel::Error;
        if (v == "info") return LogLevel::Info;
        if (v == "debug") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

inline void log_line(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    const char* tag = level == LogLevel::Error ? "error"
                      : level == LogLevel::Info ? "info"
                                                : "debug";
    std::fprintf(stderr, "[betagan %s] %s\n", tag, message.c_str());
}

inline void log_error(const std::string& m) { log_line(LogLevel::Error, m); }
inline void log_info(const std::string& m) { log_line(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_line(LogLevel::Debug, m); }

// --- evaluation fixtures -----------------------------------------------------
//
// The paper reports coverage only visually; these thresholds make the claims
// testable and live here so the algorithms stay threshold-free.

inline constexpr double kCoverageRadiusSigmas = 3.0;
inline constexpr double kCoverageThreshold = 0.02;
inline constexpr double kWireframeToleranceNoiseUnits = 5.0;

// --- dataset realization ----------------------------------------------------

struct RealizedDataset {
    Tensor raw;       // as sampled / loaded, before rescaling
    Dataset data;     // rescaled into the box
    AffineMap map;    // raw -> box coordinates
};

inline RealizedDataset realize_dataset(const ExperimentConfig& cfg) {
    Tensor raw(1, 1);
    if (cfg.dataset.kind == DatasetKind::Mog) {
        Rng rng(cfg.dataset.seed);
        raw = sample_mog(mog_fixture(cfg.dataset.modes), cfg.dataset.n, rng);
    } else if (cfg.dataset.kind == DatasetKind::Cubes) {
        Rng rng(cfg.dataset.seed);
        raw = sample_nested_cubes(cfg.dataset.cubes, cfg.dataset.n, rng);
    } else {
        raw = load_points_csv(cfg.dataset.path);
    }
    RealizedDataset out{raw, rescale_dataset(raw, cfg.box), rescale_map(raw, cfg.box)};
    return out;
}

// --- dataset sidecar ---------------------------------------------------------
//
// Written next to every dataset CSV. Records the generating spec and the
// realized rescale map so evaluation can recover raw coordinates.

inline std::string join_doubles(const std::vector<double>& xs) {
    std::ostringstream out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out << ',';
        out << format_double(xs[i]);
    }
    return out.str();
}

inline KvMap dataset_sidecar(const ExperimentConfig& cfg, const AffineMap& map) {
    KvMap kv;
    kv.set("kind", dataset_kind_name(cfg.dataset.kind));
    kv.set("n", cfg.dataset.n);
    kv.set("box.low", cfg.box.low);
    kv.set("box.high", cfg.box.high);
    kv.set("box.dim", cfg.box.dim);
    if (cfg.dataset.kind == DatasetKind::Mog) {
        const MixtureSpec mog = mog_fixture(cfg.dataset.modes);
        kv.set("modes", mog.components());
        kv.set("sigma", cfg.dataset.sigma);
        kv.set("weights", join_doubles(mog.weights));
        for (std::size_t c = 0; c < mog.components(); ++c)
            kv.set("center." + std::to_string(c), join_doubles(mog.centers[c]));
    } else if (cfg.dataset.kind == DatasetKind::Cubes) {
        kv.set("outer", cfg.dataset.cubes.outer_half_width);
        kv.set("inner", cfg.dataset.cubes.inner_half_width);
        kv.set("edge_noise", cfg.dataset.cubes.edge_noise);
    }
    kv.set("rescale.min", join_doubles(map.src_min));
    kv.set("rescale.max", join_doubles(map.src_max));
    return kv;
}

struct EvalTargets {
    DatasetKind kind = DatasetKind::Csv;
    BoxDomain box{-1.0, 1.0, 3};
    AffineMap map;
    std::optional<MixtureSpec> mog;
    std::optional<CubesSpec> cubes;
};

inline EvalTargets parse_sidecar(const KvMap& kv) {
    EvalTargets t;
    const std::string kind = kv.get("kind");
    t.box = BoxDomain(kv.get_double("box.low"), kv.get_double("box.high"),
                      kv.get_count("box.dim"));
    t.map.src_min = kv.get_double_list("rescale.min");
    t.map.src_max = kv.get_double_list("rescale.max");
    t.map.dst_low = t.box.low;
    t.map.dst_high = t.box.high;
    if (t.map.src_min.size() != t.box.dim || t.map.src_max.size() != t.box.dim)
        throw ConstraintError("sidecar: rescale map does not match box dimension");
    if (kind == "mog") {
        t.kind = DatasetKind::Mog;
        MixtureSpec mog;
        const std::size_t modes = kv.get_count("modes");
        mog.sigma = kv.get_double("sigma");
        mog.weights = kv.get_double_list("weights");
        for (std::size_t c = 0; c < modes; ++c)
            mog.centers.push_back(kv.get_double_list("center." + std::to_string(c)));
        mog.validate();
        t.mog = mog;
    } else if (kind == "cubes") {
        t.kind = DatasetKind::Cubes;
        CubesSpec cubes{kv.get_double("outer"), kv.get_double("inner"),
                        kv.get_double("edge_noise")};
        cubes.validate();
        t.cubes = cubes;
    } else if (kind == "csv") {
        t.kind = DatasetKind::Csv;
    } else {
        throw ConstraintError("sidecar: unknown kind '" + kind + "'");
    }
    return t;
}

// --- experiment pipeline ------------------------------------------------------

struct ExperimentOutcome {
    bool pretrain_converged = true;
    std::size_t pretrain_steps = 0;
    TrainingTrace trace;
    Mlp generator;
    Mlp discriminator;
    RealizedDataset dataset;
};

/// End-to-end run per the experiment config: uniform pretraining plus the
/// annealed loop in beta_gan mode, or the tau-matched single-stage baseline
/// in vanilla mode. The callback fires after every annealing stage.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                        const StageCallback& on_stage = {}) {
    cfg.validate();
    RealizedDataset realized = realize_dataset(cfg);

    const Rng root(cfg.trainer.seed);
    Mlp g_net = build_mlp(cfg.generator_spec(), root.fork(1).seed());
    Mlp d_net = build_mlp(cfg.discriminator_spec(), root.fork(2).seed());
    Rng train_rng = root.fork(3);

    validate_pairing(g_net, LatentPrior(cfg.prior_dim), cfg.box);

    TrainingTrace trace;
    bool converged = true;
    std::size_t pretrain_steps = 0;

    if (cfg.mode == BaselineMode::BetaGan) {
        log_info("pretraining toward the uniform distribution (budget " +
                 std::to_string(cfg.trainer.n_pretrain) + " steps)");
        const PretrainOutcome pre =
            pretrain_uniform(g_net, d_net, cfg.box, cfg.trainer, train_rng, trace);
        converged = pre.converged;
        pretrain_steps = pre.steps;
        log_info("pretraining " + std::string(pre.converged ? "converged" : "did not converge") +
                 " after " + std::to_string(pre.steps) + " steps");
        run_annealed(g_net, d_net, realized.data, cfg.schedule(), cfg.trainer, train_rng,
                     trace, on_stage);
    } else {
        const std::size_t total = cfg.resolved_vanilla_steps();
        log_info("vanilla baseline for " + std::to_string(total) + " steps");
        run_vanilla_baseline(g_net, d_net, realized.data, cfg.trainer, total, train_rng,
                             trace, on_stage);
    }

    return ExperimentOutcome{converged, pretrain_steps, std::move(trace),
                             std::move(g_net), std::move(d_net), std::move(realized)};
}

// --- subcommands ---------------------------------------------------------------

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

/// synth: dataset CSV plus its sidecar spec.
inline void cmd_synth(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    if (cfg.dataset.kind == DatasetKind::Csv)
        throw ConstraintError("synth: dataset.kind must be mog or cubes");
    ensure_directory(out_dir);
    const RealizedDataset realized = realize_dataset(cfg);
    save_points_csv(realized.raw, out_dir / "dataset.csv");
    dataset_sidecar(cfg, realized.map).save(out_dir / "dataset.spec.kv");
    log_info("wrote " + std::to_string(realized.raw.rows()) + " points to " +
             (out_dir / "dataset.csv").string());
}

inline std::string stage_file_tag(std::size_t stage_index, InverseTemperature beta) {
    if (beta.is_infinite()) return "final";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "stage_%02zu", stage_index);
    return buf;
}

/// train: manifest, dataset + sidecar, trace CSV, and per-stage sample dumps
/// and checkpoints.
inline ExperimentOutcome cmd_train(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_directory(out_dir);
    cfg.to_kv().save(out_dir / "manifest.kv");

    Rng dump_rng = Rng(cfg.trainer.seed).fork(4);
    const LatentPrior prior(cfg.prior_dim);
    const auto dump_samples = [&](const Mlp& g_net, const std::string& tag) {
        const Tensor samples =
            forward_generator(g_net, prior.sample(cfg.sample_dump, dump_rng));
        save_points_csv(samples, out_dir / ("samples_" + tag + ".csv"));
    };

    const StageCallback on_stage = [&](std::size_t stage_index, InverseTemperature beta,
                                       const Mlp& g_net, const Mlp& d_net) {
        const std::string tag = stage_file_tag(stage_index, beta);
        dump_samples(g_net, tag);
        save_checkpoint(g_net, out_dir / ("generator_" + tag + ".ckpt"));
        save_checkpoint(d_net, out_dir / ("discriminator_" + tag + ".ckpt"));
        log_debug("stage " + tag + " artifacts written");
    };

    ExperimentOutcome outcome = run_experiment(cfg, on_stage);

    save_points_csv(outcome.dataset.raw, out_dir / "dataset.csv");
    dataset_sidecar(cfg, outcome.dataset.map).save(out_dir / "dataset.spec.kv");
    outcome.trace.write_csv(out_dir / "trace.csv");

    KvMap result;
    result.set("pretrain.converged", outcome.pretrain_converged ? "true" : "false");
    result.set("pretrain.steps", outcome.pretrain_steps);
    result.set("tau", static_cast<long long>(outcome.trace.final_tau()));
    result.set("generator_loss", outcome.trace.generator_loss);
    result.save(out_dir / "result.kv");
    log_info("trace with " + std::to_string(outcome.trace.records.size()) +
             " records written to " + (out_dir / "trace.csv").string());
    return outcome;
}

/// eval: scores a sample CSV against a dataset sidecar. Writes report.kv and
/// a per-mode fraction CSV.
inline KvMap cmd_eval(const std::filesystem::path& samples_path,
                      const std::filesystem::path& sidecar_path,
                      const std::filesystem::path& out_dir) {
    const Tensor samples = load_points_csv(samples_path);
    const EvalTargets targets = parse_sidecar(KvMap::load(sidecar_path));
    ensure_directory(out_dir);

    KvMap report;
    report.set("samples", samples.rows());
    report.set("kind", dataset_kind_name(targets.kind));

    const UniformityScore uniformity = uniformity_score(samples, targets.box);
    report.set("uniformity.ks", join_doubles(uniformity.ks_per_dim));
    report.set("uniformity.max_ks", uniformity.max_ks());
    report.set("uniformity.max_abs_correlation", uniformity.max_abs_correlation);
    report.set("frozen_noise_score", frozen_noise_score(samples, targets.box));

    std::ofstream fractions(out_dir / "mode_fractions.csv");
    if (!fractions) throw IoError("cannot write " + (out_dir / "mode_fractions.csv").string());
    fractions << "mode,fraction\n";

    if (targets.kind == DatasetKind::Mog) {
        const Tensor raw_samples = targets.map.invert(samples);
        const double radius = kCoverageRadiusSigmas * targets.mog->sigma;
        const ModeCoverageReport coverage =
            mode_coverage(raw_samples, targets.mog->centers, radius, kCoverageThreshold);
        report.set("coverage.radius", radius);
        report.set("coverage.threshold", kCoverageThreshold);
        report.set("coverage.total_modes", coverage.total_modes);
        report.set("coverage.covered", coverage.covered_count);
        for (std::size_t c = 0; c < coverage.fractions.size(); ++c)
            fractions << c << ',' << format_double(coverage.fractions[c]) << '\n';
    } else if (targets.kind == DatasetKind::Cubes) {
        const Tensor raw_samples = targets.map.invert(samples);
        const std::vector<Segment> outer = cube_edges(targets.cubes->outer_half_width);
        const std::vector<Segment> inner = cube_edges(targets.cubes->inner_half_width);
        const double tolerance = kWireframeToleranceNoiseUnits * targets.cubes->edge_noise;
        std::size_t within = 0, outer_count = 0;
        for (std::size_t i = 0; i < raw_samples.rows(); ++i) {
            const std::array<double, 3> p{raw_samples.at(i, 0), raw_samples.at(i, 1),
                                          raw_samples.at(i, 2)};
            const double d_outer = distance_to_wireframe(p, outer);
            const double d_inner = distance_to_wireframe(p, inner);
            if (std::min(d_outer, d_inner) <= tolerance) ++within;
            if (d_outer <= d_inner) ++outer_count;
        }
        const double n = static_cast<double>(raw_samples.rows());
        report.set("wireframe.tolerance", tolerance);
        report.set("wireframe.within_fraction", static_cast<double>(within) / n);
        const double outer_fraction = static_cast<double>(outer_count) / n;
        report.set("wireframe.outer_fraction", outer_fraction);
        report.set("wireframe.inner_fraction", 1.0 - outer_fraction);
        fractions << "0," << format_double(outer_fraction) << '\n';
        fractions << "1," << format_double(1.0 - outer_fraction) << '\n';
    }
    if (!fractions) throw IoError("write failed for mode_fractions.csv");

    report.save(out_dir / "report.kv");
    return report;
}

/// sweep: seed replicas in isolated subdirectories, optionally in parallel.
inline void cmd_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                      std::size_t replicas, std::size_t jobs) {
    if (replicas < 1) throw ContractError("sweep: replicas must be >= 1");
    cfg.validate();
    ensure_directory(out_dir);

    std::vector<std::string> rows(replicas);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= replicas || failed.load()) break;
            ExperimentConfig replica = cfg;
            replica.trainer.seed = cfg.trainer.seed + i;
            const std::filesystem::path dir = out_dir / ("seed_" + std::to_string(i));
            try {
                const ExperimentOutcome outcome = cmd_train(replica, dir);
                std::ostringstream row;
                row << replica.trainer.seed << ','
                    << (outcome.pretrain_converged ? "true" : "false") << ','
                    << outcome.pretrain_steps << ',' << outcome.trace.final_tau();
                rows[i] = row.str();
            } catch (const std::exception& e) {
                std::scoped_lock lock(failure_mutex);
                failed.store(true);
                failure_message = e.what();
                return;
            }
        }
    };

    const std::size_t thread_count = std::max<std::size_t>(1, std::min(jobs, replicas));
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (failed.load()) throw Error("sweep replica failed: " + failure_message);

    std::ofstream summary(out_dir / "summary.csv");
    if (!summary) throw IoError("cannot write " + (out_dir / "summary.csv").string());
    summary << "seed,pretrain_converged,pretrain_steps,tau\n";
    for (const std::string& row : rows) summary << row << '\n';
}

}  // namespace betagan
