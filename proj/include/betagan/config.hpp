#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "betagan/domain.hpp"
#include "betagan/errors.hpp"
#include "betagan/kv.hpp"
#include "betagan/network.hpp"
#include "betagan/schedule.hpp"
#include "betagan/synthetic.hpp"
#include "betagan/trainer.hpp"

namespace betagan {

enum class DatasetKind { Mog, Cubes, Csv };

inline const char* dataset_kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::Mog: return "mog";
        case DatasetKind::Cubes: return "cubes";
        case DatasetKind::Csv: return "csv";
    }
    return "?";
}

struct DatasetConfig {
    DatasetKind kind = DatasetKind::Mog;
    std::size_t n = 10000;
    std::uint64_t seed = 1234;
    // mog
    std::size_t modes = 5;
    double sigma = 0.05;
    // cubes
    CubesSpec cubes = cubes_fixture();
    // csv
    std::string path;
};

/// Everything one experiment needs, resolved against defaults. Serializing it
/// back out (the manifest) reproduces the run exactly.
struct ExperimentConfig {
    BaselineMode mode = BaselineMode::BetaGan;
    BoxDomain box{-1.0, 1.0, 3};
    DatasetConfig dataset;
    std::vector<std::size_t> generator_hidden{128, 128};
    Activation generator_hidden_activation = Activation::Relu;
    bool generator_allow_smooth = false;
    std::vector<std::size_t> discriminator_hidden{128, 128, 128};
    Activation discriminator_hidden_activation = Activation::Tanh;
    std::size_t prior_dim = 3;
    double beta1 = 0.1;
    double betaK = 10.0;
    std::size_t cooling_steps = 20;  // K
    TrainerConfig trainer;
    std::size_t vanilla_total_steps = 0;  // 0: n_pretrain + K*n + n_final
    std::size_t sample_dump = 10000;      // rows per stage snapshot

    MlpSpec generator_spec() const {
        MlpSpec spec;
        spec.input_dim = prior_dim;
        spec.role = Role::Generator;
        spec.allow_smooth_hidden = generator_allow_smooth;
        for (std::size_t width : generator_hidden)
            spec.layers.push_back(LayerSpec{width, generator_hidden_activation});
        spec.layers.push_back(LayerSpec{box.dim, Activation::Linear});
        return spec;
    }

    MlpSpec discriminator_spec() const {
        MlpSpec spec;
        spec.input_dim = box.dim;
        spec.role = Role::Discriminator;
        for (std::size_t width : discriminator_hidden)
            spec.layers.push_back(LayerSpec{width, discriminator_hidden_activation});
        spec.layers.push_back(LayerSpec{1, Activation::Sigmoid});
        return spec;
    }

    AnnealingSchedule schedule() const { return make_schedule(beta1, betaK, cooling_steps); }

    std::size_t resolved_vanilla_steps() const {
        return vanilla_total_steps > 0
                   ? vanilla_total_steps
                   : trainer.n_pretrain + cooling_steps * trainer.n + trainer.n_final;
    }

    /// Cross-field checks: specs validate, the pairing holds, the schedule is
    /// well formed.
    void validate() const {
        trainer.validate();
        const MlpSpec g = generator_spec();
        g.validate();
        discriminator_spec().validate();
        (void)schedule();
        if (prior_dim < box.dim)
            throw ConstraintError("config: prior dim " + std::to_string(prior_dim) +
                                  " < ambient dim " + std::to_string(box.dim) +
                                  " (dim(z) >= d is required)");
        if (dataset.kind == DatasetKind::Mog) {
            const MixtureSpec mog = mog_fixture(dataset.modes);
            if (mog.dim() != box.dim)
                throw ConstraintError("config: mog fixture dimension " +
                                      std::to_string(mog.dim()) + " vs box dim " +
                                      std::to_string(box.dim));
        }
        if (dataset.kind == DatasetKind::Cubes && box.dim != 3)
            throw ConstraintError("config: cubes dataset needs a 3-dimensional box");
        if (dataset.kind == DatasetKind::Csv && dataset.path.empty())
            throw ConstraintError("config: dataset.kind=csv requires dataset.path");
        if (dataset.n < 1) throw ConstraintError("config: dataset.n must be >= 1");
        if (sample_dump < 1) throw ConstraintError("config: sample_dump must be >= 1");
    }

    static ExperimentConfig from_kv(const KvMap& kv) {
        ExperimentConfig cfg;
        cfg.mode = parse_baseline_mode(kv.get_or("mode", "beta_gan"));
        const double low = kv.get_double_or("box.low", -1.0);
        const double high = kv.get_double_or("box.high", 1.0);
        const std::size_t dim = kv.get_count_or("box.dim", 3);
        cfg.box = BoxDomain(low, high, dim);

        const std::string kind = kv.get_or("dataset.kind", "mog");
        if (kind == "mog") cfg.dataset.kind = DatasetKind::Mog;
        else if (kind == "cubes") cfg.dataset.kind = DatasetKind::Cubes;
        else if (kind == "csv") cfg.dataset.kind = DatasetKind::Csv;
        else throw ConstraintError("dataset.kind must be mog|cubes|csv, got '" + kind + "'");
        cfg.dataset.n = kv.get_count_or("dataset.n", 10000);
        cfg.dataset.seed = static_cast<std::uint64_t>(kv.get_int_or("dataset.seed", 1234));
        cfg.dataset.modes = kv.get_count_or("dataset.modes", 5);
        cfg.dataset.sigma = kv.get_double_or("dataset.sigma", 0.05);
        cfg.dataset.cubes.outer_half_width = kv.get_double_or("dataset.outer", 0.9);
        cfg.dataset.cubes.inner_half_width = kv.get_double_or("dataset.inner", 0.45);
        cfg.dataset.cubes.edge_noise = kv.get_double_or("dataset.edge_noise", 0.01);
        cfg.dataset.path = kv.get_or("dataset.path", "");

        if (kv.contains("generator.hidden"))
            cfg.generator_hidden = kv.get_count_list("generator.hidden");
        cfg.generator_hidden_activation =
            parse_activation(kv.get_or("generator.hidden_activation", "relu"));
        cfg.generator_allow_smooth = kv.get_bool_or("generator.allow_smooth_hidden", false);
        if (kv.contains("discriminator.hidden"))
            cfg.discriminator_hidden = kv.get_count_list("discriminator.hidden");
        cfg.discriminator_hidden_activation =
            parse_activation(kv.get_or("discriminator.hidden_activation", "tanh"));
        cfg.prior_dim = kv.get_count_or("prior.dim", cfg.box.dim);

        cfg.beta1 = kv.get_double_or("schedule.beta1", 0.1);
        cfg.betaK = kv.get_double_or("schedule.betaK", 10.0);
        cfg.cooling_steps = kv.get_count_or("schedule.K", 20);

        cfg.trainer.m = kv.get_count_or("trainer.m", 64);
        cfg.trainer.n = kv.get_count_or("trainer.n", 200);
        cfg.trainer.n_pretrain = kv.get_count_or("trainer.n_pretrain", 20000);
        cfg.trainer.n_final = kv.get_count_or("trainer.n_final", cfg.trainer.n);
        cfg.trainer.lr_d = kv.get_double_or("trainer.lr_d", 0.1);
        cfg.trainer.lr_g = kv.get_double_or("trainer.lr_g", 0.1);
        cfg.trainer.momentum = kv.get_double_or("trainer.momentum", 0.0);
        cfg.trainer.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 1));
        cfg.trainer.baseline_mode = cfg.mode;
        cfg.trainer.pretrain_check_interval =
            kv.get_count_or("trainer.check_interval", 250);
        cfg.vanilla_total_steps = kv.get_count_or("vanilla.total_steps", 0);
        cfg.sample_dump = kv.get_count_or("sample_dump", 10000);

        cfg.validate();
        return cfg;
    }

    /// The resolved manifest: every field, defaults included.
    KvMap to_kv() const {
        KvMap kv;
        kv.set("mode", baseline_mode_name(mode));
        kv.set("box.low", box.low);
        kv.set("box.high", box.high);
        kv.set("box.dim", box.dim);
        kv.set("dataset.kind", dataset_kind_name(dataset.kind));
        kv.set("dataset.n", dataset.n);
        kv.set("dataset.seed", static_cast<long long>(dataset.seed));
        if (dataset.kind == DatasetKind::Mog) {
            kv.set("dataset.modes", dataset.modes);
            kv.set("dataset.sigma", dataset.sigma);
        } else if (dataset.kind == DatasetKind::Cubes) {
            kv.set("dataset.outer", dataset.cubes.outer_half_width);
            kv.set("dataset.inner", dataset.cubes.inner_half_width);
            kv.set("dataset.edge_noise", dataset.cubes.edge_noise);
        } else {
            kv.set("dataset.path", dataset.path);
        }
        kv.set("generator.hidden", join_counts(generator_hidden));
        kv.set("generator.hidden_activation", activation_name(generator_hidden_activation));
        kv.set("generator.allow_smooth_hidden", generator_allow_smooth ? "true" : "false");
        kv.set("discriminator.hidden", join_counts(discriminator_hidden));
        kv.set("discriminator.hidden_activation",
               activation_name(discriminator_hidden_activation));
        kv.set("prior.dim", prior_dim);
        kv.set("schedule.beta1", beta1);
        kv.set("schedule.betaK", betaK);
        kv.set("schedule.K", cooling_steps);
        kv.set("trainer.m", trainer.m);
        kv.set("trainer.n", trainer.n);
        kv.set("trainer.n_pretrain", trainer.n_pretrain);
        kv.set("trainer.n_final", trainer.n_final);
        kv.set("trainer.lr_d", trainer.lr_d);
        kv.set("trainer.lr_g", trainer.lr_g);
        kv.set("trainer.momentum", trainer.momentum);
        kv.set("trainer.check_interval", trainer.pretrain_check_interval);
        kv.set("seed", static_cast<long long>(trainer.seed));
        kv.set("vanilla.total_steps", vanilla_total_steps);
        kv.set("sample_dump", sample_dump);
        return kv;
    }

private:
    static std::string join_counts(const std::vector<std::size_t>& xs) {
        std::ostringstream out;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) out << ',';
            out << xs[i];
        }
        return out.str();
    }
};

}  // namespace betagan
