#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "betagan/autodiff.hpp"
#include "betagan/dataset.hpp"
#include "betagan/diagnostics.hpp"
#include "betagan/domain.hpp"
#include "betagan/errors.hpp"
#include "betagan/network.hpp"
#include "betagan/rng.hpp"
#include "betagan/schedule.hpp"
#include "betagan/tempered.hpp"
#include "betagan/trace.hpp"

namespace betagan {

/// A training step produced a non-finite loss; carries the partial trace.
class TrainingFault : public Error {
public:
    TrainingFault(const std::string& message, TrainingTrace partial)
        : Error(message), trace_(std::move(partial)) {}

    const TrainingTrace& trace() const { return trace_; }

private:
    TrainingTrace trace_;
};

enum class BaselineMode { BetaGan, Vanilla };

inline const char* baseline_mode_name(BaselineMode m) {
    return m == BaselineMode::BetaGan ? "beta_gan" : "vanilla";
}

inline BaselineMode parse_baseline_mode(const std::string& name) {
    if (name == "beta_gan") return BaselineMode::BetaGan;
    if (name == "vanilla") return BaselineMode::Vanilla;
    throw ConstraintError("unknown mode '" + name + "' (expected beta_gan|vanilla)");
}

/// The annealed runs keep the plain saturating generator loss
/// log(1 - D(G(z))); the vanilla baseline uses the -log D(G(z)) heuristic.
enum class GeneratorLossKind { Saturating, NonSaturating };

inline const char* generator_loss_name(GeneratorLossKind k) {
    return k == GeneratorLossKind::Saturating ? "saturating" : "non_saturating";
}

struct TrainerConfig {
    std::size_t m = 64;           // minibatch size
    std::size_t n = 200;          // training steps per cooling stage
    std::size_t n_pretrain = 20000;
    std::size_t n_final = 200;    // steps at beta = infinity
    double lr_d = 0.1;
    double lr_g = 0.1;
    double momentum = 0.0;        // 0 = plain SGD
    std::uint64_t seed = 1;
    BaselineMode baseline_mode = BaselineMode::BetaGan;
    std::size_t pretrain_check_interval = 250;

    void validate() const {
        if (m < 1 || n < 1 || n_pretrain < 1 || n_final < 1)
            throw ConstraintError("TrainerConfig: all counts must be >= 1");
        if (!(lr_d > 0.0) || !(lr_g > 0.0))
            throw ConstraintError("TrainerConfig: learning rates must be positive");
        if (momentum < 0.0 || momentum >= 1.0)
            throw ConstraintError("TrainerConfig: momentum must lie in [0, 1)");
        if (pretrain_check_interval < 1)
            throw ConstraintError("TrainerConfig: pretrain_check_interval must be >= 1");
    }
};

// Uniform-stage convergence gates, evaluated on kEvalSampleCount generated
// samples. These pin down "generates the uniform distribution".
inline constexpr double kPretrainMaxKs = 0.05;
inline constexpr double kPretrainMaxCorrelation = 0.1;
inline constexpr double kPretrainMinFrozenNoiseScore = 0.5;
inline constexpr std::size_t kEvalSampleCount = 10000;

/// Momentum buffers for one network; plain SGD when momentum is zero.
class SgdState {
public:
    void apply(Mlp& net, const ad::Gradients& grads, const TracedMlp& traced,
               double learning_rate, double momentum, StepDirection direction) {
        auto& layers = net.layers();
        if (momentum == 0.0) {
            for (std::size_t i = 0; i < layers.size(); ++i) {
                sgd_step(layers[i].weight, grads.at(traced.weights[i]), learning_rate,
                         direction);
                sgd_step(layers[i].bias, grads.at(traced.biases[i]), learning_rate,
                         direction);
            }
            return;
        }
        if (velocity_.empty()) {
            for (const DenseLayer& layer : layers) {
                velocity_.emplace_back(layer.weight.rows(), layer.weight.cols());
                velocity_.emplace_back(layer.bias.rows(), layer.bias.cols());
            }
        }
        const double sign = direction == StepDirection::Ascend ? 1.0 : -1.0;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            update(layers[i].weight, velocity_[2 * i], grads.at(traced.weights[i]),
                   learning_rate, momentum, sign);
            update(layers[i].bias, velocity_[2 * i + 1], grads.at(traced.biases[i]),
                   learning_rate, momentum, sign);
        }
    }

private:
    static void update(Tensor& param, Tensor& velocity, const Tensor& grad, double lr,
                       double momentum, double sign) {
        double* p = param.data();
        double* v = velocity.data();
        const double* g = grad.data();
        for (std::size_t i = 0; i < param.size(); ++i) {
            v[i] = momentum * v[i] + g[i];
            p[i] += sign * lr * v[i];
        }
    }

    std::vector<Tensor> velocity_;
};

struct DiscriminatorStepStats {
    double loss;    // minibatch value of log D(x) + log(1 - D(G(z)))
    double d_real;  // mean D over the real batch
    double d_fake;  // mean D over the fake batch
};

struct GeneratorStepStats {
    double loss;
    double d_fake;
};

namespace detail {

inline double mean_sigmoid(const Tensor& logits) {
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        total += stable_sigmoid(logits.data()[i]);
    return total / static_cast<double>(logits.size());
}

}  // namespace detail

/// One ascent step on the discriminator objective
///   (1/m) sum [log D(x_i) + log(1 - D(G(z_i)))].
/// The generator only supplies the fake batch; its parameters stay untouched.
inline DiscriminatorStepStats discriminator_step(Mlp& d_net, const Mlp& g_net,
                                                 const Tensor& real_batch,
                                                 const Tensor& z_batch, double lr_d,
                                                 double momentum = 0.0,
                                                 SgdState* state = nullptr) {
    if (real_batch.rows() != z_batch.rows())
        throw ContractError("discriminator_step: real and noise batches must share m");
    const Tensor fake_batch = forward_generator(g_net, z_batch);

    ad::Tape tape;
    const TracedMlp traced = put_on_tape(tape, d_net);
    const ad::Var real_logits =
        trace_forward(tape, traced, d_net.spec(), tape.leaf(real_batch), true);
    const ad::Var fake_logits =
        trace_forward(tape, traced, d_net.spec(), tape.leaf(fake_batch), true);
    const ad::Var objective =
        tape.add(tape.mean_all(tape.log_sigmoid(real_logits)),
                 tape.mean_all(tape.log_sigmoid(tape.neg(fake_logits))));

    DiscriminatorStepStats stats;
    stats.loss = tape.value(objective).at(0, 0);
    stats.d_real = detail::mean_sigmoid(tape.value(real_logits));
    stats.d_fake = detail::mean_sigmoid(tape.value(fake_logits));
    if (!std::isfinite(stats.loss))
        throw TrainingFault("discriminator_step: non-finite loss", TrainingTrace{});

    const ad::Gradients grads = tape.backward(objective);
    SgdState local;
    (state ? *state : local)
        .apply(d_net, grads, traced, lr_d, momentum, StepDirection::Ascend);
    return stats;
}

/// One descent step on the generator loss. Gradients flow through the frozen
/// discriminator into the generator parameters only.
inline GeneratorStepStats generator_step(const Mlp& d_net, Mlp& g_net,
                                         const Tensor& z_batch, double lr_g,
                                         GeneratorLossKind loss_kind,
                                         double momentum = 0.0,
                                         SgdState* state = nullptr) {
    ad::Tape tape;
    const TracedMlp traced_g = put_on_tape(tape, g_net);
    const TracedMlp traced_d = put_on_tape(tape, d_net);
    const ad::Var fake =
        trace_forward(tape, traced_g, g_net.spec(), tape.leaf(z_batch), false);
    const ad::Var fake_logits = trace_forward(tape, traced_d, d_net.spec(), fake, true);

    ad::Var objective;
    if (loss_kind == GeneratorLossKind::Saturating) {
        // (1/m) sum log(1 - D(G(z)))
        objective = tape.mean_all(tape.log_sigmoid(tape.neg(fake_logits)));
    } else {
        // -(1/m) sum log D(G(z))
        objective = tape.neg(tape.mean_all(tape.log_sigmoid(fake_logits)));
    }

    GeneratorStepStats stats;
    stats.loss = tape.value(objective).at(0, 0);
    stats.d_fake = detail::mean_sigmoid(tape.value(fake_logits));
    if (!std::isfinite(stats.loss))
        throw TrainingFault("generator_step: non-finite loss", TrainingTrace{});

    const ad::Gradients grads = tape.backward(objective);
    SgdState local;
    (state ? *state : local)
        .apply(g_net, grads, traced_g, lr_g, momentum, StepDirection::Descend);
    return stats;
}

struct PretrainOutcome {
    bool converged = false;
    std::size_t steps = 0;
};

/// Shared state for one training run: the two optimizers, the trace, and the
/// gradient-evaluation counter.
class TrainingRun {
public:
    TrainingRun(Mlp& g_net, Mlp& d_net, const TrainerConfig& config, Rng& rng,
                TrainingTrace& trace, GeneratorLossKind loss_kind)
        : g_(g_net), d_(d_net), config_(config), rng_(rng), trace_(trace),
          loss_kind_(loss_kind) {
        config.validate();
        const char* name = generator_loss_name(loss_kind);
        if (trace_.generator_loss.empty()) trace_.generator_loss = name;
        else if (trace_.generator_loss != name)
            throw ContractError("TrainingRun: trace was recorded with the " +
                                trace_.generator_loss + " generator loss");
        prior_ = LatentPrior(g_.spec().input_dim);
        tau_ = trace_.final_tau();
        step_ = trace_.next_step();
    }

    /// One alternating iteration against the supplied real batch.
    void iterate(const Tensor& real_batch, double beta) {
        const Tensor z_d = prior_.sample(config_.m, rng_);
        DiscriminatorStepStats d_stats;
        GeneratorStepStats g_stats;
        try {
            d_stats = discriminator_step(d_, g_, real_batch, z_d, config_.lr_d,
                                         config_.momentum, &d_state_);
            ++tau_;
            const Tensor z_g = prior_.sample(config_.m, rng_);
            g_stats = generator_step(d_, g_, z_g, config_.lr_g, loss_kind_,
                                     config_.momentum, &g_state_);
            ++tau_;
        } catch (const TrainingFault& fault) {
            throw TrainingFault(fault.what(), trace_);
        }
        trace_.records.push_back(TraceRecord{step_, beta, d_stats.loss, g_stats.loss,
                                             d_stats.d_real, d_stats.d_fake, tau_});
        ++step_;
    }

    Mlp& generator() { return g_; }
    const LatentPrior& prior() const { return prior_; }
    const TrainerConfig& config() const { return config_; }
    Rng& rng() { return rng_; }

private:
    Mlp& g_;
    Mlp& d_;
    const TrainerConfig& config_;
    Rng& rng_;
    TrainingTrace& trace_;
    GeneratorLossKind loss_kind_;
    LatentPrior prior_{1};
    SgdState d_state_;
    SgdState g_state_;
    std::uint64_t tau_ = 0;
    std::size_t step_ = 1;
};

/// Generates an evaluation batch from the generator using a dedicated rng so
/// convergence checks never perturb the training stream.
inline Tensor generator_samples(const Mlp& g_net, std::size_t count, Rng& eval_rng) {
    const LatentPrior prior(g_net.spec().input_dim);
    return forward_generator(g_net, prior.sample(count, eval_rng));
}

inline bool passes_uniform_gates(const Tensor& samples, const BoxDomain& box) {
    const UniformityScore score = uniformity_score(samples, box);
    if (score.max_ks() >= kPretrainMaxKs) return false;
    if (score.max_abs_correlation >= kPretrainMaxCorrelation) return false;
    return frozen_noise_score(samples, box) > kPretrainMinFrozenNoiseScore;
}

/// Uniform-stage GAN training (beta = 0). Alternates discriminator and
/// generator steps against box-uniform batches until the generated samples
/// pass the uniformity gates or the budget runs out. Exhausting the budget is
/// reported, not thrown, so experiments can record the failure.
inline PretrainOutcome pretrain_uniform(Mlp& g_net, Mlp& d_net, const BoxDomain& box,
                                        const TrainerConfig& config, Rng& rng,
                                        TrainingTrace& trace) {
    validate_pairing(g_net, LatentPrior(g_net.spec().input_dim), box);
    TrainingRun run(g_net, d_net, config, rng, trace,
                    config.baseline_mode == BaselineMode::Vanilla
                        ? GeneratorLossKind::NonSaturating
                        : GeneratorLossKind::Saturating);
    Rng eval_rng = rng.fork(0xe7a1);

    if (passes_uniform_gates(generator_samples(g_net, kEvalSampleCount, eval_rng), box))
        return PretrainOutcome{true, 0};

    for (std::size_t step = 1; step <= config.n_pretrain; ++step) {
        const Tensor real = sample_uniform(box, config.m, rng);
        run.iterate(real, 0.0);
        if (step % config.pretrain_check_interval == 0 &&
            passes_uniform_gates(generator_samples(g_net, kEvalSampleCount, eval_rng),
                                 box))
            return PretrainOutcome{true, step};
    }
    return PretrainOutcome{false, config.n_pretrain};
}

/// Called after each annealing stage finishes; stage_index counts the finite
/// stages 0..K-1 and K for the final empirical stage.
using StageCallback = std::function<void(std::size_t stage_index, InverseTemperature beta,
                                         const Mlp& g_net, const Mlp& d_net)>;

/// The annealed minimax loop: n alternating iterations against
/// sample_heated(data, beta) for each visited beta, then n_final iterations
/// at beta = infinity. Assumes pretraining already initialized the players.
inline void run_annealed(Mlp& g_net, Mlp& d_net, const Dataset& data,
                         const AnnealingSchedule& schedule, const TrainerConfig& config,
                         Rng& rng, TrainingTrace& trace,
                         const StageCallback& on_stage = {}) {
    TrainingRun run(g_net, d_net, config, rng, trace, GeneratorLossKind::Saturating);
    for (std::size_t stage = 0; stage < schedule.stage_count(); ++stage) {
        const InverseTemperature beta = schedule.stage(stage);
        const std::size_t steps = beta.is_infinite() ? config.n_final : config.n;
        for (std::size_t i = 0; i < steps; ++i) {
            const Tensor real = sample_heated(data, beta, config.m, rng);
            run.iterate(real, beta.as_double());
        }
        if (on_stage) on_stage(stage, beta, g_net, d_net);
    }
}

/// Vanilla baseline: trains directly against the empirical distribution with
/// the non-saturating generator loss, for a caller-chosen number of
/// iterations (the tau budget of a matched annealed run, halved).
inline void run_vanilla_baseline(Mlp& g_net, Mlp& d_net, const Dataset& data,
                                 const TrainerConfig& config, std::size_t total_steps,
                                 Rng& rng, TrainingTrace& trace,
                                 const StageCallback& on_stage = {}) {
    if (config.baseline_mode != BaselineMode::Vanilla)
        throw ContractError("run_vanilla_baseline: config.baseline_mode must be vanilla");
    if (total_steps < 1)
        throw ContractError("run_vanilla_baseline: total_steps must be >= 1");
    TrainingRun run(g_net, d_net, config, rng, trace, GeneratorLossKind::NonSaturating);
    const InverseTemperature beta = InverseTemperature::infinite();
    for (std::size_t i = 0; i < total_steps; ++i) {
        const Tensor real = sample_heated(data, beta, config.m, rng);
        run.iterate(real, beta.as_double());
    }
    if (on_stage) on_stage(0, beta, g_net, d_net);
}

}  // namespace betagan
