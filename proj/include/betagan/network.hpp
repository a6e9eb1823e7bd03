#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "betagan/autodiff.hpp"
#include "betagan/domain.hpp"
#include "betagan/errors.hpp"
#include "betagan/rng.hpp"
#include "betagan/tensor.hpp"

namespace betagan {

enum class Role { Generator, Discriminator };

inline const char* role_name(Role r) {
    return r == Role::Generator ? "generator" : "discriminator";
}

inline Role parse_role(const std::string& name) {
    if (name == "generator") return Role::Generator;
    if (name == "discriminator") return Role::Discriminator;
    throw ConstraintError("unknown role '" + name + "'");
}

struct LayerSpec {
    std::size_t width;
    Activation activation;
};

/// Layered network description plus the role validation rules.
///
/// Generators keep piecewise-linear hidden units: smooth hidden activations
/// degrade uniform-stage training into a frozen noise pattern, so they are
/// rejected unless allow_smooth_hidden is set (the flag exists to make that
/// failure reproducible on purpose).
struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<LayerSpec> layers;
    Role role = Role::Generator;
    bool allow_smooth_hidden = false;

    std::size_t output_dim() const { return layers.back().width; }

    void validate() const {
        if (input_dim == 0) throw ConstraintError("MlpSpec: input_dim must be positive");
        if (layers.empty()) throw ConstraintError("MlpSpec: needs at least one layer");
        for (const LayerSpec& layer : layers)
            if (layer.width == 0)
                throw ConstraintError("MlpSpec: layer widths must be positive");

        if (role == Role::Generator) {
            if (layers.back().activation != Activation::Linear)
                throw ConstraintError("generator spec: final activation must be linear");
            for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
                if (!is_piecewise_linear(layers[i].activation) && !allow_smooth_hidden)
                    throw ConstraintError(
                        std::string("generator spec: hidden activation '") +
                        activation_name(layers[i].activation) +
                        "' is smooth and risks collapse to frozen noise; set "
                        "allow_smooth_hidden to override");
            }
        } else {
            if (layers.back().width != 1 || layers.back().activation != Activation::Sigmoid)
                throw ConstraintError(
                    "discriminator spec: final layer must be sigmoid with width 1");
        }
    }
};

struct DenseLayer {
    Tensor weight;  // in x out
    Tensor bias;    // 1 x out
};

/// Fully connected network; owns the parameters for one of the two players.
class Mlp {
public:
    Mlp(MlpSpec spec, std::vector<DenseLayer> layers)
        : spec_(std::move(spec)), layers_(std::move(layers)) {
        spec_.validate();
        std::size_t in = spec_.input_dim;
        if (layers_.size() != spec_.layers.size())
            throw DimensionError("Mlp: layer count mismatch");
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const std::size_t out = spec_.layers[i].width;
            if (layers_[i].weight.rows() != in || layers_[i].weight.cols() != out ||
                layers_[i].bias.rows() != 1 || layers_[i].bias.cols() != out)
                throw DimensionError("Mlp: layer " + std::to_string(i) +
                                     " parameters do not match spec");
            in = out;
        }
    }

    const MlpSpec& spec() const { return spec_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const DenseLayer& l : layers_) n += l.weight.size() + l.bias.size();
        return n;
    }

    /// Plain evaluation, every activation applied (sigmoid head included).
    Tensor forward(const Tensor& input) const { return eval(input, false); }

    /// Plain evaluation that stops before the final activation.
    Tensor forward_logits(const Tensor& input) const { return eval(input, true); }

private:
    Tensor eval(const Tensor& input, bool skip_head) const {
        if (input.cols() != spec_.input_dim)
            throw DimensionError("Mlp: input " + shape_string(input) + " vs input_dim " +
                                 std::to_string(spec_.input_dim));
        Tensor x = input;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            x = add_row_bias(matmul(x, layers_[i].weight), layers_[i].bias);
            const bool last = i + 1 == layers_.size();
            if (!(last && skip_head)) x = activation(x, spec_.layers[i].activation);
        }
        return x;
    }

    MlpSpec spec_;
    std::vector<DenseLayer> layers_;
};

/// Uniform Glorot-style initialization: weights from
/// U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))), biases zero.
/// Identical seeds give bit-identical parameters.
inline Mlp build_mlp(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    std::vector<DenseLayer> layers;
    layers.reserve(spec.layers.size());
    std::size_t in = spec.input_dim;
    for (const LayerSpec& layer : spec.layers) {
        const std::size_t out = layer.width;
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        DenseLayer dense{Tensor(in, out), Tensor(1, out)};
        for (std::size_t i = 0; i < dense.weight.size(); ++i)
            dense.weight.data()[i] = rng.uniform(-limit, limit);
        layers.push_back(std::move(dense));
        in = out;
    }
    return Mlp(spec, std::move(layers));
}

/// Latent noise source p(z): uniform on [-1, 1]^dim.
struct LatentPrior {
    std::size_t dim;

    explicit LatentPrior(std::size_t dim_) : dim(dim_) {
        if (dim == 0) throw ConstraintError("LatentPrior: dim must be positive");
    }

    Tensor sample(std::size_t m, Rng& rng) const {
        if (m < 1) throw ContractError("LatentPrior::sample: m must be >= 1");
        Tensor z(m, dim);
        for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = rng.uniform(-1.0, 1.0);
        return z;
    }
};

/// A generator can only fill a box whose dimension its noise source covers:
/// requires prior.dim >= box.dim and matching output width.
inline void validate_pairing(const Mlp& generator, const LatentPrior& prior,
                             const BoxDomain& box) {
    if (generator.spec().role != Role::Generator)
        throw ConstraintError("validate_pairing: network is not a generator");
    if (prior.dim < box.dim)
        throw ConstraintError("validate_pairing: latent dim " + std::to_string(prior.dim) +
                              " < ambient dim " + std::to_string(box.dim) +
                              "; generating the uniform distribution needs dim(z) >= d");
    if (generator.spec().input_dim != prior.dim)
        throw DimensionError("validate_pairing: generator input width " +
                             std::to_string(generator.spec().input_dim) + " vs prior dim " +
                             std::to_string(prior.dim));
    if (generator.spec().output_dim() != box.dim)
        throw DimensionError("validate_pairing: generator output width " +
                             std::to_string(generator.spec().output_dim()) +
                             " vs ambient dim " + std::to_string(box.dim));
}

/// G(z): generated batch in ambient coordinates. The box is a training
/// target, not a hard output constraint, so the range is unbounded.
inline Tensor forward_generator(const Mlp& generator, const Tensor& z_batch) {
    if (generator.spec().role != Role::Generator)
        throw ConstraintError("forward_generator: network is not a generator");
    return generator.forward(z_batch);
}

/// D(x): classifier outputs, strictly inside (0, 1).
inline Tensor forward_discriminator(const Mlp& discriminator, const Tensor& x_batch) {
    if (discriminator.spec().role != Role::Discriminator)
        throw ConstraintError("forward_discriminator: network is not a discriminator");
    return discriminator.forward(x_batch);
}

/// Network parameters registered as leaves on a tape.
struct TracedMlp {
    std::vector<ad::Var> weights;
    std::vector<ad::Var> biases;
};

inline TracedMlp put_on_tape(ad::Tape& tape, const Mlp& net) {
    TracedMlp traced;
    traced.weights.reserve(net.layers().size());
    traced.biases.reserve(net.layers().size());
    for (const DenseLayer& layer : net.layers()) {
        traced.weights.push_back(tape.leaf(layer.weight));
        traced.biases.push_back(tape.leaf(layer.bias));
    }
    return traced;
}

/// Forward pass recorded on the tape. With as_logits the final activation is
/// omitted so losses can use the fused log-sigmoid primitives.
inline ad::Var trace_forward(ad::Tape& tape, const TracedMlp& traced, const MlpSpec& spec,
                             ad::Var input, bool as_logits) {
    ad::Var x = input;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        x = tape.add_row_bias(tape.matmul(x, traced.weights[i]), traced.biases[i]);
        const bool last = i + 1 == spec.layers.size();
        if (!(last && as_logits)) x = tape.activation(x, spec.layers[i].activation);
    }
    return x;
}

// --- checkpoint file ---------------------------------------------------
//
// Text header (spec), then a flat block of little-endian 64-bit floats in
// layer order (weight row-major, then bias). Round-trips are bit-exact.

namespace detail {

inline void write_u64_le(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

inline std::uint64_t read_u64_le(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline void save_checkpoint(const Mlp& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    const MlpSpec& spec = net.spec();
    out << "betagan-checkpoint 1\n";
    out << "role " << role_name(spec.role) << "\n";
    out << "input_dim " << spec.input_dim << "\n";
    out << "allow_smooth_hidden " << (spec.allow_smooth_hidden ? 1 : 0) << "\n";
    out << "layers " << spec.layers.size() << "\n";
    for (const LayerSpec& layer : spec.layers)
        out << "layer " << layer.width << " " << activation_name(layer.activation) << "\n";
    out << "params " << net.parameter_count() << "\n";
    for (const DenseLayer& layer : net.layers()) {
        for (std::size_t i = 0; i < layer.weight.size(); ++i)
            detail::write_u64_le(out, std::bit_cast<std::uint64_t>(layer.weight.data()[i]));
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            detail::write_u64_le(out, std::bit_cast<std::uint64_t>(layer.bias.data()[i]));
    }
    if (!out) throw IoError("write failed for checkpoint " + path.string());
}

inline Mlp load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint " + path.string());
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) throw ParseError("truncated checkpoint header", line_no);
        ++line_no;
        return line;
    };
    if (next_line() != "betagan-checkpoint 1")
        throw ParseError("not a betagan checkpoint: " + path.string(), line_no);

    auto field = [&](const std::string& key) {
        std::istringstream ss(next_line());
        std::string k;
        ss >> k;
        if (k != key) throw ParseError("expected '" + key + "' in checkpoint header", line_no);
        std::string rest;
        ss >> rest;
        return rest;
    };

    MlpSpec spec;
    spec.role = parse_role(field("role"));
    spec.input_dim = static_cast<std::size_t>(parse_integer(field("input_dim"), line_no));
    spec.allow_smooth_hidden = parse_integer(field("allow_smooth_hidden"), line_no) != 0;
    const std::size_t layer_count =
        static_cast<std::size_t>(parse_integer(field("layers"), line_no));
    for (std::size_t i = 0; i < layer_count; ++i) {
        std::istringstream ss(next_line());
        std::string k, act;
        std::size_t width = 0;
        ss >> k >> width >> act;
        if (k != "layer" || !ss) throw ParseError("bad layer line in checkpoint", line_no);
        spec.layers.push_back(LayerSpec{width, parse_activation(act)});
    }
    const std::size_t params =
        static_cast<std::size_t>(parse_integer(field("params"), line_no));

    std::vector<DenseLayer> layers;
    std::size_t in_width = spec.input_dim, read_count = 0;
    for (const LayerSpec& layer : spec.layers) {
        DenseLayer dense{Tensor(in_width, layer.width), Tensor(1, layer.width)};
        for (std::size_t i = 0; i < dense.weight.size(); ++i)
            dense.weight.data()[i] = std::bit_cast<double>(detail::read_u64_le(in));
        for (std::size_t i = 0; i < dense.bias.size(); ++i)
            dense.bias.data()[i] = std::bit_cast<double>(detail::read_u64_le(in));
        read_count += dense.weight.size() + dense.bias.size();
        layers.push_back(std::move(dense));
        in_width = layer.width;
    }
    if (!in) throw IoError("truncated parameter block in " + path.string());
    if (read_count != params)
        throw ParseError("checkpoint parameter count mismatch", line_no);
    return Mlp(spec, std::move(layers));
}

}  // namespace betagan
