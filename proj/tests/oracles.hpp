// Test-only reference implementations. These stay independent of the code
// paths they check: the matmul oracle is a bare triple loop, and gradient
// checks go through central finite differences of a forward-only evaluation.
#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "betagan/network.hpp"
#include "betagan/tensor.hpp"

namespace betagan::testing {

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
    Tensor c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) sum += a.at(i, k) * b.at(k, j);
            c.at(i, j) = sum;
        }
    return c;
}

/// Central finite differences of `value()` with respect to every parameter of
/// `net`, one flattened tensor per layer parameter (weight then bias).
inline std::vector<Tensor> fd_gradients(Mlp& net, const std::function<double()>& value,
                                        double step = 1e-5) {
    std::vector<Tensor> grads;
    for (DenseLayer& layer : net.layers()) {
        for (Tensor* param : {&layer.weight, &layer.bias}) {
            Tensor grad(param->rows(), param->cols());
            for (std::size_t i = 0; i < param->size(); ++i) {
                const double original = param->data()[i];
                param->data()[i] = original + step;
                const double plus = value();
                param->data()[i] = original - step;
                const double minus = value();
                param->data()[i] = original;
                grad.data()[i] = (plus - minus) / (2.0 * step);
            }
            grads.push_back(std::move(grad));
        }
    }
    return grads;
}

inline double relative_error(double a, double b, double floor = 1e-7) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / scale;
}

/// FNV-1a over the bit patterns of every parameter; detects any mutation.
inline std::uint64_t param_hash(const Mlp& net) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&](const Tensor& t) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            std::uint64_t bits = std::bit_cast<std::uint64_t>(t.data()[i]);
            for (int byte = 0; byte < 8; ++byte) {
                h ^= (bits >> (8 * byte)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        }
    };
    for (const DenseLayer& layer : net.layers()) {
        mix(layer.weight);
        mix(layer.bias);
    }
    return h;
}

/// Smallest |pre-activation| across all layers for the given input batch;
/// finite-difference checks over relu networks need it bounded away from the
/// kink.
inline double min_preactivation_magnitude(const Mlp& net, const Tensor& input) {
    double result = std::numeric_limits<double>::infinity();
    Tensor x = input;
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        x = add_row_bias(matmul(x, net.layers()[i].weight), net.layers()[i].bias);
        for (std::size_t j = 0; j < x.size(); ++j)
            result = std::min(result, std::abs(x.data()[j]));
        x = activation(x, net.spec().layers[i].activation);
    }
    return result;
}

}  // namespace betagan::testing
