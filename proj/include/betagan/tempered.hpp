#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

#include "betagan/dataset.hpp"
#include "betagan/domain.hpp"
#include "betagan/errors.hpp"
#include "betagan/rng.hpp"
#include "betagan/tensor.hpp"

namespace betagan {

/// i.i.d. uniform batch on [a, b]^d.
inline Tensor sample_uniform(const BoxDomain& box, std::size_t m, Rng& rng) {
    if (m < 1) throw ContractError("sample_uniform: m must be >= 1");
    Tensor batch(m, box.dim);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < box.dim; ++j)
            batch.at(i, j) = rng.uniform(box.low, box.high);
    return batch;
}

/// Draws from the heated data distribution: a uniformly chosen atom plus
/// isotropic Gaussian noise with per-coordinate variance 1/beta, folded back
/// into the box by mirror reflection. beta = infinity returns exact atoms.
/// The uniform stage has no data mixture; use sample_uniform for it.
inline Tensor sample_heated(const Dataset& data, const InverseTemperature& beta,
                            std::size_t m, Rng& rng) {
    if (beta.is_uniform())
        throw ContractError("sample_heated: beta=UNIFORM has no mixture form; "
                            "use sample_uniform");
    if (m < 1) throw ContractError("sample_heated: m must be >= 1");
    const std::size_t d = data.dim();
    Tensor batch(m, d);
    if (beta.is_infinite()) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t pick = rng.index(data.count());
            for (std::size_t j = 0; j < d; ++j) batch.at(i, j) = data.points.at(pick, j);
        }
        return batch;
    }
    const double noise_std = 1.0 / std::sqrt(beta.finite_value());
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t pick = rng.index(data.count());
        for (std::size_t j = 0; j < d; ++j) {
            const double v = data.points.at(pick, j) + noise_std * rng.normal();
            batch.at(i, j) = data.box.reflect(v);
        }
    }
    return batch;
}

/// Exact heated mixture density
///   (1/N) (beta/2pi)^{d/2} sum_i exp(-beta |x - x_i|^2 / 2)
/// with no box truncation; serves as the analytic reference for the sampler.
inline double heated_density(const Dataset& data, double beta,
                             std::span<const double> x) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ContractError("heated_density: beta must be a finite positive real");
    const std::size_t d = data.dim();
    if (x.size() != d)
        throw DimensionError("heated_density: point has " + std::to_string(x.size()) +
                             " coordinates, dataset has " + std::to_string(d));
    const double prefactor =
        std::pow(beta / (2.0 * std::numbers::pi), 0.5 * static_cast<double>(d));
    double total = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[j] - data.points.at(i, j);
            sq += diff * diff;
        }
        total += std::exp(-0.5 * beta * sq);
    }
    return prefactor * total / static_cast<double>(data.count());
}

}  // namespace betagan
