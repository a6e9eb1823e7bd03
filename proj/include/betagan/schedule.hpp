#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "betagan/domain.hpp"
#include "betagan/errors.hpp"

namespace betagan {

/// Geometric cooling schedule. Training visits beta_1 * alpha^k for
/// k = 0..K-1 (beta is multiplied *after* each stage trains, so beta_K itself
/// is never a training stage), then switches to the empirical distribution at
/// beta = infinity for the final stage.
struct AnnealingSchedule {
    double beta_1;
    double beta_K;
    std::size_t cooling_steps;     // K
    double alpha;                  // (beta_K / beta_1)^(1/K)
    std::vector<double> visited;   // the K finite stages

    /// K finite stages plus the trailing infinity stage.
    std::size_t stage_count() const { return visited.size() + 1; }

    InverseTemperature stage(std::size_t k) const {
        if (k < visited.size()) return InverseTemperature::finite(visited[k]);
        if (k == visited.size()) return InverseTemperature::infinite();
        throw ContractError("AnnealingSchedule::stage: index past the final stage");
    }
};

inline AnnealingSchedule make_schedule(double beta_1, double beta_K, std::size_t K) {
    if (!(beta_1 > 0.0))
        throw ContractError("make_schedule: beta_1 must be positive");
    if (!(beta_1 <= beta_K))
        throw ContractError("make_schedule: requires beta_1 <= beta_K");
    if (K < 1) throw ContractError("make_schedule: K must be >= 1");

    AnnealingSchedule s;
    s.beta_1 = beta_1;
    s.beta_K = beta_K;
    s.cooling_steps = K;
    s.alpha = std::pow(beta_K / beta_1, 1.0 / static_cast<double>(K));
    s.visited.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        s.visited[k] = beta_1 * std::pow(s.alpha, static_cast<double>(k));
    return s;
}

/// The next stage after visited[current_index]: the following finite beta, or
/// infinity after the last finite stage. Advancing past the infinity stage is
/// a contract error.
inline InverseTemperature advance(const AnnealingSchedule& schedule,
                                  std::size_t current_index) {
    if (current_index >= schedule.visited.size())
        throw ContractError("advance: no stage follows the empirical stage");
    return schedule.stage(current_index + 1);
}

}  // namespace betagan
