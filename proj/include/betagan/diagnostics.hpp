#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "betagan/domain.hpp"
#include "betagan/errors.hpp"
#include "betagan/rng.hpp"
#include "betagan/tempered.hpp"
#include "betagan/tensor.hpp"
#include "betagan/trace.hpp"

namespace betagan {

/// Which modes of a known layout the samples reach, and how much mass each
/// one gets. Samples farther than the radius from every center stay
/// unassigned, so the fractions sum to at most 1.
struct ModeCoverageReport {
    std::vector<double> fractions;
    std::size_t covered_count = 0;
    std::size_t total_modes = 0;
};

inline ModeCoverageReport mode_coverage(const Tensor& samples,
                                        const std::vector<std::vector<double>>& centers,
                                        double radius, double coverage_threshold) {
    if (samples.rows() == 0) throw ContractError("mode_coverage: empty samples");
    if (centers.empty()) throw ContractError("mode_coverage: no centers");
    if (!(radius > 0.0)) throw ContractError("mode_coverage: radius must be positive");
    const std::size_t d = samples.cols();
    for (const auto& c : centers)
        if (c.size() != d)
            throw DimensionError("mode_coverage: center dimension " +
                                 std::to_string(c.size()) + " vs samples " +
                                 std::to_string(d));

    std::vector<std::size_t> counts(centers.size(), 0);
    const double radius_sq = radius * radius;
    for (std::size_t i = 0; i < samples.rows(); ++i) {
        double best = radius_sq;
        std::size_t best_mode = centers.size();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            double dist_sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = samples.at(i, j) - centers[c][j];
                dist_sq += diff * diff;
            }
            if (dist_sq <= best) {
                best = dist_sq;
                best_mode = c;
            }
        }
        if (best_mode < centers.size()) ++counts[best_mode];
    }

    ModeCoverageReport report;
    report.total_modes = centers.size();
    report.fractions.resize(centers.size());
    for (std::size_t c = 0; c < centers.size(); ++c) {
        report.fractions[c] =
            static_cast<double>(counts[c]) / static_cast<double>(samples.rows());
        if (report.fractions[c] >= coverage_threshold) ++report.covered_count;
    }
    return report;
}

/// Marginal KS distances against the box-uniform CDF plus the largest
/// absolute Pearson correlation between coordinate pairs.
struct UniformityScore {
    std::vector<double> ks_per_dim;
    double max_abs_correlation = 0.0;

    double max_ks() const {
        double m = 0.0;
        for (double v : ks_per_dim) m = std::max(m, v);
        return m;
    }
};

inline UniformityScore uniformity_score(const Tensor& samples, const BoxDomain& box) {
    if (samples.rows() < 100)
        throw ContractError("uniformity_score: needs at least 100 samples");
    if (samples.cols() != box.dim)
        throw DimensionError("uniformity_score: samples " + shape_string(samples) +
                             " vs box dimension " + std::to_string(box.dim));
    const std::size_t n = samples.rows(), d = samples.cols();

    UniformityScore score;
    score.ks_per_dim.resize(d);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = samples.at(i, j);
        std::sort(column.begin(), column.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double cdf =
                std::clamp((column[i] - box.low) / box.width(), 0.0, 1.0);
            const double lo = static_cast<double>(i) / static_cast<double>(n);
            const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
            ks = std::max(ks, std::max(cdf - lo, hi - cdf));
        }
        score.ks_per_dim[j] = ks;
    }

    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) mean[j] += samples.at(i, j);
        mean[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = samples.at(i, j) - mean[j];
            var[j] += diff * diff;
        }
    }
    bool degenerate = false;
    for (std::size_t j = 0; j < d; ++j)
        if (var[j] == 0.0) degenerate = true;
    if (degenerate) {
        score.max_abs_correlation = 1.0;  // zero-variance marginal: worst case
        return score;
    }
    double max_corr = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a + 1; b < d; ++b) {
            double cov = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                cov += (samples.at(i, a) - mean[a]) * (samples.at(i, b) - mean[b]);
            max_corr = std::max(max_corr, std::abs(cov / std::sqrt(var[a] * var[b])));
        }
    }
    score.max_abs_correlation = max_corr;
    return score;
}

namespace detail {

inline double mean_pairwise_distance(const Tensor& samples) {
    const std::size_t n = samples.rows(), d = samples.cols();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = samples.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* b = samples.row(j);
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = a[k] - b[k];
                sq += diff * diff;
            }
            total += std::sqrt(sq);
        }
    }
    return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Expected pairwise distance for a matched-size uniform batch in the box.
/// d = 1 has the closed form width/3; higher dimensions use a fixed-seed
/// Monte-Carlo reference, cached per (n, box).
inline double uniform_pairwise_reference(std::size_t n, const BoxDomain& box) {
    if (box.dim == 1) return box.width() / 3.0;
    static std::mutex mutex;
    static std::map<std::tuple<std::size_t, std::size_t, double, double>, double> cache;
    const auto key = std::make_tuple(n, box.dim, box.low, box.high);
    {
        std::scoped_lock lock(mutex);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    Rng rng(0xf05e11ceULL);
    const Tensor reference = sample_uniform(box, n, rng);
    const double value = mean_pairwise_distance(reference);
    std::scoped_lock lock(mutex);
    cache.emplace(key, value);
    return value;
}

}  // namespace detail

/// Mean pairwise distance of the batch divided by the same statistic for a
/// matched-size uniform batch in the box: about 1 for healthy noise, 0 for a
/// frozen pattern.
inline double frozen_noise_score(const Tensor& samples, const BoxDomain& box) {
    if (samples.rows() < 2) throw ContractError("frozen_noise_score: needs >= 2 samples");
    if (samples.cols() != box.dim)
        throw DimensionError("frozen_noise_score: samples " + shape_string(samples) +
                             " vs box dimension " + std::to_string(box.dim));
    return detail::mean_pairwise_distance(samples) /
           detail::uniform_pairwise_reference(samples.rows(), box);
}

/// Windowed |D_real - D_fake| gap along a training trace.
struct StabilityReport {
    std::vector<double> gap_series;  // rolling means, one per full window position
    double max_gap = 0.0;
    double final_gap = 0.0;
};

inline StabilityReport stability_report(const TrainingTrace& trace, std::size_t window) {
    if (trace.records.empty()) throw ContractError("stability_report: empty trace");
    if (window < 1) throw ContractError("stability_report: window must be >= 1");
    if (window > trace.records.size())
        throw ContractError("stability_report: window " + std::to_string(window) +
                            " exceeds trace length " +
                            std::to_string(trace.records.size()));
    const std::size_t n = trace.records.size();
    std::vector<double> gaps(n);
    for (std::size_t i = 0; i < n; ++i)
        gaps[i] = std::abs(trace.records[i].d_real - trace.records[i].d_fake);

    StabilityReport report;
    report.gap_series.reserve(n - window + 1);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += gaps[i];
        if (i + 1 >= window) {
            if (i + 1 > window) running -= gaps[i - window];
            report.gap_series.push_back(running / static_cast<double>(window));
        }
    }
    for (double g : report.gap_series) report.max_gap = std::max(report.max_gap, g);
    report.final_gap = report.gap_series.back();
    return report;
}

}  // namespace betagan
