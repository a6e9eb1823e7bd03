#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "betagan/errors.hpp"
#include "betagan/rng.hpp"
#include "betagan/tensor.hpp"

namespace betagan {

/// Isotropic Gaussian mixture with shared width.
struct MixtureSpec {
    std::vector<std::vector<double>> centers;
    double sigma = 0.05;
    std::vector<double> weights;

    std::size_t components() const { return centers.size(); }
    std::size_t dim() const { return centers.empty() ? 0 : centers.front().size(); }

    void validate() const {
        if (centers.empty()) throw ConstraintError("MixtureSpec: needs at least one component");
        for (const auto& c : centers)
            if (c.size() != dim())
                throw DimensionError("MixtureSpec: centers have mixed dimensions");
        if (weights.size() != centers.size())
            throw ConstraintError("MixtureSpec: one weight per component required");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw ConstraintError("MixtureSpec: weights must be nonnegative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw ConstraintError("MixtureSpec: weights must sum to 1 (got " +
                                  std::to_string(total) + ")");
        if (sigma < 0.0) throw ConstraintError("MixtureSpec: sigma must be nonnegative");
    }
};

/// i.i.d. mixture draws: component by weight, then center + sigma * normal.
inline Tensor sample_mog(const MixtureSpec& spec, std::size_t n, Rng& rng) {
    spec.validate();
    if (n < 1) throw ContractError("sample_mog: N must be >= 1");
    const std::size_t d = spec.dim();
    Tensor out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t pick = spec.components() - 1;
        double acc = 0.0;
        for (std::size_t c = 0; c < spec.components(); ++c) {
            acc += spec.weights[c];
            if (u < acc) {
                pick = c;
                break;
            }
        }
        for (std::size_t j = 0; j < d; ++j)
            out.at(i, j) = spec.centers[pick][j] + spec.sigma * rng.normal();
    }
    return out;
}

/// Two nested cubic wireframes in 3D: data living on disjoint 1D manifolds.
struct CubesSpec {
    double outer_half_width = 0.9;
    double inner_half_width = 0.45;
    double edge_noise = 0.01;

    void validate() const {
        if (!(outer_half_width > 0.0))
            throw ConstraintError("CubesSpec: outer_half_width must be positive");
        if (!(inner_half_width > 0.0) || !(inner_half_width < outer_half_width))
            throw ConstraintError("CubesSpec: inner cube must sit strictly inside the outer");
        if (edge_noise < 0.0) throw ConstraintError("CubesSpec: edge_noise must be >= 0");
    }
};

struct Segment {
    std::array<double, 3> a;
    std::array<double, 3> b;
};

/// The 12 edges of an origin-centered axis-aligned cube.
inline std::vector<Segment> cube_edges(double half_width) {
    std::vector<Segment> edges;
    edges.reserve(12);
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const std::size_t u = (axis + 1) % 3;
        const std::size_t v = (axis + 2) % 3;
        for (double su : {-1.0, 1.0}) {
            for (double sv : {-1.0, 1.0}) {
                Segment s{};
                s.a[axis] = -half_width;
                s.b[axis] = half_width;
                s.a[u] = s.b[u] = su * half_width;
                s.a[v] = s.b[v] = sv * half_width;
                edges.push_back(s);
            }
        }
    }
    return edges;
}

inline std::vector<Segment> wireframe_segments(const CubesSpec& spec) {
    spec.validate();
    std::vector<Segment> all = cube_edges(spec.outer_half_width);
    const std::vector<Segment> inner = cube_edges(spec.inner_half_width);
    all.insert(all.end(), inner.begin(), inner.end());
    return all;
}

inline double point_segment_distance(const std::array<double, 3>& p, const Segment& s) {
    std::array<double, 3> ab{}, ap{};
    double ab_sq = 0.0, dot = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        ab[k] = s.b[k] - s.a[k];
        ap[k] = p[k] - s.a[k];
        ab_sq += ab[k] * ab[k];
        dot += ab[k] * ap[k];
    }
    double t = ab_sq > 0.0 ? dot / ab_sq : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double dist_sq = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double diff = ap[k] - t * ab[k];
        dist_sq += diff * diff;
    }
    return std::sqrt(dist_sq);
}

inline double distance_to_wireframe(const std::array<double, 3>& p,
                                    const std::vector<Segment>& segments) {
    double best = std::numeric_limits<double>::infinity();
    for (const Segment& s : segments) best = std::min(best, point_segment_distance(p, s));
    return best;
}

/// Each draw: cube 50/50, one of its 12 edges uniformly, uniform position
/// along the edge, isotropic Gaussian jitter of width edge_noise.
inline Tensor sample_nested_cubes(const CubesSpec& spec, std::size_t n, Rng& rng) {
    spec.validate();
    if (n < 1) throw ContractError("sample_nested_cubes: N must be >= 1");
    const std::vector<Segment> outer = cube_edges(spec.outer_half_width);
    const std::vector<Segment> inner = cube_edges(spec.inner_half_width);
    Tensor out(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<Segment>& edges = rng.index(2) == 0 ? outer : inner;
        const Segment& edge = edges[rng.index(12)];
        const double t = rng.uniform();
        for (std::size_t k = 0; k < 3; ++k)
            out.at(i, k) = edge.a[k] + t * (edge.b[k] - edge.a[k]) +
                           spec.edge_noise * rng.normal();
    }
    return out;
}

// --- frozen fixtures -----------------------------------------------------
//
// The toy datasets need concrete mode layouts; these were drawn once from a
// seeded uniform over [-0.8, 0.8]^3, screened for pairwise separation, and
// frozen here so every experiment and test sees the same geometry.

inline MixtureSpec mog_fixture(std::size_t modes) {
    static const std::vector<std::vector<double>> five = {
        {0.17645638179904888, -0.1534370442535915, -0.7703285336845971},
        {-0.20557252776022084, -0.33099441531776197, 0.07874714113249726},
        {0.7505384470460639, -0.6109956692916614, 0.03920879896952134},
        {0.4785449206758059, 0.20833798874485687, 0.3693267190975016},
        {-0.7961456574257402, 0.4835402852576711, 0.4363645163670298},
    };
    static const std::vector<std::vector<double>> ten = {
        {-0.6587001357732304, -0.18888503225938746, 0.04277627278655094},
        {-0.006676866232155243, 0.27103354729310736, -0.581834278418016},
        {0.5705124218819757, -0.07662830867247783, -0.5663947609591639},
        {0.7145277381073258, 0.6641830377818627, 0.1604342935235652},
        {-0.16697566835266175, -0.3102633157559657, -0.414956480263986},
        {-0.18661468513279422, 0.5361545501887777, 0.6293023727183091},
        {0.022787014259882832, 0.023186237493845185, 0.5651978442600822},
        {-0.6810296648277698, -0.5241088308720703, -0.336789574609019},
        {0.16305204700330855, 0.7478302559495733, -0.7052290842786217},
        {0.0951080780987803, 0.44316399753268065, -0.1409220233342039},
    };
    MixtureSpec spec;
    if (modes == 5) {
        spec.centers = five;
    } else if (modes == 10) {
        spec.centers = ten;
    } else {
        throw ConstraintError("mog_fixture: frozen layouts exist for 5 and 10 modes");
    }
    spec.sigma = 0.05;
    spec.weights.assign(modes, 1.0 / static_cast<double>(modes));
    return spec;
}

inline CubesSpec cubes_fixture() { return CubesSpec{0.9, 0.45, 0.01}; }

}  // namespace betagan
