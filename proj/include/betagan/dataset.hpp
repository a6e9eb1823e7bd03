#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "betagan/domain.hpp"
#include "betagan/errors.hpp"
#include "betagan/numio.hpp"
#include "betagan/tensor.hpp"

namespace betagan {

/// Per-dimension affine map from a raw coordinate range onto a box interval,
/// keeping enough state to invert it. Dimensions whose raw range is a single
/// value map everything to the box midpoint and invert back to that value.
struct AffineMap {
    std::vector<double> src_min;
    std::vector<double> src_max;
    double dst_low = -1.0;
    double dst_high = 1.0;

    std::size_t dim() const { return src_min.size(); }

    bool degenerate(std::size_t j) const { return src_min[j] == src_max[j]; }

    double apply(double x, std::size_t j) const {
        if (degenerate(j)) return dst_low + 0.5 * (dst_high - dst_low);
        const double t = (x - src_min[j]) / (src_max[j] - src_min[j]);
        return dst_low + t * (dst_high - dst_low);
    }

    double invert(double y, std::size_t j) const {
        if (degenerate(j)) return src_min[j];
        const double t = (y - dst_low) / (dst_high - dst_low);
        return src_min[j] + t * (src_max[j] - src_min[j]);
    }

    Tensor apply(const Tensor& points) const {
        check_width(points);
        Tensor out(points.rows(), points.cols());
        for (std::size_t i = 0; i < points.rows(); ++i)
            for (std::size_t j = 0; j < points.cols(); ++j)
                out.at(i, j) = apply(points.at(i, j), j);
        return out;
    }

    Tensor invert(const Tensor& points) const {
        check_width(points);
        Tensor out(points.rows(), points.cols());
        for (std::size_t i = 0; i < points.rows(); ++i)
            for (std::size_t j = 0; j < points.cols(); ++j)
                out.at(i, j) = invert(points.at(i, j), j);
        return out;
    }

    std::vector<double> apply_point(const std::vector<double>& p) const {
        std::vector<double> out(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) out[j] = apply(p[j], j);
        return out;
    }

private:
    void check_width(const Tensor& points) const {
        if (points.cols() != dim())
            throw DimensionError("AffineMap: points " + shape_string(points) +
                                 " do not match map dimension " + std::to_string(dim()));
    }
};

/// The map rescale_dataset applies: raw per-dimension min/max onto [a, b].
inline AffineMap rescale_map(const Tensor& raw, const BoxDomain& box) {
    if (raw.rows() < 1) throw ContractError("rescale_map: dataset must have N >= 1 points");
    if (raw.cols() != box.dim)
        throw DimensionError("rescale_map: points " + shape_string(raw) +
                             " vs box dimension " + std::to_string(box.dim));
    AffineMap map;
    map.dst_low = box.low;
    map.dst_high = box.high;
    map.src_min.assign(box.dim, 0.0);
    map.src_max.assign(box.dim, 0.0);
    for (std::size_t j = 0; j < box.dim; ++j) {
        double lo = raw.at(0, j), hi = raw.at(0, j);
        for (std::size_t i = 1; i < raw.rows(); ++i) {
            lo = std::min(lo, raw.at(i, j));
            hi = std::max(hi, raw.at(i, j));
        }
        map.src_min[j] = lo;
        map.src_max[j] = hi;
    }
    return map;
}

/// N points inside a box; the empirical distribution's atoms.
struct Dataset {
    Tensor points;
    BoxDomain box;

    Dataset(Tensor points_, BoxDomain box_)
        : points(std::move(points_)), box(box_) {
        if (points.rows() < 1) throw ContractError("Dataset: requires N >= 1 points");
        if (points.cols() != box.dim)
            throw DimensionError("Dataset: points " + shape_string(points) +
                                 " vs box dimension " + std::to_string(box.dim));
        for (std::size_t i = 0; i < points.rows(); ++i)
            for (std::size_t j = 0; j < points.cols(); ++j)
                if (!box.contains(points.at(i, j)))
                    throw ConstraintError("Dataset: point " + std::to_string(i) +
                                          " lies outside the box");
    }

    std::size_t count() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

/// Affine per-dimension rescaling onto the box; raw min/max land on the box
/// walls, constant coordinates on the midpoint. Rounding dust is clamped so
/// the box contract holds exactly.
inline Dataset rescale_dataset(const Tensor& raw, const BoxDomain& box) {
    const AffineMap map = rescale_map(raw, box);
    Tensor scaled = map.apply(raw);
    for (std::size_t i = 0; i < scaled.size(); ++i)
        scaled.data()[i] = std::clamp(scaled.data()[i], box.low, box.high);
    return Dataset(std::move(scaled), box);
}

/// CSV, one point per row, d columns, no header; values round-trip exactly.
inline void save_points_csv(const Tensor& points, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        for (std::size_t j = 0; j < points.cols(); ++j) {
            if (j) out << ',';
            out << format_double(points.at(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

inline Tensor load_points_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t row_cols = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            std::string_view cell(line.data() + pos, comma - pos);
            values.push_back(parse_double(cell, line_no));
            ++row_cols;
            pos = comma + 1;
            if (comma == line.size()) break;
        }
        if (cols == 0) cols = row_cols;
        if (row_cols != cols)
            throw ParseError("row has " + std::to_string(row_cols) + " columns, expected " +
                             std::to_string(cols), line_no);
        ++rows;
    }
    if (rows == 0) throw ParseError("empty dataset file " + path.string(), line_no);
    return Tensor(rows, cols, std::move(values));
}

/// Loads raw points and applies the configured box rescaling.
inline Dataset load_dataset_csv(const std::filesystem::path& path, const BoxDomain& box) {
    return rescale_dataset(load_points_csv(path), box);
}

}  // namespace betagan
