#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "betagan/errors.hpp"

namespace betagan {

/// Dense row-major matrix of 64-bit floats. Rank is fixed at two: batches are
/// m x d, row vectors 1 x n, scalars 1 x 1.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        if (rows == 0 || cols == 0)
            throw ContractError("Tensor: shape entries must be positive, got " +
                                dim_string(rows, cols));
    }

    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows == 0 || cols == 0)
            throw ContractError("Tensor: shape entries must be positive, got " +
                                dim_string(rows, cols));
        if (data_.size() != rows * cols)
            throw DimensionError("Tensor: " + dim_string(rows, cols) + " needs " +
                                 std::to_string(rows * cols) + " entries, got " +
                                 std::to_string(data_.size()));
    }

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data_[0] = v;
        return t;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    std::array<std::size_t, 2> shape() const { return {rows_, cols_}; }

    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    double* row(std::size_t i) { return data_.data() + i * cols_; }

    bool same_shape(const Tensor& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double sum() const {
        double s = 0.0;
        for (double v : data_) s += v;
        return s;
    }

    double mean() const { return sum() / static_cast<double>(size()); }

    bool operator==(const Tensor& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    static std::string dim_string(std::size_t r, std::size_t c) {
        return std::to_string(r) + "x" + std::to_string(c);
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline std::string shape_string(const Tensor& t) {
    return Tensor::dim_string(t.rows(), t.cols());
}

/// Standard matrix product. The k-in-middle loop order keeps both inner
/// streams contiguous so the compiler can vectorize it.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions disagree, lhs " +
                             shape_string(a) + " vs rhs " + shape_string(b));
    Tensor c(a.rows(), b.cols());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = pc + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = pa[i * k + kk];
            const double* brow = pb + kk * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

enum class Activation { Relu, Tanh, Sigmoid, Linear };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Linear: return "linear";
    }
    return "?";
}

inline Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "linear") return Activation::Linear;
    throw ConstraintError("unknown activation '" + name +
                          "' (expected relu|tanh|sigmoid|linear)");
}

/// Returns true for activations whose graph is a union of line segments.
inline bool is_piecewise_linear(Activation a) {
    return a == Activation::Relu || a == Activation::Linear;
}

/// Logistic function, clamped into the open interval (0, 1) so that extreme
/// logits saturate instead of rounding onto the endpoints.
inline double stable_sigmoid(double x) {
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    if (s <= 0.0) return std::numeric_limits<double>::min();
    constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (s >= 1.0) return kBelowOne;
    return s;
}

/// log(sigmoid(x)) in log-sum-exp form; finite for every finite input.
inline double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// Elementwise activation map.
inline Tensor activation(const Tensor& x, Activation kind) {
    Tensor y(x.rows(), x.cols());
    const double* px = x.data();
    double* py = y.data();
    const std::size_t n = x.size();
    switch (kind) {
        case Activation::Relu:
            for (std::size_t i = 0; i < n; ++i) py[i] = px[i] > 0.0 ? px[i] : 0.0;
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < n; ++i) py[i] = std::tanh(px[i]);
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < n; ++i) py[i] = stable_sigmoid(px[i]);
            break;
        case Activation::Linear:
            for (std::size_t i = 0; i < n; ++i) py[i] = px[i];
            break;
    }
    return y;
}

/// Adds a 1 x n bias row to every row of an m x n tensor. This is the only
/// broadcasting the library performs.
inline Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols())
        throw DimensionError("add_row_bias: bias " + shape_string(bias) +
                             " does not broadcast over " + shape_string(x));
    Tensor y = x;
    double* py = y.data();
    const double* pb = bias.data();
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) py[i * y.cols() + j] += pb[j];
    return y;
}

enum class StepDirection { Ascend, Descend };

/// One plain SGD update: params +/- learning_rate * grads.
inline void sgd_step(Tensor& params, const Tensor& grads, double learning_rate,
                     StepDirection direction) {
    if (!params.same_shape(grads))
        throw DimensionError("sgd_step: params " + shape_string(params) +
                             " vs grads " + shape_string(grads));
    if (!(learning_rate > 0.0))
        throw ContractError("sgd_step: learning_rate must be positive");
    const double sign = direction == StepDirection::Ascend ? 1.0 : -1.0;
    double* p = params.data();
    const double* g = grads.data();
    for (std::size_t i = 0; i < params.size(); ++i) p[i] += sign * learning_rate * g[i];
}

}  // namespace betagan
