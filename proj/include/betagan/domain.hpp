#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "betagan/errors.hpp"

namespace betagan {

/// The finite ambient box [a, b]^d that hosts every distribution in play.
struct BoxDomain {
    double low;
    double high;
    std::size_t dim;

    BoxDomain(double low_, double high_, std::size_t dim_)
        : low(low_), high(high_), dim(dim_) {
        if (!(low < high))
            throw ConstraintError("BoxDomain: requires low < high, got [" +
                                  std::to_string(low) + ", " + std::to_string(high) + "]");
        if (dim == 0) throw ConstraintError("BoxDomain: dim must be positive");
    }

    double width() const { return high - low; }
    double midpoint() const { return low + 0.5 * width(); }
    bool contains(double v) const { return v >= low && v <= high; }

    /// Closed form of the iterated mirror map: folds any real into [low, high]
    /// by reflecting at the walls until inside.
    double reflect(double v) const {
        const double period = 2.0 * width();
        double t = std::fmod(v - low, period);
        if (t < 0.0) t += period;
        return t <= width() ? low + t : low + (period - t);
    }
};

/// Annealing parameter: exactly one of the uniform stage (beta = 0), a finite
/// positive beta, or the empirical-distribution stage (beta = infinity).
class InverseTemperature {
public:
    static InverseTemperature uniform() { return InverseTemperature(Kind::Uniform, 0.0); }

    static InverseTemperature finite(double beta) {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw ContractError("InverseTemperature::finite: beta must be a finite positive real");
        return InverseTemperature(Kind::Finite, beta);
    }

    static InverseTemperature infinite() {
        return InverseTemperature(Kind::Infinite, std::numeric_limits<double>::infinity());
    }

    bool is_uniform() const { return kind_ == Kind::Uniform; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    bool is_infinite() const { return kind_ == Kind::Infinite; }

    double finite_value() const {
        if (kind_ != Kind::Finite)
            throw ContractError("InverseTemperature: not a finite beta");
        return beta_;
    }

    /// Numeric view for traces and logs: 0 for the uniform stage, +inf for
    /// the empirical stage.
    double as_double() const { return beta_; }

    bool operator==(const InverseTemperature& other) const {
        return kind_ == other.kind_ && beta_ == other.beta_;
    }

private:
    enum class Kind { Uniform, Finite, Infinite };

    InverseTemperature(Kind kind, double beta) : kind_(kind), beta_(beta) {}

    Kind kind_;
    double beta_;
};

}  // namespace betagan
