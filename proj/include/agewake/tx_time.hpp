#pragma once

#include "agewake/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace agewake {

/// Distribution of the packet transmission/collision time T. Support is
/// bounded: T in (0, max()] for every kind.
class TxTimeDist {
  public:
    enum class Kind { Deterministic, Uniform, TruncatedExponential };

    static TxTimeDist deterministic(double value) {
        if (!(value > 0.0)) throw std::invalid_argument("tx_dist: value must be > 0");
        return {Kind::Deterministic, value, value};
    }

    static TxTimeDist uniform(double lo, double hi) {
        if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("tx_dist: need 0 < lo < hi");
        return {Kind::Uniform, lo, hi};
    }

    /// Exponential(mean_raw) conditioned on T <= t_max.
    static TxTimeDist truncated_exponential(double mean_raw, double t_max) {
        if (!(mean_raw > 0.0 && t_max > 0.0))
            throw std::invalid_argument("tx_dist: need mean_raw > 0 and t_max > 0");
        return {Kind::TruncatedExponential, mean_raw, t_max};
    }

    Kind kind() const { return kind_; }

    double mean() const {
        switch (kind_) {
            case Kind::Deterministic: return a_;
            case Kind::Uniform: return 0.5 * (a_ + b_);
            case Kind::TruncatedExponential: {
                // E[T | T <= t_max] for Exp(a_).
                const double q = std::expm1(-b_ / a_);  // e^{-t_max/m} - 1
                return a_ + b_ * (1.0 + q) / q;
            }
        }
        return 0.0;
    }

    double max() const { return kind_ == Kind::Deterministic ? a_ : b_; }

    double sample(Rng& rng) const {
        switch (kind_) {
            case Kind::Deterministic: return a_;
            case Kind::Uniform: return a_ + (b_ - a_) * rng.uniform01();
            case Kind::TruncatedExponential: {
                const double u = rng.uniform01();
                return -a_ * std::log1p(u * std::expm1(-b_ / a_));
            }
        }
        return a_;
    }

    double param_a() const { return a_; }
    double param_b() const { return b_; }

  private:
    TxTimeDist(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

    Kind kind_;
    double a_, b_;
};

}  // namespace agewake
