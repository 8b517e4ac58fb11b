// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "clicklab/errors.hpp"

namespace clicklab {

/// Triangular Pascal table of binomial coefficients in double precision.
/// Values beyond 2^53 round, but the additive recurrence keeps the relative
/// error near n*eps, far below the library's 1e-10 tolerances for n <= 2048.
class BinomialTable {
  public:
    explicit BinomialTable(int n_max) : n_max_(n_max) {
        if (n_max < 0) throw ValidationError("BinomialTable: n_max must be >= 0");
        if (n_max > 4096) throw SizeError("BinomialTable: n_max exceeds 4096");
        rows_.resize(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n) {
            auto& row = rows_[static_cast<std::size_t>(n)];
            row.resize(static_cast<std::size_t>(n) + 1, 1.0);
            for (int k = 1; k < n; ++k)
                row[static_cast<std::size_t>(k)] = rows_[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(k) - 1] +
                                                   rows_[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(k)];
        }
    }

    int n_max() const { return n_max_; }

    double operator()(int n, int k) const {
        if (k < 0 || k > n) return 0.0;
        return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }

  private:
    int n_max_;
    std::vector<std::vector<double>> rows_;
};

/// Falling factorial (x)_m = x (x-1) ... (x-m+1).
inline double falling_factorial(double x, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r *= (x - i);
    return r;
}

/// x^n for integer n >= 0 with the 0^0 = 1 convention.
inline double pow_int(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

/// Kahan-compensated accumulator; moment sums over large tables are
/// cancellation-prone, so all statistics use it.
class KahanSum {
  public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace clicklab
