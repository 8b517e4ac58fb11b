// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clicklab/errors.hpp"

namespace clicklab {

inline constexpr int jacobi_max_dim = 64;
inline constexpr double jacobi_offdiag_tol = 1e-13;

struct EigenSystem {
    std::vector<double> values;   // unsorted, as produced by the sweep
    std::vector<double> vectors;  // column-major: vectors[i + dim*j] = component i of eigenvector j
    int dim = 0;

    double vector_at(int i, int j) const {
        return vectors[static_cast<std::size_t>(i) + static_cast<std::size_t>(dim) * static_cast<std::size_t>(j)];
    }
};

struct MinEig {
    double value = 0.0;
    std::vector<double> vector;
    bool degenerate = false;
};

/// Cyclic Jacobi diagonalization of a small symmetric matrix (row-major,
/// dim <= 64). Sweeps run until the off-diagonal Frobenius norm drops below
/// jacobi_offdiag_tol. Asymmetry beyond 1e-10 is rejected.
inline EigenSystem jacobi_eigen(std::vector<double> a, int dim) {
    if (dim < 1) throw ValidationError("jacobi: dimension must be >= 1");
    if (dim > jacobi_max_dim)
        throw SizeError("jacobi: dimension " + std::to_string(dim) + " exceeds " + std::to_string(jacobi_max_dim));
    if (a.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
        throw ValidationError("jacobi: matrix size does not match dimension");
    auto at = [&](int i, int j) -> double& {
        return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)];
    };
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            if (std::abs(at(i, j) - at(j, i)) > 1e-10)
                throw ValidationError("jacobi: matrix asymmetric beyond 1e-10 at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");

    EigenSystem sys;
    sys.dim = dim;
    sys.vectors.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i)
        sys.vectors[static_cast<std::size_t>(i) * (static_cast<std::size_t>(dim) + 1)] = 1.0;
    auto vec = [&](int i, int j) -> double& {
        return sys.vectors[static_cast<std::size_t>(i) + static_cast<std::size_t>(dim) * static_cast<std::size_t>(j)];
    };

    auto offdiag_norm = [&]() {
        double s = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) s += 2 * at(i, j) * at(i, j);
        return std::sqrt(s);
    };

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && offdiag_norm() > jacobi_offdiag_tol; ++sweep) {
        for (int p = 0; p < dim - 1; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                double apq = at(p, q);
                if (apq == 0.0) continue;
                double theta = (at(q, q) - at(p, p)) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(t * t + 1);
                double s = t * c;
                double tau = s / (1 + c);

                at(p, p) -= t * apq;
                at(q, q) += t * apq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                for (int i = 0; i < dim; ++i) {
                    if (i != p && i != q) {
                        double aip = at(i, p), aiq = at(i, q);
                        at(i, p) = aip - s * (aiq + tau * aip);
                        at(i, q) = aiq + s * (aip - tau * aiq);
                        at(p, i) = at(i, p);
                        at(q, i) = at(i, q);
                    }
                    double vip = vec(i, p), viq = vec(i, q);
                    vec(i, p) = vip - s * (viq + tau * vip);
                    vec(i, q) = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if (offdiag_norm() > jacobi_offdiag_tol) throw NumericalError("jacobi: sweep limit reached");

    sys.values.resize(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) sys.values[static_cast<std::size_t>(i)] = at(i, i);
    return sys;
}

namespace detail {

/// Sign convention: first component with |v_i| > 1e-14 is made positive.
inline void normalize_sign(std::vector<double>& v) {
    for (double x : v) {
        if (std::abs(x) > 1e-14) {
            if (x < 0)
                for (double& y : v) y = -y;
            return;
        }
    }
}

}  // namespace detail

/// Smallest eigenvalue and its unit eigenvector. When several eigenvalues lie
/// within 1e-12 of the minimum the result is flagged degenerate and, among
/// the tied sign-normalized candidates, the vector with the earliest
/// positive mass (componentwise lexicographically greatest) is returned.
inline MinEig min_eig_sym(const std::vector<double>& matrix, int dim) {
    EigenSystem sys = jacobi_eigen(matrix, dim);
    double min_val = sys.values[0];
    for (double v : sys.values) min_val = std::min(min_val, v);

    std::vector<int> tied;
    for (int j = 0; j < dim; ++j)
        if (sys.values[static_cast<std::size_t>(j)] <= min_val + 1e-12) tied.push_back(j);

    MinEig result;
    result.degenerate = tied.size() > 1;
    result.value = min_val;
    std::vector<double> best;
    for (int j : tied) {
        std::vector<double> cand(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) cand[static_cast<std::size_t>(i)] = sys.vector_at(i, j);
        detail::normalize_sign(cand);
        if (best.empty() || cand > best) best = cand;
    }
    result.vector = best;
    return result;
}

}  // namespace clicklab
