#pragma once

#include <span>
#include <vector>

namespace pilab::linalg {

// Small dense symmetric matrix, row-major n x n.
struct Matrix {
    int n = 0;
    std::vector<double> a;
    Matrix() = default;
    explicit Matrix(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// Cholesky factor L (lower) of an SPD matrix; throws if not positive definite.
Matrix cholesky(const Matrix& m);

// Solve A x = b for SPD A via Cholesky.
std::vector<double> spd_solve(const Matrix& a, std::span<const double> b);

// y = L z for lower-triangular L (used to sample correlated normals).
std::vector<double> lower_apply(const Matrix& l, std::span<const double> z);

}  // namespace pilab::linalg
