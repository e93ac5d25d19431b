#include "pilab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace pilab::linalg {

Matrix cholesky(const Matrix& m) {
    const int n = m.n;
    Matrix l(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

std::vector<double> spd_solve(const Matrix& a, std::span<const double> b) {
    if (a.n != static_cast<int>(b.size())) throw std::invalid_argument("spd_solve: size mismatch");
    Matrix l = cholesky(a);
    const int n = a.n;
    std::vector<double> y(n), x(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

std::vector<double> lower_apply(const Matrix& l, std::span<const double> z) {
    if (l.n != static_cast<int>(z.size())) throw std::invalid_argument("lower_apply: size mismatch");
    std::vector<double> y(l.n, 0.0);
    for (int i = 0; i < l.n; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += l(i, j) * z[j];
        y[i] = s;
    }
    return y;
}

}  // namespace pilab::linalg
