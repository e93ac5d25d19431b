#pragma once

#include <span>
#include <vector>

namespace pilab::stats {

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // sample variance (n-1)
double stddev(std::span<const double> v);

// Linearly interpolated quantile (R type 7): for sorted x of size n,
// position h = (n-1)*tau, result x[floor(h)] + frac*(x[floor(h)+1]-x[floor(h)]).
double quantile(std::span<const double> v, double tau);

double norm_cdf(double x);
double norm_inv_cdf(double p);   // Acklam approximation + one Halley refinement
double student_t_cdf(double t, double df);

struct TTest {
    double t = 0.0;
    double p = 0.0;   // one-sided upper tail: P(T >= t)
    double df = 0.0;
    bool degenerate = false;  // zero variance in both samples
};

// Welch two-sample t for H0: mean(a) <= mean(b); larger t favors mean(a) > mean(b).
TTest welch_t(std::span<const double> a, std::span<const double> b);

// Paired t on differences a_i - b_i, same one-sided convention.
TTest paired_t(std::span<const double> a, std::span<const double> b);

}  // namespace pilab::stats
