#pragma once

#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "pilab/dynamics.hpp"
#include "pilab/types.hpp"

namespace pilab {

// Per-order marginal cost decomposition. All demand windows are offset-indexed
// from the placement period: d[i] = D_{t_m + i}.
struct MarginalBreakdown {
    double holding = 0.0;    // H(q|z)
    double outdating = 0.0;  // Theta(q|z)
    double backorder = 0.0;  // Pi(q|z)
    double loss() const { return holding + outdating + backorder; }
};

// B_{[t_m, t_m+s_off]}(z): cumulative outdated quantity of the stock already in z,
// via the running-max recursion. s_off = -1 returns 0.
double outdate_quantity(const State& z, std::span<const double> d, int s_off);

// D~_{t_m+s_off}(z): cumulative unmet demand after consuming only the stock in z.
double unmet_demand(const State& z, std::span<const double> d, int s_off);

// D~ for all offsets 0..d.size()-1 in one pass.
std::vector<double> unmet_path(const State& z, std::span<const double> d);

constexpr int kNoHorizon = std::numeric_limits<int>::max() / 4;

struct MarginalWindow {
    int lead = 1;                  // v_m - t_m, in [1, Lbar]
    int v_next_off = kNoHorizon;   // v_{m+1} - t_m (kNoHorizon for the last order)
    int horizon_off = kNoHorizon;  // T - t_m (kNoHorizon when untruncated)
};

// H, Theta, Pi for order quantity q at state z. The loss H+Theta+Pi is convex and
// piecewise linear in q. Throws if the demand window does not cover the cost windows.
MarginalBreakdown marginal_costs(double q, const State& z, std::span<const double> d,
                                 const MarginalWindow& win, int K, const CostParams& par);

// Both sides of the total-cost rearrangement: lhs = sum_t C_t from the trajectory,
// rhs = per-order marginal costs + dead-zone backorder residuals + pre-first-arrival
// costs. Requires a trajectory recorded with states and zero initial inventory.
std::pair<double, double> accounting_identity(const Trajectory& traj,
                                              const std::vector<double>& demands,
                                              const SystemConfig& cfg, const CostParams& par);

}  // namespace pilab
