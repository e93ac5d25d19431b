#pragma once

#include <span>
#include <vector>

#include "pilab/autodiff.hpp"
#include "pilab/types.hpp"

namespace pilab {

// Projected on-hand inventory under the counterfactual no-order rollout.
// Demand windows are offset-indexed from t_m and must cover K+Lbar offsets.

// Exact POI for integer lead: K values z^POI_s, s = v_m .. v_m+K-1, where
// z^POI_s = sum_i z_i - D_[t_m, s-1] - B_[t_m, s-1](z).
std::vector<double> exact_poi(const State& z, std::span<const double> d, int lead, int K);

// Gaussian-kernel alignment step: row s' of the output averages the candidates
// with weights exp(-(lead+s'-i)^2/w), normalized to sum 1.
std::vector<double> kernel_smooth(std::span<const double> candidates, double lead, double w,
                                  int K);

// Differentiable counterpart: Gaussian-kernel alignment over the candidate values
// D_i - D~_i(z) with the kernel centered at lead+s'. lead_pred is clamped to
// [1, Lbar] before kernel evaluation. Returns K values.
std::vector<double> smoothed_poi(const State& z, std::span<const double> d_pred,
                                 double lead_pred, const PoiConfig& pc, int K, int Lbar);

// Tape version: gradients flow to the demand predictions and the lead prediction;
// the state enters as constants.
std::vector<ad::Var> smoothed_poi_tape(ad::Tape& tape, const State& z,
                                       std::span<const ad::Var> d_pred, ad::Var lead_pred,
                                       const PoiConfig& pc, int K, int Lbar);

}  // namespace pilab
