#pragma once

#include <span>
#include <string>
#include <vector>

#include "pilab/marginal.hpp"
#include "pilab/types.hpp"

namespace pilab {

// Balancing coefficient (worst-case form): 1 for K=1, else
// (K h + theta) / (2 (K + L - 1) h + theta), with L the mean lead time.
double beta_coefficient(int K, double mean_lead, const CostParams& par);

struct PbConfig {
    double beta = 1.0;
    double q_max = 0.0;   // search upper bound; must be set by the caller
    double tol = 1e-6;    // relative balance tolerance
};

// One sampled future used by PB's expectations: a demand path from t_m onward
// plus realized lead offsets for this order and the next.
struct PbScenario {
    std::vector<double> demands;  // d[i] = D_{t_m+i}, length >= lead+K-1 windows
    int lead = 1;                 // v_m - t_m
    int v_next_off = kNoHorizon;  // v_{m+1} - t_m
};

struct PbResult {
    double q = 0.0;
    bool balanced = false;   // true if the balance equation crossed within [0, q_max]
    double lhs = 0.0;        // beta * E[H+Theta] at q
    double rhs = 0.0;        // E[Pi] at q
    std::string note;
};

// Solves beta * E[H+Theta](q) = E[Pi](q) over the scenario sample by bisection
// (lhs nondecreasing, rhs nonincreasing in q). Returns the boundary with a
// diagnostic note when there is no crossing in [0, q_max].
PbResult pb_order(const State& z, std::span<const PbScenario> scenarios, const PbConfig& pc,
                  const CostParams& par, int K);

// Certainty-equivalence PIL: q = (S_target - POI at arrival)^+, POI from the
// exact formula at integer leads and the smoothed one otherwise.
double pil_ce_order(const State& z, std::span<const double> demand_means, double mean_lead,
                    double s_target, const SystemConfig& cfg, const PoiConfig& pc = {});

// Benchmark guidance: Quantile_tau(demand history) * mean(lead history).
double quantile_benchmark(std::span<const double> demand_history,
                          std::span<const double> lead_history, double tau);

}  // namespace pilab
