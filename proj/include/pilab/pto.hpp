#pragma once

#include <span>
#include <string>
#include <vector>

#include "pilab/heuristics.hpp"
#include "pilab/linalg.hpp"
#include "pilab/rng.hpp"
#include "pilab/samples.hpp"

namespace pilab {

// Linear map y = W x + b fit by ridge regression (intercept unpenalized).
struct LinearModel {
    int in = 0, out = 0;
    std::vector<double> W;  // out x in, row-major
    std::vector<double> b;
    std::vector<double> apply(std::span<const double> x) const;
};

LinearModel fit_ridge(const std::vector<std::vector<double>>& X,
                      const std::vector<std::vector<double>>& Y, double lambda);

// Multivariate-normal residual model with per-coordinate truncation at the
// historical min/max and a diagonal ridge of 1e-6 * trace/dim.
struct ResidualModel {
    int dim = 0;
    std::vector<double> mean;
    linalg::Matrix cov;
    linalg::Matrix chol;
    std::vector<double> lo, hi;
};

ResidualModel fit_residual_mvn(const std::vector<std::vector<double>>& residuals);

// mean + L z with z iid standard normal, then clamped into [lo, hi].
std::vector<double> sample_residual(const ResidualModel& m, Rng& rng);

struct PtoConfig {
    double ridge = 1e-3;
    int n_scenarios = 200;
    bool joint_inputs = false;  // feed both histories to both forecasters (SCR)
    uint64_t seed = 1;
};

struct PtoModel {
    PtoConfig pc;
    FeatureSpec feat;
    SystemConfig cfg;
    LinearModel demand;     // history windows -> K+Lbar mean demands
    LinearModel lead;       // history windows -> 2 mean leads
    ResidualModel eps;      // demand residuals
    ResidualModel eta;      // lead residuals
    double beta_offset = 0.0;  // PPB tuning shift on the balancing coefficient

    std::vector<double> demand_input(std::span<const double> x) const;
    std::vector<double> lead_input(std::span<const double> x) const;
};

// Fits forecasters on the training samples and the residual MVNs on the
// in-sample residuals.
PtoModel fit_pto(const DatasetContext& ctx, const std::vector<TrainingSample>& samples,
                 const PtoConfig& pc);

// N sampled futures for the PB expectation at feature vector x: demand paths are
// mean + truncated MVN draws clamped at 0; leads are mean + residual, floored and
// clamped into [1, Lbar]. Deterministic given the seed.
std::vector<PbScenario> pto_scenarios(const PtoModel& m, std::span<const double> x, int n,
                                      uint64_t seed);

// PB order on the sampled scenarios, beta from the predicted mean lead
// (plus the PPB offset when tuned).
PbResult pto_pb_order(const PtoModel& m, std::span<const double> x, const State& z,
                      const CostParams& par, double q_max, uint64_t seed);

ProductPolicyFactory pto_policy_factory(const PtoModel& m, const DatasetContext& ctx);

// PTO-PPB: picks the balancing-coefficient offset on beta + {-0.5,...,+0.5} (step
// 0.05) by in-sample simulated cost; ties resolve to the smallest offset.
double select_ppb_offset(PtoModel& m, const DatasetContext& ctx);

void save_pto(const PtoModel& m, const std::string& path);
PtoModel load_pto(const std::string& path);

}  // namespace pilab
