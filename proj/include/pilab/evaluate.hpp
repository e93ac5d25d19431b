#pragma once

#include <string>
#include <vector>

#include "pilab/samples.hpp"
#include "pilab/stats.hpp"

namespace pilab {

struct EvalMetrics {
    double total = 0.0;
    double holding = 0.0;
    double backorder = 0.0;
    double outdating = 0.0;
    double stockout_rate = 0.0;
    double outdating_rate = 0.0;
};

struct EvalReport {
    std::string policy;
    EvalMetrics avg;                      // across products (each product averages its R paths)
    std::vector<double> per_product;      // per-product average total cost
    std::vector<EvalMetrics> per_product_metrics;
    int window_lo = 0, window_hi = 0;
};

// Eq.-(9)-style evaluation on a window of global periods [win_lo, win_hi]:
// R shifted paths with local epochs {r, r+R, ...}, zero initial state per path,
// periods before the first arrival excluded from the averages. Policies receive
// global period indices.
EvalReport evaluate_policy_window(const DatasetContext& ctx, const ProductPolicyFactory& factory,
                                  const std::string& name, int win_lo, int win_hi);

// Default evaluation on the out-of-sample window.
EvalReport evaluate_policy(const DatasetContext& ctx, const ProductPolicyFactory& factory,
                           const std::string& name);

// Aggregates a per-period cost series per Eq. (9) given the first-arrival period
// (local, 1-based): mean over periods first_arrival..T_local.
double eq9_average(std::span<const double> period_costs, int first_arrival);

struct GapRow {
    std::string policy;
    double cost;
    double gap_vs_ref;  // (C - C_ref) / C_ref
};
std::vector<GapRow> relative_gaps(const std::vector<EvalReport>& reports,
                                  const std::string& reference);

void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path);
void write_gap_csv(const std::vector<GapRow>& rows, const std::string& path);

struct PairTestRow {
    std::string a, b;
    stats::TTest welch;
    stats::TTest paired;
};
// Pairwise tests on per-instance cost vectors (one value per instance).
std::vector<PairTestRow> pairwise_tests(const std::vector<std::string>& names,
                                        const std::vector<std::vector<double>>& instance_costs);
void write_ttest_csv(const std::vector<PairTestRow>& rows, const std::string& path);

// Long-format CSV (policy, metric, value) for external plotting.
void write_long_csv(const std::vector<EvalReport>& reports, const std::string& path);

}  // namespace pilab
