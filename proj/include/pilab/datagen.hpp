#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pilab/scenario.hpp"

namespace pilab {

enum class GenKind { IC, CC, CR, SCR };

GenKind gen_kind_from_string(const std::string& s);
std::string to_string(GenKind k);

struct GenConfig {
    GenKind kind = GenKind::SCR;
    int I = 50;          // SKUs
    int J = 20;          // DCs
    int T_raw = 360;     // generated days
    int keep_lo = 31;    // kept window (1-based, inclusive)
    int keep_hi = 330;
    int Lbar = 9;        // lead-time clamp bound used downstream
    uint64_t seed = 1;

    int T_kept() const { return keep_hi - keep_lo + 1; }
    void validate() const;
};

// One synthetic instance: feature means mu_k ~ U[0,1] drawn per instance, then
// per-stream AR/iid processes per the configuration. Deterministic in
// (config, seed, instance_id); products parallelize over independent substreams.
ScenarioSet gen_instance(const GenConfig& gen, int instance_id);

struct MomentRow {
    std::string stream;
    double emp_mean, emp_sd, ana_mean, ana_sd;
    double lag1;     // empirical lag-1 autocorrelation
    bool flagged;    // deviation beyond 5% on mean or sd (scale-aware)
};

// Empirical vs analytic stationary moments for the generated streams.
std::vector<MomentRow> stationarity_report(const ScenarioSet& set, const GenConfig& gen);

}  // namespace pilab
