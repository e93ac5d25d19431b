#pragma once

#include <string>
#include <vector>

#include "pilab/evaluate.hpp"
#include "pilab/pto.hpp"
#include "pilab/runconfig.hpp"

namespace pilab {

// Trained artifacts and out-of-sample reports for one instance.
struct CompareResult {
    std::vector<EvalReport> reports;  // order follows the requested policy list
    E2EModel bb, pil;
    bool has_bb = false, has_pil = false;
    BoostResult boost;
    bool has_boost = false;
    PtoModel pto;
    bool has_pto = false;
    double ppb_offset = 0.0;
};

// Runs the requested policies on one instance: builds training samples, pre-samples
// states under the benchmark policy, trains/fits what each policy needs (reusing the
// E2E-PIL model for E2E-BPIL), and evaluates out of sample.
// Policy names: benchmark, pto-pb, pto-ppb, e2e-bb, e2e-pil, e2e-bpil.
CompareResult compare_instance(const RunConfig& rc, const ScenarioSet& set,
                               const std::vector<std::string>& policies);

// Lambda grid selection by in-sample simulated cost (smallest-cost combination,
// ties to the earliest grid point). Returns the trained winner.
E2EModel train_with_selection(const RunConfig& rc, const DatasetContext& ctx,
                              const std::vector<TrainingSample>& samples, bool pil,
                              uint64_t seed);

// Quick invariant suites (reduced versions of the acceptance criteria):
// accounting identity, homogeneity, gradient checks, POI convergence, DGP moments.
bool selftest(bool verbose);

}  // namespace pilab
