#pragma once

#include <functional>
#include <vector>

#include "pilab/dynamics.hpp"
#include "pilab/scenario.hpp"
#include "pilab/types.hpp"

namespace pilab {

// Fixed feature layout shared by the E2E nets, the PTO forecasters and the
// policy adapters:
//   [0 .. hd-1]   demand history, periods t-hd .. t-1 (chronological)
//   [hd .. hd+hl-1] effective lead times at this path's previous epochs t-hl*R .. t-R
//   [hd+hl]       benchmark guidance (critical-ratio demand quantile x mean lead)
//   [hd+hl+1]     sku id / I
//   [hd+hl+2]     dc id / J
//   [hd+hl+3]     sku mean in-sample demand
//   [hd+hl+4]     dc mean in-sample demand
struct FeatureSpec {
    int hist_demand = 8;
    int hist_lead = 2;
    int dim() const { return hist_demand + hist_lead + 5; }
    int bench_index() const { return hist_demand + hist_lead; }
};

// Binds a scenario set to system/cost parameters and precomputed per-product
// statistics (expanding-window benchmark series, entity demand means).
struct DatasetContext {
    const ScenarioSet* set = nullptr;
    SystemConfig cfg;
    CostParams par;
    FeatureSpec feat;
    double tau = 10.0 / 11.0;  // critical ratio b/(b+h)

    std::vector<std::vector<double>> bench;  // [product][t-1], t >= 2
    std::vector<double> prod_mean;           // in-sample mean demand per product
    std::vector<double> prod_max;            // in-sample max demand per product
    std::vector<double> sku_mean, dc_mean;   // indexed by sku-1 / dc-1
    int n_sku = 0, n_dc = 0;

    int n_products() const { return set->n_products(); }
};

DatasetContext make_context(const ScenarioSet& set, const SystemConfig& cfg,
                            const CostParams& par, FeatureSpec feat = {});

// Feature vector at ordering epoch t (1-based, t > max(hist windows)).
std::vector<double> build_features(const DatasetContext& ctx, int product, int t);

// True once both history windows are complete at epoch t. Policy adapters order
// nothing before that point.
bool features_available(const DatasetContext& ctx, int t);

// Path index whose epoch grid {r, r+R, ...} contains t.
inline int path_of_epoch(int t, int R) { return (t - 1) % R + 1; }

struct TrainingSample {
    int product = 0;
    int t = 0;       // epoch, global 1-based, within the in-sample window
    int r = 0;       // shifted path owning this epoch
    std::vector<double> x;
    State z;                        // pre-sampled inventory state at (product, t)
    std::vector<double> d_future;   // K+Lbar demands from t
    int lead0 = 1;                  // effective lead of the order at t
    int lead1 = 1;                  // effective lead of the order at t+R
    int v_next_off = 0;             // max(R + lead1, lead0)
};

// Sliding extraction over all in-sample epochs with complete history and future
// windows; states left empty until presample_states pairs them in.
std::vector<TrainingSample> build_samples(const DatasetContext& ctx);

// Independent policy per (product, path): returns the order quantity policy used
// by the simulator on that path.
using ProductPolicyFactory = std::function<PolicyFn(int product, int path_r)>;

// Orders the benchmark-guidance quantity at every epoch.
ProductPolicyFactory benchmark_policy_factory(const DatasetContext& ctx);

// Rolls `policy` over the in-sample window on every (product, path) and fills each
// sample's state with the pre-decision state of its epoch.
void presample_states(const DatasetContext& ctx, std::vector<TrainingSample>& samples,
                      const ProductPolicyFactory& policy);

// Convenience: pre-sampled states under the benchmark policy, keyed [product][t-1].
std::vector<std::vector<State>> presample_state_table(const DatasetContext& ctx,
                                                      const ProductPolicyFactory& policy);

}  // namespace pilab
