#pragma once

#include <string>
#include <vector>

#include "pilab/nn.hpp"
#include "pilab/samples.hpp"
#include "pilab/types.hpp"

namespace pilab {

// Shared architecture for the learned policies. Three MLP modules over one flat
// parameter vector: a demand module and a lead-time module read the features and
// emit predictions plus hidden representations; the decision head is either a
// black-box order module (reps + raw state -> softplus q) or a PIL module
// (reps -> target level S, combined with the smoothed POI of the state).
struct E2EArch {
    int x_dim = 0;
    int z_dim = 0;
    int d_window = 0;  // K + Lbar demand predictions
    int hid_demand = 64;
    int hid_lead = 32;
    int hid_order = 64;
    bool pil = false;

    nn::MlpSpec demand_spec() const { return {{x_dim, hid_demand, d_window}}; }
    nn::MlpSpec lead_spec() const { return {{x_dim, hid_lead, 2}}; }
    nn::MlpSpec head_spec() const {
        const int in = hid_demand + hid_lead + (pil ? 0 : z_dim);
        return {{in, hid_order, 1}};
    }
    int param_count() const;
};

struct E2EModel {
    E2EArch arch;
    SystemConfig cfg;
    PoiConfig poi;
    std::vector<double> params;

    void init(Rng& rng);
};

struct E2EDecision {
    double q = 0.0;
    double s_target = 0.0;  // PIL only
    double poi0 = 0.0;      // PIL only
    std::vector<double> d_pred;
    std::vector<double> l_pred;
};

// Plain-double forward pass (policy evaluation path).
E2EDecision e2e_forward(const E2EModel& m, std::span<const double> x, const State& z);

struct TrainConfig {
    double lambda_D = 1.0;
    double lambda_L = 0.1;
    double lambda_poi1 = 1.0;
    double lambda_poi2 = 0.5;
    int epochs = 30;
    int batch = 128;
    uint64_t seed = 1;
    nn::AdamConfig adam{1e-3, 0.9, 0.999, 1e-8, 1e-5, 0.6, 5};
    int grad_block = 16;        // samples per deterministic accumulation block
    std::string log_csv;        // per-epoch loss components, empty to disable
    std::function<void(int, const E2EModel&)> on_epoch;  // test/diagnostic hook
};

struct LossParts {
    double total = 0.0, marginal = 0.0, d_mse = 0.0, l_mse = 0.0, poi1 = 0.0, poi2 = 0.0;
};

// Eq. (7)/(8) per-sample loss evaluated with plain doubles; the independent
// counterpart of the tape assembly used for training.
LossParts e2e_loss_value(const E2EModel& m, const TrainingSample& s, const TrainConfig& tc,
                         const CostParams& par);

// Same loss built on the tape; returns parts and adds d(loss)/d(param) into grad.
LossParts e2e_loss_grad(const E2EModel& m, const TrainingSample& s, const TrainConfig& tc,
                        const CostParams& par, ad::Tape& tape, std::span<double> grad);

// Minimizes the batch-mean loss with Adam. Deterministic given tc.seed (Fisher-
// Yates shuffling, fixed-block gradient accumulation). Throws on non-finite loss.
E2EModel train_e2e(const std::vector<TrainingSample>& samples, E2EArch arch,
                   const SystemConfig& cfg, const CostParams& par, const PoiConfig& poi,
                   const TrainConfig& tc);

// Policy adapters. gamma scales the model's order output (boosting wrapper).
ProductPolicyFactory e2e_policy_factory(const E2EModel& m, const DatasetContext& ctx,
                                        double gamma = 1.0);

struct BoostConfig {
    double lo = 0.8, hi = 1.4, step = 0.05;
    std::vector<double> grid() const;
};

struct BoostResult {
    double gamma = 1.0;
    double cost_at_gamma = 0.0;
    double cost_at_one = 0.0;
    std::vector<std::pair<double, double>> curve;  // (gamma, in-sample cost)
};

// gamma* = argmin over the grid of in-sample simulated average cost of
// gamma * pi^{E2E-PIL}; ties resolve to the smallest gamma.
BoostResult boost_gamma(const E2EModel& m, const DatasetContext& ctx, const BoostConfig& bc);

void save_checkpoint(const E2EModel& m, const std::string& path);
E2EModel load_checkpoint(const std::string& path);

// --- gradient-suite helpers ------------------------------------------------

struct GradCheck {
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_err = 0.0;
    double kink_margin = 0.0;  // min |input| over kinked ops during the tape pass
};

// Compares d(loss)/d(params[idx]) from the tape against a central finite
// difference of the double-path loss.
GradCheck grad_check_one(const E2EModel& m, const TrainingSample& s, const TrainConfig& tc,
                         const CostParams& par, int param_idx, double fd_h = 1e-6);

// Random-but-valid training sample for the gradient and POI suites.
TrainingSample make_random_sample(Rng& rng, const SystemConfig& cfg, int x_dim);

}  // namespace pilab
