#pragma once

#include <span>
#include <string>
#include <vector>

#include "pilab/autodiff.hpp"
#include "pilab/rng.hpp"

namespace pilab::nn {

// Fully connected net: widths[0] inputs, widths.back() outputs, ReLU on hidden
// layers, linear output. Parameters are flat: per layer W (out x in, row-major)
// then bias.
struct MlpSpec {
    std::vector<int> widths;
    int param_count() const;
};

void init_params(const MlpSpec& spec, std::span<double> params, Rng& rng);

struct ForwardD {
    std::vector<double> out;
    std::vector<double> last_hidden;  // empty for single-layer nets
};
ForwardD mlp_forward(const MlpSpec& spec, std::span<const double> params,
                     std::span<const double> x);

struct ForwardV {
    std::vector<ad::Var> out;
    std::vector<ad::Var> last_hidden;
};
// First layer reads constant features.
ForwardV mlp_forward_c(const MlpSpec& spec, std::span<const ad::Var> params,
                       std::span<const double> x);
// All-variable input (module composition).
ForwardV mlp_forward_v(const MlpSpec& spec, std::span<const ad::Var> params,
                       std::span<const ad::Var> x);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // additive L2 gradient term
    double decay_rate = 1.0;    // lr *= decay_rate every decay_step epochs
    int decay_step = 0;         // 0 disables decay
};

struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::vector<double> m, v;
    explicit AdamState(AdamConfig c = {}) : cfg(c) {}
    double lr_at_epoch(int epoch) const;
};

void adam_step(AdamState& st, std::span<double> params, std::span<const double> grads,
               int epoch);

}  // namespace pilab::nn
