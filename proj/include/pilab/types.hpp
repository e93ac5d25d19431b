#pragma once

#include <stdexcept>
#include <vector>

namespace pilab {

struct CostParams {
    double h = 1.0;      // holding, per unit-period
    double b = 10.0;     // backorder, per unit-period
    double theta = 10.0; // outdating, per unit

    void validate() const {
        if (h <= 0.0 || b <= 0.0 || theta <= 0.0)
            throw std::invalid_argument("CostParams: h, b, theta must be strictly positive");
    }
};

struct SystemConfig {
    int K = 7;      // product lifetime in periods
    int Lbar = 9;   // lead-time upper bound
    int R = 4;      // ordering interval
    int T = 300;    // horizon
    int T_in = 200;
    int T_out = 100;

    int state_dim() const { return K + Lbar - 1; }

    void validate() const {
        if (K < 1) throw std::invalid_argument("SystemConfig: K >= 1 required");
        if (Lbar < 1) throw std::invalid_argument("SystemConfig: Lbar >= 1 required");
        if (R < 1) throw std::invalid_argument("SystemConfig: R >= 1 required");
        if (T < 1 || T_in < 0 || T_out < 0 || T_in + T_out != T)
            throw std::invalid_argument("SystemConfig: need T_in + T_out == T");
    }
};

struct PoiConfig {
    double w = 0.3;  // Gaussian kernel bandwidth
    void validate() const {
        if (w <= 0.0) throw std::invalid_argument("PoiConfig: w > 0 required");
    }
};

// Inventory state z_t, size K+Lbar-1. Index i (0-based) holds slot i+1:
//  slots 1..K-1: on-hand by remaining lifetime, >= 0
//  slot K: net newly available (arrivals minus carried backorder), may be negative
//  slots K+1..K+Lbar-1: pipeline, >= 0
using State = std::vector<double>;

inline State zero_state(const SystemConfig& cfg) { return State(cfg.state_dim(), 0.0); }

inline double on_hand_total(const State& z, int K) {
    double s = 0.0;
    for (int i = 0; i < K; ++i) s += z[i];
    return s;
}

inline double state_total(const State& z) {
    double s = 0.0;
    for (double v : z) s += v;
    return s;
}

}  // namespace pilab
