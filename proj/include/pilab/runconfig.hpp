#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pilab/datagen.hpp"
#include "pilab/e2e.hpp"
#include "pilab/pto.hpp"
#include "pilab/types.hpp"

namespace pilab {

// Experiment configuration document. Schema-validated: unknown keys are rejected.
struct RunConfig {
    SystemConfig system;
    CostParams costs;

    struct Datagen {
        std::string config = "SCR";
        int I = 10, J = 10;
        int instances = 5;
        int T_raw = 360;
        int keep_lo = 31, keep_hi = 330;
    } datagen;

    FeatureSpec features;

    struct Training {
        int epochs = 30;
        int batch = 128;
        double lr = 1e-3;
        double decay_rate = 0.6;
        int decay_step = 5;
        double weight_decay = 1e-5;
        int hid_demand = 64, hid_lead = 32, hid_order = 64;
        double lambda_D = 1.0, lambda_L = 0.1, lambda_POI1 = 1.0, lambda_POI2 = 0.5;
        std::vector<double> lambda_D_grid{0.0, 0.1, 1.0, 2.5};
        std::vector<double> lambda_L_grid{0.0, 0.01, 0.1, 0.25};
        std::vector<double> lambda_POI1_grid{0.0, 0.1, 1.0, 2.5};
        std::vector<double> lambda_POI2_grid{0.0, 0.1, 0.5, 1.0};
        bool select_lambda = false;
        double poi_w = 0.3;
    } training;

    struct Boost {
        double gamma_lo = 0.8, gamma_hi = 1.4, gamma_step = 0.05;
    } boost;

    struct Pto {
        int n_scenarios = 200;
        double ridge = 1e-3;
        bool ppb = false;
    } pto;

    std::vector<std::string> policies{"benchmark", "pto-pb", "e2e-bb", "e2e-pil", "e2e-bpil"};
    uint64_t seed = 7;
    std::string out = "runs/out";

    GenConfig gen_config() const;
    TrainConfig train_config(uint64_t train_seed) const;
    E2EArch arch(bool pil) const;
    BoostConfig boost_config() const;
    PtoConfig pto_config(bool joint_inputs) const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// FNV-1a over the canonicalized config text.
std::string config_hash(const std::string& text);

// runs/<out>/manifest.json with hash, seed, version, threads and the config body.
void write_manifest(const RunConfig& rc, const std::string& raw_text, const std::string& dir);

extern const char* kVersion;

}  // namespace pilab
