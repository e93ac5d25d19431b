#include "pilab/runconfig.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pilab/parallel.hpp"

namespace pilab {

using json = nlohmann::json;

const char* kVersion = "0.1.0";

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k))
            throw std::invalid_argument("config: unknown key '" + k + "' in " + where);
    }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json j = json::parse(text);
    check_keys(j, "root",
               {"system", "costs", "datagen", "features", "training", "boost", "pto",
                "policies", "seed", "out"});
    RunConfig rc;
    if (j.contains("system")) {
        const auto& s = j.at("system");
        check_keys(s, "system", {"K", "Lbar", "R", "T", "T_in", "T_out"});
        get_if(s, "K", rc.system.K);
        get_if(s, "Lbar", rc.system.Lbar);
        get_if(s, "R", rc.system.R);
        get_if(s, "T", rc.system.T);
        get_if(s, "T_in", rc.system.T_in);
        get_if(s, "T_out", rc.system.T_out);
    }
    if (j.contains("costs")) {
        const auto& s = j.at("costs");
        check_keys(s, "costs", {"h", "b", "theta"});
        get_if(s, "h", rc.costs.h);
        get_if(s, "b", rc.costs.b);
        get_if(s, "theta", rc.costs.theta);
    }
    if (j.contains("datagen")) {
        const auto& s = j.at("datagen");
        check_keys(s, "datagen",
                   {"config", "I", "J", "instances", "T_raw", "keep_lo", "keep_hi"});
        get_if(s, "config", rc.datagen.config);
        get_if(s, "I", rc.datagen.I);
        get_if(s, "J", rc.datagen.J);
        get_if(s, "instances", rc.datagen.instances);
        get_if(s, "T_raw", rc.datagen.T_raw);
        get_if(s, "keep_lo", rc.datagen.keep_lo);
        get_if(s, "keep_hi", rc.datagen.keep_hi);
    }
    if (j.contains("features")) {
        const auto& s = j.at("features");
        check_keys(s, "features", {"hist_demand", "hist_lead"});
        get_if(s, "hist_demand", rc.features.hist_demand);
        get_if(s, "hist_lead", rc.features.hist_lead);
    }
    if (j.contains("training")) {
        const auto& s = j.at("training");
        check_keys(s, "training",
                   {"epochs", "batch", "lr", "decay_rate", "decay_step", "weight_decay",
                    "hid_demand", "hid_lead", "hid_order", "lambda_D", "lambda_L",
                    "lambda_POI1", "lambda_POI2", "lambda_D_grid", "lambda_L_grid",
                    "lambda_POI1_grid", "lambda_POI2_grid", "select_lambda", "poi_w"});
        auto& t = rc.training;
        get_if(s, "epochs", t.epochs);
        get_if(s, "batch", t.batch);
        get_if(s, "lr", t.lr);
        get_if(s, "decay_rate", t.decay_rate);
        get_if(s, "decay_step", t.decay_step);
        get_if(s, "weight_decay", t.weight_decay);
        get_if(s, "hid_demand", t.hid_demand);
        get_if(s, "hid_lead", t.hid_lead);
        get_if(s, "hid_order", t.hid_order);
        get_if(s, "lambda_D", t.lambda_D);
        get_if(s, "lambda_L", t.lambda_L);
        get_if(s, "lambda_POI1", t.lambda_POI1);
        get_if(s, "lambda_POI2", t.lambda_POI2);
        get_if(s, "lambda_D_grid", t.lambda_D_grid);
        get_if(s, "lambda_L_grid", t.lambda_L_grid);
        get_if(s, "lambda_POI1_grid", t.lambda_POI1_grid);
        get_if(s, "lambda_POI2_grid", t.lambda_POI2_grid);
        get_if(s, "select_lambda", t.select_lambda);
        get_if(s, "poi_w", t.poi_w);
    }
    if (j.contains("boost")) {
        const auto& s = j.at("boost");
        check_keys(s, "boost", {"gamma_lo", "gamma_hi", "gamma_step"});
        get_if(s, "gamma_lo", rc.boost.gamma_lo);
        get_if(s, "gamma_hi", rc.boost.gamma_hi);
        get_if(s, "gamma_step", rc.boost.gamma_step);
    }
    if (j.contains("pto")) {
        const auto& s = j.at("pto");
        check_keys(s, "pto", {"n_scenarios", "ridge", "ppb"});
        get_if(s, "n_scenarios", rc.pto.n_scenarios);
        get_if(s, "ridge", rc.pto.ridge);
        get_if(s, "ppb", rc.pto.ppb);
    }
    get_if(j, "policies", rc.policies);
    get_if(j, "seed", rc.seed);
    get_if(j, "out", rc.out);

    rc.system.validate();
    rc.costs.validate();
    gen_kind_from_string(rc.datagen.config);
    if (rc.system.T != rc.datagen.keep_hi - rc.datagen.keep_lo + 1)
        throw std::invalid_argument("config: system.T must equal the datagen keep window");
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_run_config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str());
}

GenConfig RunConfig::gen_config() const {
    GenConfig g;
    g.kind = gen_kind_from_string(datagen.config);
    g.I = datagen.I;
    g.J = datagen.J;
    g.T_raw = datagen.T_raw;
    g.keep_lo = datagen.keep_lo;
    g.keep_hi = datagen.keep_hi;
    g.Lbar = system.Lbar;
    g.seed = seed;
    return g;
}

TrainConfig RunConfig::train_config(uint64_t train_seed) const {
    TrainConfig tc;
    tc.lambda_D = training.lambda_D;
    tc.lambda_L = training.lambda_L;
    tc.lambda_poi1 = training.lambda_POI1;
    tc.lambda_poi2 = training.lambda_POI2;
    tc.epochs = training.epochs;
    tc.batch = training.batch;
    tc.seed = train_seed;
    tc.adam = nn::AdamConfig{training.lr,          0.9, 0.999, 1e-8,
                             training.weight_decay, training.decay_rate, training.decay_step};
    return tc;
}

E2EArch RunConfig::arch(bool pil) const {
    E2EArch a;
    a.hid_demand = training.hid_demand;
    a.hid_lead = training.hid_lead;
    a.hid_order = training.hid_order;
    a.pil = pil;
    return a;
}

BoostConfig RunConfig::boost_config() const {
    return BoostConfig{boost.gamma_lo, boost.gamma_hi, boost.gamma_step};
}

PtoConfig RunConfig::pto_config(bool joint_inputs) const {
    PtoConfig pc;
    pc.ridge = pto.ridge;
    pc.n_scenarios = pto.n_scenarios;
    pc.joint_inputs = joint_inputs;
    pc.seed = seed;
    return pc;
}

std::string config_hash(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const RunConfig& rc, const std::string& raw_text, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json j;
    j["tool"] = "pilab";
    j["version"] = kVersion;
    j["config_hash"] = config_hash(raw_text);
    j["seed"] = rc.seed;
    j["threads"] = par::max_threads();
    j["parallel"] = par::enabled();
    j["config"] = json::parse(raw_text);
    std::ofstream os(dir + "/manifest.json");
    if (!os) throw std::runtime_error("write_manifest: cannot open " + dir + "/manifest.json");
    os << j.dump(2) << '\n';
}

}  // namespace pilab
