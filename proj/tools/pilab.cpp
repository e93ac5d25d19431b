// Batch experiment driver: data generation, policy training, out-of-sample
// evaluation and comparison, parameter sweeps, and the newsvendor theory
// experiment. All outputs are deterministic given the config seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pilab/datagen.hpp"
#include "pilab/parallel.hpp"
#include "pilab/pipeline.hpp"
#include "pilab/theory.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pilab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string dataset_path(const std::string& dir, const std::string& cfg, int k) {
    return dir + "/dataset_" + cfg + "_" + std::to_string(k) + ".csv";
}

struct Common {
    std::string config_path;
    std::string data_dir;
    std::string out_dir;
    uint64_t seed_override = 0;
    bool has_seed = false;
    int workers = 0;
    bool serial = false;
};

RunConfig load_common(Common& c, std::string* raw_out = nullptr) {
    std::string raw = c.config_path.empty() ? std::string("{}") : slurp(c.config_path);
    RunConfig rc = parse_run_config(raw);
    if (c.has_seed) rc.seed = c.seed_override;
    if (!c.out_dir.empty()) rc.out = c.out_dir;
    if (c.serial) par::set_enabled(false);
    if (c.workers > 0) par::set_max_threads(c.workers);
    if (raw_out) *raw_out = raw;
    return rc;
}

void add_common(CLI::App* cmd, Common& c, bool need_config = true) {
    auto* opt = cmd->add_option("--config", c.config_path, "run config JSON");
    if (need_config) opt->required();
    cmd->add_option("--data", c.data_dir, "dataset directory");
    cmd->add_option("--out", c.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", c.seed_override, "seed override")
        ->each([&c](const std::string&) { c.has_seed = true; });
    cmd->add_option("--workers", c.workers, "max worker threads");
    cmd->add_flag("--serial", c.serial, "disable OpenMP kernels");
}

int cmd_gen(Common& c) {
    std::string raw;
    RunConfig rc = load_common(c, &raw);
    fs::create_directories(rc.out);
    GenConfig g = rc.gen_config();
    json meta;
    meta["config"] = rc.datagen.config;
    meta["instances"] = rc.datagen.instances;
    meta["seed"] = rc.seed;
    for (int k = 0; k < rc.datagen.instances; ++k) {
        auto set = gen_instance(g, k);
        const auto path = dataset_path(rc.out, rc.datagen.config, k);
        write_csv(set, path);
        meta["mu"][std::to_string(k)] = set.mu;
        std::printf("wrote %s (%d products, T=%d)\n", path.c_str(), set.n_products(), set.T);
    }
    std::ofstream(rc.out + "/datasets.json") << meta.dump(2) << '\n';
    write_manifest(rc, raw, rc.out);
    return 0;
}

ScenarioSet load_instance(const RunConfig& rc, const std::string& data_dir, int k) {
    auto set = read_csv(dataset_path(data_dir, rc.datagen.config, k));
    set.instance_id = k;
    set.config_name = rc.datagen.config;
    return set;
}

int cmd_train(Common& c, const std::string& policy, int instance) {
    std::string raw;
    RunConfig rc = load_common(c, &raw);
    if (c.data_dir.empty()) throw std::runtime_error("train: --data required");
    fs::create_directories(rc.out);
    auto set = load_instance(rc, c.data_dir, instance);
    auto ctx = make_context(set, rc.system, rc.costs, rc.features);
    auto samples = build_samples(ctx);
    if (samples.empty()) throw std::runtime_error("train: no usable training samples");

    const std::string tag = policy + "_" + std::to_string(instance);
    if (policy == "pto" || policy == "pto-ppb") {
        auto m = fit_pto(ctx, samples, rc.pto_config(set.config_name == "SCR"));
        if (policy == "pto-ppb") {
            const double off = select_ppb_offset(m, ctx);
            std::printf("pto-ppb: beta offset %+.2f\n", off);
        }
        save_pto(m, rc.out + "/pto_" + tag + ".json");
    } else if (policy == "e2e-bb" || policy == "e2e-pil" || policy == "e2e-bpil") {
        presample_states(ctx, samples, benchmark_policy_factory(ctx));
        const bool pil = policy != "e2e-bb";
        const uint64_t seed = derive_seed(rc.seed, pil ? 2 : 1, static_cast<uint64_t>(instance));
        E2EModel m;
        if (rc.training.select_lambda) {
            m = train_with_selection(rc, ctx, samples, pil, seed);
        } else {
            TrainConfig tc = rc.train_config(seed);
            tc.log_csv = rc.out + "/trainlog_" + tag + ".csv";
            m = train_e2e(samples, rc.arch(pil), rc.system, rc.costs,
                          PoiConfig{rc.training.poi_w}, tc);
        }
        save_checkpoint(m, rc.out + "/ckpt_" + tag + ".json");
        if (policy == "e2e-bpil") {
            auto br = boost_gamma(m, ctx, rc.boost_config());
            json bj;
            bj["gamma"] = br.gamma;
            bj["in_sample_cost"] = br.cost_at_gamma;
            bj["in_sample_cost_at_1"] = br.cost_at_one;
            for (auto& [g, cost] : br.curve) bj["curve"].push_back({{"gamma", g}, {"cost", cost}});
            std::ofstream(rc.out + "/boost_" + tag + ".json") << bj.dump(2) << '\n';
            std::printf("boost: gamma*=%.2f (in-sample %.4f vs %.4f at 1.0)\n", br.gamma,
                        br.cost_at_gamma, br.cost_at_one);
        }
    } else {
        throw std::runtime_error("train: unknown policy " + policy);
    }
    write_manifest(rc, raw, rc.out);
    std::printf("train: artifacts in %s\n", rc.out.c_str());
    return 0;
}

int run_compare(const RunConfig& rc, const std::string& raw, const std::string& data_dir,
                const std::vector<std::string>& policies, const std::string& out) {
    fs::create_directories(out);
    std::vector<std::vector<double>> instance_costs(policies.size());
    std::vector<EvalReport> last_reports;
    json summary;
    for (int k = 0; k < rc.datagen.instances; ++k) {
        auto set = load_instance(rc, data_dir, k);
        auto res = compare_instance(rc, set, policies);
        write_report_csv(res.reports, out + "/report_instance_" + std::to_string(k) + ".csv");
        for (std::size_t i = 0; i < policies.size(); ++i)
            instance_costs[i].push_back(res.reports[i].avg.total);
        if (res.has_boost) {
            summary["boost"][std::to_string(k)] = {{"gamma", res.boost.gamma},
                                                   {"in_sample", res.boost.cost_at_gamma},
                                                   {"in_sample_at_1", res.boost.cost_at_one}};
        }
        last_reports = res.reports;
        std::printf("instance %d done\n", k);
    }
    // mean-over-instances summary rows reuse the EvalReport shape
    std::vector<EvalReport> mean_rows;
    for (std::size_t i = 0; i < policies.size(); ++i) {
        EvalReport r;
        r.policy = policies[i];
        r.avg.total = stats::mean(instance_costs[i]);
        mean_rows.push_back(r);
        summary["mean_cost"][policies[i]] = r.avg.total;
    }
    std::string ref = "e2e-bpil";
    bool has_ref = false;
    for (const auto& p : policies) has_ref |= (p == ref);
    if (!has_ref) ref = policies.front();
    write_gap_csv(relative_gaps(mean_rows, ref), out + "/gaps.csv");
    if (rc.datagen.instances >= 2)
        write_ttest_csv(pairwise_tests(policies, instance_costs), out + "/ttests.csv");
    write_long_csv(last_reports, out + "/last_instance_long.csv");
    {
        std::ofstream os(out + "/instance_costs.csv");
        os << "policy";
        for (int k = 0; k < rc.datagen.instances; ++k) os << ",instance_" << k;
        os << '\n';
        os.precision(10);
        for (std::size_t i = 0; i < policies.size(); ++i) {
            os << policies[i];
            for (double v : instance_costs[i]) os << ',' << v;
            os << '\n';
        }
    }
    std::ofstream(out + "/summary.json") << summary.dump(2) << '\n';
    write_manifest(rc, raw, out);
    std::printf("compare: outputs in %s\n", out.c_str());
    return 0;
}

int cmd_compare(Common& c, std::vector<std::string> policies) {
    std::string raw;
    RunConfig rc = load_common(c, &raw);
    if (c.data_dir.empty()) throw std::runtime_error("compare: --data required");
    if (policies.empty()) policies = rc.policies;
    return run_compare(rc, raw, c.data_dir, policies, rc.out);
}

int cmd_sweep(Common& c, const std::string& vary, const std::string& values,
              std::vector<std::string> policies) {
    std::string raw;
    RunConfig rc = load_common(c, &raw);
    if (c.data_dir.empty()) throw std::runtime_error("sweep: --data required");
    if (policies.empty()) policies = rc.policies;
    std::vector<double> vals;
    std::stringstream ss(values);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.empty()) throw std::runtime_error("sweep: no values");
    for (double v : vals) {
        RunConfig r2 = rc;
        if (vary == "K")
            r2.system.K = static_cast<int>(v);
        else if (vary == "R")
            r2.system.R = static_cast<int>(v);
        else if (vary == "b")
            r2.costs.b = v;
        else if (vary == "theta")
            r2.costs.theta = v;
        else if (vary == "h")
            r2.costs.h = v;
        else
            throw std::runtime_error("sweep: --vary must be one of K,R,b,theta,h");
        std::ostringstream name;
        name << rc.out << "/sweep_" << vary << "_" << v;
        std::printf("== sweep %s = %g ==\n", vary.c_str(), v);
        run_compare(r2, raw, c.data_dir, policies, name.str());
    }
    return 0;
}

int cmd_eval(Common& c, const std::string& policy, const std::string& checkpoint, int instance) {
    std::string raw;
    RunConfig rc = load_common(c, &raw);
    if (c.data_dir.empty()) throw std::runtime_error("eval: --data required");
    fs::create_directories(rc.out);
    auto set = load_instance(rc, c.data_dir, instance);
    auto ctx = make_context(set, rc.system, rc.costs, rc.features);

    EvalReport rep;
    if (policy == "benchmark") {
        rep = evaluate_policy(ctx, benchmark_policy_factory(ctx), policy);
    } else if (policy == "pto-pb" || policy == "pto-ppb") {
        if (checkpoint.empty()) throw std::runtime_error("eval: --checkpoint required for pto");
        auto m = load_pto(checkpoint);
        rep = evaluate_policy(ctx, pto_policy_factory(m, ctx), policy);
    } else if (policy == "e2e-bb" || policy == "e2e-pil" || policy == "e2e-bpil") {
        if (checkpoint.empty()) throw std::runtime_error("eval: --checkpoint required for e2e");
        auto m = load_checkpoint(checkpoint);
        double gamma = 1.0;
        if (policy == "e2e-bpil") {
            auto br = boost_gamma(m, ctx, rc.boost_config());
            gamma = br.gamma;
        }
        rep = evaluate_policy(ctx, e2e_policy_factory(m, ctx, gamma), policy);
    } else {
        throw std::runtime_error("eval: unknown policy " + policy);
    }
    write_report_csv({rep}, rc.out + "/eval_" + policy + "_" + std::to_string(instance) + ".csv");
    write_manifest(rc, raw, rc.out);
    std::printf("eval: %s instance %d avg cost %.6f\n", policy.c_str(), instance, rep.avg.total);
    return 0;
}

int cmd_theory(Common& c, int degree, const std::string& grid, int seeds, int mc) {
    RunConfig rc;
    std::string raw = "{}";
    if (!c.config_path.empty()) {
        raw = slurp(c.config_path);
        rc = parse_run_config(raw);
    }
    if (c.has_seed) rc.seed = c.seed_override;
    if (!c.out_dir.empty()) rc.out = c.out_dir;
    if (c.serial) par::set_enabled(false);
    if (c.workers > 0) par::set_max_threads(c.workers);
    fs::create_directories(rc.out);

    std::vector<int> n_grid;
    std::stringstream ss(grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) n_grid.push_back(std::stoi(tok));
    theory::NewsvendorWorld w;
    auto curves = theory::excess_risk_experiment(w, degree, n_grid, seeds, mc, rc.seed);
    theory::write_curves_csv(curves, rc.out + "/risk_curves.csv");
    write_manifest(rc, raw, rc.out);
    std::printf("theory: optimal risk %.5f, pseudo-dimension sample ratio 2/(2+A) = %.4f\n",
                curves.optimal, curves.sample_ratio);
    for (const auto& p : curves.points)
        std::printf("  n=%6d  full %.5f (sd %.5f)  constrained %.5f (sd %.5f)\n", p.n,
                    p.full_mean, p.full_sd, p.cons_mean, p.cons_sd);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perishable-inventory policy laboratory"};
    app.require_subcommand(1);

    Common cgen, ctrain, ceval, ccomp, csweep, ctheory, cself;
    std::string policy, checkpoint, vary, values, theory_grid = "50,200,1000";
    std::vector<std::string> policies;
    int instance = 0, degree = 2, seeds = 100, mc = 100000;
    bool quick = false;

    auto* gen = app.add_subcommand("gen", "generate synthetic datasets");
    add_common(gen, cgen);

    auto* train = app.add_subcommand("train", "train a policy on one instance");
    add_common(train, ctrain);
    train->add_option("--policy", policy, "e2e-bb | e2e-pil | e2e-bpil | pto | pto-ppb")
        ->required();
    train->add_option("--instance", instance, "instance index");

    auto* eval = app.add_subcommand("eval", "evaluate a policy out of sample");
    add_common(eval, ceval);
    eval->add_option("--policy", policy, "policy name")->required();
    eval->add_option("--checkpoint", checkpoint, "model checkpoint path");
    eval->add_option("--instance", instance, "instance index");

    auto* comp = app.add_subcommand("compare", "train+evaluate the policy list");
    add_common(comp, ccomp);
    comp->add_option("--policies", policies, "subset of the config policy list");

    auto* sweep = app.add_subcommand("sweep", "one-parameter-at-a-time grid");
    add_common(sweep, csweep);
    sweep->add_option("--vary", vary, "K | R | b | theta | h")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--policies", policies, "subset of the config policy list");

    auto* theo = app.add_subcommand("theory", "constrained-class excess-risk experiment");
    add_common(theo, ctheory, false);
    theo->add_option("--degree", degree, "polynomial degree A");
    theo->add_option("--n-grid", theory_grid, "sample sizes, comma separated");
    theo->add_option("--seeds", seeds, "seeds per grid point");
    theo->add_option("--mc", mc, "Monte-Carlo test draws");

    auto* self = app.add_subcommand("selftest", "run the invariant suites");
    add_common(self, cself, false);
    self->add_flag("--quick", quick, "(reserved)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(cgen);
        if (train->parsed()) return cmd_train(ctrain, policy, instance);
        if (eval->parsed()) return cmd_eval(ceval, policy, checkpoint, instance);
        if (comp->parsed()) return cmd_compare(ccomp, policies);
        if (sweep->parsed()) return cmd_sweep(csweep, vary, values, policies);
        if (theo->parsed()) return cmd_theory(ctheory, degree, theory_grid, seeds, mc);
        if (self->parsed()) {
            if (cself.serial) par::set_enabled(false);
            if (cself.workers > 0) par::set_max_threads(cself.workers);
            return selftest(true) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
