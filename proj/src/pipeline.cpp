#include "pilab/pipeline.hpp"

#include <cmath>
#include <cstdio>

#include "pilab/datagen.hpp"
#include "pilab/marginal.hpp"
#include "pilab/poi.hpp"

namespace pilab {

namespace {

uint64_t policy_tag(const std::string& name) {
    uint64_t h = 1469598103934665603ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

bool wants(const std::vector<std::string>& ps, const std::string& name) {
    for (const auto& p : ps)
        if (p == name) return true;
    return false;
}

}  // namespace

E2EModel train_with_selection(const RunConfig& rc, const DatasetContext& ctx,
                              const std::vector<TrainingSample>& samples, bool pil,
                              uint64_t seed) {
    const auto& tr = rc.training;
    PoiConfig poi{tr.poi_w};
    std::vector<std::pair<double, E2EModel>> fits;
    const std::vector<double> one{0.0};
    const auto& g1 = tr.lambda_D_grid.empty() ? one : tr.lambda_D_grid;
    const auto& g2 = tr.lambda_L_grid.empty() ? one : tr.lambda_L_grid;
    const auto& g3 = pil ? (tr.lambda_POI1_grid.empty() ? one : tr.lambda_POI1_grid) : one;
    const auto& g4 = pil ? (tr.lambda_POI2_grid.empty() ? one : tr.lambda_POI2_grid) : one;

    double best_cost = 1e300;
    E2EModel best;
    for (double lD : g1)
        for (double lL : g2)
            for (double l1 : g3)
                for (double l2 : g4) {
                    TrainConfig tc = rc.train_config(seed);
                    tc.lambda_D = lD;
                    tc.lambda_L = lL;
                    tc.lambda_poi1 = l1;
                    tc.lambda_poi2 = l2;
                    auto m = train_e2e(samples, rc.arch(pil), rc.system, rc.costs, poi, tc);
                    const auto rep = evaluate_policy_window(ctx, e2e_policy_factory(m, ctx),
                                                            "select", 1, rc.system.T_in);
                    if (rep.avg.total < best_cost - 1e-15) {
                        best_cost = rep.avg.total;
                        best = std::move(m);
                    }
                }
    return best;
}

CompareResult compare_instance(const RunConfig& rc, const ScenarioSet& set,
                               const std::vector<std::string>& policies) {
    CompareResult res;
    auto ctx = make_context(set, rc.system, rc.costs, rc.features);

    const bool need_e2e = wants(policies, "e2e-bb") || wants(policies, "e2e-pil") ||
                          wants(policies, "e2e-bpil");
    const bool need_pto = wants(policies, "pto-pb") || wants(policies, "pto-ppb");

    std::vector<TrainingSample> samples;
    if (need_e2e || need_pto) {
        samples = build_samples(ctx);
        if (samples.empty()) throw std::runtime_error("compare_instance: no training samples");
    }
    if (need_e2e) presample_states(ctx, samples, benchmark_policy_factory(ctx));

    auto train_one = [&](bool pil) {
        const uint64_t seed =
            derive_seed(rc.seed, policy_tag(pil ? "e2e-pil" : "e2e-bb"),
                        static_cast<uint64_t>(set.instance_id));
        if (rc.training.select_lambda)
            return train_with_selection(rc, ctx, samples, pil, seed);
        TrainConfig tc = rc.train_config(seed);
        return train_e2e(samples, rc.arch(pil), rc.system, rc.costs,
                         PoiConfig{rc.training.poi_w}, tc);
    };

    if (need_pto) {
        const bool joint = set.config_name == "SCR";
        res.pto = fit_pto(ctx, samples, rc.pto_config(joint));
        res.has_pto = true;
    }
    if (wants(policies, "e2e-bb")) {
        res.bb = train_one(false);
        res.has_bb = true;
    }
    if (wants(policies, "e2e-pil") || wants(policies, "e2e-bpil")) {
        res.pil = train_one(true);
        res.has_pil = true;
    }
    if (wants(policies, "e2e-bpil")) {
        res.boost = boost_gamma(res.pil, ctx, rc.boost_config());
        res.has_boost = true;
    }

    for (const auto& name : policies) {
        if (name == "benchmark") {
            res.reports.push_back(evaluate_policy(ctx, benchmark_policy_factory(ctx), name));
        } else if (name == "pto-pb") {
            res.reports.push_back(evaluate_policy(ctx, pto_policy_factory(res.pto, ctx), name));
        } else if (name == "pto-ppb") {
            PtoModel ppb = res.pto;
            res.ppb_offset = select_ppb_offset(ppb, ctx);
            res.reports.push_back(evaluate_policy(ctx, pto_policy_factory(ppb, ctx), name));
        } else if (name == "e2e-bb") {
            res.reports.push_back(evaluate_policy(ctx, e2e_policy_factory(res.bb, ctx), name));
        } else if (name == "e2e-pil") {
            res.reports.push_back(evaluate_policy(ctx, e2e_policy_factory(res.pil, ctx), name));
        } else if (name == "e2e-bpil") {
            res.reports.push_back(evaluate_policy(
                ctx, e2e_policy_factory(res.pil, ctx, res.boost.gamma), name));
        } else {
            throw std::invalid_argument("compare_instance: unknown policy " + name);
        }
    }
    return res;
}

namespace {

bool check(bool ok, const char* name, bool verbose) {
    if (verbose || !ok) std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    return ok;
}

}  // namespace

bool selftest(bool verbose) {
    bool all = true;
    Rng rng(20240811);

    // accounting identity on random trajectories
    {
        double worst = 0.0;
        for (int c = 0; c < 50; ++c) {
            SystemConfig cfg;
            cfg.K = rng.uniform_int(2, 5);
            cfg.Lbar = rng.uniform_int(1, 4);
            cfg.R = rng.uniform_int(2, 5);
            cfg.T = rng.uniform_int(10, 60);
            cfg.T_in = cfg.T;
            cfg.T_out = 0;
            CostParams par;
            std::vector<double> d(cfg.T), l(cfg.T), q((cfg.T - 1) / cfg.R + 2);
            for (auto& v : d) v = rng.uniform(0.0, 5.0);
            for (auto& v : l) v = rng.uniform_int(1, cfg.Lbar);
            for (auto& v : q) v = rng.uniform(0.0, 8.0);
            auto traj = replay(q, d, l, cfg, par);
            auto [lhs, rhs] = accounting_identity(traj, d, cfg, par);
            worst = std::max(worst, std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs)));
        }
        all &= check(worst <= 1e-9, "accounting identity (50 random trajectories)", verbose);
    }

    // homogeneity of the rollout in (demand, decisions)
    {
        double worst = 0.0;
        for (int c = 0; c < 20; ++c) {
            SystemConfig cfg;
            cfg.K = rng.uniform_int(2, 5);
            cfg.Lbar = rng.uniform_int(1, 3);
            cfg.R = rng.uniform_int(2, 4);
            cfg.T = 30;
            cfg.T_in = 30;
            cfg.T_out = 0;
            CostParams par;
            std::vector<double> d(cfg.T), l(cfg.T), q(cfg.T);
            for (auto& v : d) v = rng.uniform(0.0, 5.0);
            for (auto& v : l) v = rng.uniform_int(1, cfg.Lbar);
            for (auto& v : q) v = rng.uniform(0.0, 6.0);
            const double base = replay(q, d, l, cfg, par).total_cost();
            for (double g : {0.5, 2.0, 10.0}) {
                auto dg = d;
                auto qg = q;
                for (auto& v : dg) v *= g;
                for (auto& v : qg) v *= g;
                const double scaled = replay(qg, dg, l, cfg, par).total_cost();
                worst = std::max(worst, std::fabs(scaled - g * base) /
                                            std::max(1e-12, g * base));
            }
        }
        all &= check(worst <= 1e-12, "cost homogeneity of degree 1", verbose);
    }

    // gradient of the PIL training loss vs finite differences
    {
        SystemConfig cfg;
        cfg.K = 4;
        cfg.Lbar = 3;
        cfg.R = 2;
        cfg.T = 40;
        cfg.T_in = 40;
        cfg.T_out = 0;
        CostParams par;
        TrainConfig tc;
        E2EArch arch;
        arch.x_dim = 6;
        arch.z_dim = cfg.state_dim();
        arch.d_window = cfg.K + cfg.Lbar;
        arch.hid_demand = 8;
        arch.hid_lead = 6;
        arch.hid_order = 8;
        arch.pil = true;
        E2EModel m;
        m.arch = arch;
        m.cfg = cfg;
        m.poi = PoiConfig{0.3};
        Rng r2(7);
        m.init(r2);
        int done = 0, ok = 0;
        while (done < 20) {
            auto s = make_random_sample(r2, cfg, arch.x_dim);
            const int idx = r2.uniform_int(0, static_cast<int>(m.params.size()) - 1);
            auto gc = grad_check_one(m, s, tc, par, idx, 1e-6);
            if (gc.kink_margin < 1e-4) continue;  // resample points near kinks
            ++done;
            if (gc.rel_err < 1e-4 || std::fabs(gc.analytic - gc.numeric) < 1e-7) ++ok;
        }
        all &= check(ok == done, "E2E-PIL loss gradient vs finite differences", verbose);
    }

    // smoothed POI converges to the exact POI at integer leads
    {
        SystemConfig cfg;
        cfg.K = 5;
        cfg.Lbar = 4;
        double worst = 0.0;
        for (int c = 0; c < 30; ++c) {
            auto s = make_random_sample(rng, cfg, 4);
            const auto ex = exact_poi(s.z, s.d_future, s.lead0, cfg.K);
            const auto sm =
                smoothed_poi(s.z, s.d_future, s.lead0, PoiConfig{1e-4}, cfg.K, cfg.Lbar);
            for (int i = 0; i < cfg.K; ++i) worst = std::max(worst, std::fabs(ex[i] - sm[i]));
        }
        all &= check(worst <= 1e-6, "smoothed POI -> exact POI as w -> 0", verbose);
    }

    // DGP stationary moments
    {
        bool ok = true;
        for (auto kind : {GenKind::CC, GenKind::CR, GenKind::SCR}) {
            GenConfig g;
            g.kind = kind;
            g.I = 1;
            g.J = 1;
            g.T_raw = 10030;
            g.keep_lo = 31;
            g.keep_hi = 10030;
            g.seed = 99;
            auto set = gen_instance(g, 0);
            for (const auto& row : stationarity_report(set, g)) ok &= !row.flagged;
        }
        all &= check(ok, "DGP stationary moments (CC/CR/SCR)", verbose);
    }

    std::printf("selftest: %s\n", all ? "all suites passed" : "FAILURES detected");
    return all;
}

}  // namespace pilab
