#include "pilab/samples.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pilab/heuristics.hpp"
#include "pilab/parallel.hpp"
#include "pilab/stats.hpp"

namespace pilab {

DatasetContext make_context(const ScenarioSet& set, const SystemConfig& cfg,
                            const CostParams& par, FeatureSpec feat) {
    set.validate();
    cfg.validate();
    par.validate();
    if (set.T != cfg.T) throw std::invalid_argument("make_context: T mismatch");

    DatasetContext ctx;
    ctx.set = &set;
    ctx.cfg = cfg;
    ctx.par = par;
    ctx.feat = feat;
    ctx.tau = par.b / (par.b + par.h);

    const int P = set.n_products();
    ctx.bench.assign(P, {});
    ctx.prod_mean.assign(P, 0.0);
    ctx.prod_max.assign(P, 0.0);
    for (const auto& p : set.products) {
        ctx.n_sku = std::max(ctx.n_sku, p.sku);
        ctx.n_dc = std::max(ctx.n_dc, p.dc);
    }
    std::vector<double> sku_sum(ctx.n_sku, 0.0), dc_sum(ctx.n_dc, 0.0);
    std::vector<int> sku_cnt(ctx.n_sku, 0), dc_cnt(ctx.n_dc, 0);

    par::parallel_for(static_cast<std::size_t>(P), [&](std::size_t pi) {
        const auto& p = set.products[pi];
        auto& bench = ctx.bench[pi];
        bench.assign(cfg.T, 0.0);
        std::vector<double> lead_hist;
        lead_hist.reserve(cfg.T);
        // expanding-window quantile x mean effective lead, usable from t = 2
        for (int t = 2; t <= cfg.T; ++t) {
            lead_hist.push_back(static_cast<double>(clamp_lead(p.leadtime[t - 2], cfg.Lbar)));
            std::span<const double> dh(p.demand.data(), t - 1);
            bench[t - 1] = quantile_benchmark(dh, lead_hist, ctx.tau);
        }
        double s = 0.0, mx = 0.0;
        for (int t = 0; t < cfg.T_in; ++t) {
            s += p.demand[t];
            mx = std::max(mx, p.demand[t]);
        }
        ctx.prod_mean[pi] = cfg.T_in > 0 ? s / cfg.T_in : 0.0;
        ctx.prod_max[pi] = mx;
    });

    for (int pi = 0; pi < P; ++pi) {
        const auto& p = set.products[pi];
        sku_sum[p.sku - 1] += ctx.prod_mean[pi];
        sku_cnt[p.sku - 1] += 1;
        dc_sum[p.dc - 1] += ctx.prod_mean[pi];
        dc_cnt[p.dc - 1] += 1;
    }
    ctx.sku_mean.assign(ctx.n_sku, 0.0);
    ctx.dc_mean.assign(ctx.n_dc, 0.0);
    for (int s = 0; s < ctx.n_sku; ++s)
        ctx.sku_mean[s] = sku_cnt[s] ? sku_sum[s] / sku_cnt[s] : 0.0;
    for (int d = 0; d < ctx.n_dc; ++d) ctx.dc_mean[d] = dc_cnt[d] ? dc_sum[d] / dc_cnt[d] : 0.0;
    return ctx;
}

bool features_available(const DatasetContext& ctx, int t) {
    return t - ctx.feat.hist_demand >= 1 && t - ctx.feat.hist_lead * ctx.cfg.R >= 1;
}

std::vector<double> build_features(const DatasetContext& ctx, int product, int t) {
    const auto& f = ctx.feat;
    const auto& p = ctx.set->products[product];
    const int R = ctx.cfg.R;
    if (t - f.hist_demand < 1 || t - f.hist_lead * R < 1)
        throw std::invalid_argument("build_features: history window incomplete");

    std::vector<double> x;
    x.reserve(f.dim());
    for (int s = t - f.hist_demand; s <= t - 1; ++s) x.push_back(p.demand[s - 1]);
    for (int k = f.hist_lead; k >= 1; --k)
        x.push_back(static_cast<double>(clamp_lead(p.leadtime[t - k * R - 1], ctx.cfg.Lbar)));
    x.push_back(ctx.bench[product][t - 1]);
    x.push_back(static_cast<double>(p.sku) / std::max(1, ctx.n_sku));
    x.push_back(static_cast<double>(p.dc) / std::max(1, ctx.n_dc));
    x.push_back(ctx.sku_mean[p.sku - 1]);
    x.push_back(ctx.dc_mean[p.dc - 1]);
    return x;
}

std::vector<TrainingSample> build_samples(const DatasetContext& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& f = ctx.feat;
    const int window = cfg.K + cfg.Lbar;
    const int t_lo = std::max(f.hist_demand + 1, f.hist_lead * cfg.R + 1);
    const int t_hi = std::min(cfg.T_in - window + 1, cfg.T_in - cfg.R);
    if (t_lo > t_hi) return {};

    const int P = ctx.n_products();
    std::vector<std::vector<TrainingSample>> per_product(P);
    par::parallel_for(static_cast<std::size_t>(P), [&](std::size_t pi) {
        const auto& p = ctx.set->products[pi];
        auto& out = per_product[pi];
        out.reserve(t_hi - t_lo + 1);
        for (int t = t_lo; t <= t_hi; ++t) {
            TrainingSample s;
            s.product = static_cast<int>(pi);
            s.t = t;
            s.r = path_of_epoch(t, cfg.R);
            s.x = build_features(ctx, static_cast<int>(pi), t);
            s.d_future.assign(p.demand.begin() + (t - 1), p.demand.begin() + (t - 1) + window);
            s.lead0 = clamp_lead(p.leadtime[t - 1], cfg.Lbar);
            s.lead1 = clamp_lead(p.leadtime[t + cfg.R - 1], cfg.Lbar);
            s.v_next_off = std::max(cfg.R + s.lead1, s.lead0);  // no-crossing
            out.push_back(std::move(s));
        }
    });

    std::vector<TrainingSample> all;
    for (auto& v : per_product)
        for (auto& s : v) all.push_back(std::move(s));
    return all;
}

ProductPolicyFactory benchmark_policy_factory(const DatasetContext& ctx) {
    return [&ctx](int product, int /*path_r*/) -> PolicyFn {
        return [&ctx, product](int t, const State&) {
            return t >= 2 ? std::max(ctx.bench[product][t - 1], 0.0) : 0.0;
        };
    };
}

std::vector<std::vector<State>> presample_state_table(const DatasetContext& ctx,
                                                      const ProductPolicyFactory& policy) {
    const auto& cfg = ctx.cfg;
    const int P = ctx.n_products();
    std::vector<std::vector<State>> table(P);
    par::parallel_for(static_cast<std::size_t>(P), [&](std::size_t pi) {
        const auto& p = ctx.set->products[pi];
        std::vector<double> d_in(p.demand.begin(), p.demand.begin() + cfg.T_in);
        std::vector<double> l_in(p.leadtime.begin(), p.leadtime.begin() + cfg.T_in);
        auto& states = table[pi];
        states.assign(cfg.T_in, State{});
        for (int r = 1; r <= cfg.R; ++r) {
            SimOptions opt;
            opt.first_epoch = r;
            auto traj = simulate(policy(static_cast<int>(pi), r), d_in, l_in, cfg, ctx.par, opt);
            for (int t = r; t <= cfg.T_in; t += cfg.R) states[t - 1] = traj.states[t - 1];
        }
    });
    return table;
}

void presample_states(const DatasetContext& ctx, std::vector<TrainingSample>& samples,
                      const ProductPolicyFactory& policy) {
    auto table = presample_state_table(ctx, policy);
    for (auto& s : samples) {
        s.z = table[s.product][s.t - 1];
        if (s.z.empty()) throw std::logic_error("presample_states: no state for sample epoch");
    }
}

}  // namespace pilab
