#include "pilab/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pilab/parallel.hpp"

namespace pilab {

double eq9_average(std::span<const double> period_costs, int first_arrival) {
    const int T = static_cast<int>(period_costs.size());
    if (first_arrival > T)
        throw std::runtime_error("eq9_average: horizon ends before the first arrival");
    double s = 0.0;
    for (int t = first_arrival; t <= T; ++t) s += period_costs[t - 1];
    return s / static_cast<double>(T - first_arrival + 1);
}

EvalReport evaluate_policy_window(const DatasetContext& ctx, const ProductPolicyFactory& factory,
                                  const std::string& name, int win_lo, int win_hi) {
    const auto& cfg = ctx.cfg;
    if (win_lo < 1 || win_hi > cfg.T || win_lo > win_hi)
        throw std::invalid_argument("evaluate_policy_window: bad window");
    const int P = ctx.n_products();
    const int Tw = win_hi - win_lo + 1;

    EvalReport rep;
    rep.policy = name;
    rep.window_lo = win_lo;
    rep.window_hi = win_hi;
    rep.per_product.assign(P, 0.0);
    rep.per_product_metrics.assign(P, {});

    par::parallel_for(static_cast<std::size_t>(P), [&](std::size_t pi) {
        const auto& p = ctx.set->products[pi];
        std::vector<double> d_loc(p.demand.begin() + (win_lo - 1), p.demand.begin() + win_hi);
        std::vector<double> l_loc(p.leadtime.begin() + (win_lo - 1), p.leadtime.begin() + win_hi);
        EvalMetrics acc;
        for (int r = 1; r <= cfg.R; ++r) {
            PolicyFn global_policy = factory(static_cast<int>(pi), r);
            PolicyFn local_policy = [&](int t_loc, const State& z) {
                return global_policy(win_lo - 1 + t_loc, z);
            };
            SimOptions opt;
            opt.first_epoch = r;
            opt.record_states = false;
            auto traj = simulate(local_policy, d_loc, l_loc, cfg, ctx.par, opt);
            if (traj.orders.empty())
                throw std::runtime_error("evaluate_policy_window: no ordering epoch in window");
            const int first_arrival = traj.orders.front().arrival;
            if (first_arrival > Tw)
                throw std::runtime_error("evaluate_policy_window: first arrival beyond window");
            const int n_eval = Tw - first_arrival + 1;
            EvalMetrics pm;
            for (int t = first_arrival; t <= Tw; ++t) {
                const auto& c = traj.costs[t - 1];
                pm.total += c.total();
                pm.holding += c.holding;
                pm.backorder += c.backorder;
                pm.outdating += c.outdating;
                if (c.backorder > 1e-12) pm.stockout_rate += 1.0;
                if (c.outdating > 1e-12) pm.outdating_rate += 1.0;
            }
            const double inv = 1.0 / static_cast<double>(n_eval);
            acc.total += pm.total * inv;
            acc.holding += pm.holding * inv;
            acc.backorder += pm.backorder * inv;
            acc.outdating += pm.outdating * inv;
            acc.stockout_rate += pm.stockout_rate * inv;
            acc.outdating_rate += pm.outdating_rate * inv;
        }
        const double invR = 1.0 / static_cast<double>(cfg.R);
        acc.total *= invR;
        acc.holding *= invR;
        acc.backorder *= invR;
        acc.outdating *= invR;
        acc.stockout_rate *= invR;
        acc.outdating_rate *= invR;
        rep.per_product_metrics[pi] = acc;
        rep.per_product[pi] = acc.total;
    });

    const double invP = 1.0 / static_cast<double>(P);
    for (int pi = 0; pi < P; ++pi) {
        const auto& m = rep.per_product_metrics[pi];
        rep.avg.total += m.total * invP;
        rep.avg.holding += m.holding * invP;
        rep.avg.backorder += m.backorder * invP;
        rep.avg.outdating += m.outdating * invP;
        rep.avg.stockout_rate += m.stockout_rate * invP;
        rep.avg.outdating_rate += m.outdating_rate * invP;
    }
    return rep;
}

EvalReport evaluate_policy(const DatasetContext& ctx, const ProductPolicyFactory& factory,
                           const std::string& name) {
    return evaluate_policy_window(ctx, factory, name, ctx.cfg.T_in + 1, ctx.cfg.T);
}

std::vector<GapRow> relative_gaps(const std::vector<EvalReport>& reports,
                                  const std::string& reference) {
    double ref = 0.0;
    bool found = false;
    for (const auto& r : reports)
        if (r.policy == reference) {
            ref = r.avg.total;
            found = true;
        }
    if (!found) throw std::invalid_argument("relative_gaps: reference policy not in reports");
    std::vector<GapRow> rows;
    for (const auto& r : reports)
        rows.push_back({r.policy, r.avg.total, (r.avg.total - ref) / ref});
    return rows;
}

void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_report_csv: cannot open " + path);
    os << "policy,total,holding,backorder,outdating,stockout_rate,outdating_rate\n";
    os.precision(10);
    for (const auto& r : reports) {
        os << r.policy << ',' << r.avg.total << ',' << r.avg.holding << ',' << r.avg.backorder
           << ',' << r.avg.outdating << ',' << r.avg.stockout_rate << ','
           << r.avg.outdating_rate << '\n';
    }
}

void write_gap_csv(const std::vector<GapRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_gap_csv: cannot open " + path);
    os << "policy,cost,gap_vs_ref\n";
    os.precision(10);
    for (const auto& r : rows) os << r.policy << ',' << r.cost << ',' << r.gap_vs_ref << '\n';
}

std::vector<PairTestRow> pairwise_tests(const std::vector<std::string>& names,
                                        const std::vector<std::vector<double>>& instance_costs) {
    if (names.size() != instance_costs.size())
        throw std::invalid_argument("pairwise_tests: size mismatch");
    std::vector<PairTestRow> rows;
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (i == j) continue;
            PairTestRow row;
            row.a = names[i];
            row.b = names[j];
            row.welch = stats::welch_t(instance_costs[i], instance_costs[j]);
            row.paired = stats::paired_t(instance_costs[i], instance_costs[j]);
            rows.push_back(row);
        }
    return rows;
}

void write_ttest_csv(const std::vector<PairTestRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_ttest_csv: cannot open " + path);
    os << "a,b,welch_t,welch_p,paired_t,paired_p\n";
    os.precision(10);
    for (const auto& r : rows)
        os << r.a << ',' << r.b << ',' << r.welch.t << ',' << r.welch.p << ',' << r.paired.t
           << ',' << r.paired.p << '\n';
}

void write_long_csv(const std::vector<EvalReport>& reports, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_long_csv: cannot open " + path);
    os << "policy,metric,value\n";
    os.precision(10);
    for (const auto& r : reports) {
        os << r.policy << ",total," << r.avg.total << '\n';
        os << r.policy << ",holding," << r.avg.holding << '\n';
        os << r.policy << ",backorder," << r.avg.backorder << '\n';
        os << r.policy << ",outdating," << r.avg.outdating << '\n';
        os << r.policy << ",stockout_rate," << r.avg.stockout_rate << '\n';
        os << r.policy << ",outdating_rate," << r.avg.outdating_rate << '\n';
        for (std::size_t pi = 0; pi < r.per_product.size(); ++pi)
            os << r.policy << ",product_total_" << pi << ',' << r.per_product[pi] << '\n';
    }
}

}  // namespace pilab
