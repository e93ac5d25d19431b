#include "pilab/heuristics.hpp"

#include <cmath>
#include <stdexcept>

#include "pilab/poi.hpp"
#include "pilab/stats.hpp"

namespace pilab {

double beta_coefficient(int K, double mean_lead, const CostParams& par) {
    if (K < 1) throw std::invalid_argument("beta_coefficient: K >= 1");
    if (K == 1) return 1.0;
    return (K * par.h + par.theta) / (2.0 * (K + mean_lead - 1.0) * par.h + par.theta);
}

namespace {

// beta*E[H+Theta](q) and E[Pi](q) averaged over scenarios.
std::pair<double, double> balance_sides(double q, const State& z,
                                        std::span<const PbScenario> sc, double beta,
                                        const CostParams& par, int K) {
    double ho = 0.0, pi = 0.0;
    for (const auto& s : sc) {
        MarginalWindow win;
        win.lead = s.lead;
        win.v_next_off = s.v_next_off;
        const auto mb = marginal_costs(q, z, s.demands, win, K, par);
        ho += mb.holding + mb.outdating;
        pi += mb.backorder;
    }
    const double n = static_cast<double>(sc.size());
    return {beta * ho / n, pi / n};
}

}  // namespace

PbResult pb_order(const State& z, std::span<const PbScenario> scenarios, const PbConfig& pc,
                  const CostParams& par, int K) {
    if (scenarios.empty()) throw std::invalid_argument("pb_order: need at least one scenario");
    if (pc.q_max <= 0.0) throw std::invalid_argument("pb_order: q_max > 0 required");

    auto gap = [&](double q) {
        auto [lhs, rhs] = balance_sides(q, z, scenarios, pc.beta, par, K);
        return std::tuple{lhs - rhs, lhs, rhs};
    };

    PbResult res;
    auto [g0, l0, r0] = gap(0.0);
    if (g0 >= 0.0) {  // E[Pi](0) == 0: nothing to cover, order nothing
        res.q = 0.0;
        res.balanced = true;
        res.lhs = l0;
        res.rhs = r0;
        return res;
    }
    auto [g1, l1, r1] = gap(pc.q_max);
    if (g1 < 0.0) {
        res.q = pc.q_max;
        res.lhs = l1;
        res.rhs = r1;
        res.note = "no crossing in [0, q_max]; returning upper boundary";
        return res;
    }
    double lo = 0.0, hi = pc.q_max;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto [g, l, r] = gap(mid);
        res.q = mid;
        res.lhs = l;
        res.rhs = r;
        if (std::fabs(l - r) <= pc.tol * (l + r + 1.0)) break;
        (g < 0.0 ? lo : hi) = mid;
        if (hi - lo <= pc.tol * std::max(1.0, hi)) {
            auto [g2, l2, r2] = gap(0.5 * (lo + hi));
            (void)g2;
            res.q = 0.5 * (lo + hi);
            res.lhs = l2;
            res.rhs = r2;
            break;
        }
    }
    res.balanced = true;
    return res;
}

double pil_ce_order(const State& z, std::span<const double> demand_means, double mean_lead,
                    double s_target, const SystemConfig& cfg, const PoiConfig& pc) {
    if (!std::isfinite(s_target)) throw std::invalid_argument("pil_ce_order: S not finite");
    double poi0;
    const double rounded = std::round(mean_lead);
    if (std::fabs(mean_lead - rounded) < 1e-9 && rounded >= 1.0 &&
        rounded <= static_cast<double>(cfg.Lbar)) {
        poi0 = exact_poi(z, demand_means, static_cast<int>(rounded), cfg.K).front();
    } else {
        poi0 = smoothed_poi(z, demand_means, mean_lead, pc, cfg.K, cfg.Lbar).front();
    }
    return std::max(s_target - poi0, 0.0);
}

double quantile_benchmark(std::span<const double> demand_history,
                          std::span<const double> lead_history, double tau) {
    if (demand_history.empty() || lead_history.empty())
        throw std::invalid_argument("quantile_benchmark: empty history");
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("quantile_benchmark: tau in (0,1) required");
    return stats::quantile(demand_history, tau) * stats::mean(lead_history);
}

}  // namespace pilab
