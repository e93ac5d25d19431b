#pragma once

// Shared test scaffolding: an independent unit-level FIFO reference simulator
// (the oracle for the slot-vector dynamics) and small dataset builders.

#include <cmath>
#include <deque>
#include <map>
#include <vector>

#include "pilab/dynamics.hpp"
#include "pilab/rng.hpp"
#include "pilab/scenario.hpp"
#include "pilab/types.hpp"

namespace pilab::testing {

// Explicit batch-level perishable system: physical stock per remaining life,
// outstanding backorder, pending arrivals. Arrivals pay down backorder first.
struct FifoRef {
    int K, Lbar;
    std::vector<double> stock;             // stock[i] = qty with remaining life i+1, i < K
    double backorder = 0.0;                // outstanding unmet demand
    std::map<int, double> arrivals;        // periods-from-now -> qty (1 = next period)
    CostParams par;

    FifoRef(const SystemConfig& cfg, const CostParams& p)
        : K(cfg.K), Lbar(cfg.Lbar), stock(cfg.K, 0.0), par(p) {}

    static FifoRef from_state(const State& z, const SystemConfig& cfg, const CostParams& p) {
        FifoRef f(cfg, p);
        for (int i = 0; i < cfg.K - 1; ++i) f.stock[i] = z[i];
        if (z[cfg.K - 1] >= 0.0)
            f.stock[cfg.K - 1] = z[cfg.K - 1];
        else
            f.backorder = -z[cfg.K - 1];
        for (int j = 1; j <= cfg.Lbar - 1; ++j)
            if (z[cfg.K + j - 1] != 0.0) f.arrivals[j] = z[cfg.K + j - 1];
        return f;
    }

    double stock_total() const {
        double s = 0.0;
        for (double v : stock) s += v;
        return s;
    }

    PeriodCost step(double demand, double order_q = 0.0, int order_lead = 0) {
        PeriodCost c;
        const double avail = stock_total() - backorder;
        c.holding = par.h * std::max(avail - demand, 0.0);
        c.backorder = par.b * std::max(demand - avail, 0.0);
        c.outdating = par.theta * std::max(stock[0] - demand, 0.0);

        // FIFO service of demand plus outstanding backorder
        double due = demand + backorder;
        for (int i = 0; i < K && due > 0.0; ++i) {
            const double take = std::min(stock[i], due);
            stock[i] -= take;
            due -= take;
        }
        backorder = due;
        // life-1 leftovers expire, everything else ages
        for (int i = 0; i + 1 < K; ++i) stock[i] = stock[i + 1];
        stock[K - 1] = 0.0;

        if (order_q > 0.0 || order_lead > 0) arrivals[order_lead] += order_q;
        // advance pipeline; arrivals due now net against the backorder
        std::map<int, double> nxt;
        for (auto& [j, q] : arrivals) {
            if (j == 1) {
                const double pay = std::min(backorder, q);
                backorder -= pay;
                stock[K - 1] += q - pay;
            } else {
                nxt[j - 1] = q;
            }
        }
        arrivals = std::move(nxt);
        return c;
    }

    State to_state() const {
        State z(K + Lbar - 1, 0.0);
        for (int i = 0; i < K - 1; ++i) z[i] = stock[i];
        z[K - 1] = stock[K - 1] - backorder;
        for (const auto& [j, q] : arrivals) z[K + j - 1] = q;
        return z;
    }
};

// Consistent random state: nonnegative slots, or a backordered one (negative slot
// K with empty on-hand), matching what the dynamics can reach.
inline State random_state(Rng& rng, const SystemConfig& cfg, bool allow_backorder = true) {
    State z(cfg.state_dim(), 0.0);
    if (allow_backorder && rng.uniform() < 0.3) {
        z[cfg.K - 1] = -rng.uniform(0.0, 5.0);
        for (int j = cfg.K; j < cfg.state_dim(); ++j) z[j] = rng.uniform(0.0, 4.0);
    } else {
        for (int i = 0; i < cfg.state_dim(); ++i) z[i] = rng.uniform(0.0, 4.0);
    }
    return z;
}

inline ScenarioSet make_set(int T, const std::vector<std::vector<double>>& demands,
                            double lead_value = 1.0) {
    ScenarioSet set;
    set.T = T;
    set.instance_id = 0;
    set.config_name = "external";
    for (std::size_t p = 0; p < demands.size(); ++p) {
        ProductSeries ps;
        ps.sku = static_cast<int>(p) + 1;
        ps.dc = 1;
        ps.demand = demands[p];
        ps.leadtime.assign(T, lead_value);
        for (auto& xc : ps.x) xc.assign(T, 0.0);
        set.products.push_back(std::move(ps));
    }
    return set;
}

}  // namespace pilab::testing
