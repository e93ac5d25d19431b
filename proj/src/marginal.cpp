#include "pilab/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pilab {

namespace {
inline double pos(double x) { return x > 0.0 ? x : 0.0; }

// Running B over offsets; b_path[s] = B_{[t_m, t_m+s]}. Slot i+1 of z can outdate
// by offset i, so the partial sum grows one slot per offset.
std::vector<double> outdate_path(const State& z, std::span<const double> d) {
    const int w = static_cast<int>(d.size());
    std::vector<double> b(w, 0.0);
    double cum_z = 0.0, cum_d = 0.0, prev = 0.0;
    for (int s = 0; s < w; ++s) {
        if (s < static_cast<int>(z.size())) cum_z += z[s];
        cum_d += d[s];
        prev = std::max(cum_z - cum_d, prev);
        b[s] = prev;
    }
    return b;
}
}  // namespace

double outdate_quantity(const State& z, std::span<const double> d, int s_off) {
    if (s_off < 0) return 0.0;
    if (s_off >= static_cast<int>(d.size()))
        throw std::out_of_range("outdate_quantity: offset beyond demand window");
    return outdate_path(z, d)[s_off];
}

double unmet_demand(const State& z, std::span<const double> d, int s_off) {
    if (s_off < 0 || s_off >= static_cast<int>(d.size()))
        throw std::out_of_range("unmet_demand: offset beyond demand window");
    double cum_d = 0.0;
    for (int i = 0; i <= s_off; ++i) cum_d += d[i];
    return cum_d - (state_total(z) - outdate_quantity(z, d, s_off - 1));
}

std::vector<double> unmet_path(const State& z, std::span<const double> d) {
    const int w = static_cast<int>(d.size());
    std::vector<double> u(w, 0.0);
    const double tot = state_total(z);
    double cum_z = 0.0, cum_d = 0.0, b_prev = 0.0;
    for (int s = 0; s < w; ++s) {
        cum_d += d[s];
        u[s] = cum_d - (tot - b_prev);  // uses B_{[t_m, s-1]}
        if (s < static_cast<int>(z.size())) cum_z += z[s];
        b_prev = std::max(cum_z - cum_d, b_prev);
    }
    return u;
}

MarginalBreakdown marginal_costs(double q, const State& z, std::span<const double> d,
                                 const MarginalWindow& win, int K, const CostParams& par) {
    if (q < 0.0 || !std::isfinite(q)) throw std::invalid_argument("marginal_costs: q >= 0 required");
    if (win.lead < 1) throw std::invalid_argument("marginal_costs: lead >= 1 required");
    const int expiry = win.lead + K - 1;            // offset of v_m + K - 1
    const int hi_h = std::min(expiry, win.horizon_off);
    const int hi_pi = std::min({win.v_next_off - 1, expiry, win.horizon_off});
    const int need = std::max(hi_h, hi_pi);
    if (need >= static_cast<int>(d.size()))
        throw std::invalid_argument("marginal_costs: insufficient demand window");

    const auto u = unmet_path(z, d);
    MarginalBreakdown out;
    for (int s = win.lead; s <= hi_h; ++s) out.holding += pos(q - pos(u[s]));
    out.holding *= par.h;
    if (expiry <= win.horizon_off) out.outdating = par.theta * pos(q - pos(u[expiry]));
    for (int s = win.lead; s <= hi_pi; ++s) out.backorder += pos(u[s] - q);
    out.backorder *= par.b;
    return out;
}

std::pair<double, double> accounting_identity(const Trajectory& traj,
                                              const std::vector<double>& demands,
                                              const SystemConfig& cfg, const CostParams& par) {
    const int T = static_cast<int>(demands.size());
    if (static_cast<int>(traj.costs.size()) != T)
        throw std::invalid_argument("accounting_identity: trajectory/demand length mismatch");
    if (traj.states.size() != traj.costs.size())
        throw std::invalid_argument("accounting_identity: trajectory must record states");

    double lhs = traj.total_cost();

    double rhs = 0.0;
    const auto& orders = traj.orders;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const auto& o = orders[i];
        const State& z = traj.states[o.t - 1];
        std::span<const double> d(demands.data() + (o.t - 1), demands.size() - (o.t - 1));
        MarginalWindow win;
        win.lead = o.lead;
        win.v_next_off = (i + 1 < orders.size()) ? orders[i + 1].arrival - o.t : kNoHorizon;
        win.horizon_off = T - o.t;
        const auto mb = marginal_costs(o.q, z, d, win, cfg.K, par);
        rhs += mb.loss();

        // Dead zone between this order's expiry and the next arrival: the backorder
        // carried at expiry stays outstanding and new demand accumulates on top.
        const int lo = win.lead + cfg.K;
        const int hi = std::min(win.v_next_off - 1, win.horizon_off);
        if (lo <= hi) {
            const auto u = unmet_path(z, d);
            const double carried = pos(u[lo - 1] - o.q);
            double cum_new = 0.0;
            for (int s = lo; s <= hi; ++s) {
                cum_new += d[s];
                rhs += par.b * (carried + cum_new);
            }
        }
    }

    const int v1 = orders.empty() ? T + 1 : orders.front().arrival;
    for (int t = 1; t < v1 && t <= T; ++t) rhs += traj.costs[t - 1].total();
    return {lhs, rhs};
}

}  // namespace pilab
