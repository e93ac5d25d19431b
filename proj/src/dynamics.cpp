#include "pilab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pilab {

namespace {
inline double pos(double x) { return x > 0.0 ? x : 0.0; }
}

double Trajectory::total_cost() const {
    double s = 0.0;
    for (const auto& c : costs) s += c.total();
    return s;
}

PeriodCost Trajectory::cost_sums() const {
    PeriodCost s;
    for (const auto& c : costs) {
        s.holding += c.holding;
        s.backorder += c.backorder;
        s.outdating += c.outdating;
    }
    return s;
}

int clamp_lead(double raw, int Lbar) {
    if (!std::isfinite(raw)) throw std::invalid_argument("lead time not finite");
    int l = static_cast<int>(std::floor(raw));
    return std::clamp(l, 1, Lbar);
}

std::pair<State, PeriodCost> transition(const State& z, double demand,
                                        const std::optional<PlacedOrder>& placed,
                                        const SystemConfig& cfg, const CostParams& par) {
    const int K = cfg.K;
    const int n = cfg.state_dim();
    if (static_cast<int>(z.size()) != n)
        throw std::invalid_argument("transition: state dimension mismatch");
    if (demand < 0.0) throw std::invalid_argument("transition: negative demand");

    PeriodCost cost;
    const double onhand = on_hand_total(z, K);
    cost.holding = par.h * pos(onhand - demand);
    cost.backorder = par.b * pos(demand - onhand);
    cost.outdating = par.theta * pos(z[0] - demand);

    State nz(n, 0.0);
    double cum = 0.0;  // sum of slots 1..i
    for (int i = 1; i <= K - 1; ++i) {
        cum += z[i - 1];
        nz[i - 1] = pos(z[i] - pos(demand - cum));
    }
    cum += z[K - 1];  // now sum over slots 1..K
    const double arriving = (K < n) ? z[K] : 0.0;
    nz[K - 1] = arriving - pos(demand - cum);
    for (int i = K + 1; i <= n - 1; ++i) nz[i - 1] = z[i];
    // nz[n-1] stays 0

    if (placed) {
        if (placed->lead < 1 || placed->lead > cfg.Lbar)
            throw std::invalid_argument("transition: lead out of [1, Lbar]");
        if (placed->q < 0.0 || !std::isfinite(placed->q))
            throw std::invalid_argument("transition: order quantity must be finite and >= 0");
        nz[K + placed->lead - 2] += placed->q;
    }
    return {std::move(nz), cost};
}

namespace {

Trajectory roll(const std::function<double(int, const State&)>* policy,
                const std::vector<double>* qs, const std::vector<double>& demands,
                const std::vector<double>& leadtimes, const SystemConfig& cfg,
                const CostParams& par, const SimOptions& opt) {
    cfg.validate();
    par.validate();
    const int T = static_cast<int>(demands.size());
    if (static_cast<int>(leadtimes.size()) < T)
        throw std::invalid_argument("simulate: lead-time series shorter than demand series");
    State z = opt.initial_state.empty() ? State(cfg.state_dim(), 0.0) : opt.initial_state;
    if (static_cast<int>(z.size()) != cfg.state_dim())
        throw std::invalid_argument("simulate: initial state dimension mismatch");

    Trajectory traj;
    traj.costs.reserve(T);
    if (opt.record_states) traj.states.reserve(T);
    int prev_arrival = 0;
    int m = 0;
    for (int t = 1; t <= T; ++t) {
        if (opt.record_states) traj.states.push_back(z);
        std::optional<PlacedOrder> placed;
        if (t >= opt.first_epoch && (t - opt.first_epoch) % cfg.R == 0) {
            double q;
            if (policy) {
                q = (*policy)(t, z);
                if (!(q >= 0.0) || !std::isfinite(q))
                    throw std::runtime_error("simulate: policy returned negative or non-finite q");
            } else {
                q = (m < static_cast<int>(qs->size())) ? (*qs)[m] : 0.0;
            }
            const int lead_raw = clamp_lead(leadtimes[t - 1], cfg.Lbar);
            const int arrival = std::max(t + lead_raw, prev_arrival);  // no-crossing clamp
            prev_arrival = arrival;
            placed = PlacedOrder{q, arrival - t};
            traj.orders.push_back(OrderEvent{m, t, q, arrival - t, arrival});
            ++m;
        }
        auto [nz, c] = transition(z, demands[t - 1], placed, cfg, par);
        traj.costs.push_back(c);
        z = std::move(nz);
    }
    return traj;
}

}  // namespace

Trajectory simulate(const PolicyFn& policy, const std::vector<double>& demands,
                    const std::vector<double>& leadtimes, const SystemConfig& cfg,
                    const CostParams& par, const SimOptions& opt) {
    return roll(&policy, nullptr, demands, leadtimes, cfg, par, opt);
}

Trajectory replay(const std::vector<double>& qs, const std::vector<double>& demands,
                  const std::vector<double>& leadtimes, const SystemConfig& cfg,
                  const CostParams& par, const SimOptions& opt) {
    return roll(nullptr, &qs, demands, leadtimes, cfg, par, opt);
}

}  // namespace pilab
