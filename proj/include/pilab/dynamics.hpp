#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "pilab/types.hpp"

namespace pilab {

struct PeriodCost {
    double holding = 0.0;
    double backorder = 0.0;
    double outdating = 0.0;
    double total() const { return holding + backorder + outdating; }
};

struct PlacedOrder {
    double q = 0.0;
    int lead = 1;  // realized lead time, in [1, Lbar]
};

struct OrderEvent {
    int m = 0;        // order index, 0-based
    int t = 0;        // placement period (1-based)
    double q = 0.0;
    int lead = 1;     // effective lead after no-crossing clamp
    int arrival = 0;  // v_m = t + lead
};

struct Trajectory {
    std::vector<State> states;       // states[t-1] = z_t before the period-t transition
    std::vector<PeriodCost> costs;   // costs[t-1] = period-t cost
    std::vector<OrderEvent> orders;  // one event per ordering epoch (q may be 0)
    double total_cost() const;
    PeriodCost cost_sums() const;
};

// One-period transition per the FIFO aging dynamics; cost is evaluated on the
// pre-transition state. `placed` inserts q at pipeline slot K+lead-1 of the next state.
std::pair<State, PeriodCost> transition(const State& z, double demand,
                                        const std::optional<PlacedOrder>& placed,
                                        const SystemConfig& cfg, const CostParams& par);

// Policy: order quantity at epoch t given the pre-decision state.
using PolicyFn = std::function<double(int t, const State& z)>;

struct SimOptions {
    int first_epoch = 1;           // epochs are {first_epoch, first_epoch+R, ...}
    State initial_state;           // empty means zero state
    bool record_states = true;
};

// Rolls the system over demands[0..T-1] with realized leads leadtimes[t-1] read at
// placement epochs (floored and clamped into [1, Lbar]); arrivals that would cross
// are clamped to the previous arrival period.
Trajectory simulate(const PolicyFn& policy, const std::vector<double>& demands,
                    const std::vector<double>& leadtimes, const SystemConfig& cfg,
                    const CostParams& par, const SimOptions& opt = {});

// Replays a fixed decision sequence (qs[i] at the i-th epoch). Used by the
// homogeneity checks and the boosting evaluations.
Trajectory replay(const std::vector<double>& qs, const std::vector<double>& demands,
                  const std::vector<double>& leadtimes, const SystemConfig& cfg,
                  const CostParams& par, const SimOptions& opt = {});

int clamp_lead(double raw, int Lbar);

}  // namespace pilab
