#include <doctest.h>

#include "helpers.hpp"
#include "pilab/dynamics.hpp"

using namespace pilab;
using pilab::testing::FifoRef;

namespace {
SystemConfig cfg32() {
    SystemConfig c;
    c.K = 3;
    c.Lbar = 2;
    c.R = 1;
    c.T = 1;
    c.T_in = 1;
    c.T_out = 0;
    return c;
}
}  // namespace

TEST_CASE("transition: FIFO consumption, aging and pipeline shift") {
    CostParams par{1.0, 10.0, 10.0};
    auto [next, cost] = transition({2, 3, 5, 4}, 4.0, std::nullopt, cfg32(), par);
    CHECK(next == State{1, 5, 4, 0});
    CHECK(cost.backorder == 0.0);
    CHECK(cost.holding == doctest::Approx(6.0));  // h * (10 - 4)
    CHECK(cost.outdating == 0.0);
}

TEST_CASE("transition: zero demand is pure aging") {
    CostParams par{1.0, 10.0, 10.0};
    auto [next, cost] = transition({2, 3, 5, 4}, 0.0, std::nullopt, cfg32(), par);
    CHECK(next == State{3, 5, 4, 0});
    CHECK(cost.outdating == doctest::Approx(20.0));  // slot-1 stock expires unsold
}

TEST_CASE("transition: unmet demand carries as negative slot K") {
    CostParams par{1.0, 10.0, 10.0};
    auto [next, cost] = transition({1, 0, 0, 0}, 3.0, std::nullopt, cfg32(), par);
    CHECK(next == State{0, 0, -2, 0});
    // per-period backorder charge is b * (D - sum_{i<=K} z_i)^+ = 2b
    CHECK(cost.backorder == doctest::Approx(20.0));
}

TEST_CASE("transition: order insertion at slot K+L-1, merging at L=1") {
    CostParams par{1.0, 10.0, 10.0};
    auto [n1, c1] = transition({0, 0, 0, 0}, 0.0, PlacedOrder{5.0, 2}, cfg32(), par);
    CHECK(n1 == State{0, 0, 0, 5});
    auto [n2, c2] = transition({0, 0, 0, 7}, 0.0, PlacedOrder{5.0, 1}, cfg32(), par);
    CHECK(n2 == State{0, 0, 12, 0});  // arriving pipeline plus the L=1 order
}

TEST_CASE("transition: errors") {
    CostParams par{1.0, 10.0, 10.0};
    CHECK_THROWS(transition({1, 2}, 1.0, std::nullopt, cfg32(), par));
    CHECK_THROWS(transition({1, 2, 3, 4}, -1.0, std::nullopt, cfg32(), par));
    CHECK_THROWS(transition({1, 2, 3, 4}, 1.0, PlacedOrder{1.0, 5}, cfg32(), par));
    CHECK_THROWS(transition({1, 2, 3, 4}, 1.0, PlacedOrder{-1.0, 1}, cfg32(), par));
}

TEST_CASE("transition agrees with the unit-level FIFO reference") {
    Rng rng(42);
    CostParams par{1.0, 10.0, 10.0};
    for (int trial = 0; trial < 300; ++trial) {
        SystemConfig cfg;
        cfg.K = rng.uniform_int(1, 5);
        cfg.Lbar = rng.uniform_int(1, 4);
        cfg.T = 1;
        cfg.T_in = 1;
        cfg.T_out = 0;
        State z = testing::random_state(rng, cfg);
        const double d = rng.uniform(0.0, 6.0);
        std::optional<PlacedOrder> placed;
        if (rng.uniform() < 0.5)
            placed = PlacedOrder{rng.uniform(0.0, 5.0), rng.uniform_int(1, cfg.Lbar)};
        auto [next, cost] = transition(z, d, placed, cfg, par);
        auto ref2 = FifoRef::from_state(z, cfg, par);
        PeriodCost rc = placed ? ref2.step(d, placed->q, placed->lead) : ref2.step(d);
        for (int i = 0; i < cfg.state_dim(); ++i)
            CHECK(next[i] == doctest::Approx(ref2.to_state()[i]).epsilon(1e-12));
        CHECK(cost.holding == doctest::Approx(rc.holding).epsilon(1e-12));
        CHECK(cost.backorder == doctest::Approx(rc.backorder).epsilon(1e-12));
        CHECK(cost.outdating == doctest::Approx(rc.outdating).epsilon(1e-12));
    }
}

TEST_CASE("conservation under FIFO: multi-period totals match the reference") {
    Rng rng(7);
    CostParams par{1.0, 5.0, 3.0};
    for (int trial = 0; trial < 50; ++trial) {
        SystemConfig cfg;
        cfg.K = rng.uniform_int(2, 5);
        cfg.Lbar = rng.uniform_int(1, 3);
        cfg.R = rng.uniform_int(1, 4);
        cfg.T = 20;
        cfg.T_in = 20;
        cfg.T_out = 0;
        std::vector<double> d(cfg.T), l(cfg.T), q(cfg.T, 0.0);
        for (auto& v : d) v = rng.uniform(0.0, 5.0);
        for (auto& v : l) v = rng.uniform_int(1, cfg.Lbar);
        for (auto& v : q) v = rng.uniform(0.0, 5.0);
        auto traj = replay(q, d, l, cfg, par);

        FifoRef ref(cfg, par);
        double total_ref = 0.0;
        std::size_t oi = 0;
        for (int t = 1; t <= cfg.T; ++t) {
            double oq = 0.0;
            int ol = 0;
            if (oi < traj.orders.size() && traj.orders[oi].t == t) {
                oq = traj.orders[oi].q;
                ol = traj.orders[oi].lead;
                ++oi;
            }
            total_ref += ref.step(d[t - 1], oq, ol).total();
        }
        CHECK(traj.total_cost() == doctest::Approx(total_ref).epsilon(1e-10));
    }
}

TEST_CASE("simulate: zero policy and zero demand cost nothing") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 1;
    cfg.R = 1;
    cfg.T = 5;
    cfg.T_in = 5;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    auto traj = simulate([](int, const State&) { return 0.0; }, {0, 0, 0, 0, 0},
                         {1, 1, 1, 1, 1}, cfg, par);
    CHECK(traj.total_cost() == 0.0);
}

TEST_CASE("simulate: zero policy accumulates backorders (hand rollout)") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 1;
    cfg.R = 1;
    cfg.T = 3;
    cfg.T_in = 3;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    auto traj = simulate([](int, const State&) { return 0.0; }, {1, 2, 1}, {1, 1, 1}, cfg, par);
    // unmet demand snowballs: 1, 3, 4 units -> b*(1+3+4) = 80
    CHECK(traj.costs[0].backorder == doctest::Approx(10.0));
    CHECK(traj.costs[1].backorder == doctest::Approx(30.0));
    CHECK(traj.costs[2].backorder == doctest::Approx(40.0));
    CHECK(traj.total_cost() == doctest::Approx(80.0));
}

TEST_CASE("simulate: constant policy matches the FIFO reference rollout") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 1;
    cfg.R = 1;
    cfg.T = 3;
    cfg.T_in = 3;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    std::vector<double> d{1, 2, 1}, l{1, 1, 1};
    auto traj = simulate([](int t, const State&) { return t == 1 ? 3.0 : 0.0; }, d, l, cfg, par);
    FifoRef ref(cfg, par);
    double total = 0.0;
    for (int t = 1; t <= 3; ++t)
        total += ref.step(d[t - 1], t == 1 ? 3.0 : 0.0, 1).total();
    CHECK(traj.total_cost() == doctest::Approx(total).epsilon(1e-12));
    CHECK(traj.costs[0].backorder == doctest::Approx(10.0));  // nothing arrived yet
}

TEST_CASE("simulate: no-crossing clamp keeps arrivals monotone") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 4;
    cfg.R = 1;
    cfg.T = 6;
    cfg.T_in = 6;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    // lead 4 then lead 1: the second order would arrive before the first
    std::vector<double> leads{4, 1, 1, 1, 1, 1};
    auto traj = simulate([](int, const State&) { return 1.0; },
                         std::vector<double>(6, 0.5), leads, cfg, par);
    for (std::size_t i = 1; i < traj.orders.size(); ++i)
        CHECK(traj.orders[i].arrival >= traj.orders[i - 1].arrival);
    CHECK(traj.orders[1].arrival == 5);  // clamped from 3 to the first arrival
}

TEST_CASE("simulate: homogeneity of degree 1 in (demand, decisions)") {
    Rng rng(11);
    CostParams par{1.0, 10.0, 10.0};
    for (int trial = 0; trial < 20; ++trial) {
        SystemConfig cfg;
        cfg.K = rng.uniform_int(2, 5);
        cfg.Lbar = rng.uniform_int(1, 4);
        cfg.R = rng.uniform_int(1, 4);
        cfg.T = 25;
        cfg.T_in = 25;
        cfg.T_out = 0;
        std::vector<double> d(cfg.T), l(cfg.T), q(cfg.T);
        for (auto& v : d) v = rng.uniform(0.0, 5.0);
        for (auto& v : l) v = rng.uniform_int(1, cfg.Lbar);
        for (auto& v : q) v = rng.uniform(0.0, 6.0);
        auto base = replay(q, d, l, cfg, par);
        for (double g : {0.5, 2.0, 10.0}) {
            auto dg = d;
            auto qg = q;
            for (auto& v : dg) v *= g;
            for (auto& v : qg) v *= g;
            auto scaled = replay(qg, dg, l, cfg, par);
            for (int t = 0; t < cfg.T; ++t) {
                CHECK(std::fabs(scaled.costs[t].total() - g * base.costs[t].total()) <=
                      1e-12 * std::max(1.0, g * base.costs[t].total()));
                for (int i = 0; i < cfg.state_dim(); ++i)
                    CHECK(std::fabs(scaled.states[t][i] - g * base.states[t][i]) <=
                          1e-12 * std::max(1.0, std::fabs(g * base.states[t][i])));
            }
        }
    }
}

TEST_CASE("simulate: rejects bad policies") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 1;
    cfg.R = 1;
    cfg.T = 2;
    cfg.T_in = 2;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    CHECK_THROWS(simulate([](int, const State&) { return -1.0; }, {1, 1}, {1, 1}, cfg, par));
    CHECK_THROWS(simulate([](int, const State&) { return std::nan(""); }, {1, 1}, {1, 1},
                          cfg, par));
}
