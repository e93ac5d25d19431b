#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "pilab/datagen.hpp"
#include "pilab/heuristics.hpp"
#include "pilab/samples.hpp"

using namespace pilab;

TEST_CASE("first usable training point honors the history windows") {
    // history window 4, future window K+Lbar = 3, records 1..201 at epochs every 2:
    // the first epoch with a complete history is t = 5 (the example's t = -196 when
    // periods are labeled -200..0)
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 1;
    cfg.R = 2;
    cfg.T = 201;
    cfg.T_in = 201;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    std::vector<std::vector<double>> d{std::vector<double>(201, 1.0)};
    auto set = testing::make_set(201, d);
    FeatureSpec feat;
    feat.hist_demand = 4;
    feat.hist_lead = 2;
    auto ctx = make_context(set, cfg, par, feat);
    auto samples = build_samples(ctx);
    REQUIRE_FALSE(samples.empty());
    CHECK(samples.front().t == 5);
    CHECK(samples.back().t == 199);  // future demand + next-lead windows must fit
}

TEST_CASE("sample count matches an independent enumeration") {
    SystemConfig cfg;
    cfg.K = 7;
    cfg.Lbar = 9;
    cfg.R = 4;
    cfg.T = 200;
    cfg.T_in = 200;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    auto set = testing::make_set(200, {std::vector<double>(200, 2.0)}, 3.0);
    FeatureSpec feat;  // 8-demand / 2-lead windows
    auto ctx = make_context(set, cfg, par, feat);
    auto samples = build_samples(ctx);

    int expect = 0;
    const int window = cfg.K + cfg.Lbar;
    for (int t = 1; t <= cfg.T_in; ++t) {
        const bool hist_ok = t - feat.hist_demand >= 1 && t - feat.hist_lead * cfg.R >= 1;
        const bool future_ok = t + window - 1 <= cfg.T_in && t + cfg.R <= cfg.T_in;
        if (hist_ok && future_ok) ++expect;
    }
    CHECK(static_cast<int>(samples.size()) == expect);
    CHECK(expect > 0);
}

TEST_CASE("horizon shorter than the windows yields no samples") {
    SystemConfig cfg;
    cfg.K = 7;
    cfg.Lbar = 9;
    cfg.R = 4;
    cfg.T = 20;
    cfg.T_in = 20;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    auto set = testing::make_set(20, {std::vector<double>(20, 1.0)}, 3.0);
    auto ctx = make_context(set, cfg, par);
    CHECK(build_samples(ctx).empty());
}

TEST_CASE("feature layout: histories, benchmark, ids, entity means") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 2;
    cfg.R = 2;
    cfg.T = 40;
    cfg.T_in = 30;
    cfg.T_out = 10;
    CostParams par{1.0, 10.0, 10.0};
    std::vector<double> demand(40);
    for (int t = 0; t < 40; ++t) demand[t] = t + 1;  // identifiable history
    auto set = testing::make_set(40, {demand}, 2.0);
    auto ctx = make_context(set, cfg, par);
    const int t = 20;
    auto x = build_features(ctx, 0, t);
    REQUIRE(static_cast<int>(x.size()) == ctx.feat.dim());
    for (int i = 0; i < 8; ++i) CHECK(x[i] == doctest::Approx(demand[t - 8 + i - 1]));
    CHECK(x[8] == 2.0);  // lead at t-2R
    CHECK(x[9] == 2.0);  // lead at t-R
    const double tau = par.b / (par.b + par.h);
    std::vector<double> hist(demand.begin(), demand.begin() + t - 1);
    std::vector<double> leads(t - 1, 2.0);
    CHECK(x[10] == doctest::Approx(quantile_benchmark(hist, leads, tau)));
    CHECK(x[11] == doctest::Approx(1.0));  // sku 1 of 1
    CHECK(x[12] == doctest::Approx(1.0));  // dc 1 of 1
    CHECK(x[13] == doctest::Approx(ctx.prod_mean[0]));
    CHECK(x[14] == doctest::Approx(ctx.prod_mean[0]));
}

TEST_CASE("presampled states: zero demand and zero policy give zero states") {
    SystemConfig cfg;
    cfg.K = 3;
    cfg.Lbar = 2;
    cfg.R = 2;
    cfg.T = 40;
    cfg.T_in = 40;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    auto set = testing::make_set(40, {std::vector<double>(40, 0.0)}, 1.0);
    auto ctx = make_context(set, cfg, par);
    auto table = presample_state_table(
        ctx, [](int, int) -> PolicyFn { return [](int, const State&) { return 0.0; }; });
    for (int t = 1; t <= cfg.T_in; ++t) {
        REQUIRE_FALSE(table[0][t - 1].empty());
        for (double v : table[0][t - 1]) CHECK(v == 0.0);
    }
}

TEST_CASE("presampled states match a direct simulation of the same policy") {
    SystemConfig cfg;
    cfg.K = 3;
    cfg.Lbar = 2;
    cfg.R = 3;
    cfg.T = 30;
    cfg.T_in = 30;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    std::vector<double> demand(30);
    Rng rng(41);
    for (auto& v : demand) v = rng.uniform(0.0, 4.0);
    auto set = testing::make_set(30, {demand}, 2.0);
    auto ctx = make_context(set, cfg, par);
    auto constant_policy = [](int, int) -> PolicyFn {
        return [](int, const State&) { return 2.5; };
    };
    auto table = presample_state_table(ctx, constant_policy);
    for (int r = 1; r <= cfg.R; ++r) {
        SimOptions opt;
        opt.first_epoch = r;
        auto traj = simulate([](int, const State&) { return 2.5; }, demand,
                             std::vector<double>(30, 2.0), cfg, par, opt);
        for (int t = r; t <= cfg.T_in; t += cfg.R)
            CHECK(table[0][t - 1] == traj.states[t - 1]);
    }
}

TEST_CASE("benchmark-policy states on SCR cover backordered and aged stock") {
    GenConfig g;
    g.kind = GenKind::SCR;
    g.I = 2;
    g.J = 2;
    g.T_raw = 150;
    g.keep_lo = 31;
    g.keep_hi = 150;
    g.seed = 47;
    auto set = gen_instance(g, 0);
    SystemConfig cfg;
    cfg.K = 4;
    cfg.Lbar = 4;
    cfg.R = 3;
    cfg.T = 120;
    cfg.T_in = 90;
    cfg.T_out = 30;
    CostParams par{1.0, 10.0, 10.0};
    auto ctx = make_context(set, cfg, par);
    auto samples = build_samples(ctx);
    presample_states(ctx, samples, benchmark_policy_factory(ctx));
    bool backordered = false, aged = false;
    for (const auto& s : samples) {
        if (s.z[cfg.K - 1] < -1e-9) backordered = true;
        for (int i = 0; i + 1 < cfg.K; ++i)
            if (s.z[i] > 1e-9) aged = true;
    }
    CHECK(backordered);
    CHECK(aged);
}

TEST_CASE("epoch-path bookkeeping") {
    CHECK(path_of_epoch(1, 4) == 1);
    CHECK(path_of_epoch(4, 4) == 4);
    CHECK(path_of_epoch(5, 4) == 1);
    CHECK(path_of_epoch(11, 4) == 3);
}
