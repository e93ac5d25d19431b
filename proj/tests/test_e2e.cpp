#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pilab/e2e.hpp"
#include "pilab/evaluate.hpp"
#include "pilab/marginal.hpp"

using namespace pilab;

namespace {

SystemConfig small_cfg() {
    SystemConfig cfg;
    cfg.K = 3;
    cfg.Lbar = 3;
    cfg.R = 2;
    cfg.T = 60;
    cfg.T_in = 60;
    cfg.T_out = 0;
    return cfg;
}

E2EModel random_model(const SystemConfig& cfg, bool pil, int x_dim, uint64_t seed) {
    E2EArch arch;
    arch.x_dim = x_dim;
    arch.z_dim = cfg.state_dim();
    arch.d_window = cfg.K + cfg.Lbar;
    arch.hid_demand = 10;
    arch.hid_lead = 6;
    arch.hid_order = 8;
    arch.pil = pil;
    E2EModel m;
    m.arch = arch;
    m.cfg = cfg;
    m.poi = PoiConfig{0.3};
    Rng rng(seed);
    m.init(rng);
    return m;
}

}  // namespace

TEST_CASE("tape loss equals the independent double-path loss") {
    auto cfg = small_cfg();
    CostParams par{1.0, 10.0, 10.0};
    TrainConfig tc;
    Rng rng(51);
    for (bool pil : {false, true}) {
        auto m = random_model(cfg, pil, 9, 52 + pil);
        for (int trial = 0; trial < 30; ++trial) {
            auto s = make_random_sample(rng, cfg, 9);
            ad::Tape tape;
            std::vector<double> grad(m.params.size(), 0.0);
            const auto tape_parts = e2e_loss_grad(m, s, tc, par, tape, grad);
            const auto val_parts = e2e_loss_value(m, s, tc, par);
            CHECK(std::fabs(tape_parts.total - val_parts.total) <=
                  1e-10 * std::max(1.0, std::fabs(val_parts.total)));
            CHECK(tape_parts.marginal ==
                  doctest::Approx(val_parts.marginal).epsilon(1e-9));
            CHECK(tape_parts.poi1 == doctest::Approx(val_parts.poi1).epsilon(1e-9));
        }
    }
}

TEST_CASE("PIL loss gradients match finite differences away from kinks") {
    auto cfg = small_cfg();
    CostParams par{1.0, 10.0, 10.0};
    TrainConfig tc;
    auto m = random_model(cfg, true, 7, 61);
    Rng rng(62);
    int done = 0;
    while (done < 40) {
        auto s = make_random_sample(rng, cfg, 7);
        const int idx = rng.uniform_int(0, static_cast<int>(m.params.size()) - 1);
        auto gc = grad_check_one(m, s, tc, par, idx, 1e-6);
        if (gc.kink_margin < 1e-4) continue;
        ++done;
        INFO("idx " << idx << " analytic " << gc.analytic << " numeric " << gc.numeric);
        CHECK((gc.rel_err < 1e-4 || std::fabs(gc.analytic - gc.numeric) < 1e-7));
    }
}

TEST_CASE("BB head: gradients flow through the raw state input") {
    auto cfg = small_cfg();
    CostParams par{1.0, 10.0, 10.0};
    TrainConfig tc;
    auto m = random_model(cfg, false, 7, 63);
    Rng rng(64);
    int done = 0;
    while (done < 25) {
        auto s = make_random_sample(rng, cfg, 7);
        const int idx = rng.uniform_int(0, static_cast<int>(m.params.size()) - 1);
        auto gc = grad_check_one(m, s, tc, par, idx, 1e-6);
        if (gc.kink_margin < 1e-4) continue;
        ++done;
        CHECK((gc.rel_err < 1e-4 || std::fabs(gc.analytic - gc.numeric) < 1e-7));
    }
}

TEST_CASE("single repeated sample: training reaches the scalar convex minimum") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 1;
    cfg.R = 2;
    cfg.T = 10;
    cfg.T_in = 10;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};

    TrainingSample s;
    s.product = 0;
    s.t = 1;
    s.r = 1;
    s.x = {1.0, 2.0, 1.0};
    s.z = {0.0, 0.0};
    s.d_future = {1.0, 2.0, 1.0};
    s.lead0 = 1;
    s.lead1 = 1;
    s.v_next_off = 3;

    // golden-section oracle for min_q L(q | z)
    MarginalWindow w{s.lead0, s.v_next_off, kNoHorizon};
    auto loss_of = [&](double q) { return marginal_costs(q, s.z, s.d_future, w, cfg.K, par).loss(); };
    double lo = 0.0, hi = 20.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    for (int it = 0; it < 200; ++it) {
        if (loss_of(c) < loss_of(d)) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - gr * (hi - lo);
        d = lo + gr * (hi - lo);
    }
    const double oracle_min = loss_of(0.5 * (lo + hi));
    CHECK(oracle_min == doctest::Approx(1.0));  // min at q = 4 on this instance

    std::vector<TrainingSample> samples(64, s);
    E2EArch arch;
    arch.hid_demand = 6;
    arch.hid_lead = 4;
    arch.hid_order = 6;
    arch.pil = false;
    TrainConfig tc;
    tc.lambda_D = 0.0;
    tc.lambda_L = 0.0;
    tc.epochs = 300;
    tc.batch = 64;
    tc.seed = 5;
    tc.adam = nn::AdamConfig{0.05, 0.9, 0.999, 1e-8, 0.0, 1.0, 0};
    auto m = train_e2e(samples, arch, cfg, par, PoiConfig{0.3}, tc);
    const double q_hat = e2e_forward(m, s.x, s.z).q;
    CHECK(loss_of(q_hat) <= 1.02 * oracle_min + 1e-6);
}

TEST_CASE("zero demand forces the learned order toward zero") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Lbar = 1;
    cfg.R = 2;
    cfg.T = 10;
    cfg.T_in = 10;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    TrainingSample s;
    s.x = {0.5, 0.5};
    s.z = {0.0, 0.0};
    s.d_future = {0.0, 0.0, 0.0};
    s.lead0 = 1;
    s.lead1 = 1;
    s.v_next_off = 3;
    std::vector<TrainingSample> samples(32, s);
    E2EArch arch;
    arch.hid_demand = 4;
    arch.hid_lead = 4;
    arch.hid_order = 4;
    arch.pil = false;
    TrainConfig tc;
    tc.lambda_D = 0.0;
    tc.lambda_L = 0.0;
    tc.epochs = 250;
    tc.batch = 32;
    tc.seed = 6;
    tc.adam = nn::AdamConfig{0.05, 0.9, 0.999, 1e-8, 0.0, 1.0, 0};
    auto m = train_e2e(samples, arch, cfg, par, PoiConfig{0.3}, tc);
    CHECK(e2e_forward(m, s.x, s.z).q < 0.05);
}

namespace {
// tiny stationary dataset for smoke training
std::vector<TrainingSample> toy_samples(const SystemConfig& cfg, int n, uint64_t seed) {
    Rng rng(seed);
    std::vector<TrainingSample> out;
    for (int k = 0; k < n; ++k) {
        TrainingSample s;
        s.x.assign(6, 0.0);
        for (auto& v : s.x) v = 1.0 + 0.3 * rng.normal();
        s.z.assign(cfg.state_dim(), 0.0);
        for (int i = 0; i < cfg.K; ++i) s.z[i] = rng.uniform(0.0, 2.0);
        s.d_future.assign(cfg.K + cfg.Lbar, 0.0);
        for (auto& v : s.d_future) v = std::max(0.0, 1.0 + 0.3 * rng.normal());
        s.lead0 = 2;
        s.lead1 = 2;
        s.v_next_off = std::max(cfg.R + s.lead1, s.lead0);
        out.push_back(std::move(s));
    }
    return out;
}
}  // namespace

TEST_CASE("training-loss trace decreases on a stationary toy problem") {
    SystemConfig cfg;
    cfg.K = 3;
    cfg.Lbar = 3;
    cfg.R = 2;
    cfg.T = 40;
    cfg.T_in = 40;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    auto samples = toy_samples(cfg, 96, 71);
    E2EArch arch;
    arch.hid_demand = 8;
    arch.hid_lead = 6;
    arch.hid_order = 8;
    arch.pil = true;
    TrainConfig tc;
    tc.epochs = 25;
    tc.batch = 32;
    tc.seed = 8;
    tc.adam = nn::AdamConfig{3e-3, 0.9, 0.999, 1e-8, 0.0, 1.0, 0};
    std::vector<double> probe_s;
    std::vector<double> losses;
    tc.on_epoch = [&](int, const E2EModel& m) {
        double acc = 0.0;
        for (int i = 0; i < 16; ++i) acc += e2e_loss_value(m, samples[i], tc, par).total;
        losses.push_back(acc / 16.0);
        probe_s.push_back(e2e_forward(m, samples[0].x, samples[0].z).s_target);
    };
    train_e2e(samples, arch, cfg, par, PoiConfig{0.3}, tc);
    REQUIRE(losses.size() == 25);
    const double head = (losses[0] + losses[1] + losses[2]) / 3.0;
    const double tail = (losses[22] + losses[23] + losses[24]) / 3.0;
    CHECK(tail < head);

    // the recommended target level settles: tail std under 5% of its mean
    double ms = 0.0;
    for (int i = 20; i < 25; ++i) ms += probe_s[i];
    ms /= 5.0;
    double var = 0.0;
    for (int i = 20; i < 25; ++i) var += (probe_s[i] - ms) * (probe_s[i] - ms);
    const double sd = std::sqrt(var / 4.0);
    CHECK(sd <= 0.05 * std::max(std::fabs(ms), 1e-3));
}

TEST_CASE("PIL decision depends on the state only through the POI channel") {
    auto cfg = small_cfg();
    auto m = random_model(cfg, true, 7, 81);
    Rng rng(82);
    auto s = make_random_sample(rng, cfg, 7);
    const auto dec = e2e_forward(m, s.x, s.z);
    // another state with the same POI value gives the same order
    State z2 = s.z;
    // shifting stock between two fresh slots below K leaves totals identical at
    // the arrival offset only if the POI matches; verify via the POI itself
    const auto poi1 = smoothed_poi(s.z, dec.d_pred, dec.l_pred[0], m.poi, cfg.K, cfg.Lbar);
    z2[cfg.K] += 1.0;  // pipeline slot beyond K: POI changes, q must change only via POI
    const auto dec2 = e2e_forward(m, s.x, z2);
    const auto poi2 = smoothed_poi(z2, dec2.d_pred, dec2.l_pred[0], m.poi, cfg.K, cfg.Lbar);
    CHECK(dec.s_target == doctest::Approx(dec2.s_target).epsilon(1e-12));
    CHECK(dec.q == doctest::Approx(std::max(dec.s_target - poi1[0], 0.0)).epsilon(1e-9));
    CHECK(dec2.q == doctest::Approx(std::max(dec2.s_target - poi2[0], 0.0)).epsilon(1e-9));
}

TEST_CASE("zero state and zero demand make the POI regularizers vanish") {
    auto cfg = small_cfg();
    CostParams par{1.0, 10.0, 10.0};
    auto m = random_model(cfg, true, 7, 83);
    // zero the demand/lead heads so predictions are exactly zero, matching the
    // all-zero no-order targets
    std::fill(m.params.begin(), m.params.end(), 0.0);
    TrainingSample s;
    s.x.assign(7, 0.0);
    s.z.assign(cfg.state_dim(), 0.0);
    s.d_future.assign(cfg.K + cfg.Lbar, 0.0);
    s.lead0 = 1;
    s.lead1 = 1;
    s.v_next_off = std::max(cfg.R + 1, 1);
    TrainConfig tc;
    const auto parts = e2e_loss_value(m, s, tc, par);
    CHECK(parts.poi1 == doctest::Approx(0.0));
    CHECK(parts.poi2 == doctest::Approx(0.0));
}

TEST_CASE("boost wrapper scales the base output exactly") {
    auto cfg = small_cfg();
    auto m = random_model(cfg, true, 7, 91);
    CostParams par{1.0, 10.0, 10.0};
    std::vector<std::vector<double>> demands{std::vector<double>(cfg.T, 1.0)};
    auto set = testing::make_set(cfg.T, demands, 2.0);
    SystemConfig cfg_io = cfg;
    cfg_io.T_in = cfg.T - 20;
    cfg_io.T_out = 20;
    auto ctx = make_context(set, cfg_io, par);
    auto base = e2e_policy_factory(m, ctx, 1.0)(0, 1);
    auto boosted = e2e_policy_factory(m, ctx, 1.37)(0, 1);
    State z(cfg.state_dim(), 0.5);
    for (int t = 12; t < 16; ++t)
        CHECK(boosted(t, z) == doctest::Approx(1.37 * base(t, z)).epsilon(1e-14));
}

TEST_CASE("boosting: argmin never exceeds the unboosted in-sample cost") {
    SystemConfig cfg;
    cfg.K = 3;
    cfg.Lbar = 2;
    cfg.R = 2;
    cfg.T = 60;
    cfg.T_in = 40;
    cfg.T_out = 20;
    CostParams par{1.0, 10.0, 10.0};
    Rng rng(95);
    std::vector<double> demand(cfg.T);
    for (auto& v : demand) v = 1.0 + 0.5 * rng.uniform();
    auto set = testing::make_set(cfg.T, {demand}, 1.0);
    auto ctx = make_context(set, cfg, par);
    auto samples = build_samples(ctx);
    presample_states(ctx, samples, benchmark_policy_factory(ctx));
    E2EArch arch;
    arch.hid_demand = 6;
    arch.hid_lead = 4;
    arch.hid_order = 6;
    arch.pil = true;
    TrainConfig tc;
    tc.epochs = 6;
    tc.batch = 32;
    tc.seed = 9;
    auto m = train_e2e(samples, arch, cfg, par, PoiConfig{0.3}, tc);

    BoostConfig grid_one;
    grid_one.lo = grid_one.hi = 1.0;
    auto b1 = boost_gamma(m, ctx, grid_one);
    CHECK(b1.gamma == doctest::Approx(1.0));
    CHECK(b1.cost_at_gamma == doctest::Approx(b1.cost_at_one));

    auto bfull = boost_gamma(m, ctx, BoostConfig{});
    CHECK(bfull.cost_at_gamma <= bfull.cost_at_one + 1e-12);
}

TEST_CASE("boosting corrects a systematically under-ordering policy") {
    SystemConfig cfg;
    cfg.K = 3;
    cfg.Lbar = 2;
    cfg.R = 2;
    cfg.T = 80;
    cfg.T_in = 60;
    cfg.T_out = 20;
    CostParams par{1.0, 10.0, 10.0};
    std::vector<double> demand(cfg.T, 2.0);
    auto set = testing::make_set(cfg.T, {demand}, 1.0);
    auto ctx = make_context(set, cfg, par);
    auto samples = build_samples(ctx);
    presample_states(ctx, samples, benchmark_policy_factory(ctx));
    E2EArch arch;
    arch.hid_demand = 6;
    arch.hid_lead = 4;
    arch.hid_order = 6;
    arch.pil = true;
    TrainConfig tc;
    tc.epochs = 20;
    tc.batch = 64;
    tc.seed = 10;
    auto m = train_e2e(samples, arch, cfg, par, PoiConfig{0.3}, tc);

    // scale demand up 30%: the trained policy now under-orders systematically
    std::vector<double> big(cfg.T, 2.6);
    auto set2 = testing::make_set(cfg.T, {big}, 1.0);
    auto ctx2 = make_context(set2, cfg, par);
    auto br = boost_gamma(m, ctx2, BoostConfig{});
    CHECK(br.gamma > 1.0);
    CHECK(br.cost_at_gamma < br.cost_at_one);
}

TEST_CASE("end-to-end homogeneity: scaled decisions on scaled demand") {
    Rng rng(101);
    SystemConfig cfg;
    cfg.K = 3;
    cfg.Lbar = 2;
    cfg.R = 2;
    cfg.T = 30;
    cfg.T_in = 30;
    cfg.T_out = 0;
    CostParams par{1.0, 10.0, 10.0};
    std::vector<double> d(cfg.T), l(cfg.T), q(cfg.T);
    for (auto& v : d) v = rng.uniform(0.0, 4.0);
    for (auto& v : l) v = rng.uniform_int(1, cfg.Lbar);
    for (auto& v : q) v = rng.uniform(0.0, 5.0);
    const double base = replay(q, d, l, cfg, par).total_cost();
    for (double g : {0.5, 2.0}) {
        auto dg = d;
        auto qg = q;
        for (auto& v : dg) v *= g;
        for (auto& v : qg) v *= g;
        CHECK(replay(qg, dg, l, cfg, par).total_cost() == doctest::Approx(g * base));
    }
}

TEST_CASE("checkpoint round trip preserves decisions") {
    auto cfg = small_cfg();
    auto m = random_model(cfg, true, 7, 111);
    save_checkpoint(m, "/tmp/pilab_ckpt_test.json");
    auto m2 = load_checkpoint("/tmp/pilab_ckpt_test.json");
    Rng rng(112);
    auto s = make_random_sample(rng, cfg, 7);
    CHECK(e2e_forward(m, s.x, s.z).q == doctest::Approx(e2e_forward(m2, s.x, s.z).q));
    CHECK(m2.arch.pil == m.arch.pil);
    CHECK(m2.params == m.params);
}

TEST_CASE("training rejects empty samples and non-finite loss") {
    SystemConfig cfg = small_cfg();
    CostParams par{1.0, 10.0, 10.0};
    TrainConfig tc;
    CHECK_THROWS(train_e2e({}, E2EArch{}, cfg, par, PoiConfig{0.3}, tc));
}
