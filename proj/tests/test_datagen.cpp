#include <doctest.h>

#include <cmath>

#include "pilab/datagen.hpp"
#include "pilab/stats.hpp"

using namespace pilab;

namespace {
GenConfig long_cfg(GenKind kind, uint64_t seed) {
    GenConfig g;
    g.kind = kind;
    g.I = 1;
    g.J = 1;
    g.T_raw = 10030;
    g.keep_lo = 31;
    g.keep_hi = 10030;
    g.seed = seed;
    return g;
}
}  // namespace

TEST_CASE("demand formula: deterministic part") {
    // with all features frozen at their means and no noise the MA model gives
    // exp(mu1-0.5) + 2(mu2+mu3-1)^2 + |mu4-0.5|
    GenConfig g;
    g.kind = GenKind::IC;
    g.I = 1;
    g.J = 1;
    g.seed = 5;
    auto set = gen_instance(g, 0);
    const auto mu = set.mu;
    const double base = std::exp(mu[0] - 0.5) + 2.0 * (mu[1] + mu[2] - 1.0) * (mu[1] + mu[2] - 1.0) +
                        std::fabs(mu[3] - 0.5);
    // long-run average demand approaches the deterministic part (noise is mean
    // zero, clamping adds a small positive bias)
    auto g2 = long_cfg(GenKind::IC, 5);
    auto big = gen_instance(g2, 0);
    const double avg = stats::mean(big.products[0].demand);
    CHECK(std::fabs(avg - base) <= 0.35);  // clamp bias is bounded by E[eps^-]
    CHECK(base > 0.0);
}

TEST_CASE("IC: iid streams, constant lead 3") {
    auto set = gen_instance(long_cfg(GenKind::IC, 11), 0);
    auto rows = stationarity_report(set, long_cfg(GenKind::IC, 11));
    for (const auto& r : rows) {
        INFO(r.stream);
        CHECK_FALSE(r.flagged);
        if (r.stream != "lead") CHECK(std::fabs(r.lag1) < 0.05);
    }
    for (double lt : set.products[0].leadtime) CHECK(lt == 3.0);
}

TEST_CASE("CC: AR(1) features keep the IC long-run moments") {
    auto g = long_cfg(GenKind::CC, 13);
    auto set = gen_instance(g, 0);
    auto rows = stationarity_report(set, g);
    for (const auto& r : rows) {
        INFO(r.stream << " emp " << r.emp_mean << "/" << r.emp_sd << " ana " << r.ana_mean
                      << "/" << r.ana_sd);
        CHECK_FALSE(r.flagged);
    }
    // feature autocorrelation now near the AR coefficient
    const auto& x1 = set.products[0].x[0];
    double m = stats::mean(x1), num = 0, den = 0;
    for (std::size_t t = 0; t + 1 < x1.size(); ++t) {
        num += (x1[t] - m) * (x1[t + 1] - m);
        den += (x1[t] - m) * (x1[t] - m);
    }
    CHECK(num / den == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("CR: lead time AR(1) stationary mean 3 and variance 1/0.36") {
    auto g = long_cfg(GenKind::CR, 17);
    auto set = gen_instance(g, 0);
    const auto& lead = set.products[0].leadtime;
    CHECK(stats::mean(lead) == doctest::Approx(3.0).epsilon(0.05));
    CHECK(stats::variance(lead) == doctest::Approx(1.0 / 0.36).epsilon(0.10));
}

TEST_CASE("SCR: shock decomposition preserves unit noise variance and lead moments") {
    auto g = long_cfg(GenKind::SCR, 19);
    auto set = gen_instance(g, 0);
    auto rows = stationarity_report(set, g);
    for (const auto& r : rows) {
        INFO(r.stream);
        CHECK_FALSE(r.flagged);
    }
    // Var(eps) = 0.09/0.36 + 0.27/0.36 = 1, lead variance matches CR's 2.778
    const auto& lead = set.products[0].leadtime;
    CHECK(stats::variance(lead) == doctest::Approx(1.0 / 0.36).epsilon(0.10));
}

TEST_CASE("determinism: same seed gives identical datasets, instances differ") {
    GenConfig g;
    g.kind = GenKind::SCR;
    g.I = 2;
    g.J = 2;
    g.T_raw = 80;
    g.keep_lo = 31;
    g.keep_hi = 80;
    g.seed = 23;
    auto a = gen_instance(g, 0);
    auto b = gen_instance(g, 0);
    REQUIRE(a.n_products() == b.n_products());
    for (int p = 0; p < a.n_products(); ++p) {
        CHECK(a.products[p].demand == b.products[p].demand);
        CHECK(a.products[p].leadtime == b.products[p].leadtime);
    }
    auto c = gen_instance(g, 1);
    CHECK(a.mu != c.mu);  // feature means resampled per instance
    CHECK(a.products[0].demand != c.products[0].demand);
}

TEST_CASE("shared features: x2 per SKU, x3 per DC, x4 global") {
    GenConfig g;
    g.kind = GenKind::CC;
    g.I = 2;
    g.J = 2;
    g.T_raw = 60;
    g.keep_lo = 31;
    g.keep_hi = 60;
    g.seed = 29;
    auto set = gen_instance(g, 0);
    auto prod = [&](int sku, int dc) -> const ProductSeries& {
        for (const auto& p : set.products)
            if (p.sku == sku && p.dc == dc) return p;
        throw std::runtime_error("product not found");
    };
    CHECK(prod(1, 1).x[1] == prod(1, 2).x[1]);  // same SKU shares x2
    CHECK(prod(1, 1).x[2] == prod(2, 1).x[2]);  // same DC shares x3
    CHECK(prod(1, 1).x[3] == prod(2, 2).x[3]);  // x4 global
    CHECK(prod(1, 1).x[0] != prod(1, 2).x[0]);  // x1 is SKU-DC specific
    CHECK(prod(1, 1).demand != prod(1, 2).demand);
}

TEST_CASE("demand never negative") {
    auto set = gen_instance(long_cfg(GenKind::SCR, 31), 0);
    for (double d : set.products[0].demand) CHECK(d >= 0.0);
}
