#include "pilab/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "pilab/parallel.hpp"
#include "pilab/rng.hpp"
#include "pilab/stats.hpp"

namespace pilab {

GenKind gen_kind_from_string(const std::string& s) {
    if (s == "IC") return GenKind::IC;
    if (s == "CC") return GenKind::CC;
    if (s == "CR") return GenKind::CR;
    if (s == "SCR") return GenKind::SCR;
    throw std::invalid_argument("unknown generator config: " + s);
}

std::string to_string(GenKind k) {
    switch (k) {
        case GenKind::IC: return "IC";
        case GenKind::CC: return "CC";
        case GenKind::CR: return "CR";
        case GenKind::SCR: return "SCR";
    }
    return "?";
}

void GenConfig::validate() const {
    if (I < 1 || J < 1) throw std::invalid_argument("GenConfig: I, J >= 1");
    if (keep_lo < 1 || keep_hi > T_raw || keep_lo > keep_hi)
        throw std::invalid_argument("GenConfig: bad keep window");
    if (Lbar < 1) throw std::invalid_argument("GenConfig: Lbar >= 1");
}

namespace {

enum StreamTag : uint64_t { TagMu = 1, TagX1, TagX2, TagX3, TagX4, TagEps, TagLead, TagShock };

// Demand feature stream: iid N(mu, (0.6 mu)^2) for IC, else AR(1)
// x' = 0.2 mu + 0.8 x + N(0,(0.36 mu)^2), started at the stationary mean.
std::vector<double> feature_stream(GenKind kind, double mu, int T, Rng& rng) {
    std::vector<double> x(T);
    if (kind == GenKind::IC) {
        for (int t = 0; t < T; ++t) x[t] = rng.normal(mu, 0.6 * mu);
    } else {
        double cur = mu;
        for (int t = 0; t < T; ++t) {
            x[t] = cur;
            cur = 0.2 * mu + 0.8 * cur + rng.normal(0.0, 0.36 * mu);
        }
    }
    return x;
}

// Demand noise: IC iid N(0,1); CC/CR AR(1) with innovation variance 0.36;
// SCR adds sqrt(0.27) * shock on top of an AR(1) with innovation variance 0.09.
std::vector<double> eps_stream(GenKind kind, int T, Rng& rng,
                               const std::vector<double>* shock) {
    std::vector<double> e(T);
    if (kind == GenKind::IC) {
        for (int t = 0; t < T; ++t) e[t] = rng.normal();
    } else if (kind == GenKind::CC || kind == GenKind::CR) {
        double cur = 0.0;
        const double sd = std::sqrt(0.36);
        for (int t = 0; t < T; ++t) {
            e[t] = cur;
            cur = 0.8 * cur + rng.normal(0.0, sd);
        }
    } else {
        double cur = 0.0;
        const double sd = std::sqrt(0.09);
        const double load = std::sqrt(0.27);
        for (int t = 0; t < T; ++t) {
            e[t] = cur + load * (*shock)[t];
            cur = 0.8 * cur + rng.normal(0.0, sd);
        }
    }
    return e;
}

// Common shock (SCR): AR(1) with unit innovation variance.
std::vector<double> shock_stream(int T, Rng& rng) {
    std::vector<double> s(T);
    double cur = 0.0;
    for (int t = 0; t < T; ++t) {
        s[t] = cur;
        cur = 0.8 * cur + rng.normal();
    }
    return s;
}

// Lead time: constant 3 for IC/CC; CR AR(1) L' = 0.6 + 0.8 L + N(0,1);
// SCR L = Ltilde + sqrt(0.75) * shock with Ltilde innovation variance 0.25.
std::vector<double> lead_stream(GenKind kind, int T, Rng& rng,
                                const std::vector<double>* shock) {
    std::vector<double> l(T, 3.0);
    if (kind == GenKind::CR) {
        double cur = 3.0;
        for (int t = 0; t < T; ++t) {
            l[t] = cur;
            cur = 0.6 + 0.8 * cur + rng.normal();
        }
    } else if (kind == GenKind::SCR) {
        double cur = 3.0;
        const double sd = std::sqrt(0.25);
        const double load = std::sqrt(0.75);
        for (int t = 0; t < T; ++t) {
            l[t] = cur + load * (*shock)[t];
            cur = 0.6 + 0.8 * cur + rng.normal(0.0, sd);
        }
    }
    return l;
}

double demand_base(double x1, double x2, double x3, double x4) {
    return std::exp(x1 - 0.5) + 2.0 * (x2 + x3 - 1.0) * (x2 + x3 - 1.0) + std::fabs(x4 - 0.5);
}

std::vector<double> keep(const std::vector<double>& v, int lo, int hi) {
    return {v.begin() + (lo - 1), v.begin() + hi};
}

}  // namespace

ScenarioSet gen_instance(const GenConfig& gen, int instance_id) {
    gen.validate();
    const int T = gen.T_raw;
    const uint64_t inst = static_cast<uint64_t>(instance_id);

    std::array<double, 4> mu{};
    {
        Rng rng(derive_seed(gen.seed, TagMu, inst));
        for (double& m : mu) m = rng.uniform();
    }

    // shared streams: x2 per SKU, x3 per DC, x4 global
    std::vector<std::vector<double>> x2(gen.I), x3(gen.J);
    for (int i = 0; i < gen.I; ++i) {
        Rng rng(derive_seed(gen.seed, TagX2, inst, static_cast<uint64_t>(i)));
        x2[i] = feature_stream(gen.kind, mu[1], T, rng);
    }
    for (int j = 0; j < gen.J; ++j) {
        Rng rng(derive_seed(gen.seed, TagX3, inst, static_cast<uint64_t>(j)));
        x3[j] = feature_stream(gen.kind, mu[2], T, rng);
    }
    std::vector<double> x4;
    {
        Rng rng(derive_seed(gen.seed, TagX4, inst));
        x4 = feature_stream(gen.kind, mu[3], T, rng);
    }

    ScenarioSet set;
    set.instance_id = instance_id;
    set.config_name = to_string(gen.kind);
    set.T = gen.T_kept();
    set.mu = mu;
    set.products.resize(static_cast<std::size_t>(gen.I) * gen.J);

    par::parallel_for(set.products.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / gen.J;
        const int j = static_cast<int>(idx) % gen.J;
        const uint64_t pid = static_cast<uint64_t>(idx);

        Rng rx(derive_seed(gen.seed, TagX1, inst, pid));
        auto x1 = feature_stream(gen.kind, mu[0], T, rx);

        std::vector<double> shock;
        if (gen.kind == GenKind::SCR) {
            Rng rs(derive_seed(gen.seed, TagShock, inst, pid));
            shock = shock_stream(T, rs);
        }
        Rng re(derive_seed(gen.seed, TagEps, inst, pid));
        auto eps = eps_stream(gen.kind, T, re, &shock);
        Rng rl(derive_seed(gen.seed, TagLead, inst, pid));
        auto lead = lead_stream(gen.kind, T, rl, &shock);

        ProductSeries p;
        p.sku = i + 1;
        p.dc = j + 1;
        std::vector<double> demand(T);
        for (int t = 0; t < T; ++t) {
            const double d = demand_base(x1[t], x2[i][t], x3[j][t], x4[t]) + eps[t];
            demand[t] = d > 0.0 ? d : 0.0;
        }
        p.demand = keep(demand, gen.keep_lo, gen.keep_hi);
        p.leadtime = keep(lead, gen.keep_lo, gen.keep_hi);
        p.x[0] = keep(x1, gen.keep_lo, gen.keep_hi);
        p.x[1] = keep(x2[i], gen.keep_lo, gen.keep_hi);
        p.x[2] = keep(x3[j], gen.keep_lo, gen.keep_hi);
        p.x[3] = keep(x4, gen.keep_lo, gen.keep_hi);
        set.products[idx] = std::move(p);
    });

    return set;
}

namespace {

double lag1_autocorr(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 3) return 0.0;
    const double m = stats::mean(v);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        den += (v[t] - m) * (v[t] - m);
        if (t + 1 < n) num += (v[t] - m) * (v[t + 1] - m);
    }
    return den > 0.0 ? num / den : 0.0;
}

MomentRow make_row(const std::string& name, const std::vector<double>& v, double ana_mean,
                   double ana_sd) {
    MomentRow r;
    r.stream = name;
    r.emp_mean = stats::mean(v);
    r.emp_sd = v.size() > 1 ? stats::stddev(v) : 0.0;
    r.ana_mean = ana_mean;
    r.ana_sd = ana_sd;
    r.lag1 = lag1_autocorr(v);
    const double scale = std::max(std::fabs(ana_mean), ana_sd);
    const bool mean_ok = std::fabs(r.emp_mean - ana_mean) <= 0.05 * std::max(scale, 1e-12);
    const bool sd_ok = ana_sd == 0.0 ? r.emp_sd <= 1e-9
                                     : std::fabs(r.emp_sd - ana_sd) <= 0.05 * ana_sd;
    r.flagged = !(mean_ok && sd_ok);
    return r;
}

}  // namespace

std::vector<MomentRow> stationarity_report(const ScenarioSet& set, const GenConfig& gen) {
    // Features and (raw) lead times are observable in the set; the demand noise is
    // regenerated from the same substreams because clamping makes it unrecoverable
    // from realized demand.
    const auto& p0 = set.products.front();
    const int T = gen.T_raw;
    const uint64_t inst = static_cast<uint64_t>(set.instance_id);

    std::vector<double> shock;
    if (gen.kind == GenKind::SCR) {
        Rng rs(derive_seed(gen.seed, TagShock, inst, 0));
        shock = shock_stream(T, rs);
    }
    Rng re(derive_seed(gen.seed, TagEps, inst, 0));
    auto eps = keep(eps_stream(gen.kind, T, re, &shock), gen.keep_lo, gen.keep_hi);

    std::vector<MomentRow> rows;
    const double lead_sd =
        (gen.kind == GenKind::CR || gen.kind == GenKind::SCR) ? std::sqrt(1.0 / 0.36) : 0.0;
    for (int k = 0; k < 4; ++k)
        rows.push_back(make_row("x" + std::to_string(k + 1), p0.x[k], set.mu[k],
                                0.6 * set.mu[k]));
    rows.push_back(make_row("eps", eps, 0.0, 1.0));
    rows.push_back(make_row("lead", p0.leadtime, 3.0, lead_sd));
    return rows;
}

}  // namespace pilab
