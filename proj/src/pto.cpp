#include "pilab/pto.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pilab/evaluate.hpp"

namespace pilab {

using json = nlohmann::json;

std::vector<double> LinearModel::apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != in)
        throw std::invalid_argument("LinearModel::apply: input dimension mismatch");
    std::vector<double> y(out);
    for (int o = 0; o < out; ++o) {
        double s = b[o];
        for (int i = 0; i < in; ++i) s += W[static_cast<std::size_t>(o) * in + i] * x[i];
        y[o] = s;
    }
    return y;
}

LinearModel fit_ridge(const std::vector<std::vector<double>>& X,
                      const std::vector<std::vector<double>>& Y, double lambda) {
    if (X.empty() || X.size() != Y.size()) throw std::invalid_argument("fit_ridge: bad data");
    const int n = static_cast<int>(X.size());
    const int p = static_cast<int>(X.front().size());
    const int q = static_cast<int>(Y.front().size());
    if (n < p + 1)
        throw std::invalid_argument("fit_ridge: need more samples than features");

    // augmented design [x; 1], penalty on the feature block only
    const int pa = p + 1;
    linalg::Matrix A(pa);
    std::vector<std::vector<double>> rhs(q, std::vector<double>(pa, 0.0));
    for (int k = 0; k < n; ++k) {
        const auto& x = X[k];
        for (int i = 0; i < pa; ++i) {
            const double xi = i < p ? x[i] : 1.0;
            for (int j = i; j < pa; ++j) {
                const double xj = j < p ? x[j] : 1.0;
                A(i, j) += xi * xj;
            }
            for (int o = 0; o < q; ++o) rhs[o][i] += xi * Y[k][o];
        }
    }
    for (int i = 0; i < pa; ++i)
        for (int j = 0; j < i; ++j) A(i, j) = A(j, i);
    for (int i = 0; i < p; ++i) A(i, i) += lambda;
    // tiny jitter keeps the intercept-only direction factorizable
    A(p, p) += 1e-12;

    LinearModel m;
    m.in = p;
    m.out = q;
    m.W.assign(static_cast<std::size_t>(q) * p, 0.0);
    m.b.assign(q, 0.0);
    for (int o = 0; o < q; ++o) {
        const auto beta = linalg::spd_solve(A, rhs[o]);
        for (int i = 0; i < p; ++i) m.W[static_cast<std::size_t>(o) * p + i] = beta[i];
        m.b[o] = beta[p];
    }
    return m;
}

ResidualModel fit_residual_mvn(const std::vector<std::vector<double>>& residuals) {
    if (residuals.empty()) throw std::invalid_argument("fit_residual_mvn: no residuals");
    const int d = static_cast<int>(residuals.front().size());
    const int n = static_cast<int>(residuals.size());
    if (n < d + 1) throw std::invalid_argument("fit_residual_mvn: need more residuals than dim");

    ResidualModel m;
    m.dim = d;
    m.mean.assign(d, 0.0);
    m.lo.assign(d, 1e300);
    m.hi.assign(d, -1e300);
    for (const auto& r : residuals) {
        for (int i = 0; i < d; ++i) {
            m.mean[i] += r[i];
            m.lo[i] = std::min(m.lo[i], r[i]);
            m.hi[i] = std::max(m.hi[i], r[i]);
        }
    }
    for (double& v : m.mean) v /= n;

    m.cov = linalg::Matrix(d);
    for (const auto& r : residuals)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                m.cov(i, j) += (r[i] - m.mean[i]) * (r[j] - m.mean[j]);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.cov(i, j) /= (n - 1);

    double tr = 0.0;
    for (int i = 0; i < d; ++i) tr += m.cov(i, i);
    const double ridge = 1e-6 * (tr / d) + 1e-12;
    for (int i = 0; i < d; ++i) m.cov(i, i) += ridge;
    m.chol = linalg::cholesky(m.cov);
    return m;
}

std::vector<double> sample_residual(const ResidualModel& m, Rng& rng) {
    std::vector<double> zn(m.dim);
    for (double& v : zn) v = rng.normal();
    auto y = linalg::lower_apply(m.chol, zn);
    for (int i = 0; i < m.dim; ++i)
        y[i] = std::clamp(m.mean[i] + y[i], m.lo[i], m.hi[i]);
    return y;
}

std::vector<double> PtoModel::demand_input(std::span<const double> x) const {
    std::vector<double> v(x.begin(), x.begin() + feat.hist_demand);
    if (pc.joint_inputs)
        v.insert(v.end(), x.begin() + feat.hist_demand,
                 x.begin() + feat.hist_demand + feat.hist_lead);
    return v;
}

std::vector<double> PtoModel::lead_input(std::span<const double> x) const {
    std::vector<double> v(x.begin() + feat.hist_demand,
                          x.begin() + feat.hist_demand + feat.hist_lead);
    if (pc.joint_inputs) v.insert(v.end(), x.begin(), x.begin() + feat.hist_demand);
    return v;
}

PtoModel fit_pto(const DatasetContext& ctx, const std::vector<TrainingSample>& samples,
                 const PtoConfig& pc) {
    if (samples.empty()) throw std::invalid_argument("fit_pto: no samples");
    PtoModel m;
    m.pc = pc;
    m.feat = ctx.feat;
    m.cfg = ctx.cfg;

    std::vector<std::vector<double>> Xd, Xl, Yd, Yl;
    Xd.reserve(samples.size());
    for (const auto& s : samples) {
        Xd.push_back(m.demand_input(s.x));
        Xl.push_back(m.lead_input(s.x));
        Yd.push_back(s.d_future);
        Yl.push_back({static_cast<double>(s.lead0), static_cast<double>(s.lead1)});
    }
    m.demand = fit_ridge(Xd, Yd, pc.ridge);
    m.lead = fit_ridge(Xl, Yl, pc.ridge);

    std::vector<std::vector<double>> re, rl;
    re.reserve(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        auto dhat = m.demand.apply(Xd[k]);
        auto lhat = m.lead.apply(Xl[k]);
        std::vector<double> r1(dhat.size()), r2(lhat.size());
        for (std::size_t i = 0; i < dhat.size(); ++i) r1[i] = Yd[k][i] - dhat[i];
        for (std::size_t i = 0; i < lhat.size(); ++i) r2[i] = Yl[k][i] - lhat[i];
        re.push_back(std::move(r1));
        rl.push_back(std::move(r2));
    }
    m.eps = fit_residual_mvn(re);
    m.eta = fit_residual_mvn(rl);
    return m;
}

std::vector<PbScenario> pto_scenarios(const PtoModel& m, std::span<const double> x, int n,
                                      uint64_t seed) {
    const auto dhat = m.demand.apply(m.demand_input(x));
    const auto lhat = m.lead.apply(m.lead_input(x));
    Rng rng(seed);
    std::vector<PbScenario> sc(n);
    for (int k = 0; k < n; ++k) {
        const auto de = sample_residual(m.eps, rng);
        const auto le = sample_residual(m.eta, rng);
        PbScenario& s = sc[k];
        s.demands.resize(dhat.size());
        for (std::size_t i = 0; i < dhat.size(); ++i)
            s.demands[i] = std::max(dhat[i] + de[i], 0.0);
        s.lead = clamp_lead(lhat[0] + le[0], m.cfg.Lbar);
        const int lead1 = clamp_lead(lhat[1] + le[1], m.cfg.Lbar);
        s.v_next_off = std::max(m.cfg.R + lead1, s.lead);
    }
    return sc;
}

PbResult pto_pb_order(const PtoModel& m, std::span<const double> x, const State& z,
                      const CostParams& par, double q_max, uint64_t seed) {
    const auto sc = pto_scenarios(m, x, m.pc.n_scenarios, seed);
    const double mean_lead = m.lead.apply(m.lead_input(x))[0];
    PbConfig pb;
    pb.beta = beta_coefficient(m.cfg.K, std::clamp(mean_lead, 1.0, double(m.cfg.Lbar)), par) +
              m.beta_offset;
    pb.beta = std::max(pb.beta, 1e-6);
    pb.q_max = q_max;
    return pb_order(z, sc, pb, par, m.cfg.K);
}

ProductPolicyFactory pto_policy_factory(const PtoModel& m, const DatasetContext& ctx) {
    return [&m, &ctx](int product, int /*r*/) -> PolicyFn {
        return [&m, &ctx, product](int t, const State& z) {
            if (!features_available(ctx, t)) return 0.0;
            const auto x = build_features(ctx, product, t);
            const double q_max =
                (ctx.cfg.K + ctx.cfg.Lbar) * std::max(ctx.prod_max[product], 1e-3);
            const uint64_t seed = derive_seed(m.pc.seed, 0x970,
                                              static_cast<uint64_t>(product),
                                              static_cast<uint64_t>(t));
            return pto_pb_order(m, x, z, ctx.par, q_max, seed).q;
        };
    };
}

double select_ppb_offset(PtoModel& m, const DatasetContext& ctx) {
    double best_off = 0.0, best_cost = 1e300;
    for (int k = -10; k <= 10; ++k) {
        const double off = 0.05 * k;
        m.beta_offset = off;
        const auto rep =
            evaluate_policy_window(ctx, pto_policy_factory(m, ctx), "ppb", 1, ctx.cfg.T_in);
        if (rep.avg.total < best_cost - 1e-15) {
            best_cost = rep.avg.total;
            best_off = off;
        }
    }
    m.beta_offset = best_off;
    return best_off;
}

namespace {
json lm_to_json(const LinearModel& m) {
    return {{"in", m.in}, {"out", m.out}, {"W", m.W}, {"b", m.b}};
}
LinearModel lm_from_json(const json& j) {
    LinearModel m;
    m.in = j.at("in");
    m.out = j.at("out");
    m.W = j.at("W").get<std::vector<double>>();
    m.b = j.at("b").get<std::vector<double>>();
    return m;
}
json rm_to_json(const ResidualModel& m) {
    return {{"dim", m.dim}, {"mean", m.mean}, {"cov", m.cov.a}, {"lo", m.lo}, {"hi", m.hi}};
}
ResidualModel rm_from_json(const json& j) {
    ResidualModel m;
    m.dim = j.at("dim");
    m.mean = j.at("mean").get<std::vector<double>>();
    m.cov = linalg::Matrix(m.dim);
    m.cov.a = j.at("cov").get<std::vector<double>>();
    m.lo = j.at("lo").get<std::vector<double>>();
    m.hi = j.at("hi").get<std::vector<double>>();
    m.chol = linalg::cholesky(m.cov);
    return m;
}
}  // namespace

void save_pto(const PtoModel& m, const std::string& path) {
    json j;
    j["config"] = {{"ridge", m.pc.ridge},
                   {"n_scenarios", m.pc.n_scenarios},
                   {"joint_inputs", m.pc.joint_inputs},
                   {"seed", m.pc.seed},
                   {"beta_offset", m.beta_offset}};
    j["features"] = {{"hist_demand", m.feat.hist_demand}, {"hist_lead", m.feat.hist_lead}};
    j["system"] = {{"K", m.cfg.K},     {"Lbar", m.cfg.Lbar}, {"R", m.cfg.R},
                   {"T", m.cfg.T},     {"T_in", m.cfg.T_in}, {"T_out", m.cfg.T_out}};
    j["demand"] = lm_to_json(m.demand);
    j["lead"] = lm_to_json(m.lead);
    j["eps"] = rm_to_json(m.eps);
    j["eta"] = rm_to_json(m.eta);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_pto: cannot open " + path);
    os << j.dump(2) << '\n';
}

PtoModel load_pto(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_pto: cannot open " + path);
    json j;
    is >> j;
    PtoModel m;
    const auto& c = j.at("config");
    m.pc.ridge = c.at("ridge");
    m.pc.n_scenarios = c.at("n_scenarios");
    m.pc.joint_inputs = c.at("joint_inputs");
    m.pc.seed = c.at("seed");
    m.beta_offset = c.at("beta_offset");
    m.feat.hist_demand = j.at("features").at("hist_demand");
    m.feat.hist_lead = j.at("features").at("hist_lead");
    const auto& s = j.at("system");
    m.cfg.K = s.at("K");
    m.cfg.Lbar = s.at("Lbar");
    m.cfg.R = s.at("R");
    m.cfg.T = s.at("T");
    m.cfg.T_in = s.at("T_in");
    m.cfg.T_out = s.at("T_out");
    m.demand = lm_from_json(j.at("demand"));
    m.lead = lm_from_json(j.at("lead"));
    m.eps = rm_from_json(j.at("eps"));
    m.eta = rm_from_json(j.at("eta"));
    return m;
}

}  // namespace pilab
