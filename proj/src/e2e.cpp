#include "pilab/e2e.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pilab/evaluate.hpp"
#include "pilab/marginal.hpp"
#include "pilab/parallel.hpp"
#include "pilab/poi.hpp"

namespace pilab {

using ad::Var;
using json = nlohmann::json;

int E2EArch::param_count() const {
    return demand_spec().param_count() + lead_spec().param_count() + head_spec().param_count();
}

void E2EModel::init(Rng& rng) {
    params.assign(arch.param_count(), 0.0);
    std::span<double> p(params);
    int off = 0;
    for (const auto& spec : {arch.demand_spec(), arch.lead_spec(), arch.head_spec()}) {
        nn::init_params(spec, p.subspan(off, spec.param_count()), rng);
        off += spec.param_count();
    }
}

namespace {

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

double softplus_d(double x) { return x > 30.0 ? x : std::log1p(std::exp(std::min(x, 30.0))); }

struct ParamSlices {
    std::size_t d_off, d_n, l_off, l_n, h_off, h_n;
};

ParamSlices slices(const E2EArch& a) {
    ParamSlices s;
    s.d_off = 0;
    s.d_n = a.demand_spec().param_count();
    s.l_off = s.d_off + s.d_n;
    s.l_n = a.lead_spec().param_count();
    s.h_off = s.l_off + s.l_n;
    s.h_n = a.head_spec().param_count();
    return s;
}

}  // namespace

E2EDecision e2e_forward(const E2EModel& m, std::span<const double> x, const State& z) {
    const auto& a = m.arch;
    if (static_cast<int>(z.size()) != a.z_dim)
        throw std::invalid_argument("e2e_forward: state dimension mismatch");
    const auto sl = slices(a);
    std::span<const double> p(m.params);

    auto fd = nn::mlp_forward(a.demand_spec(), p.subspan(sl.d_off, sl.d_n), x);
    auto fl = nn::mlp_forward(a.lead_spec(), p.subspan(sl.l_off, sl.l_n), x);

    E2EDecision dec;
    dec.d_pred = fd.out;
    dec.l_pred = fl.out;

    std::vector<double> head_in;
    head_in.reserve(fd.last_hidden.size() + fl.last_hidden.size() + (a.pil ? 0 : z.size()));
    head_in.insert(head_in.end(), fd.last_hidden.begin(), fd.last_hidden.end());
    head_in.insert(head_in.end(), fl.last_hidden.begin(), fl.last_hidden.end());
    if (!a.pil) head_in.insert(head_in.end(), z.begin(), z.end());
    auto fh = nn::mlp_forward(a.head_spec(), p.subspan(sl.h_off, sl.h_n), head_in);

    if (a.pil) {
        dec.s_target = fh.out[0];
        const auto poi = smoothed_poi(z, dec.d_pred, dec.l_pred[0], m.poi, m.cfg.K, m.cfg.Lbar);
        dec.poi0 = poi[0];
        dec.q = pos(dec.s_target - dec.poi0);
    } else {
        dec.q = softplus_d(fh.out[0]);
    }
    return dec;
}

namespace {

// ---- tape-side building blocks -------------------------------------------

// Marginal-cost loss with q on the tape and realized-demand windows as constants.
Var marginal_loss_tape(ad::Tape& /*tape*/, Var q, const State& z, std::span<const double> d,
                       int lead0, int v_next_off, int K, const CostParams& par) {
    const auto u = unmet_path(z, d);
    const int expiry = lead0 + K - 1;
    Var loss = q * 0.0;
    for (int s = lead0; s <= expiry; ++s) loss = loss + par.h * ad::relu(q - pos(u[s]));
    loss = loss + par.theta * ad::relu(q - pos(u[expiry]));
    const int hi_pi = std::min(v_next_off - 1, expiry);
    for (int s = lead0; s <= hi_pi; ++s) loss = loss + par.b * ad::relu(u[s] - q);
    return loss;
}

struct TapeOut {
    Var loss;
    LossParts parts;
};

TapeOut build_sample_loss(const E2EModel& m, const TrainingSample& s, const TrainConfig& tc,
                          const CostParams& par, ad::Tape& tape, std::vector<Var>& leaves) {
    const auto& a = m.arch;
    leaves.clear();
    leaves.reserve(m.params.size());
    for (double v : m.params) leaves.push_back(tape.leaf(v));
    std::span<const Var> p(leaves);
    const auto sl = slices(a);

    auto fd = nn::mlp_forward_c(a.demand_spec(), p.subspan(sl.d_off, sl.d_n), s.x);
    auto fl = nn::mlp_forward_c(a.lead_spec(), p.subspan(sl.l_off, sl.l_n), s.x);

    Var q{};
    Var poi0{};
    std::vector<Var> poi_hat;
    if (a.pil) {
        std::vector<Var> head_in = fd.last_hidden;
        head_in.insert(head_in.end(), fl.last_hidden.begin(), fl.last_hidden.end());
        auto fh = nn::mlp_forward_v(a.head_spec(), p.subspan(sl.h_off, sl.h_n), head_in);
        poi_hat = smoothed_poi_tape(tape, s.z, fd.out, fl.out[0], m.poi, m.cfg.K, m.cfg.Lbar);
        poi0 = poi_hat[0];
        q = ad::relu(fh.out[0] - poi0);
    } else {
        std::vector<Var> head_in = fd.last_hidden;
        head_in.insert(head_in.end(), fl.last_hidden.begin(), fl.last_hidden.end());
        for (double zv : s.z) head_in.push_back(tape.leaf(zv));
        auto fh = nn::mlp_forward_v(a.head_spec(), p.subspan(sl.h_off, sl.h_n), head_in);
        q = ad::softplus(fh.out[0]);
    }

    Var marginal =
        marginal_loss_tape(tape, q, s.z, s.d_future, s.lead0, s.v_next_off, m.cfg.K, par);

    // prediction regularizers
    Var d_mse = q * 0.0;
    for (int i = 0; i < a.d_window; ++i) d_mse = d_mse + ad::square(fd.out[i] - s.d_future[i]);
    d_mse = d_mse / static_cast<double>(a.d_window);
    Var l_mse = (ad::square(fl.out[0] - static_cast<double>(s.lead0)) +
                 ad::square(fl.out[1] - static_cast<double>(s.lead1))) /
                2.0;

    Var loss = marginal + tc.lambda_D * d_mse + tc.lambda_L * l_mse;

    LossParts parts;
    parts.marginal = marginal.val();
    parts.d_mse = d_mse.val();
    parts.l_mse = l_mse.val();

    if (a.pil) {
        const auto target = exact_poi(s.z, s.d_future, s.lead0, m.cfg.K);
        Var poi1 = ad::square(poi0 - target[0]);
        Var poi2 = q * 0.0;
        for (int i = 1; i < m.cfg.K; ++i) poi2 = poi2 + ad::square(poi_hat[i] - target[i]);
        loss = loss + tc.lambda_poi1 * poi1 + tc.lambda_poi2 * poi2;
        parts.poi1 = poi1.val();
        parts.poi2 = poi2.val();
    }
    parts.total = loss.val();
    return {loss, parts};
}

}  // namespace

LossParts e2e_loss_value(const E2EModel& m, const TrainingSample& s, const TrainConfig& tc,
                         const CostParams& par) {
    const auto dec = e2e_forward(m, s.x, s.z);
    LossParts parts;
    MarginalWindow win;
    win.lead = s.lead0;
    win.v_next_off = s.v_next_off;
    parts.marginal = marginal_costs(dec.q, s.z, s.d_future, win, m.cfg.K, par).loss();
    double dm = 0.0;
    for (int i = 0; i < m.arch.d_window; ++i) {
        const double e = dec.d_pred[i] - s.d_future[i];
        dm += e * e;
    }
    parts.d_mse = dm / m.arch.d_window;
    const double e0 = dec.l_pred[0] - s.lead0, e1 = dec.l_pred[1] - s.lead1;
    parts.l_mse = (e0 * e0 + e1 * e1) / 2.0;
    parts.total = parts.marginal + tc.lambda_D * parts.d_mse + tc.lambda_L * parts.l_mse;
    if (m.arch.pil) {
        const auto poi_hat = smoothed_poi(s.z, dec.d_pred, dec.l_pred[0], m.poi, m.cfg.K,
                                          m.cfg.Lbar);
        const auto target = exact_poi(s.z, s.d_future, s.lead0, m.cfg.K);
        const double p1 = (poi_hat[0] - target[0]) * (poi_hat[0] - target[0]);
        double p2 = 0.0;
        for (int i = 1; i < m.cfg.K; ++i)
            p2 += (poi_hat[i] - target[i]) * (poi_hat[i] - target[i]);
        parts.poi1 = p1;
        parts.poi2 = p2;
        parts.total += tc.lambda_poi1 * p1 + tc.lambda_poi2 * p2;
    }
    return parts;
}

LossParts e2e_loss_grad(const E2EModel& m, const TrainingSample& s, const TrainConfig& tc,
                        const CostParams& par, ad::Tape& tape, std::span<double> grad) {
    tape.clear();
    std::vector<Var> leaves;
    auto out = build_sample_loss(m, s, tc, par, tape, leaves);
    tape.backward(out.loss);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += tape.grad(leaves[i]);
    return out.parts;
}

E2EModel train_e2e(const std::vector<TrainingSample>& samples, E2EArch arch,
                   const SystemConfig& cfg, const CostParams& par, const PoiConfig& poi,
                   const TrainConfig& tc) {
    if (samples.empty()) throw std::invalid_argument("train_e2e: no samples");
    arch.x_dim = static_cast<int>(samples.front().x.size());
    arch.z_dim = cfg.state_dim();
    arch.d_window = cfg.K + cfg.Lbar;

    E2EModel m;
    m.arch = arch;
    m.cfg = cfg;
    m.poi = poi;
    Rng rng(derive_seed(tc.seed, 0xe2e));
    m.init(rng);

    nn::AdamState opt(tc.adam);
    const std::size_t np = m.params.size();
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::ofstream log;
    if (!tc.log_csv.empty()) {
        log.open(tc.log_csv);
        log << "epoch,total,marginal,d_mse,l_mse,poi1,poi2\n";
    }

    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        // Fisher-Yates with our engine: shuffling must not depend on the platform
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        LossParts epoch_parts;
        std::size_t seen = 0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += tc.batch) {
            const std::size_t bn = std::min<std::size_t>(tc.batch, order.size() - b0);
            const std::size_t nblocks = (bn + tc.grad_block - 1) / tc.grad_block;
            std::vector<std::vector<double>> gblk(nblocks);
            std::vector<LossParts> pblk(nblocks);
            par::parallel_for(nblocks, [&](std::size_t bi) {
                auto& g = gblk[bi];
                g.assign(np, 0.0);
                ad::Tape tape;
                const std::size_t lo = b0 + bi * tc.grad_block;
                const std::size_t hi = std::min(b0 + bn, lo + tc.grad_block);
                for (std::size_t k = lo; k < hi; ++k) {
                    const auto parts = e2e_loss_grad(m, samples[order[k]], tc, par, tape, g);
                    pblk[bi].total += parts.total;
                    pblk[bi].marginal += parts.marginal;
                    pblk[bi].d_mse += parts.d_mse;
                    pblk[bi].l_mse += parts.l_mse;
                    pblk[bi].poi1 += parts.poi1;
                    pblk[bi].poi2 += parts.poi2;
                }
            });
            std::vector<double> grad(np, 0.0);
            for (std::size_t bi = 0; bi < nblocks; ++bi)
                for (std::size_t i = 0; i < np; ++i) grad[i] += gblk[bi][i];
            const double inv = 1.0 / static_cast<double>(bn);
            for (double& g : grad) g *= inv;
            for (const auto& pp : pblk) {
                epoch_parts.total += pp.total;
                epoch_parts.marginal += pp.marginal;
                epoch_parts.d_mse += pp.d_mse;
                epoch_parts.l_mse += pp.l_mse;
                epoch_parts.poi1 += pp.poi1;
                epoch_parts.poi2 += pp.poi2;
            }
            seen += bn;
            if (!std::isfinite(epoch_parts.total))
                throw std::runtime_error("train_e2e: training diverged (non-finite loss)");
            nn::adam_step(opt, m.params, grad, epoch);
        }
        if (log.is_open()) {
            const double inv = 1.0 / static_cast<double>(seen);
            log << epoch << ',' << epoch_parts.total * inv << ',' << epoch_parts.marginal * inv
                << ',' << epoch_parts.d_mse * inv << ',' << epoch_parts.l_mse * inv << ','
                << epoch_parts.poi1 * inv << ',' << epoch_parts.poi2 * inv << '\n';
        }
        if (tc.on_epoch) tc.on_epoch(epoch, m);
    }
    return m;
}

ProductPolicyFactory e2e_policy_factory(const E2EModel& m, const DatasetContext& ctx,
                                        double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("e2e_policy_factory: gamma > 0 required");
    return [&m, &ctx, gamma](int product, int /*r*/) -> PolicyFn {
        return [&m, &ctx, product, gamma](int t, const State& z) {
            if (!features_available(ctx, t)) return 0.0;
            const auto x = build_features(ctx, product, t);
            return gamma * e2e_forward(m, x, z).q;
        };
    };
}

std::vector<double> BoostConfig::grid() const {
    std::vector<double> g;
    for (double v = lo; v <= hi + 1e-9; v += step) g.push_back(v);
    return g;
}

BoostResult boost_gamma(const E2EModel& m, const DatasetContext& ctx, const BoostConfig& bc) {
    BoostResult res;
    const auto grid = bc.grid();
    if (grid.empty()) throw std::invalid_argument("boost_gamma: empty grid");
    double best = 1e300;
    for (double g : grid) {
        const auto rep = evaluate_policy_window(ctx, e2e_policy_factory(m, ctx, g), "boost",
                                                1, ctx.cfg.T_in);
        res.curve.emplace_back(g, rep.avg.total);
        if (std::fabs(g - 1.0) < 1e-12) res.cost_at_one = rep.avg.total;
        if (rep.avg.total < best - 1e-15) {  // ties resolve to the smallest gamma
            best = rep.avg.total;
            res.gamma = g;
            res.cost_at_gamma = rep.avg.total;
        }
    }
    return res;
}

GradCheck grad_check_one(const E2EModel& m, const TrainingSample& s, const TrainConfig& tc,
                         const CostParams& par, int param_idx, double fd_h) {
    GradCheck gc;
    ad::Tape tape;
    std::vector<double> grad(m.params.size(), 0.0);
    e2e_loss_grad(m, s, tc, par, tape, grad);
    gc.analytic = grad[param_idx];
    gc.kink_margin = tape.kink_margin();

    E2EModel mp = m;
    mp.params[param_idx] += fd_h;
    const double fp = e2e_loss_value(mp, s, tc, par).total;
    mp.params[param_idx] = m.params[param_idx] - fd_h;
    const double fm = e2e_loss_value(mp, s, tc, par).total;
    gc.numeric = (fp - fm) / (2.0 * fd_h);
    const double scale = std::max({std::fabs(gc.analytic), std::fabs(gc.numeric), 1e-8});
    gc.rel_err = std::fabs(gc.analytic - gc.numeric) / scale;
    return gc;
}

TrainingSample make_random_sample(Rng& rng, const SystemConfig& cfg, int x_dim) {
    TrainingSample s;
    s.product = 0;
    s.t = 1;
    s.r = 1;
    s.x.resize(x_dim);
    for (double& v : s.x) v = rng.uniform(0.0, 3.0);
    s.z.assign(cfg.state_dim(), 0.0);
    for (int i = 0; i < cfg.state_dim(); ++i) s.z[i] = rng.uniform(0.0, 4.0);
    s.z[cfg.K - 1] = rng.uniform(-3.0, 4.0);  // slot K may carry backorder
    s.d_future.resize(cfg.K + cfg.Lbar);
    for (double& v : s.d_future) v = rng.uniform(0.0, 5.0);
    s.lead0 = rng.uniform_int(1, cfg.Lbar);
    s.lead1 = rng.uniform_int(1, cfg.Lbar);
    s.v_next_off = std::max(cfg.R + s.lead1, s.lead0);
    return s;
}

void save_checkpoint(const E2EModel& m, const std::string& path) {
    json j;
    j["arch"] = {{"x_dim", m.arch.x_dim},      {"z_dim", m.arch.z_dim},
                 {"d_window", m.arch.d_window}, {"hid_demand", m.arch.hid_demand},
                 {"hid_lead", m.arch.hid_lead}, {"hid_order", m.arch.hid_order},
                 {"pil", m.arch.pil}};
    j["system"] = {{"K", m.cfg.K},     {"Lbar", m.cfg.Lbar}, {"R", m.cfg.R},
                   {"T", m.cfg.T},     {"T_in", m.cfg.T_in}, {"T_out", m.cfg.T_out}};
    j["poi_w"] = m.poi.w;
    const auto sl = slices(m.arch);
    j["params"]["demand"] =
        std::vector<double>(m.params.begin() + sl.d_off, m.params.begin() + sl.d_off + sl.d_n);
    j["params"]["lead"] =
        std::vector<double>(m.params.begin() + sl.l_off, m.params.begin() + sl.l_off + sl.l_n);
    j["params"]["head"] =
        std::vector<double>(m.params.begin() + sl.h_off, m.params.begin() + sl.h_off + sl.h_n);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os << j.dump(2) << '\n';
}

E2EModel load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    json j;
    is >> j;
    E2EModel m;
    const auto& a = j.at("arch");
    m.arch.x_dim = a.at("x_dim");
    m.arch.z_dim = a.at("z_dim");
    m.arch.d_window = a.at("d_window");
    m.arch.hid_demand = a.at("hid_demand");
    m.arch.hid_lead = a.at("hid_lead");
    m.arch.hid_order = a.at("hid_order");
    m.arch.pil = a.at("pil");
    const auto& s = j.at("system");
    m.cfg.K = s.at("K");
    m.cfg.Lbar = s.at("Lbar");
    m.cfg.R = s.at("R");
    m.cfg.T = s.at("T");
    m.cfg.T_in = s.at("T_in");
    m.cfg.T_out = s.at("T_out");
    m.poi.w = j.at("poi_w");
    const auto d = j.at("params").at("demand").get<std::vector<double>>();
    const auto l = j.at("params").at("lead").get<std::vector<double>>();
    const auto h = j.at("params").at("head").get<std::vector<double>>();
    m.params = d;
    m.params.insert(m.params.end(), l.begin(), l.end());
    m.params.insert(m.params.end(), h.begin(), h.end());
    if (static_cast<int>(m.params.size()) != m.arch.param_count())
        throw std::runtime_error("load_checkpoint: parameter count mismatch");
    return m;
}

}  // namespace pilab
