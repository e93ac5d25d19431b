#include "pilab/poi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pilab/marginal.hpp"

namespace pilab {

std::vector<double> exact_poi(const State& z, std::span<const double> d, int lead, int K) {
    if (lead < 1) throw std::invalid_argument("exact_poi: lead >= 1 required");
    const int need = lead + K - 1;  // D and B are consumed up to offset lead+K-2
    if (static_cast<int>(d.size()) < need)
        throw std::invalid_argument("exact_poi: demand window too short");

    // prefix demand and B along offsets 0..need-1
    std::vector<double> cum_d(need, 0.0), b(need, 0.0);
    double cz = 0.0, cd = 0.0, bp = 0.0;
    for (int s = 0; s < need; ++s) {
        cd += d[s];
        cum_d[s] = cd;
        if (s < static_cast<int>(z.size())) cz += z[s];
        bp = std::max(cz - cd, bp);
        b[s] = bp;
    }

    const double tot = state_total(z);
    std::vector<double> poi(K);
    for (int sp = 0; sp < K; ++sp) {
        const int prev = lead + sp - 1;  // offset of v_m + sp - 1, within 0..need-1
        poi[sp] = tot - cum_d[prev] - b[prev];
    }
    return poi;
}

std::vector<double> kernel_smooth(std::span<const double> candidates, double lead, double w,
                                  int K) {
    if (w <= 0.0) throw std::invalid_argument("kernel_smooth: w > 0 required");
    const int win = static_cast<int>(candidates.size());
    std::vector<double> out(K, 0.0);
    for (int sp = 0; sp < K; ++sp) {
        // log-sum-exp shift keeps the normalized weights well conditioned at tiny w
        double emax = -1e300;
        std::vector<double> e(win);
        for (int i = 0; i < win; ++i) {
            const double dd = lead + sp - i;
            e[i] = -dd * dd / w;
            emax = std::max(emax, e[i]);
        }
        double norm = 0.0, acc = 0.0;
        for (int i = 0; i < win; ++i) {
            const double k = std::exp(e[i] - emax);
            norm += k;
            acc += k * candidates[i];
        }
        if (norm <= 0.0) throw std::runtime_error("kernel_smooth: all kernel weights vanished");
        out[sp] = acc / norm;
    }
    return out;
}

std::vector<double> smoothed_poi(const State& z, std::span<const double> d_pred,
                                 double lead_pred, const PoiConfig& pc, int K, int Lbar) {
    pc.validate();
    const int w = K + Lbar;
    if (static_cast<int>(d_pred.size()) < w)
        throw std::invalid_argument("smoothed_poi: prediction window must cover K+Lbar offsets");
    if (!std::isfinite(lead_pred)) throw std::invalid_argument("smoothed_poi: lead not finite");
    const double L = std::clamp(lead_pred, 1.0, static_cast<double>(Lbar));

    const auto u = unmet_path(z, d_pred.first(w));
    std::vector<double> cand(w);
    for (int i = 0; i < w; ++i) cand[i] = d_pred[i] - u[i];
    return kernel_smooth(cand, L, pc.w, K);
}

std::vector<ad::Var> smoothed_poi_tape(ad::Tape& /*tape*/, const State& z,
                                       std::span<const ad::Var> d_pred, ad::Var lead_pred,
                                       const PoiConfig& pc, int K, int Lbar) {
    using ad::Var;
    pc.validate();
    const int win = K + Lbar;
    if (static_cast<int>(d_pred.size()) < win)
        throw std::invalid_argument("smoothed_poi_tape: prediction window too short");

    // clamp lead into [1, Lbar]
    Var lc = lead_pred + ad::relu(1.0 - lead_pred);
    lc = lc - ad::relu(lc - static_cast<double>(Lbar));

    // unmet-demand recursion on the predicted demands; the state is constant
    const double tot = state_total(z);
    std::vector<Var> cand;
    cand.reserve(win);
    Var cum = d_pred[0] * 0.0;
    Var b_prev = cum;  // B_{-1} = 0
    double cz = 0.0;
    for (int s = 0; s < win; ++s) {
        cum = cum + d_pred[s];
        Var u = cum - tot + b_prev;
        cand.push_back(d_pred[s] - u);
        if (s < static_cast<int>(z.size())) cz += z[s];
        b_prev = b_prev + ad::relu((cz - cum) - b_prev);  // running max
    }

    std::vector<Var> poi;
    poi.reserve(K);
    std::vector<Var> ks(win, Var{});
    for (int sp = 0; sp < K; ++sp) {
        // exponents -(lc + sp - i)^2 / w with a value-detached stabilizing shift:
        // the normalized ratio (and so the gradient) is unchanged by the shift
        double emax = -1e300;
        std::vector<Var> es;
        es.reserve(win);
        for (int i = 0; i < win; ++i) {
            Var d = lc + static_cast<double>(sp - i);
            Var e = ad::square(d) * (-1.0 / pc.w);
            es.push_back(e);
            emax = std::max(emax, e.val());
        }
        for (int i = 0; i < win; ++i) ks[i] = ad::exp(es[i] - emax);
        Var norm = ad::sum(ks);
        Var acc = ad::dot(ks, cand, norm * 0.0);
        poi.push_back(acc / norm);
    }
    return poi;
}

}  // namespace pilab
