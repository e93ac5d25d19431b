#include "pilab/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace pilab::nn {

int MlpSpec::param_count() const {
    if (widths.size() < 2) throw std::invalid_argument("MlpSpec: need at least in/out widths");
    int n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        n += widths[l] * widths[l + 1] + widths[l + 1];
    return n;
}

void init_params(const MlpSpec& spec, std::span<double> params, Rng& rng) {
    if (static_cast<int>(params.size()) != spec.param_count())
        throw std::invalid_argument("init_params: size mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const int fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
        const double sd = std::sqrt(2.0 / fan_in);  // He init for the ReLU stack
        for (int i = 0; i < fan_in * fan_out; ++i) params[k++] = sd * rng.normal();
        for (int i = 0; i < fan_out; ++i) params[k++] = 0.0;
    }
}

ForwardD mlp_forward(const MlpSpec& spec, std::span<const double> params,
                     std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.widths[0])
        throw std::invalid_argument("mlp_forward: input dimension mismatch");
    if (static_cast<int>(params.size()) != spec.param_count())
        throw std::invalid_argument("mlp_forward: param count mismatch");
    std::vector<double> cur(x.begin(), x.end());
    ForwardD res;
    std::size_t k = 0;
    const std::size_t layers = spec.widths.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = spec.widths[l], out = spec.widths[l + 1];
        std::vector<double> nxt(out);
        const double* w = params.data() + k;
        const double* b = params.data() + k + static_cast<std::size_t>(in) * out;
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            const double* wrow = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += wrow[i] * cur[i];
            nxt[o] = (l + 1 < layers && s < 0.0) ? 0.0 : s;
        }
        k += static_cast<std::size_t>(in) * out + out;
        if (l + 1 == layers) {
            res.out = std::move(nxt);
        } else {
            if (l + 2 == layers) res.last_hidden = nxt;
            cur = std::move(nxt);
        }
    }
    return res;
}

namespace {

template <typename DotFirst>
ForwardV forward_tape(const MlpSpec& spec, std::span<const ad::Var> params, DotFirst dot_first) {
    if (static_cast<int>(params.size()) != spec.param_count())
        throw std::invalid_argument("mlp_forward: param count mismatch");
    ForwardV res;
    std::vector<ad::Var> cur;
    std::size_t k = 0;
    const std::size_t layers = spec.widths.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = spec.widths[l], out = spec.widths[l + 1];
        std::vector<ad::Var> nxt;
        nxt.reserve(out);
        auto wbase = params.subspan(k, static_cast<std::size_t>(in) * out);
        auto bias = params.subspan(k + static_cast<std::size_t>(in) * out, out);
        for (int o = 0; o < out; ++o) {
            auto wrow = wbase.subspan(static_cast<std::size_t>(o) * in, in);
            ad::Var s = (l == 0) ? dot_first(wrow, bias[o])
                                 : ad::dot(wrow, std::span<const ad::Var>(cur), bias[o]);
            nxt.push_back(l + 1 < layers ? ad::relu(s) : s);
        }
        k += static_cast<std::size_t>(in) * out + out;
        if (l + 1 == layers) {
            res.out = std::move(nxt);
        } else {
            if (l + 2 == layers) res.last_hidden = nxt;
            cur = std::move(nxt);
        }
    }
    return res;
}

}  // namespace

ForwardV mlp_forward_c(const MlpSpec& spec, std::span<const ad::Var> params,
                       std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.widths[0])
        throw std::invalid_argument("mlp_forward_c: input dimension mismatch");
    return forward_tape(spec, params, [&](std::span<const ad::Var> wrow, ad::Var b) {
        return ad::dot_const(wrow, x, b);
    });
}

ForwardV mlp_forward_v(const MlpSpec& spec, std::span<const ad::Var> params,
                       std::span<const ad::Var> x) {
    if (static_cast<int>(x.size()) != spec.widths[0])
        throw std::invalid_argument("mlp_forward_v: input dimension mismatch");
    return forward_tape(spec, params, [&](std::span<const ad::Var> wrow, ad::Var b) {
        return ad::dot(wrow, x, b);
    });
}

double AdamState::lr_at_epoch(int epoch) const {
    double lr = cfg.lr;
    if (cfg.decay_step > 0 && cfg.decay_rate != 1.0) {
        lr *= std::pow(cfg.decay_rate, static_cast<double>(epoch / cfg.decay_step));
    }
    return lr;
}

void adam_step(AdamState& st, std::span<double> params, std::span<const double> grads,
               int epoch) {
    if (params.size() != grads.size()) throw std::invalid_argument("adam_step: size mismatch");
    if (st.m.empty()) {
        st.m.assign(params.size(), 0.0);
        st.v.assign(params.size(), 0.0);
    }
    if (st.m.size() != params.size()) throw std::invalid_argument("adam_step: moment size mismatch");
    st.step += 1;
    const auto& c = st.cfg;
    const double lr = st.lr_at_epoch(epoch);
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i] + c.weight_decay * params[i];
        st.m[i] = c.beta1 * st.m[i] + (1.0 - c.beta1) * g;
        st.v[i] = c.beta2 * st.v[i] + (1.0 - c.beta2) * g * g;
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

}  // namespace pilab::nn
