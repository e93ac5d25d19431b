#include <doctest.h>

#include <cmath>

#include "pilab/nn.hpp"

using namespace pilab;
using nn::MlpSpec;

TEST_CASE("single linear layer: identity weights pass the input through") {
    MlpSpec spec{{3, 3}};
    std::vector<double> p(spec.param_count(), 0.0);
    // W = I, b = 0
    for (int i = 0; i < 3; ++i) p[i * 3 + i] = 1.0;
    auto out = nn::mlp_forward(spec, p, std::vector<double>{1.5, -2.0, 0.25});
    CHECK(out.out == std::vector<double>{1.5, -2.0, 0.25});  // linear output, no relu
    CHECK(out.last_hidden.empty());
}

TEST_CASE("zero weights return the bias") {
    MlpSpec spec{{2, 2}};
    std::vector<double> p(spec.param_count(), 0.0);
    p[4] = 0.7;
    p[5] = -0.3;
    auto out = nn::mlp_forward(spec, p, std::vector<double>{3.0, 4.0});
    CHECK(out.out[0] == doctest::Approx(0.7));
    CHECK(out.out[1] == doctest::Approx(-0.3));
}

TEST_CASE("golden forward value, pinned") {
    MlpSpec spec{{4, 5, 2}};
    std::vector<double> p(spec.param_count());
    Rng rng(12345);
    nn::init_params(spec, p, rng);
    auto out = nn::mlp_forward(spec, p, std::vector<double>{0.5, -1.0, 2.0, 0.0});
    // pinned from the first run of this deterministic configuration
    CHECK(out.out[0] == doctest::Approx(-0.76349934742717215).epsilon(1e-12));
    CHECK(out.out[1] == doctest::Approx(1.2886386845384362).epsilon(1e-12));
}

TEST_CASE("tape forward equals double forward, gradients match FD") {
    MlpSpec spec{{3, 6, 4, 2}};
    std::vector<double> p(spec.param_count());
    Rng rng(99);
    nn::init_params(spec, p, rng);
    std::vector<double> x{0.3, -0.4, 1.1};

    auto fd_path = [&](std::vector<double> params) {
        return nn::mlp_forward(spec, params, x).out[0];
    };

    ad::Tape tape;
    std::vector<ad::Var> pv;
    for (double v : p) pv.push_back(tape.leaf(v));
    auto out = nn::mlp_forward_c(spec, pv, x);
    CHECK(out.out[0].val() == doctest::Approx(fd_path(p)).epsilon(1e-13));
    CHECK(static_cast<int>(out.last_hidden.size()) == 4);
    tape.backward(out.out[0]);

    Rng pick(7);
    for (int c = 0; c < 25; ++c) {
        const int i = pick.uniform_int(0, static_cast<int>(p.size()) - 1);
        auto pp = p;
        const double h = 1e-6;
        pp[i] = p[i] + h;
        const double up = fd_path(pp);
        pp[i] = p[i] - h;
        const double dn = fd_path(pp);
        const double fd = (up - dn) / (2 * h);
        CHECK(std::fabs(tape.grad(pv[i]) - fd) <=
              1e-4 * std::max({1.0, std::fabs(fd), std::fabs(tape.grad(pv[i]))}));
    }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    nn::AdamState st(nn::AdamConfig{0.01, 0.9, 0.999, 1e-8, 0.0, 1.0, 0});
    std::vector<double> p{1.0, -2.0}, g{0.0, 0.0};
    nn::adam_step(st, p, g, 0);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(-2.0));
}

TEST_CASE("adam: first step moves by ~lr in the sign direction") {
    nn::AdamState st(nn::AdamConfig{0.05, 0.9, 0.999, 1e-8, 0.0, 1.0, 0});
    std::vector<double> p{0.0, 0.0}, g{3.0, -0.2};
    nn::adam_step(st, p, g, 0);
    CHECK(p[0] == doctest::Approx(-0.05).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("adam: step-decayed learning rate") {
    nn::AdamState st(nn::AdamConfig{0.1, 0.9, 0.999, 1e-8, 0.0, 0.8, 5});
    CHECK(st.lr_at_epoch(0) == doctest::Approx(0.1));
    CHECK(st.lr_at_epoch(4) == doctest::Approx(0.1));
    CHECK(st.lr_at_epoch(5) == doctest::Approx(0.08));
    CHECK(st.lr_at_epoch(10) == doctest::Approx(0.064));
}

TEST_CASE("adam: weight decay acts as an additive L2 gradient term") {
    nn::AdamState st(nn::AdamConfig{0.01, 0.9, 0.999, 1e-8, 0.5, 1.0, 0});
    std::vector<double> p{2.0}, g{0.0};
    nn::adam_step(st, p, g, 0);
    CHECK(p[0] < 2.0);  // decays toward zero even with zero loss gradient
}
