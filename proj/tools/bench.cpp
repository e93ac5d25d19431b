// Serial vs OpenMP timing for the batch kernels: dataset generation, policy
// evaluation rollouts, training-batch gradients, and Monte-Carlo risk.

#include <chrono>
#include <cstdio>
#include <functional>

#include "pilab/datagen.hpp"
#include "pilab/e2e.hpp"
#include "pilab/parallel.hpp"
#include "pilab/pipeline.hpp"
#include "pilab/theory.hpp"

using namespace pilab;

namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void row(const char* name, const std::function<void()>& fn) {
    par::set_enabled(false);
    fn();  // warm up
    const double serial = time_ms(fn);
    par::set_enabled(true);
    const double parallel = time_ms(fn);
    std::printf("%-28s serial %9.1f ms   openmp %9.1f ms   speedup %.2fx\n", name, serial,
                parallel, serial / parallel);
}

}  // namespace

int main() {
    std::printf("pilab kernel benchmark (%d threads available)\n", par::max_threads());

    GenConfig g;
    g.kind = GenKind::SCR;
    g.I = 20;
    g.J = 10;
    g.seed = 5;
    row("datagen SCR 200 products", [&] { gen_instance(g, 0); });

    auto set = gen_instance(g, 0);
    SystemConfig cfg;
    CostParams par;
    auto ctx = make_context(set, cfg, par);
    row("benchmark policy eval", [&] {
        evaluate_policy(ctx, benchmark_policy_factory(ctx), "benchmark");
    });

    auto samples = build_samples(ctx);
    presample_states(ctx, samples, benchmark_policy_factory(ctx));
    samples.resize(1024);
    E2EArch arch;
    arch.pil = true;
    TrainConfig tc;
    tc.epochs = 1;
    row("E2E-PIL 1 epoch / 1k samples", [&] {
        train_e2e(samples, arch, cfg, par, PoiConfig{}, tc);
    });

    theory::NewsvendorWorld w;
    const int n_grid[] = {50};
    row("theory 32 ERM seeds", [&] {
        theory::ErmOptions opt;
        opt.max_iters = 4000;
        theory::excess_risk_experiment(w, 2, n_grid, 32, 20000, 1, opt);
    });
    return 0;
}
