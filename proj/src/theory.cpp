#include "pilab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pilab/parallel.hpp"
#include "pilab/stats.hpp"

namespace pilab::theory {

double NewsvendorWorld::noise_quantile(double p) const {
    const double a = stats::norm_cdf(noise_lo / noise_sd);
    const double c = stats::norm_cdf(noise_hi / noise_sd);
    return noise_sd * stats::norm_inv_cdf(a + p * (c - a));
}

double NewsvendorWorld::sample_noise(Rng& rng) const {
    double u = rng.uniform();
    u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
    return noise_quantile(u);
}

double NewsvendorWorld::loss(double f, double z, double d) const {
    const double y = f + z;  // order-up-to level
    return b * std::max(d - y, 0.0) + h * std::max(y - d, 0.0);
}

std::vector<DataPoint> sample_world(const NewsvendorWorld& w, int n, Rng& rng) {
    std::vector<DataPoint> out(n);
    for (auto& p : out) {
        p.x = rng.uniform();
        p.z = rng.uniform(0.0, w.Dbar);
        p.d = w.f_mean(p.x) + w.sample_noise(rng);
    }
    return out;
}

std::vector<std::pair<int, int>> monomials(int degree) {
    std::vector<std::pair<int, int>> m;
    for (int d = 0; d <= degree; ++d)
        for (int i = d; i >= 0; --i) m.emplace_back(i, d - i);
    return m;
}

namespace {

double powi(double x, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= x;
    return v;
}

void basis(const PolyHypothesis& f, double x, double z, std::vector<double>& phi) {
    if (f.constrained) {
        phi.resize(f.degree + 1);
        double v = 1.0;
        for (int k = 0; k <= f.degree; ++k) {
            phi[k] = v;
            v *= x;
        }
    } else {
        const auto mono = monomials(f.degree);
        phi.resize(mono.size());
        for (std::size_t k = 0; k < mono.size(); ++k)
            phi[k] = powi(x, mono[k].first) * powi(z, mono[k].second);
    }
}

}  // namespace

double PolyHypothesis::eval_raw(double x, double z) const {
    double v = 0.0;
    if (constrained) {
        double xp = 1.0;
        for (int k = 0; k <= degree; ++k) {
            v += coef[k] * xp;
            xp *= x;
        }
        v -= z;
    } else {
        const auto mono = monomials(degree);
        for (std::size_t k = 0; k < mono.size(); ++k)
            v += coef[k] * powi(x, mono[k].first) * powi(z, mono[k].second);
    }
    return v;
}

double PolyHypothesis::eval(double x, double z) const {
    return std::clamp(eval_raw(x, z), -clip, clip);
}

double empirical_risk(const PolyHypothesis& f, std::span<const DataPoint> data,
                      const NewsvendorWorld& w) {
    if (data.empty()) throw std::invalid_argument("empirical_risk: no data");
    double s = 0.0;
    for (const auto& p : data) s += w.loss(f.eval(p.x, p.z), p.z, p.d);
    return s / static_cast<double>(data.size());
}

double population_risk(const PolyHypothesis& f, std::span<const DataPoint> test,
                       const NewsvendorWorld& w) {
    return empirical_risk(f, test, w);
}

double optimal_risk(std::span<const DataPoint> test, const NewsvendorWorld& w) {
    if (test.empty()) throw std::invalid_argument("optimal_risk: no data");
    const double off = w.optimal_offset();
    double s = 0.0;
    for (const auto& p : test) s += w.loss(w.f_mean(p.x) + off - p.z, p.z, p.d);
    return s / static_cast<double>(test.size());
}

namespace {

ErmResult erm(std::span<const DataPoint> data, int degree, bool constrained,
              const NewsvendorWorld& w, const ErmOptions& opt) {
    if (data.empty()) throw std::invalid_argument("erm: empty data");
    PolyHypothesis f;
    f.degree = degree;
    f.constrained = constrained;
    f.clip = w.Q;
    const std::size_t p = constrained ? degree + 1 : monomials(degree).size();
    f.coef.assign(p, 0.0);
    if (data.size() <= p)
        throw std::invalid_argument("erm: need more samples than coefficients");

    // cache basis rows
    std::vector<std::vector<double>> phi(data.size());
    {
        std::vector<double> row;
        for (std::size_t k = 0; k < data.size(); ++k) {
            basis(f, data[k].x, data[k].z, row);
            phi[k] = row;
        }
    }

    std::vector<double> theta(p, 0.0), avg(p, 0.0), g(p);
    double sumw = 0.0;
    PolyHypothesis favg = f;
    double best = 1e300;
    std::vector<double> best_coef(p, 0.0);
    int stale = 0;
    int t = 0;
    for (t = 1; t <= opt.max_iters; ++t) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t k = 0; k < data.size(); ++k) {
            double v = -data[k].z;
            if (constrained) {
                v = -data[k].z;
                for (std::size_t i = 0; i < p; ++i) v += theta[i] * phi[k][i];
            } else {
                v = 0.0;
                for (std::size_t i = 0; i < p; ++i) v += theta[i] * phi[k][i];
            }
            const double y = v + data[k].z;
            double s = 0.0;
            if (data[k].d > y)
                s = -w.b;
            else if (data[k].d < y)
                s = w.h;
            if (s != 0.0)
                for (std::size_t i = 0; i < p; ++i) g[i] += s * phi[k][i];
        }
        double gn = 0.0;
        for (double gv : g) gn += gv * gv;
        gn = std::sqrt(gn) / static_cast<double>(data.size());
        if (gn < 1e-14) break;
        const double eta = opt.step0 / (std::sqrt(static_cast<double>(t)) * gn *
                                        static_cast<double>(data.size()));
        for (std::size_t i = 0; i < p; ++i) theta[i] -= eta * g[i];

        // weight-t iterate averaging
        sumw += t;
        const double wfrac = static_cast<double>(t) / sumw;
        for (std::size_t i = 0; i < p; ++i) avg[i] += wfrac * (theta[i] - avg[i]);

        if (t % opt.check_every == 0) {
            favg.coef = avg;
            const double r = empirical_risk(favg, data, w);
            if (r < best - opt.tol * (1.0 + best)) {
                best = r;
                best_coef = avg;
                stale = 0;
            } else if (++stale >= opt.patience) {
                break;
            }
        }
    }
    ErmResult res;
    res.f = f;
    res.f.coef = best < 1e300 ? best_coef : avg;
    res.emp_risk = empirical_risk(res.f, data, w);
    res.iters = std::min(t, opt.max_iters);
    res.converged = t < opt.max_iters;
    return res;
}

}  // namespace

ErmResult erm_full(std::span<const DataPoint> data, int degree, const NewsvendorWorld& w,
                   const ErmOptions& opt) {
    return erm(data, degree, false, w, opt);
}

ErmResult erm_constrained(std::span<const DataPoint> data, int degree, const NewsvendorWorld& w,
                          const ErmOptions& opt) {
    return erm(data, degree, true, w, opt);
}

RiskCurves excess_risk_experiment(const NewsvendorWorld& w, int degree,
                                  std::span<const int> n_grid, int n_seeds, int m_test,
                                  uint64_t seed, const ErmOptions& opt) {
    if (n_seeds < 1) throw std::invalid_argument("excess_risk_experiment: n_seeds >= 1");
    RiskCurves curves;
    curves.degree = degree;
    curves.sample_ratio = 2.0 / (2.0 + degree);

    Rng test_rng(derive_seed(seed, 0x7e57));
    const auto test = sample_world(w, m_test, test_rng);
    curves.optimal = optimal_risk(test, w);

    for (int n : n_grid) {
        RiskPoint pt;
        pt.n = n;
        pt.full_risks.assign(n_seeds, 0.0);
        pt.cons_risks.assign(n_seeds, 0.0);
        par::parallel_for(static_cast<std::size_t>(n_seeds), [&](std::size_t si) {
            Rng rng(derive_seed(seed, 0xda7a, static_cast<uint64_t>(n), si));
            const auto data = sample_world(w, n, rng);
            const auto ff = erm_full(data, degree, w, opt);
            const auto fc = erm_constrained(data, degree, w, opt);
            pt.full_risks[si] = population_risk(ff.f, test, w);
            pt.cons_risks[si] = population_risk(fc.f, test, w);
        });
        pt.full_mean = stats::mean(pt.full_risks);
        pt.cons_mean = stats::mean(pt.cons_risks);
        pt.full_sd = n_seeds > 1 ? stats::stddev(pt.full_risks) : 0.0;
        pt.cons_sd = n_seeds > 1 ? stats::stddev(pt.cons_risks) : 0.0;
        curves.points.push_back(std::move(pt));
    }
    return curves;
}

void write_curves_csv(const RiskCurves& c, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_curves_csv: cannot open " + path);
    os << "# optimal_risk=" << c.optimal << " degree=" << c.degree
       << " pseudo_dim_sample_ratio=" << c.sample_ratio << "\n";
    os << "n,class,mean_risk,sd_risk,mean_excess\n";
    os.precision(10);
    for (const auto& p : c.points) {
        os << p.n << ",full," << p.full_mean << ',' << p.full_sd << ','
           << p.full_mean - c.optimal << '\n';
        os << p.n << ",constrained," << p.cons_mean << ',' << p.cons_sd << ','
           << p.cons_mean - c.optimal << '\n';
    }
}

}  // namespace pilab::theory
