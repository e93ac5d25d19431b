#include "pilab/autodiff.hpp"

#include <functional>
#include <stdexcept>

namespace pilab::ad {

int Tape::push_start(double value) {
    vals_.push_back(value);
    arg_off_.push_back(static_cast<uint32_t>(arg_parent_.size()));
    return static_cast<int>(vals_.size()) - 1;
}

void Tape::push_arg(int parent, double partial) {
    arg_parent_.push_back(parent);
    arg_partial_.push_back(partial);
}

int Tape::push(double value, std::initializer_list<std::pair<int, double>> parents) {
    const int id = push_start(value);
    for (const auto& [p, d] : parents) push_arg(p, d);
    return id;
}

Var Tape::leaf(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("tape leaf: non-finite value");
    return Var{this, push_start(v)};
}

void Tape::clear() {
    vals_.clear();
    adj_.clear();
    arg_off_.clear();
    arg_parent_.clear();
    arg_partial_.clear();
    kink_margin_ = 1e300;
}

void Tape::backward(Var out) {
    if (out.tape != this) throw std::invalid_argument("backward: var from another tape");
    const int n = static_cast<int>(vals_.size());
    adj_.assign(n, 0.0);
    adj_[out.i] = 1.0;
    for (int i = n - 1; i >= 0; --i) {
        const double a = adj_[i];
        if (a == 0.0) continue;
        const uint32_t lo = arg_off_[i];
        const uint32_t hi = (i + 1 < n) ? arg_off_[i + 1] : static_cast<uint32_t>(arg_parent_.size());
        for (uint32_t k = lo; k < hi; ++k) adj_[arg_parent_[k]] += a * arg_partial_[k];
    }
}

namespace {
inline Tape* same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw std::invalid_argument("vars from different tapes");
    return a.tape;
}
}  // namespace

Var operator+(Var a, Var b) {
    Tape* t = same_tape(a, b);
    return {t, t->push(a.val() + b.val(), {{a.i, 1.0}, {b.i, 1.0}})};
}
Var operator-(Var a, Var b) {
    Tape* t = same_tape(a, b);
    return {t, t->push(a.val() - b.val(), {{a.i, 1.0}, {b.i, -1.0}})};
}
Var operator*(Var a, Var b) {
    Tape* t = same_tape(a, b);
    return {t, t->push(a.val() * b.val(), {{a.i, b.val()}, {b.i, a.val()}})};
}
Var operator/(Var a, Var b) {
    Tape* t = same_tape(a, b);
    const double bv = b.val();
    if (bv == 0.0) throw std::domain_error("tape division by zero");
    const double v = a.val() / bv;
    return {t, t->push(v, {{a.i, 1.0 / bv}, {b.i, -v / bv}})};
}
Var operator-(Var a) { return {a.tape, a.tape->push(-a.val(), {{a.i, -1.0}})}; }
Var operator+(Var a, double c) { return {a.tape, a.tape->push(a.val() + c, {{a.i, 1.0}})}; }
Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) { return {a.tape, a.tape->push(c - a.val(), {{a.i, -1.0}})}; }
Var operator*(Var a, double c) { return {a.tape, a.tape->push(a.val() * c, {{a.i, c}})}; }
Var operator*(double c, Var a) { return a * c; }
Var operator/(Var a, double c) {
    if (c == 0.0) throw std::domain_error("tape division by zero");
    return a * (1.0 / c);
}

Var exp(Var a) {
    const double v = std::exp(a.val());
    return {a.tape, a.tape->push(v, {{a.i, v}})};
}
Var log(Var a) {
    if (a.val() <= 0.0) throw std::domain_error("tape log of non-positive value");
    return {a.tape, a.tape->push(std::log(a.val()), {{a.i, 1.0 / a.val()}})};
}
Var relu(Var a) {
    a.tape->note_kink(std::fabs(a.val()));
    const bool on = a.val() > 0.0;
    return {a.tape, a.tape->push(on ? a.val() : 0.0, {{a.i, on ? 1.0 : 0.0}})};
}
Var softplus(Var a) {
    const double x = a.val();
    const double v = x > 30.0 ? x : std::log1p(std::exp(std::min(x, 30.0)));
    const double d = 1.0 / (1.0 + std::exp(-x));
    return {a.tape, a.tape->push(v, {{a.i, d}})};
}
Var square(Var a) { return a * a; }

Var dot(std::span<const Var> w, std::span<const Var> x, Var bias) {
    if (w.size() != x.size()) throw std::invalid_argument("dot: size mismatch");
    Tape* t = bias.tape;
    double v = bias.val();
    for (std::size_t k = 0; k < w.size(); ++k) v += w[k].val() * x[k].val();
    const int id = t->push_start(v);
    t->push_arg(bias.i, 1.0);
    for (std::size_t k = 0; k < w.size(); ++k) {
        t->push_arg(w[k].i, x[k].val());
        t->push_arg(x[k].i, w[k].val());
    }
    return {t, id};
}

Var dot_const(std::span<const Var> w, std::span<const double> c, Var bias) {
    if (w.size() != c.size()) throw std::invalid_argument("dot_const: size mismatch");
    Tape* t = bias.tape;
    double v = bias.val();
    for (std::size_t k = 0; k < w.size(); ++k) v += w[k].val() * c[k];
    const int id = t->push_start(v);
    t->push_arg(bias.i, 1.0);
    for (std::size_t k = 0; k < w.size(); ++k) t->push_arg(w[k].i, c[k]);
    return {t, id};
}

Var sum(std::span<const Var> xs) {
    if (xs.empty()) throw std::invalid_argument("sum: empty");
    Tape* t = xs[0].tape;
    double v = 0.0;
    for (auto x : xs) v += x.val();
    const int id = t->push_start(v);
    for (auto x : xs) t->push_arg(x.i, 1.0);
    return {t, id};
}

double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace pilab::ad
