#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pilab::ad {

class Tape;

// Handle into a tape. Arithmetic operators append nodes to the owning tape.
struct Var {
    Tape* tape = nullptr;
    int i = -1;
    double val() const;
};

// Wengert-list tape. Every node stores its (parent, local-partial) pairs in a
// shared side array; backward is a single reverse sweep. Subgradient convention
// at kinks of max(.,0): derivative 0 (one-sided from below).
class Tape {
public:
    Var leaf(double v);

    void clear();

    // Runs reverse sweep seeding d(out)/d(out) = 1. Adjoints readable via grad().
    void backward(Var out);

    double val(int i) const { return vals_[i]; }
    double grad(int i) const { return adj_[i]; }
    double grad(Var v) const { return adj_[v.i]; }

    std::size_t size() const { return arg_off_.size(); }

    // Smallest |input| seen at a kinked op (relu/softplus gate) since clear();
    // the gradient suites use it to reject points too close to a kink.
    double kink_margin() const { return kink_margin_; }
    void note_kink(double m) {
        if (m < kink_margin_) kink_margin_ = m;
    }

    int push(double value, std::initializer_list<std::pair<int, double>> parents);
    int push_start(double value);
    void push_arg(int parent, double partial);

private:
    std::vector<double> vals_;
    std::vector<double> adj_;
    std::vector<uint32_t> arg_off_;  // per node: start into args_
    std::vector<int> arg_parent_;
    std::vector<double> arg_partial_;
    double kink_margin_ = 1e300;
};

inline double Var::val() const { return tape->val(i); }

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);

Var exp(Var a);
Var log(Var a);
Var relu(Var a);      // max(a, 0)
Var softplus(Var a);  // log(1 + e^a), numerically stable
Var square(Var a);

// sum_k w[k]*x[k] + bias, as a single fused node (both operands variable).
Var dot(std::span<const Var> w, std::span<const Var> x, Var bias);
// sum_k w[k]*c[k] + bias with constant inputs c.
Var dot_const(std::span<const Var> w, std::span<const double> c, Var bias);
Var sum(std::span<const Var> xs);

// Central finite difference of f at x, step h.
double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5);

}  // namespace pilab::ad
