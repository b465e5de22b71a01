#pragma once

#include <functional>
#include <span>
#include <vector>

namespace stamp {

/// log(sum_i exp(v_i)); -inf for an empty span.
double log_sum_exp(std::span<const double> v);

/// log(exp(a) + exp(b))
double log_add_exp(double a, double b);

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth = 60);

/// Type-7 percentile (linear interpolation between order statistics) of a
/// sorted ascending array; p in [0, 100].
double percentile_type7_sorted(std::span<const double> sorted, double p);

/// Convenience: copies, sorts, then applies percentile_type7_sorted.
double percentile_type7(std::vector<double> values, double p);

/// Bisection root of a continuous monotone f on [lo, hi]; f(lo), f(hi) must
/// bracket zero. Converges to |hi-lo| <= xtol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter = 200);

} // namespace stamp
