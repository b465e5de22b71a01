#include "stamp/numeric.hpp"

#include "stamp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stamp {

double log_sum_exp(std::span<const double> v) {
  if (v.empty())
    return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m))
    return m;
  double s = 0.0;
  for (double x : v)
    s += std::exp(x - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a < b)
    std::swap(a, b);
  if (!std::isfinite(a))
    return a;
  return a + std::log1p(std::exp(b - a));
}

namespace {

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double fa, double fm, double fb, double whole, double tol,
             int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, m - a);
  double right = simpson(fm, frm, fb, b - m);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth) {
  if (a == b)
    return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = simpson(fa, fm, fb, b - a);
  return adapt(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double percentile_type7_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty())
    throw EmptyData("percentile of empty array");
  if (sorted.size() == 1)
    return sorted[0];
  double h = (static_cast<double>(sorted.size()) - 1.0) * (p / 100.0);
  h = std::clamp(h, 0.0, static_cast<double>(sorted.size()) - 1.0);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile_type7(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return percentile_type7_sorted(values, p);
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0)
    return lo;
  if (fhi == 0.0)
    return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw DomainError("bisect: endpoints do not bracket a root");
  for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0)
      return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace stamp
