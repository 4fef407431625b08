#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace beldec {

struct ScanResult {
  double arg = 0;
  double value = 0;
};

// Global optimization contract used across the library: scan a uniform grid
// over [lo, hi] (plus any caller-supplied candidate points), then refine with
// a ternary search inside the best grid cell. Ties are broken toward the
// smaller argument, and the refinement never discards the best scanned point,
// so results are deterministic and monotone in the candidate set.
inline ScanResult maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                  double step, std::span<const double> extra = {}) {
  if (!(step > 0)) throw std::invalid_argument("maximize_scalar: step must be > 0");
  if (!(lo <= hi)) throw std::invalid_argument("maximize_scalar: empty interval");

  double best_arg = lo;
  double best_value = f(lo);
  auto consider = [&](double x) {
    double v = f(x);
    if (v > best_value || (v == best_value && x < best_arg)) {
      best_value = v;
      best_arg = x;
    }
  };

  long cells = std::lround(std::ceil((hi - lo) / step));
  for (long k = 1; k <= cells; ++k) consider(std::min(lo + static_cast<double>(k) * step, hi));
  for (double x : extra)
    if (x >= lo && x <= hi) consider(x);

  // Ternary refinement in the cell bracketing the grid optimum.
  double a = std::max(lo, best_arg - step);
  double b = std::min(hi, best_arg + step);
  for (int it = 0; it < 120 && b - a > 1e-13; ++it) {
    double m1 = a + (b - a) / 3.0;
    double m2 = b - (b - a) / 3.0;
    double v1 = f(m1), v2 = f(m2);
    if (v1 > best_value || (v1 == best_value && m1 < best_arg)) best_value = v1, best_arg = m1;
    if (v2 > best_value || (v2 == best_value && m2 < best_arg)) best_value = v2, best_arg = m2;
    if (v1 < v2)
      a = m1;
    else
      b = m2;
  }
  return {best_arg, best_value};
}

inline ScanResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                  double step, std::span<const double> extra = {}) {
  ScanResult r = maximize_scalar([&f](double x) { return -f(x); }, lo, hi, step, extra);
  return {r.arg, -r.value};
}

}  // namespace beldec
