#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls into the library code paths it is compared against.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

/// Discriminant of the monic cubic x^3 + a x^2 + b x + c. Negative means
/// one real root, positive three distinct real roots.
inline double cubic_discriminant(double a, double b, double c) {
  return 18.0 * a * b * c - 4.0 * a * a * a * c + a * a * b * b - 4.0 * b * b * b - 27.0 * c * c;
}

/// Golden-section maximization on [lo, hi].
inline double golden_argmax(const std::function<double(double)>& f, double lo, double hi,
                            double tol = 1e-12) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - r * (hi - lo);
  double d = lo + r * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - r * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + r * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

/// Grid scan with spacing `step`, then golden refinement around the best node.
inline double scan_argmax(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best = lo;
  double best_value = f(lo);
  for (double x = lo + step; x <= hi; x += step) {
    const double v = f(x);
    if (v > best_value) {
      best_value = v;
      best = x;
    }
  }
  return golden_argmax(f, std::max(lo, best - step), std::min(hi, best + step));
}

/// Position spectrum written out directly from its closed form, in the
/// flat (Markov) thermal model.
inline double markov_spectrum(double w, double b, double phi, double phi_nl, double q, double n) {
  using cd = std::complex<double>;
  const cd d = (cd{1.0, -b * w}) * (cd{1.0, -b * w}) + phi * phi;
  const cd m{1.0 - w * w, -w / q};
  const double thermal = 2.0 * (2.0 * n + 1.0) / q;
  const double radiation = 4.0 * phi_nl * (1.0 + phi * phi + b * b * w * w);
  return (thermal * std::norm(d) + radiation) / std::norm(d * m - 2.0 * phi * phi_nl);
}

/// Adaptive Gauss-Kronrod over [a, b] split at `cuts`.
inline double integrate(const std::function<double(double)>& f, std::vector<double> cuts, double a,
                        double b) {
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1],
                                                                           25, 1e-12);
  }
  return total;
}

inline std::mt19937_64 rng(unsigned long long seed) { return std::mt19937_64{seed}; }

}  // namespace oracle
