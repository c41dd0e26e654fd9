#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "optocool/error.hpp"
#include "optocool/spectra.hpp"
#include "oracles.hpp"

using namespace optocool;
using cd = std::complex<double>;

namespace {

const NormalizedParams kFig{10.0, 10.0, 0.1, 1e4, 100.0};

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no optocool::Error thrown");
  return ErrorKind::IoError;
}

double coth_weight(double w, double n, double q) {
  if (n == 0.0) return 2.0 * std::abs(w) / q;
  const double x = 0.5 * std::log(1.0 + 1.0 / n);
  if (w == 0.0) return 2.0 / (x * q);
  return 2.0 * w / (q * std::tanh(x * w));
}

}  // namespace

TEST_CASE("cavity response") {
  CHECK(cavity_response(0.0, 3.0, 2.0) == cd{5.0, 0.0});
  // (1 - i)^2 + phi^2 at w = 1/b
  const cd at_linewidth = cavity_response(0.25, 4.0, 3.0);
  CHECK(at_linewidth.real() == doctest::Approx(9.0));
  CHECK(at_linewidth.imag() == doctest::Approx(-2.0));
  for (double w : {0.1, 0.9, 3.0}) {
    CHECK(std::abs(cavity_response(-w, 7.0, -1.5) - std::conj(cavity_response(w, 7.0, -1.5))) < 1e-12);
  }
}

TEST_CASE("susceptibility without the optical spring") {
  NormalizedParams p{2.0, 1.0, 0.0, 50.0, 0.0};
  const cd at_zero = effective_susceptibility(0.0, p);
  CHECK(at_zero.real() == doctest::Approx(1.0));
  CHECK(at_zero.imag() == doctest::Approx(0.0));
  const cd at_resonance = effective_susceptibility(1.0, p);
  CHECK(at_resonance.real() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(at_resonance.imag() == doctest::Approx(50.0));
}

TEST_CASE("susceptibility at resonance with cooling") {
  const cd d = cd{1.0, -10.0} * cd{1.0, -10.0} + 100.0;
  const cd expected = 1.0 / (cd{0.0, -1e-4} - 2.0 * 10.0 * 0.1 / d);
  const cd chi = effective_susceptibility(1.0, kFig);
  CHECK(std::abs(chi - expected) < 1e-12 * std::abs(expected));
  // Damping enhanced about a thousandfold.
  CHECK(std::abs(chi) == doctest::Approx(1e4 / 998.5).epsilon(0.01));
}

TEST_CASE("bare mechanical spectrum is a Lorentzian") {
  const NormalizedParams p{3.0, 2.0, 0.0, 100.0, 5.0};
  for (double w : {0.0, 0.3, 0.99, 1.0, 1.01, 4.0}) {
    const double expected =
        2.0 * 11.0 / 100.0 / ((1.0 - w * w) * (1.0 - w * w) + w * w / 1e4);
    CHECK(noise_spectrum(w, p, ThermalNoiseModel::MarkovFlat).s_q == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("spectrum matches the closed form and is even") {
  auto gen = oracle::rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double b = 0.2 + 20.0 * unit(gen);
    const double phi = 0.1 + 30.0 * unit(gen);
    const double phi_nl = 0.5 * unit(gen);
    const double q = std::pow(10.0, 1.0 + 4.0 * unit(gen));
    const double n = 200.0 * unit(gen);
    const double w = 5.0 * unit(gen);
    const NormalizedParams p{b, phi, phi_nl, q, n};
    const double markov = noise_spectrum(w, p, ThermalNoiseModel::MarkovFlat).s_q;
    CHECK(markov == doctest::Approx(oracle::markov_spectrum(w, b, phi, phi_nl, q, n)).epsilon(1e-10));
    CHECK(markov == doctest::Approx(noise_spectrum(-w, p, ThermalNoiseModel::MarkovFlat).s_q).epsilon(1e-12));
    const double coth = noise_spectrum(w, p, ThermalNoiseModel::QuantumCoth).s_q;
    CHECK(coth == doctest::Approx(noise_spectrum(-w, p, ThermalNoiseModel::QuantumCoth).s_q).epsilon(1e-12));
    CHECK(markov >= 0.0);
    CHECK(coth >= 0.0);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("spectrum peaks at the dressed mechanical frequency") {
  auto s = [](double w) { return noise_spectrum(w, kFig, ThermalNoiseModel::MarkovFlat).s_q; };
  const double peak = oracle::scan_argmax(s, 0.5, 1.5, 1e-3);
  // Reference from the resonance condition Re[chi^-1] = 0 solved independently.
  auto re_inverse = [](double w) {
    const cd d = cd{1.0, -10.0 * w} * cd{1.0, -10.0 * w} + 100.0;
    return (1.0 - w * w - 2.0 * 10.0 * 0.1 / d).real();
  };
  double lo = 0.9, hi = 1.1;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (re_inverse(lo) * re_inverse(mid) <= 0.0 ? hi : lo) = mid;
  }
  const double gamma_eff = 998.5 / 1e4;
  CHECK(std::abs(peak - 0.5 * (lo + hi)) < gamma_eff / 2.0);
}

TEST_CASE("variances without coupling equal the bath") {
  for (double n : {0.0, 1.0, 100.0}) {
    const NormalizedParams p{10.0, 10.0, 0.0, 1e4, n};
    const auto r = integrate_variances(p, ThermalNoiseModel::MarkovFlat);
    CHECK(r.dq2 == doctest::Approx(2.0 * n + 1.0).epsilon(1e-6));
    CHECK(r.dp2 == doctest::Approx(2.0 * n + 1.0).epsilon(1e-6));
    CHECK(r.n_t_f == doctest::Approx(n).epsilon(1e-6).scale(1.0));
    CHECK(r.cutoff_log_slope == 0.0);
  }
}

TEST_CASE("variances agree with an independent full-line quadrature") {
  for (const NormalizedParams& p : {kFig, NormalizedParams{5.0, 5.0, 0.1, 1e4, 100.0},
                                    NormalizedParams{1.0, 1.2, 0.3, 1e3, 20.0}}) {
    CAPTURE(p.b);
    const std::vector<double> cuts{0.5, 0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.5, 2.0, 5.0, 20.0};
    const double top = 1000.0;
    auto s = [&](double w) { return oracle::markov_spectrum(w, p.b, p.phi, p.phi_nl, p.q_factor, p.n_t_i); };
    auto w2s = [&](double w) { return w * w * s(w); };
    const double thermal = 2.0 * (2.0 * p.n_t_i + 1.0) / p.q_factor;
    const double dq2 = oracle::integrate(s, cuts, 0.0, top) / M_PI;
    const double dp2 = (oracle::integrate(w2s, cuts, 0.0, top) + thermal / top) / M_PI;

    const auto r = integrate_variances(p, ThermalNoiseModel::MarkovFlat);
    CHECK(r.dq2 == doctest::Approx(dq2).epsilon(1e-7));
    CHECK(r.dp2 == doctest::Approx(dp2).epsilon(1e-7));

    auto sc = [&](double w) {
      const cd d = cavity_response(w, p.b, p.phi);
      const cd m{1.0 - w * w, -w / p.q_factor};
      const double rad = 4.0 * p.phi_nl * (1.0 + p.phi * p.phi + p.b * p.b * w * w);
      return (coth_weight(w, p.n_t_i, p.q_factor) * std::norm(d) + rad) / std::norm(d * m - 2.0 * p.phi * p.phi_nl);
    };
    const auto rc = integrate_variances(p, ThermalNoiseModel::QuantumCoth);
    CHECK(rc.dq2 == doctest::Approx(oracle::integrate(sc, cuts, 0.0, top) / M_PI).epsilon(1e-7));
  }
}

TEST_CASE("quantum bath: occupancy near 0.15 at b = 5") {
  const auto r = integrate_variances({5.0, 5.0, 0.1, 1e4, 100.0}, ThermalNoiseModel::QuantumCoth);
  CHECK(r.n_t_f == doctest::Approx(0.15).epsilon(0.2));
  CHECK(r.cutoff_log_slope == doctest::Approx(2.0 / (M_PI * 1e4)));
}

TEST_CASE("cutoff dependence") {
  QuadratureOptions narrow, wide;
  narrow.omega_max = 50.0;
  wide.omega_max = 200.0;
  const auto m50 = integrate_variances(kFig, ThermalNoiseModel::MarkovFlat, narrow);
  const auto m200 = integrate_variances(kFig, ThermalNoiseModel::MarkovFlat, wide);
  CHECK(m50.dq2 == doctest::Approx(m200.dq2).epsilon(1e-6));
  CHECK(m50.dp2 == doctest::Approx(m200.dp2).epsilon(1e-6));

  const auto c50 = integrate_variances(kFig, ThermalNoiseModel::QuantumCoth, narrow);
  const auto c200 = integrate_variances(kFig, ThermalNoiseModel::QuantumCoth, wide);
  CHECK(c50.dq2 == doctest::Approx(c200.dq2).epsilon(1e-6));
  CHECK(c200.dp2 - c50.dp2 == doctest::Approx(c50.cutoff_log_slope * std::log(4.0)).epsilon(1e-3));
}

TEST_CASE("cooling side lowers the occupancy and respects uncertainty") {
  for (double b : {0.5, 2.0, 10.0}) {
    for (double ratio : {0.5, 1.0, 2.0}) {
      for (double phi_nl : {0.01, 0.1}) {
        const NormalizedParams p{b, ratio * b, phi_nl, 1e4, 100.0};
        CAPTURE(b);
        CAPTURE(ratio);
        CAPTURE(phi_nl);
        for (auto model : {ThermalNoiseModel::MarkovFlat, ThermalNoiseModel::QuantumCoth}) {
          const auto r = integrate_variances(p, model);
          CHECK(r.n_t_f < p.n_t_i);
          CHECK(r.dq2 * r.dp2 >= 1.0);
          CHECK(r.quadrature_error <= 1e-8 * std::max(r.dq2, r.dp2));
        }
      }
    }
  }
}

TEST_CASE("variance errors") {
  CHECK(kind_of([] { integrate_variances({10.0, -0.5, 2.0, 1e4, 0.0}, ThermalNoiseModel::MarkovFlat); }) ==
        ErrorKind::Unstable);
  // Heating side passes the static test but has a growing mode.
  CHECK(stability_check({10.0, -10.0, 0.1, 1e4, 0.0}).stable);
  CHECK(kind_of([] { integrate_variances({10.0, -10.0, 0.1, 1e4, 0.0}, ThermalNoiseModel::MarkovFlat); }) ==
        ErrorKind::Unstable);
  QuadratureOptions bad;
  bad.omega_max = 2.0;
  CHECK(kind_of([&] { integrate_variances(kFig, ThermalNoiseModel::MarkovFlat, bad); }) ==
        ErrorKind::InvalidParams);
  CHECK(kind_of([] { integrate_variances({-1.0, 1.0, 0.1, 1e4, 0.0}, ThermalNoiseModel::MarkovFlat); }) ==
        ErrorKind::InvalidParams);
}

TEST_CASE("poles and breakpoints") {
  for (const auto& z : spectrum_poles(kFig)) CHECK(z.imag() < 0.0);
  const auto pts = spectrum_breakpoints(kFig, 100.0);
  REQUIRE_FALSE(pts.empty());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i] > 0.0);
    CHECK(pts[i] < 100.0);
    if (i > 0) CHECK(pts[i] > pts[i - 1]);
  }
}

TEST_CASE("occupancy from variances") {
  CHECK(occupancy_from_variances(1.0, 1.0) == 0.0);
  CHECK(occupancy_from_variances(201.0, 201.0) == 100.0);
  CHECK(std::isinf(coth_argument(0.0)));
  CHECK(coth_argument(1.0) == doctest::Approx(0.5 * std::log(2.0)));
}
