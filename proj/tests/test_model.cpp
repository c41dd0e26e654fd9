#include <doctest.h>

#include <cmath>
#include <random>

#include "optocool/error.hpp"
#include "optocool/model.hpp"
#include "oracles.hpp"

using namespace optocool;

namespace {

constexpr double kHbar = 1.054571817e-34;
constexpr double kBoltzmann = 1.380649e-23;

// A membrane-in-cavity style parameter set; only the ratios matter below.
PhysicalParams lab_params() {
  PhysicalParams p;
  p.omega_m = 2.0 * M_PI * 1e6;
  p.kappa = p.omega_m / 10.0;
  p.gamma = p.omega_m / 1e4;
  p.mass = 1e-11;
  p.cavity_length = 1e-2;
  p.omega_c = 1.77e15;
  p.delta_c = 0.0;
  p.drive_intensity = 0.0;
  p.temperature = 0.0;
  return p;
}

double cubic(double phi_c, double drive, double u) {
  return u * (1.0 + (phi_c - u) * (phi_c - u)) - drive;
}

}  // namespace

TEST_CASE("thermal occupancy") {
  const double w = 2.0 * M_PI * 1e6;
  CHECK(thermal_occupancy(0.0, w) == 0.0);
  CHECK(thermal_occupancy(kHbar * w / (kBoltzmann * std::log(2.0)), w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(thermal_occupancy(kHbar * w / (kBoltzmann * std::log(1.01)), w) ==
        doctest::Approx(100.0).epsilon(1e-10));
  CHECK_THROWS_AS(thermal_occupancy(-1.0, w), Error);
}

TEST_CASE("steady state: undriven cavity has the single branch u = 0") {
  for (double phi_c : {-3.0, 0.0, 0.5, 2.0, 7.0}) {
    const auto ss = solve_steady_state(phi_c, 0.0);
    REQUIRE(ss.branches.size() == 1);
    CHECK(ss.branches[0].u == 0.0);
    CHECK(ss.branches[0].phi_eff == phi_c);
    CHECK(ss.branches[0].stable);
  }
}

TEST_CASE("steady state: (u - 1)^2 (u - 2) has a marginal double root") {
  const auto ss = solve_steady_state(2.0, 2.0);
  REQUIRE(ss.branches.size() == 3);
  CHECK(ss.branches[0].u == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ss.branches[1].u == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ss.branches[2].u == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ss.branches[0].marginal);
  CHECK(ss.branches[1].marginal);
  CHECK_FALSE(ss.branches[0].stable);
  CHECK_FALSE(ss.branches[1].stable);
  CHECK_FALSE(ss.branches[2].marginal);
  CHECK(ss.branches[2].stable);
  CHECK(ss.branches[2].phi_eff == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("steady state: below the bistability threshold there is one root") {
  // u^3 - 2 phi_c u^2 + (1 + phi_c^2) u - P
  const double phi_c = 0.5;
  for (double drive = 1e-3; drive < 1e3; drive *= 1.7) {
    CHECK(oracle::cubic_discriminant(-2.0 * phi_c, 1.0 + phi_c * phi_c, -drive) < 0.0);
    const auto ss = solve_steady_state(phi_c, drive);
    CHECK(ss.branches.size() == 1);
  }
}

TEST_CASE("steady state: branch count follows the discriminant") {
  auto gen = oracle::rng(7);
  std::uniform_real_distribution<double> phi_dist(-4.0, 6.0);
  std::uniform_real_distribution<double> log_drive(-3.0, 3.0);
  for (int trial = 0; trial < 400; ++trial) {
    const double phi_c = phi_dist(gen);
    const double drive = std::pow(10.0, log_drive(gen));
    const double disc = oracle::cubic_discriminant(-2.0 * phi_c, 1.0 + phi_c * phi_c, -drive);
    const auto ss = solve_steady_state(phi_c, drive);
    CAPTURE(phi_c);
    CAPTURE(drive);
    if (disc < -1e-6) CHECK(ss.branches.size() == 1);
    if (disc > 1e-6) {
      REQUIRE(ss.branches.size() == 3);
      // Middle branch of a bistable triple is always unstable.
      CHECK_FALSE(ss.branches[1].stable);
      CHECK(phi_c > std::sqrt(3.0));
    }
    CHECK(ss.branches.size() % 2 == 1);
    for (const auto& br : ss.branches) {
      CHECK(br.u >= 0.0);
      CHECK(std::abs(cubic(phi_c, drive, br.u)) < 1e-10 * std::max(1.0, drive));
      CHECK(br.phi_eff == doctest::Approx(phi_c - br.u));
    }
    for (std::size_t i = 1; i < ss.branches.size(); ++i) {
      CHECK(ss.branches[i - 1].u <= ss.branches[i].u);
    }
  }
}

TEST_CASE("bistability needs phi_c above sqrt(3)") {
  for (double phi_c = 0.0; phi_c < std::sqrt(3.0) - 1e-3; phi_c += 0.05) {
    for (double drive = 0.01; drive < 100.0; drive *= 1.3) {
      CHECK(solve_steady_state(phi_c, drive).branches.size() == 1);
    }
  }
  // phi_c = 3: the cubic's critical points bracket a three-root window.
  bool found = false;
  for (double drive = 0.5; drive < 5.0; drive += 0.01) {
    if (solve_steady_state(3.0, drive).branches.size() == 3) found = true;
  }
  CHECK(found);
}

TEST_CASE("steady state rejects invalid input") {
  CHECK_THROWS_AS(solve_steady_state(1.0, -1.0), Error);
  CHECK_THROWS_AS(solve_steady_state(NAN, 1.0), Error);
}

TEST_CASE("static stability check") {
  auto check = [](double phi, double phi_nl) {
    return stability_check(NormalizedParams{10.0, phi, phi_nl, 1e4, 0.0});
  };
  CHECK(check(0.0, 5.0).margin == 1.0);
  CHECK(check(0.0, 5.0).stable);
  CHECK(check(-0.5, 2.0).margin == doctest::Approx(-0.75));
  CHECK_FALSE(check(-0.5, 2.0).stable);
  for (double b : {0.5, 3.0, 10.0}) {
    for (double phi_nl : {0.0, 0.1, 10.0}) CHECK(check(b, phi_nl).stable);
  }
}

TEST_CASE("stability margin only depends on rate ratios") {
  // (delta, delta_nl, kappa) -> s (delta, delta_nl, kappa)
  const double delta = -3.0e5, delta_nl = 7.0e4, kappa = 2.0e5;
  for (double s : {1e-3, 0.5, 2.0, 1e4}) {
    const double phi = s * delta / (s * kappa);
    const double phi_nl = s * delta_nl / (s * kappa);
    CHECK(static_margin(phi, phi_nl) == doctest::Approx(static_margin(delta / kappa, delta_nl / kappa)));
  }
}

TEST_CASE("normalize: undriven cavity") {
  auto p = lab_params();
  p.delta_c = 3.0 * p.kappa;
  const auto n = normalize(p);
  CHECK(n.phi_nl == 0.0);
  CHECK(n.phi == doctest::Approx(3.0));
}

TEST_CASE("normalize: rate ratios set b and Q") {
  auto p = lab_params();
  p.temperature = 0.3;
  const auto n = normalize(p);
  CHECK(n.b == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(n.q_factor == doctest::Approx(1e4).epsilon(1e-14));
  CHECK(n.n_t_i == doctest::Approx(1.0 / std::expm1(kHbar * p.omega_m / (kBoltzmann * 0.3))).epsilon(1e-9));
}

TEST_CASE("normalize: detuning chosen so that the effective detuning equals omega_m") {
  // Target phi = b with phi_nl = 0.1 on the lowest branch.
  auto scales = lab_params();
  const NormalizedParams target{10.0, 10.0, 0.1, 1e4, 0.0};
  const auto p = denormalize(target, scales);
  const auto n = normalize(p);
  CHECK(n.phi == doctest::Approx(n.b).epsilon(1e-12));
  CHECK(n.phi_nl == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("normalize: every branch unstable") {
  // phi_c = -3, P = 200: one root u = 4 with margin 1 + phi_c^2 - u^2 = -6.
  auto p = lab_params();
  p.delta_c = -3.0 * p.kappa;
  const double g = coupling_constant(p);
  p.drive_intensity = 200.0 * p.omega_m * p.kappa * p.kappa / (2.0 * g * g);
  CHECK(normalized_drive(p) == doctest::Approx(200.0));
  try {
    normalize(p);
    FAIL("expected NoStableBranch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoStableBranch);
  }
}

TEST_CASE("normalize rejects invalid physical parameters") {
  auto p = lab_params();
  p.gamma = 2.0 * p.omega_m;
  p.mass = -1.0;
  CHECK(p.violations().size() == 2);
  try {
    normalize(p);
    FAIL("expected InvalidParams");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParams);
  }
}

TEST_CASE("normalize inverts denormalize") {
  auto gen = oracle::rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto scales = lab_params();
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    NormalizedParams n;
    n.b = std::pow(10.0, -1.0 + 2.5 * unit(gen));
    n.phi = -2.0 + 22.0 * unit(gen);
    n.phi_nl = 2.0 * unit(gen);
    n.q_factor = std::pow(10.0, 1.0 + 5.0 * unit(gen));
    n.n_t_i = unit(gen) < 0.2 ? 0.0 : std::pow(10.0, -1.0 + 4.0 * unit(gen));
    if (!stability_check(n).stable) continue;
    const double phi_c = n.phi + n.phi_nl;
    const double slope = 1.0 + n.phi * n.phi - 2.0 * n.phi * n.phi_nl;
    if (slope <= 1e-6 * (1.0 + phi_c * phi_c)) continue;  // not a selectable branch

    const auto back = normalize(denormalize(n, scales), branch::Closest{n.phi_nl});
    CAPTURE(n.b);
    CAPTURE(n.phi);
    CAPTURE(n.phi_nl);
    CHECK(back.b == doctest::Approx(n.b).epsilon(1e-12));
    CHECK(back.q_factor == doctest::Approx(n.q_factor).epsilon(1e-12));
    CHECK(back.phi_nl == doctest::Approx(n.phi_nl).epsilon(1e-12));
    CHECK(back.phi == doctest::Approx(n.phi).epsilon(1e-12));
    CHECK(back.n_t_i == doctest::Approx(n.n_t_i).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("normalized parameter invariants") {
  CHECK(NormalizedParams{10.0, 10.0, 0.1, 1e4, 100.0}.violations().empty());
  const NormalizedParams bad{-1.0, 0.0, -0.1, 0.5, -2.0};
  CHECK(bad.violations().size() == 4);
  CHECK_THROWS_AS(bad.validate(), Error);
}
