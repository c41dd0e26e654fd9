#include "optocool/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include "optocool/error.hpp"

namespace optocool {

std::complex<double> polynomial_eval(std::span<const std::complex<double>> coeffs,
                                     std::complex<double> z) {
  std::complex<double> acc{0.0, 0.0};
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

namespace {

std::complex<double> derivative_eval(std::span<const std::complex<double>> coeffs,
                                     std::complex<double> z) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = coeffs.size() - 1; k >= 1; --k) {
    acc = acc * z + static_cast<double>(k) * coeffs[k];
  }
  return acc;
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(
    std::span<const std::complex<double>> coeffs) {
  if (coeffs.size() < 2 || coeffs.back() == std::complex<double>{0.0, 0.0}) {
    throw Error(ErrorKind::InvalidParams, "polynomial_roots: degree < 1 or zero leading coefficient");
  }
  const auto n = static_cast<Eigen::Index>(coeffs.size() - 1);
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    companion(i, n - 1) = -coeffs[static_cast<std::size_t>(i)] / coeffs.back();
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverFailure, "polynomial_roots: eigenvalue iteration did not converge");
  }

  std::vector<std::complex<double>> roots(solver.eigenvalues().data(),
                                          solver.eigenvalues().data() + n);
  for (auto& z : roots) {
    for (int iter = 0; iter < 3; ++iter) {
      const auto d = derivative_eval(coeffs, z);
      if (std::abs(d) == 0.0) break;
      const auto step = polynomial_eval(coeffs, z) / d;
      // Near multiple roots Newton can overshoot; only accept improving steps.
      const auto candidate = z - step;
      if (std::abs(polynomial_eval(coeffs, candidate)) <= std::abs(polynomial_eval(coeffs, z))) {
        z = candidate;
      } else {
        break;
      }
    }
  }
  return roots;
}

}  // namespace optocool
