#pragma once

#include <complex>
#include <span>
#include <vector>

namespace optocool {

/// Roots of sum_k coeffs[k] * z^k via companion-matrix eigenvalues, each
/// polished with a few Newton steps. Leading coefficient must be nonzero.
std::vector<std::complex<double>> polynomial_roots(
    std::span<const std::complex<double>> coeffs);

std::complex<double> polynomial_eval(std::span<const std::complex<double>> coeffs,
                                     std::complex<double> z);

}  // namespace optocool
