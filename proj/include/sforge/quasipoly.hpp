#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sforge {

using Complex = std::complex<double>;

/// One exponential term a * b * exp(-lambda * tau) of a characteristic factor.
struct Term {
    double coeff = 0.0;   // a_k
    double weight = 1.0;  // b_k, may be zero (degenerate rings)
    double delay = 0.0;   // tau_k >= 0
};

/**
 * @brief Scalar quasipolynomial factor
 *
 * Delta(lambda) = lambda - sum_k a_k b_k exp(-lambda tau_k).
 * The multiplicity is only applied when the factor sits inside a CharProduct.
 */
struct ScalarFactor {
    std::vector<Term> terms;
    int multiplicity = 1;
};

/// Product of factors, each raised to its multiplicity.
struct CharProduct {
    std::vector<ScalarFactor> factors;
};

namespace quasipoly {

/// Throws InvalidArgument on a negative delay, a non-finite entry or multiplicity < 1.
void validate(const ScalarFactor& factor);
void validate(const CharProduct& product);

[[nodiscard]] Complex evaluate(const ScalarFactor& factor, Complex lambda);

/// Delta'(lambda) = 1 + sum_k a_k b_k tau_k exp(-lambda tau_k).
[[nodiscard]] Complex evaluate_derivative(const ScalarFactor& factor, Complex lambda);

[[nodiscard]] Complex evaluate_product(const CharProduct& product, Complex lambda);

/// max_l |Delta(i omega_l)|. Throws InvalidArgument when omegas is empty.
[[nodiscard]] double residual_on_targets(const ScalarFactor& factor,
                                         std::span<const double> omegas);

}  // namespace quasipoly
}  // namespace sforge
