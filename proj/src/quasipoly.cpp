#include "sforge/quasipoly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sforge/errors.hpp"

namespace sforge::quasipoly {

void validate(const ScalarFactor& factor) {
    if (factor.multiplicity < 1) {
        throw InvalidArgument("factor multiplicity must be >= 1, got " +
                              std::to_string(factor.multiplicity));
    }
    for (std::size_t k = 0; k < factor.terms.size(); ++k) {
        const Term& t = factor.terms[k];
        if (!std::isfinite(t.coeff) || !std::isfinite(t.weight) || !std::isfinite(t.delay)) {
            throw InvalidArgument("term " + std::to_string(k + 1) + " has a non-finite entry");
        }
        if (t.delay < 0.0) {
            throw InvalidArgument("term " + std::to_string(k + 1) + " has negative delay");
        }
    }
}

void validate(const CharProduct& product) {
    if (product.factors.empty()) {
        throw InvalidArgument("characteristic product has no factors");
    }
    for (const auto& f : product.factors) {
        validate(f);
    }
}

Complex evaluate(const ScalarFactor& factor, Complex lambda) {
    Complex sum{0.0, 0.0};
    for (const Term& t : factor.terms) {
        sum += t.coeff * t.weight * std::exp(-lambda * t.delay);
    }
    return lambda - sum;
}

Complex evaluate_derivative(const ScalarFactor& factor, Complex lambda) {
    Complex sum{1.0, 0.0};
    for (const Term& t : factor.terms) {
        sum += t.coeff * t.weight * t.delay * std::exp(-lambda * t.delay);
    }
    return sum;
}

Complex evaluate_product(const CharProduct& product, Complex lambda) {
    Complex value{1.0, 0.0};
    for (const auto& f : product.factors) {
        const Complex d = evaluate(f, lambda);
        for (int m = 0; m < f.multiplicity; ++m) {
            value *= d;
        }
    }
    return value;
}

double residual_on_targets(const ScalarFactor& factor, std::span<const double> omegas) {
    if (omegas.empty()) {
        throw InvalidArgument("residual_on_targets needs at least one frequency");
    }
    double worst = 0.0;
    for (double w : omegas) {
        worst = std::max(worst, std::abs(evaluate(factor, Complex{0.0, w})));
    }
    return worst;
}

}  // namespace sforge::quasipoly
