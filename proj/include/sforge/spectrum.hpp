#pragma once

#include <string>
#include <vector>

#include "sforge/quasipoly.hpp"
#include "sforge/realization.hpp"

namespace sforge {

/// Axis-aligned rectangle re_min <= Re <= re_max, im_min <= Im <= im_max.
struct Region {
    double re_min = 0.0;
    double re_max = 0.0;
    double im_min = 0.0;
    double im_max = 0.0;
};

/// Outcome of one argument-principle evaluation.
struct ContourCount {
    int count = 0;
    double winding = 0.0;     // unrounded real part of the contour integral / (2 pi i)
    double min_abs = 0.0;     // smallest |Delta| seen on the contour
    int panels = 0;           // panels per edge at acceptance
    bool dilated = false;     // contour was moved outward once to avoid a boundary root
    Region region;            // contour actually used
};

struct TargetCheck {
    std::size_t factor = 0;   // 0-based factor index
    double omega = 0.0;
    int sign = 1;             // +1 for i omega, -1 for the conjugate
    double residual = 0.0;    // |Delta_j(sign * i omega)|
    int local_count = -1;     // -1 when counting failed
    Complex polished{0.0, 0.0};
    double root_error = 0.0;  // |polished - sign * i omega|
    bool pass = false;
    std::string failure;
};

struct SpectrumReport {
    std::vector<TargetCheck> targets;
    double box_half_width = 0.0;
    double min_contour_abs = 0.0;
    int max_panels = 0;
    bool pass = false;
};

namespace spectrum {

void validate(const Region& region);

/**
 * @brief Number of zeros of the factor inside the region, with multiplicity
 *
 * Trapezoid rule on Delta'/Delta over the four edges, 256 panels per edge, doubled
 * until two successive values agree to 1e-3 and sit within 1e-3 of an integer.
 * A contour passing within 1e-8 * (1 + max |corner|) of a zero is pushed out by 1e-6
 * once; a second failure throws BoundaryRoot. More than 2^20 panels per edge throws
 * NoConvergence.
 */
[[nodiscard]] ContourCount count_roots_detailed(const ScalarFactor& factor, const Region& region);

[[nodiscard]] int count_roots(const ScalarFactor& factor, const Region& region);

/// Damped Newton from lambda0; stops once |Delta| <= tol * (1 + sum |a b| + |lambda|). At most 30 steps.
[[nodiscard]] Complex polish_root(const ScalarFactor& factor, Complex lambda0, double tol = 1e-13);

/// All zeros in the region (sorted by imaginary, then real part).
[[nodiscard]] std::vector<Complex> locate_roots(const ScalarFactor& factor, const Region& region,
                                                int max_roots);

/// Checks +-i omega for every target of every factor; never throws on a failed check.
[[nodiscard]] SpectrumReport verify_realization(const RealizationResult& result,
                                                const FrequencyTarget& target,
                                                const WeightTable& weights, double tol);

}  // namespace spectrum
}  // namespace sforge
