#include "sforge/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "sforge/errors.hpp"

namespace sforge::spectrum {

namespace {

constexpr int kInitialPanels = 256;
constexpr int kMaxPanels = 1 << 20;
constexpr double kSnap = 1e-3;
constexpr double kBoundaryRel = 1e-8;
constexpr double kDilation = 1e-6;
constexpr double kOverflowGuard = 500.0;
constexpr int kMaxPolishIter = 30;
constexpr std::array<double, 4> kCutFractions{0.5123, 0.4871, 0.5347, 0.4689};

[[nodiscard]] double term_scale(const ScalarFactor& f) {
    double s = 0.0;
    for (const Term& t : f.terms) {
        s += std::abs(t.coeff * t.weight);
    }
    return s;
}

[[nodiscard]] std::array<Complex, 4> corners(const Region& r) {
    return {Complex{r.re_min, r.im_min}, Complex{r.re_max, r.im_min},
            Complex{r.re_max, r.im_max}, Complex{r.re_min, r.im_max}};
}

struct Attempt {
    std::optional<ContourCount> result;  // empty when the contour touches a zero
    double min_abs = 0.0;
};

class ContourIntegrator {
public:
    ContourIntegrator(const ScalarFactor& f, const Region& r) : f_(f), region_(r), z_(corners(r)) {
        for (const Complex& z : z_) {
            scale_ = std::max(scale_, std::abs(z));
        }
        scale_ += 1.0;
    }

    Attempt run() {
        int panels = kInitialPanels;
        Complex sum{0.0, 0.0};
        for (int e = 0; e < 4; ++e) {
            const Complex dz = edge(e) / static_cast<double>(panels);
            Complex s = 0.5 * (g(z_[e]) + g(z_[(e + 1) % 4]));
            for (int i = 1; i < panels; ++i) {
                s += g(z_[e] + static_cast<double>(i) * dz);
            }
            sum += s * dz;
        }
        if (touches()) {
            return Attempt{std::nullopt, min_abs_};
        }
        double previous = winding(sum);

        while (true) {
            if (2 * panels > kMaxPanels) {
                throw NoConvergence("argument-principle integral did not settle", previous);
            }
            panels *= 2;
            Complex fresh{0.0, 0.0};
            for (int e = 0; e < 4; ++e) {
                const Complex dz = edge(e) / static_cast<double>(panels);
                Complex s{0.0, 0.0};
                for (int i = 1; i < panels; i += 2) {
                    s += g(z_[e] + static_cast<double>(i) * dz);
                }
                fresh += s * dz;
            }
            sum = 0.5 * sum + fresh;
            if (touches()) {
                return Attempt{std::nullopt, min_abs_};
            }
            const double current = winding(sum);
            const double nearest = std::round(current);
            if (std::abs(current - previous) < kSnap && std::abs(current - nearest) < kSnap) {
                ContourCount out;
                out.count = static_cast<int>(nearest);
                out.winding = current;
                out.min_abs = min_abs_;
                out.panels = panels;
                out.region = region_;
                return Attempt{out, min_abs_};
            }
            previous = current;
        }
    }

private:
    [[nodiscard]] Complex edge(int e) const { return z_[(e + 1) % 4] - z_[e]; }

    Complex g(Complex z) {
        double shift = 0.0;
        for (const Term& t : f_.terms) {
            shift = std::max(shift, -z.real() * t.delay);
        }
        if (shift < kOverflowGuard) {
            const Complex d = quasipoly::evaluate(f_, z);
            min_abs_ = std::min(min_abs_, std::abs(d));
            return quasipoly::evaluate_derivative(f_, z) / d;
        }
        // far left of the axis with long delays: divide Delta and Delta' by exp(shift)
        const double damp = std::exp(-shift);
        Complex d = z * damp;
        Complex dp{damp, 0.0};
        for (const Term& t : f_.terms) {
            const Complex e = t.coeff * t.weight * std::exp(-z * t.delay - shift);
            d -= e;
            dp += t.delay * e;
        }
        min_abs_ = std::min(min_abs_, std::abs(d) * std::exp(shift));
        return dp / d;
    }

    [[nodiscard]] bool touches() const { return !(min_abs_ >= kBoundaryRel * scale_); }

    [[nodiscard]] static double winding(Complex integral) {
        return integral.imag() / (2.0 * std::numbers::pi);  // Re of integral / (2 pi i)
    }

    const ScalarFactor& f_;
    Region region_;
    std::array<Complex, 4> z_;
    double scale_ = 0.0;
    double min_abs_ = std::numeric_limits<double>::infinity();
};

[[nodiscard]] bool inside(const Region& r, Complex z, double slack) {
    return z.real() >= r.re_min - slack && z.real() <= r.re_max + slack &&
           z.imag() >= r.im_min - slack && z.imag() <= r.im_max + slack;
}

// NOLINTNEXTLINE(misc-no-recursion)
void subdivide(const ScalarFactor& f, const Region& cell, int count, int depth,
               std::vector<Complex>& roots) {
    if (count <= 0) {
        return;
    }
    const Complex center{0.5 * (cell.re_min + cell.re_max), 0.5 * (cell.im_min + cell.im_max)};
    const double extent = std::max(cell.re_max - cell.re_min, cell.im_max - cell.im_min);
    const double slack = 2.0 * kDilation;

    if (count == 1) {
        try {
            const Complex z = polish_root(f, center);
            if (inside(cell, z, slack)) {
                roots.push_back(z);
                return;
            }
        } catch (const NumericError&) {
            // fall through and shrink the cell
        }
    }
    if (depth >= 60 || extent < 1e-10 * (1.0 + std::abs(center))) {
        // a cluster the grid cannot separate: report it at its polished location
        const Complex z = polish_root(f, center);
        roots.insert(roots.end(), static_cast<std::size_t>(count), z);
        return;
    }

    for (double frac : kCutFractions) {
        const double x = cell.re_min + frac * (cell.re_max - cell.re_min);
        const double y = cell.im_min + frac * (cell.im_max - cell.im_min);
        const std::array<Region, 4> kids{Region{cell.re_min, x, cell.im_min, y},
                                         Region{x, cell.re_max, cell.im_min, y},
                                         Region{x, cell.re_max, y, cell.im_max},
                                         Region{cell.re_min, x, y, cell.im_max}};
        std::array<int, 4> counts{};
        bool ok = true;
        int total = 0;
        for (std::size_t i = 0; i < kids.size() && ok; ++i) {
            try {
                counts[i] = count_roots(f, kids[i]);
                total += counts[i];
            } catch (const BoundaryRoot&) {
                ok = false;
            }
        }
        if (!ok || total != count) {
            continue;  // a root sits on or near a cut line; move the cuts
        }
        for (std::size_t i = 0; i < kids.size(); ++i) {
            subdivide(f, kids[i], counts[i], depth + 1, roots);
        }
        return;
    }
    throw BoundaryRoot("could not place cut lines away from the roots");
}

}  // namespace

void validate(const Region& region) {
    const bool finite = std::isfinite(region.re_min) && std::isfinite(region.re_max) &&
                        std::isfinite(region.im_min) && std::isfinite(region.im_max);
    if (!finite || !(region.re_min < region.re_max) || !(region.im_min < region.im_max)) {
        throw InvalidArgument("region needs finite bounds with re_min < re_max, im_min < im_max");
    }
}

ContourCount count_roots_detailed(const ScalarFactor& factor, const Region& region) {
    validate(region);
    quasipoly::validate(factor);

    Attempt first = ContourIntegrator(factor, region).run();
    if (first.result) {
        return *first.result;
    }
    const Region wider{region.re_min - kDilation, region.re_max + kDilation,
                       region.im_min - kDilation, region.im_max + kDilation};
    Attempt second = ContourIntegrator(factor, wider).run();
    if (second.result) {
        second.result->dilated = true;
        return *second.result;
    }
    throw BoundaryRoot("zero on the contour (min |Delta| = " + std::to_string(second.min_abs) +
                       ") even after dilation");
}

int count_roots(const ScalarFactor& factor, const Region& region) {
    return count_roots_detailed(factor, region).count;
}

Complex polish_root(const ScalarFactor& factor, Complex lambda0, double tol) {
    if (!(tol > 0.0)) {
        throw InvalidArgument("polish tolerance must be positive");
    }
    const double base = 1.0 + term_scale(factor);
    Complex z = lambda0;
    Complex d = quasipoly::evaluate(factor, z);
    for (int it = 0; it <= kMaxPolishIter; ++it) {
        const double size = base + std::abs(z);
        if (std::abs(d) <= tol * size) {
            return z;
        }
        if (it == kMaxPolishIter) {
            break;
        }
        const Complex dp = quasipoly::evaluate_derivative(factor, z);
        if (std::abs(dp) <= 1e-12 * (1.0 + std::abs(d))) {
            throw NoConvergence("derivative vanishes during root polishing", std::abs(d));
        }
        const Complex step = d / dp;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(z))) {
            return z;  // at the root to working precision
        }
        double t = 1.0;
        Complex next = z - step;
        Complex dn = quasipoly::evaluate(factor, next);
        for (int h = 0; h < 20 && std::abs(dn) > std::abs(d); ++h) {
            t *= 0.5;
            next = z - t * step;
            dn = quasipoly::evaluate(factor, next);
        }
        z = next;
        d = dn;
    }
    throw NoConvergence("root polishing did not converge in 30 iterations", std::abs(d));
}

std::vector<Complex> locate_roots(const ScalarFactor& factor, const Region& region, int max_roots) {
    const int total = count_roots(factor, region);
    if (total > max_roots) {
        throw TooManyRoots(total, max_roots);
    }
    std::vector<Complex> roots;
    subdivide(factor, region, total, 0, roots);
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
    });
    return roots;
}

SpectrumReport verify_realization(const RealizationResult& result, const FrequencyTarget& target,
                                  const WeightTable& weights, double tol) {
    realization::validate(target);
    const auto n = static_cast<Eigen::Index>(target.size());
    if (result.taus.size() != n || result.coeffs.size() != n ||
        weights.b.rows() != static_cast<Eigen::Index>(target.factor_count()) ||
        weights.b.cols() != n) {
        throw InvalidArgument("result, target and weights have inconsistent dimensions");
    }

    // isolation half-width from the gaps between all +-omega
    std::vector<double> points;
    for (const auto& g : target.groups) {
        for (double w : g) {
            points.push_back(w);
            points.push_back(-w);
        }
    }
    std::sort(points.begin(), points.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points.size(); ++i) {
        gap = std::min(gap, points[i] - points[i - 1]);
    }
    const double delta = std::min(0.05, 0.5 * gap);

    SpectrumReport report;
    report.box_half_width = delta;
    report.min_contour_abs = std::numeric_limits<double>::infinity();
    report.pass = true;
    for (std::size_t j = 0; j < target.factor_count(); ++j) {
        const ScalarFactor f = realization::factor_of(result.taus, result.coeffs, weights, j);
        for (double w : target.groups[j]) {
            for (int sign : {1, -1}) {
                TargetCheck check;
                check.factor = j;
                check.omega = w;
                check.sign = sign;
                const Complex at{0.0, sign * w};
                check.residual = std::abs(quasipoly::evaluate(f, at));
                try {
                    const ContourCount c =
                        count_roots_detailed(f, Region{-delta, delta, sign * w - delta, sign * w + delta});
                    check.local_count = c.count;
                    report.min_contour_abs = std::min(report.min_contour_abs, c.min_abs);
                    report.max_panels = std::max(report.max_panels, c.panels);
                } catch (const Error& e) {
                    check.failure = std::string("count: ") + e.what();
                }
                try {
                    check.polished = polish_root(f, at);
                    check.root_error = std::abs(check.polished - at);
                } catch (const Error& e) {
                    check.root_error = std::numeric_limits<double>::infinity();
                    if (check.failure.empty()) {
                        check.failure = std::string("polish: ") + e.what();
                    }
                }
                if (check.failure.empty()) {
                    if (!(check.residual < tol)) {
                        check.failure = "residual above tolerance";
                    } else if (check.local_count != 1) {
                        check.failure = "isolation box holds " + std::to_string(check.local_count) +
                                        " roots";
                    } else if (!(check.root_error < 1e-8)) {
                        check.failure = "polished root drifted from the target";
                    }
                }
                check.pass = check.failure.empty();
                report.pass = report.pass && check.pass;
                report.targets.push_back(std::move(check));
            }
        }
    }
    return report;
}

}  // namespace sforge::spectrum
