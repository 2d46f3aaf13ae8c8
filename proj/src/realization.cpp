#include "sforge/realization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "sforge/errors.hpp"

namespace sforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPlusAngle = 1.5 * std::numbers::pi;  // exp(-i 3pi/2) = +i
constexpr double kMinusAngle = 0.5 * std::numbers::pi; // exp(-i pi/2)  = -i
constexpr int kStepsPerTurn = 64;

[[nodiscard]] double angular_distance(double x) {
    return std::abs(std::remainder(x, kTwoPi));
}

[[nodiscard]] double max_angle_error(const Vector& omega, const Eigen::Ref<const Vector>& angles,
                                     double tau) {
    double worst = 0.0;
    for (Eigen::Index r = 0; r < omega.size(); ++r) {
        worst = std::max(worst, angular_distance(omega[r] * tau - angles[r]));
    }
    return worst;
}

// The local error function is max_r omega_r |tau - t_r| around the nearest exact hits
// t_r; its minimum sits at one of the t_r or where a falling and a rising branch cross.
[[nodiscard]] double refine_hit(const Vector& omega, const Eigen::Ref<const Vector>& angles,
                                double tau) {
    const Eigen::Index n = omega.size();
    std::vector<double> hits(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const double turns = std::round((omega[r] * tau - angles[r]) / kTwoPi);
        hits[static_cast<std::size_t>(r)] = (angles[r] + kTwoPi * turns) / omega[r];
    }
    double best_tau = tau;
    double best = max_angle_error(omega, angles, tau);
    auto consider = [&](double t) {
        if (t <= 0.0) {
            return;
        }
        const double d = max_angle_error(omega, angles, t);
        if (d < best) {
            best = d;
            best_tau = t;
        }
    };
    for (Eigen::Index r = 0; r < n; ++r) {
        consider(hits[static_cast<std::size_t>(r)]);
        for (Eigen::Index s = r + 1; s < n; ++s) {
            const double tr = hits[static_cast<std::size_t>(r)];
            const double ts = hits[static_cast<std::size_t>(s)];
            consider((omega[r] * tr + omega[s] * ts) / (omega[r] + omega[s]));
        }
    }
    return best_tau;
}

void check_shapes(const Vector& taus, const Vector& coeffs, const FrequencyTarget& target,
                  const WeightTable& weights) {
    const auto n = static_cast<Eigen::Index>(target.size());
    if (taus.size() != n || coeffs.size() != n) {
        throw InvalidArgument("expected " + std::to_string(n) + " delays and coefficients");
    }
    if (weights.b.rows() != static_cast<Eigen::Index>(target.factor_count()) ||
        weights.b.cols() != n) {
        throw InvalidArgument("weight table must be " + std::to_string(target.factor_count()) +
                              " x " + std::to_string(n));
    }
}

// Complex residual z_r = sum_k a_k b_k^{j(r)} exp(-i omega_r tau_k) - i omega_r.
[[nodiscard]] Eigen::VectorXcd complex_residual(const Vector& taus, const Vector& coeffs,
                                                const Vector& omega,
                                                const std::vector<std::size_t>& owner,
                                                const Matrix& b) {
    const Eigen::Index n = omega.size();
    Eigen::VectorXcd z(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto j = static_cast<Eigen::Index>(owner[static_cast<std::size_t>(r)]);
        Complex sum{0.0, -omega[r]};
        for (Eigen::Index k = 0; k < n; ++k) {
            sum += coeffs[k] * b(j, k) * std::polar(1.0, -omega[r] * taus[k]);
        }
        z[r] = sum;
    }
    return z;
}

[[nodiscard]] Vector stack(const Eigen::VectorXcd& z) {
    Vector out(2 * z.size());
    out << z.real(), z.imag();
    return out;
}

[[nodiscard]] Matrix jacobian_for(const Vector& taus, const Vector& coeffs, const Vector& omega,
                                  const std::vector<std::size_t>& owner, const Matrix& b) {
    const Eigen::Index n = omega.size();
    Matrix jac(2 * n, 2 * n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto j = static_cast<Eigen::Index>(owner[static_cast<std::size_t>(r)]);
        for (Eigen::Index k = 0; k < n; ++k) {
            const Complex e = b(j, k) * std::polar(1.0, -omega[r] * taus[k]);
            const Complex d_tau = Complex{0.0, -omega[r]} * coeffs[k] * e;
            jac(r, k) = d_tau.real();
            jac(n + r, k) = d_tau.imag();
            jac(r, n + k) = e.real();
            jac(n + r, n + k) = e.imag();
        }
    }
    return jac;
}

[[nodiscard]] FrequencyTarget with_values(const FrequencyTarget& shape, const Vector& flat) {
    FrequencyTarget out = shape;
    Eigen::Index idx = 0;
    for (auto& group : out.groups) {
        for (double& w : group) {
            w = flat[idx++];
        }
    }
    return out;
}

}  // namespace

FrequencyTarget FrequencyTarget::single(std::vector<double> omegas) {
    FrequencyTarget t;
    t.groups.push_back(std::move(omegas));
    return t;
}

std::size_t FrequencyTarget::size() const {
    std::size_t n = 0;
    for (const auto& g : groups) {
        n += g.size();
    }
    return n;
}

std::vector<std::size_t> FrequencyTarget::group_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(groups.size());
    for (const auto& g : groups) {
        sizes.push_back(g.size());
    }
    return sizes;
}

std::vector<std::size_t> FrequencyTarget::offsets() const {
    std::vector<std::size_t> mu{0};
    for (const auto& g : groups) {
        mu.push_back(mu.back() + g.size());
    }
    return mu;
}

Vector FrequencyTarget::flattened() const {
    Vector w(static_cast<Eigen::Index>(size()));
    Eigen::Index idx = 0;
    for (const auto& g : groups) {
        for (double x : g) {
            w[idx++] = x;
        }
    }
    return w;
}

std::vector<std::size_t> FrequencyTarget::row_factor() const {
    std::vector<std::size_t> owner;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        owner.insert(owner.end(), groups[j].size(), j);
    }
    return owner;
}

WeightTable WeightTable::ones(std::size_t factors, std::size_t columns) {
    return WeightTable{Matrix::Ones(static_cast<Eigen::Index>(factors),
                                    static_cast<Eigen::Index>(columns))};
}

namespace realization {

void validate(const FrequencyTarget& target) {
    if (target.groups.empty()) {
        throw InvalidArgument("frequency target has no groups");
    }
    std::vector<double> all;
    for (std::size_t j = 0; j < target.groups.size(); ++j) {
        if (target.groups[j].empty()) {
            throw InvalidArgument("frequency group " + std::to_string(j + 1) + " is empty");
        }
        for (double w : target.groups[j]) {
            if (!std::isfinite(w) || w <= 0.0) {
                throw InvalidArgument("frequencies must be finite and strictly positive");
            }
            all.push_back(w);
        }
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw InvalidArgument("duplicated frequency; targets must be rationally independent");
    }
}

void validate(const WeightTable& weights, const FrequencyTarget& target) {
    const auto r = static_cast<Eigen::Index>(target.factor_count());
    const auto n = static_cast<Eigen::Index>(target.size());
    if (weights.b.rows() != r || weights.b.cols() != n) {
        throw InvalidArgument("weight table must be " + std::to_string(r) + " x " +
                              std::to_string(n));
    }
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!std::isfinite(weights.b(j, k))) {
                throw InvalidArgument("weight table has a non-finite entry");
            }
            if (weights.b(j, k) == 0.0) {
                throw ZeroWeight(static_cast<std::size_t>(j + 1), static_cast<std::size_t>(k + 1));
            }
        }
    }
}

std::vector<Vector> index_vectors(int m) {
    if (m < 1) {
        throw InvalidArgument("index_vectors needs m >= 1");
    }
    std::vector<Vector> vs;
    for (int j = 1; j <= m; ++j) {
        Vector v = Vector::Ones(m);
        for (int i = m - j + 1; i < m; ++i) {
            v[i] = -1.0;
        }
        vs.push_back(std::move(v));
    }
    return vs;
}

Matrix cal_I(int m) {
    const auto vs = index_vectors(m);
    Matrix out(m, m);
    for (int j = 0; j < m; ++j) {
        out.col(j) = vs[static_cast<std::size_t>(j)];
    }
    return out;
}

SignedWeights cal_I_B(const WeightTable& weights, const FrequencyTarget& target) {
    validate(weights, target);
    const auto n = static_cast<Eigen::Index>(target.size());
    const auto mu = target.offsets();
    SignedWeights out{Matrix(n, n), Matrix::Ones(n, n), Matrix::Constant(n, n, kPlusAngle)};

    for (std::size_t j = 0; j < target.factor_count(); ++j) {
        const auto first = static_cast<Eigen::Index>(mu[j]);
        const auto len = static_cast<Eigen::Index>(mu[j + 1] - mu[j]);
        for (Eigen::Index l = 0; l < len; ++l) {
            const Eigen::Index row = first + l;
            for (Eigen::Index k = 0; k < n; ++k) {
                double sign = 1.0;
                if (k >= first && k < first + len) {
                    // local column kappa carries v_kappa: + in rows 1..len-kappa+1
                    const Eigen::Index kappa = k - first + 1;
                    sign = (l + 1 <= len - kappa + 1) ? 1.0 : -1.0;
                }
                out.signs(row, k) = sign;
                out.target_angles(row, k) = sign > 0 ? kPlusAngle : kMinusAngle;
                out.matrix(row, k) = sign * weights.b(static_cast<Eigen::Index>(j), k);
            }
        }
    }
    return out;
}

Matrix leading_weights(const WeightTable& weights, const FrequencyTarget& target) {
    const auto r = static_cast<Eigen::Index>(target.factor_count());
    const auto mu = target.offsets();
    Matrix lead(r, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) {
            lead(j, i) = weights.b(j, static_cast<Eigen::Index>(mu[static_cast<std::size_t>(i)]));
        }
    }
    return lead;
}

double det_cal_I_B_lemma(const WeightTable& weights, const FrequencyTarget& target) {
    const SignedWeights ib = cal_I_B(weights, target);
    const auto mu = target.offsets();

    double value = 1.0;
    for (std::size_t j = 0; j < target.factor_count(); ++j) {
        const std::size_t len = mu[j + 1] - mu[j];
        for (std::size_t s = 2; s <= len; ++s) {
            value *= -2.0 * weights.b(static_cast<Eigen::Index>(j),
                                      static_cast<Eigen::Index>(s - 1 + mu[j]));
        }
    }
    const Matrix lead = leading_weights(weights, target);
    value *= lead.partialPivLu().determinant();

    const double lu = ib.matrix.partialPivLu().determinant();
    if (lu != 0.0 && std::signbit(lu) != std::signbit(value)) {
        value = -value;
    }
    return value;
}

BasePoint base_point(const FrequencyTarget& target, const WeightTable& weights) {
    validate(target);
    SignedWeights ib = cal_I_B(weights, target);
    const Vector omega = target.flattened();

    double scale = 1.0;
    for (Eigen::Index r = 0; r < ib.matrix.rows(); ++r) {
        scale *= ib.matrix.row(r).norm();
    }
    const Eigen::PartialPivLU<Matrix> lu(ib.matrix);
    const double det = lu.determinant();
    if (!(std::abs(det) > 1e-12 * scale)) {
        throw SingularIB(det);
    }

    Vector amplitudes = lu.solve(omega);
    const double floor = 1e-12 * omega.norm();
    for (Eigen::Index k = 0; k < amplitudes.size(); ++k) {
        if (std::abs(amplitudes[k]) < floor) {
            throw ZeroAmplitude(static_cast<std::size_t>(k + 1), amplitudes[k]);
        }
    }
    return BasePoint{std::move(ib.matrix), std::move(amplitudes), std::move(ib.signs),
                     std::move(ib.target_angles)};
}

std::vector<std::vector<int>> independence_diagnostic(std::span<const double> omegas,
                                                      int max_coeff, double tol) {
    if (max_coeff < 1) {
        throw InvalidArgument("max_coeff must be >= 1");
    }
    if (omegas.empty()) {
        throw InvalidArgument("independence_diagnostic needs at least one frequency");
    }
    const std::size_t n = omegas.size();
    const double combos = std::pow(2.0 * max_coeff + 1.0, static_cast<double>(n));
    if (combos > 1e8) {
        throw BudgetExceeded("(2*max_coeff+1)^n = " + std::to_string(combos) + " exceeds 1e8");
    }

    long double norm2 = 0.0L;
    for (double w : omegas) {
        norm2 += static_cast<long double>(w) * w;
    }
    const long double limit = static_cast<long double>(tol) * std::sqrt(norm2);

    std::vector<std::vector<int>> relations;
    std::vector<int> c(n, -max_coeff);
    while (true) {
        // canonical representative: first nonzero entry positive
        auto first = std::find_if(c.begin(), c.end(), [](int x) { return x != 0; });
        if (first != c.end() && *first > 0) {
            long double dot = 0.0L;
            for (std::size_t i = 0; i < n; ++i) {
                dot += static_cast<long double>(c[i]) * omegas[i];
            }
            if (std::abs(dot) < limit) {
                relations.push_back(c);
            }
        }
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (c[i] < max_coeff) {
                ++c[i];
                break;
            }
            c[i] = -max_coeff;
            if (i == 0) {
                return relations;
            }
        }
    }
}

DelaySearch delay_candidates(const FrequencyTarget& target, const BasePoint& base, double epsilon,
                             std::int64_t budget) {
    if (!(epsilon > 0.0 && epsilon < 0.5 * std::numbers::pi)) {
        throw InvalidArgument("epsilon must lie in (0, pi/2)");
    }
    if (budget < 1) {
        throw InvalidArgument("search budget must be positive");
    }
    const Vector omega = target.flattened();
    const Eigen::Index n = omega.size();
    if (base.target_angles.rows() != n || base.target_angles.cols() != n) {
        throw InvalidArgument("base point does not match the frequency target");
    }

    const double step = kTwoPi / (omega.maxCoeff() * kStepsPerTurn);
    // a grid point is within omega_max * step / 2 of any hit inside the window
    const double trigger = epsilon + omega.maxCoeff() * step;

    DelaySearch out{Vector(n), std::vector<double>(static_cast<std::size_t>(n))};
    for (Eigen::Index k = 0; k < n; ++k) {
        // identical target columns share one sweep
        std::optional<Eigen::Index> same;
        for (Eigen::Index p = 0; p < k; ++p) {
            if (base.target_angles.col(p) == base.target_angles.col(k)) {
                same = p;
                break;
            }
        }
        if (same) {
            out.taus[k] = out.taus[*same];
            out.distances[static_cast<std::size_t>(k)] = out.distances[static_cast<std::size_t>(*same)];
            continue;
        }

        const auto angles = base.target_angles.col(k);
        double best = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::int64_t i = 0; i < budget && !found; ++i) {
            const double tau = static_cast<double>(i) * step;
            const double d = max_angle_error(omega, angles, tau);
            best = std::min(best, d);
            if (d >= trigger) {
                continue;
            }
            const double hit = refine_hit(omega, angles, tau);
            const double dh = max_angle_error(omega, angles, hit);
            best = std::min(best, dh);
            if (hit > 0.0 && dh < epsilon) {
                out.taus[k] = hit;
                out.distances[static_cast<std::size_t>(k)] = dh;
                found = true;
            }
        }
        if (!found) {
            throw SearchExhausted(static_cast<std::size_t>(k + 1), best);
        }
    }
    return out;
}

Vector system_residual(const Vector& taus, const Vector& coeffs, const FrequencyTarget& target,
                       const WeightTable& weights) {
    check_shapes(taus, coeffs, target, weights);
    return stack(complex_residual(taus, coeffs, target.flattened(), target.row_factor(), weights.b));
}

Matrix system_jacobian(const Vector& taus, const Vector& coeffs, const FrequencyTarget& target,
                       const WeightTable& weights) {
    check_shapes(taus, coeffs, target, weights);
    return jacobian_for(taus, coeffs, target.flattened(), target.row_factor(), weights.b);
}

ScalarFactor factor_of(const Vector& taus, const Vector& coeffs, const WeightTable& weights,
                       std::size_t j) {
    ScalarFactor f;
    for (Eigen::Index k = 0; k < taus.size(); ++k) {
        f.terms.push_back(Term{coeffs[k], weights.b(static_cast<Eigen::Index>(j), k), taus[k]});
    }
    return f;
}

double target_residual(const Vector& taus, const Vector& coeffs, const FrequencyTarget& target,
                       const WeightTable& weights) {
    check_shapes(taus, coeffs, target, weights);
    double worst = 0.0;
    for (std::size_t j = 0; j < target.factor_count(); ++j) {
        const ScalarFactor f = factor_of(taus, coeffs, weights, j);
        worst = std::max(worst, quasipoly::residual_on_targets(f, target.groups[j]));
    }
    return worst;
}

RealizationResult newton_refine(const Vector& taus0, const Vector& coeffs0,
                                const FrequencyTarget& target, const WeightTable& weights,
                                double tol, int max_iter) {
    check_shapes(taus0, coeffs0, target, weights);
    if (!(tol > 0.0) || max_iter < 0) {
        throw InvalidArgument("newton_refine needs tol > 0 and max_iter >= 0");
    }
    const Eigen::Index n = taus0.size();
    const auto owner = target.row_factor();

    // Work at max omega = 1: (tau, a) solves omega iff (c tau, a / c) solves omega / c.
    const Vector omega_full = target.flattened();
    const double c = omega_full.maxCoeff();
    const Vector omega = omega_full / c;
    const double tol_scaled = tol / c;

    Vector taus = taus0 * c;
    Vector coeffs = coeffs0 / c;
    Eigen::VectorXcd z = complex_residual(taus, coeffs, omega, owner, weights.b);

    int iterations = 0;
    while (true) {
        const double res = z.cwiseAbs().maxCoeff();
        if (res < tol_scaled) {
            break;
        }
        if (iterations >= max_iter) {
            throw NoConvergence("Newton iteration limit reached", res * c);
        }

        const Matrix jac = jacobian_for(taus, coeffs, omega, owner, weights.b);
        Eigen::FullPivLU<Matrix> lu(jac);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) {
            throw SingularJacobian("Jacobian of the realization system is singular");
        }
        const Vector f = stack(z);
        const Vector dx = lu.solve(-f);

        const double merit = f.norm();
        double t = 1.0;
        bool accepted = false;
        Vector trial_taus;
        Vector trial_coeffs;
        Eigen::VectorXcd trial_z;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            trial_taus = taus + t * dx.head(n);
            trial_coeffs = coeffs + t * dx.tail(n);
            trial_z = complex_residual(trial_taus, trial_coeffs, omega, owner, weights.b);
            if (stack(trial_z).norm() <= (1.0 - 1e-4 * t) * merit) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw NoConvergence("line search failed to reduce the residual", res * c);
        }
        if ((trial_taus.array() <= 0.0).any()) {
            throw LeftDomain("a delay became non-positive during Newton refinement");
        }
        taus = std::move(trial_taus);
        coeffs = std::move(trial_coeffs);
        z = std::move(trial_z);
        ++iterations;
    }

    if ((taus.array() <= 0.0).any()) {
        throw LeftDomain("starting delays must be positive");
    }
    if ((coeffs.array() == 0.0).any()) {
        throw LeftDomain("a coefficient vanished at the converged point");
    }

    RealizationResult out;
    out.taus = taus / c;
    out.coeffs = coeffs * c;
    out.newton_iterations = iterations;
    out.residual = target_residual(out.taus, out.coeffs, target, weights);
    return out;
}

RealizationResult realize(const FrequencyTarget& target, const WeightTable& weights,
                          const RealizationConfig& config) {
    if (!(config.tol > 0.0)) {
        throw InvalidArgument("tolerance must be positive");
    }
    if (config.epsilon_schedule.empty()) {
        throw InvalidArgument("epsilon schedule is empty");
    }
    validate(target);
    validate(weights, target);
    const BasePoint base = base_point(target, weights);

    std::optional<SearchExhausted> exhausted;
    std::optional<NoConvergence> diverged;
    std::string last_failure;
    for (double eps : config.epsilon_schedule) {
        DelaySearch search;
        try {
            search = delay_candidates(target, base, eps, config.budget);
        } catch (const SearchExhausted& e) {
            exhausted = e;
            continue;
        }
        try {
            RealizationResult res =
                newton_refine(search.taus, base.amplitudes, target, weights, config.tol,
                              config.max_iter);
            if (!(res.residual < config.tol)) {
                diverged = NoConvergence("refined point fails the residual check", res.residual);
                continue;
            }
            res.search_window = search.distances;
            res.epsilon = eps;
            res.base = base;
            return res;
        } catch (const NoConvergence& e) {
            diverged = e;
        } catch (const NumericError& e) {
            last_failure = e.what();
        }
    }
    if (diverged) {
        throw *diverged;
    }
    if (exhausted) {
        throw *exhausted;
    }
    throw NoConvergence("no epsilon in the schedule produced a realization: " + last_failure,
                        std::numeric_limits<double>::infinity());
}

RealizationResult continue_realization(const RealizationResult& result,
                                       const FrequencyTarget& new_target,
                                       const WeightTable& weights,
                                       const ContinuationConfig& config) {
    validate(new_target);
    RealizationResult next =
        newton_refine(result.taus, result.coeffs, new_target, weights, config.tol, config.max_iter);
    next.search_window = result.search_window;
    next.epsilon = result.epsilon;
    next.base = result.base;
    return next;
}

namespace {

// NOLINTNEXTLINE(misc-no-recursion)
RealizationResult walk(const RealizationResult& start, const FrequencyTarget& shape,
                       const Vector& from, const Vector& to, const WeightTable& weights,
                       int depth, int max_depth, const ContinuationConfig& config, int& steps) {
    try {
        RealizationResult r = continue_realization(start, with_values(shape, to), weights, config);
        ++steps;
        return r;
    } catch (const NumericError&) {
        if (depth >= max_depth) {
            throw;
        }
    }
    const Vector mid = 0.5 * (from + to);
    const RealizationResult half =
        walk(start, shape, from, mid, weights, depth + 1, max_depth, config, steps);
    return walk(half, shape, mid, to, weights, depth + 1, max_depth, config, steps);
}

}  // namespace

ContinuationPath continue_with_bisection(const RealizationResult& result,
                                         const FrequencyTarget& from, const FrequencyTarget& to,
                                         const WeightTable& weights, int max_depth,
                                         const ContinuationConfig& config) {
    if (from.group_sizes() != to.group_sizes()) {
        throw InvalidArgument("continuation endpoints must share the group layout");
    }
    ContinuationPath path;
    path.result = walk(result, from, from.flattened(), to.flattened(), weights, 0, max_depth,
                       config, path.substeps);
    return path;
}

double transversality_at_base(const FrequencyTarget& target, const WeightTable& weights) {
    const BasePoint base = base_point(target, weights);
    const Vector omega = target.flattened();
    const Eigen::Index n = omega.size();
    const auto owner = target.row_factor();
    const Vector& a = base.amplitudes;

    // DG_Psi W_k = -(a_k / a_n) D_n^{-1} D_k omega with D_k = diag(I_B(:, k)); the
    // determinant factors row-wise into the closed form below.
    double value = omega.prod() * base.cal_ib.partialPivLu().determinant();
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        value *= -a[k] / a[n - 1];
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        value /= weights.b(static_cast<Eigen::Index>(owner[static_cast<std::size_t>(r)]), n - 1) *
                 base.sign_matrix(r, n - 1);
    }
    return value;
}

}  // namespace realization
}  // namespace sforge
