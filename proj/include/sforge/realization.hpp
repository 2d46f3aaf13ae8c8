#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "sforge/quasipoly.hpp"

namespace sforge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * @brief Prescribed positive frequencies, partitioned across r factors
 *
 * Group j holds the frequencies that must become roots i*omega of factor j.
 * Rows of every n x n object in this module follow the flattened order
 * (group 1 first), columns follow the delay index k.
 */
struct FrequencyTarget {
    std::vector<std::vector<double>> groups;

    [[nodiscard]] static FrequencyTarget single(std::vector<double> omegas);

    [[nodiscard]] std::size_t factor_count() const { return groups.size(); }
    /// Total number of frequencies n (= number of delays).
    [[nodiscard]] std::size_t size() const;
    /// l_j for each group.
    [[nodiscard]] std::vector<std::size_t> group_sizes() const;
    /// mu_0 = 0, mu_j = l_1 + ... + l_j; r + 1 entries.
    [[nodiscard]] std::vector<std::size_t> offsets() const;
    [[nodiscard]] Vector flattened() const;
    /// Factor index (0-based) owning each flattened row.
    [[nodiscard]] std::vector<std::size_t> row_factor() const;
};

/// b(j, k): weight of coefficient a_k inside factor j (r x n).
struct WeightTable {
    Matrix b;

    [[nodiscard]] static WeightTable ones(std::size_t factors, std::size_t columns);
};

/// Sign/weight matrix I_B together with the sign pattern and target phase angles.
struct SignedWeights {
    Matrix matrix;         // I_B
    Matrix signs;          // entries +1 / -1
    Matrix target_angles;  // 3pi/2 where sign is +, pi/2 where sign is -
};

struct BasePoint {
    Matrix cal_ib;
    Vector amplitudes;  // I_B^{-1} omega
    Matrix sign_matrix;
    Matrix target_angles;
};

struct RealizationConfig {
    double tol = 1e-10;
    std::vector<double> epsilon_schedule{0.4, 0.3, 0.2, 0.1};
    std::int64_t budget = 10'000'000;
    int max_iter = 50;
    std::uint64_t seed = 0;
};

struct RealizationResult {
    Vector taus;
    Vector coeffs;
    double residual = 0.0;
    int newton_iterations = 0;
    std::vector<double> search_window;  // per-delay angular error of the search start (rad)
    double epsilon = 0.0;               // schedule entry that produced the start
    BasePoint base;
};

struct DelaySearch {
    Vector taus;
    std::vector<double> distances;  // max angular error per delay
};

namespace realization {

/// Rejects empty groups, non-positive or non-finite frequencies and exact duplicates.
void validate(const FrequencyTarget& target);
/// Shape check against the target; zero entries raise ZeroWeight.
void validate(const WeightTable& weights, const FrequencyTarget& target);

/// v_1 = (1,...,1); v_j flips the last j-1 entries to -1.
[[nodiscard]] std::vector<Vector> index_vectors(int m);

/// Matrix whose j-th column is v_j.
[[nodiscard]] Matrix cal_I(int m);

[[nodiscard]] SignedWeights cal_I_B(const WeightTable& weights, const FrequencyTarget& target);

/// Leading-weight matrix B: entry (j, i) = b_{1 + mu_{i-1}}^j.
[[nodiscard]] Matrix leading_weights(const WeightTable& weights, const FrequencyTarget& target);

/**
 * @brief Closed-form determinant of I_B
 *
 * prod_j [(-2)^{l_j - 1} prod_{s=2}^{l_j} b_{s + mu_{j-1}}^j] * det B. The block
 * expansion only fixes the value up to a global sign; the sign is taken from one
 * LU evaluation of I_B.
 */
[[nodiscard]] double det_cal_I_B_lemma(const WeightTable& weights, const FrequencyTarget& target);

[[nodiscard]] BasePoint base_point(const FrequencyTarget& target, const WeightTable& weights);

/**
 * Integer vectors c != 0 with |c_i| <= max_coeff and |c . omega| < tol * |omega|.
 * Only one of c, -c is listed (first nonzero entry positive). Warn-only.
 */
[[nodiscard]] std::vector<std::vector<int>> independence_diagnostic(std::span<const double> omegas,
                                                                    int max_coeff, double tol);

/// For each delay k, a tau_k > 0 with every angle omega_r tau_k within epsilon of
/// target_angles(r, k) (mod 2 pi): the best point of the earliest such window along the
/// sweep. Budget counts sweep steps per delay.
[[nodiscard]] DelaySearch delay_candidates(const FrequencyTarget& target, const BasePoint& base,
                                           double epsilon, std::int64_t budget);

/// Real residual of the 2n equations, rows ordered (Re row 1..n, Im row 1..n).
[[nodiscard]] Vector system_residual(const Vector& taus, const Vector& coeffs,
                                     const FrequencyTarget& target, const WeightTable& weights);

/// Jacobian of system_residual with respect to (taus, coeffs).
[[nodiscard]] Matrix system_jacobian(const Vector& taus, const Vector& coeffs,
                                     const FrequencyTarget& target, const WeightTable& weights);

/// max over all targets of |Delta_j(i omega_l^j)|.
[[nodiscard]] double target_residual(const Vector& taus, const Vector& coeffs,
                                     const FrequencyTarget& target, const WeightTable& weights);

/// Characteristic factor j built from a realization: terms (a_k, b_k^j, tau_k).
[[nodiscard]] ScalarFactor factor_of(const Vector& taus, const Vector& coeffs,
                                     const WeightTable& weights, std::size_t j);

[[nodiscard]] RealizationResult newton_refine(const Vector& taus0, const Vector& coeffs0,
                                              const FrequencyTarget& target,
                                              const WeightTable& weights, double tol,
                                              int max_iter);

[[nodiscard]] RealizationResult realize(const FrequencyTarget& target, const WeightTable& weights,
                                        const RealizationConfig& config = {});

struct ContinuationConfig {
    double tol = 1e-10;
    int max_iter = 8;
};

/// One Newton continuation step from a converged realization to a nearby target.
[[nodiscard]] RealizationResult continue_realization(const RealizationResult& result,
                                                     const FrequencyTarget& new_target,
                                                     const WeightTable& weights,
                                                     const ContinuationConfig& config = {});

struct ContinuationPath {
    RealizationResult result;
    int substeps = 0;
};

/// Walks from `from` to `to` along the straight segment, bisecting any step that fails.
[[nodiscard]] ContinuationPath continue_with_bisection(const RealizationResult& result,
                                                       const FrequencyTarget& from,
                                                       const FrequencyTarget& to,
                                                       const WeightTable& weights,
                                                       int max_depth = 10,
                                                       const ContinuationConfig& config = {});

/**
 * @brief Transversality determinant at the base point
 *
 * T = prod(omega) prod_{k<n} a_k / a_n^{n-1} * (-1)^{n-1} / prod_rows(b_n s_n) * det I_B,
 * which reduces to prod(omega) prod_{k<n} a_k / a_n^{n-1} * det I when r = 1.
 * For n = 1 the value is omega_1.
 */
[[nodiscard]] double transversality_at_base(const FrequencyTarget& target,
                                            const WeightTable& weights);

}  // namespace realization
}  // namespace sforge
