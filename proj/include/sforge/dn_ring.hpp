#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sforge/quasipoly.hpp"
#include "sforge/realization.hpp"

namespace sforge {

/// One point-delay atom: coefficient times a step kernel jumping at `delay`.
struct DelayAtom {
    double coeff = 0.0;
    double delay = 0.0;
};

/// Sum of step kernels; an empty profile means "not connected".
struct CouplingProfile {
    std::vector<DelayAtom> atoms;
};

/**
 * @brief Ring of n identical one-dimensional cells with dihedral symmetry
 *
 * `internal` holds the cell's own delayed feedback. `couplings[k]` is the profile a
 * cell receives from the cells at ring distance k - 1 (both sides). For odd n,
 * k runs over 2..(n+1)/2; for even n, k = n/2 + 1 is the single opposite cell.
 */
struct RingSpec {
    int n = 0;
    CouplingProfile internal;
    std::map<int, CouplingProfile> couplings;
};

/// Directed edge `from -> to` (1-based cells). `tag` names the coupling kind.
struct Connection {
    int from = 1;
    int to = 1;
    double delay = 0.0;
    std::string tag;

    friend bool operator==(const Connection&, const Connection&) = default;
};

struct ConnectionList {
    int n = 0;
    std::vector<Connection> edges;
};

struct EquivarianceReport {
    bool ok = true;
    std::string condition;  // "(i)", "(ii)" or "index" when failing
    std::optional<Connection> edge;
    std::string message;
};

struct RingRealization {
    RingSpec ring;
    RealizationResult result;
    FrequencyTarget target;
    WeightTable weights;
    std::vector<int> layout;  // per-column profile id: 0 internal, m >= 1 coupling k = m + 1
};

namespace dn_ring {

/// Largest coupling index stored for an n-cell ring.
[[nodiscard]] int max_coupling_index(int n);

/**
 * @brief Checks rotation invariance (i) and reversibility (ii) of a connection list
 *
 * (i): every edge class (ring offset, tag, delay) reaches every cell equally often.
 * (ii): every edge has an identical edge in the opposite direction.
 */
[[nodiscard]] EquivarianceReport validate_equivariance(const ConnectionList& conns);

/// All edges implied by a RingSpec; tags are "k2", "k3", ...
[[nodiscard]] ConnectionList connections_of(const RingSpec& ring);

/**
 * Weight c_k(j) of coupling k inside factor j: 2 cos(2 pi (k - 1) j / n) for paired
 * neighbours, (-1)^j for the opposite cell of an even ring. Exact zeros are returned
 * as 0.0.
 */
[[nodiscard]] double factor_weight(int n, int k, int j);

/// c_k(j) for k = 2..max_coupling_index(n); element 0 is k = 2.
[[nodiscard]] std::vector<double> factor_weights(int n, int j);

void validate(const RingSpec& ring);

/// Delta_j(lambda) = lambda - sum internal - sum_k c_k(j) * coupling_k (multiplicity 1).
[[nodiscard]] ScalarFactor ring_factor(const RingSpec& ring, int j);

/// Block-diagonal form of det Delta(lambda): Delta_0, Delta_j^2 (paired), Delta_{n/2} (even n).
[[nodiscard]] CharProduct characteristic_factorization(const RingSpec& ring);

/**
 * @brief Leading-weight matrix of a ring realization
 *
 * Entry (p, q) is 1 when i_q = 0 (internal term) and scale * cos(2 pi i_p i_q / n)
 * otherwise. scale = 2 matches factor_weight; scale = 4 reproduces the classical
 * printed form. Singularity does not depend on the scale.
 */
[[nodiscard]] Matrix build_B(int n, const std::vector<int>& indices, double scale);

/// det build_B(n, (i1, i2), 4) in closed form; needs 1 <= i1 < i2 <= (n - 1) / 2.
[[nodiscard]] double det_B_two_factor(int n, int i1, int i2);

/// Pairs (k, j) with c_k(j) == 0 for an even ring, j in 0..n-1.
[[nodiscard]] std::vector<std::pair<int, int>> detect_even_degeneracy(int n);

/// Default layout: every column of block q uses profile indices[q].
[[nodiscard]] std::vector<int> default_layout(const std::vector<int>& indices,
                                              const FrequencyTarget& target);

/// Row p is factor indices[p]; column k has weight 1 (internal) or c_{m+1}(indices[p]).
[[nodiscard]] WeightTable ring_weight_table(int n, const std::vector<int>& indices,
                                            const std::vector<int>& layout);

/**
 * @brief Realizes target groups as roots of the ring factors Delta_{indices[p]}
 *
 * Throws BadParity for even n and SingularB when the leading weights are singular.
 * An empty layout selects default_layout. When no column is internal the ring gets a
 * zero internal atom so that the RingSpec stays well formed.
 */
[[nodiscard]] RingRealization realize_ring(int n, const std::vector<int>& indices,
                                           const FrequencyTarget& target,
                                           const std::vector<int>& layout = {},
                                           const RealizationConfig& config = {});

}  // namespace dn_ring
}  // namespace sforge
