#include "sforge/dn_ring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <tuple>

#include "sforge/errors.hpp"

namespace sforge::dn_ring {

namespace {

void require_ring_size(int n) {
    if (n < 3) {
        throw InvalidArgument("a ring needs n >= 3 cells, got " + std::to_string(n));
    }
}

// cos(2 pi m / n) with m folded into 0..n/2 first, so equal cosines give equal doubles.
[[nodiscard]] double cos_frac(long long m, int n) {
    long long r = ((m % n) + n) % n;
    r = std::min(r, n - r);
    if (r == 0) {
        return 1.0;
    }
    if (2 * r == n) {
        return -1.0;
    }
    if (4 * r == n) {
        return 0.0;
    }
    return std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / n);
}

void check_odd_indices(int n, const std::vector<int>& indices) {
    if (n % 2 == 0) {
        throw BadParity("the leading-weight construction needs odd n, got " + std::to_string(n));
    }
    require_ring_size(n);
    if (indices.empty()) {
        throw BadIndex("no factor indices given");
    }
    for (std::size_t p = 0; p < indices.size(); ++p) {
        if (indices[p] < 0 || indices[p] > (n - 1) / 2) {
            throw BadIndex("factor index " + std::to_string(indices[p]) + " outside 0.." +
                           std::to_string((n - 1) / 2));
        }
        if (p > 0 && indices[p] <= indices[p - 1]) {
            throw BadIndex("factor indices must be strictly increasing");
        }
    }
}

}  // namespace

int max_coupling_index(int n) {
    require_ring_size(n);
    return n % 2 == 1 ? (n + 1) / 2 : n / 2 + 1;
}

EquivarianceReport validate_equivariance(const ConnectionList& conns) {
    EquivarianceReport report;
    const int n = conns.n;
    if (n < 1) {
        report.ok = false;
        report.condition = "index";
        report.message = "ring size must be positive";
        return report;
    }
    for (const auto& e : conns.edges) {
        if (e.from < 1 || e.from > n || e.to < 1 || e.to > n) {
            report.ok = false;
            report.condition = "index";
            report.edge = e;
            report.message = "cell index outside 1.." + std::to_string(n);
            return report;
        }
    }

    // (i) class = (offset, tag, delay); a rotation-invariant list hits each cell equally.
    using Key = std::tuple<int, std::string, double>;
    std::map<Key, std::vector<int>> per_target;
    std::map<Key, std::size_t> first_edge;
    for (std::size_t idx = 0; idx < conns.edges.size(); ++idx) {
        const auto& e = conns.edges[idx];
        const Key key{((e.from - e.to) % n + n) % n, e.tag, e.delay};
        auto& counts = per_target[key];
        if (counts.empty()) {
            counts.assign(static_cast<std::size_t>(n), 0);
            first_edge[key] = idx;
        }
        ++counts[static_cast<std::size_t>(e.to - 1)];
    }
    std::optional<Key> worst;
    int worst_size = 0;
    for (const auto& [key, counts] : per_target) {
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        if (*lo == *hi) {
            continue;
        }
        int size = 0;
        for (int c : counts) {
            size += c;
        }
        if (!worst || size < worst_size) {
            worst = key;
            worst_size = size;
        }
    }
    if (worst) {
        report.ok = false;
        report.condition = "(i)";
        report.edge = conns.edges[first_edge[*worst]];
        report.message = "edge class is not invariant under rotation of the ring";
        return report;
    }

    // (ii) every edge needs an identical reverse
    std::multiset<std::tuple<int, int, std::string, double>> pool;
    for (const auto& e : conns.edges) {
        pool.emplace(e.from, e.to, e.tag, e.delay);
    }
    for (const auto& e : conns.edges) {
        if (pool.count({e.to, e.from, e.tag, e.delay}) != pool.count({e.from, e.to, e.tag, e.delay})) {
            report.ok = false;
            report.condition = "(ii)";
            report.edge = e;
            report.message = "edge has no identical reverse connection";
            return report;
        }
    }
    return report;
}

ConnectionList connections_of(const RingSpec& ring) {
    validate(ring);
    const int n = ring.n;
    ConnectionList out{n, {}};
    for (const auto& [k, profile] : ring.couplings) {
        const int d = k - 1;
        const bool opposite = (n % 2 == 0) && (2 * d == n);
        for (int to = 1; to <= n; ++to) {
            for (const auto& atom : profile.atoms) {
                const std::string tag = "k" + std::to_string(k);
                out.edges.push_back({(to - 1 + d) % n + 1, to, atom.delay, tag});
                if (!opposite) {
                    out.edges.push_back({(to - 1 - d + n) % n + 1, to, atom.delay, tag});
                }
            }
        }
    }
    return out;
}

double factor_weight(int n, int k, int j) {
    const int kmax = max_coupling_index(n);
    if (k < 2 || k > kmax) {
        throw BadIndex("coupling index " + std::to_string(k) + " outside 2.." +
                       std::to_string(kmax));
    }
    if (j < 0 || j >= n) {
        throw BadIndex("factor index " + std::to_string(j) + " outside 0.." + std::to_string(n - 1));
    }
    if (n % 2 == 0 && k == kmax) {
        return j % 2 == 0 ? 1.0 : -1.0;
    }
    return 2.0 * cos_frac(static_cast<long long>(k - 1) * j, n);
}

std::vector<double> factor_weights(int n, int j) {
    std::vector<double> w;
    for (int k = 2; k <= max_coupling_index(n); ++k) {
        w.push_back(factor_weight(n, k, j));
    }
    return w;
}

void validate(const RingSpec& ring) {
    const int kmax = max_coupling_index(ring.n);
    if (ring.internal.atoms.empty()) {
        throw InvalidArgument("internal profile must not be empty");
    }
    auto check = [](const CouplingProfile& p, const std::string& name) {
        for (const auto& a : p.atoms) {
            if (!std::isfinite(a.coeff) || !std::isfinite(a.delay) || a.delay < 0.0) {
                throw InvalidArgument(name + " has a non-finite entry or negative delay");
            }
        }
    };
    check(ring.internal, "internal profile");
    for (const auto& [k, profile] : ring.couplings) {
        if (k < 2 || k > kmax) {
            throw BadIndex("coupling index " + std::to_string(k) + " outside 2.." +
                           std::to_string(kmax));
        }
        check(profile, "coupling " + std::to_string(k));
    }
}

ScalarFactor ring_factor(const RingSpec& ring, int j) {
    validate(ring);
    if (j < 0 || j >= ring.n) {
        throw BadIndex("factor index " + std::to_string(j) + " outside 0.." +
                       std::to_string(ring.n - 1));
    }
    ScalarFactor f;
    for (const auto& atom : ring.internal.atoms) {
        f.terms.push_back(Term{atom.coeff, 1.0, atom.delay});
    }
    for (const auto& [k, profile] : ring.couplings) {
        const double w = factor_weight(ring.n, k, j);
        for (const auto& atom : profile.atoms) {
            f.terms.push_back(Term{atom.coeff, w, atom.delay});
        }
    }
    return f;
}

CharProduct characteristic_factorization(const RingSpec& ring) {
    validate(ring);
    const int n = ring.n;
    const int last = n / 2;  // (n-1)/2 for odd n
    CharProduct product;
    for (int j = 0; j <= last; ++j) {
        ScalarFactor f = ring_factor(ring, j);
        const bool single = (j == 0) || (n % 2 == 0 && j == last);
        f.multiplicity = single ? 1 : 2;
        product.factors.push_back(std::move(f));
    }
    return product;
}

Matrix build_B(int n, const std::vector<int>& indices, double scale) {
    check_odd_indices(n, indices);
    if (!std::isfinite(scale) || scale == 0.0) {
        throw InvalidArgument("scale must be finite and nonzero");
    }
    const auto s = static_cast<Eigen::Index>(indices.size());
    Matrix b(s, s);
    for (Eigen::Index p = 0; p < s; ++p) {
        for (Eigen::Index q = 0; q < s; ++q) {
            const int ip = indices[static_cast<std::size_t>(p)];
            const int iq = indices[static_cast<std::size_t>(q)];
            b(p, q) = iq == 0 ? 1.0 : scale * cos_frac(static_cast<long long>(ip) * iq, n);
        }
    }
    return b;
}

double det_B_two_factor(int n, int i1, int i2) {
    check_odd_indices(n, {i1, i2});
    if (i1 < 1) {
        throw BadIndex("closed form needs 1 <= i1 < i2");
    }
    const long long a = i1;
    const long long b = i2;
    return 8.0 * (cos_frac(a * a + b * b, n) + cos_frac(a * a - b * b, n) -
                  cos_frac(2 * a * b, n) - 1.0);
}

std::vector<std::pair<int, int>> detect_even_degeneracy(int n) {
    if (n % 2 != 0) {
        throw BadParity("degeneracy detection applies to even n, got " + std::to_string(n));
    }
    require_ring_size(n);
    std::vector<std::pair<int, int>> zeros;
    for (int k = 2; k <= n / 2; ++k) {
        for (int j = 0; j < n; ++j) {
            // 2 cos(2 pi m / n) = 0 exactly when 4 m / n is an odd integer
            const long long m4 = 4LL * (k - 1) * j;
            if (m4 % n == 0 && (m4 / n) % 2 == 1) {
                zeros.emplace_back(k, j);
            }
        }
    }
    return zeros;
}

std::vector<int> default_layout(const std::vector<int>& indices, const FrequencyTarget& target) {
    if (indices.size() != target.factor_count()) {
        throw InvalidArgument("need one factor index per frequency group");
    }
    std::vector<int> layout;
    for (std::size_t q = 0; q < indices.size(); ++q) {
        layout.insert(layout.end(), target.groups[q].size(), indices[q]);
    }
    return layout;
}

WeightTable ring_weight_table(int n, const std::vector<int>& indices,
                              const std::vector<int>& layout) {
    const int kmax = max_coupling_index(n);
    const auto r = static_cast<Eigen::Index>(indices.size());
    const auto cols = static_cast<Eigen::Index>(layout.size());
    WeightTable w{Matrix(r, cols)};
    for (Eigen::Index p = 0; p < r; ++p) {
        const int j = indices[static_cast<std::size_t>(p)];
        for (Eigen::Index c = 0; c < cols; ++c) {
            const int m = layout[static_cast<std::size_t>(c)];
            if (m < 0 || m + 1 > kmax) {
                throw BadIndex("layout entry " + std::to_string(m) + " outside 0.." +
                               std::to_string(kmax - 1));
            }
            w.b(p, c) = m == 0 ? 1.0 : factor_weight(n, m + 1, j);
        }
    }
    return w;
}

RingRealization realize_ring(int n, const std::vector<int>& indices, const FrequencyTarget& target,
                             const std::vector<int>& layout, const RealizationConfig& config) {
    check_odd_indices(n, indices);
    realization::validate(target);
    if (indices.size() != target.factor_count()) {
        throw InvalidArgument("need one factor index per frequency group");
    }
    std::vector<int> cols = layout.empty() ? default_layout(indices, target) : layout;
    if (cols.size() != target.size()) {
        throw InvalidArgument("layout must list one profile per frequency (" +
                              std::to_string(target.size()) + ")");
    }
    WeightTable weights = ring_weight_table(n, indices, cols);

    const Matrix lead = realization::leading_weights(weights, target);
    double scale = 1.0;
    for (Eigen::Index p = 0; p < lead.rows(); ++p) {
        scale *= lead.row(p).norm();
    }
    const double det = lead.partialPivLu().determinant();
    if (!(std::abs(det) > 1e-12 * scale)) {
        throw SingularB(det);
    }

    RingRealization out;
    out.result = realization::realize(target, weights, config);
    out.ring.n = n;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const DelayAtom atom{out.result.coeffs[static_cast<Eigen::Index>(c)],
                             out.result.taus[static_cast<Eigen::Index>(c)]};
        if (cols[c] == 0) {
            out.ring.internal.atoms.push_back(atom);
        } else {
            out.ring.couplings[cols[c] + 1].atoms.push_back(atom);
        }
    }
    if (out.ring.internal.atoms.empty()) {
        out.ring.internal.atoms.push_back(DelayAtom{0.0, 0.0});
    }
    out.target = target;
    out.weights = std::move(weights);
    out.layout = std::move(cols);
    return out;
}

}  // namespace sforge::dn_ring
