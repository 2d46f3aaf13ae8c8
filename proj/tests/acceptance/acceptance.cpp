// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance          run every criterion, exit 1 if any fails
//   acceptance <id>     run a single criterion (1..11)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sforge/cli.hpp"
#include "sforge/dn_ring.hpp"
#include "sforge/errors.hpp"
#include "sforge/quasipoly.hpp"
#include "sforge/realization.hpp"
#include "sforge/spectrum.hpp"

using namespace sforge;

namespace {

namespace tol {
constexpr double kClosedForm = 1e-12;
constexpr double kExactBranch = 1e-15;
constexpr double kRealization = 1e-9;
constexpr double kScalingFloor = 1e-12;
constexpr double kLemmaRel = 1e-10;
constexpr double kDenseDet = 1e-8;
constexpr double kTwoFactorDet = 1e-8;
constexpr double kTwoFactorAgree = 1e-10;
constexpr double kFactorizationRel = 1e-10;
constexpr double kEigenOracle = 1e-12;
constexpr double kContinuation = 1e-10;
constexpr int kContinuationIters = 5;
constexpr double kConjugatePairing = 1e-9;
constexpr double kVerify = 1e-9;
}  // namespace tol

namespace budget {
constexpr double kClosedFormSeconds = 1.0;
constexpr double kInstanceSeconds = 60.0;
constexpr double kLemmaSeconds = 5.0;
constexpr double kSweepSeconds = 30.0;
}  // namespace budget

const std::string kData = SFORGE_TEST_DATA;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void fail(const std::string& why) {
        if (pass) {
            detail.str("");
        }
        pass = false;
        detail << why << "; ";
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Instance {
    std::string name;
    FrequencyTarget target;
    WeightTable weights;
    RealizationResult result;
    double seconds = 0.0;
};

const std::vector<double> kOmegas{1.0, std::sqrt(2.0), std::sqrt(3.0), std::sqrt(5.0), std::sqrt(7.0)};

// Scalar realizations of the omega prefixes, n = 2..5, computed once per process.
const std::vector<Instance>& scalar_instances() {
    static const std::vector<Instance> cache = [] {
        std::vector<Instance> out;
        for (std::size_t n = 2; n <= 5; ++n) {
            Instance in;
            in.name = "n=" + std::to_string(n);
            in.target = FrequencyTarget::single({kOmegas.begin(), kOmegas.begin() + static_cast<long>(n)});
            in.weights = WeightTable::ones(1, n);
            const auto t0 = Clock::now();
            in.result = realization::realize(in.target, in.weights);
            in.seconds = seconds_since(t0);
            out.push_back(std::move(in));
        }
        return out;
    }();
    return cache;
}

FrequencyTarget scaled(const FrequencyTarget& t, double c) {
    FrequencyTarget s = t;
    for (auto& g : s.groups) {
        for (double& w : g) {
            w *= c;
        }
    }
    return s;
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    if (out_text != nullptr) {
        *out_text = out.str();
    }
    return code;
}

// Box half width used by verify_realization.
double isolation_delta(const Vector& omega) {
    double gap = 2.0 * omega.minCoeff();
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        for (Eigen::Index k = i + 1; k < omega.size(); ++k) {
            gap = std::min(gap, std::abs(omega[i] - omega[k]));
        }
    }
    return std::min(0.05, 0.5 * gap);
}

bool conjugation_symmetric(const std::vector<Complex>& roots) {
    return std::all_of(roots.begin(), roots.end(), [&](const Complex& r) {
        return std::any_of(roots.begin(), roots.end(), [&](const Complex& s) {
            return std::abs(s - std::conj(r)) < tol::kConjugatePairing;
        });
    });
}

Outcome closed_form() {
    Outcome o;
    const auto t0 = Clock::now();
    const FrequencyTarget t = FrequencyTarget::single({1.0});
    const WeightTable w = WeightTable::ones(1, 1);
    const RealizationResult r = realization::realize(t, w);
    const double elapsed = seconds_since(t0);
    const double at_i = std::abs(quasipoly::evaluate(realization::factor_of(r.taus, r.coeffs, w, 0), Complex{0, 1}));
    if (!(at_i < tol::kClosedForm)) {
        o.fail("|Delta(i)| = " + std::to_string(at_i));
    }
    const ScalarFactor branch{{Term{1.0, 1.0, 1.5 * oracle::kPi}}, 1};
    const double exact = std::abs(oracle::evaluate(branch, Complex{0, 1}));
    if (!(exact < tol::kExactBranch)) {
        o.fail("(3pi/2, 1) leaves " + std::to_string(exact));
    }
    if (elapsed > budget::kClosedFormSeconds) {
        o.fail("took " + std::to_string(elapsed) + " s");
    }
    o.detail << "tau=" << r.taus[0] << " a=" << r.coeffs[0] << " |Delta(i)|=" << at_i
             << " branch residual=" << exact << " (" << elapsed << " s)";
    return o;
}

Outcome scalar_realization() {
    Outcome o;
    for (const Instance& in : scalar_instances()) {
        const RealizationResult& r = in.result;
        const ScalarFactor f = realization::factor_of(r.taus, r.coeffs, in.weights, 0);
        const double independent = quasipoly::residual_on_targets(f, in.target.groups[0]);
        if (!(independent < tol::kRealization) || !(r.residual < tol::kRealization)) {
            o.fail(in.name + " residual " + std::to_string(independent));
        }
        if (r.taus.minCoeff() <= 0.0) {
            o.fail(in.name + " has a non-positive delay");
        }
        if (r.coeffs.cwiseAbs().minCoeff() == 0.0) {
            o.fail(in.name + " has a zero coefficient");
        }
        const Vector omega = in.target.flattened();
        const double d = isolation_delta(omega);
        std::string counts;
        bool isolated = true;
        for (Eigen::Index k = 0; k < omega.size(); ++k) {
            const Region box{-d, d, omega[k] - d, omega[k] + d};
            const int count = spectrum::count_roots(f, box);
            isolated = isolated && count == 1;
            counts += (k == 0 ? "" : ",") + std::to_string(count);
        }
        if (!isolated) {
            std::ostringstream why;
            why << in.name << " root counts (" << counts << ") in +-" << d
                << " boxes, expected about 2d*max(tau)/(2pi)=" << 2.0 * d * r.taus.maxCoeff() / (2.0 * oracle::kPi);
            o.fail(why.str());
        }
        if (in.seconds > budget::kInstanceSeconds) {
            o.fail(in.name + " took " + std::to_string(in.seconds) + " s");
        }
        if (o.pass) {
            o.detail << in.name << ": res=" << independent << " max tau=" << r.taus.maxCoeff() << " ("
                     << in.seconds << " s); ";
        }
    }
    return o;
}

Outcome scaling_covariance() {
    Outcome o;
    double worst_margin = 0.0;
    for (const Instance& in : scalar_instances()) {
        for (double c : {2.0, 1.0 / 3.0}) {
            const Vector taus = in.result.taus / c;
            const Vector coeffs = in.result.coeffs * c;
            const FrequencyTarget t = scaled(in.target, c);
            const double res = realization::target_residual(taus, coeffs, t, in.weights);
            const double bound = tol::kScalingFloor + c * in.result.residual;
            worst_margin = std::max(worst_margin, res / bound);
            if (!(res < bound)) {
                o.fail(in.name + " c=" + std::to_string(c) + " residual " + std::to_string(res));
            }
        }
    }
    o.detail << "8 transformed instances, worst residual/bound = " << worst_margin;
    return o;
}

Outcome determinant_lemma() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> size(1, 8);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
        const auto [t, w] = oracle::random_instance(rng, size(rng));
        const double lemma = realization::det_cal_I_B_lemma(w, t);
        const double lu = realization::cal_I_B(w, t).matrix.partialPivLu().determinant();
        const double rel = std::abs(std::abs(lemma) - std::abs(lu)) / std::abs(lu);
        worst = std::max(worst, rel);
    }
    const double elapsed = seconds_since(t0);
    if (!(worst < tol::kLemmaRel)) {
        o.fail("worst relative error " + std::to_string(worst));
    }
    if (elapsed > budget::kLemmaSeconds) {
        o.fail("took " + std::to_string(elapsed) + " s");
    }
    o.detail << "100 instances, worst rel err " << worst << " (" << elapsed << " s)";
    return o;
}

Outcome d3_split() {
    Outcome o;
    const FrequencyTarget t{{{1.0}, {std::sqrt(2.0)}}};
    const RingRealization rr = dn_ring::realize_ring(3, {0, 1}, t);
    const Matrix table = (Matrix(2, 2) << 1, 2, 1, -1).finished();
    if (!rr.weights.b.isApprox(table, 1e-15)) {
        o.fail("weight table differs from [[1,2],[1,-1]]");
    }
    const double res = realization::target_residual(rr.result.taus, rr.result.coeffs, t, rr.weights);
    if (!(res < tol::kRealization)) {
        o.fail("residual " + std::to_string(res));
    }
    double worst = 0.0;
    for (double w : {1.0, std::sqrt(2.0)}) {
        for (double sign : {1.0, -1.0}) {
            worst = std::max(worst, std::abs(oracle::det(oracle::ring_matrix(rr.ring, Complex{0, sign * w}))));
        }
    }
    if (!(worst < tol::kDenseDet)) {
        o.fail("dense determinant " + std::to_string(worst));
    }
    o.detail << "taus=(" << rr.result.taus[0] << ", " << rr.result.taus[1] << ") a=(" << rr.result.coeffs[0]
             << ", " << rr.result.coeffs[1] << ") residual=" << res << " max|det|=" << worst;
    return o;
}

Outcome d9_singular() {
    Outcome o;
    const Matrix b = dn_ring::build_B(9, {0, 3}, 4.0);
    const double det = b.partialPivLu().determinant();
    if (!(b.row(0) == b.row(1)) || det != 0.0) {
        o.fail("B is not exactly singular, det = " + std::to_string(det));
    }
    std::string text;
    const int code = run_cli({"ring", "--input", kData + "/ring_d9.json"}, &text);
    if (code != 2 || text.find("\"SingularB\"") == std::string::npos) {
        o.fail("ring command exited " + std::to_string(code));
    }
    o.detail << "B rows (" << b(0, 0) << ", " << b(0, 1) << ") twice, det=" << det << ", ring exit " << code;
    return o;
}

Outcome two_factor_sweep() {
    Outcome o;
    const auto t0 = Clock::now();
    int pairs = 0;
    int singular = 0;
    int mismatched = 0;
    std::vector<std::string> examples;
    for (int n = 5; n <= 101; n += 2) {
        for (int a = 1; a <= (n - 1) / 2; ++a) {
            for (int b = a + 1; b <= (n - 1) / 2; ++b) {
                ++pairs;
                const Matrix m = dn_ring::build_B(n, {a, b}, 4.0);
                const double closed = dn_ring::det_B_two_factor(n, a, b);
                const double lu = m.partialPivLu().determinant();
                if (!(std::abs(closed - lu) <= tol::kTwoFactorAgree)) {
                    ++mismatched;
                }
                const double normalized = closed / (m.row(0).norm() * m.row(1).norm());
                if (!(std::abs(normalized) > tol::kTwoFactorDet)) {
                    ++singular;
                    if (examples.size() < 4) {
                        examples.push_back("(" + std::to_string(n) + "," + std::to_string(a) + "," +
                                           std::to_string(b) + ")");
                    }
                }
            }
        }
    }
    const double elapsed = seconds_since(t0);
    if (singular > 0) {
        std::string list;
        for (const auto& e : examples) {
            list += e + " ";
        }
        o.fail(std::to_string(singular) + " of " + std::to_string(pairs) +
               " pairs have vanishing determinant, e.g. " + list);
    }
    if (mismatched > 0) {
        o.fail(std::to_string(mismatched) + " closed-form/LU mismatches");
    }
    if (elapsed > budget::kSweepSeconds) {
        o.fail("took " + std::to_string(elapsed) + " s");
    }
    o.detail << pairs << " pairs, closed form vs LU mismatches: " << mismatched << " (" << elapsed << " s)";
    return o;
}

Outcome d4_degeneracy() {
    Outcome o;
    const auto d = dn_ring::detect_even_degeneracy(4);
    if (d != std::vector<std::pair<int, int>>{{2, 1}, {2, 3}}) {
        o.fail("unexpected degeneracy list of size " + std::to_string(d.size()));
    }
    const int code = run_cli({"ring", "--input", kData + "/ring_d4.json"});
    if (code != 3) {
        o.fail("ring command exited " + std::to_string(code));
    }
    o.detail << "{(2,1),(2,3)}, ring exit " << code;
    return o;
}

Outcome factorization_oracle() {
    Outcome o;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::vector<int> sizes{3, 5, 7};
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
        const int n = sizes[static_cast<std::size_t>(s % 3)];
        const RingSpec ring = oracle::random_ring(rng, n);
        const CharProduct p = dn_ring::characteristic_factorization(ring);
        for (int k = 0; k < 20; ++k) {
            const Complex l{u(rng), u(rng)};
            const Complex dense = oracle::det(oracle::ring_matrix(ring, l));
            const Complex prod = quasipoly::evaluate_product(p, l);
            worst = std::max(worst, std::abs(prod - dense) / std::max(1.0, std::abs(dense)));
        }
    }
    if (!(worst < tol::kFactorizationRel)) {
        o.fail("worst relative determinant error " + std::to_string(worst));
    }

    // adjacency of cells at distance k - 1 against the weight formula
    double eig_worst = 0.0;
    for (int n = 3; n <= 12; ++n) {
        for (int k = 2; k <= dn_ring::max_coupling_index(n); ++k) {
            std::vector<double> by_distance(static_cast<std::size_t>(n / 2 + 1), 0.0);
            by_distance[static_cast<std::size_t>(k - 1)] = 1.0;
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(oracle::circulant(n, by_distance));
            std::vector<double> dense(eig.eigenvalues().data(), eig.eigenvalues().data() + n);
            std::vector<double> formula;
            for (int j = 0; j < n; ++j) {
                formula.push_back(dn_ring::factor_weight(n, k, j));
            }
            std::sort(dense.begin(), dense.end());
            std::sort(formula.begin(), formula.end());
            for (std::size_t i = 0; i < dense.size(); ++i) {
                eig_worst = std::max(eig_worst, std::abs(dense[i] - formula[i]));
            }
        }
    }
    if (!(eig_worst < tol::kEigenOracle)) {
        o.fail("factor weights differ from circulant eigenvalues by " + std::to_string(eig_worst));
    }
    o.detail << "50 rings x 20 points, worst rel err " << worst << "; eigen oracle n=3..12 worst " << eig_worst;
    return o;
}

Outcome continuation() {
    Outcome o;
    const FrequencyTarget t = FrequencyTarget::single({kOmegas[0], kOmegas[1], kOmegas[2]});
    const WeightTable w = WeightTable::ones(1, 3);
    const RealizationResult base = realization::realize(t, w);
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> coin(0, 1);
    int worst_iters = 0;
    double worst_res = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        FrequencyTarget moved = t;
        for (double& x : moved.groups[0]) {
            x += coin(rng) ? 1e-3 : -1e-3;
        }
        try {
            const RealizationResult r = realization::continue_realization(base, moved, w);
            const double res = realization::target_residual(r.taus, r.coeffs, moved, w);
            worst_iters = std::max(worst_iters, r.newton_iterations);
            worst_res = std::max(worst_res, res);
        } catch (const Error& e) {
            o.fail("trial " + std::to_string(trial) + ": " + e.what());
        }
    }
    if (worst_iters > tol::kContinuationIters) {
        o.fail("needed " + std::to_string(worst_iters) + " Newton iterations");
    }
    if (!(worst_res < tol::kContinuation)) {
        o.fail("residual " + std::to_string(worst_res));
    }
    o.detail << "20 trials, max iterations " << worst_iters << ", max residual " << worst_res;
    return o;
}

Outcome argument_principle() {
    Outcome o;
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> terms(1, 3);
    int additivity_failures = 0;
    int symmetry_failures = 0;
    for (int s = 0; s < 50; ++s) {
        const ScalarFactor f = oracle::random_factor(rng, terms(rng));
        const int whole = spectrum::count_roots(f, Region{-1.3, 0.9, -6.2, 6.2});
        const int lower = spectrum::count_roots(f, Region{-1.3, 0.9, -6.2, 0.0371});
        const int upper = spectrum::count_roots(f, Region{-1.3, 0.9, 0.0371, 6.2});
        if (lower + upper != whole) {
            ++additivity_failures;
        }
        const auto roots = spectrum::locate_roots(f, Region{-1.3, 0.9, -6.2, 6.2}, 200);
        if (static_cast<int>(roots.size()) != whole || !conjugation_symmetric(roots)) {
            ++symmetry_failures;
        }
    }
    if (additivity_failures > 0) {
        o.fail(std::to_string(additivity_failures) + " additivity failures");
    }
    if (symmetry_failures > 0) {
        o.fail(std::to_string(symmetry_failures) + " conjugate-symmetry failures");
    }

    std::vector<Instance> all;
    {
        Instance one;
        one.name = "n=1";
        one.target = FrequencyTarget::single({1.0});
        one.weights = WeightTable::ones(1, 1);
        one.result = realization::realize(one.target, one.weights);
        all.push_back(one);
    }
    for (const Instance& in : scalar_instances()) {
        all.push_back(in);
        for (double c : {2.0, 1.0 / 3.0}) {
            Instance s = in;
            s.name += c > 1.0 ? " x2" : " x1/3";
            s.target = scaled(in.target, c);
            s.result.taus = in.result.taus / c;
            s.result.coeffs = in.result.coeffs * c;
            all.push_back(s);
        }
    }
    {
        const FrequencyTarget t{{{1.0}, {std::sqrt(2.0)}}};
        const RingRealization rr = dn_ring::realize_ring(3, {0, 1}, t);
        all.push_back(Instance{"D3", t, rr.weights, rr.result, 0.0});
    }
    int verified = 0;
    int rejected = 0;
    for (const Instance& in : all) {
        const SpectrumReport rep = spectrum::verify_realization(in.result, in.target, in.weights, tol::kVerify);
        if (rep.pass) {
            ++verified;
        } else {
            int worst = 0;
            for (const TargetCheck& c : rep.targets) {
                worst = std::max(worst, c.local_count);
            }
            o.fail(in.name + " not verified (up to " + std::to_string(worst) + " roots per box)");
        }
        RealizationResult bad = in.result;
        bad.taus[0] += 0.1;
        if (!spectrum::verify_realization(bad, in.target, in.weights, tol::kVerify).pass) {
            ++rejected;
        } else {
            o.fail(in.name + " tampered variant verified");
        }
    }
    o.detail << "50 factors; verified " << verified << "/" << all.size() << ", tampered rejected " << rejected
             << "/" << all.size();
    return o;
}

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> check;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list{
        {1, "closed-form single frequency", closed_form},
        {2, "scalar realization n=2..5", scalar_realization},
        {3, "scaling covariance", scaling_covariance},
        {4, "determinant lemma vs LU", determinant_lemma},
        {5, "three-cell ring, split targets", d3_split},
        {6, "nine-cell singular leading weights", d9_singular},
        {7, "two-factor nonsingularity sweep", two_factor_sweep},
        {8, "four-cell degeneracy", d4_degeneracy},
        {9, "factorization oracle", factorization_oracle},
        {10, "continuation", continuation},
        {11, "argument-principle suite", argument_principle},
    };
    return list;
}

bool report(const Criterion& c) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
        o = c.check();
    } catch (const std::exception& e) {
        o.fail(std::string("threw: ") + e.what());
    }
    std::printf("%s  C%-2d %-36s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 2) {
        std::cerr << "usage: acceptance [criterion]\n";
        return 2;
    }
    bool all_pass = true;
    bool ran = false;
    for (const Criterion& c : criteria()) {
        if (argc == 2 && std::to_string(c.id) != argv[1]) {
            continue;
        }
        ran = true;
        all_pass = report(c) && all_pass;
    }
    if (!ran) {
        std::cerr << "unknown criterion " << argv[1] << "\n";
        return 2;
    }
    return all_pass ? 0 : 1;
}
