#include "sforge/json_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sforge/errors.hpp"

namespace sforge::json_io {

namespace {

template <typename T>
T read(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw InvalidArgument(std::string("missing key \"") + key + "\"");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

template <typename T>
T read_or(const Json& j, const char* key, T fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    return read<T>(j, key);
}

Vector vector_from(const std::vector<double>& xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = xs[i];
    }
    return v;
}

CouplingProfile profile_from(const Json& arr, const char* coeff_key, const char* delay_key) {
    if (!arr.is_array()) {
        throw InvalidArgument("profile must be an array of atoms");
    }
    CouplingProfile p;
    for (const auto& atom : arr) {
        p.atoms.push_back(DelayAtom{read<double>(atom, coeff_key), read<double>(atom, delay_key)});
    }
    return p;
}

Json profile_to(const CouplingProfile& p, const char* coeff_key, const char* delay_key) {
    Json arr = Json::array();
    for (const auto& a : p.atoms) {
        arr.push_back({{coeff_key, a.coeff}, {delay_key, a.delay}});
    }
    return arr;
}

}  // namespace

Json to_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const Vector& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v[i]);
    }
    return arr;
}

Json to_json(const ScalarFactor& f) {
    Json terms = Json::array();
    for (const Term& t : f.terms) {
        terms.push_back({{"a", t.coeff}, {"b", t.weight}, {"tau", t.delay}});
    }
    return {{"terms", terms}, {"multiplicity", f.multiplicity}};
}

Json to_json(const CharProduct& p) {
    Json factors = Json::array();
    for (const auto& f : p.factors) {
        factors.push_back(to_json(f));
    }
    return {{"factors", factors}};
}

Json to_json(const FrequencyTarget& t) { return t.groups; }

Json to_json(const RealizationConfig& c) {
    return {{"tol", c.tol},
            {"epsilon_schedule", c.epsilon_schedule},
            {"budget", c.budget},
            {"max_iter", c.max_iter},
            {"seed", c.seed}};
}

Json to_json(const BasePoint& b) {
    return {{"cal_ib", to_json(b.cal_ib)},
            {"amplitudes", to_json(b.amplitudes)},
            {"sign_matrix", to_json(b.sign_matrix)},
            {"target_angles", to_json(b.target_angles)}};
}

Json to_json(const RealizationResult& r) {
    return {{"taus", to_json(r.taus)},
            {"coeffs", to_json(r.coeffs)},
            {"residual", r.residual},
            {"newton_iterations", r.newton_iterations},
            {"search_window", r.search_window},
            {"epsilon", r.epsilon},
            {"base", to_json(r.base)}};
}

Json to_json(const RingSpec& ring) {
    Json couplings = Json::object();
    for (const auto& [k, profile] : ring.couplings) {
        couplings[std::to_string(k)] = profile_to(profile, "alpha", "s");
    }
    return {{"n", ring.n},
            {"internal", profile_to(ring.internal, "a", "tau")},
            {"couplings", couplings}};
}

Json to_json(const EquivarianceReport& report) {
    Json j{{"ok", report.ok}, {"condition", report.condition}, {"message", report.message}};
    if (report.edge) {
        j["edge"] = {{"from", report.edge->from},
                     {"to", report.edge->to},
                     {"delay", report.edge->delay},
                     {"tag", report.edge->tag}};
    }
    return j;
}

Json to_json(const ContourCount& c) {
    return {{"count", c.count},
            {"winding", c.winding},
            {"min_abs", c.min_abs},
            {"panels", c.panels},
            {"dilated", c.dilated},
            {"region",
             {{"re", {c.region.re_min, c.region.re_max}}, {"im", {c.region.im_min, c.region.im_max}}}}};
}

Json to_json(const SpectrumReport& report) {
    Json targets = Json::array();
    for (const auto& t : report.targets) {
        Json entry{{"factor", t.factor + 1},
                   {"omega", t.omega},
                   {"sign", t.sign},
                   {"residual", t.residual},
                   {"local_count", t.local_count},
                   {"polished", to_json(t.polished)},
                   {"root_error", t.root_error},
                   {"pass", t.pass}};
        if (!t.failure.empty()) {
            entry["failure"] = t.failure;
        }
        targets.push_back(std::move(entry));
    }
    return {{"targets", targets},
            {"box_half_width", report.box_half_width},
            {"min_contour_abs", report.min_contour_abs},
            {"max_panels", report.max_panels},
            {"pass", report.pass}};
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw InvalidArgument("matrix must be a nonempty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw InvalidArgument("matrix rows must have equal length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const Json& x = row[static_cast<std::size_t>(c)];
            if (!x.is_number()) {
                throw InvalidArgument("matrix entries must be numbers");
            }
            m(r, c) = x.get<double>();
        }
    }
    return m;
}

ScalarFactor factor_from_json(const Json& j) {
    const Json& src = j.is_object() && j.contains("factor") ? j.at("factor") : j;
    if (!src.is_object() || !src.contains("terms") || !src.at("terms").is_array()) {
        throw InvalidArgument("factor needs a \"terms\" array");
    }
    ScalarFactor f;
    for (const auto& t : src.at("terms")) {
        f.terms.push_back(Term{read<double>(t, "a"), read_or<double>(t, "b", 1.0),
                               read<double>(t, "tau")});
    }
    f.multiplicity = read_or<int>(src, "multiplicity", 1);
    quasipoly::validate(f);
    return f;
}

FrequencyTarget target_from_json(const Json& j) {
    FrequencyTarget t;
    try {
        t.groups = j.get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("groups must be an array of number arrays: ") + e.what());
    }
    realization::validate(t);
    return t;
}

RingSpec ring_from_json(const Json& j) {
    RingSpec ring;
    ring.n = read<int>(j, "n");
    ring.internal = profile_from(read<Json>(j, "internal"), "a", "tau");
    const Json couplings = read_or<Json>(j, "couplings", Json::object());
    if (!couplings.is_object()) {
        throw InvalidArgument("couplings must be an object keyed by coupling index");
    }
    for (const auto& [key, profile] : couplings.items()) {
        int k = 0;
        try {
            std::size_t used = 0;
            k = std::stoi(key, &used);
            if (used != key.size()) {
                throw std::invalid_argument(key);
            }
        } catch (const std::exception&) {
            throw InvalidArgument("coupling key \"" + key + "\" is not an integer");
        }
        ring.couplings[k] = profile_from(profile, "alpha", "s");
    }
    dn_ring::validate(ring);
    return ring;
}

RealizationResult result_from_json(const Json& j) {
    const Json& src = j.is_object() && j.contains("result") ? j.at("result") : j;
    RealizationResult r;
    r.taus = vector_from(read<std::vector<double>>(src, "taus"));
    r.coeffs = vector_from(read<std::vector<double>>(src, "coeffs"));
    if (r.taus.size() != r.coeffs.size()) {
        throw InvalidArgument("taus and coeffs differ in length");
    }
    r.residual = read_or<double>(src, "residual", 0.0);
    r.newton_iterations = read_or<int>(src, "newton_iterations", 0);
    r.search_window = read_or<std::vector<double>>(src, "search_window", {});
    r.epsilon = read_or<double>(src, "epsilon", 0.0);
    return r;
}

RealizationConfig config_from_json(const Json& j) {
    RealizationConfig c;
    c.tol = read_or<double>(j, "tol", c.tol);
    c.epsilon_schedule = read_or<std::vector<double>>(j, "epsilon_schedule", c.epsilon_schedule);
    c.budget = read_or<std::int64_t>(j, "budget", c.budget);
    c.max_iter = read_or<int>(j, "max_iter", c.max_iter);
    c.seed = read_or<std::uint64_t>(j, "seed", c.seed);
    if (!(c.tol > 0.0) || !std::isfinite(c.tol)) {
        throw InvalidArgument("tol must be positive");
    }
    if (c.epsilon_schedule.empty()) {
        throw InvalidArgument("epsilon_schedule must not be empty");
    }
    for (double e : c.epsilon_schedule) {
        if (!(e > 0.0 && e < 0.5 * std::numbers::pi)) {
            throw InvalidArgument("epsilon_schedule entries must lie in (0, pi/2)");
        }
    }
    if (c.budget < 1 || c.max_iter < 1) {
        throw InvalidArgument("budget and max_iter must be positive");
    }
    return c;
}

Problem problem_from_json(const Json& j) {
    if (!j.is_object()) {
        throw InvalidArgument("problem file must hold a JSON object");
    }
    Problem p;
    p.mode = read_or<std::string>(j, "mode", j.contains("n") ? "ring"
                                              : j.contains("weights") ? "multifactor"
                                                                      : "scalar");
    p.config = config_from_json(j);

    if (p.mode == "scalar" && j.contains("omegas")) {
        p.target = FrequencyTarget::single(read<std::vector<double>>(j, "omegas"));
        realization::validate(p.target);
    } else {
        p.target = target_from_json(read<Json>(j, "groups"));
    }

    if (p.mode == "scalar") {
        if (p.target.factor_count() != 1) {
            throw InvalidArgument("scalar mode takes a single frequency group");
        }
        p.weights = WeightTable::ones(1, p.target.size());
    } else if (p.mode == "multifactor") {
        p.weights = WeightTable{matrix_from_json(read<Json>(j, "weights"))};
        realization::validate(p.weights, p.target);
    } else if (p.mode == "ring") {
        p.n = read<int>(j, "n");
        p.indices = read<std::vector<int>>(j, "indices");
        p.layout = read_or<std::vector<int>>(j, "layout", {});
        if (p.layout.empty()) {
            p.layout = dn_ring::default_layout(p.indices, p.target);
        }
        if (p.layout.size() != p.target.size()) {
            throw InvalidArgument("layout must list one profile per frequency");
        }
        if (p.n % 2 == 1) {
            p.weights = dn_ring::ring_weight_table(p.n, p.indices, p.layout);
        }
    } else {
        throw InvalidArgument("unknown mode \"" + p.mode + "\"");
    }
    return p;
}

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("malformed JSON: ") + e.what());
    }
}

Json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace sforge::json_io
