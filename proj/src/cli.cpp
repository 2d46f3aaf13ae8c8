#include "sforge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "sforge/dn_ring.hpp"
#include "sforge/errors.hpp"
#include "sforge/json_io.hpp"
#include "sforge/realization.hpp"
#include "sforge/spectrum.hpp"

namespace sforge::cli {

namespace {

using json_io::Json;

struct Common {
    std::string output = "-";
    double tol = 0.0;  // 0 = keep the problem's value
    std::uint64_t seed = 0;
    bool seed_given = false;
};

Json envelope(const std::string& command, const std::string& status) {
    return {{"schema", json_io::kSchema}, {"command", command}, {"status", status}};
}

void write(const Json& doc, const std::string& output, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    if (output == "-") {
        out << text;
        return;
    }
    std::ofstream file(output);
    if (!file) {
        throw InvalidArgument("cannot write " + output);
    }
    file << text;
}

Json error_details(const Error& e) {
    Json d{{"kind", e.kind()}, {"message", e.what()}};
    if (const auto* z = dynamic_cast<const ZeroWeight*>(&e)) {
        d["j"] = z->factor();
        d["k"] = z->column();
    } else if (const auto* s = dynamic_cast<const SearchExhausted*>(&e)) {
        d["delay"] = s->delay();
        d["best_distance"] = s->best_distance();
    } else if (const auto* b = dynamic_cast<const SingularB*>(&e)) {
        d["det"] = b->det();
    } else if (const auto* ib = dynamic_cast<const SingularIB*>(&e)) {
        d["det"] = ib->det();
    } else if (const auto* a = dynamic_cast<const ZeroAmplitude*>(&e)) {
        d["column"] = a->column();
        d["value"] = a->value();
    } else if (const auto* c = dynamic_cast<const NoConvergence*>(&e)) {
        d["residual"] = c->residual();
    } else if (const auto* t = dynamic_cast<const TooManyRoots*>(&e)) {
        d["count"] = t->count();
    }
    return d;
}

// Runs a subcommand body and turns library errors into diagnostic JSON + exit code.
int guarded(const std::string& command, const Common& common, std::ostream& out, std::ostream& err,
            const std::function<int()>& body) {
    int code = kOk;
    Json doc;
    try {
        return body();
    } catch (const InputError& e) {
        code = kInputError;
        doc = envelope(command, "error");
        doc["error"] = error_details(e);
    } catch (const NumericError& e) {
        code = kNumericFailure;
        doc = envelope(command, "error");
        doc["error"] = error_details(e);
    }
    try {
        write(doc, common.output, out);
    } catch (const Error& e) {
        err << e.what() << "\n";
    }
    return code;
}

void apply(const Common& common, RealizationConfig& config) {
    if (common.tol > 0.0) {
        config.tol = common.tol;
    } else if (common.tol < 0.0) {
        throw InvalidArgument("--tol must be positive");
    }
    if (common.seed_given) {
        config.seed = common.seed;
    }
}

std::vector<double> parse_pair(const std::string& text, const char* flag) {
    std::vector<double> xs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            xs.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw InvalidArgument(std::string(flag) + " expects two numbers a,b");
        }
    }
    if (xs.size() != 2) {
        throw InvalidArgument(std::string(flag) + " expects two numbers a,b");
    }
    return xs;
}

Json independence_warnings(const FrequencyTarget& target) {
    const Vector w = target.flattened();
    const std::vector<double> omegas(w.data(), w.data() + w.size());
    try {
        return realization::independence_diagnostic(omegas, 10, 1e-9);
    } catch (const BudgetExceeded&) {
        return nullptr;
    }
}

int cmd_realize(const std::string& input, const Common& common, std::ostream& out) {
    json_io::Problem p = json_io::problem_from_json(json_io::read_file(input));
    if (p.mode == "ring") {
        throw InvalidArgument("ring problems are handled by the ring subcommand");
    }
    apply(common, p.config);
    const RealizationResult r = realization::realize(p.target, p.weights, p.config);

    Json doc = envelope("realize", "ok");
    doc["mode"] = p.mode;
    doc["groups"] = json_io::to_json(p.target);
    doc["weights"] = json_io::to_json(p.weights.b);
    doc["config"] = json_io::to_json(p.config);
    doc["result"] = json_io::to_json(r);
    doc["transversality"] = realization::transversality_at_base(p.target, p.weights);
    doc["integer_relations"] = independence_warnings(p.target);
    write(doc, common.output, out);
    return kOk;
}

int cmd_ring(const std::string& input, const Common& common, std::ostream& out) {
    const Json raw = json_io::read_file(input);
    if (!raw.is_object() || !raw.contains("n") || !raw.at("n").is_number_integer()) {
        throw InvalidArgument("ring problem needs an integer \"n\"");
    }
    const int n = raw.at("n").get<int>();
    if (n >= 3 && n % 2 == 0) {
        Json doc = envelope("ring", "refused");
        doc["n"] = n;
        doc["reason"] = "even n: some coupling weights vanish, so the leading-weight "
                        "construction does not apply";
        Json list = Json::array();
        for (const auto& [k, j] : dn_ring::detect_even_degeneracy(n)) {
            list.push_back({{"k", k}, {"j", j}});
        }
        doc["degeneracies"] = list;
        write(doc, common.output, out);
        return kRefused;
    }

    Json spec = raw;
    if (!spec.contains("mode")) {
        spec["mode"] = "ring";
    }
    json_io::Problem p = json_io::problem_from_json(spec);
    if (p.mode != "ring") {
        throw InvalidArgument("ring subcommand needs mode \"ring\"");
    }
    apply(common, p.config);
    const RingRealization rr = dn_ring::realize_ring(p.n, p.indices, p.target, p.layout, p.config);

    Json doc = envelope("ring", "ok");
    doc["n"] = p.n;
    doc["indices"] = p.indices;
    doc["layout"] = rr.layout;
    doc["groups"] = json_io::to_json(p.target);
    doc["weights"] = json_io::to_json(rr.weights.b);
    doc["config"] = json_io::to_json(p.config);
    doc["ring"] = json_io::to_json(rr.ring);
    doc["factorization"] = json_io::to_json(dn_ring::characteristic_factorization(rr.ring));
    doc["result"] = json_io::to_json(rr.result);
    write(doc, common.output, out);
    return kOk;
}

int cmd_verify(const std::string& input, const std::string& result_path, const Common& common,
               std::ostream& out) {
    json_io::Problem p = json_io::problem_from_json(json_io::read_file(input));
    if (p.mode == "ring" && p.n % 2 == 0) {
        throw BadParity("even rings have no realization to verify");
    }
    apply(common, p.config);
    const RealizationResult r = json_io::result_from_json(json_io::read_file(result_path));
    const SpectrumReport report = spectrum::verify_realization(r, p.target, p.weights, p.config.tol);

    Json doc = envelope("verify", report.pass ? "ok" : "failed");
    doc["tol"] = p.config.tol;
    doc["report"] = json_io::to_json(report);
    write(doc, common.output, out);
    return report.pass ? kOk : kNumericFailure;
}

int cmd_bmat(int n, const std::vector<int>& indices, double convention, const Common& common,
             std::ostream& out) {
    const Matrix b = dn_ring::build_B(n, indices, convention);
    const double det = b.partialPivLu().determinant();
    double scale = 1.0;
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
        scale *= b.row(r).norm();
    }
    Json doc = envelope("bmat", "ok");
    doc["n"] = n;
    doc["indices"] = indices;
    doc["convention"] = convention;
    doc["matrix"] = json_io::to_json(b);
    doc["det"] = det;
    doc["singular"] = std::abs(det) <= 1e-12 * scale;
    write(doc, common.output, out);
    return kOk;
}

int cmd_spectrum(const std::string& input, const std::string& re, const std::string& im,
                 int max_roots, const Common& common, std::ostream& out) {
    const ScalarFactor f = json_io::factor_from_json(json_io::read_file(input));
    const auto rx = parse_pair(re, "--re");
    const auto ix = parse_pair(im, "--im");
    const Region region{rx[0], rx[1], ix[0], ix[1]};
    spectrum::validate(region);

    const ContourCount count = spectrum::count_roots_detailed(f, region);
    const std::vector<Complex> roots = spectrum::locate_roots(f, region, max_roots);
    Json list = Json::array();
    for (const Complex& z : roots) {
        Json entry = json_io::to_json(z);
        entry["abs_delta"] = std::abs(quasipoly::evaluate(f, z));
        list.push_back(std::move(entry));
    }
    Json doc = envelope("spectrum", "ok");
    doc["factor"] = json_io::to_json(f);
    doc["contour"] = json_io::to_json(count);
    doc["roots"] = list;
    write(doc, common.output, out);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constructs and verifies delay equations with prescribed imaginary eigenvalues",
                 "spectra-forge"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--output", common.output, "Output path, '-' for stdout");
        sub->add_option("--tol", common.tol, "Residual tolerance override");
        sub->add_option("--seed", common.seed, "Seed recorded in the configuration");
    };

    std::string input;
    std::string result_path;
    int n = 0;
    std::vector<int> indices;
    double convention = 4.0;
    std::string re;
    std::string im;
    int max_roots = 64;

    auto* realize = app.add_subcommand("realize", "Realize frequencies from a problem file");
    realize->add_option("--input", input, "Problem JSON")->required();
    add_common(realize);

    auto* ring = app.add_subcommand("ring", "Realize frequencies on a dihedral ring");
    ring->add_option("--input", input, "Ring problem JSON")->required();
    add_common(ring);

    auto* verify = app.add_subcommand("verify", "Check a realization with the argument principle");
    verify->add_option("--input", input, "Problem JSON")->required();
    verify->add_option("--result", result_path, "Result JSON from realize or ring")->required();
    add_common(verify);

    auto* bmat = app.add_subcommand("bmat", "Leading-weight matrix of an odd ring");
    bmat->add_option("--n", n, "Ring size (odd)")->required();
    bmat->add_option("--indices", indices, "Factor indices, comma separated")
        ->required()
        ->delimiter(',');
    bmat->add_option("--convention", convention, "Cosine scale (4 or 2)");
    add_common(bmat);

    auto* spec = app.add_subcommand("spectrum", "Count and locate roots of one factor");
    spec->add_option("--input", input, "Factor JSON")->required();
    spec->add_option("--re", re, "Real range a,b")->required();
    spec->add_option("--im", im, "Imaginary range c,d")->required();
    spec->add_option("--max-roots", max_roots, "Refuse regions with more roots");
    add_common(spec);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kInputError;
    }
    const auto parsed = app.get_subcommands();
    common.seed_given = std::any_of(parsed.begin(), parsed.end(),
                                    [](const CLI::App* s) { return s->count("--seed") > 0; });

    if (realize->parsed()) {
        return guarded("realize", common, out, err, [&] { return cmd_realize(input, common, out); });
    }
    if (ring->parsed()) {
        return guarded("ring", common, out, err, [&] { return cmd_ring(input, common, out); });
    }
    if (verify->parsed()) {
        return guarded("verify", common, out, err,
                       [&] { return cmd_verify(input, result_path, common, out); });
    }
    if (bmat->parsed()) {
        return guarded("bmat", common, out, err,
                       [&] { return cmd_bmat(n, indices, convention, common, out); });
    }
    return guarded("spectrum", common, out, err,
                   [&] { return cmd_spectrum(input, re, im, max_roots, common, out); });
}

}  // namespace sforge::cli
