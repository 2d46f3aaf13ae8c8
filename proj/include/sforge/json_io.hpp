#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "sforge/dn_ring.hpp"
#include "sforge/quasipoly.hpp"
#include "sforge/realization.hpp"
#include "sforge/spectrum.hpp"

namespace sforge::json_io {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "spectra-forge/1";

/// Parsed problem file. `mode` is "scalar", "multifactor" or "ring".
struct Problem {
    std::string mode;
    FrequencyTarget target;
    WeightTable weights;  // unset for ring problems
    RealizationConfig config;
    int n = 0;
    std::vector<int> indices;
    std::vector<int> layout;
};

[[nodiscard]] Json to_json(Complex z);
[[nodiscard]] Json to_json(const Matrix& m);
[[nodiscard]] Json to_json(const Vector& v);
[[nodiscard]] Json to_json(const ScalarFactor& f);
[[nodiscard]] Json to_json(const CharProduct& p);
[[nodiscard]] Json to_json(const FrequencyTarget& t);
[[nodiscard]] Json to_json(const RealizationConfig& c);
[[nodiscard]] Json to_json(const BasePoint& b);
[[nodiscard]] Json to_json(const RealizationResult& r);
[[nodiscard]] Json to_json(const RingSpec& ring);
[[nodiscard]] Json to_json(const EquivarianceReport& report);
[[nodiscard]] Json to_json(const ContourCount& c);
[[nodiscard]] Json to_json(const SpectrumReport& report);

// Readers throw InvalidArgument on missing keys or wrong types.
[[nodiscard]] Matrix matrix_from_json(const Json& j);
[[nodiscard]] ScalarFactor factor_from_json(const Json& j);
[[nodiscard]] FrequencyTarget target_from_json(const Json& j);
[[nodiscard]] RingSpec ring_from_json(const Json& j);
/// Needs "taus" and "coeffs"; the remaining diagnostics are optional.
[[nodiscard]] RealizationResult result_from_json(const Json& j);
/// Reads tol, epsilon_schedule, budget, max_iter and seed from the top level.
[[nodiscard]] RealizationConfig config_from_json(const Json& j);
[[nodiscard]] Problem problem_from_json(const Json& j);

/// Parses text; syntax errors become InvalidArgument.
[[nodiscard]] Json parse(const std::string& text);
[[nodiscard]] Json read_file(const std::string& path);

}  // namespace sforge::json_io
