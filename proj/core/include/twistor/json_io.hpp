#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "twistor/connectivity.hpp"
#include "twistor/lattice_genericity.hpp"
#include "twistor/period_charts.hpp"
#include "twistor/quaternionic.hpp"
#include "twistor/rational.hpp"

namespace twistor {

using json = nlohmann::json;

/// Matrix JSON: {"n": n, "rows": [[...], ...]} for a 4n x 4n matrix, row
/// major. Rational entries are written as "p/q" strings.
json matrix_to_json(const Mat& m);
json matrix_to_json(const RationalMatrix& m);
/// Accepts numbers and "p/q" strings; parse error on malformed input.
Mat matrix_from_json(const json& j);
/// Exact reading; numbers must be integers or the entries "p/q" strings.
RationalMatrix rational_matrix_from_json(const json& j);

json sphere_to_json(const TwistorSphere& s);
TwistorSphere sphere_from_json(const json& j);

json period_to_json(const PeriodMatrix& p);
PeriodMatrix period_from_json(const json& j);

json to_json(const ConicReport& r);
json to_json(const NSReport& r);
json to_json(const PathValidation& v);
json to_json(const TwistorPath& path, const PathValidation& v);
json to_json(const RiemannCertificate& c);
json to_json(const LocusReport& r);

/// Serializes with every floating-point number printed as %.17g.
std::string dump(const json& j, int indent = 2);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace twistor
