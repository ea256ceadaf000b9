#include "twistor/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "twistor/error.hpp"

namespace twistor {
namespace {

int n_of(Eigen::Index rows) { return rows % 4 == 0 ? static_cast<int>(rows / 4) : 0; }

const json& rows_of(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.at("rows").is_array()) {
    throw Error(ErrorCode::kParse, "matrix JSON needs an object with a \"rows\" array");
  }
  const json& rows = j.at("rows");
  if (rows.empty()) throw Error(ErrorCode::kParse, "matrix JSON has no rows");
  const std::size_t width = rows.front().is_array() ? rows.front().size() : 0;
  for (const auto& r : rows)
    if (!r.is_array() || r.size() != width || width == 0) {
      throw Error(ErrorCode::kParse, "matrix JSON rows must be non-empty arrays of equal length");
    }
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer()) throw Error(ErrorCode::kParse, "\"n\" must be an integer");
    const auto n = j.at("n").get<long>();
    if (n < 1 || static_cast<std::size_t>(4 * n) != rows.size()) {
      throw Error(ErrorCode::kParse, "\"n\" does not match the matrix size (expected 4n rows)");
    }
  }
  return rows;
}

mpq_class parse_rational(const json& e) {
  if (e.is_number_integer()) return mpq_class(mpz_class(std::to_string(e.get<long long>())));
  if (e.is_number()) {
    const double x = e.get<double>();
    if (x != std::round(x)) throw Error(ErrorCode::kParse, "non-integer number in exact matrix");
    return mpq_class(mpz_class(x));
  }
  if (!e.is_string()) throw Error(ErrorCode::kParse, "matrix entry must be a number or \"p/q\"");
  try {
    mpq_class q(e.get<std::string>(), 10);
    if (q.get_den() == 0) throw Error(ErrorCode::kParse, "zero denominator");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kParse, "malformed rational entry: " + e.get<std::string>());
  }
}

void dump_rec(const json& j, int indent, int level, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump_rec(it.value(), indent, level + 1, out);
      }
      out += nl;
      out += close_pad;
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
      out += "[";
      if (!flat) out += nl;
      bool first = true;
      for (const auto& e : j) {
        if (!first) {
          out += ",";
          out += flat ? (indent > 0 ? " " : "") : nl;
        }
        first = false;
        if (!flat) out += pad;
        dump_rec(e, indent, level + 1, out);
      }
      if (!flat) {
        out += nl;
        out += close_pad;
      }
      out += "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      // Keep it a JSON float when printf produced an integer literal.
      if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out += ".0";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"n", n_of(m.rows())}, {"rows", std::move(rows)}};
}

json matrix_to_json(const RationalMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) {
      const mpq_class& q = m(r, c);
      row.push_back(q.get_num().get_str() + "/" + q.get_den().get_str());
    }
    rows.push_back(std::move(row));
  }
  return json{{"n", n_of(m.rows())}, {"rows", std::move(rows)}};
}

Mat matrix_from_json(const json& j) {
  const json& rows = rows_of(j);
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const json& e = rows[r][c];
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          e.is_number() ? e.get<double>() : parse_rational(e).get_d();
    }
  return m;
}

RationalMatrix rational_matrix_from_json(const json& j) {
  const json& rows = rows_of(j);
  RationalMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = parse_rational(rows[r][c]);
  return m;
}

json sphere_to_json(const TwistorSphere& s) {
  return json::array({matrix_to_json(s.I().mat()), matrix_to_json(s.J().mat()),
                      matrix_to_json(s.K().mat())});
}

TwistorSphere sphere_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kParse, "sphere JSON must be [I, J, K]");
  return TwistorSphere(ComplexStructure(matrix_from_json(j[0])), ComplexStructure(matrix_from_json(j[1])),
                       ComplexStructure(matrix_from_json(j[2])));
}

json period_to_json(const PeriodMatrix& p) {
  json re = json::array(), im = json::array();
  for (Eigen::Index r = 0; r < p.Z.rows(); ++r) {
    json rr = json::array(), ri = json::array();
    for (Eigen::Index c = 0; c < p.Z.cols(); ++c) {
      rr.push_back(p.Z(r, c).real());
      ri.push_back(p.Z(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return json{{"n", p.n}, {"Z_re", std::move(re)}, {"Z_im", std::move(im)}};
}

PeriodMatrix period_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("Z_re") || !j.contains("Z_im")) {
    throw Error(ErrorCode::kParse, "period JSON needs \"n\", \"Z_re\", \"Z_im\"");
  }
  const int n = j.at("n").get<int>();
  if (n < 1) throw Error(ErrorCode::kParse, "period JSON: n must be positive");
  const json& re = j.at("Z_re");
  const json& im = j.at("Z_im");
  const std::size_t h = static_cast<std::size_t>(2 * n);
  if (!re.is_array() || !im.is_array() || re.size() != h || im.size() != h) {
    throw Error(ErrorCode::kParse, "period JSON: Z must be 2n x 2n");
  }
  CMat z(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(h));
  for (std::size_t r = 0; r < h; ++r) {
    if (!re[r].is_array() || !im[r].is_array() || re[r].size() != h || im[r].size() != h) {
      throw Error(ErrorCode::kParse, "period JSON: Z must be 2n x 2n");
    }
    for (std::size_t c = 0; c < h; ++c)
      z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {re[r][c].get<double>(), im[r][c].get<double>()};
  }
  return PeriodMatrix(n, std::move(z));
}

json to_json(const ConicReport& r) {
  json out{{"plane_dim", r.plane_dim}, {"conic_residual", r.conic_residual}, {"degree", r.degree},
           {"samples", r.samples}};
  if (!r.diagnostic.empty()) out["diagnostic"] = r.diagnostic;
  return out;
}

json to_json(const NSReport& r) {
  json basis = json::array();
  for (const auto& b : r.basis) basis.push_back(matrix_to_json(b));
  json out{{"rank", r.rank}, {"method", std::string(to_string(r.method))}, {"basis", std::move(basis)}};
  if (r.height_bound) {
    out["height_bound"] = *r.height_bound;
    out["max_kernel_distance"] = r.max_kernel_distance;
    out["note"] = "generic up to height " + std::to_string(*r.height_bound) + " only";
  }
  return out;
}

json to_json(const PathValidation& v) {
  return json{{"ok", v.ok},
              {"max_joint_distance", v.max_joint_distance},
              {"max_endpoint_distance", v.max_endpoint_distance},
              {"max_frame_residual", v.max_frame_residual},
              {"max_joint_square_residual", v.max_joint_square_residual},
              {"message", v.message}};
}

json to_json(const TwistorPath& path, const PathValidation& v) {
  json spheres = json::array(), joints = json::array(), ends = json::array();
  for (const auto& s : path.spheres) spheres.push_back(sphere_to_json(s));
  for (const auto& x : path.joints) joints.push_back(matrix_to_json(x.mat()));
  for (const auto& x : path.endpoints) ends.push_back(matrix_to_json(x.mat()));
  return json{{"spheres", std::move(spheres)},
              {"joints", std::move(joints)},
              {"endpoints", std::move(ends)},
              {"residuals", to_json(v)}};
}

json to_json(const RiemannCertificate& c) {
  json h = json::array();
  for (Eigen::Index r = 0; r < c.hermitian.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index k = 0; k < c.hermitian.cols(); ++k)
      row.push_back(json::array({c.hermitian(r, k).real(), c.hermitian(r, k).imag()}));
    h.push_back(std::move(row));
  }
  return json{{"first_relation_residual", c.first_relation_residual},
              {"hermitian_matrix", std::move(h)},
              {"determinant", c.determinant},
              {"closed_form", c.closed_form},
              {"determinant_mismatch", c.determinant_mismatch},
              {"positive_definite", c.positive_definite}};
}

json to_json(const LocusReport& r) {
  return json{{"dim", r.dim},
              {"codim", r.codim},
              {"bound", r.bound},
              {"bound_holds", r.bound_holds},
              {"j_invariant", r.j_invariant},
              {"dim_invariant_part", r.dim_invariant_part},
              {"dim_anti_invariant_part", r.dim_anti_invariant_part},
              {"basis_residual", r.basis_residual}};
}

std::string dump(const json& j, int indent) {
  std::string out;
  dump_rec(j, indent, 0, out);
  out += "\n";
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kParse, "cannot write " + path);
  out << text;
}

}  // namespace twistor
