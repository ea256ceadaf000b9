#include "cli/commands.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <CLI11.hpp>

#include "twistor/connectivity.hpp"
#include "twistor/error.hpp"
#include "twistor/json_io.hpp"
#include "twistor/lattice_genericity.hpp"
#include "twistor/period_charts.hpp"
#include "twistor/quaternionic.hpp"

namespace twistor::cli {
namespace {

struct Config {
  int n = 1;
  std::uint64_t seed = 0;
  double tol = 0.0;
  double radius = 0.3;
  int max_iter = 50;
  long height = 1000;
  int samples = 0;
  bool local = false;
  bool generic_joints = false;
  int max_resample = 20;
  int count = 1;
  std::string out;
  std::vector<std::string> inputs;

  // command specific
  bool sphere = false;
  std::string near;
  double distance = 0.05;
  std::string method = "auto";
  bool conjugate = false;
  bool dependent = false;
};

int exit_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kMode:
    case ErrorCode::kDimension:
    case ErrorCode::kUnsupportedSize:
      return kUsage;
    default:
      return kNumericalFailure;
  }
}

double loose_tol(const Mat& m) {
  return kTolStruct * std::max(1.0, m.squaredNorm() / static_cast<double>(m.rows()));
}

// Files written by this tool can carry frames of large norm; identities are
// checked relative to that scale.
ComplexStructure structure_from(const json& j) {
  Mat m = matrix_from_json(j);
  const double tol = loose_tol(m);
  return ComplexStructure(std::move(m), tol);
}

TwistorSphere sphere_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kParse, "sphere JSON must be [I, J, K]");
  ComplexStructure i = structure_from(j[0]);
  ComplexStructure jj = structure_from(j[1]);
  ComplexStructure k = structure_from(j[2]);
  const double tol = kTolStruct * std::max(1.0, i.mat().norm() * jj.mat().norm() / static_cast<double>(i.dim()));
  return TwistorSphere(std::move(i), std::move(jj), std::move(k), tol);
}

TwistorPath path_from(const json& j) {
  TwistorPath p;
  for (const auto& s : j.at("spheres")) p.spheres.push_back(sphere_from(s));
  for (const auto& x : j.at("joints")) p.joints.push_back(structure_from(x));
  for (const auto& x : j.at("endpoints")) p.endpoints.push_back(structure_from(x));
  return p;
}

void emit(const json& report, const Config& c, std::ostream& out) {
  if (c.out.empty()) {
    out << dump(report);
  } else {
    write_text_file(c.out, dump(report));
  }
}

// ---------------------------------------------------------------- gen

json generate_one(const Config& c, std::uint64_t seed) {
  if (!c.near.empty()) {
    const ComplexStructure base = structure_from(read_json_file(c.near));
    Rng rng(seed);
    return matrix_to_json(nearby_structure(base, c.distance, rng).mat());
  }
  if (c.sphere) {
    Rng rng(seed);
    return sphere_to_json(conjugate(random_gl_plus(4 * c.n, rng), canonical_sphere(c.n)));
  }
  return matrix_to_json(random_complex_structure(c.n, seed).mat());
}

int cmd_gen(const Config& c, std::ostream& out) {
  if (c.count == 1) {
    emit(generate_one(c, c.seed), c, out);
    return kOk;
  }
  if (c.out.empty()) throw Error(ErrorCode::kParse, "gen --count > 1 needs --out DIR");
  std::filesystem::create_directories(c.out);
  const char* stem = c.sphere ? "sphere" : "structure";
  json files = json::array();
  for (int k = 0; k < c.count; ++k) {
    std::ostringstream name;
    name << stem << '_' << std::setw(3) << std::setfill('0') << k << ".json";
    const std::string path = (std::filesystem::path(c.out) / name.str()).string();
    write_text_file(path, dump(generate_one(c, c.seed + static_cast<std::uint64_t>(k))));
    files.push_back(path);
  }
  out << dump(json{{"command", "gen"}, {"ok", true}, {"files", std::move(files)}});
  return kOk;
}

// ---------------------------------------------------------------- check

int cmd_check(const Config& c, std::ostream& out) {
  const json input = read_json_file(c.inputs.at(0));
  json report{{"command", "check"}};
  bool ok = false;
  if (input.is_array()) {
    const double tol = c.tol > 0 ? c.tol : kTolStruct;
    Mat f[3];
    for (int k = 0; k < 3 && k < static_cast<int>(input.size()); ++k) f[k] = matrix_from_json(input[k]);
    if (input.size() != 3 || f[0].rows() != f[1].rows() || f[0].rows() != f[2].rows()) {
      throw Error(ErrorCode::kParse, "sphere JSON must be three matrices of equal size");
    }
    const Mat one = Mat::Identity(f[0].rows(), f[0].cols());
    double squares = 0.0;
    for (const auto& m : f) squares = std::max(squares, (m * m + one).norm());
    const double ij = (f[0] * f[1] - f[2]).norm();
    const double ji = (f[1] * f[0] + f[2]).norm();
    double ortho = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) ortho = std::max(ortho, std::abs(frame_inner(f[a], f[b]) - (a == b ? 1.0 : 0.0)));
    ok = squares <= tol && ij <= tol && ji <= tol && ortho <= tol;
    report["kind"] = "sphere";
    report["max_square_residual"] = squares;
    report["ij_minus_k"] = ij;
    report["ji_plus_k"] = ji;
    report["orthonormality_residual"] = ortho;
  } else if (input.is_object() && input.contains("spheres")) {
    const TwistorPath p = path_from(input);
    const PathValidation v = validate_path(p, c.tol > 0 ? c.tol : kMembershipTol);
    ok = v.ok;
    report["kind"] = "path";
    report["validation"] = to_json(v);
  } else {
    const Mat m = matrix_from_json(input);
    if (m.rows() != m.cols() || m.rows() % 2 != 0) {
      throw Error(ErrorCode::kDimension, "check: matrix must be square of even size");
    }
    const double tol = c.tol > 0 ? c.tol : kTolStruct;
    ok = is_complex_structure(m, tol);
    report["kind"] = "structure";
    report["square_residual"] = structure_residual(m);
    report["determinant"] = m.determinant();
  }
  report["ok"] = ok;
  emit(report, c, out);
  return ok ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------- connect

bool generic_joint(const ComplexStructure& x, long height) {
  NSOptions o;
  o.method = NSMethod::kHeightBounded;
  o.height = height;
  return ns_rank(x, o).rank == 0;
}

int cmd_connect(const Config& c, std::ostream& out, std::ostream& err) {
  const ComplexStructure i1 = structure_from(read_json_file(c.inputs.at(0)));
  const ComplexStructure i2 = structure_from(read_json_file(c.inputs.at(1)));
  if (i1.dim() != i2.dim()) throw Error(ErrorCode::kDimension, "connect: structures differ in size");

  PathOptions opts;
  opts.radius = c.radius;
  opts.max_iter = c.max_iter;
  if (c.tol > 0) opts.tol_solve = c.tol;
  opts.seed = c.seed;
  opts.max_resample = c.max_resample;
  const long height = c.height;
  if (c.generic_joints) opts.joint_filter = [height](const ComplexStructure& x) { return generic_joint(x, height); };

  TwistorPath path;
  try {
    path = c.local ? three_sphere_path(i1, i2, opts) : global_path(i1, i2, opts);
  } catch (const NoConvergence& e) {
    json report{{"command", "connect"}, {"ok", false}, {"error", e.what()}, {"last_residual", e.last_residual()}};
    out << dump(report);
    err << e.what() << "\n";
    return kNumericalFailure;
  }
  const PathValidation v = validate_path(path);
  bool ok = v.ok;

  json summary{{"command", "connect"},
               {"mode", c.local ? "local" : "global"},
               {"spheres", path.spheres.size()},
               {"joints", path.joints.size()},
               {"distance", (i1.mat() - i2.mat()).norm()},
               {"residuals", to_json(v)}};
  if (c.generic_joints) {
    json flags = json::array();
    for (const auto& x : path.joints) {
      const bool g = generic_joint(x, height);
      ok = ok && g;
      flags.push_back(g);
    }
    summary["joint_generic_up_to_height"] = std::move(flags);
    summary["height_bound"] = height;
  }
  summary["ok"] = ok;

  json path_json = to_json(path, v);
  if (c.out.empty()) {
    path_json["summary"] = summary;
    out << dump(path_json);
  } else {
    write_text_file(c.out, dump(path_json));
    out << dump(summary);
  }
  if (!ok) err << "connect: validation failed: " << v.message << "\n";
  return ok ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------- ns

bool exact_invariant(const RationalMatrix& i, const RationalMatrix& omega) {
  return i.transpose() * omega * i == omega;
}

int cmd_ns(const Config& c, std::ostream& out) {
  const json input = read_json_file(c.inputs.at(0));
  if (c.method != "auto" && c.method != "exact" && c.method != "height") {
    throw Error(ErrorCode::kParse, "ns --method must be auto, exact or height");
  }
  std::optional<RationalMatrix> exact;
  if (c.method != "height") {
    try {
      exact = rational_matrix_from_json(input);
    } catch (const Error&) {
      if (c.method == "exact") throw Error(ErrorCode::kMode, "exact mode needs integer or p/q entries");
    }
  }
  NSReport r;
  bool ok = true;
  if (exact) {
    r = ns_rank_exact(*exact);
    for (const auto& b : r.basis) ok = ok && exact_invariant(*exact, b);
  } else {
    const ComplexStructure i = structure_from(input);
    NSOptions o;
    o.method = NSMethod::kHeightBounded;
    o.height = c.height;
    r = ns_rank(i, o);
    for (const auto& b : r.basis) {
      const Mat w = b.to_double();
      ok = ok && (i.mat().transpose() * w * i.mat() - w).norm() <= 1e-9 * static_cast<double>(c.height) * std::max(1.0, i.mat().squaredNorm());
    }
  }
  json report = to_json(r);
  report["command"] = "ns";
  if (r.height_bound) report["generic_up_to_height"] = r.rank == 0;
  report["ok"] = ok;
  emit(report, c, out);
  return ok ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------- plucker

int cmd_plucker(const Config& c, std::ostream& out) {
  std::optional<json> input;
  if (!c.inputs.empty()) input = read_json_file(c.inputs.at(0));
  json report{{"command", "plucker"}};
  bool ok = false;
  if (input && input->is_object()) {
    const ComplexStructure i = structure_from(*input);
    const PeriodMatrix p = period_from_complex_structure(i);
    const PlueckerVector v = plucker(p);
    const double rel = plucker_relation_residual(v, c.samples > 0 ? c.samples : 64, c.seed);
    json coords = json::array();
    for (Eigen::Index k = 0; k < v.coords.size(); ++k)
      coords.push_back(json::array({v.coords(k).real(), v.coords(k).imag()}));
    ok = rel < 1e-9;
    report["kind"] = "structure";
    report["period"] = period_to_json(p);
    report["coords"] = std::move(coords);
    report["relation_residual"] = rel;
  } else {
    TwistorSphere s = input ? sphere_from(*input) : canonical_sphere(c.n);
    if (c.conjugate) {
      Rng rng(c.seed);
      s = conjugate(random_gl_plus(s.dim(), rng), s);
    }
    const ConicReport r = verify_conic(s, c.samples > 0 ? c.samples : 32);
    ok = r.degree == 2;
    report["kind"] = "sphere";
    report["n"] = s.n();
    report["conic"] = to_json(r);
  }
  report["ok"] = ok;
  emit(report, c, out);
  return ok ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------- riemann

int cmd_riemann(const Config& c, std::ostream& out) {
  const int m = c.samples > 0 ? c.samples : 200;
  Rng rng(c.seed);
  double first = 0.0, mismatch = 0.0, identity = 0.0, det_max = -INFINITY;
  int negative = 0, positive_definite = 0;
  json example;
  for (int k = 0; k < m; ++k) {
    const auto [u, v] = sample_uv(rng);
    double b = 0, cc = 0, d = 0;
    while (b * b + cc * cc + d * d < 1e-6) {
      b = rng.gaussian();
      cc = rng.gaussian();
      d = rng.gaussian();
    }
    const RiemannCertificate cert = riemann_certificate(u, v, q_form(b, cc, d));
    first = std::max(first, cert.first_relation_residual);
    mismatch = std::max(mismatch, cert.determinant_mismatch);
    det_max = std::max(det_max, cert.determinant);
    negative += cert.determinant < 0.0;
    positive_definite += cert.positive_definite;
    identity = std::max(identity, std::abs(riemann_identity_residual(u, v)));
    if (k == 0) {
      example = to_json(cert);
      example["u"] = json::array({u.real(), u.imag()});
      example["v"] = json::array({v.real(), v.imag()});
      example["bcd"] = json::array({b, cc, d});
    }
  }
  const double tol = c.tol > 0 ? c.tol : 1e-9;
  const bool ok = first < 1e-10 && mismatch <= tol && negative == m && positive_definite == 0 && identity <= 1e-12;
  json report{{"command", "riemann"},
              {"samples", m},
              {"max_first_relation_residual", first},
              {"max_determinant_mismatch", mismatch},
              {"max_determinant", det_max},
              {"negative_determinants", negative},
              {"positive_definite_count", positive_definite},
              {"max_identity_residual", identity},
              {"example", std::move(example)},
              {"ok", ok}};
  emit(report, c, out);
  return ok ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------- ranks

int cmd_ranks(const Config& c, std::ostream& out) {
  const TwistorSphere s = c.inputs.empty() ? canonical_sphere(c.n) : sphere_from(read_json_file(c.inputs.at(0)));
  const int n = s.n();
  const ComplexStructure& i = s.I();
  const ComplexStructure& j = s.J();
  const ComplexStructure& k = s.K();

  std::optional<ComplexStructure> third;
  if (c.dependent) third = sphere_point(s, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0);
  const PhiProblem p(i, j, third ? *third : k);

  json rows = json::array();
  bool ok = true;
  auto row = [&](const char* name, int computed, int expected, std::optional<bool> pre = std::nullopt) {
    json r{{"name", name}, {"expected", expected}, {"computed", computed}, {"match", computed == expected}};
    if (pre) r["precondition_ok"] = *pre;
    ok = ok && computed == expected;
    rows.push_back(std::move(r));
  };
  row("dPhi", phi_differential_rank(p), 8 * n * n);
  const RankReport ni = n_i_tangent_rank(i, j);
  row("N_I", ni.rank, ni.expected, ni.precondition_ok);
  const RankReport mi = m_i_rank(i, j);
  row("M_I", mi.rank, mi.expected, mi.precondition_ok);
  const RankReport cone = cone_parametrization_rank(i, j, k);
  row("cone", cone.rank, cone.expected, cone.precondition_ok);

  json report{{"command", "ranks"}, {"n", n}, {"dependent_triple", c.dependent},
              {"triple_independent", p.independent()}, {"rows", std::move(rows)}, {"ok", ok}};
  emit(report, c, out);
  return ok ? kOk : kValidationFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"twistor_kit: twistor geometry of complex-torus period domains"};
  app.require_subcommand(1);
  Config c;
  CLI::Option* seed_opt = nullptr;

  auto add_seed = [&](CLI::App* sub) {
    seed_opt = sub->add_option("--seed", c.seed, "random seed (fallback: $TWISTOR_KIT_SEED, then 0)");
  };
  auto add_n = [&](CLI::App* sub) {
    sub->add_option("--n", c.n, "quaternionic dimension; matrices are 4n x 4n")->check(CLI::PositiveNumber);
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", c.out, "output path (default: stdout)"); };

  CLI::App* gen = app.add_subcommand("gen", "write random complex structures or spheres as matrix JSON");
  add_n(gen);
  add_seed(gen);
  add_out(gen);
  gen->add_option("--count", c.count, "number of files; needs --out DIR when > 1")->check(CLI::PositiveNumber);
  gen->add_flag("--sphere", c.sphere, "emit twistor frames [I, J, K] instead of structures");
  gen->add_option("--near", c.near, "perturb the structure in this file instead")->check(CLI::ExistingFile);
  gen->add_option("--distance", c.distance, "Frobenius distance for --near")->check(CLI::NonNegativeNumber);
  CLI::Option* gen_seed = seed_opt;

  CLI::App* check = app.add_subcommand("check", "validate a structure, sphere or path file");
  check->add_option("file", c.inputs, "JSON input")->required()->expected(1)->check(CLI::ExistingFile);
  check->add_option("--tol", c.tol, "tolerance override")->check(CLI::PositiveNumber);
  add_out(check);

  CLI::App* connect = app.add_subcommand("connect", "build a twistor path between two structures");
  connect->add_option("files", c.inputs, "I1.json I2.json")->required()->expected(2)->check(CLI::ExistingFile);
  add_seed(connect);
  CLI::Option* connect_seed = seed_opt;
  connect->add_option("--tol", c.tol, "solver tolerance")->check(CLI::PositiveNumber);
  connect->add_option("--radius", c.radius, "local solve radius (Frobenius)")->check(CLI::PositiveNumber);
  connect->add_option("--max-iter", c.max_iter, "Gauss-Newton iterations")->check(CLI::PositiveNumber);
  connect->add_option("--height", c.height, "height bound for --generic-joints")->check(CLI::PositiveNumber);
  connect->add_option("--max-resample", c.max_resample, "partner redraws for --generic-joints")
      ->check(CLI::PositiveNumber);
  connect->add_flag("--local", c.local, "single three-sphere segment");
  connect->add_flag("--generic-joints", c.generic_joints, "require joints generic up to --height");
  add_out(connect);

  CLI::App* ns = app.add_subcommand("ns", "Neron-Severi rank of the lattice torus of a structure");
  ns->add_option("file", c.inputs, "structure JSON")->required()->expected(1)->check(CLI::ExistingFile);
  ns->add_option("--method", c.method, "auto | exact | height");
  ns->add_option("--height", c.height, "height bound for the lattice search")->check(CLI::PositiveNumber);
  add_out(ns);

  CLI::App* pl = app.add_subcommand("plucker", "Pluecker coordinates or conic check of a twistor line");
  pl->add_option("file", c.inputs, "structure or sphere JSON (default: canonical sphere)")
      ->expected(0, 1)
      ->check(CLI::ExistingFile);
  add_n(pl);
  add_seed(pl);
  CLI::Option* pl_seed = seed_opt;
  pl->add_option("--samples", c.samples, "sample count")->check(CLI::PositiveNumber);
  pl->add_flag("--conjugate", c.conjugate, "conjugate the sphere by a seeded random element");
  add_out(pl);

  CLI::App* rie = app.add_subcommand("riemann", "Riemann-relation certificates for the Q(b, c, d) form family");
  add_seed(rie);
  CLI::Option* rie_seed = seed_opt;
  rie->add_option("--samples", c.samples, "number of (u, v, b, c, d) draws")->check(CLI::PositiveNumber);
  rie->add_option("--tol", c.tol, "determinant agreement tolerance")->check(CLI::PositiveNumber);
  add_out(rie);

  CLI::App* ranks = app.add_subcommand("ranks", "dimension certificates for N_I, M_I, the cone and dPhi");
  ranks->add_option("file", c.inputs, "sphere JSON (default: canonical sphere)")
      ->expected(0, 1)
      ->check(CLI::ExistingFile);
  add_n(ranks);
  ranks->add_flag("--dependent", c.dependent, "use the dependent triple (I, J, (I+J)/sqrt 2) for dPhi");
  add_out(ranks);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  std::optional<std::uint64_t> explicit_seed;
  for (CLI::Option* o : {gen_seed, connect_seed, pl_seed, rie_seed})
    if (o != nullptr && o->count() > 0) explicit_seed = c.seed;
  c.seed = resolve_seed(explicit_seed, 0);

  try {
    if (gen->parsed()) return cmd_gen(c, out);
    if (check->parsed()) return cmd_check(c, out);
    if (connect->parsed()) return cmd_connect(c, out, err);
    if (ns->parsed()) return cmd_ns(c, out);
    if (pl->parsed()) return cmd_plucker(c, out);
    if (rie->parsed()) return cmd_riemann(c, out);
    if (ranks->parsed()) return cmd_ranks(c, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_for(e.code());
  } catch (const json::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace twistor::cli
