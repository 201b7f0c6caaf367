#include "nvzeno/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "nvzeno/error.hpp"
#include "nvzeno/zeno.hpp"

namespace nvzeno {

using json = nlohmann::json;

namespace {

const json& require_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorCode::ParseError, "field '" + key + "': expected a number");
  return v;
}

double finite_number(const json& v, const std::string& key) {
  const double x = require_number(v, key).get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::OutOfRange, "field '" + key + "' is not finite");
  return x;
}

double nonnegative(const json& v, const std::string& key) {
  const double x = finite_number(v, key);
  if (x < 0.0) throw Error(ErrorCode::OutOfRange, "field '" + key + "' must be >= 0");
  return x;
}

std::size_t count(const json& v, const std::string& key, std::size_t min) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw Error(ErrorCode::ParseError, "field '" + key + "': expected an integer");
  }
  const auto x = v.get<long long>();
  if (x < static_cast<long long>(min)) {
    throw Error(ErrorCode::OutOfRange,
                "field '" + key + "' must be >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(x);
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw Error(ErrorCode::ParseError, "field '" + key + "': expected a string");
  return v.get<std::string>();
}

Complex amplitude(const json& v, const std::string& key) {
  if (v.is_number()) return {finite_number(v, key), 0.0};
  if (v.is_array() && v.size() == 2) return {finite_number(v[0], key), finite_number(v[1], key)};
  throw Error(ErrorCode::ParseError, "field '" + key + "': expected a number or [re, im]");
}

std::vector<double> axis_values(const json& v, const std::string& key) {
  if (v.is_number()) return {finite_number(v, key)};
  if (v.is_array()) {
    if (v.empty()) throw Error(ErrorCode::OutOfRange, "axis '" + key + "' is empty");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(finite_number(x, key));
    return out;
  }
  if (v.is_object()) {
    for (const auto& [k, _] : v.items()) {
      if (k != "from" && k != "to" && k != "points")
        throw Error(ErrorCode::UnknownKey, "axis '" + key + "' has unknown field '" + k + "'");
    }
    if (!v.contains("from") || !v.contains("to") || !v.contains("points")) {
      throw Error(ErrorCode::ParseError, "axis '" + key + "' needs from, to and points");
    }
    return linspace(finite_number(v["from"], key + ".from"), finite_number(v["to"], key + ".to"),
                    count(v["points"], key + ".points", 1));
  }
  throw Error(ErrorCode::ParseError, "axis '" + key + "': expected {from, to, points} or a list");
}

// Parse failures report the 1-based line and column of the offending byte.
std::string locate(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& scalar_config_keys() {
  static const std::vector<std::string> keys{
      "experiment",      "omega_over_g",        "delta_over_g",
      "g_list",          "n_nuclei",            "gamma_nv_over_g",
      "gamma_n_over_g",  "gamma_nv_aux_over_g", "gamma_nv_dephasing_over_g",
      "frame",           "alpha",               "beta",
      "qst_direction",   "dt",                  "output",
      "format",          "threads",             "deterministic"};
  return keys;
}

std::string kebab_to_key(std::string_view flag) {
  while (!flag.empty() && flag.front() == '-') flag.remove_prefix(1);
  std::string out(flag);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

RunConfig parse_config(std::string_view text_in) {
  json doc;
  try {
    doc = json::parse(text_in.begin(), text_in.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, locate(text_in, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");

  RunConfig cfg;
  if (doc.contains("experiment")) cfg.experiment = text(doc["experiment"], "experiment");
  const ExperimentInfo& info = experiment_info(cfg.experiment);
  auto is_axis = [&](const std::string& key) {
    return std::any_of(info.default_axes.begin(), info.default_axes.end(),
                       [&](const SweepAxis& a) { return a.name == key; });
  };
  const auto& scalars = scalar_config_keys();

  std::optional<std::size_t> n_nuclei;
  bool has_g_list = false;
  for (const auto& [key, value] : doc.items()) {
    if (is_axis(key)) {
      cfg.axes.push_back({key, axis_values(value, key)});
      continue;
    }
    if (std::find(scalars.begin(), scalars.end(), key) == scalars.end()) {
      throw Error(ErrorCode::UnknownKey, "unknown config key '" + key + "'");
    }
    SystemParams& p = cfg.params;
    if (key == "experiment") {
    } else if (key == "omega_over_g") {
      p.omega = finite_number(value, key);
      if (!(p.omega > 0.0)) throw Error(ErrorCode::OutOfRange, "omega_over_g must be > 0");
    } else if (key == "delta_over_g") {
      p.delta = nonnegative(value, key);
    } else if (key == "gamma_nv_over_g") {
      p.gamma_nv = nonnegative(value, key);
    } else if (key == "gamma_n_over_g") {
      p.gamma_n = nonnegative(value, key);
    } else if (key == "gamma_nv_aux_over_g") {
      p.gamma_nv_aux = nonnegative(value, key);
    } else if (key == "gamma_nv_dephasing_over_g") {
      p.gamma_nv_dephasing = nonnegative(value, key);
    } else if (key == "g_list") {
      if (!value.is_array() || value.empty())
        throw Error(ErrorCode::ParseError, "field 'g_list': expected a nonempty list");
      p.g_list.clear();
      for (const auto& g : value) p.g_list.push_back(nonnegative(g, key));
      has_g_list = true;
    } else if (key == "n_nuclei") {
      n_nuclei = count(value, key, 1);
      if (*n_nuclei > kMaxNuclei)
        throw Error(ErrorCode::TooManyNuclei, "n_nuclei must be <= " + std::to_string(kMaxNuclei));
    } else if (key == "frame") {
      const std::string f = text(value, key);
      if (f == "rotating") p.frame = Frame::Rotating;
      else if (f == "explicit-time" || f == "explicit_time") p.frame = Frame::ExplicitTime;
      else throw Error(ErrorCode::OutOfRange, "frame must be 'rotating' or 'explicit-time'");
    } else if (key == "alpha") {
      cfg.alpha = amplitude(value, key);
    } else if (key == "beta") {
      cfg.beta = amplitude(value, key);
    } else if (key == "qst_direction") {
      const std::string d = text(value, key);
      if (d == "1->2" || d == "12") cfg.direction = QstDirection::OneToTwo;
      else if (d == "2->1" || d == "21") cfg.direction = QstDirection::TwoToOne;
      else throw Error(ErrorCode::OutOfRange, "qst_direction must be '1->2' or '2->1'");
    } else if (key == "dt") {
      cfg.dt = nonnegative(value, key);
    } else if (key == "output") {
      cfg.output = text(value, key);
      if (cfg.output.empty()) throw Error(ErrorCode::OutOfRange, "output path is empty");
    } else if (key == "format") {
      const std::string f = text(value, key);
      if (f == "csv") cfg.format = OutputFormat::Csv;
      else if (f == "json") cfg.format = OutputFormat::Json;
      else throw Error(ErrorCode::OutOfRange, "format must be 'csv' or 'json'");
    } else if (key == "threads") {
      cfg.threads = count(value, key, 0);
    } else if (key == "deterministic") {
      if (!value.is_boolean())
        throw Error(ErrorCode::ParseError, "field 'deterministic': expected a boolean");
      cfg.deterministic = value.get<bool>();
      if (!cfg.deterministic)
        throw Error(ErrorCode::OutOfRange, "all runs are deterministic; 'deterministic' must be true");
    }
  }

  if (n_nuclei) {
    if (!has_g_list) cfg.params.g_list.assign(*n_nuclei, 1.0);
    else if (cfg.params.g_list.size() != *n_nuclei)
      throw Error(ErrorCode::LengthMismatch, "g_list length differs from n_nuclei");
  }
  const double n2 = std::norm(cfg.alpha) + std::norm(cfg.beta);
  if (std::abs(n2 - 1.0) > 1e-9) {
    throw Error(ErrorCode::OutOfRange, "|alpha|^2 + |beta|^2 must equal 1");
  }
  cfg.params.validate();
  return cfg;
}

SweepSpec to_sweep_spec(const RunConfig& config) {
  SweepSpec spec;
  spec.experiment = config.experiment;
  spec.axes = config.axes;
  spec.params = config.params;
  spec.alpha = config.alpha;
  spec.beta = config.beta;
  spec.direction = config.direction;
  spec.lindblad.dt = config.dt;
  spec.threads = config.threads;
  return spec;
}

std::string format_csv(const SweepResult& result) {
  std::string s;
  for (const auto& [k, v] : result.metadata) s += "# " + k + ": " + v + "\n";
  for (std::size_t c = 0; c < result.columns.size(); ++c) s += (c ? "," : "") + result.columns[c];
  s += '\n';
  for (const auto& row : result.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + format_value(row[c]);
    s += '\n';
  }
  return s;
}

std::string format_json(const SweepResult& result) {
  json doc;
  json meta = json::object();
  for (const auto& [k, v] : result.metadata) meta[k] = v;
  doc["metadata"] = meta;
  doc["columns"] = result.columns;
  json data = json::object();
  for (std::size_t c = 0; c < result.columns.size(); ++c) {
    json col = json::array();
    for (const auto& row : result.rows) {
      const double v = row[c];
      col.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    }
    data[result.columns[c]] = std::move(col);
  }
  doc["data"] = std::move(data);
  return doc.dump(2) + "\n";
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::Io, "write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path);
  }
}

int exit_code_for(const std::exception& e) noexcept {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return is_config_error(err->code()) ? 2 : 3;
  return 3;
}

std::string error_line(const std::exception& e, std::string_view experiment) {
  json j;
  const auto* err = dynamic_cast<const Error*>(&e);
  j["error"] = err ? std::string(error_name(err->code())) : std::string("Internal");
  j["exit"] = exit_code_for(e);
  j["experiment"] = std::string(experiment);
  j["message"] = e.what();
  return j.dump();
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const SweepResult result = sweep(to_sweep_spec(config));
    const std::string body =
        config.format == OutputFormat::Json ? format_json(result) : format_csv(result);
    if (config.output == "-") {
      out << body;
      out.flush();
    } else {
      write_atomic(config.output, body);
    }
    return 0;
  } catch (const std::exception& e) {
    err << error_line(e, config.experiment) << '\n';
    return exit_code_for(e);
  }
}

// Selftest ---------------------------------------------------------------------

namespace {

ComplexMatrix random_hermitian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = d(rng);
    for (std::size_t j = i + 1; j < n; ++j) {
      a(i, j) = Complex(d(rng), d(rng));
      a(j, i) = std::conj(a(i, j));
    }
  }
  return a;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_abs(); }

}  // namespace

int selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, double value) {
    out << (ok ? "PASS " : "FAIL ") << name << " (" << format_value(value) << ")\n";
    if (!ok) ++failures;
  };

  std::mt19937_64 rng(20240601);
  double recon = 0.0, unitary = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_hermitian(rng, 12);
    const HermitianEig eig = eig_hermitian(a);
    recon = std::max(recon, max_abs_diff(eig.reconstruct(), a) / std::max(1.0, a.max_abs()));
    const ComplexMatrix u = propagator(eig, 3.7);
    unitary = std::max(unitary, max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(12)));
  }
  check("eig_hermitian reconstruction", recon < 1e-10, recon);
  check("propagator unitarity", unitary < 1e-10, unitary);

  const HilbertSpace space = build_space(2);
  const std::array<double, 2> unit{1.0, 1.0};
  const SubspaceCatalog cat = subspace_catalog(space);
  const ZenoDecomposition s1 = zeno_decompose(restrict_to(build_h_dd(space, unit), cat.s1_basis()));
  const bool ranks = s1.groups.size() == 3 && s1.groups[0].rank == 1 && s1.groups[1].rank == 3 &&
                     s1.groups[2].rank == 1;
  check("S1 Zeno ranks {1, 3, 1}", ranks, static_cast<double>(s1.groups.size()));

  double chain = 0.0;
  for (double r : {0.01, 0.1, 0.25}) {
    const ComplexMatrix h{{0, r, 0}, {r, 0, 1}, {0, 1, 0}};
    for (double t : linspace(0.0, 50.0, 11)) {
      const double exact = std::norm(propagator(h, t)(0, 0));
      chain = std::max(chain, std::abs(exact - survival_probability(1.0, r, t)));
    }
  }
  check("survival formula vs three-level chain", chain < 1e-10, chain);

  const std::array<double, 2> k{10.0, 100.0};
  const auto dev = zeno_convergence_report(k, 51);
  check("Zeno deviation decreases with K", dev[1] < dev[0], dev[1]);

  SystemParams p;
  p.omega = 0.1;
  const ComplexMatrix h = system_hamiltonian(space, p).static_part();
  const PureState phi1(cat.phi[1]);
  const double t_end = std::numbers::pi / p.omega;
  const std::array<double, 1> t{t_end};
  const Trajectory exact = evolve_unitary(h, phi1, t);
  const Trajectory rk = evolve_lindblad(HamiltonianTerm(h), {}, DensityMatrix::from_pure(phi1), t);
  double closed = 0.0;
  for (std::size_t i = 0; i < space.dim(); ++i)
    closed = std::max(closed, std::abs(exact.rho_at(0)(i, i).real() - rk.rho_at(0)(i, i).real()));
  check("closed-system integrator vs propagator", closed < 1e-6, closed);

  p.gamma_nv = p.gamma_n = 0.005;
  const Trajectory open = simulate(p, phi1, linspace(0.0, t_end, 5));
  const auto& d = open.diagnostics;
  check("trace preservation", d.max_trace_error < 1e-7, d.max_trace_error);
  check("hermiticity", d.max_hermiticity_error < 1e-9, d.max_hermiticity_error);
  check("positivity", d.min_eigenvalue >= -1e-7, d.min_eigenvalue);

  out << (failures == 0 ? "selftest passed" : "selftest FAILED") << '\n';
  return failures == 0 ? 0 : 3;
}

}  // namespace nvzeno
