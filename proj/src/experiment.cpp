#include "tpslab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "tpslab/qubits.hpp"
#include "tpslab/version.hpp"

namespace tpslab::experiment {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kGalileanMaterializeDimCap = 4096;
constexpr std::size_t kSampleCap = 100000;

const std::map<std::string, Suite>& suite_names() {
  static const std::map<std::string, Suite> names{{"qubit-demo", Suite::QubitDemo},
                                                 {"galilean-check", Suite::GalileanCheck},
                                                 {"split-check", Suite::SplitCheck},
                                                 {"scatter", Suite::Scatter}};
  return names;
}

const std::map<std::string, scattering::PotentialShape>& shape_names() {
  static const std::map<std::string, scattering::PotentialShape> names{
      {"gaussian-well", scattering::PotentialShape::GaussianWell},
      {"gaussian-barrier", scattering::PotentialShape::GaussianBarrier},
      {"contact", scattering::PotentialShape::Contact}};
  return names;
}

std::string shape_name(scattering::PotentialShape s) {
  for (const auto& [name, value] : shape_names())
    if (value == s) return name;
  return "unknown";
}

std::string type_name(const json& j) { return j.type_name(); }

// Collects diagnostics while reading optional typed fields out of a JSON tree.
class Reader {
 public:
  explicit Reader(std::vector<Diagnostic>& diags) : diags_(diags) {}

  void error(std::string location, std::string message) { diags_.push_back({std::move(location), std::move(message)}); }

  bool object(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      error(ptr, "expected an object, found " + type_name(j));
      return false;
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
      if (!keys.count(key)) error(ptr + "/" + key, "unknown field");
    return true;
  }

  void number(const json& obj, const char* key, const std::string& ptr, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) return error(ptr + "/" + key, "expected a number, found " + type_name(v));
    out = v.get<double>();
    if (!std::isfinite(out)) error(ptr + "/" + key, "must be finite");
  }

  void count(const json& obj, const char* key, const std::string& ptr, std::size_t& out, std::size_t min,
             std::size_t max = kSampleCap) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      return error(ptr + "/" + key, "expected a nonnegative integer, found " + type_name(v));
    const auto value = v.get<std::uint64_t>();
    if (value < min || value > max) {
      std::ostringstream os;
      os << "must lie in [" << min << ", " << max << "]";
      return error(ptr + "/" + key, os.str());
    }
    out = static_cast<std::size_t>(value);
  }

  void integer(const json& obj, const char* key, const std::string& ptr, int& out, int min, int max) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) return error(ptr + "/" + key, "expected an integer, found " + type_name(v));
    const auto value = v.get<long long>();
    if (value < min || value > max) {
      std::ostringstream os;
      os << "must lie in [" << min << ", " << max << "]";
      return error(ptr + "/" + key, os.str());
    }
    out = static_cast<int>(value);
  }

  bool string(const json& obj, const char* key, const std::string& ptr, std::string& out) {
    if (!obj.contains(key)) return false;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      error(ptr + "/" + key, "expected a string, found " + type_name(v));
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

 private:
  std::vector<Diagnostic>& diags_;
};

std::string pointer_from_field(const std::string& base, std::string field) {
  std::replace(field.begin(), field.end(), '.', '/');
  return base + "/" + field;
}

void read_packet(Reader& r, const json& j, const std::string& ptr, scattering::Wavepacket& w) {
  if (!r.object(j, ptr, {"center", "momentum", "width"})) return;
  r.number(j, "center", ptr, w.center);
  r.number(j, "momentum", ptr, w.momentum);
  r.number(j, "width", ptr, w.width);
}

void read_model(Reader& r, const json& j, const std::string& ptr, scattering::ScatteringConfig& m,
                std::initializer_list<const char*> extra_keys) {
  std::vector<const char*> keys{"sites", "box_length", "mass_a", "mass_b", "potential",
                                "packet_a", "packet_b", "dt", "t_final"};
  keys.insert(keys.end(), extra_keys.begin(), extra_keys.end());
  if (!j.is_object()) return r.error(ptr, "expected an object, found " + type_name(j));
  {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items())
      if (!allowed.count(key)) r.error(ptr + "/" + key, "unknown field");
  }
  r.count(j, "sites", ptr, m.sites, 1, 1u << 12);
  r.number(j, "box_length", ptr, m.box_length);
  r.number(j, "mass_a", ptr, m.mass_a);
  r.number(j, "mass_b", ptr, m.mass_b);
  r.number(j, "dt", ptr, m.dt);
  r.number(j, "t_final", ptr, m.t_final);
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    const std::string pp = ptr + "/potential";
    if (r.object(p, pp, {"shape", "strength", "width"})) {
      std::string shape;
      if (r.string(p, "shape", pp, shape)) {
        const auto it = shape_names().find(shape);
        if (it == shape_names().end())
          r.error(pp + "/shape", "unknown shape '" + shape + "' (gaussian-well, gaussian-barrier, contact)");
        else
          m.potential.shape = it->second;
      }
      r.number(p, "strength", pp, m.potential.strength);
      r.number(p, "width", pp, m.potential.width);
    }
  }
  if (j.contains("packet_a")) read_packet(r, j.at("packet_a"), ptr + "/packet_a", m.packet_a);
  if (j.contains("packet_b")) read_packet(r, j.at("packet_b"), ptr + "/packet_b", m.packet_b);
}

ordered_json model_json(const scattering::ScatteringConfig& m) {
  auto packet = [](const scattering::Wavepacket& w) {
    return ordered_json{{"center", w.center}, {"momentum", w.momentum}, {"width", w.width}};
  };
  return ordered_json{{"sites", m.sites},
                      {"box_length", m.box_length},
                      {"mass_a", m.mass_a},
                      {"mass_b", m.mass_b},
                      {"potential",
                       {{"shape", shape_name(m.potential.shape)},
                        {"strength", m.potential.strength},
                        {"width", m.potential.width}}},
                      {"packet_a", packet(m.packet_a)},
                      {"packet_b", packet(m.packet_b)},
                      {"dt", m.dt},
                      {"t_final", m.t_final}};
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

// ---- suites ----

Check upper(std::string name, double residual, double tolerance, std::string detail = {}) {
  return Check{std::move(name), residual < tolerance, residual, tolerance, false, std::move(detail)};
}

Check lower(std::string name, double value, double bound, std::string detail = {}) {
  return Check{std::move(name), value > bound, value, bound, true, std::move(detail)};
}

std::array<double, 3> random_axis(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    std::array<double, 3> a{n(rng), n(rng), n(rng)};
    const double len = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    if (len > 1e-3) return {a[0] / len, a[1] / len, a[2] / len};
  }
}

RunResult run_qubit_demo(const ExperimentConfig& cfg) {
  RunResult out;
  auto& doc = out.document;
  Rng rng(cfg.seed);
  const auto ab = qubits::ab_tps();
  const auto pq = qubits::pq_tps();
  const Bipartition cut{{0}};

  ordered_json table = ordered_json::array();
  double reciprocity_comp = 0.0, reciprocity_bell = 0.0;
  const char* comp_labels[] = {"|00>", "|01>", "|10>", "|11>"};
  const char* bell_labels[] = {"|++>", "|+->", "|-+>", "|-->"};
  const auto comp = qubits::computational_basis();
  const auto bell = qubits::bell_basis();
  auto row = [&](const char* label, const StateVector& s, double expect_ab, double expect_pq, double& worst) {
    const double sab = entanglement_in_tps(s, ab, cut);
    const double spq = entanglement_in_tps(s, pq, cut);
    worst = std::max({worst, std::abs(sab - expect_ab), std::abs(spq - expect_pq)});
    table.push_back({{"state", label}, {"ab_entropy", sab}, {"pq_entropy", spq}});
  };
  for (int i = 0; i < 4; ++i) row(comp_labels[i], comp[static_cast<std::size_t>(i)], 0.0, 1.0, reciprocity_comp);
  for (int i = 0; i < 4; ++i) row(bell_labels[i], bell[static_cast<std::size_t>(i)], 1.0, 0.0, reciprocity_bell);
  out.checks.push_back(upper("reciprocity_computational_basis", reciprocity_comp, 1e-10,
                             "|jk>: AB entropy 0, PQ entropy 1; max deviation"));
  out.checks.push_back(upper("reciprocity_bell_basis", reciprocity_bell, 1e-10,
                             "|chi xi>: AB entropy 1, PQ entropy 0; max deviation"));

  const auto invariance = is_symmetry_invariant(ab, qubits::sampled_rotation_rep(), cut);
  double generator_residual = 0.0;
  for (const auto& g : invariance.generators) generator_residual = std::max(generator_residual, g.residual);
  out.checks.push_back(upper("generators_sum_local", generator_residual, 1e-9, "total spin generators, AB cut"));

  std::vector<StateVector> states;
  for (std::size_t i = 0; i < cfg.qubit.random_states; ++i) states.push_back(random_state({2, 2}, rng));
  std::vector<double> states_ab;
  for (const auto& s : states) states_ab.push_back(entanglement_in_tps(s, ab, cut));
  const auto zero_zero = comp[0];
  const double pq_before = entanglement_in_tps(zero_zero, pq, cut);

  std::uniform_real_distribution<double> angle_dist(0.0, 4.0 * std::numbers::pi);
  double worst_locality = 0.0, worst_invariance = 0.0, best_pq_change = 0.0;
  std::size_t nonlocal = 0;
  ordered_json rotations = ordered_json::array();
  for (std::size_t k = 0; k < cfg.qubit.rotation_samples; ++k) {
    const auto axis = random_axis(rng);
    const double angle = angle_dist(rng);
    const auto u = qubits::rotation_rep(axis, angle);
    const auto cert = is_local_unitary(u, ab, cut);
    if (!cert.local) ++nonlocal;
    worst_locality = std::max(worst_locality, cert.residual);
    for (std::size_t i = 0; i < states.size(); ++i)
      worst_invariance = std::max(worst_invariance, std::abs(entanglement_in_tps(apply(u, states[i]), ab, cut) - states_ab[i]));
    const double pq_change = std::abs(entanglement_in_tps(apply(u, zero_zero), pq, cut) - pq_before);
    best_pq_change = std::max(best_pq_change, pq_change);
    rotations.push_back({{"axis", {axis[0], axis[1], axis[2]}},
                         {"angle", angle},
                         {"ab_local", cert.local},
                         {"ab_residual", cert.residual},
                         {"pq_entropy_change_00", pq_change}});
  }
  std::ostringstream locality_detail;
  locality_detail << cfg.qubit.rotation_samples << " sampled rotations, " << nonlocal << " not local";
  auto locality = upper("rotations_local_ab", worst_locality, 1e-9, locality_detail.str());
  locality.passed = locality.passed && nonlocal == 0 && cfg.qubit.rotation_samples > 0;
  out.checks.push_back(locality);
  out.checks.push_back(upper("ab_entropy_invariant", worst_invariance, 1e-9, "random states under every sampled rotation"));
  out.checks.push_back(lower("pq_entropy_of_00_changes", best_pq_change, 0.01, "largest change over sampled rotations"));

  doc["tables"]["entropy"] = std::move(table);
  doc["tables"]["rotations"] = std::move(rotations);
  return out;
}

RunResult run_galilean_check(const ExperimentConfig& cfg) {
  RunResult out;
  const auto& p = cfg.galilean;
  Rng rng(cfg.seed);
  std::vector<galilean::GalileanElement> sample;
  for (std::size_t k = 0; k < p.elements; ++k)
    sample.push_back(galilean::random_compatible_element(p.particle, p.grid, rng, p.max_boost_steps, p.span));
  std::vector<galilean::MomentumSpinState> states;
  for (std::size_t k = 0; k < p.states; ++k) states.push_back(galilean::random_momentum_spin_state(p.grid, p.particle, rng));

  const auto report = galilean::check_momentum_spin_locality(p.particle, p.grid, sample, states, p.materialize);
  double norm_change = 0.0, spin_error = 0.0;
  std::size_t materialized = 0, nonlocal = 0;
  ordered_json table = ordered_json::array();
  for (const auto& e : report.elements) {
    norm_change = std::max(norm_change, e.max_norm_change);
    ordered_json row{{"element", e.label}, {"entropy_change", e.max_entropy_change}, {"norm_change", e.max_norm_change}};
    if (e.local) {
      ++materialized;
      if (!*e.local) ++nonlocal;
      row["local"] = *e.local;
      row["locality_residual"] = e.locality_residual.value_or(0.0);
      row["spin_factor_error"] = e.spin_factor_error.value_or(0.0);
      spin_error = std::max(spin_error, e.spin_factor_error.value_or(0.0));
    }
    table.push_back(std::move(row));
  }
  std::ostringstream dim;
  dim << p.grid.size() * p.particle.spin_dim() << "-dimensional momentum (x) spin space, " << sample.size()
      << " elements, " << states.size() << " states";
  out.checks.push_back(upper("entropy_preserved", report.worst_entropy_change, galilean::kGalileanEntropyTol, dim.str()));
  out.checks.push_back(upper("norm_preserved", norm_change, 1e-10));
  if (p.materialize > 0) {
    std::ostringstream d;
    d << materialized << " materialized, " << nonlocal << " not local";
    auto c = upper("materialized_local", report.worst_locality_residual, 1e-9, d.str());
    c.passed = c.passed && nonlocal == 0;
    out.checks.push_back(c);
    out.checks.push_back(upper("spin_factor_is_wigner_d", spin_error, 1e-9, "spin factor vs D(R)^T up to phase"));
  }
  out.document["tables"]["elements"] = std::move(table);
  return out;
}

RunResult run_split_check(const ExperimentConfig& cfg) {
  RunResult out;
  const auto& p = cfg.split;
  Rng rng(cfg.seed);
  ordered_json table = ordered_json::array();
  double worst_residual = 0.0, worst_drift = 0.0, worst_sum_local = 0.0;
  auto record = [&](const std::string& kind, const scattering::SplitHamiltonian& sh) {
    const auto report = scattering::verify_split_factorization(sh, p.times, p.trajectories, rng);
    const auto h = sh.assemble();
    const auto cert = is_sum_local(h, TensorProductStructure::standard(h.dims(), "IE"), Bipartition{{0}});
    const double rel = cert.hs_norm > 0.0 ? cert.residual / cert.hs_norm : cert.residual;
    worst_residual = std::max(worst_residual, report.worst_residual);
    worst_drift = std::max(worst_drift, report.worst_entropy_drift);
    worst_sum_local = std::max(worst_sum_local, rel);
    table.push_back({{"hamiltonian", kind},
                     {"d_ext", sh.h_ext.size()},
                     {"d_int", sh.h_int.size()},
                     {"factorization_residuals", report.factorization_residuals},
                     {"worst_ie_entropy_drift", report.worst_entropy_drift},
                     {"sum_local_relative_residual", rel}});
  };
  for (auto de : p.dims)
    for (auto di : p.dims) record("random", scattering::random_split_hamiltonian(de, di, rng));
  if (p.model_ext > 0 && p.model_int > 0) record("lattice-com", scattering::build_split_model(p.model, p.model_ext, p.model_int));

  out.checks.push_back(upper("propagator_factorizes", worst_residual, scattering::kSplitResidualTol,
                             "||exp(-iHt) - exp(-iH_ext t) (x) exp(-iH_int t)||_F"));
  out.checks.push_back(upper("ie_entropy_constant", worst_drift, scattering::kSplitEntropyTol));
  out.checks.push_back(upper("hamiltonian_sum_local", worst_sum_local, kSumLocalRelTol, "relative to ||H||_HS"));
  out.document["tables"]["hamiltonians"] = std::move(table);
  return out;
}

RunResult run_scatter(const ExperimentConfig& cfg) {
  RunResult out;
  const auto& p = cfg.scatter;
  const auto initial = scattering::build_initial_state(p.model);
  scattering::EvolveOptions options;
  options.sample_every = p.sample_every;
  options.energy_guard = p.energy_guard;
  const auto traj = scattering::evolve(p.model, initial, p.model.steps(), options);

  ordered_json series;
  std::vector<double> t, s_ab, s_ie, norm, momentum, energy;
  double peak = 0.0, peak_time = 0.0;
  for (const auto& smp : traj.samples) {
    t.push_back(smp.t);
    s_ab.push_back(smp.interparticle_entropy);
    if (smp.ie_entropy) s_ie.push_back(*smp.ie_entropy);
    norm.push_back(smp.norm);
    momentum.push_back(smp.total_momentum);
    energy.push_back(smp.energy);
    if (smp.interparticle_entropy > peak) {
      peak = smp.interparticle_entropy;
      peak_time = smp.t;
    }
  }
  series["t"] = t;
  series["interparticle_entropy"] = s_ab;
  if (!s_ie.empty()) series["ie_entropy"] = s_ie;
  series["norm"] = norm;
  series["total_momentum"] = momentum;
  series["energy"] = energy;

  const double initial_entropy = traj.samples.front().interparticle_entropy;
  out.checks.push_back(upper("norm_drift", traj.norm_drift, 1e-10));
  out.checks.push_back(upper("total_momentum_drift", traj.momentum_drift, 1e-8, "relative to max(|<P>_0|, p_rms_0)"));
  out.checks.push_back(upper("initial_interparticle_entropy", initial_entropy, 1e-6, "bits"));
  std::ostringstream d;
  d << "largest sampled value, at t = " << peak_time;
  out.checks.push_back(lower("interparticle_entropy_generated", peak, 0.1, d.str()));
  if (traj.ie_peak_to_peak)
    out.checks.push_back(upper("ie_entropy_drift", *traj.ie_peak_to_peak, p.ie_drift_bound, "peak to peak, bits"));

  out.document["summary"] = ordered_json{{"steps", p.model.steps()},
                                         {"final_interparticle_entropy", s_ab.back()},
                                         {"peak_interparticle_entropy", peak},
                                         {"peak_time", peak_time},
                                         {"relative_energy_drift", traj.energy_drift},
                                         {"packet_overlap", scattering::packet_overlap(p.model)}};
  out.document["series"]["trajectory"] = std::move(series);
  out.warnings = traj.warnings;
  return out;
}

}  // namespace

std::string to_string(Suite s) {
  for (const auto& [name, value] : suite_names())
    if (value == s) return name;
  return "unknown";
}

std::string to_string(OutputFormat f) { return f == OutputFormat::Json ? "json" : "csv"; }

ordered_json ExperimentConfig::echo() const {
  ordered_json j{{"schema_version", kSchemaVersion}, {"suite", to_string(suite)}, {"seed", seed},
                 {"output", {{"format", to_string(format)}}}};
  switch (suite) {
    case Suite::QubitDemo:
      j["qubit-demo"] = {{"rotation_samples", qubit.rotation_samples}, {"random_states", qubit.random_states}};
      break;
    case Suite::GalileanCheck:
      j["galilean-check"] = {{"mass", galilean.particle.mass},
                             {"internal_energy", galilean.particle.internal_energy},
                             {"spin", galilean.particle.spin.value()},
                             {"points_per_axis", galilean.grid.points_per_axis},
                             {"spacing", galilean.grid.spacing},
                             {"elements", galilean.elements},
                             {"states", galilean.states},
                             {"materialize", galilean.materialize},
                             {"max_boost_steps", galilean.max_boost_steps},
                             {"span", galilean.span}};
      break;
    case Suite::SplitCheck:
      j["split-check"] = {{"dims", split.dims},           {"times", split.times},
                          {"trajectories", split.trajectories}, {"model_ext", split.model_ext},
                          {"model_int", split.model_int}, {"model", model_json(split.model)}};
      break;
    case Suite::Scatter: {
      auto m = model_json(scatter.model);
      m["sample_every"] = scatter.sample_every;
      m["ie_drift_bound"] = scatter.ie_drift_bound;
      m["energy_guard"] = scatter.energy_guard;
      j["scatter"] = std::move(m);
      break;
    }
  }
  return j;
}

ParseOutcome parse_config(const std::string& text) {
  ParseOutcome out;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream loc;
    loc << "line " << line << ", column " << column;
    std::string msg = e.what();
    if (const auto col = msg.find("column"); col != std::string::npos)
      if (const auto pos = msg.find(": ", col); pos != std::string::npos) msg = msg.substr(pos + 2);
    out.diagnostics.push_back({loc.str(), "parse error: " + msg});
    return out;
  }

  Reader r(out.diagnostics);
  if (!r.object(root, "", {"schema_version", "suite", "seed", "output", "qubit-demo", "galilean-check", "split-check",
                           "scatter"}))
    return out;

  ExperimentConfig cfg;
  if (root.contains("schema_version")) {
    const auto& v = root.at("schema_version");
    if (!v.is_number_integer() || v.get<long long>() != kSchemaVersion)
      r.error("/schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
  }

  std::string suite;
  if (!root.contains("suite")) {
    r.error("/suite", "required field is missing");
  } else if (r.string(root, "suite", "", suite)) {
    const auto it = suite_names().find(suite);
    if (it == suite_names().end())
      r.error("/suite", "unknown suite '" + suite + "' (qubit-demo, galilean-check, split-check, scatter)");
    else
      cfg.suite = it->second;
  }

  if (!root.contains("seed")) {
    r.error("/seed", "required field is missing; seeds must be explicit");
  } else if (const auto& v = root.at("seed"); !v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    r.error("/seed", "expected a nonnegative integer, found " + type_name(v));
  } else {
    cfg.seed = v.get<std::uint64_t>();
  }

  if (root.contains("output")) {
    const auto& o = root.at("output");
    if (r.object(o, "/output", {"path", "format"})) {
      r.string(o, "path", "/output", cfg.output_path);
      std::string format;
      if (r.string(o, "format", "/output", format)) {
        if (format == "json")
          cfg.format = OutputFormat::Json;
        else if (format == "csv")
          cfg.format = OutputFormat::Csv;
        else
          r.error("/output/format", "unknown format '" + format + "' (json, csv)");
      }
    }
  }

  for (const auto& [name, value] : suite_names())
    if (root.contains(name) && !suite.empty() && name != suite)
      r.error("/" + name, "parameter block does not match suite '" + suite + "'");

  if (root.contains("qubit-demo") && suite == "qubit-demo") {
    const auto& q = root.at("qubit-demo");
    if (r.object(q, "/qubit-demo", {"rotation_samples", "random_states"})) {
      r.count(q, "rotation_samples", "/qubit-demo", cfg.qubit.rotation_samples, 1);
      r.count(q, "random_states", "/qubit-demo", cfg.qubit.random_states, 1);
    }
  }

  if (root.contains("galilean-check") && suite == "galilean-check") {
    const auto& g = root.at("galilean-check");
    const std::string ptr = "/galilean-check";
    auto& p = cfg.galilean;
    if (r.object(g, ptr, {"mass", "internal_energy", "spin", "points_per_axis", "spacing", "elements", "states",
                          "materialize", "max_boost_steps", "span"})) {
      r.number(g, "mass", ptr, p.particle.mass);
      r.number(g, "internal_energy", ptr, p.particle.internal_energy);
      double spin = p.particle.spin.value();
      r.number(g, "spin", ptr, spin);
      try {
        p.particle.spin = galilean::HalfInteger::from_double(spin);
        p.particle.validate();
      } catch (const Error& e) {
        r.error(ptr + (std::string(e.what()).find("mass") != std::string::npos ? "/mass" : "/spin"), e.what());
      }
      r.count(g, "points_per_axis", ptr, p.grid.points_per_axis, 2, 64);
      r.number(g, "spacing", ptr, p.grid.spacing);
      try {
        p.grid.validate();
      } catch (const Error& e) {
        r.error(ptr + "/points_per_axis", e.what());
      }
      r.count(g, "elements", ptr, p.elements, 1);
      r.count(g, "states", ptr, p.states, 1);
      r.count(g, "materialize", ptr, p.materialize, 0);
      r.integer(g, "max_boost_steps", ptr, p.max_boost_steps, 0, 1 << 20);
      r.number(g, "span", ptr, p.span);
      if (!(p.span >= 0.0)) r.error(ptr + "/span", "must be nonnegative");
      if (p.materialize > p.elements) r.error(ptr + "/materialize", "cannot exceed the number of elements");
      if (p.materialize > 0 && p.grid.size() * p.particle.spin_dim() > kGalileanMaterializeDimCap)
        r.error(ptr + "/materialize",
                "dense U(g) is limited to dimension " + std::to_string(kGalileanMaterializeDimCap) + "; set materialize to 0");
    }
  }

  if (root.contains("split-check") && suite == "split-check") {
    const auto& s = root.at("split-check");
    const std::string ptr = "/split-check";
    auto& p = cfg.split;
    if (r.object(s, ptr, {"dims", "times", "trajectories", "model_ext", "model_int", "model"})) {
      if (s.contains("dims")) {
        const auto& d = s.at("dims");
        if (!d.is_array() || d.empty()) {
          r.error(ptr + "/dims", "expected a nonempty array of dimensions");
        } else {
          p.dims.clear();
          for (std::size_t i = 0; i < d.size(); ++i) {
            if (!d[i].is_number_unsigned() || d[i].get<std::uint64_t>() < 1 || d[i].get<std::uint64_t>() > scattering::kSplitDimCap)
              r.error(ptr + "/dims/" + std::to_string(i),
                      "must be an integer in [1, " + std::to_string(scattering::kSplitDimCap) + "]");
            else
              p.dims.push_back(d[i].get<std::size_t>());
          }
        }
      }
      if (s.contains("times")) {
        const auto& t = s.at("times");
        if (!t.is_array() || t.empty()) {
          r.error(ptr + "/times", "expected a nonempty array of times");
        } else {
          p.times.clear();
          for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t[i].is_number() || !std::isfinite(t[i].get<double>()))
              r.error(ptr + "/times/" + std::to_string(i), "expected a finite number");
            else
              p.times.push_back(t[i].get<double>());
          }
        }
      }
      r.count(s, "trajectories", ptr, p.trajectories, 1);
      r.count(s, "model_ext", ptr, p.model_ext, 0, scattering::kSplitDimCap);
      r.count(s, "model_int", ptr, p.model_int, 0, scattering::kSplitDimCap);
      if (s.contains("model")) read_model(r, s.at("model"), ptr + "/model", p.model, {});
      if (p.model_ext * p.model_int > scattering::kSplitProductCap)
        r.error(ptr + "/model_int", "d_ext * d_int exceeds " + std::to_string(scattering::kSplitProductCap));
    }
  }

  if (suite == "scatter") {
    auto& p = cfg.scatter;
    if (root.contains("scatter")) {
      const auto& s = root.at("scatter");
      const std::string ptr = "/scatter";
      read_model(r, s, ptr, p.model, {"sample_every", "ie_drift_bound", "energy_guard"});
      if (s.is_object()) {
        r.count(s, "sample_every", ptr, p.sample_every, 1);
        r.number(s, "ie_drift_bound", ptr, p.ie_drift_bound);
        r.number(s, "energy_guard", ptr, p.energy_guard);
        if (!(p.ie_drift_bound > 0.0)) r.error(ptr + "/ie_drift_bound", "must be positive");
        if (!(p.energy_guard > 0.0)) r.error(ptr + "/energy_guard", "must be positive");
      }
    }
    if (out.diagnostics.empty())
      for (const auto& v : scattering::check_config(p.model)) r.error(pointer_from_field("/scatter", v.field), v.message);
  }

  if (out.diagnostics.empty()) out.config = std::move(cfg);
  return out;
}

ParseOutcome load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseOutcome out;
    out.diagnostics.push_back({"", "cannot open config file '" + path.string() + "'"});
    return out;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

RunResult run_suite(const ExperimentConfig& config) {
  RunResult result;
  switch (config.suite) {
    case Suite::QubitDemo: result = run_qubit_demo(config); break;
    case Suite::GalileanCheck: result = run_galilean_check(config); break;
    case Suite::SplitCheck: result = run_split_check(config); break;
    case Suite::Scatter: result = run_scatter(config); break;
  }
  result.passed = std::all_of(result.checks.begin(), result.checks.end(), [](const Check& c) { return c.passed; });

  ordered_json checks = ordered_json::array();
  for (const auto& c : result.checks)
    checks.push_back({{"name", c.name},
                      {"verdict", c.passed ? "PASS" : "FAIL"},
                      {"residual", c.residual},
                      {"relation", c.lower_bound ? ">" : "<"},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});

  ordered_json doc{{"schema_version", kSchemaVersion},
                   {"library_version", kVersion},
                   {"suite", to_string(config.suite)},
                   {"config", config.echo()},
                   {"passed", result.passed},
                   {"checks", std::move(checks)}};
  for (const char* section : {"summary", "tables", "series"})
    if (result.document.contains(section)) doc[section] = std::move(result.document[section]);
  doc["warnings"] = result.warnings;
  result.document = std::move(doc);
  return result;
}

Outcome run_file(const std::filesystem::path& config_path, const std::optional<std::string>& output_override,
                 const std::optional<OutputFormat>& format_override) {
  Outcome out;
  auto parsed = load_config(config_path);
  if (!parsed.config) {
    out.exit_code = kExitConfig;
    out.diagnostics = std::move(parsed.diagnostics);
    return out;
  }
  auto cfg = std::move(*parsed.config);
  if (output_override) cfg.output_path = *output_override;
  if (format_override) cfg.format = *format_override;
  if (cfg.output_path.empty()) {
    out.exit_code = kExitConfig;
    out.diagnostics.push_back({"/output/path", "no output path in the config and no --output given"});
    return out;
  }

  try {
    auto result = run_suite(cfg);
    write_atomically(cfg.output_path, render(result.document, cfg.format));
    out.exit_code = result.passed ? kExitOk : kExitChecksFailed;
    out.result = std::move(result);
  } catch (const Error& e) {
    out.message = e.what();
    switch (e.kind()) {
      case ErrorKind::NumericalGuard: out.exit_code = kExitGuard; break;
      case ErrorKind::Config: out.exit_code = kExitConfig; break;
      default: out.exit_code = kExitRuntime; break;
    }
  }
  return out;
}

}  // namespace tpslab::experiment
