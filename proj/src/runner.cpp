#include "rydgate/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#ifndef RYDGATE_VERSION
#define RYDGATE_VERSION "0.0.0"
#endif

namespace rydgate {

namespace {

using nlohmann::json;

void check_keys(const json& object, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : object.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& object, const char* key, T& target) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("'") + key + "': " + e.what());
  }
}

std::vector<double> number_list(const json& value, std::string_view where) {
  if (value.is_number()) return {value.get<double>()};
  if (value.is_array()) {
    std::vector<double> out;
    for (const auto& v : value) {
      if (!v.is_number()) throw ConfigError(std::string(where) + ": list entries must be numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  if (value.is_object()) {
    check_keys(value, where, {"start", "stop", "step"});
    if (!value.contains("start") || !value.contains("stop") || !value.contains("step"))
      throw ConfigError(std::string(where) + ": a range needs start, stop and step");
    const double start = value["start"].get<double>();
    const double stop = value["stop"].get<double>();
    const double step = value["step"].get<double>();
    if (!(step > 0.0) || stop < start) throw ConfigError(std::string(where) + ": empty or malformed range");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 1000000) throw ConfigError(std::string(where) + ": range has too many points");
    std::vector<double> out;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  throw ConfigError(std::string(where) + ": expected a number, a list or a range");
}

std::string number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.15g", value);
  return buffer;
}

struct PointSetup {
  LevelScheme scheme;
  DrivePair drive;
  ProtocolSpec spec;
};

PointSetup setup_point(const RunConfig& config, const SpeciesData& species, const SweepPoint& point) {
  LevelScheme scheme(point.geometry, species);
  const double tau = point.tau_pi_ns * 1e-9;
  const auto& d = config.drive;
  DrivePair drive = d.calibrate ? calibrate_drive(scheme, mhz(d.detuning_nb_mhz), tau, d.counter_rotating_term)
                                : make_drive_pair(scheme, mhz(d.rabi1_mhz), mhz(d.rabi2_mhz), mhz(d.detuning_nb_mhz));
  drive.counter_rotating_term = d.counter_rotating_term;
  const BeamProfile profile =
      config.beams.plane_wave
          ? BeamProfile::plane_wave()
          : BeamProfile::from_beams(GaussianBeam(config.beams.waist1_um * 1e-6, species.lambda1),
                                    GaussianBeam(config.beams.waist2_um * 1e-6, species.lambda2));
  ProtocolSpec spec;
  spec.drive = make_atom_drive(scheme, drive, profile, mhz(d.two_photon_detuning_mhz));
  spec.tau_pi = tau;
  spec.blockade_shift = mhz(config.blockade_shift_mhz);
  spec.geometry = point.geometry;
  spec.trap.omega_transverse = khz(config.trap.omega_transverse_khz);
  spec.trap.omega_axial = khz(config.trap.omega_axial_khz);
  spec.trap.temperature_axial = point.temperature_uk * 1e-6;
  spec.motion = config.numerics.motion;
  spec.samples_per_stage = config.numerics.samples_per_stage;
  return {std::move(scheme), drive, spec};
}

void check_truth_table(const TruthTable& table) {
  for (int i = 0; i < 4; ++i) {
    const double sum = table.probability.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::runtime_error("truth table row " + std::string(TruthTable::kInputs[i]) + " sums to " + number(sum));
  }
}

std::string point_columns(const SweepPoint& p) {
  return std::to_string(p.index) + "," + to_string(p.geometry) + "," + number(p.tau_pi_ns) + "," +
         number(p.temperature_uk);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json task_json(const TaskResult& task) {
  json j{{"index", task.point.index},
         {"geometry", to_string(task.point.geometry)},
         {"tau_pi_ns", task.point.tau_pi_ns},
         {"temperature_uK", task.point.temperature_uk},
         {"status", task.ok() ? "ok" : "failed"}};
  if (!task.ok()) {
    j["error"] = task.error;
    return j;
  }
  const auto& m = *task.metrics;
  j["fidelity"] = m.report.fidelity;
  j["purity"] = m.report.purity;
  j["coherent_fidelity"] = m.coherent_fidelity;
  j["min_eigenvalue"] = m.min_eigenvalue;
  j["clamped"] = m.clamped;
  j["channels"] = {{"depopulation", m.channels.depopulation},
                   {"optical_pumping", m.channels.optical_pumping},
                   {"cpt_leak", m.channels.cpt_leak},
                   {"cpt_repopulation", m.channels.cpt_repopulation},
                   {"rydberg_decay", m.channels.rydberg_decay},
                   {"rydberg_probability", m.channels.rydberg_probability}};
  if (m.tomography)
    j["tomography"] = {{"closest_unitary_eigenvalue", m.tomography->unitary.eigenvalue},
                       {"unitarity_deviation", m.tomography->unitary.unitarity_deviation},
                       {"ambiguous", m.tomography->unitary.ambiguous},
                       {"anti_hermitian_residual", m.tomography->process.anti_hermitian_residual}};
  return j;
}

json species_json(const RunConfig& config) {
  std::ifstream in(config.species_path.empty() ? std::filesystem::path(RYDGATE_DATA_DIR) / "rb87.json"
                                               : std::filesystem::path(config.species_path));
  if (!in) throw ConfigError("cannot open species file '" + config.species_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("species file: ") + e.what());
  }
  j.update(config.species_overrides);
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (!(blockade_shift_mhz >= 0.0)) throw ConfigError("blockade_shift_MHz must be non-negative");
  if (drive.detuning_nb_mhz == 0.0 || !std::isfinite(drive.detuning_nb_mhz))
    throw ConfigError("drive.detuning_nb_MHz must be finite and nonzero");
  if (!drive.calibrate && !(drive.rabi1_mhz > 0.0 && drive.rabi2_mhz > 0.0))
    throw ConfigError("drive: uncalibrated runs need positive rabi1_MHz and rabi2_MHz");
  if (!beams.plane_wave && !(beams.waist1_um > 0.0 && beams.waist2_um > 0.0))
    throw ConfigError("beams: waists must be positive");
  if (!(trap.omega_transverse_khz > 0.0 && trap.omega_axial_khz > 0.0))
    throw ConfigError("trap: frequencies must be positive");
  for (double t : trap.temperatures_uk)
    if (!(t >= 0.0)) throw ConfigError("trap: temperatures must be non-negative");
  if (tau_pi_ns.empty()) throw ConfigError("tau_pi_ns must not be empty");
  for (double t : tau_pi_ns)
    if (!(t > 0.0)) throw ConfigError("tau_pi_ns entries must be positive");
  const auto& m = numerics.motion;
  if (m.momentum_nodes < 1 || m.position_nodes < 1 || m.spectator_nodes < 1)
    throw ConfigError("numerics: node counts must be positive");
  if (m.steps_per_pi < 1) throw ConfigError("numerics: steps_per_pi must be positive");
  if (!(m.fock_tail > 0.0 && m.fock_tail < 1.0)) throw ConfigError("numerics: fock_tail must lie in (0, 1)");
  if (numerics.samples_per_stage < 3 || numerics.samples_per_stage % 2 == 0)
    throw ConfigError("numerics: samples_per_stage must be odd and at least 3");
  if (!(numerics.clamp_floor >= 0.0)) throw ConfigError("numerics: clamp_floor must be non-negative");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (!species_overrides.is_object()) throw ConfigError("species.overrides must be an object");
  try {
    species().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("species: ") + e.what());
  }
}

SpeciesData RunConfig::species() const {
  try {
    return parse_species(species_json(*this).dump());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("species: ") + e.what());
  }
}

RunConfig parse_config(const json& document) {
  const json& j = document.contains("config") && document.contains("format_version") ? document.at("config") : document;
  check_keys(j, "config",
             {"geometry", "blockade_shift_MHz", "drive", "beams", "trap", "tau_pi_ns", "numerics", "species",
              "output_dir", "channels", "compensation", "outputs"});
  RunConfig c;
  try {
    if (j.contains("geometry")) {
      c.geometries.clear();
      const json& g = j["geometry"];
      if (g.is_string()) {
        c.geometries.push_back(parse_geometry(g.get<std::string>()));
      } else if (g.is_array()) {
        for (const auto& name : g) c.geometries.push_back(parse_geometry(name.get<std::string>()));
      } else {
        throw ConfigError("geometry: expected a name or a list of names");
      }
    }
    read(j, "blockade_shift_MHz", c.blockade_shift_mhz);
    if (j.contains("drive")) {
      const json& d = j["drive"];
      check_keys(d, "drive",
                 {"calibrate", "rabi1_MHz", "rabi2_MHz", "detuning_nb_MHz", "two_photon_detuning_MHz",
                  "counter_rotating_term"});
      read(d, "calibrate", c.drive.calibrate);
      read(d, "rabi1_MHz", c.drive.rabi1_mhz);
      read(d, "rabi2_MHz", c.drive.rabi2_mhz);
      read(d, "detuning_nb_MHz", c.drive.detuning_nb_mhz);
      read(d, "two_photon_detuning_MHz", c.drive.two_photon_detuning_mhz);
      read(d, "counter_rotating_term", c.drive.counter_rotating_term);
    }
    if (j.contains("beams")) {
      const json& b = j["beams"];
      check_keys(b, "beams", {"plane_wave", "waist1_um", "waist2_um"});
      read(b, "plane_wave", c.beams.plane_wave);
      read(b, "waist1_um", c.beams.waist1_um);
      read(b, "waist2_um", c.beams.waist2_um);
    }
    if (j.contains("trap")) {
      const json& t = j["trap"];
      check_keys(t, "trap", {"omega_transverse_kHz", "omega_axial_kHz", "temperature_uK"});
      read(t, "omega_transverse_kHz", c.trap.omega_transverse_khz);
      read(t, "omega_axial_kHz", c.trap.omega_axial_khz);
      if (t.contains("temperature_uK")) c.trap.temperatures_uk = number_list(t["temperature_uK"], "trap.temperature_uK");
    }
    if (j.contains("tau_pi_ns")) c.tau_pi_ns = number_list(j["tau_pi_ns"], "tau_pi_ns");
    if (j.contains("numerics")) {
      const json& n = j["numerics"];
      check_keys(n, "numerics",
                 {"motion_model", "momentum_nodes", "position_nodes", "spectator_nodes", "fock_tail", "steps_per_pi",
                  "edge_tolerance", "samples_per_stage", "clamp_floor", "dressed_outputs"});
      auto& m = c.numerics.motion;
      if (n.contains("motion_model")) m.model = parse_motion_model(n["motion_model"].get<std::string>());
      read(n, "momentum_nodes", m.momentum_nodes);
      read(n, "position_nodes", m.position_nodes);
      read(n, "spectator_nodes", m.spectator_nodes);
      read(n, "fock_tail", m.fock_tail);
      read(n, "steps_per_pi", m.steps_per_pi);
      read(n, "edge_tolerance", m.edge_tolerance);
      read(n, "samples_per_stage", c.numerics.samples_per_stage);
      read(n, "clamp_floor", c.numerics.clamp_floor);
      read(n, "dressed_outputs", c.numerics.dressed_outputs);
    }
    if (j.contains("species")) {
      const json& s = j["species"];
      check_keys(s, "species", {"path", "overrides"});
      read(s, "path", c.species_path);
      if (s.contains("overrides")) c.species_overrides = s["overrides"];
    }
    read(j, "output_dir", c.output_dir);
    if (j.contains("channels")) {
      const json& ch = j["channels"];
      if (ch.is_string()) {
        c.channels = parse_channels(ch.get<std::string>());
      } else {
        check_keys(ch, "channels", {"depopulation", "optical_pumping", "cpt", "rydberg_decay"});
        read(ch, "depopulation", c.channels.depopulation);
        read(ch, "optical_pumping", c.channels.optical_pumping);
        read(ch, "cpt", c.channels.cpt);
        read(ch, "rydberg_decay", c.channels.rydberg_decay);
      }
    }
    if (j.contains("compensation")) c.compensation = parse_compensation_mode(j["compensation"].get<std::string>());
    if (j.contains("outputs")) {
      const json& o = j["outputs"];
      check_keys(o, "outputs", {"truth_table", "tomography"});
      read(o, "truth_table", c.outputs.truth_table);
      read(o, "tomography", c.outputs.tomography);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return parse_config(json::parse(in, nullptr, true, true));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const RunConfig& c) {
  json geometries = json::array();
  for (auto g : c.geometries) geometries.push_back(to_string(g));
  const auto& m = c.numerics.motion;
  return {
      {"geometry", geometries},
      {"blockade_shift_MHz", c.blockade_shift_mhz},
      {"drive",
       {{"calibrate", c.drive.calibrate},
        {"rabi1_MHz", c.drive.rabi1_mhz},
        {"rabi2_MHz", c.drive.rabi2_mhz},
        {"detuning_nb_MHz", c.drive.detuning_nb_mhz},
        {"two_photon_detuning_MHz", c.drive.two_photon_detuning_mhz},
        {"counter_rotating_term", c.drive.counter_rotating_term}}},
      {"beams", {{"plane_wave", c.beams.plane_wave}, {"waist1_um", c.beams.waist1_um}, {"waist2_um", c.beams.waist2_um}}},
      {"trap",
       {{"omega_transverse_kHz", c.trap.omega_transverse_khz},
        {"omega_axial_kHz", c.trap.omega_axial_khz},
        {"temperature_uK", c.trap.temperatures_uk}}},
      {"tau_pi_ns", c.tau_pi_ns},
      {"numerics",
       {{"motion_model", to_string(m.model)},
        {"momentum_nodes", m.momentum_nodes},
        {"position_nodes", m.position_nodes},
        {"spectator_nodes", m.spectator_nodes},
        {"fock_tail", m.fock_tail},
        {"steps_per_pi", m.steps_per_pi},
        {"edge_tolerance", m.edge_tolerance},
        {"samples_per_stage", c.numerics.samples_per_stage},
        {"clamp_floor", c.numerics.clamp_floor},
        {"dressed_outputs", c.numerics.dressed_outputs}}},
      {"species", {{"path", c.species_path}, {"overrides", c.species_overrides}}},
      {"output_dir", c.output_dir},
      {"channels",
       {{"depopulation", c.channels.depopulation},
        {"optical_pumping", c.channels.optical_pumping},
        {"cpt", c.channels.cpt},
        {"rydberg_decay", c.channels.rydberg_decay}}},
      {"compensation", to_string(c.compensation)},
      {"outputs", {{"truth_table", c.outputs.truth_table}, {"tomography", c.outputs.tomography}}},
  };
}

ChannelToggles parse_channels(std::string_view list) {
  if (list == "all") return {};
  ChannelToggles t = ChannelToggles::none();
  if (list == "none" || list.empty()) return t;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const std::string name(list.substr(start, end - start));
    if (name == "depopulation") t.depopulation = true;
    else if (name == "optical_pumping") t.optical_pumping = true;
    else if (name == "cpt") t.cpt = true;
    else if (name == "rydberg_decay") t.rydberg_decay = true;
    else throw ConfigError("unknown loss channel '" + name + "'");
    if (!seen.insert(name).second) throw ConfigError("loss channel '" + name + "' listed twice");
    start = end + 1;
  }
  return t;
}

std::string to_string(const ChannelToggles& t) {
  std::string out;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(t.depopulation, "depopulation");
  add(t.optical_pumping, "optical_pumping");
  add(t.cpt, "cpt");
  add(t.rydberg_decay, "rydberg_decay");
  return out.empty() ? "none" : out;
}

std::string SweepPoint::describe() const {
  return "task " + std::to_string(index) + " (geometry=" + to_string(geometry) + ", tau_pi=" + number(tau_pi_ns) +
         " ns, T=" + number(temperature_uk) + " uK)";
}

SweepSpec SweepSpec::from_config(const RunConfig& config) {
  SweepSpec sweep;
  for (auto g : config.geometries)
    for (double t : config.trap.temperatures_uk)
      for (double tau : config.tau_pi_ns)
        sweep.points.push_back({static_cast<int>(sweep.points.size()), g, t, tau});
  return sweep;
}

ProtocolSpec protocol_spec(const RunConfig& config, const SpeciesData& species, const SweepPoint& point) {
  return setup_point(config, species, point).spec;
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::sweep: return "sweep";
    case TaskKind::truth_table: return "truth-table";
    case TaskKind::tomography: return "tomography";
  }
  return "unknown";
}

bool SweepResults::all_ok() const {
  return std::all_of(tasks.begin(), tasks.end(), [](const TaskResult& t) { return t.ok(); });
}

PointMetrics evaluate_point(const RunConfig& config, const SpeciesData& species, const SweepPoint& point,
                            TaskKind kind) {
  const auto setup = setup_point(config, species, point);
  const auto& spec = setup.spec;
  const LossModel model = make_loss_model(setup.scheme, setup.drive, config.numerics.dressed_outputs);
  const PhaseCompensation seed = analytic_compensation(spec.drive, spec.tau_pi);
  const double root_half = 1.0 / std::sqrt(2.0);
  const LevelVector plus{root_half, root_half, 0.0};

  const auto trajectory = apply_protocol(spec, plus, plus);
  const auto ledger = apply_loss_ledger(spec, trajectory, model, config.channels, config.numerics.clamp_floor);
  const QubitVector target = ideal_blockade_state();

  PointMetrics m;
  m.coherent_fidelity = fidelity_purity(trajectory.final_pair_state(), target, config.compensation, seed).fidelity;
  m.report = fidelity_purity(ledger.rho, target, config.compensation, seed);
  m.min_eigenvalue = ledger.min_eigenvalue;
  m.clamped = ledger.clamped;
  m.channels = {ledger.ledger.depopulation.norm(),     ledger.ledger.optical_pumping.norm(),
                ledger.ledger.cpt_leak.norm(),         ledger.ledger.cpt_repopulation.norm(),
                ledger.ledger.rydberg_decay.norm(),    ledger.ledger.rydberg_probability};

  const GateRunner run = [&](const LevelVector& control, const LevelVector& target_state) {
    const auto traj = apply_protocol(spec, control, target_state);
    return apply_loss_ledger(spec, traj, model, config.channels, config.numerics.clamp_floor).rho;
  };
  if (kind == TaskKind::truth_table || config.outputs.truth_table) {
    m.truth_table = truth_table(run, m.report.phases);
    check_truth_table(*m.truth_table);
  }
  if (kind == TaskKind::tomography || config.outputs.tomography) {
    Tomography tomo;
    tomo.process = chi_reconstruct(cnot_tomography_data(run, m.report.phases));
    tomo.unitary = closest_unitary(tomo.process);
    m.tomography = tomo;
  }
  return m;
}

SweepResults run_sweep(const RunConfig& config, TaskKind kind, int jobs) {
  config.validate();
  const SpeciesData species = config.species();
  const SweepSpec sweep = SweepSpec::from_config(config);
  SweepResults results;
  results.kind = kind;
  results.tasks.resize(sweep.points.size());
  if (sweep.points.empty()) return results;

  const auto hardware = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = std::min<std::size_t>(jobs > 0 ? static_cast<std::size_t>(jobs) : hardware, sweep.points.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < sweep.points.size(); i = next++) {
      auto& task = results.tasks[i];
      task.point = sweep.points[i];
      try {
        task.metrics = evaluate_point(config, species, task.point, kind);
      } catch (const std::exception& e) {
        task.error = task.point.describe() + ": " + e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  return results;
}

std::vector<std::filesystem::path> emit_outputs(const SweepResults& results, const RunConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const bool any_truth = std::any_of(results.tasks.begin(), results.tasks.end(),
                                     [](const TaskResult& t) { return t.ok() && t.metrics->truth_table; });
  const bool any_tomography = std::any_of(results.tasks.begin(), results.tasks.end(),
                                          [](const TaskResult& t) { return t.ok() && t.metrics->tomography; });
  const std::string head = "index,geometry,tau_pi_ns,temperature_uK";

  if (!results.tasks.empty()) {
    const fs::path path = dir / "points.csv";
    auto out = open_output(path);
    out << head
        << ",status,fidelity,purity,coherent_fidelity,phase_control,phase_target,min_eigenvalue,clamped,"
           "depopulation,optical_pumping,cpt_leak,cpt_repopulation,rydberg_decay,rydberg_probability\n";
    for (const auto& task : results.tasks) {
      out << point_columns(task.point);
      if (!task.ok()) {
        out << ",failed" << std::string(14, ',') << "\n";
        continue;
      }
      const auto& m = *task.metrics;
      const auto& c = m.channels;
      out << ",ok," << number(m.report.fidelity) << ',' << number(m.report.purity) << ','
          << number(m.coherent_fidelity) << ',' << number(m.report.phases.control) << ','
          << number(m.report.phases.target) << ',' << number(m.min_eigenvalue) << ',' << (m.clamped ? 1 : 0) << ','
          << number(c.depopulation) << ',' << number(c.optical_pumping) << ',' << number(c.cpt_leak) << ','
          << number(c.cpt_repopulation) << ',' << number(c.rydberg_decay) << ',' << number(c.rydberg_probability)
          << "\n";
    }
    finish(out, path);
    written.push_back(path);
  }

  if (any_truth) {
    for (const auto& task : results.tasks)
      if (task.ok() && task.metrics->truth_table) check_truth_table(*task.metrics->truth_table);
    const fs::path path = dir / "truth_table.csv";
    auto out = open_output(path);
    out << head << ",input,kind";
    for (auto name : TruthTable::kOutputs) out << ',' << name;
    out << "\n";
    for (const auto& task : results.tasks) {
      if (!task.ok() || !task.metrics->truth_table) continue;
      const auto& table = *task.metrics->truth_table;
      const Eigen::Matrix4d post = postselect(table);
      for (int i = 0; i < 4; ++i) {
        out << point_columns(task.point) << ',' << TruthTable::kInputs[i] << ",raw";
        for (int k = 0; k < 9; ++k) out << ',' << number(table.probability(i, k));
        out << "\n" << point_columns(task.point) << ',' << TruthTable::kInputs[i] << ",postselected";
        for (int k = 0; k < 9; ++k) out << ',' << number(k < 4 ? post(i, k) : 0.0);
        out << "\n";
      }
    }
    finish(out, path);
    written.push_back(path);
  }

  if (any_tomography) {
    const fs::path chi_path = dir / "chi.csv";
    const fs::path unitary_path = dir / "closest_unitary.csv";
    auto chi = open_output(chi_path);
    auto unitary = open_output(unitary_path);
    chi << head << ",m,n,re,im\n";
    unitary << head << ",row,col,re,im,abs\n";
    for (const auto& task : results.tasks) {
      if (!task.ok() || !task.metrics->tomography) continue;
      const auto& t = *task.metrics->tomography;
      for (int m = 0; m < 16; ++m)
        for (int n = 0; n < 16; ++n)
          chi << point_columns(task.point) << ',' << m << ',' << n << ',' << number(t.process.chi(m, n).real()) << ','
              << number(t.process.chi(m, n).imag()) << "\n";
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          unitary << point_columns(task.point) << ',' << r << ',' << c << ',' << number(t.unitary.unitary(r, c).real())
                  << ',' << number(t.unitary.unitary(r, c).imag()) << ',' << number(std::abs(t.unitary.unitary(r, c)))
                  << "\n";
    }
    finish(chi, chi_path);
    finish(unitary, unitary_path);
    written.push_back(chi_path);
    written.push_back(unitary_path);
  }

  if (!results.tasks.empty()) {
    const fs::path path = dir / "summary.txt";
    auto out = open_output(path);
    const auto failed = std::count_if(results.tasks.begin(), results.tasks.end(), [](const auto& t) { return !t.ok(); });
    out << "rydgate " << to_string(results.kind) << ": " << results.tasks.size() << " task(s), " << failed
        << " failed\nchannels: " << to_string(config.channels) << "\ncompensation: " << to_string(config.compensation)
        << "\n\n";
    char line[160];
    std::snprintf(line, sizeof line, "%5s %-9s %10s %8s %10s %10s %10s\n", "task", "geometry", "tau_pi/ns", "T/uK",
                  "fidelity", "purity", "coherent");
    out << line;
    for (const auto& task : results.tasks) {
      const auto& p = task.point;
      if (task.ok()) {
        std::snprintf(line, sizeof line, "%5d %-9s %10.3f %8.3f %10.6f %10.6f %10.6f\n", p.index,
                      to_string(p.geometry).c_str(), p.tau_pi_ns, p.temperature_uk, task.metrics->report.fidelity,
                      task.metrics->report.purity, task.metrics->coherent_fidelity);
        out << line;
      } else {
        out << "  " << task.error << "\n";
      }
    }
    finish(out, path);
    written.push_back(path);
  }

  const fs::path manifest_path = dir / "manifest.json";
  json tasks = json::array();
  for (const auto& task : results.tasks) tasks.push_back(task_json(task));
  json files = json::array();
  for (const auto& p : written) files.push_back(p.filename().string());
  const json manifest{{"format_version", 1},
                      {"program", "rydgate"},
                      {"version", RYDGATE_VERSION},
                      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                            "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"task_kind", to_string(results.kind)},
                      {"config", to_json(config)},
                      {"species", species_json(config)},
                      {"files", files},
                      {"tasks", tasks}};
  auto out = open_output(manifest_path);
  out << manifest.dump(2) << "\n";
  finish(out, manifest_path);
  written.push_back(manifest_path);
  return written;
}

}  // namespace rydgate
