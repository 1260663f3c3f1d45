#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rydgate/analysis.hpp"
#include "rydgate/decoherence.hpp"

namespace rydgate {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Beam Rabi frequencies either calibrated to |Omega_eff| tau_pi = pi (equal beams) or fixed.
struct DriveConfig {
  bool calibrate = true;
  double rabi1_mhz = 0.0;
  double rabi2_mhz = 0.0;
  double detuning_nb_mhz = -3000.0;
  double two_photon_detuning_mhz = 0.0;
  bool counter_rotating_term = true;
};

struct BeamConfig {
  bool plane_wave = false;
  double waist1_um = 3.0;
  double waist2_um = 3.0;
};

struct TrapConfig {
  double omega_transverse_khz = 100.0;
  double omega_axial_khz = 20.0;
  std::vector<double> temperatures_uk{0.0};
};

struct NumericsConfig {
  MotionSettings motion;
  int samples_per_stage = 51;
  double clamp_floor = 1e-6;
  bool dressed_outputs = true;
};

struct OutputSelection {
  bool truth_table = false;
  bool tomography = false;
};

struct RunConfig {
  std::vector<Geometry> geometries{Geometry::circular};
  double blockade_shift_mhz = 50.0;
  DriveConfig drive;
  BeamConfig beams;
  TrapConfig trap;
  std::vector<double> tau_pi_ns{150.0};
  NumericsConfig numerics;
  // Species file (empty: bundled) and per-key overrides merged onto it before parsing.
  std::string species_path;
  nlohmann::json species_overrides = nlohmann::json::object();
  std::string output_dir = "out";
  ChannelToggles channels;
  CompensationMode compensation = CompensationMode::refined;
  OutputSelection outputs;

  void validate() const;
  SpeciesData species() const;
};

// Parses a config document; a run manifest is accepted too (its "config" member is used).
RunConfig parse_config(const nlohmann::json& document);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);
// Comma-separated channel names, or "all" / "none".
ChannelToggles parse_channels(std::string_view list);
std::string to_string(const ChannelToggles& channels);

struct SweepPoint {
  int index = 0;
  Geometry geometry = Geometry::circular;
  double temperature_uk = 0.0;
  double tau_pi_ns = 0.0;

  std::string describe() const;
};

// Cartesian product ordered geometry, then temperature, then tau.
struct SweepSpec {
  std::vector<SweepPoint> points;
  static SweepSpec from_config(const RunConfig& config);
};

ProtocolSpec protocol_spec(const RunConfig& config, const SpeciesData& species, const SweepPoint& point);

struct Tomography {
  ProcessMatrix process;
  ClosestUnitary unitary;
};

// Frobenius norm of each channel's contribution to the final density matrix.
struct ChannelDiagnostics {
  double depopulation = 0.0;
  double optical_pumping = 0.0;
  double cpt_leak = 0.0;
  double cpt_repopulation = 0.0;
  double rydberg_decay = 0.0;
  double rydberg_probability = 0.0;
};

struct PointMetrics {
  FidelityReport report;
  double coherent_fidelity = 0.0;  // before any loss channel
  double min_eigenvalue = 0.0;
  bool clamped = false;
  ChannelDiagnostics channels;
  std::optional<TruthTable> truth_table;
  std::optional<Tomography> tomography;
};

struct TaskResult {
  SweepPoint point;
  std::optional<PointMetrics> metrics;
  std::string error;

  bool ok() const { return metrics.has_value(); }
};

enum class TaskKind { sweep, truth_table, tomography };
std::string to_string(TaskKind kind);

struct SweepResults {
  TaskKind kind = TaskKind::sweep;
  std::vector<TaskResult> tasks;

  bool all_ok() const;
};

// Evaluates one sweep point; throws on any module error.
PointMetrics evaluate_point(const RunConfig& config, const SpeciesData& species, const SweepPoint& point,
                            TaskKind kind);

// Runs every point on `jobs` workers; failures are recorded per task and the sweep continues.
SweepResults run_sweep(const RunConfig& config, TaskKind kind, int jobs);

// Writes the CSV tables, manifest.json and summary.txt into config.output_dir.
// Returns the written paths; throws std::filesystem::filesystem_error or std::runtime_error on I/O failure.
std::vector<std::filesystem::path> emit_outputs(const SweepResults& results, const RunConfig& config);

}  // namespace rydgate
