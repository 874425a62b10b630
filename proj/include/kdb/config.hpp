#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "kdb/design.hpp"
#include "kdb/dynamics.hpp"

namespace kdb {

enum class ScenarioMode { dimensionless, physical };

enum class CouplingRule { value, pi_pulse, tune_cat, from_intensity };

struct CouplingChoice {
  CouplingRule rule = CouplingRule::pi_pulse;
  double value = 0.0;       // rule == value
  double area_in_pi = 1.0;  // rule == pi_pulse
  int target = 0;           // rule == tune_cat
};

struct Drive1DConfig {
  int ladder_step = 2;
  std::optional<double> delta_p;
  std::optional<int> blockade_n;  // detuning from a blockade root instead
  int blockade_root = 1;
  CouplingChoice coupling;
  double tau_periods = 40.0;
  int initial_level = 0;

  double resolved_delta_p() const;
};

struct Drive2DConfig {
  int n_x = 1;
  int n_y = 1;
  double delta_px = 0.0;
  double delta_py = 0.0;
  double omega_ratio = 1.0;  // Omega_y / Omega_x
  CouplingChoice coupling;
  double tau_periods = 40.0;
  int initial_x = 0;
  int initial_y = 0;
};

struct SimulationConfig {
  std::size_t truncation = 0;  // 0: derived from the scenario
  std::size_t truncation_y = 0;
  CarrierMode carrier = CarrierMode::full;
  IntegratorControls integrator;
  int tune_samples = 64;
  double tune_rel_tol = 1e-3;
};

struct OutputConfig {
  std::string prefix;
  bool trajectory = true;
  bool state = true;
};

enum class SweepParameter { lambda_peak, delta_p, tau_periods };

struct SweepConfig {
  SweepParameter parameter = SweepParameter::lambda_peak;
  double from = 0.0;
  double to = 0.0;
  int samples = 0;
  bool geometric = false;
  std::vector<int> report_levels;
};

struct ScenarioConfig {
  ScenarioMode mode = ScenarioMode::dimensionless;
  int dimension = 1;
  Drive1DConfig drive;
  Drive2DConfig drive_2d;
  std::optional<DesignInputs> physical;
  DesignPolicy policy;
  SimulationConfig simulation;
  OutputConfig output;
  std::optional<SweepConfig> sweep;
  std::string hash;  // of the canonical JSON text
};

// Throws ConfigError naming the offending key path.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::string& path);

std::string canonical_hash(const nlohmann::json& doc);
std::string to_string(SweepParameter parameter);

}  // namespace kdb
