#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdb/config.hpp"
#include "kdb/dynamics.hpp"

namespace kdb {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIntegration = 3,
  kExitTruncation = 4,
  kExitCapacity = 5,
};

inline constexpr int kWignerMaxLevel = 400;

struct GlobalOptions {
  int threads = 1;
  std::filesystem::path output_dir = ".";
};

// One-dimensional scenario with every drive choice resolved to numbers.
struct Resolved1D {
  Resonance1D resonance{2, 0.0};
  PulseEnvelope pulse;
  std::size_t truncation = 0;
  int initial_level = 0;
  int blockade_level = -1;
  std::optional<TuneResult> tuning;
};

struct Resolved2D {
  Resonance2D resonance{1, 1, 0.0, 0.0};
  PulseEnvelope pulse;
  double omega_ratio = 1.0;
  std::size_t truncation_x = 0;
  std::size_t truncation_y = 0;
  int initial_x = 0;
  int initial_y = 0;
};

struct SweepOverride {
  std::optional<double> lambda_peak;
  std::optional<double> delta_p;
  std::optional<double> tau_periods;
};

Resolved1D resolve_1d(const ScenarioConfig& cfg, const SweepOverride& override_values = {}, int threads = 1);
Resolved2D resolve_2d(const ScenarioConfig& cfg);

nlohmann::json summarize(const Resolved1D& scenario, const Trajectory1D& traj);
nlohmann::json summarize(const Resolved2D& scenario, const Trajectory2D& traj);

// Max over phi of |<(|a> + e^{i phi}|b>)/sqrt2 | psi>|^2 = (|c_a| + |c_b|)^2 / 2.
double pair_fidelity(std::complex<double> c_a, std::complex<double> c_b);

nlohmann::json state_json(const StateVector1D& state, const Resolved1D& scenario, double time_periods,
                          const std::string& hash);
nlohmann::json state_json(const StateVector2D& state, const Resolved2D& scenario, double time_periods,
                          const std::string& hash);

int cmd_blockade(int n_bk, int ladder_step, const std::optional<std::string>& map_path, int map_levels,
                 double map_lo, double map_hi, int map_samples, const GlobalOptions& global, std::ostream& out);
int cmd_simulate(const std::string& config_path, const GlobalOptions& global, std::ostream& out);

struct WignerArgs {
  std::optional<double> time_periods;  // default: turning time
  double spacing = 1.0 / 16.0;
  std::optional<double> extent;
  std::optional<double> p_extent;
  std::optional<double> p_spacing;
  std::string format = "csv";  // csv, binary or both
  std::string prefix;          // default: state file stem
};

int cmd_wigner(const std::string& state_path, const WignerArgs& args, const GlobalOptions& global, std::ostream& out);
int cmd_design(const std::optional<std::string>& config_path, const std::optional<std::string>& preset,
               const GlobalOptions& global, std::ostream& out);
// Command-line values that replace fields of the config's sweep block.
struct SweepFlags {
  std::optional<std::string> parameter;
  std::optional<double> from;
  std::optional<double> to;
  std::optional<int> samples;
};

int cmd_sweep(const std::string& config_path, const SweepFlags& flags, const GlobalOptions& global,
              std::ostream& out);

// Parses argv, dispatches and maps failures to exit codes; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kdb
