#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kdb/amplitudes.hpp"
#include "kdb/dynamics.hpp"

namespace kdb {

enum class ParticleKind { charged, polarizable };

struct ParticleSpec {
  ParticleKind kind = ParticleKind::charged;
  double mass = 0.0;            // kg
  double charge = 0.0;          // C, charged kind
  double polarizability = 0.0;  // C m^2 / V, polarizable kind

  static ParticleSpec charged_particle(double mass, double charge);
  static ParticleSpec polarizable_particle(double mass, double polarizability);
  void validate() const;
};

struct TrapSpec {
  double lambda_tl = 0.0;  // m
  double intensity = 0.0;  // standing-wave peak intensity, W/m^2
  double waist_y = 0.0;    // m
  double waist_z = 0.0;    // m
  double tau = 0.0;        // s, 0 for a continuous trap
  double v_z = 0.0;        // m/s

  void validate() const;
};

struct KDSpec {
  double intensity = 0.0;  // W/m^2
  double tau = 0.0;        // s
  double waist_y = 0.0;    // m
  double waist_z = 0.0;    // m
  int ladder_step = 2;
  double delta_p = 0.0;

  void validate() const;
};

struct DerivedScales {
  double omega_0 = 0.0;  // rad/s
  double x_0 = 0.0;      // m
  double k_0 = 0.0;      // 1/m
  double omega_kd = 0.0;
  double lambda_kd = 0.0;  // m
  double omega_1 = 0.0;
  double omega_2 = 0.0;
  double lambda_peak_si = 0.0;      // J
  double lambda_peak_dimless = 0.0;  // units of hbar omega_0
  double eta = 0.0;
  double tau_kd_periods = 0.0;
};

struct CouplingPeak {
  double joules = 0.0;
  double dimensionless = 0.0;
};

double trap_frequency(const ParticleSpec& particle, const TrapSpec& trap);

// Scales fixed by the trap and the resonance condition; the coupling fields are left at zero.
DerivedScales resonance_scales(const ParticleSpec& particle, const TrapSpec& trap, const KDSpec& kd);

CouplingPeak coupling_peak(const ParticleSpec& particle, const KDSpec& kd, const DerivedScales& scales);

double empirical_blockade(double delta_p);

// I_KD tau_KD product in J/m^2.
double empirical_pulse_energy(const ParticleSpec& particle, const DerivedScales& scales, double n_bk);

struct AnharmonicityReport {
  double bound = 0.0;
  double lambda_over_x0 = 0.0;
  std::optional<double> requested;
  double safety_factor = 10.0;
  std::optional<double> ratio;  // bound / requested
  bool feasible = true;
};

AnharmonicityReport anharmonicity_bound(const TrapSpec& trap, const DerivedScales& scales,
                                        std::optional<double> requested_n_max = std::nullopt,
                                        double safety_factor = 10.0);

enum class Regime { diffraction, bragg, channeling, indeterminate };

std::string to_string(Regime regime);

struct RegimeReport {
  Regime regime = Regime::indeterminate;
  double potential_depth = 0.0;  // J
  double recoil_energy = 0.0;    // J
  double transit_energy = 0.0;   // hbar / transit time, J
  double factor = 10.0;
};

RegimeReport regime_classify(const ParticleSpec& particle, const TrapSpec& trap, double factor = 10.0);

struct TimescaleLink {
  std::string larger;
  std::string smaller;
  double larger_value = 0.0;   // s
  double smaller_value = 0.0;  // s
  double ratio = 0.0;
  bool skipped = false;
  bool pass = false;
};

struct TimescaleReport {
  std::vector<TimescaleLink> links;
  double threshold = 5.0;
  bool all_pass() const;
};

TimescaleReport validate_timescales(const TrapSpec& trap, const KDSpec& kd, const DerivedScales& scales,
                                    double threshold = 5.0);

struct DimensionlessScenario {
  Resonance1D resonance;
  PulseEnvelope pulse;
  DerivedScales scales;
};

DimensionlessScenario scenario_to_dimensionless(const ParticleSpec& particle, const TrapSpec& trap,
                                                const KDSpec& kd, CarrierMode mode = CarrierMode::full);

struct PhysicalInputs {
  TrapSpec trap;
  KDSpec kd;
};

// Rebuilds the SI trap and KD intensities, pulse length, ladder step and detuning from a dimensionless
// scenario; geometric fields not carried by the scenario are copied from the templates.
PhysicalInputs scenario_to_physical(const ParticleSpec& particle, const DimensionlessScenario& scenario,
                                    const TrapSpec& trap_template, const KDSpec& kd_template);

struct DesignInputs {
  std::string name;
  ParticleSpec particle;
  TrapSpec trap;
  KDSpec kd;
  std::optional<double> requested_n_max;
};

std::vector<std::string> table_presets();
DesignInputs table_preset(const std::string& name);

struct DesignPolicy {
  double timescale_threshold = 5.0;
  double regime_factor = 10.0;
  double anharmonicity_factor = 10.0;
};

nlohmann::json design_report(const DesignInputs& inputs, const DesignPolicy& policy = {});

}  // namespace kdb
