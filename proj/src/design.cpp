#include "kdb/design.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "kdb/constants.hpp"
#include "kdb/error.hpp"

namespace kdb {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) throw DomainError(fmt::format("{} must be positive, got {}", what, value));
}

double period(const DerivedScales& s) { return 2.0 * kPi / s.omega_0; }

nlohmann::json link_json(const TimescaleLink& link) {
  nlohmann::json j = {{"larger", link.larger},          {"smaller", link.smaller}, {"larger_s", link.larger_value},
                      {"smaller_s", link.smaller_value}, {"ratio", nullptr},        {"skipped", link.skipped},
                      {"pass", link.pass}};
  if (!link.skipped) j["ratio"] = link.ratio;
  return j;
}

}  // namespace

ParticleSpec ParticleSpec::charged_particle(double mass, double charge) {
  ParticleSpec p;
  p.kind = ParticleKind::charged;
  p.mass = mass;
  p.charge = charge;
  p.validate();
  return p;
}

ParticleSpec ParticleSpec::polarizable_particle(double mass, double polarizability) {
  ParticleSpec p;
  p.kind = ParticleKind::polarizable;
  p.mass = mass;
  p.polarizability = polarizability;
  p.validate();
  return p;
}

void ParticleSpec::validate() const {
  require_positive(mass, "particle mass");
  if (kind == ParticleKind::charged) {
    if (charge == 0.0 || !std::isfinite(charge)) throw DomainError("charged particle needs a nonzero charge");
    if (polarizability != 0.0) throw DomainError("charged particle must not carry a polarizability");
  } else {
    require_positive(polarizability, "polarizability");
    if (charge != 0.0) throw DomainError("polarizable particle must not carry a charge");
  }
}

void TrapSpec::validate() const {
  require_positive(lambda_tl, "trap wavelength");
  require_positive(intensity, "trap intensity");
  require_positive(waist_y, "trap waist y");
  require_positive(waist_z, "trap waist z");
  require_positive(v_z, "longitudinal speed");
  if (!(tau >= 0.0)) throw DomainError("trap pulse length must be non-negative");
}

void KDSpec::validate() const {
  if (!(intensity >= 0.0)) throw DomainError("KD intensity must be non-negative");
  require_positive(tau, "KD pulse length");
  require_positive(waist_y, "KD waist y");
  require_positive(waist_z, "KD waist z");
  if (ladder_step < 1) throw DomainError("ladder step must be at least 1");
  if (!(ladder_step + delta_p > 0.0)) throw DomainError("N_m + delta_p must be positive");
}

double trap_frequency(const ParticleSpec& particle, const TrapSpec& trap) {
  particle.validate();
  const double m = particle.mass;
  if (particle.kind == ParticleKind::charged) {
    require_positive(trap.intensity, "trap intensity");
    const double q2 = particle.charge * particle.charge;
    return std::sqrt(q2 * trap.intensity / (si::epsilon0 * std::pow(si::c, 3) * m * m));
  }
  require_positive(trap.intensity, "trap intensity");
  require_positive(trap.lambda_tl, "trap wavelength");
  return std::sqrt(4.0 * kPi * kPi * particle.polarizability * trap.intensity /
                   (si::epsilon0 * si::c * m * trap.lambda_tl * trap.lambda_tl));
}

DerivedScales resonance_scales(const ParticleSpec& particle, const TrapSpec& trap, const KDSpec& kd) {
  kd.validate();
  DerivedScales s;
  s.omega_0 = trap_frequency(particle, trap);
  s.x_0 = std::sqrt(si::hbar / (2.0 * particle.mass * s.omega_0));
  s.k_0 = std::sqrt(particle.mass * s.omega_0 / (2.0 * si::hbar));
  s.eta = 0.5 * (kd.ladder_step + kd.delta_p);
  // (k1 + k2) x0 = eta with k1 + k2 = 2 omega_KD / c
  s.omega_kd = 0.5 * si::c * s.eta / s.x_0;
  s.lambda_kd = 2.0 * kPi * si::c / s.omega_kd;
  s.omega_1 = s.omega_kd + 0.5 * kd.ladder_step * s.omega_0;
  s.omega_2 = s.omega_kd - 0.5 * kd.ladder_step * s.omega_0;
  s.tau_kd_periods = kd.tau / period(s);
  return s;
}

CouplingPeak coupling_peak(const ParticleSpec& particle, const KDSpec& kd, const DerivedScales& scales) {
  if (!(kd.intensity >= 0.0)) throw DomainError("KD intensity must be non-negative");
  CouplingPeak out;
  if (particle.kind == ParticleKind::charged) {
    const double a1 = std::sqrt(2.0 * kd.intensity / (si::epsilon0 * si::c)) / scales.omega_1;
    const double a2 = std::sqrt(2.0 * kd.intensity / (si::epsilon0 * si::c)) / scales.omega_2;
    out.joules = particle.charge * particle.charge / (2.0 * particle.mass) * a1 * a2;
  } else {
    const double field_sq = 2.0 * kd.intensity / (si::epsilon0 * si::c);
    out.joules = 0.5 * particle.polarizability * field_sq;
  }
  out.dimensionless = out.joules / (si::hbar * scales.omega_0);
  return out;
}

double empirical_blockade(double delta_p) {
  if (!(delta_p > -2.0)) throw DomainError(fmt::format("empirical blockade diverges for delta_p = {} <= -2", delta_p));
  const double r = 2.0 * kPi / (2.0 + delta_p);
  return 2.0 / 3.0 * r * r;
}

double empirical_pulse_energy(const ParticleSpec& particle, const DerivedScales& scales, double n_bk) {
  require_positive(n_bk, "blockade level");
  const double d = particle.kind == ParticleKind::charged
                       ? particle.mass * scales.omega_kd / (particle.charge * particle.charge)
                       : 1.0 / (particle.polarizability * scales.omega_kd);
  return d / si::mu0 * std::sqrt(32.0 * n_bk * si::hbar * particle.mass * scales.omega_0 / kPi);
}

AnharmonicityReport anharmonicity_bound(const TrapSpec& trap, const DerivedScales& scales,
                                        std::optional<double> requested_n_max, double safety_factor) {
  require_positive(safety_factor, "safety factor");
  AnharmonicityReport r;
  r.lambda_over_x0 = trap.lambda_tl / scales.x_0;
  r.bound = 3.0 / (16.0 * kPi * kPi) * r.lambda_over_x0 * r.lambda_over_x0;
  r.safety_factor = safety_factor;
  r.requested = requested_n_max;
  if (requested_n_max) {
    r.ratio = r.bound / *requested_n_max;
    r.feasible = *requested_n_max * safety_factor <= r.bound;
  }
  return r;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::diffraction: return "diffraction";
    case Regime::bragg: return "bragg";
    case Regime::channeling: return "channeling";
    case Regime::indeterminate: break;
  }
  return "indeterminate";
}

RegimeReport regime_classify(const ParticleSpec& particle, const TrapSpec& trap, double factor) {
  if (particle.kind != ParticleKind::charged) throw DomainError("regime classification applies to charged particles");
  particle.validate();
  trap.validate();
  require_positive(factor, "regime factor");
  RegimeReport r;
  r.factor = factor;
  const double omega_tl = 2.0 * kPi * si::c / trap.lambda_tl;
  const double k_tl = 2.0 * kPi / trap.lambda_tl;
  r.potential_depth = particle.charge * particle.charge * trap.intensity /
                      (2.0 * si::epsilon0 * si::c * omega_tl * omega_tl * particle.mass);
  r.recoil_energy = si::hbar * si::hbar * 4.0 * k_tl * k_tl / (2.0 * particle.mass);
  r.transit_energy = si::hbar * trap.v_z / trap.waist_z;
  const double u = r.potential_depth, e = r.recoil_energy, t = r.transit_energy;
  if (u >= factor * e && e >= factor * t) {
    r.regime = Regime::channeling;
  } else if (t >= factor * e && u >= factor * e) {
    r.regime = Regime::diffraction;
  } else if (e >= factor * t && e >= factor * u) {
    r.regime = Regime::bragg;
  }
  return r;
}

bool TimescaleReport::all_pass() const {
  for (const auto& link : links) {
    if (!link.skipped && !link.pass) return false;
  }
  return true;
}

TimescaleReport validate_timescales(const TrapSpec& trap, const KDSpec& kd, const DerivedScales& scales,
                                    double threshold) {
  require_positive(threshold, "timescale threshold");
  TimescaleReport report;
  report.threshold = threshold;
  const std::vector<std::pair<std::string, double>> chain = {
      {"tau_TL", trap.tau},
      {"W_z_TL/2v_z", trap.waist_z / (2.0 * trap.v_z)},
      {"W_z_KD/2v_z", kd.waist_z / (2.0 * trap.v_z)},
      {"tau_KD", kd.tau},
      {"40 trap periods", 40.0 * period(scales)},
  };
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    TimescaleLink link;
    link.larger = chain[i].first;
    link.smaller = chain[i + 1].first;
    link.larger_value = chain[i].second;
    link.smaller_value = chain[i + 1].second;
    if (i == 0 && trap.tau == 0.0) {
      link.skipped = true;
    } else {
      link.ratio = link.larger_value / link.smaller_value;
      link.pass = link.ratio >= threshold;
    }
    report.links.push_back(link);
  }
  return report;
}

DimensionlessScenario scenario_to_dimensionless(const ParticleSpec& particle, const TrapSpec& trap, const KDSpec& kd,
                                                CarrierMode mode) {
  DerivedScales scales = resonance_scales(particle, trap, kd);
  const auto peak = coupling_peak(particle, kd, scales);
  scales.lambda_peak_si = peak.joules;
  scales.lambda_peak_dimless = peak.dimensionless;
  const Resonance1D resonance(kd.ladder_step, kd.delta_p);
  const auto pulse = make_pulse(resonance, peak.dimensionless, scales.tau_kd_periods, mode);
  return {resonance, pulse, scales};
}

PhysicalInputs scenario_to_physical(const ParticleSpec& particle, const DimensionlessScenario& scenario,
                                    const TrapSpec& trap_template, const KDSpec& kd_template) {
  particle.validate();
  const DerivedScales& s = scenario.scales;
  PhysicalInputs out{trap_template, kd_template};
  const double m = particle.mass;
  const double w2 = s.omega_0 * s.omega_0;
  if (particle.kind == ParticleKind::charged) {
    out.trap.intensity = w2 * si::epsilon0 * std::pow(si::c, 3) * m * m / (particle.charge * particle.charge);
  } else {
    out.trap.intensity = w2 * si::epsilon0 * si::c * m * trap_template.lambda_tl * trap_template.lambda_tl /
                         (4.0 * kPi * kPi * particle.polarizability);
  }
  out.kd.ladder_step = scenario.resonance.ladder_step();
  out.kd.delta_p = scenario.resonance.delta_p();
  out.kd.tau = scenario.pulse.tau_periods * 2.0 * kPi / s.omega_0;
  const double joules = scenario.pulse.lambda_peak * si::hbar * s.omega_0;
  if (particle.kind == ParticleKind::charged) {
    // lambda = q^2/(2m) * 2 I / (eps0 c omega1 omega2)
    out.kd.intensity = joules * m * si::epsilon0 * si::c * s.omega_1 * s.omega_2 / (particle.charge * particle.charge);
  } else {
    out.kd.intensity = joules * si::epsilon0 * si::c / particle.polarizability;
  }
  return out;
}

std::vector<std::string> table_presets() { return {"electron", "tppf84", "sio2"}; }

DesignInputs table_preset(const std::string& name) {
  DesignInputs in;
  in.name = name;
  if (name == "electron") {
    in.particle = ParticleSpec::charged_particle(si::electron_mass, -si::e);
    in.trap = {1.064e-6, 8e16, 100e-6, 1.6e-3, 0.75e-9, 6e6};
    in.kd = {2.6e15, 8e-11, 100e-6, 1.2e-3, 2, -1.8};
    in.requested_n_max = 648;
  } else if (name == "tppf84") {
    in.particle = ParticleSpec::polarizable_particle(2810.0 * si::atomic_mass, 2.22e-38);
    in.trap = {10.5e-6, 15e8, 20e-6, 5e-3, 0.0, 0.1};
    in.kd = {1.2e7, 1e-2, 10e-6, 3e-3, 2, -1.93};
  } else if (name == "sio2") {
    in.particle = ParticleSpec::polarizable_particle(1e6 * si::atomic_mass, 8.18e-36);
    in.trap = {5e-6, 10.4e5, 20e-6, 9e-3, 0.0, 0.02};
    in.kd = {2.3e3, 0.14, 100e-6, 8e-3, 2, -1.93};
  } else {
    throw ConfigError(fmt::format("unknown preset '{}'", name));
  }
  return in;
}

nlohmann::json design_report(const DesignInputs& in, const DesignPolicy& policy) {
  in.particle.validate();
  in.trap.validate();
  in.kd.validate();
  const auto scenario = scenario_to_dimensionless(in.particle, in.trap, in.kd);
  const auto& s = scenario.scales;
  nlohmann::json j;
  nlohmann::json particle = {{"kind", in.particle.kind == ParticleKind::charged ? "charged" : "polarizable"},
                             {"mass_kg", in.particle.mass}};
  if (in.particle.kind == ParticleKind::charged) {
    particle["charge_C"] = in.particle.charge;
  } else {
    particle["polarizability_Cm2_per_V"] = in.particle.polarizability;
  }
  j["inputs"] = {{"name", in.name},
                 {"particle", particle},
                 {"trap",
                  {{"lambda_m", in.trap.lambda_tl},
                   {"intensity_W_per_m2", in.trap.intensity},
                   {"waist_y_m", in.trap.waist_y},
                   {"waist_z_m", in.trap.waist_z},
                   {"tau_s", in.trap.tau},
                   {"v_z_m_per_s", in.trap.v_z}}},
                 {"kd",
                  {{"intensity_W_per_m2", in.kd.intensity},
                   {"tau_s", in.kd.tau},
                   {"waist_y_m", in.kd.waist_y},
                   {"waist_z_m", in.kd.waist_z},
                   {"ladder_step", in.kd.ladder_step},
                   {"delta_p", in.kd.delta_p}}}};
  if (in.requested_n_max) j["inputs"]["n_max"] = *in.requested_n_max;
  j["scales"] = {{"omega_0_rad_per_s", s.omega_0},
                 {"x_0_m", s.x_0},
                 {"k_0_per_m", s.k_0},
                 {"omega_kd_rad_per_s", s.omega_kd},
                 {"lambda_kd_m", s.lambda_kd},
                 {"omega_1_rad_per_s", s.omega_1},
                 {"omega_2_rad_per_s", s.omega_2},
                 {"lambda_peak_J", s.lambda_peak_si},
                 {"lambda_peak_hbar_omega_0", s.lambda_peak_dimless},
                 {"eta", s.eta},
                 {"tau_kd_periods", s.tau_kd_periods}};
  const auto timescales = validate_timescales(in.trap, in.kd, s, policy.timescale_threshold);
  nlohmann::json links = nlohmann::json::array();
  for (const auto& link : timescales.links) links.push_back(link_json(link));
  j["timescales"] = {{"threshold", timescales.threshold}, {"links", links}, {"all_pass", timescales.all_pass()}};
  if (in.particle.kind == ParticleKind::charged) {
    const auto regime = regime_classify(in.particle, in.trap, policy.regime_factor);
    j["regime"] = {{"regime", to_string(regime.regime)},
                   {"factor", regime.factor},
                   {"potential_depth_J", regime.potential_depth},
                   {"recoil_energy_J", regime.recoil_energy},
                   {"transit_energy_J", regime.transit_energy},
                   {"depth_over_recoil", regime.potential_depth / regime.recoil_energy},
                   {"recoil_over_transit", regime.recoil_energy / regime.transit_energy}};
  } else {
    j["regime"] = {{"regime", "not classified"}, {"reason", "regimes are defined for charged particles"}};
  }
  const double n_bk = empirical_blockade(in.kd.delta_p);
  const double energy = empirical_pulse_energy(in.particle, s, n_bk);
  j["empirical"] = {{"n_bk", n_bk},
                    {"pulse_energy_J_per_m2", energy},
                    {"actual_pulse_energy_J_per_m2", in.kd.intensity * in.kd.tau},
                    {"actual_over_empirical", in.kd.intensity * in.kd.tau / energy}};
  const auto anh = anharmonicity_bound(in.trap, s, in.requested_n_max.value_or(n_bk), policy.anharmonicity_factor);
  j["anharmonicity"] = {{"bound", anh.bound},
                        {"lambda_tl_over_x0", anh.lambda_over_x0},
                        {"checked_n_max", *anh.requested},
                        {"bound_over_n_max", *anh.ratio},
                        {"safety_factor", anh.safety_factor},
                        {"feasible", anh.feasible}};
  j["n_sca"] = "not computed";
  return j;
}

}  // namespace kdb
