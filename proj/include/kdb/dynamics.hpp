#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "kdb/amplitudes.hpp"
#include "kdb/cash_karp.hpp"

namespace kdb {

enum class CarrierMode { full, rotating_wave };

// Gaussian-envelope bichromatic drive F(t) = lambda exp(-2t^2/tau^2) {cos|sin}(carrier t).
// Internal units: energies in hbar Omega0, time in 1/Omega0; tau is given in periods 2pi/Omega0.
struct PulseEnvelope {
  double lambda_peak = 0.0;
  double tau_periods = 1.0;
  double carrier = 2.0;  // beat frequency in units of Omega0
  bool odd = false;      // sin carrier for odd transitions
  CarrierMode mode = CarrierMode::full;

  double tau() const;
  double envelope(double t) const;
  double drive(double t) const;
  // Half-width of the integration window, 2.5 tau.
  double half_window() const { return 2.5 * tau(); }
};

PulseEnvelope make_pulse(const Resonance1D& resonance, double lambda_peak, double tau_periods,
                         CarrierMode mode = CarrierMode::full);
// omega_ratio = Omega_y / Omega_x; time unit is the x period.
PulseEnvelope make_pulse(const Resonance2D& resonance, double omega_ratio, double lambda_peak,
                         double tau_periods, CarrierMode mode = CarrierMode::full);

struct StateVector1D {
  ComplexVector amplitudes;

  static StateVector1D basis(std::size_t truncation, int level);
  std::size_t truncation() const { return amplitudes.size(); }
  std::vector<double> populations() const;
  double norm() const;
  // Residue class mod ladder_step of the lowest occupied level.
  int ladder_offset(int ladder_step) const;
  // Population in the top max(2, ladder_step) levels.
  double tail_population(int ladder_step) const;
};

struct StateVector2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  ComplexVector amplitudes;  // row-major, index m * ny + n

  static StateVector2D basis(std::size_t nx, std::size_t ny, int m, int n);
  std::complex<double>& at(std::size_t m, std::size_t n) { return amplitudes[m * ny + n]; }
  const std::complex<double>& at(std::size_t m, std::size_t n) const { return amplitudes[m * ny + n]; }
  std::vector<double> populations() const;
  double norm() const;
  // Population with m >= nx - band_x or n >= ny - band_y.
  double boundary_population(int band_x, int band_y) const;
};

struct IntegratorControls {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step_periods = 0.01;
  double min_step_periods = 1e-6;
  double max_step_periods = 0.0;  // 0: 1/(8 carrier)
  double snapshot_periods = 0.0;  // 0: window start and end only
  double tail_tol = 1e-8;
  bool enforce_tail = true;
};

template <class State>
struct Trajectory {
  std::vector<double> times;  // periods 2pi/Omega0, relative to the pulse centre
  std::vector<State> snapshots;
  std::vector<double> norm_drift;  // per snapshot
  double max_norm_drift = 0.0;     // over every accepted step
  double max_tail = 0.0;           // over every accepted step
  IntegratorStats stats;
  const State& final_state() const { return snapshots.back(); }
};

using Trajectory1D = Trajectory<StateVector1D>;
using Trajectory2D = Trajectory<StateVector2D>;

ComplexVector derivative_1d(double t, const StateVector1D& state, const Resonance1D& resonance,
                            const PulseEnvelope& pulse);
ComplexVector derivative_2d(double t, const StateVector2D& state, const Resonance2D& resonance,
                            const PulseEnvelope& pulse);

Trajectory1D integrate(const StateVector1D& initial, const Resonance1D& resonance, const PulseEnvelope& pulse,
                       const IntegratorControls& controls = {});
Trajectory2D integrate(const StateVector2D& initial, const Resonance2D& resonance, const PulseEnvelope& pulse,
                       const IntegratorControls& controls = {});

// Coupling whose Gaussian pulse area on a transition of amplitude `amplitude` is area_in_pi * pi.
double area_coupling(double amplitude, double tau_periods, double area_in_pi);
double pi_pulse_coupling(int n_from, int ladder_step, double eta, double tau_periods);

// First ladder level (from `start` in steps of N_m, below max_level) where the step amplitude
// changes sign; returns whichever of the two neighbours has the smaller |amplitude|, or -1.
int blockade_level(const Resonance1D& resonance, int start, int max_level);
// Next multiple of N_m above 1.5 (n_bk + 4 sqrt(n_bk)).
std::size_t default_truncation(int n_bk, int ladder_step);

struct TuneControls {
  double lambda_lo_factor = 0.25;  // relative to the ground-transition pi-pulse coupling
  double lambda_hi_factor = 8.0;
  int coarse_samples = 64;
  double rel_tol = 1e-3;
  std::size_t truncation = 0;  // 0: default_truncation
  CarrierMode mode = CarrierMode::full;
  IntegratorControls integrator{};
  int threads = 1;
};

struct TuneResult {
  PulseEnvelope pulse;
  double objective = 0.0;  // final population of the target level
  StateVector1D final_state;
  int blockade_level = -1;
  std::size_t truncation = 0;
  int evaluations = 0;
};

TuneResult tune_cat_pulse(int target_n_max, const Resonance1D& resonance, double tau_periods,
                          const TuneControls& controls = {});

}  // namespace kdb
