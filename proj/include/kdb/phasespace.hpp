#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kdb/amplitudes.hpp"
#include "kdb/dynamics.hpp"
#include "kdb/grid.hpp"

namespace kdb {

struct WavefunctionGrid {
  RealGrid grid;  // x0 (or hbar k0 for momentum wavefunctions)
  std::vector<std::complex<double>> values;
  double time_periods = 0.0;
  int n_top = -1;  // highest occupied level, -1 if unknown

  double norm() const;
  std::vector<double> density() const;
};

struct WignerGrid {
  RealGrid q;                  // x0 units
  RealGrid p;                  // hbar k0 units
  std::vector<double> values;  // hbar = 1 normalization; row-major, index i * p.size() + j
  double max_imag_residue = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * p.size() + j]; }
  double min() const;
  double max() const;
  // Integral over the physical phase-space measure (equals 1 for a normalized state).
  double integral() const;
};

struct Marginals {
  std::vector<double> position;  // per x0
  std::vector<double> momentum;  // per hbar k0
};

struct WignerOptions {
  double p_extent = 0.0;   // 0: 2 sqrt(n_top) + 8
  double p_spacing = 0.0;  // 0: the q spacing
  int threads = 1;
};

// Largest n with |C_n|^2 above threshold.
int highest_occupied(const StateVector1D& state, double threshold = 0.0);
// +-(2 sqrt(n_top) + 10) x0 at spacing x0/16.
RealGrid default_synthesis_grid(int n_top);

WavefunctionGrid synthesize(const StateVector1D& state, double t_periods, const RealGrid& grid);
// Momentum-space wavefunction on a grid in hbar k0 units.
WavefunctionGrid synthesize_momentum(const StateVector1D& state, double t_periods, const RealGrid& grid);

WignerGrid wigner(const WavefunctionGrid& psi, const WignerOptions& options = {});
Marginals marginals(const WignerGrid& w);

struct ProbabilityTrace {
  RealGrid grid;
  std::vector<double> times;    // periods
  std::vector<double> density;  // row per time
};

// |psi(x, t)|^2 over free evolution after the pulse, `samples` times spanning span_periods.
ProbabilityTrace probability_trace(const Trajectory1D& traj, const RealGrid& grid, double span_periods,
                                   int samples);

// <x^2>(t) over free evolution is extremal at t* (max) and t* + 1/4 period (min); returns t* in [0, 1/2).
double turning_time(const StateVector1D& state);
// Time in [0, 1/N_m) periods at which sum conj(C_n) C_{n+N_m} is real and positive: one lobe of an
// N_m-component cat sits on the +x axis. A quarter period later the lobes are spread along x.
double lobe_alignment_time(const StateVector1D& state, int ladder_step);

struct CatMetrics {
  int n_max = 0;
  double width = 0.0;
  double poissonian_sigma = 0.0;
  double dx_cat = 0.0;  // estimate 4 sqrt(n_max), x0
  double dp_cat = 0.0;  // estimate 4 sqrt(n_max), hbar k0
  double n_photon_recoils = 0.0;
  double mean_n = 0.0;
  double mean_energy = 0.0;  // hbar Omega0
  bool sub_poissonian = false;
  std::optional<double> turning_time;  // periods
  std::optional<double> measured_dx;   // x0
  std::optional<double> measured_dp;   // hbar k0
};

CatMetrics cat_metrics(const StateVector1D& state, const Resonance1D& resonance,
                       const std::optional<RealGrid>& grid = std::nullopt);

// Full width at half maximum of the populations on the ladder through n_max (spacing ladder_step),
// with linear interpolation of the half-maximum crossings.
double ladder_fwhm(const std::vector<double>& populations, int n_max, int ladder_step);
// Indices of strict local maxima (plateaus reported at their left end).
std::vector<std::size_t> local_maxima(const std::vector<double>& values);
// Distance between the two highest local maxima; ties broken by the leftmost pair. NaN if fewer than two.
double peak_separation(const std::vector<double>& density, const RealGrid& grid);
std::vector<double> gaussian_smooth(const std::vector<double>& values, double spacing, double sigma);
// Local maxima of the sigma-smoothed density at or above rel_threshold of its maximum.
std::vector<std::size_t> envelope_peaks(const std::vector<double>& density, const RealGrid& grid, double sigma = 1.0,
                                        double rel_threshold = 0.1);

// CSV with header "q/x0,p/hbar k0,W", preceded by a '#' metadata line when meta is non-empty.
void write_csv(std::ostream& out, const WignerGrid& w, const std::string& meta = "");
// 8-byte magic "KDBWIG01", uint32 nq, uint32 np (little-endian), nq*np float64 triplets (q, p, W),
// then uint32 length and that many bytes of UTF-8 metadata.
void write_binary(std::ostream& out, const WignerGrid& w, const std::string& meta = "");
WignerGrid read_binary(std::istream& in, std::string* meta = nullptr);
void write_marginals_csv(std::ostream& out, const WignerGrid& w, const Marginals& m, const std::string& meta = "");

}  // namespace kdb
