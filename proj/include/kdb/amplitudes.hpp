#pragma once

#include <complex>
#include <ostream>
#include <vector>

namespace kdb {

// One-dimensional resonance: ladder step N_m and momentum detuning delta_p.
class Resonance1D {
 public:
  Resonance1D(int ladder_step, double delta_p);
  int ladder_step() const { return ladder_step_; }
  double delta_p() const { return delta_p_; }
  double eta() const { return eta_; }
  bool odd() const { return ladder_step_ % 2 == 1; }

 private:
  int ladder_step_;
  double delta_p_;
  double eta_;
};

// Two-axis resonance (n_x quanta along x, n_y along y).
class Resonance2D {
 public:
  Resonance2D(int n_x, int n_y, double delta_px, double delta_py);
  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }
  double delta_px() const { return delta_px_; }
  double delta_py() const { return delta_py_; }
  double eta_x() const { return eta_x_; }
  double eta_y() const { return eta_y_; }
  bool odd() const { return (n_x_ + n_y_) % 2 == 1; }

 private:
  int n_x_, n_y_;
  double delta_px_, delta_py_;
  double eta_x_, eta_y_;
};

double lamb_dicke(int ladder_step, double delta_p);

// <m| exp(i kappa x) |n> with kappa in units of 1/x0, so eta = kappa.
std::complex<double> displacement_element(int m, int n, double kappa);
// <m|cos(kappa x)|n> and <m|sin(kappa x)|n> in terms of eta = kappa x0.
double cos_element(int m, int n, double eta);
double sin_element(int m, int n, double eta);

double even_amplitude(int n, int k, double eta);
double odd_amplitude(int n, int k, double eta);
// Step amplitude a_n for |n> -> |n+N_m>: even or odd form by parity of N_m.
double ladder_amplitude(int n, int ladder_step, double eta);
// a_n for n = 0..count-1 in one pass.
std::vector<double> ladder_amplitudes(int count, int ladder_step, double eta);

// All zeros (ascending eta) of the step amplitude out of |n_bk>, as delta_p values.
std::vector<double> blockade_roots(int n_bk, int ladder_step);
double find_blockade_detuning(int n_bk, int ladder_step, int root_index);

struct AmplitudeMap {
  std::vector<double> detunings;
  int n_max = 0;
  int ladder_step = 0;
  std::vector<double> values;  // row-major: row n, column sample j
  double at(int n, std::size_t j) const {
    return values[static_cast<std::size_t>(n) * detunings.size() + j];
  }
};

AmplitudeMap amplitude_map(int n_max, double delta_lo, double delta_hi, int ladder_step, int samples,
                           int threads = 1);
void write_csv(std::ostream& out, const AmplitudeMap& map);

// Product of the per-axis step amplitudes, unsigned closed form.
double amplitude_2d(int m, int n, int n_x, int n_y, double eta_x, double eta_y);
// Two-axis coupling: (-1)^{floor((n_x+n_y)/2)} times the product amplitude.
double coupling_2d(int m, int n, int n_x, int n_y, double eta_x, double eta_y);

struct ResonanceGeometry {
  double omega_kd;  // rad/s
  double theta;     // rad, angle from the x axis
  double omega_1;   // rad/s
  double omega_2;   // rad/s
};

ResonanceGeometry resonance_geometry_2d(int n_x, int n_y, double delta_px, double delta_py, double omega_x,
                                        double omega_y, double mass_kg);

}  // namespace kdb
