#include "kdb/amplitudes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "kdb/constants.hpp"
#include "kdb/error.hpp"
#include "kdb/io.hpp"
#include "kdb/parallel.hpp"
#include "kdb/specfun.hpp"

namespace kdb {

Resonance1D::Resonance1D(int ladder_step, double delta_p)
    : ladder_step_(ladder_step), delta_p_(delta_p), eta_(lamb_dicke(ladder_step, delta_p)) {}

Resonance2D::Resonance2D(int n_x, int n_y, double delta_px, double delta_py)
    : n_x_(n_x), n_y_(n_y), delta_px_(delta_px), delta_py_(delta_py) {
  if (n_x < 1 || n_y < 1) throw DomainError("Resonance2D: n_x and n_y must be positive");
  if (!std::isfinite(delta_px) || !std::isfinite(delta_py) || delta_px < -n_x || delta_py < -n_y) {
    throw DomainError(fmt::format("Resonance2D: detunings must satisfy delta_px >= -n_x, delta_py >= -n_y "
                                  "(got {}, {})",
                                  delta_px, delta_py));
  }
  eta_x_ = 0.5 * (n_x + delta_px);
  eta_y_ = 0.5 * (n_y + delta_py);
}

double lamb_dicke(int ladder_step, double delta_p) {
  if (ladder_step < 1) throw DomainError("ladder step N_m must be positive");
  if (!std::isfinite(delta_p) || delta_p < -ladder_step) {
    throw DomainError(fmt::format("momentum detuning {} below -N_m = {}", delta_p, -ladder_step));
  }
  return 0.5 * (ladder_step + delta_p);
}

namespace {

// sqrt(n!/(n+d)!) |eta|^d exp(-eta^2/2) L_n^{(d)}(eta^2), without the phase.
double step_magnitude(int n, int d, double eta) {
  const double a = std::abs(eta);
  if (a == 0.0) return d == 0 ? 1.0 : 0.0;
  const double log_mag = 0.5 * log_factorial_ratio(n, n + d) + d * std::log(a) - 0.5 * a * a;
  const double value = std::exp(log_mag) * laguerre(n, d, a * a);
  if (!std::isfinite(value)) {
    throw NumericError(fmt::format("non-finite amplitude for n={}, step={}, eta={}", n, d, eta));
  }
  return value;
}

void require_eta(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError(fmt::format("eta must be >= 0 (got {})", eta));
}

}  // namespace

std::complex<double> displacement_element(int m, int n, double kappa) {
  if (m < 0 || n < 0) throw DomainError("displacement_element: negative level");
  // e^{i kappa x} is symmetric in the real eigenbasis, so the lower level always plays n.
  const int lo = std::min(m, n);
  const int d = std::abs(m - n);
  double mag = step_magnitude(lo, d, kappa);
  if (kappa < 0.0 && d % 2 == 1) mag = -mag;
  switch (d % 4) {
    case 0: return {mag, 0.0};
    case 1: return {0.0, mag};
    case 2: return {-mag, 0.0};
    default: return {0.0, -mag};
  }
}

double cos_element(int m, int n, double eta) { return displacement_element(m, n, eta).real(); }

double sin_element(int m, int n, double eta) { return displacement_element(m, n, eta).imag(); }

double even_amplitude(int n, int k, double eta) {
  require_eta(eta);
  if (n < 0 || k < 1) throw DomainError("even_amplitude: need n >= 0 and k >= 1");
  const double v = step_magnitude(n, 2 * k, eta);
  return k % 2 == 0 ? v : -v;
}

double odd_amplitude(int n, int k, double eta) {
  require_eta(eta);
  if (n < 0 || k < 0) throw DomainError("odd_amplitude: need n >= 0 and k >= 0");
  const double v = step_magnitude(n, 2 * k + 1, eta);
  return k % 2 == 0 ? v : -v;
}

double ladder_amplitude(int n, int ladder_step, double eta) {
  if (ladder_step < 1) throw DomainError("ladder step N_m must be positive");
  return ladder_step % 2 == 0 ? even_amplitude(n, ladder_step / 2, eta)
                              : odd_amplitude(n, (ladder_step - 1) / 2, eta);
}

std::vector<double> ladder_amplitudes(int count, int ladder_step, double eta) {
  std::vector<double> a(static_cast<std::size_t>(std::max(count, 0)));
  for (int n = 0; n < count; ++n) a[static_cast<std::size_t>(n)] = ladder_amplitude(n, ladder_step, eta);
  return a;
}

namespace {

// Number of zeros of L_n^{(alpha)} strictly above y: sign changes of (-1)^k L_k^{(alpha)}(y).
int zeros_above(int n, int alpha, double y) {
  int changes = 0;
  double last = 0.0;
  double prev = 1.0;
  double cur = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k == 1) {
      prev = cur;
      cur = 1.0 + alpha - y;
    } else if (k > 1) {
      const double next = ((2.0 * (k - 1) + 1.0 + alpha - y) * cur - (k - 1.0 + alpha) * prev) / k;
      prev = cur;
      cur = next;
    }
    const double q = (k % 2 == 0) ? cur : -cur;
    if (q != 0.0) {
      if (last != 0.0 && (q > 0.0) != (last > 0.0)) ++changes;
      last = q;
    }
  }
  return changes;
}

double laguerre_root(int n, int alpha, int index) {
  // Isolate the index-th smallest root by counting, then refine on the sign of L_n.
  double lo = 0.0;
  double hi = 4.0 * n + 2.0 * alpha + 10.0;
  const int above_target = n - index;
  while (zeros_above(n, alpha, lo) - zeros_above(n, alpha, hi) > 1) {
    const double mid = 0.5 * (lo + hi);
    if (zeros_above(n, alpha, mid) > above_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double f_lo = laguerre(n, alpha, lo);
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = laguerre(n, alpha, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> blockade_roots(int n_bk, int ladder_step) {
  if (ladder_step < 1) throw DomainError("ladder step N_m must be positive");
  if (n_bk < 1) throw DomainError(fmt::format("no blockade roots: L_{}^({}) has none", n_bk, ladder_step));
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(n_bk));
  for (int r = 1; r <= n_bk; ++r) {
    const double y = laguerre_root(n_bk, ladder_step, r);
    roots.push_back(2.0 * std::sqrt(y) - ladder_step);
  }
  return roots;
}

double find_blockade_detuning(int n_bk, int ladder_step, int root_index) {
  if (n_bk < 1) throw DomainError(fmt::format("no blockade roots for n_bk = {}", n_bk));
  if (root_index < 1 || root_index > n_bk) {
    throw DomainError(fmt::format("root index {} out of range: {} roots available", root_index, n_bk));
  }
  if (ladder_step < 1) throw DomainError("ladder step N_m must be positive");
  return 2.0 * std::sqrt(laguerre_root(n_bk, ladder_step, root_index)) - ladder_step;
}

AmplitudeMap amplitude_map(int n_max, double delta_lo, double delta_hi, int ladder_step, int samples,
                           int threads) {
  if (samples < 2) throw DomainError("amplitude_map: need at least two samples");
  if (n_max < 0) throw DomainError("amplitude_map: negative n_max");
  if (!(delta_hi > delta_lo)) throw DomainError("amplitude_map: empty detuning range");
  if (delta_lo < -ladder_step) throw DomainError("amplitude_map: detuning range below -N_m");
  AmplitudeMap map;
  map.n_max = n_max;
  map.ladder_step = ladder_step;
  map.detunings.resize(static_cast<std::size_t>(samples));
  for (int j = 0; j < samples; ++j) {
    map.detunings[static_cast<std::size_t>(j)] =
        j == samples - 1 ? delta_hi : delta_lo + (delta_hi - delta_lo) * j / (samples - 1.0);
  }
  const std::size_t cols = map.detunings.size();
  map.values.resize(static_cast<std::size_t>(n_max + 1) * cols);
  parallel_for(static_cast<std::size_t>(n_max + 1), threads, [&](std::size_t n) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double eta = lamb_dicke(ladder_step, map.detunings[j]);
      map.values[n * cols + j] = std::abs(ladder_amplitude(static_cast<int>(n), ladder_step, eta));
    }
  });
  return map;
}

void write_csv(std::ostream& out, const AmplitudeMap& map) {
  out << "delta_p";
  for (int n = 0; n <= map.n_max; ++n) out << ",n" << n;
  out << '\n';
  for (std::size_t j = 0; j < map.detunings.size(); ++j) {
    out << format_real(map.detunings[j]);
    for (int n = 0; n <= map.n_max; ++n) out << ',' << format_real(map.at(n, j));
    out << '\n';
  }
}

double amplitude_2d(int m, int n, int n_x, int n_y, double eta_x, double eta_y) {
  require_eta(eta_x);
  require_eta(eta_y);
  if (m < 0 || n < 0 || n_x < 0 || n_y < 0) throw DomainError("amplitude_2d: negative index");
  return step_magnitude(m, n_x, eta_x) * step_magnitude(n, n_y, eta_y);
}

double coupling_2d(int m, int n, int n_x, int n_y, double eta_x, double eta_y) {
  const double f = amplitude_2d(m, n, n_x, n_y, eta_x, eta_y);
  return ((n_x + n_y) / 2) % 2 == 0 ? f : -f;
}

ResonanceGeometry resonance_geometry_2d(int n_x, int n_y, double delta_px, double delta_py, double omega_x,
                                        double omega_y, double mass_kg) {
  if (!(omega_x > 0.0) || !(omega_y > 0.0)) throw DomainError("trap frequencies must be positive");
  if (!(mass_kg > 0.0)) throw DomainError("mass must be positive");
  const double kx0 = std::sqrt(mass_kg * omega_x / (2.0 * si::hbar));
  const double ky0 = std::sqrt(mass_kg * omega_y / (2.0 * si::hbar));
  const double ax = (n_x + delta_px) * kx0;
  const double ay = (n_y + delta_py) * ky0;
  ResonanceGeometry g{};
  g.omega_kd = 0.5 * si::c * std::hypot(ax, ay);
  g.theta = std::atan2(ay, ax);
  const double beat = 0.5 * (n_x * omega_x + n_y * omega_y);
  g.omega_1 = g.omega_kd + beat;
  g.omega_2 = g.omega_kd - beat;
  return g;
}

}  // namespace kdb
