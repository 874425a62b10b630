#include "kdb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "kdb/error.hpp"
#include "kdb/parallel.hpp"

namespace kdb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cd = std::complex<double>;

// Coefficients multiplying the upward (C_{n-N} -> C_n) and downward couplings at time t.
struct DriveFactors {
  cd up;
  cd down;
};

DriveFactors drive_factors(double t, const PulseEnvelope& p) {
  const double amp = p.lambda_peak * p.envelope(t);
  if (p.mode == CarrierMode::rotating_wave) {
    if (p.odd) return {cd(0.0, 0.5 * amp), cd(0.0, -0.5 * amp)};
    return {cd(0.5 * amp, 0.0), cd(0.5 * amp, 0.0)};
  }
  const double phase = p.carrier * t;
  const double f = amp * (p.odd ? std::sin(phase) : std::cos(phase));
  const cd rot(std::cos(phase), std::sin(phase));
  return {f * rot, f * std::conj(rot)};
}

void ladder_rhs(double t, const ComplexVector& c, ComplexVector& d, int step, const std::vector<double>& a,
                const PulseEnvelope& p) {
  const DriveFactors f = drive_factors(t, p);
  const std::size_t n_total = c.size();
  const std::size_t s = static_cast<std::size_t>(step);
  std::fill(d.begin(), d.end(), cd(0.0, 0.0));
  // d_n = -i (up a_{n-N} c_{n-N} + down a_n c_{n+N})
  for (std::size_t n = 0; n + s < n_total; ++n) {
    const cd down = f.down * (a[n] * c[n + s]);
    const cd up = f.up * (a[n] * c[n]);
    d[n] += cd(down.imag(), -down.real());
    d[n + s] += cd(up.imag(), -up.real());
  }
}

struct Coupling2D {
  std::size_t nx, ny;  // state shape
  std::size_t sx, sy;  // step along each axis
  std::vector<double> a;  // (nx - sx) x (ny - sy), row-major
};

Coupling2D make_coupling_2d(std::size_t nx, std::size_t ny, const Resonance2D& r) {
  Coupling2D c{nx, ny, static_cast<std::size_t>(r.n_x()), static_cast<std::size_t>(r.n_y()), {}};
  if (nx <= c.sx || ny <= c.sy) return c;
  const std::size_t rows = nx - c.sx;
  const std::size_t cols = ny - c.sy;
  c.a.resize(rows * cols);
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t n = 0; n < cols; ++n) {
      c.a[m * cols + n] = coupling_2d(static_cast<int>(m), static_cast<int>(n), r.n_x(), r.n_y(), r.eta_x(), r.eta_y());
    }
  }
  return c;
}

void grid_rhs(double t, const ComplexVector& c, ComplexVector& d, const Coupling2D& k, const PulseEnvelope& p) {
  const DriveFactors f = drive_factors(t, p);
  std::fill(d.begin(), d.end(), cd(0.0, 0.0));
  if (k.a.empty()) return;
  const std::size_t rows = k.nx - k.sx;
  const std::size_t cols = k.ny - k.sy;
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t n = 0; n < cols; ++n) {
      const double a = k.a[m * cols + n];
      const std::size_t lo = m * k.ny + n;
      const std::size_t hi = (m + k.sx) * k.ny + (n + k.sy);
      const cd down = f.down * (a * c[hi]);
      const cd up = f.up * (a * c[lo]);
      d[lo] += cd(down.imag(), -down.real());
      d[hi] += cd(up.imag(), -up.real());
    }
  }
}

double squared_norm(const ComplexVector& c) {
  double s = 0.0;
  for (const auto& z : c) s += std::norm(z);
  return s;
}

template <class State, class Rhs, class Tail>
Trajectory<State> run(const State& initial, const PulseEnvelope& pulse, const IntegratorControls& controls,
                      Rhs rhs, Tail tail) {
  const double norm0 = squared_norm(initial.amplitudes);
  if (std::abs(norm0 - 1.0) > 1e-6) {
    throw DomainError(fmt::format("initial state must be normalized (norm {})", norm0));
  }
  StepControls sc;
  sc.rel_tol = controls.rel_tol;
  sc.abs_tol = controls.abs_tol;
  sc.initial_step = controls.initial_step_periods * kTwoPi;
  sc.min_step = controls.min_step_periods * kTwoPi;
  sc.max_step = controls.max_step_periods > 0.0 ? controls.max_step_periods * kTwoPi
                                                : kTwoPi / (8.0 * std::max(pulse.carrier, 1e-3));
  const std::size_t dim = initial.amplitudes.size();
  CashKarp stepper(rhs, dim, sc);

  Trajectory<State> traj;
  State state = initial;
  double max_drift = 0.0;
  double max_tail = tail(state);
  stepper.set_step_hook([&](double, const ComplexVector& y) {
    max_drift = std::max(max_drift, std::abs(squared_norm(y) - norm0));
    state.amplitudes = y;
    max_tail = std::max(max_tail, tail(state));
  });

  const double t0 = -pulse.half_window();
  const double t1 = pulse.half_window();
  const double cadence = controls.snapshot_periods * kTwoPi;
  auto record = [&](double t, const ComplexVector& y) {
    traj.times.push_back(t / kTwoPi);
    State s = initial;
    s.amplitudes = y;
    traj.norm_drift.push_back(std::abs(squared_norm(y) - norm0));
    traj.snapshots.push_back(std::move(s));
  };

  ComplexVector y = initial.amplitudes;
  double t = t0;
  record(t, y);
  std::size_t k = 1;
  while (t < t1) {
    double target = t1;
    if (cadence > 0.0) {
      target = std::min(t1, t0 + static_cast<double>(k) * cadence);
      ++k;
      if (t1 - target < 1e-9 * cadence) target = t1;
    }
    stepper.advance(t, target, y);
    record(t, y);
  }
  traj.max_norm_drift = max_drift;
  traj.max_tail = max_tail;
  traj.stats = stepper.stats();
  if (controls.enforce_tail && max_tail > controls.tail_tol) {
    throw TruncationError(fmt::format("population {:.3e} reached the truncation boundary (tail tolerance {:.1e}); "
                                      "increase the truncation",
                                      max_tail, controls.tail_tol),
                          max_tail);
  }
  return traj;
}

}  // namespace

double PulseEnvelope::tau() const { return tau_periods * kTwoPi; }

double PulseEnvelope::envelope(double t) const {
  const double s = t / tau();
  return std::exp(-2.0 * s * s);
}

double PulseEnvelope::drive(double t) const {
  const double phase = carrier * t;
  return lambda_peak * envelope(t) * (odd ? std::sin(phase) : std::cos(phase));
}

PulseEnvelope make_pulse(const Resonance1D& resonance, double lambda_peak, double tau_periods, CarrierMode mode) {
  if (!(tau_periods > 0.0) || !std::isfinite(tau_periods)) throw DomainError("pulse duration must be positive");
  if (!std::isfinite(lambda_peak)) throw DomainError("pulse coupling must be finite");
  PulseEnvelope p;
  p.lambda_peak = lambda_peak;
  p.tau_periods = tau_periods;
  p.carrier = resonance.ladder_step();
  p.odd = resonance.odd();
  p.mode = mode;
  return p;
}

PulseEnvelope make_pulse(const Resonance2D& resonance, double omega_ratio, double lambda_peak, double tau_periods,
                         CarrierMode mode) {
  if (!(tau_periods > 0.0) || !std::isfinite(tau_periods)) throw DomainError("pulse duration must be positive");
  if (!(omega_ratio > 0.0)) throw DomainError("trap frequency ratio must be positive");
  PulseEnvelope p;
  p.lambda_peak = lambda_peak;
  p.tau_periods = tau_periods;
  p.carrier = resonance.n_x() + resonance.n_y() * omega_ratio;
  p.odd = resonance.odd();
  p.mode = mode;
  return p;
}

StateVector1D StateVector1D::basis(std::size_t truncation, int level) {
  if (level < 0 || static_cast<std::size_t>(level) >= truncation) {
    throw DomainError(fmt::format("level {} outside truncation {}", level, truncation));
  }
  StateVector1D s;
  s.amplitudes.assign(truncation, cd(0.0, 0.0));
  s.amplitudes[static_cast<std::size_t>(level)] = 1.0;
  return s;
}

std::vector<double> StateVector1D::populations() const {
  std::vector<double> p(amplitudes.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes[i]);
  return p;
}

double StateVector1D::norm() const { return squared_norm(amplitudes); }

int StateVector1D::ladder_offset(int ladder_step) const {
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if (amplitudes[i] != cd(0.0, 0.0)) return static_cast<int>(i) % ladder_step;
  }
  return 0;
}

double StateVector1D::tail_population(int ladder_step) const {
  const std::size_t band = std::min(amplitudes.size(), static_cast<std::size_t>(std::max(2, ladder_step)));
  double s = 0.0;
  for (std::size_t i = amplitudes.size() - band; i < amplitudes.size(); ++i) s += std::norm(amplitudes[i]);
  return s;
}

StateVector2D StateVector2D::basis(std::size_t nx, std::size_t ny, int m, int n) {
  if (m < 0 || n < 0 || static_cast<std::size_t>(m) >= nx || static_cast<std::size_t>(n) >= ny) {
    throw DomainError("basis state outside truncation");
  }
  StateVector2D s;
  s.nx = nx;
  s.ny = ny;
  s.amplitudes.assign(nx * ny, cd(0.0, 0.0));
  s.at(static_cast<std::size_t>(m), static_cast<std::size_t>(n)) = 1.0;
  return s;
}

std::vector<double> StateVector2D::populations() const {
  std::vector<double> p(amplitudes.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes[i]);
  return p;
}

double StateVector2D::norm() const { return squared_norm(amplitudes); }

double StateVector2D::boundary_population(int band_x, int band_y) const {
  const std::size_t bx = std::min(nx, static_cast<std::size_t>(std::max(band_x, 0)));
  const std::size_t by = std::min(ny, static_cast<std::size_t>(std::max(band_y, 0)));
  double s = 0.0;
  for (std::size_t m = 0; m < nx; ++m) {
    for (std::size_t n = 0; n < ny; ++n) {
      if (m >= nx - bx || n >= ny - by) s += std::norm(at(m, n));
    }
  }
  return s;
}

ComplexVector derivative_1d(double t, const StateVector1D& state, const Resonance1D& resonance,
                            const PulseEnvelope& pulse) {
  const int step = resonance.ladder_step();
  const int count = std::max(0, static_cast<int>(state.truncation()) - step);
  const auto a = ladder_amplitudes(count, step, resonance.eta());
  ComplexVector d(state.truncation());
  ladder_rhs(t, state.amplitudes, d, step, a, pulse);
  return d;
}

ComplexVector derivative_2d(double t, const StateVector2D& state, const Resonance2D& resonance,
                            const PulseEnvelope& pulse) {
  if (state.amplitudes.size() != state.nx * state.ny) throw DomainError("2D state shape mismatch");
  const Coupling2D k = make_coupling_2d(state.nx, state.ny, resonance);
  ComplexVector d(state.amplitudes.size());
  grid_rhs(t, state.amplitudes, d, k, pulse);
  return d;
}

Trajectory1D integrate(const StateVector1D& initial, const Resonance1D& resonance, const PulseEnvelope& pulse,
                       const IntegratorControls& controls) {
  const int step = resonance.ladder_step();
  const int count = std::max(0, static_cast<int>(initial.truncation()) - step);
  const auto a = ladder_amplitudes(count, step, resonance.eta());
  auto rhs = [&a, step, pulse](double t, const ComplexVector& y, ComplexVector& d) {
    ladder_rhs(t, y, d, step, a, pulse);
  };
  auto tail = [step](const StateVector1D& s) { return s.tail_population(step); };
  return run(initial, pulse, controls, rhs, tail);
}

Trajectory2D integrate(const StateVector2D& initial, const Resonance2D& resonance, const PulseEnvelope& pulse,
                       const IntegratorControls& controls) {
  if (initial.amplitudes.size() != initial.nx * initial.ny) throw DomainError("2D state shape mismatch");
  const Coupling2D k = make_coupling_2d(initial.nx, initial.ny, resonance);
  auto rhs = [&k, pulse](double t, const ComplexVector& y, ComplexVector& d) { grid_rhs(t, y, d, k, pulse); };
  const int bx = std::max(2, resonance.n_x());
  const int by = std::max(2, resonance.n_y());
  auto tail = [bx, by](const StateVector2D& s) { return s.boundary_population(bx, by); };
  return run(initial, pulse, controls, rhs, tail);
}

double area_coupling(double amplitude, double tau_periods, double area_in_pi) {
  if (!(tau_periods > 0.0)) throw DomainError("pulse duration must be positive");
  if (std::abs(amplitude) < 1e-12) {
    throw DomainError(fmt::format("transition amplitude {:.3e} is at a node; a blocked transition cannot be driven",
                                  amplitude));
  }
  return area_in_pi * std::sqrt(kTwoPi) / (tau_periods * kTwoPi * std::abs(amplitude));
}

double pi_pulse_coupling(int n_from, int ladder_step, double eta, double tau_periods) {
  return area_coupling(ladder_amplitude(n_from, ladder_step, eta), tau_periods, 1.0);
}

int blockade_level(const Resonance1D& resonance, int start, int max_level) {
  const int step = resonance.ladder_step();
  double prev = 0.0;
  int prev_level = -1;
  for (int n = start; n < max_level; n += step) {
    const double a = ladder_amplitude(n, step, resonance.eta());
    if (a == 0.0) return n;
    if (prev_level >= 0 && (a > 0.0) != (prev > 0.0)) {
      return std::abs(prev) <= std::abs(a) ? prev_level : n;
    }
    prev = a;
    prev_level = n;
  }
  return -1;
}

std::size_t default_truncation(int n_bk, int ladder_step) {
  const double target = 1.5 * (n_bk + 4.0 * std::sqrt(static_cast<double>(std::max(n_bk, 0))));
  const auto k = static_cast<std::size_t>(std::floor(target / ladder_step)) + 1;
  return k * static_cast<std::size_t>(ladder_step);
}

TuneResult tune_cat_pulse(int target_n_max, const Resonance1D& resonance, double tau_periods,
                          const TuneControls& controls) {
  const int step = resonance.ladder_step();
  if (target_n_max <= 0 || target_n_max % step != 0) {
    throw DomainError(fmt::format("target level {} is not on the ladder 0, {}, {}, ...", target_n_max, step, 2 * step));
  }
  const int n_bk = blockade_level(resonance, 0, 10 * target_n_max + 1000);
  if (n_bk < 0) {
    throw DomainError(fmt::format("no blockade node on the ladder for delta_p = {}", resonance.delta_p()));
  }
  if (target_n_max > n_bk) {
    throw DomainError(fmt::format("target level {} is above the blockade level {}; unreachable", target_n_max, n_bk));
  }
  if (controls.coarse_samples < 3) throw DomainError("tuning needs at least three coarse samples");
  const std::size_t truncation =
      controls.truncation > 0 ? controls.truncation : default_truncation(n_bk, step);
  if (truncation <= static_cast<std::size_t>(n_bk + step)) {
    throw DomainError("truncation must extend past the blockade level");
  }
  const double lambda_pi = pi_pulse_coupling(0, step, resonance.eta(), tau_periods);
  const StateVector1D ground = StateVector1D::basis(truncation, 0);
  const std::size_t target = static_cast<std::size_t>(target_n_max);

  auto objective = [&](double lambda) {
    try {
      const auto traj = integrate(ground, resonance, make_pulse(resonance, lambda, tau_periods, controls.mode),
                                  controls.integrator);
      return std::norm(traj.final_state().amplitudes[target]);
    } catch (const TruncationError&) {
      return -1.0;
    } catch (const IntegrationError&) {
      return -1.0;
    }
  };

  const int samples = controls.coarse_samples;
  std::vector<double> lambdas(static_cast<std::size_t>(samples));
  std::vector<double> values(lambdas.size());
  const double ratio = controls.lambda_hi_factor / controls.lambda_lo_factor;
  for (int i = 0; i < samples; ++i) {
    lambdas[static_cast<std::size_t>(i)] =
        lambda_pi * controls.lambda_lo_factor * std::pow(ratio, i / (samples - 1.0));
  }
  parallel_for(lambdas.size(), controls.threads, [&](std::size_t i) { values[i] = objective(lambdas[i]); });
  int evaluations = samples;
  const auto best_it = std::max_element(values.begin(), values.end());
  const std::size_t best = static_cast<std::size_t>(best_it - values.begin());
  double best_lambda = lambdas[best];
  double best_value = values[best];

  // Golden-section maximization on the bracket around the best coarse sample.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lambdas[best == 0 ? 0 : best - 1];
  double b = lambdas[std::min(best + 1, lambdas.size() - 1)];
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  evaluations += 2;
  while (b - a > controls.rel_tol * 0.5 * (a + b)) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
    ++evaluations;
  }
  for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f > best_value) {
      best_value = f;
      best_lambda = x;
    }
  }

  TuneResult result;
  result.pulse = make_pulse(resonance, best_lambda, tau_periods, controls.mode);
  const auto traj = integrate(ground, resonance, result.pulse, controls.integrator);
  result.final_state = traj.final_state();
  result.objective = std::norm(result.final_state.amplitudes[target]);
  result.blockade_level = n_bk;
  result.truncation = truncation;
  result.evaluations = evaluations + 1;
  const auto pops = result.final_state.populations();
  const auto peak = static_cast<std::size_t>(std::max_element(pops.begin(), pops.end()) - pops.begin());
  if (peak != target) {
    throw ConvergenceError(fmt::format(
        "no pulse strength in [{:.4g}, {:.4g}] puts the population peak at level {} (best peak at {})",
        lambdas.front(), lambdas.back(), target_n_max, peak));
  }
  return result;
}

}  // namespace kdb
