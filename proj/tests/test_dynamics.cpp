#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kdb/amplitudes.hpp"
#include "kdb/dynamics.hpp"
#include "kdb/error.hpp"

using namespace kdb;
using cd = std::complex<double>;

namespace {

const double kNode2 = 2.0 * std::sqrt(2.0) - 2.0;

double node12() {
  for (double d : blockade_roots(12, 2)) {
    if (std::abs(d + 0.6) < 0.01) return d;
  }
  return NAN;
}

}  // namespace

TEST_CASE("pulse envelope and carrier") {
  const Resonance1D r(2, 0.0);
  const auto p = make_pulse(r, 0.3, 2.0);
  CHECK(p.tau() == doctest::Approx(4.0 * std::numbers::pi));
  CHECK(p.envelope(0.0) == 1.0);
  CHECK(p.envelope(p.tau()) == doctest::Approx(std::exp(-2.0)));
  CHECK(p.drive(0.0) == doctest::Approx(0.3));
  CHECK(p.carrier == 2.0);
  CHECK_FALSE(p.odd);
  CHECK(make_pulse(Resonance1D(3, 0.0), 0.1, 1.0).odd);
  CHECK_THROWS_AS(make_pulse(r, 0.3, 0.0), DomainError);
  const auto p2 = make_pulse(Resonance2D(1, 2, 0.0, 0.0), 0.8, 0.1, 3.0);
  CHECK(p2.carrier == doctest::Approx(2.6));
  CHECK(p2.odd);
}

TEST_CASE("derivative vanishes at a carrier zero crossing") {
  const Resonance1D r(1, 0.3);
  StateVector1D s = StateVector1D::basis(6, 0);
  s.amplitudes[1] = 0.3;
  const auto d = derivative_1d(0.0, s, r, make_pulse(r, 0.7, 5.0));
  for (const auto& z : d) CHECK(z == cd(0.0, 0.0));
}

TEST_CASE("derivative of the ground state couples only to the next ladder level") {
  const Resonance1D r(2, 0.4);
  const auto p = make_pulse(r, 0.5, 3.0);
  const auto s = StateVector1D::basis(10, 0);
  const double t = 0.37;
  const auto d = derivative_1d(t, s, r, p);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (n == 2) continue;
    CHECK(d[n] == cd(0.0, 0.0));
  }
  const cd expected = cd(0.0, -1.0) * p.drive(t) * std::exp(cd(0.0, 2.0 * t)) * even_amplitude(0, 1, r.eta());
  CHECK(std::abs(d[2] - expected) < 1e-15);
}

TEST_CASE("rotating-wave two-level dynamics follow the Rabi solution") {
  const Resonance1D r(2, kNode2);
  const double tau = 5.0;
  const double lambda = 0.8 * pi_pulse_coupling(0, 2, r.eta(), tau);
  const auto p = make_pulse(r, lambda, tau, CarrierMode::rotating_wave);
  IntegratorControls c;
  c.snapshot_periods = 0.5;
  c.enforce_tail = false;  // the two-level truncation has no spare boundary levels
  const auto traj = integrate(StateVector1D::basis(3, 0), r, p, c);
  const double a0 = even_amplitude(0, 1, r.eta());
  const double t0 = -p.half_window();
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k] * 2.0 * std::numbers::pi;
    const double area = p.tau() * std::sqrt(std::numbers::pi / 8.0) *
                        (std::erf(std::sqrt(2.0) * t / p.tau()) - std::erf(std::sqrt(2.0) * t0 / p.tau()));
    const double theta = 0.5 * lambda * a0 * area;
    const auto& c_n = traj.snapshots[k].amplitudes;
    worst = std::max(worst, std::abs(c_n[0] - cd(std::cos(theta), 0.0)));
    worst = std::max(worst, std::abs(c_n[2] - cd(0.0, -std::sin(theta))));
  }
  CHECK(worst < 1e-6);
  CHECK(traj.times.size() > 10);
}

TEST_CASE("zero coupling leaves the state untouched") {
  const Resonance1D r(2, 0.1);
  StateVector1D s = StateVector1D::basis(8, 0);
  s.amplitudes[0] = cd(0.6, 0.0);
  s.amplitudes[2] = cd(0.0, 0.8);
  const auto traj = integrate(s, r, make_pulse(r, 0.0, 2.0));
  CHECK(traj.final_state().amplitudes == s.amplitudes);
  CHECK(traj.max_norm_drift == 0.0);
}

TEST_CASE("integration window and snapshots") {
  const Resonance1D r(2, 0.1);
  IntegratorControls c;
  c.snapshot_periods = 0.75;
  const auto traj = integrate(StateVector1D::basis(8, 0), r, make_pulse(r, 0.01, 2.0), c);
  CHECK(traj.times.front() == doctest::Approx(-5.0));
  CHECK(traj.times.back() == doctest::Approx(5.0));
  for (std::size_t k = 1; k < traj.times.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
  CHECK(traj.times.size() == 15);
  CHECK(traj.stats.accepted > 0);
}

TEST_CASE("pi-pulse coupling") {
  const double eta = 1.4142;
  const double lam = pi_pulse_coupling(0, 2, eta, 20.0);
  CHECK(lam == doctest::Approx(std::sqrt(2.0 * std::numbers::pi) /
                               (20.0 * 2.0 * std::numbers::pi * std::abs(even_amplitude(0, 1, eta)))));
  CHECK(area_coupling(0.1, 3.0, 1.0) == doctest::Approx(2.0 * area_coupling(0.2, 3.0, 1.0)));
  CHECK_THROWS_AS(pi_pulse_coupling(2, 2, std::sqrt(2.0), 20.0), DomainError);
}

TEST_CASE("pi pulse at the first node inverts the two-level system and a doubled pulse returns it") {
  const Resonance1D r(2, kNode2);
  const double tau = 40.0;
  const double lambda = pi_pulse_coupling(0, 2, r.eta(), tau);
  const auto traj = integrate(StateVector1D::basis(8, 0), r, make_pulse(r, lambda, tau));
  const auto pops = traj.final_state().populations();
  CHECK(pops[2] > 0.98);
  CHECK(pops[4] < 0.002);
  CHECK(traj.max_norm_drift < 1e-6);
  const auto back = integrate(StateVector1D::basis(8, 0), r, make_pulse(r, lambda, 2.0 * tau));
  CHECK(back.final_state().populations()[0] > 0.97);

  // truncation and tolerance insensitivity
  const auto wide = integrate(StateVector1D::basis(12, 0), r, make_pulse(r, lambda, tau));
  IntegratorControls tight;
  tight.rel_tol = 5e-10;
  tight.abs_tol = 5e-13;
  const auto fine = integrate(StateVector1D::basis(8, 0), r, make_pulse(r, lambda, tau), tight);
  for (std::size_t n = 0; n < 8; ++n) {
    CHECK(std::abs(wide.final_state().populations()[n] - pops[n]) < 1e-6);
    CHECK(std::abs(fine.final_state().populations()[n] - pops[n]) < 1e-6);
  }
}

TEST_CASE("full carrier shows fast ripples that the rotating-wave traces lack") {
  const Resonance1D r(2, kNode2);
  const double tau = 10.0;
  const double lambda = pi_pulse_coupling(0, 2, r.eta(), tau);
  IntegratorControls c;
  c.snapshot_periods = 1.0 / 64.0;
  auto ripple = [&](CarrierMode mode) {
    const auto traj = integrate(StateVector1D::basis(8, 0), r, make_pulse(r, lambda, tau, mode), c);
    // deviation of P_2 from its centred trapezoid average over one ripple period (1/4 period = 16 samples)
    double worst = 0.0;
    const std::size_t mid = traj.times.size() / 2;
    for (std::size_t k = mid - 200; k < mid + 200; ++k) {
      double avg = 0.0;
      for (std::size_t j = k - 8; j <= k + 8; ++j) {
        const double w = (j == k - 8 || j == k + 8) ? 0.5 : 1.0;
        avg += w * std::norm(traj.snapshots[j].amplitudes[2]);
      }
      avg /= 16.0;
      worst = std::max(worst, std::abs(std::norm(traj.snapshots[k].amplitudes[2]) - avg));
    }
    return std::pair{worst, traj.final_state().populations()};
  };
  const auto [full, p_full] = ripple(CarrierMode::full);
  const auto [rwa, p_rwa] = ripple(CarrierMode::rotating_wave);
  MESSAGE("ripple full " << full << " rwa " << rwa);
  CHECK(full > 10.0 * rwa);
  const double scale = lambda / 4.0;
  for (std::size_t n = 0; n < 8; ++n) CHECK(std::abs(p_full[n] - p_rwa[n]) < 10.0 * scale * scale + 1e-6);
}

TEST_CASE("truncation violations are reported") {
  const Resonance1D r(2, 0.0);
  const double lambda = 3.0 * pi_pulse_coupling(0, 2, r.eta(), 3.0);
  CHECK_THROWS_AS(integrate(StateVector1D::basis(4, 0), r, make_pulse(r, lambda, 3.0)), TruncationError);
  IntegratorControls lax;
  lax.enforce_tail = false;
  const auto traj = integrate(StateVector1D::basis(4, 0), r, make_pulse(r, lambda, 3.0), lax);
  CHECK(traj.max_tail > 1e-8);
  StateVector1D bad = StateVector1D::basis(4, 0);
  bad.amplitudes[0] = 2.0;
  CHECK_THROWS_AS(integrate(bad, r, make_pulse(r, lambda, 3.0)), DomainError);
}

TEST_CASE("step underflow aborts with diagnostics") {
  const Resonance1D r(2, 0.0);
  IntegratorControls c;
  c.rel_tol = 1e-15;
  c.abs_tol = 1e-30;
  c.min_step_periods = 1e-2;
  c.initial_step_periods = 1e-2;
  CHECK_THROWS_AS(integrate(StateVector1D::basis(8, 0), r, make_pulse(r, 0.2, 2.0), c), IntegrationError);
}

TEST_CASE("blockade level and default truncation") {
  CHECK(blockade_level(Resonance1D(2, kNode2), 0, 100) == 2);
  CHECK(blockade_level(Resonance1D(2, node12()), 0, 100) == 12);
  // a_656 = -2.5e-3, a_658 = +1.8e-4: the smaller side of the sign change is the blockade
  CHECK(blockade_level(Resonance1D(2, -1.8), 0, 5000) == 658);
  CHECK(default_truncation(658, 2) == 1142);
  CHECK(default_truncation(12, 2) == 40);
  CHECK(default_truncation(18, 3) == 54);
}

TEST_CASE("cat-pulse tuning on the n_bk = 12 ladder") {
  const Resonance1D r(2, node12());
  TuneControls tc;
  tc.mode = CarrierMode::rotating_wave;
  const auto res = tune_cat_pulse(8, r, 40.0, tc);
  const auto pops = res.final_state.populations();
  CHECK(std::max_element(pops.begin(), pops.end()) - pops.begin() == 8);
  CHECK(res.blockade_level == 12);
  CHECK(res.truncation == 40);
  auto objective = [&](double lambda) {
    const auto traj = integrate(StateVector1D::basis(res.truncation, 0), r, make_pulse(r, lambda, 40.0, tc.mode));
    return traj.final_state().populations()[8];
  };
  CHECK(objective(res.pulse.lambda_peak * 1.01) < res.objective);
  CHECK(objective(res.pulse.lambda_peak * 0.99) < res.objective);

  // population stays below the blockade for couplings up to twice the tuned value
  for (double f : {0.5, 1.0, 1.5, 2.0}) {
    const auto traj = integrate(StateVector1D::basis(res.truncation, 0), r,
                                make_pulse(r, f * res.pulse.lambda_peak, 40.0, tc.mode));
    const auto p = traj.final_state().populations();
    double above = 0.0;
    for (std::size_t n = 13; n < p.size(); ++n) above += p[n];
    CHECK(above < 1e-3);
  }
  CHECK_THROWS_AS(tune_cat_pulse(14, r, 40.0, tc), DomainError);
  CHECK_THROWS_AS(tune_cat_pulse(7, r, 40.0, tc), DomainError);
}

TEST_CASE("two-axis derivative structure") {
  const double eta_x = std::sqrt(2.0);
  const Resonance2D r(1, 1, 2.0 * eta_x - 1.0, 1.0);
  const auto p = make_pulse(r, 0.8, 0.3, 2.0);
  const double t = 0.21;
  auto s = StateVector2D::basis(4, 4, 0, 0);
  auto d = derivative_2d(t, s, r, p);
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t n = 0; n < 4; ++n) {
      if (m == 1 && n == 1) continue;
      CHECK(d[m * 4 + n] == cd(0.0, 0.0));
    }
  }
  const double g00 = -amplitude_2d(0, 0, 1, 1, eta_x, 1.0);
  const cd expected = cd(0.0, -1.0) * p.drive(t) * std::exp(cd(0.0, p.carrier * t)) * g00;
  CHECK(std::abs(d[1 * 4 + 1] - expected) < 1e-15);

  s = StateVector2D::basis(4, 4, 1, 1);
  d = derivative_2d(t, s, r, p);
  CHECK(std::abs(d[2 * 4 + 2]) < 1e-15);
  CHECK(std::abs(d[0]) > 1e-3);

  const Resonance2D odd(1, 2, 0.2, 0.3);
  const auto po = make_pulse(odd, 0.8, 0.3, 2.0);
  s = StateVector2D::basis(3, 5, 0, 0);
  d = derivative_2d(t, s, odd, po);
  const double xi00 = coupling_2d(0, 0, 1, 2, odd.eta_x(), odd.eta_y());
  CHECK(xi00 == doctest::Approx(-amplitude_2d(0, 0, 1, 2, odd.eta_x(), odd.eta_y())));
  const cd expected_odd = cd(0.0, -1.0) * po.drive(t) * std::exp(cd(0.0, po.carrier * t)) * xi00;
  CHECK(std::abs(d[1 * 5 + 2] - expected_odd) < 1e-15);
  CHECK(po.drive(0.0) == 0.0);
}
