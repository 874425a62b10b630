#include "kdb/cash_karp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kdb/error.hpp"

namespace kdb {

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 3.0 / 5.0, c5 = 1.0, c6 = 7.0 / 8.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 3.0 / 10.0, a42 = -9.0 / 10.0, a43 = 6.0 / 5.0;
constexpr double a51 = -11.0 / 54.0, a52 = 5.0 / 2.0, a53 = -70.0 / 27.0, a54 = 35.0 / 27.0;
constexpr double a61 = 1631.0 / 55296.0, a62 = 175.0 / 512.0, a63 = 575.0 / 13824.0,
                 a64 = 44275.0 / 110592.0, a65 = 253.0 / 4096.0;
constexpr double b1 = 37.0 / 378.0, b3 = 250.0 / 621.0, b4 = 125.0 / 594.0, b6 = 512.0 / 1771.0;
constexpr double e1 = b1 - 2825.0 / 27648.0, e3 = b3 - 18575.0 / 48384.0, e4 = b4 - 13525.0 / 55296.0,
                 e5 = -277.0 / 14336.0, e6 = b6 - 0.25;

}  // namespace

CashKarp::CashKarp(Rhs rhs, std::size_t dim, StepControls controls)
    : rhs_(std::move(rhs)), controls_(controls), h_(controls.initial_step) {
  if (!(controls_.initial_step > 0.0)) throw DomainError("initial step must be positive");
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &tmp_, &y5_, &err_}) v->resize(dim);
}

void CashKarp::advance(double& t, double t_end, ComplexVector& y) {
  const std::size_t n = y.size();
  while (t < t_end) {
    double h = h_;
    if (controls_.max_step > 0.0) h = std::min(h, controls_.max_step);
    bool clamped = false;
    if (t + h >= t_end) {
      h = t_end - t;
      clamped = true;
    }
    while (true) {
      if (h < controls_.min_step && !clamped) {
        throw IntegrationError(fmt::format(
            "step size {:.3e} fell below the minimum {:.3e} at t = {:.6f} (1/Omega0 units) after {} accepted "
            "and {} rejected steps",
            h, controls_.min_step, t, stats_.accepted, stats_.rejected));
      }
      rhs_(t, y, k1_);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a21 * k1_[i]);
      rhs_(t + c2 * h, tmp_, k2_);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
      rhs_(t + c3 * h, tmp_, k3_);
      for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
      rhs_(t + c4 * h, tmp_, k4_);
      for (std::size_t i = 0; i < n; ++i) {
        tmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
      }
      rhs_(t + c5 * h, tmp_, k5_);
      for (std::size_t i = 0; i < n; ++i) {
        tmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
      }
      rhs_(t + c6 * h, tmp_, k6_);
      stats_.evaluations += 6;

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        y5_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b6 * k6_[i]);
        const std::complex<double> e =
            h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i]);
        const double sr = controls_.abs_tol +
                          controls_.rel_tol * std::max(std::abs(y[i].real()), std::abs(y5_[i].real()));
        const double si = controls_.abs_tol +
                          controls_.rel_tol * std::max(std::abs(y[i].imag()), std::abs(y5_[i].imag()));
        err = std::max({err, std::abs(e.real()) / sr, std::abs(e.imag()) / si});
      }
      if (!std::isfinite(err)) {
        throw IntegrationError(fmt::format("non-finite error estimate at t = {:.6f}", t));
      }
      if (err <= 1.0) {
        ++stats_.accepted;
        t = clamped ? t_end : t + h;
        y.swap(y5_);
        const double grow = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
        if (!clamped) h_ = h * grow;
        if (hook_) hook_(t, y);
        break;
      }
      ++stats_.rejected;
      h *= std::max(0.1, 0.9 * std::pow(err, -0.25));
      h_ = h;
      clamped = false;
    }
  }
}

}  // namespace kdb
