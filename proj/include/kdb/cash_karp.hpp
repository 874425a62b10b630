#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace kdb {

using ComplexVector = std::vector<std::complex<double>>;

struct StepControls {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0.0;
  double min_step = 0.0;
  double max_step = 0.0;  // 0: unbounded
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

// Embedded 4(5) Runge-Kutta pair of Cash and Karp with per-component error control
// (real and imaginary parts weighted separately) and the fifth-order solution propagated.
class CashKarp {
 public:
  using Rhs = std::function<void(double t, const ComplexVector& y, ComplexVector& dydt)>;
  using StepHook = std::function<void(double t, const ComplexVector& y)>;

  CashKarp(Rhs rhs, std::size_t dim, StepControls controls);

  // Advances y from t to t_end exactly; the proposed step carries across calls.
  void advance(double& t, double t_end, ComplexVector& y);
  void set_step_hook(StepHook hook) { hook_ = std::move(hook); }
  const IntegratorStats& stats() const { return stats_; }

 private:
  Rhs rhs_;
  StepControls controls_;
  StepHook hook_;
  IntegratorStats stats_;
  double h_;
  ComplexVector k1_, k2_, k3_, k4_, k5_, k6_, tmp_, y5_, err_;
};

}  // namespace kdb
