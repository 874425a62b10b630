#include "kdb/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "kdb/error.hpp"
#include "kdb/io.hpp"

namespace kdb {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void normalize_on_grid(std::vector<double>& values, double spacing, int n) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  sum *= spacing;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw GridError(fmt::format("eigenfunction n={} has no weight on the grid", n));
  }
  const double scale = 1.0 / std::sqrt(sum);
  for (double& v : values) v *= scale;
}

}  // namespace

double laguerre(int n, int alpha, double y) {
  if (n < 0 || alpha < 0 || n > 100000) {
    throw DomainError(fmt::format("laguerre: need 0 <= n <= 1e5 and alpha >= 0 (n={}, alpha={})", n, alpha));
  }
  if (!std::isfinite(y) || y < 0.0) throw DomainError(fmt::format("laguerre: bad argument y={}", y));
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 1.0 + alpha - y;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - y) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  if (!std::isfinite(cur)) {
    throw NumericError(fmt::format("laguerre overflow at n={}, alpha={}, y={}", n, alpha, y));
  }
  return cur;
}

void laguerre_sequence(int n, int alpha, double y, std::vector<double>& out) {
  if (n < 0 || alpha < 0 || !std::isfinite(y) || y < 0.0) {
    throw DomainError("laguerre_sequence: bad arguments");
  }
  out.resize(static_cast<std::size_t>(n) + 1);
  out[0] = 1.0;
  if (n == 0) return;
  out[1] = 1.0 + alpha - y;
  for (int k = 1; k < n; ++k) {
    out[k + 1] = ((2.0 * k + 1.0 + alpha - y) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0);
  }
  if (!std::isfinite(out[n])) {
    throw NumericError(fmt::format("laguerre overflow at n={}, alpha={}, y={}", n, alpha, y));
  }
}

double log_factorial_ratio(int n, int m) {
  if (n < 0 || m < 0) throw DomainError("log_factorial_ratio: negative argument");
  if (n == m) return 0.0;
  const int lo = std::min(n, m);
  const int hi = std::max(n, m);
  double s = 0.0;
  if (hi - lo <= 64) {
    for (int k = lo + 1; k <= hi; ++k) s += std::log(static_cast<double>(k));
  } else {
    s = std::lgamma(hi + 1.0) - std::lgamma(lo + 1.0);
  }
  return n > m ? s : -s;
}

double turning_point(int n) { return 2.0 * std::sqrt(n + 0.5); }

std::vector<EigenfunctionTable> eigenfunction_hermite_basis(int n_max, const RealGrid& grid) {
  if (n_max < 0) throw DomainError("eigenfunction_hermite: negative n");
  if (n_max > kHermiteMaxN) {
    throw DomainError(fmt::format(
        "eigenfunction_hermite: n={} exceeds {}; use eigenfunction_numerov", n_max, kHermiteMaxN));
  }
  const std::size_t count = static_cast<std::size_t>(n_max) + 1;
  std::vector<EigenfunctionTable> tables(count);
  for (std::size_t k = 0; k < count; ++k) {
    tables[k].n = static_cast<int>(k);
    tables[k].grid = grid;
    tables[k].values.assign(grid.size(), 0.0);
    tables[k].method = EigenMethod::hermite_recurrence;
    tables[k].energy = static_cast<double>(k) + 0.5;
  }
  // psi_k(y) = r_k * exp(s - y^2/2) * pi^{-1/4}, y = x/(sqrt2 x0); x0 units add 2^{-1/4}.
  const double prefactor = std::pow(std::numbers::pi, -0.25) * std::pow(2.0, -0.25);
  constexpr double kRescale = 1e150;
  const double log_rescale = std::log(kRescale);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = std::abs(grid[i]) / kSqrt2;
    const bool negative = grid[i] < 0.0;
    double log_scale = 0.0;
    double prev = 0.0;
    double cur = 1.0;
    for (int k = 0; k <= n_max; ++k) {
      if (k == 1) {
        prev = cur;
        cur = kSqrt2 * y;
      } else if (k > 1) {
        const double next = std::sqrt(2.0 / k) * y * cur - std::sqrt((k - 1.0) / k) * prev;
        prev = cur;
        cur = next;
      }
      if (std::abs(cur) > kRescale) {
        cur /= kRescale;
        prev /= kRescale;
        log_scale += log_rescale;
      }
      double v = cur * std::exp(log_scale - 0.5 * y * y) * prefactor;
      if (negative && (k % 2 == 1)) v = -v;
      tables[static_cast<std::size_t>(k)].values[i] = v;
    }
  }
  for (auto& t : tables) normalize_on_grid(t.values, grid.spacing(), t.n);
  return tables;
}

EigenfunctionTable eigenfunction_hermite(int n, const RealGrid& grid) {
  if (n < 0) throw DomainError("eigenfunction_hermite: negative n");
  if (n > kHermiteMaxN) {
    throw DomainError(fmt::format(
        "eigenfunction_hermite: n={} exceeds {}; use eigenfunction_numerov", n, kHermiteMaxN));
  }
  auto basis = eigenfunction_hermite_basis(n, grid);
  return std::move(basis.back());
}

namespace {

// Shooting solver for psi'' = (u^2 - 2E) psi in u = x/(sqrt2 x0), on nodes u_i = i h.
class NumerovShooter {
 public:
  NumerovShooter(int n, const NumerovOptions& options) : n_(n), odd_(n % 2 == 1) {
    const double e0 = n + 0.5;
    const double u_t = std::sqrt(2.0 * n + 1.0);
    const double wavelength = 2.0 * std::numbers::pi / std::sqrt(2.0 * e0);
    double h = std::min(options.max_step, wavelength / options.steps_per_wavelength);
    i_t_ = static_cast<std::size_t>(std::ceil(u_t / h));
    h_ = u_t / static_cast<double>(i_t_);
    // Extend until the WKB decay exponent beyond x_t exceeds 40 at the top of the bracket.
    const double e_top = e0 + 1.0;
    double exponent = 0.0;
    std::size_t i = i_t_;
    while (exponent < 40.0) {
      const double u = (static_cast<double>(i) + 0.5) * h_;
      exponent += std::sqrt(std::max(0.0, u * u - 2.0 * e_top)) * h_;
      ++i;
    }
    i_far_ = i + 4;
    out_.resize(i_t_ + 2);
    in_.resize(i_far_ + 1);
  }

  // Discrete Wronskian of the outward and inward solutions at x_t; zero at an eigenvalue.
  double mismatch(double energy) {
    integrate(energy);
    const double w_t = weight(i_t_, energy);
    const double w_t1 = weight(i_t_ + 1, energy);
    const double d = w_t * out_[i_t_] * w_t1 * in_[i_t_ + 1] - w_t1 * out_[i_t_ + 1] * w_t * in_[i_t_];
    const double scale = std::abs(out_[i_t_]) * std::abs(in_[i_t_]) + std::abs(out_[i_t_ + 1] * in_[i_t_ + 1]);
    return scale > 0.0 ? d / scale : d;
  }

  // Glued solution on nodes 0..i_far at the given energy (outward up to x_t, scaled inward beyond).
  std::vector<double> glued(double energy) {
    integrate(energy);
    const double s = out_[i_t_] / in_[i_t_];
    std::vector<double> psi(i_far_ + 1);
    for (std::size_t i = 0; i <= i_t_; ++i) psi[i] = out_[i];
    for (std::size_t i = i_t_ + 1; i <= i_far_; ++i) psi[i] = s * in_[i];
    return psi;
  }

  double step() const { return h_; }
  std::size_t turning_index() const { return i_t_; }
  std::size_t far_index() const { return i_far_; }
  bool odd() const { return odd_; }
  int n() const { return n_; }

 private:
  double f(std::size_t i, double energy) const {
    const double u = static_cast<double>(i) * h_;
    return u * u - 2.0 * energy;
  }
  double weight(std::size_t i, double energy) const { return 1.0 - h_ * h_ * f(i, energy) / 12.0; }

  void integrate(double energy) {
    const double h2 = h_ * h_;
    if (odd_) {
      out_[0] = 0.0;
      out_[1] = h_;
    } else {
      out_[0] = 1.0;
      out_[1] = (1.0 + 5.0 * h2 * f(0, energy) / 12.0) / weight(1, energy);
    }
    for (std::size_t i = 1; i <= i_t_; ++i) {
      const double v = 1.0 + 5.0 * h2 * f(i, energy) / 12.0;
      out_[i + 1] = (2.0 * v * out_[i] - weight(i - 1, energy) * out_[i - 1]) / weight(i + 1, energy);
    }
    in_[i_far_] = 0.0;
    in_[i_far_ - 1] = 1e-200;
    for (std::size_t i = i_far_ - 1; i >= i_t_; --i) {
      const double v = 1.0 + 5.0 * h2 * f(i, energy) / 12.0;
      in_[i - 1] = (2.0 * v * in_[i] - weight(i + 1, energy) * in_[i + 1]) / weight(i - 1, energy);
      if (std::abs(in_[i - 1]) > 1e200) {
        for (std::size_t j = i - 1; j <= i_far_; ++j) in_[j] *= 1e-200;
      }
      if (i == i_t_) break;
    }
  }

  int n_;
  bool odd_;
  double h_ = 0.0;
  std::size_t i_t_ = 0;
  std::size_t i_far_ = 0;
  std::vector<double> out_;
  std::vector<double> in_;
};

}  // namespace

EigenfunctionTable eigenfunction_numerov(int n, const RealGrid& grid, const NumerovOptions& options) {
  if (n < 0) throw DomainError("eigenfunction_numerov: negative n");
  NumerovShooter shooter(n, options);
  double lo = n + 0.5 - 0.9;
  double hi = n + 0.5 + 0.9;
  double d_lo = shooter.mismatch(lo);
  const double d_hi = shooter.mismatch(hi);
  if (!(d_lo * d_hi < 0.0)) {
    throw ConvergenceError(fmt::format(
        "eigenfunction_numerov: no sign change for n={} in bracket [{}, {}] (mismatch {}, {})", n, lo,
        hi, d_lo, d_hi));
  }
  while (hi - lo > options.energy_tol) {
    const double mid = 0.5 * (lo + hi);
    const double d_mid = shooter.mismatch(mid);
    if (d_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((d_mid < 0.0) == (d_lo < 0.0)) {
      lo = mid;
      d_lo = d_mid;
    } else {
      hi = mid;
    }
  }
  const double energy = 0.5 * (lo + hi);
  const std::vector<double> psi = shooter.glued(energy);
  const double h = shooter.step();
  const std::size_t i_t = shooter.turning_index();
  const std::size_t i_far = shooter.far_index();

  std::size_t i_p = i_t;
  if (options.tail == TailPatch::decayed) {
    double peak = 0.0;
    for (std::size_t i = 0; i <= i_t; ++i) peak = std::max(peak, std::abs(psi[i]));
    while (i_p + 3 < i_far && std::abs(psi[i_p]) >= 1e-12 * peak) ++i_p;
  }
  const double parity = shooter.odd() ? -1.0 : 1.0;
  auto node = [&](long j) {
    if (j < 0) return parity * psi[static_cast<std::size_t>(-j)];
    return psi[static_cast<std::size_t>(j)];
  };
  const long p = static_cast<long>(i_p);
  const double psi_p = psi[i_p];
  const double dpsi_p =
      (node(p - 2) - 8.0 * node(p - 1) + 8.0 * node(p + 1) - node(p + 2)) / (12.0 * h);
  const double log_derivative = dpsi_p / psi_p;
  const double u_p = static_cast<double>(i_p) * h;

  auto evaluate = [&](double u) {
    if (u > u_p) {
      const double d = u - u_p;
      return psi_p * std::exp(d * log_derivative - d * d);
    }
    const double s = u / h;
    long j0 = static_cast<long>(std::floor(s)) - 2;
    j0 = std::min(j0, static_cast<long>(i_far) - 5);
    double value = 0.0;
    for (long a = 0; a < 6; ++a) {
      double weight = 1.0;
      for (long b = 0; b < 6; ++b) {
        if (b != a) weight *= (s - static_cast<double>(j0 + b)) / static_cast<double>(a - b);
      }
      value += weight * node(j0 + a);
    }
    return value;
  };

  EigenfunctionTable table;
  table.n = n;
  table.grid = grid;
  table.method = EigenMethod::numerov_patched;
  table.energy = energy;
  table.values.resize(grid.size());
  const double convention = ((n / 2) % 2 == 0) ? 1.0 : -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    double v = convention * evaluate(std::abs(x) / kSqrt2);
    if (x < 0.0 && shooter.odd()) v = -v;
    table.values[i] = v;
  }
  normalize_on_grid(table.values, grid.spacing(), n);
  return table;
}

EigenfunctionTable eigenfunction(int n, const RealGrid& grid) {
  return n <= kHermiteMaxN ? eigenfunction_hermite(n, grid) : eigenfunction_numerov(n, grid);
}

void write_csv(std::ostream& out, const EigenfunctionTable& table) {
  out << "x/x0,phi\n";
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    out << format_real(table.grid[i]) << ',' << format_real(table.values[i]) << '\n';
  }
}

}  // namespace kdb
