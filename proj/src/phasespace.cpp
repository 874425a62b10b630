#include "kdb/phasespace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "kdb/error.hpp"
#include "kdb/io.hpp"
#include "kdb/parallel.hpp"
#include "kdb/specfun.hpp"

namespace kdb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using cd = std::complex<double>;

// Occupied levels with their eigenfunctions on the grid.
std::vector<std::pair<int, std::vector<double>>> occupied_eigenfunctions(const StateVector1D& state,
                                                                         const RealGrid& grid) {
  std::vector<int> levels;
  for (std::size_t n = 0; n < state.amplitudes.size(); ++n) {
    if (state.amplitudes[n] != cd(0.0, 0.0)) levels.push_back(static_cast<int>(n));
  }
  std::vector<std::pair<int, std::vector<double>>> out;
  if (levels.empty()) return out;
  const int hermite_top = std::min(levels.back(), kHermiteMaxN);
  std::vector<EigenfunctionTable> basis;
  if (levels.front() <= kHermiteMaxN) basis = eigenfunction_hermite_basis(hermite_top, grid);
  for (int n : levels) {
    if (n <= kHermiteMaxN) {
      out.emplace_back(n, std::move(basis[static_cast<std::size_t>(n)].values));
    } else {
      out.emplace_back(n, eigenfunction_numerov(n, grid).values);
    }
  }
  return out;
}

WavefunctionGrid combine(const StateVector1D& state, double t_periods, const RealGrid& grid, bool momentum) {
  WavefunctionGrid psi;
  psi.grid = grid;
  psi.time_periods = t_periods;
  psi.values.assign(grid.size(), cd(0.0, 0.0));
  psi.n_top = highest_occupied(state);
  const double theta = kTwoPi * t_periods;
  for (auto& [n, phi] : occupied_eigenfunctions(state, grid)) {
    // free phase e^{-i n theta}; the common zero-point phase is dropped
    double angle = -std::fmod(static_cast<double>(n) * theta, kTwoPi);
    if (momentum) angle -= 0.5 * std::numbers::pi * (n % 4);
    const cd c = state.amplitudes[static_cast<std::size_t>(n)] * cd(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < grid.size(); ++i) psi.values[i] += c * phi[i];
  }
  const double edge = std::max(std::norm(psi.values.front()), std::norm(psi.values.back()));
  if (edge > 1e-8) {
    throw GridError(fmt::format("grid [{}, {}] too small: boundary density {:.3e} exceeds 1e-8", grid.front(),
                                grid.back(), edge));
  }
  return psi;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("truncated Wigner binary");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("truncated Wigner binary");
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return std::bit_cast<double>(bits);
}

constexpr char kMagic[9] = "KDBWIG01";

}  // namespace

double WavefunctionGrid::norm() const {
  double s = 0.0;
  for (const auto& z : values) s += std::norm(z);
  return s * grid.spacing();
}

std::vector<double> WavefunctionGrid::density() const {
  std::vector<double> d(values.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(values[i]);
  return d;
}

double WignerGrid::min() const { return *std::min_element(values.begin(), values.end()); }
double WignerGrid::max() const { return *std::max_element(values.begin(), values.end()); }

double WignerGrid::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  // dq dp = x0 hbar k0 dq' dp' with x0 k0 = 1/2
  return 0.5 * s * q.spacing() * p.spacing();
}

int highest_occupied(const StateVector1D& state, double threshold) {
  for (std::size_t n = state.amplitudes.size(); n-- > 0;) {
    const double pop = std::norm(state.amplitudes[n]);
    if (pop > threshold) return static_cast<int>(n);
  }
  return -1;
}

RealGrid default_synthesis_grid(int n_top) {
  return RealGrid::symmetric(2.0 * std::sqrt(std::max(n_top, 0)) + 10.0, 1.0 / 16.0);
}

WavefunctionGrid synthesize(const StateVector1D& state, double t_periods, const RealGrid& grid) {
  return combine(state, t_periods, grid, false);
}

WavefunctionGrid synthesize_momentum(const StateVector1D& state, double t_periods, const RealGrid& grid) {
  return combine(state, t_periods, grid, true);
}

WignerGrid wigner(const WavefunctionGrid& psi, const WignerOptions& options) {
  const RealGrid& q = psi.grid;
  if (q.size() < 3) throw GridError("wavefunction grid too small for a Wigner function");
  // re-validate uniformity of the source grid
  (void)RealGrid::from_points(q.points());
  double p_extent = options.p_extent;
  if (!(p_extent > 0.0)) {
    if (psi.n_top < 0) throw DomainError("wigner: momentum extent needed when n_top is unknown");
    p_extent = 2.0 * std::sqrt(static_cast<double>(psi.n_top)) + 8.0;
  }
  const double dq = q.spacing();
  const double dp = options.p_spacing > 0.0 ? options.p_spacing : dq;
  // offsets x_s = 2 s dq (in x0) make psi(q -+ x_s/2) exact grid samples; phase -p x / hbar = -pi_j s dq
  const double period = 2.0 * std::numbers::pi / dq;
  if (2.0 * p_extent >= period) {
    throw GridError(fmt::format("momentum range +-{} exceeds the alias-free period {} of the q spacing", p_extent,
                                period));
  }
  WignerGrid w;
  w.q = q;
  w.p = RealGrid::symmetric(p_extent, dp);
  const std::size_t nq = q.size();
  const std::size_t np = w.p.size();
  w.values.assign(nq * np, 0.0);
  std::vector<double> residue(nq, 0.0);
  const double p0 = w.p.front();
  parallel_for(nq, options.threads, [&](std::size_t i) {
    std::vector<cd> acc(np, cd(0.0, 0.0));
    const std::size_t reach = std::min(i, nq - 1 - i);
    for (std::size_t s = 0; s <= reach; ++s) {
      for (int sign : {1, -1}) {
        if (s == 0 && sign == -1) continue;
        const cd f = sign == 1 ? std::conj(psi.values[i - s]) * psi.values[i + s]
                               : std::conj(psi.values[i + s]) * psi.values[i - s];
        if (f == cd(0.0, 0.0)) continue;
        const double offset = -sign * static_cast<double>(s) * dq;
        const cd step(std::cos(dp * offset), std::sin(dp * offset));
        cd z;
        for (std::size_t j = 0; j < np; ++j) {
          if (j % 64 == 0) {
            const double phase = (p0 + static_cast<double>(j) * dp) * offset;
            z = f * cd(std::cos(phase), std::sin(phase));
          }
          acc[j] += z;
          z *= step;
        }
      }
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      w.values[i * np + j] = acc[j].real() * dq / std::numbers::pi;
      worst = std::max(worst, std::abs(acc[j].imag() * dq / std::numbers::pi));
    }
    residue[i] = worst;
  });
  w.max_imag_residue = *std::max_element(residue.begin(), residue.end());
  return w;
}

Marginals marginals(const WignerGrid& w) {
  Marginals m;
  const std::size_t nq = w.q.size();
  const std::size_t np = w.p.size();
  m.position.assign(nq, 0.0);
  m.momentum.assign(np, 0.0);
  for (std::size_t i = 0; i < nq; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < np; ++j) s += w.at(i, j);
    m.position[i] = 0.5 * s * w.p.spacing();
  }
  for (std::size_t j = 0; j < np; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < nq; ++i) s += w.at(i, j);
    m.momentum[j] = 0.5 * s * w.q.spacing();
  }
  return m;
}

ProbabilityTrace probability_trace(const Trajectory1D& traj, const RealGrid& grid, double span_periods,
                                   int samples) {
  if (samples < 2) throw DomainError("probability_trace: need at least two samples");
  if (!(span_periods > 0.0)) throw DomainError("probability_trace: span must be positive");
  ProbabilityTrace trace;
  trace.grid = grid;
  const StateVector1D& state = traj.final_state();
  const double t0 = traj.times.back();
  const auto basis = occupied_eigenfunctions(state, grid);
  trace.density.reserve(static_cast<std::size_t>(samples) * grid.size());
  std::vector<cd> psi(grid.size());
  for (int k = 0; k < samples; ++k) {
    const double t = t0 + span_periods * k / (samples - 1.0);
    trace.times.push_back(t);
    std::fill(psi.begin(), psi.end(), cd(0.0, 0.0));
    for (const auto& [n, phi] : basis) {
      const double angle = -std::fmod(static_cast<double>(n) * kTwoPi * t, kTwoPi);
      const cd c = state.amplitudes[static_cast<std::size_t>(n)] * cd(std::cos(angle), std::sin(angle));
      for (std::size_t i = 0; i < grid.size(); ++i) psi[i] += c * phi[i];
    }
    for (const auto& z : psi) trace.density.push_back(std::norm(z));
  }
  return trace;
}

double turning_time(const StateVector1D& state) {
  // <x^2>/x0^2 = sum (2n+1)|C_n|^2 + 2 Re(e^{-2i theta} A), A = sum conj(C_n) C_{n+2} sqrt((n+1)(n+2))
  cd a(0.0, 0.0);
  const auto& c = state.amplitudes;
  for (std::size_t n = 0; n + 2 < c.size(); ++n) {
    a += std::conj(c[n]) * c[n + 2] * std::sqrt((n + 1.0) * (n + 2.0));
  }
  if (std::abs(a) == 0.0) return 0.0;
  double t = std::arg(a) / (2.0 * kTwoPi);
  if (t < 0.0) t += 0.5;
  return t;
}

double lobe_alignment_time(const StateVector1D& state, int ladder_step) {
  if (ladder_step < 1) throw DomainError("ladder step must be at least 1");
  cd a(0.0, 0.0);
  const auto& c = state.amplitudes;
  const std::size_t step = static_cast<std::size_t>(ladder_step);
  for (std::size_t n = 0; n + step < c.size(); ++n) a += std::conj(c[n]) * c[n + step];
  if (std::abs(a) == 0.0) return 0.0;
  const double window = 1.0 / ladder_step;
  double t = std::arg(a) / (kTwoPi * ladder_step);
  if (t < 0.0) t += window;
  return t;
}

double ladder_fwhm(const std::vector<double>& populations, int n_max, int ladder_step) {
  const int offset = n_max % ladder_step;
  std::vector<double> ladder;
  for (std::size_t n = static_cast<std::size_t>(offset); n < populations.size(); n += static_cast<std::size_t>(ladder_step)) {
    ladder.push_back(populations[n]);
  }
  const long peak = (n_max - offset) / ladder_step;
  const double half = 0.5 * ladder[static_cast<std::size_t>(peak)];
  auto value = [&](long k) { return (k < 0 || k >= static_cast<long>(ladder.size())) ? 0.0 : ladder[static_cast<std::size_t>(k)]; };
  long k = peak;
  while (value(k - 1) >= half) --k;
  const double left = (k - 1) + (half - value(k - 1)) / (value(k) - value(k - 1));
  k = peak;
  while (value(k + 1) >= half) ++k;
  const double right = k + (value(k) - half) / (value(k) - value(k + 1));
  return (right - left) * ladder_step;
}

CatMetrics cat_metrics(const StateVector1D& state, const Resonance1D& resonance, const std::optional<RealGrid>& grid) {
  const auto pops = state.populations();
  if (pops.empty()) throw DomainError("cat_metrics: empty state");
  const auto it = std::max_element(pops.begin(), pops.end());
  CatMetrics m;
  m.n_max = static_cast<int>(it - pops.begin());
  if (m.n_max == 0) throw DomainError("cat_metrics: no clear population peak above the ground state");
  m.width = ladder_fwhm(pops, m.n_max, resonance.ladder_step());
  m.poissonian_sigma = std::sqrt(static_cast<double>(m.n_max));
  m.dx_cat = 4.0 * m.poissonian_sigma;
  m.dp_cat = m.dx_cat;
  m.n_photon_recoils = m.dx_cat / (resonance.ladder_step() + resonance.delta_p());
  for (std::size_t n = 0; n < pops.size(); ++n) m.mean_n += static_cast<double>(n) * pops[n];
  m.mean_energy = 0.0;
  for (std::size_t n = 0; n < pops.size(); ++n) m.mean_energy += (static_cast<double>(n) + 0.5) * pops[n];
  m.sub_poissonian = m.width < 2.0 * m.poissonian_sigma;
  if (grid) {
    const double t = turning_time(state);
    m.turning_time = t;
    m.measured_dx = peak_separation(synthesize(state, t, *grid).density(), *grid);
    m.measured_dp = peak_separation(synthesize_momentum(state, t + 0.25, *grid).density(), *grid);
  }
  return m;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& values) {
  std::vector<std::size_t> out;
  const std::size_t n = values.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (values[i] > values[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && values[j + 1] == values[i]) ++j;
      if (j + 1 < n && values[j + 1] < values[i]) out.push_back(i);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

double peak_separation(const std::vector<double>& density, const RealGrid& grid) {
  auto peaks = local_maxima(density);
  if (peaks.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return density[a] > density[b]; });
  return std::abs(grid[peaks[1]] - grid[peaks[0]]);
}

std::vector<double> gaussian_smooth(const std::vector<double>& values, double spacing, double sigma) {
  const long reach = static_cast<long>(std::ceil(4.0 * sigma / spacing));
  std::vector<double> kernel(static_cast<std::size_t>(2 * reach + 1));
  double total = 0.0;
  for (long k = -reach; k <= reach; ++k) {
    const double x = k * spacing / sigma;
    kernel[static_cast<std::size_t>(k + reach)] = std::exp(-0.5 * x * x);
    total += kernel[static_cast<std::size_t>(k + reach)];
  }
  for (double& w : kernel) w /= total;
  const long n = static_cast<long>(values.size());
  std::vector<double> out(values.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    for (long k = -reach; k <= reach; ++k) {
      const long j = i + k;
      if (j >= 0 && j < n) s += kernel[static_cast<std::size_t>(k + reach)] * values[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

std::vector<std::size_t> envelope_peaks(const std::vector<double>& density, const RealGrid& grid, double sigma,
                                        double rel_threshold) {
  const auto smooth = gaussian_smooth(density, grid.spacing(), sigma);
  const double top = *std::max_element(smooth.begin(), smooth.end());
  std::vector<std::size_t> out;
  for (std::size_t i : local_maxima(smooth)) {
    if (smooth[i] >= rel_threshold * top) out.push_back(i);
  }
  return out;
}

void write_csv(std::ostream& out, const WignerGrid& w, const std::string& meta) {
  if (!meta.empty()) out << meta << '\n';
  out << "q/x0,p/hbar k0,W\n";
  for (std::size_t i = 0; i < w.q.size(); ++i) {
    for (std::size_t j = 0; j < w.p.size(); ++j) {
      out << format_real(w.q[i]) << ',' << format_real(w.p[j]) << ',' << format_real(w.at(i, j)) << '\n';
    }
  }
}

void write_binary(std::ostream& out, const WignerGrid& w, const std::string& meta) {
  out.write(kMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(w.q.size()));
  put_u32(out, static_cast<std::uint32_t>(w.p.size()));
  for (std::size_t i = 0; i < w.q.size(); ++i) {
    for (std::size_t j = 0; j < w.p.size(); ++j) {
      put_f64(out, w.q[i]);
      put_f64(out, w.p[j]);
      put_f64(out, w.at(i, j));
    }
  }
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
}

WignerGrid read_binary(std::istream& in, std::string* meta) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error("not a Wigner binary file");
  const std::uint32_t nq = get_u32(in);
  const std::uint32_t np = get_u32(in);
  std::vector<double> qs(nq), ps(np), values(static_cast<std::size_t>(nq) * np);
  for (std::uint32_t i = 0; i < nq; ++i) {
    for (std::uint32_t j = 0; j < np; ++j) {
      qs[i] = get_f64(in);
      ps[j] = get_f64(in);
      values[static_cast<std::size_t>(i) * np + j] = get_f64(in);
    }
  }
  const std::uint32_t len = get_u32(in);
  std::string text(len, '\0');
  if (len > 0 && !in.read(text.data(), len)) throw Error("truncated Wigner binary metadata");
  if (meta) *meta = std::move(text);
  WignerGrid w;
  w.q = RealGrid::from_points(std::move(qs));
  w.p = RealGrid::from_points(std::move(ps));
  w.values = std::move(values);
  return w;
}

void write_marginals_csv(std::ostream& out, const WignerGrid& w, const Marginals& m, const std::string& meta) {
  if (!meta.empty()) out << meta << '\n';
  out << "axis,coordinate,density\n";
  for (std::size_t i = 0; i < w.q.size(); ++i) out << "x," << format_real(w.q[i]) << ',' << format_real(m.position[i]) << '\n';
  for (std::size_t j = 0; j < w.p.size(); ++j) out << "p," << format_real(w.p[j]) << ',' << format_real(m.momentum[j]) << '\n';
}

}  // namespace kdb
