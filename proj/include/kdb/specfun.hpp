#pragma once

#include <ostream>
#include <vector>

#include "kdb/grid.hpp"

namespace kdb {

enum class EigenMethod { hermite_recurrence, numerov_patched };

struct EigenfunctionTable {
  int n = 0;
  RealGrid grid;
  std::vector<double> values;
  EigenMethod method = EigenMethod::hermite_recurrence;
  // Dimensionless eigenvalue E/(hbar Omega0); exact n + 1/2 for the Hermite path.
  double energy = 0.0;
};

// Where the large-|x| ansatz is attached to the Numerov solution.
enum class TailPatch {
  turning_point,  // at x_t, literally
  decayed         // where the inward solution has fallen below 1e-12 of its peak
};

struct NumerovOptions {
  TailPatch tail = TailPatch::decayed;
  double steps_per_wavelength = 200.0;
  double max_step = 0.01;  // internal units (x / sqrt2 x0)
  double energy_tol = 1e-10;
};

constexpr int kHermiteMaxN = 170;

double laguerre(int n, int alpha, double y);
// Writes L_0..L_n^{(alpha)}(y) into out (size n+1).
void laguerre_sequence(int n, int alpha, double y, std::vector<double>& out);
double log_factorial_ratio(int n, int m);

EigenfunctionTable eigenfunction_hermite(int n, const RealGrid& grid);
// phi_0..phi_nmax on one grid via a single recurrence pass (n_max <= 170).
std::vector<EigenfunctionTable> eigenfunction_hermite_basis(int n_max, const RealGrid& grid);
EigenfunctionTable eigenfunction_numerov(int n, const RealGrid& grid, const NumerovOptions& options = {});
// Hermite recurrence up to 170, Numerov-patched beyond.
EigenfunctionTable eigenfunction(int n, const RealGrid& grid);

// Classical turning point 2 sqrt(n + 1/2), in x0 units.
double turning_point(int n);

void write_csv(std::ostream& out, const EigenfunctionTable& table);

}  // namespace kdb
