#pragma once

#include <vector>

// Brute-force verification backend for the single-mode circuit Hamiltonian
//
//   H = 4 E_C n^2 + (1/2) E_L (phi - 2 pi f_ext)^2 - E_J cos(phi)
//
// discretized on a uniform phase grid with a 3-point Laplacian and Dirichlet
// boundaries. Deliberately independent of the library's Fock-basis solver:
// takes raw numbers, builds its own matrices, and uses a different
// eigensolver (LAPACK tridiagonal range solver). Test tree only.

namespace grid_oracle {

struct GridSpec {
  double phi_min = -8.0 * 3.14159265358979324;
  double phi_max = 8.0 * 3.14159265358979324;
  int n_points = 32001;  // odd keeps phi = 0 on the grid
};

struct GridSpectrum {
  std::vector<double> phi;                  // grid nodes, radians
  double step = 0.0;                        // grid spacing
  std::vector<double> energies;             // lowest k eigenvalues, GHz
  std::vector<std::vector<double>> states;  // wavefunctions, unit L2 norm
                                            // under trapezoid quadrature
};

GridSpectrum grid_diagonalize(double e_l, double e_c, double e_j,
                              double phi_ext, const GridSpec& spec = {},
                              int n_levels = 8);

// |psi_0|^2 on the grid, trapezoid-normalized to 1.
std::vector<double> grid_ground_pdf(double e_l, double e_c, double e_j,
                                    double phi_ext, const GridSpec& spec = {});

// Ground-state weight with |phi - 2 pi f_ext| > pi.
double grid_delocalization(double e_l, double e_c, double e_j, double phi_ext,
                           const GridSpec& spec = {});

// Matrix elements between grid eigenstates: <i|phi|j> by quadrature and
// |<i|n|j>| with n = -i d/dphi via central differences.
double grid_phi_matrix_element(const GridSpectrum& s, int i, int j);
double grid_n_matrix_element(const GridSpectrum& s, int i, int j);

// Max shift of the lowest `levels` eigenvalues when the point count is
// doubled (n -> 2n-1, which keeps the count odd). GHz.
double grid_convergence_shift(double e_l, double e_c, double e_j,
                              double phi_ext, const GridSpec& spec = {},
                              int levels = 5);

}  // namespace grid_oracle
