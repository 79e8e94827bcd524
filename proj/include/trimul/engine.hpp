// engine.hpp
//
// The trilinear operator on sampled data: direct Riemann-sum evaluation
// of the triple Fourier synthesis, the wavelet-separated form over an
// index family, L^p quasi-norms (p = 2/3 throughout the bounds), and
// the smooth compactly supported frequency bump.

#pragma once

#include <complex>
#include <vector>

#include "trimul/coeffs.hpp"
#include "trimul/multiplier.hpp"
#include "trimul/wavelet.hpp"

namespace trimul {

using cd = std::complex<double>;

// Uniform frequency lattice per axis: points lo + (i + 1/2) * step,
// i in [0, count). Matches the midpoint convention of MultiplierGrid so
// multiplier samples are exact lattice values.
struct FreqLattice {
  double lo = 0.0;
  double step = 0.0;
  int count = 0;

  double point(int i) const { return lo + (i + 0.5) * step; }
};

// The lattice every axis of m's grid induces (d = 1: all axes share lo
// and spacing; refuses otherwise).
FreqLattice lattice_of(const MultiplierGrid& m);

struct TestFunctionTriple {
  int d = 1;
  FreqLattice grid;                  // shared per-axis lattice
  std::array<Eigen::ArrayXcd, 3> fhat;

  // Plancherel: ||f||_{L2}^2 = step * sum |fhat|^2.
  double l2_norm(int slot) const;
};

struct OutputField {
  Eigen::ArrayXd x_grid;
  Eigen::ArrayXcd samples;
  double cell_volume = 0.0;
};

// Uniform x grid with n points spanning [lo, lo + n*dx).
Eigen::ArrayXd make_x_grid(double lo, double dx, int n);

// T_m(f,g,h)(x) = sum over lattice triples of m * fhat1 * fhat2 * fhat3
// * e^{2 pi i x (xi+eta+delta)} * step^3. Refuses if a nonzero fhat
// sample lies outside m's box. d = 1 only.
OutputField apply_direct(const MultiplierGrid& m, const TestFunctionTriple& f,
                         const Eigen::ArrayXd& x_grid);

// Wavelet-separated form over the entries of c: sum of b_n * prod_r
// F^{-1}(omega_{r,k_r} fhat_r)(x), with omega the per-axis factor
// 2^{j/2} phi_{G_r}(2^j xi - k_r) evaluated on the lattice. Windowed
// transforms are memoized per (slot, type, j, k).
OutputField apply_wavelet_form(const CoeffTensor& c, const WaveletSystem& sys,
                               const TestFunctionTriple& f,
                               const Eigen::ArrayXd& x_grid);

// (sum |samples|^p * cell_volume)^{1/p}, 0 < p < inf.
double quasi_norm(const OutputField& field, double p);

// Samples of the bump profile exp(1 - 1/(1 - t^2)) with t = (xi -
// center)/width: peak exactly 1 at the center, exactly 0 for |t| >= 1.
Eigen::ArrayXcd make_bump_hat(double center, double width,
                              const FreqLattice& grid);
double bump_profile(double t);

// Per-axis frequency window omega_{r,k}(xi) = 2^{j/2} phi_G(2^j xi - k)
// on the lattice; shared by apply_wavelet_form and the sample-estimate
// property tests.
Eigen::ArrayXd freq_window(const WaveletSystem& sys, WaveletType t, int j,
                           int k, const FreqLattice& grid);

}  // namespace trimul
