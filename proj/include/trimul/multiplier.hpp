// multiplier.hpp
//
// Sampled multipliers on uniform box grids in R^{3d} (desk scale d = 1,
// so 3 axes) plus the generator families used across tests and sweeps.

#pragma once

#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "trimul/common.hpp"

namespace trimul {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

// Values are midpoint samples: cell i holds m(lo + (i + 1/2) h) with
// h = (hi - lo)/res per axis, flattened with axis 0 slowest.
struct MultiplierGrid {
  int d = 1;                     // ambient dimension is 3d
  Eigen::VectorXd lo, hi;        // box corners, size 3d
  int res = 0;                   // samples per axis
  Eigen::ArrayXd values;         // size res^{3d}
  ScalarField evaluator;         // optional closed form for refinement

  int axes() const { return 3 * d; }
  double spacing(int axis) const { return (hi[axis] - lo[axis]) / res; }
  Eigen::VectorXd point(const Eigen::VectorXi& cell) const;
  std::size_t flat_index(const Eigen::VectorXi& cell) const;
  double cell_volume() const;
};

// Samples fn at cell midpoints over the box; keeps fn as the evaluator.
MultiplierGrid sample_grid(int d, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, int res,
                           const ScalarField& fn);

// Midpoint-quadrature L^q norm and sup norm of the samples.
double grid_lq_norm(const MultiplierGrid& m, double q);
double grid_sup_norm(const MultiplierGrid& m);

// --- Generator families (all d = 1, three axes) ---

// Separable Gaussian exp(-|x - c|^2 / (2 sigma^2)).
ScalarField gaussian_field(double sigma, const Eigen::VectorXd& center);

// prod_r sin(pi x_r)^3 on [0,1]^3 times a quadratic polynomial with
// coefficients drawn from rng; smooth, vanishes to second order at the
// box boundary. The decay-test family.
ScalarField sine_window_poly(std::mt19937_64& rng);

// Sum of `count` Gaussians with centers in the box interior and widths
// in [0.35, 0.8], scaled so the sup norm is about 1. The random smooth
// sweep family.
ScalarField gaussian_mix(std::mt19937_64& rng, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, int count);

// g(x) * |x_1 + x_2 + x_3 - c|: a kink across a non-axis plane, the
// negative control for the decay fit (not C^1 in any mixed direction).
ScalarField diagonal_kink(const ScalarField& window, double c);

}  // namespace trimul
