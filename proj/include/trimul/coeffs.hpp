// coeffs.hpp
//
// Frame coefficients b^{j,G}_n = <Phi^{j,G}_n, m>: analysis (separable
// filter-bank pyramid on aligned grids, direct quadrature otherwise),
// reconstruction, the L^q frame norm over the dyadic cubes Q_{jn},
// per-scale coefficient bounds, decay fits, and dilation covariance.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trimul/multiplier.hpp"
#include "trimul/wavelet.hpp"

namespace trimul {

struct CoeffTensor {
  std::map<FrameIndex, double> entries;
  int j_max = 0;
  std::string source_meta;

  double sup_abs() const;
  // sup_n |b| restricted to scale j and type bitmask (whole scale if
  // type == no_type).
  static constexpr unsigned no_type = ~0u;
  double scale_sup(int j, unsigned type = no_type) const;
};

// Coefficients for every index with support meeting m's box, all
// j <= j_max. Grids whose spacing is an exact dyadic 2^{-L} with
// dyadically aligned corners run through the exact filter-bank pyramid
// (started from midpoint samples); any other grid falls back to
// per-index midpoint quadrature. Entries below 1e-14 * max are dropped.
// Refuses when res < 2^{j_max+2} per unit length.
CoeffTensor analyze(const MultiplierGrid& m, const WaveletSystem& sys,
                    int j_max);

// Per-index midpoint quadrature of <Phi^{j,G}_n, m> over m's grid.
// The slow path of analyze and the cross-check oracle for the pyramid.
double direct_coefficient(const MultiplierGrid& m, const WaveletSystem& sys,
                          const FrameIndex& idx);

enum class ReconstructMode {
  // Inverse filter-bank synthesis; exact left inverse of the pyramid on
  // aligned grids (values in the same midpoint-sample convention).
  pyramid,
  // Pointwise sum b * Phi(x) from the wavelet tables at grid midpoints.
  pointwise,
};

// Sum of b * Phi over all entries rendered on the given grid shape.
MultiplierGrid reconstruct(const CoeffTensor& c, const WaveletSystem& sys,
                           const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, int res,
                           ReconstructMode mode = ReconstructMode::pyramid);

// || (sum_{j,G,n} |b 2^{3dj/2} chi_{Q_jn}|^2)^{1/2} ||_{L^q} with Q_{jn}
// the cube centered at 2^{-j} n with side 2^{1-j}, accumulated exactly
// on the lattice of spacing 2^{-j_max}.
double frame_norm_lq(const CoeffTensor& c, double q, const WaveletSystem& sys);

struct CoeffBoundRow {
  int j = 0;
  unsigned type = 0;
  double lq_norm = 0.0;     // ||b||_{l^q} over the (j, G) slice
  double envelope = 0.0;    // 2^{3dj(1/q - 1/2)} * m_norm_q
  double ratio = 0.0;
  bool flagged = false;
};

struct CoeffBoundReport {
  std::vector<CoeffBoundRow> rows;
  double max_ratio = 0.0;
  double flag_threshold = 0.0;
};

// Per-(j, G) ratios ||b||_{l^q} / (2^{3dj(1/q-1/2)} m_norm_q); rows with
// ratio > flag_threshold are flagged.
CoeffBoundReport lq_coeff_bound_check(const CoeffTensor& c, double q,
                                      double m_norm_q,
                                      double flag_threshold = 10.0);

// Least-squares slope of log2 sup_n |b^{j,G}_n| against j over
// j in [1, j_max], minimized over G. Refuses with fewer than 3 scales.
double decay_slope(const CoeffTensor& c);
// Slope for one type bitmask; nullopt when a scale has no entries.
std::optional<double> decay_slope_for_type(const CoeffTensor& c,
                                           unsigned type);

struct DilationRow {
  FrameIndex lhs_index;   // scale j, matched against scale j - i
  double lhs = 0.0;       // <Phi^{j,G}_n, m(2^i .)>
  double rhs = 0.0;       // 2^{-3di/2} <Phi^{j-i,G}_n, m>
  double rel_err = 0.0;
};

struct DilationReport {
  int i = 0;
  double factor = 0.0;     // 2^{-3di/2}
  double max_rel_err = 0.0;
  std::vector<DilationRow> rows;
};

// Verifies <Phi^{j,G}_n, m(2^i .)> = 2^{-3di/2} <Phi^{j-i,G}_n, m> by two
// independent direct quadratures (the dilated side on its own finer
// grid). m must carry an evaluator; requires 1 <= j - i and j <= j_max.
DilationReport dilation_covariance_check(const WaveletSystem& sys,
                                         const MultiplierGrid& m, int i,
                                         int j, int j_max);

}  // namespace trimul
