// wavelet.hpp
//
// 1-D compactly supported orthonormal wavelet pair (Daubechies family,
// cascade construction) and the tensor-product frame over R^{3d}:
// scale 0 carries the all-father types, scales j >= 1 carry every
// father/mother mix except all-father. Evaluation, index enumeration,
// and exact-table Gram products.

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trimul/common.hpp"

namespace trimul {

// Sampled father/mother pair on [0, support_len] at spacing
// 2^{-resolution_levels}. Tables are produced by the exact integer
// eigenvector of the refinement operator followed by dyadic refinement,
// then rescaled so the discrete L2 norm is exactly 1.
struct WaveletSystem {
  Eigen::ArrayXd filter;        // low-pass h, sum = sqrt(2)
  int K = 0;                    // vanishing moments of the mother wavelet
  int support_len = 0;          // filter length - 1
  int resolution_levels = 8;    // table spacing 2^{-resolution_levels}
  Eigen::ArrayXd phi_F_samples; // father, length support_len*2^levels + 1
  Eigen::ArrayXd phi_M_samples; // mother, same grid

  double table_spacing() const { return std::ldexp(1.0, -resolution_levels); }
  int table_size() const { return static_cast<int>(phi_F_samples.size()); }
};

enum class WaveletType { Father, Mother };

// Scale j, per-axis type bitmask (bit r set = mother on axis r), and
// translation n in Z^{3d}. j = 0 forces the all-father type; j >= 1
// excludes it.
struct FrameIndex {
  int j = 0;
  unsigned type = 0;
  Eigen::VectorXi n;

  int axes() const { return static_cast<int>(n.size()); }
  WaveletType axis_type(int r) const {
    return (type >> r) & 1u ? WaveletType::Mother : WaveletType::Father;
  }
  bool valid() const {
    if (j < 0) return false;
    unsigned all = (1u << n.size()) - 1u;
    if (j == 0) return type == 0;
    return type >= 1 && type <= all;
  }
  std::string type_string() const;  // e.g. "MFF"

  bool operator==(const FrameIndex& o) const {
    return j == o.j && type == o.type && n.size() == o.n.size() &&
           (n.array() == o.n.array()).all();
  }
  bool operator<(const FrameIndex& o) const;
};

// Builds the sampled system for the given Daubechies order (K = order
// vanishing moments, filter length 2*order). resolution_levels >= 6.
// Throws std::invalid_argument for unknown orders and refusal_error if
// the cascade eigenproblem degenerates.
WaveletSystem build_wavelet_system(int family_order, int resolution_levels);

// Table lookup with linear interpolation; exactly 0 outside [0, support].
double point_eval(const WaveletSystem& sys, WaveletType t, double x);

// Phi^{j,G}_n(x) = 2^{3dj/2} prod_r phi_{G_r}(2^j x_r - n_r).
// x.size() must equal idx.n.size(); returns 0 outside the support box.
double tensor_wavelet_eval(const WaveletSystem& sys, const FrameIndex& idx,
                           const Eigen::VectorXd& x);

// All indices at scale j whose support box intersects [lo, hi]
// (closed boxes; edge contact counts). Scale 0 emits only the
// all-father type, scales >= 1 every mixed type.
std::vector<FrameIndex> enumerate_indices(const WaveletSystem& sys, int j,
                                          const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi);

// Exact-table inner product of two frame elements: product over axes of
// 1-D inner products evaluated on the coarser element's dyadic grid so
// every sample is an exact table hit (the finer table is strided).
double frame_gram(const WaveletSystem& sys, const FrameIndex& a,
                  const FrameIndex& b);

// 1-D building block of frame_gram: <2^{ja/2} phi_ta(2^{ja}x - na),
// 2^{jb/2} phi_tb(2^{jb}x - nb)> by trapezoid quadrature on the
// common-refinement grid.
double inner_product_1d(const WaveletSystem& sys, WaveletType ta, int ja,
                        int na, WaveletType tb, int jb, int nb);

// Quadrature moment integral x^alpha phi_M(x) dx over the table.
// Vanishes (to roundoff) for alpha < K at any table resolution.
double mother_moment(const WaveletSystem& sys, int alpha);

// Discrete L2 norm of a table at the system's spacing.
double table_l2_norm(const WaveletSystem& sys, WaveletType t);

// Max number of distinct translates of a fixed (j, G) whose supports can
// cover one point: (support_len + 1)^{axes} as a crude exact bound, and
// the tighter per-axis count support_len (interior). Used by tests.
int max_support_overlap(const WaveletSystem& sys, int axes);

}  // namespace trimul
