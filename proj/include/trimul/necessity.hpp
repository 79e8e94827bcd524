// necessity.hpp
//
// The unboundedness construction: block sequences, the randomized
// multiplier assembled from shifted plateau bumps, its closed-form
// action, Khinchin averages against the deterministic l^2 proxy, the
// growth fit over block exponents, and the L^q membership boundary.

#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "trimul/engine.hpp"
#include "trimul/multiplier.hpp"

namespace trimul {

// a_j = b_j = c_j = 2^{-N/2} on [2^N, 2^{N+1} - 1], zero elsewhere;
// each sequence has unit l^2 norm exactly.
struct BlockSequences {
  int N = 2;

  int block_lo() const { return 1 << N; }
  int block_hi() const { return (1 << (N + 1)) - 1; }  // inclusive
  double weight() const { return std::ldexp(1.0, 0) / std::sqrt(std::ldexp(1.0, N)); }
  int active_lo() const { return 3 * block_lo(); }
  int active_hi() const { return 3 * block_hi(); }
};

struct SignAssignment {
  std::map<int, int> signs;   // l -> +-1 over the active range
  std::string provenance;     // "enumerated" | "sampled(seed)" | ...
  int at(int l) const;
};

// v_l = (l-1)^{-1} (log(l-1))^{1/2}, l >= 3 (natural log).
double v_weight(int l);

// S_l = sum_{j=1}^{l-1} sum_{k=1}^{l-j-1} a_j b_k c_{l-j-k}: the exact
// finite double sum. Zero outside [3*2^N, 3*(2^{N+1}-1)].
double convolution_sum(const BlockSequences& seqs, int l);

// Window geometry: phi_hat supported in I = [-3/64, 3/64]; psi
// supported in J = 10I = [-15/32, 15/32] with value exactly 1 on
// (1/2)J = [-15/64, 15/64]. J is narrower than the unit shift, so
// integer translates of psi are disjoint; that makes the closed-form
// identity and the L^q bump count exact.
double psi_plateau(double u);        // the smooth window on J
extern const double kPsiJHalfwidth;  // 15/32
extern const double kPsiPlateauHalfwidth;  // 15/64
extern const double kPhiIHalfwidth;  // 3/64

// phi as sampled from its frequency bump on a lattice: phi(x) =
// step * sum_u phihat(u) e^{2 pi i x u}. Real for the symmetric bump.
struct SampledPhi {
  FreqLattice lattice;      // covers [-I, I]
  Eigen::ArrayXcd phihat;
  double eval(double x) const;            // phi(x)
  double norm2() const;                   // int |phi|^2 over one period
  double period() const { return 1.0 / lattice.step; }
};

SampledPhi make_phi(double step = 1.0 / 64.0);

// T_{m_t}(f,g,h) on the x1 grid via the closed form
// phi(x)^3 sum_l v_l s_l S_l e^{2 pi i x l}.
OutputField closed_form_T(const BlockSequences& seqs,
                          const SignAssignment& signs, const SampledPhi& phi,
                          const Eigen::ArrayXd& x1_grid);

// The multiplier of the randomized family on a grid covering the active
// blocks: m_t(xi,eta,delta) = sum v_{j+k+l} s_{j+k+l} psi(xi-j)
// psi(eta-k) psi(delta-l) over block triples. Refuses if the box does
// not cover the blocks plus the psi support.
MultiplierGrid assemble_mt(const BlockSequences& seqs,
                           const SignAssignment& signs,
                           const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, int res);

struct KhinchinReport {
  double A_mc = 0.0;        // E_t ||T_{m_t}||_{2/3}^{2/3}
  double B_raw = 0.0;       // (sum (v_l S_l)^2)^{1/3}
  double B_weighted = 0.0;  // phi-weight * B_raw
  double ratio = 0.0;       // A_mc / B_weighted
  double ci_half_width = 0.0;
  int num_signs = 0;
  bool enumerated = false;
  SignAssignment best_signs;  // achieves the max sampled ||T||^{2/3}
  double best_value = 0.0;
};

// Monte-Carlo (or exhaustive when the active count is <= 12) average of
// quasi_norm(closed_form_T, 2/3)^{2/3} over independent uniform signs,
// next to the deterministic proxy. The x1 integral over R collapses to
// one unit period exactly because the shifted |phi|^2 tiles to a
// constant (phi_hat support width < 1).
KhinchinReport khinchin_average(const BlockSequences& seqs,
                                const SampledPhi& phi, int num_signs,
                                std::uint64_t seed);

struct GrowthRow {
  int N = 0;
  double A_N = 0.0;
  double B_N = 0.0;        // raw proxy
  double ci_half_width = 0.0;
  double best_value = 0.0;
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  double slope_A = 0.0;    // log A_N vs log N
  double slope_B = 0.0;    // log B_N vs log N
};

GrowthReport growth_fit(const std::vector<int>& N_range, int num_signs,
                        std::uint64_t seed);

struct BoundaryReport {
  double q = 0.0;
  long long L_max = 0;
  std::map<long long, double> checkpoints;  // L -> P(L)
  double ratio10 = 0.0;     // P(L_max) / P(L_max/10)
  double ratio_decades = 0.0;  // P(L_max) / P(smallest checkpoint)
  double tail_fraction = 0.0;  // integral tail estimate / P(L_max), q > 3
  std::string verdict;      // "diverging" | "converged" | "inconclusive"
};

// Partial sums P(L) = sum_{3<=l<=L} (log(l-1))^{q/2} (l-1)^{2-q} at the
// checkpoints {10^3, L/1000, L/10, L}. Verdict: ratio10 > 1.5 =>
// diverging; else tail < 1% => converged; else inconclusive.
BoundaryReport lq_boundary_check(double q, long long L_max);

// Draws one uniform sign assignment over the active range.
SignAssignment sample_signs(const BlockSequences& seqs, std::mt19937_64& rng);

}  // namespace trimul
