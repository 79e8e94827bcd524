// bounds.hpp
//
// Sufficiency side: the smoothness threshold M_q, per-piece envelope
// checks for the partitioned operator, the (j, r) summability audit,
// and certified lower bounds on the operator norm by random search with
// coordinate ascent.

#pragma once

#include <optional>
#include <vector>

#include "trimul/engine.hpp"
#include "trimul/partition.hpp"

namespace trimul {

// M_q = floor(3d/(3-q)) + 1. Refuses outside 1 <= q < 3.
int required_smoothness(double q, int d);

struct PieceCheckEntry {
  std::size_t piece_size = 0;
  int j = 0;
  double measured = 0.0;   // max over trials of ||T_piece|| ratio
  double envelope = 0.0;   // 2^{3dj/2} * 2^{-r} ||b||_inf * |U_r|^{1/3}
  double constant = 0.0;   // measured / envelope
};

// Measures max over random unit test triples of
// quasi_norm(apply_wavelet_form(piece), 2/3) / prod ||f_i|| against the
// envelope with the given band data (r, sup at split, |U_r|).
PieceCheckEntry piece_envelope_check(const WeightedIndexSet& piece, int j,
                                   unsigned type, int band_r, double band_sup,
                                   std::size_t band_card,
                                   const WaveletSystem& sys,
                                   const FreqLattice& lattice, int trials,
                                   std::uint64_t seed);

struct SummabilityRow {
  int j = 0;
  int r = 0;
  double envelope = 0.0;   // 2^{jd(5/2-q/2)} 2^{r(q/3-1)} sup^{1-q/3} mq^{q/3}
};

struct SummabilityReport {
  std::vector<SummabilityRow> rows;
  double r_ratio = 0.0;          // geometric rate 2^{q/3-1}
  bool r_decay_ok = false;       // requires q < 3
  double measured_sup_slope = 0.0; // fitted log2 sup_j |b| vs j
  double j_term_slope = 0.0;     // fitted log2 of per-j envelope totals
  bool j_decay_ok = false;       // j_term_slope < 0
  bool stated_condition_ok = false; // (K+d+1)(1-q/3) > d
  double total = 0.0;            // sum of all (j, r) envelopes
  double m_norm_target = 0.0;    // ||m||_q^{q/3}
};

// Evaluates the per-(j, r) envelopes with measured per-scale sups,
// checks the geometric r-decay and the sign of the fitted j-decay, and
// evaluates the stated smoothness condition. Divergence at q >= 3 is
// flagged, not thrown.
SummabilityReport summability_audit(const CoeffTensor& c, double q, int K,
                                    int d, double m_norm_q);

struct NormEstimate {
  double lower_bound = 0.0;
  TestFunctionTriple witness;
  int trials = 0;
  std::vector<double> trace;   // best-so-far after each trial
};

// Random band-limited test triples on m's lattice followed by
// coordinate ascent (perturb one slot, renormalize, keep improvements).
// A lower bound on ||T_m||_{L2xL2xL2 -> L^{2/3}}; no supremum claim.
NormEstimate estimate_operator_norm(const MultiplierGrid& m, int trials,
                                    int ascent_steps, std::uint64_t seed);

// Recomputes the ratio for a stored witness (reproducibility check).
double evaluate_witness(const MultiplierGrid& m,
                        const TestFunctionTriple& witness);

struct SweepPoint {
  double m_norm_q = 0.0;
  double envelope = 0.0;     // ||m||_q^{q/3}
  double estimate = 0.0;
  double ratio = 0.0;        // estimate / envelope
};

struct SweepReport {
  std::vector<SweepPoint> points;
  double loglog_slope = 0.0; // log estimate vs log envelope
  double max_ratio = 0.0;    // the fitted constant A
  double q = 0.0;
};

// Scatter of norm lower bounds against ||m||_q^{q/3} over a family.
SweepReport sufficiency_sweep(const std::vector<MultiplierGrid>& family,
                              double q, int trials, int ascent_steps,
                              std::uint64_t seed);

}  // namespace trimul
