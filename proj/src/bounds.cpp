// bounds.cpp

#include "trimul/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace trimul {
namespace {

// Output sampling convention shared by the norm measurements: the
// lattice induces a 1/step periodic model; quasi-norms integrate one
// period at four samples per lattice count.
Eigen::ArrayXd period_grid(const FreqLattice& lattice) {
  const double period = 1.0 / lattice.step;
  const int nx = 4 * lattice.count;
  return make_x_grid(0.0, period / nx, nx);
}

TestFunctionTriple random_triple(const FreqLattice& lattice,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  TestFunctionTriple f;
  f.d = 1;
  f.grid = lattice;
  for (int slot = 0; slot < 3; ++slot) {
    f.fhat[slot].resize(lattice.count);
    for (int i = 0; i < lattice.count; ++i)
      f.fhat[slot][i] = cd(gauss(rng), gauss(rng));
    f.fhat[slot] /= f.l2_norm(slot);
  }
  return f;
}

}  // namespace

int required_smoothness(double q, int d) {
  if (d < 1) throw std::invalid_argument("required_smoothness: d >= 1");
  if (!(q >= 1.0) || !(q < 3.0))
    throw refusal_error("required_smoothness: needs 1 <= q < 3");
  // The 1e-9 nudge absorbs representation error in 3d/(3-q) when the
  // quotient is an exact integer (e.g. q = 2.9, d = 1 must give 31).
  return static_cast<int>(std::floor(3.0 * d / (3.0 - q) + 1e-9)) + 1;
}

PieceCheckEntry piece_envelope_check(const WeightedIndexSet& piece, int j,
                                   unsigned type, int band_r, double band_sup,
                                   std::size_t band_card,
                                   const WaveletSystem& sys,
                                   const FreqLattice& lattice, int trials,
                                   std::uint64_t seed) {
  if (piece.d != 1)
    throw std::invalid_argument("piece_envelope_check: d = 1 only");
  if (j < 1 || type < 1 || type > 7)
    throw std::invalid_argument("piece_envelope_check: detail scale required");
  if (trials < 1) throw std::invalid_argument("piece_envelope_check: trials >= 1");

  CoeffTensor c;
  c.j_max = j;
  FrameIndex idx;
  idx.j = j;
  idx.type = type;
  idx.n.resize(3);
  for (const auto& e : piece.entries) {
    for (int slot = 0; slot < 3; ++slot)
      idx.n[slot] = unpack_coord(e.first[slot], 1)[0];
    c.entries.emplace(idx, e.second);
  }

  const Eigen::ArrayXd x_grid = period_grid(lattice);
  std::mt19937_64 rng(derive_seed(seed, "piece-check"));
  PieceCheckEntry entry;
  entry.piece_size = piece.size();
  entry.j = j;
  for (int t = 0; t < trials; ++t) {
    const TestFunctionTriple f = random_triple(lattice, rng);
    const OutputField field = apply_wavelet_form(c, sys, f, x_grid);
    entry.measured = std::max(entry.measured, quasi_norm(field, 2.0 / 3.0));
  }
  entry.envelope = std::exp2(1.5 * j) * std::ldexp(band_sup, -band_r) *
                   std::cbrt(static_cast<double>(band_card));
  entry.constant = entry.measured / entry.envelope;
  return entry;
}

SummabilityReport summability_audit(const CoeffTensor& c, double q, int K,
                                    int d, double m_norm_q) {
  if (!(q > 0.0)) throw std::invalid_argument("summability_audit: q > 0");
  if (K < 1 || d < 1)
    throw std::invalid_argument("summability_audit: K >= 1 and d >= 1");
  if (!(m_norm_q > 0.0))
    throw std::invalid_argument("summability_audit: m_norm_q > 0");

  SummabilityReport rep;
  rep.m_norm_target = std::pow(m_norm_q, q / 3.0);
  rep.r_ratio = std::exp2(q / 3.0 - 1.0);
  rep.r_decay_ok = q < 3.0;
  rep.stated_condition_ok = (K + d + 1) * (1.0 - q / 3.0) > d;

  std::vector<double> xs, ys;
  for (int j = 1; j <= c.j_max; ++j) {
    const double s = c.scale_sup(j);
    if (s > 0.0) {
      xs.push_back(j);
      ys.push_back(std::log2(s));
    }
  }
  if (xs.size() < 2)
    throw refusal_error("summability_audit: fewer than two populated scales");
  rep.measured_sup_slope = lsq_slope(xs, ys);

  constexpr int kRMax = 30;
  std::vector<double> jxs, jys;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const int j = static_cast<int>(xs[k]);
    const double sup_j = std::exp2(ys[k]);
    const double j_factor = std::exp2(j * d * (2.5 - 0.5 * q));
    double j_total = 0.0;
    for (int r = 0; r <= kRMax; ++r) {
      SummabilityRow row;
      row.j = j;
      row.r = r;
      row.envelope = j_factor * std::exp2(r * (q / 3.0 - 1.0)) *
                     std::pow(sup_j, 1.0 - q / 3.0) * rep.m_norm_target;
      rep.rows.push_back(row);
      j_total += row.envelope;
      rep.total += row.envelope;
    }
    jxs.push_back(j);
    jys.push_back(std::log2(j_total));
  }
  rep.j_term_slope = lsq_slope(jxs, jys);
  rep.j_decay_ok = rep.j_term_slope < 0.0;
  return rep;
}

NormEstimate estimate_operator_norm(const MultiplierGrid& m, int trials,
                                    int ascent_steps, std::uint64_t seed) {
  if (trials < 1 || ascent_steps < 0)
    throw std::invalid_argument(
        "estimate_operator_norm: trials >= 1, ascent_steps >= 0");
  const FreqLattice lattice = lattice_of(m);
  const Eigen::ArrayXd x_grid = period_grid(lattice);
  std::mt19937_64 rng(derive_seed(seed, "norm-estimate"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, lattice.count - 1);

  auto ratio_of = [&](const TestFunctionTriple& f) {
    return quasi_norm(apply_direct(m, f, x_grid), 2.0 / 3.0);
  };

  NormEstimate est;
  est.trials = trials;
  for (int t = 0; t < trials; ++t) {
    TestFunctionTriple f = random_triple(lattice, rng);
    double value = ratio_of(f);
    for (int step = 0; step < ascent_steps; ++step) {
      const int slot = step % 3;
      const int i = pick(rng);
      const double width = 0.5 / (1.0 + step / 6.0);
      TestFunctionTriple trial = f;
      trial.fhat[slot][i] += cd(width * gauss(rng), width * gauss(rng));
      trial.fhat[slot] /= trial.l2_norm(slot);
      const double v = ratio_of(trial);
      if (v > value) {
        value = v;
        f = std::move(trial);
      }
    }
    if (value > est.lower_bound) {
      est.lower_bound = value;
      est.witness = f;
    }
    est.trace.push_back(est.lower_bound);
  }
  return est;
}

double evaluate_witness(const MultiplierGrid& m,
                        const TestFunctionTriple& witness) {
  const FreqLattice lattice = lattice_of(m);
  const Eigen::ArrayXd x_grid = period_grid(lattice);
  double denom = 1.0;
  for (int slot = 0; slot < 3; ++slot) denom *= witness.l2_norm(slot);
  if (!(denom > 0.0))
    throw std::invalid_argument("evaluate_witness: zero test function");
  return quasi_norm(apply_direct(m, witness, x_grid), 2.0 / 3.0) / denom;
}

SweepReport sufficiency_sweep(const std::vector<MultiplierGrid>& family,
                              double q, int trials, int ascent_steps,
                              std::uint64_t seed) {
  if (family.empty())
    throw std::invalid_argument("sufficiency_sweep: empty family");
  if (!(q > 0.0)) throw std::invalid_argument("sufficiency_sweep: q > 0");

  SweepReport rep;
  rep.q = q;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < family.size(); ++i) {
    SweepPoint pt;
    pt.m_norm_q = grid_lq_norm(family[i], q);
    pt.envelope = std::pow(pt.m_norm_q, q / 3.0);
    pt.estimate = estimate_operator_norm(
                      family[i], trials, ascent_steps,
                      derive_seed(seed, "member-" + std::to_string(i)))
                      .lower_bound;
    pt.ratio = pt.estimate / pt.envelope;
    rep.max_ratio = std::max(rep.max_ratio, pt.ratio);
    rep.points.push_back(pt);
    if (pt.estimate > 0.0 && pt.envelope > 0.0) {
      xs.push_back(std::log(pt.envelope));
      ys.push_back(std::log(pt.estimate));
    }
  }
  rep.loglog_slope = xs.size() >= 2 ? lsq_slope(xs, ys) : 0.0;
  return rep;
}

}  // namespace trimul
