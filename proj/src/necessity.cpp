// necessity.cpp

#include "trimul/necessity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace trimul {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double smoothstep_ramp(double s) {
  // C^inf ramp: 0 at s = 0, 1 at s = 1.
  auto e = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double a = e(s), b = e(1.0 - s);
  return a / (a + b);
}

// Coefficients w_l = v_l s_l S_l over the active range.
std::vector<double> trig_coeffs(const BlockSequences& seqs,
                                const SignAssignment& signs) {
  std::vector<double> w;
  w.reserve(seqs.active_hi() - seqs.active_lo() + 1);
  for (int l = seqs.active_lo(); l <= seqs.active_hi(); ++l)
    w.push_back(v_weight(l) * signs.at(l) * convolution_sum(seqs, l));
  return w;
}

// P(x) = sum_l w_l e^{2 pi i x l}, evaluated with an incremental phase
// rotation so the inner loop is multiply-add only.
cd trig_poly(const std::vector<double>& w, int l_lo, double x) {
  cd z = std::polar(1.0, kTwoPi * x * l_lo);
  const cd u = std::polar(1.0, kTwoPi * x);
  cd acc(0.0, 0.0);
  for (double wl : w) {
    acc += wl * z;
    z *= u;
  }
  return acc;
}

// ||T_{m_t}||_{2/3}^{2/3} for one sign pattern: the x1 integral over one
// outer period collapses to W * int_0^1 |P|^{2/3} because the shifted
// |phi|^2 sum is exactly the constant W (phi_hat support width < 1).
double draw_value(const std::vector<double>& w, int l_lo, int grid_m,
                  double W) {
  const double mean = parallel_sum(static_cast<std::size_t>(grid_m),
                                   [&](std::size_t k) {
    const double x = static_cast<double>(k) / grid_m;
    return std::pow(std::abs(trig_poly(w, l_lo, x)), 2.0 / 3.0);
  }) / grid_m;
  return W * mean;
}

int unit_grid_size(const BlockSequences& seqs) {
  return std::max(4096, 4 * seqs.active_hi());
}

}  // namespace

int SignAssignment::at(int l) const {
  auto it = signs.find(l);
  if (it == signs.end())
    throw std::invalid_argument("SignAssignment: no sign for l = " +
                                std::to_string(l));
  return it->second;
}

double v_weight(int l) {
  if (l < 3) throw std::invalid_argument("v_weight: l >= 3");
  const double x = l - 1.0;
  return std::sqrt(std::log(x)) / x;
}

double convolution_sum(const BlockSequences& seqs, int l) {
  const int lo = seqs.block_lo(), hi = seqs.block_hi();
  long long count = 0;
  for (int j = lo; j <= hi; ++j) {
    const int k_lo = std::max(lo, l - j - hi);
    const int k_hi = std::min(hi, l - j - lo);
    if (k_hi >= k_lo) count += k_hi - k_lo + 1;
  }
  const double w = seqs.weight();
  return static_cast<double>(count) * w * w * w;
}

const double kPsiJHalfwidth = 15.0 / 32.0;
const double kPsiPlateauHalfwidth = 15.0 / 64.0;
const double kPhiIHalfwidth = 3.0 / 64.0;

double psi_plateau(double u) {
  const double a = std::abs(u);
  if (a >= kPsiJHalfwidth) return 0.0;
  if (a <= kPsiPlateauHalfwidth) return 1.0;
  return smoothstep_ramp((kPsiJHalfwidth - a) /
                         (kPsiJHalfwidth - kPsiPlateauHalfwidth));
}

double SampledPhi::eval(double x) const {
  cd acc(0.0, 0.0);
  for (int i = 0; i < lattice.count; ++i)
    acc += phihat[i] * std::polar(1.0, kTwoPi * x * lattice.point(i));
  return (lattice.step * acc).real();
}

double SampledPhi::norm2() const {
  return lattice.step * phihat.abs2().sum();
}

SampledPhi make_phi(double step) {
  if (!(step > 0.0) || step > kPhiIHalfwidth)
    throw std::invalid_argument("make_phi: 0 < step <= 3/64");
  // Symmetric lattice with a point exactly at 0, covering [-I, I].
  const int n_half = static_cast<int>(std::ceil(kPhiIHalfwidth / step));
  SampledPhi phi;
  phi.lattice.step = step;
  phi.lattice.count = 2 * n_half + 1;
  phi.lattice.lo = -(n_half + 0.5) * step;
  phi.phihat.resize(phi.lattice.count);
  for (int i = 0; i < phi.lattice.count; ++i)
    phi.phihat[i] =
        cd(bump_profile(phi.lattice.point(i) / kPhiIHalfwidth), 0.0);
  return phi;
}

OutputField closed_form_T(const BlockSequences& seqs,
                          const SignAssignment& signs, const SampledPhi& phi,
                          const Eigen::ArrayXd& x1_grid) {
  const std::vector<double> w = trig_coeffs(seqs, signs);
  const int l_lo = seqs.active_lo();
  OutputField out;
  out.x_grid = x1_grid;
  out.cell_volume = x1_grid.size() > 1 ? x1_grid[1] - x1_grid[0] : 1.0;
  out.samples.resize(x1_grid.size());
  parallel_for(static_cast<std::size_t>(x1_grid.size()), [&](std::size_t ix) {
    const double x = x1_grid[static_cast<Eigen::Index>(ix)];
    const double p = phi.eval(x);
    out.samples[static_cast<Eigen::Index>(ix)] =
        p * p * p * trig_poly(w, l_lo, x);
  });
  return out;
}

MultiplierGrid assemble_mt(const BlockSequences& seqs,
                           const SignAssignment& signs,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           int res) {
  if (lo.size() != 3 || hi.size() != 3)
    throw std::invalid_argument("assemble_mt: box corners need 3 entries");
  for (int r = 0; r < 3; ++r)
    if (lo[r] > seqs.block_lo() - kPsiJHalfwidth ||
        hi[r] < seqs.block_hi() + kPsiJHalfwidth)
      throw refusal_error("assemble_mt: box does not cover the blocks plus "
                          "the window support");

  const int b_lo = seqs.block_lo(), b_hi = seqs.block_hi();
  const SignAssignment signs_copy = signs;
  const BlockSequences seqs_copy = seqs;
  ScalarField field = [b_lo, b_hi, signs_copy,
                       seqs_copy](const Eigen::VectorXd& x) {
    // The window supports of integer translates are disjoint, so each
    // coordinate selects at most one block index.
    int jt[3];
    double win = 1.0;
    for (int r = 0; r < 3; ++r) {
      const auto j = static_cast<int>(std::lround(x[r]));
      if (j < b_lo || j > b_hi) return 0.0;
      const double p = psi_plateau(x[r] - j);
      if (p == 0.0) return 0.0;
      jt[r] = j;
      win *= p;
    }
    const int l = jt[0] + jt[1] + jt[2];
    return v_weight(l) * signs_copy.at(l) * win;
  };
  return sample_grid(1, lo, hi, res, field);
}

KhinchinReport khinchin_average(const BlockSequences& seqs,
                                const SampledPhi& phi, int num_signs,
                                std::uint64_t seed) {
  if (num_signs < 2)
    throw std::invalid_argument("khinchin_average: num_signs >= 2");
  const double period = phi.period();
  if (std::abs(period - std::round(period)) > 1e-9)
    throw refusal_error("khinchin_average: phi period must be an integer");

  const double W = phi.norm2();
  const int l_lo = seqs.active_lo();
  const int active = seqs.active_hi() - l_lo + 1;
  const int grid_m = unit_grid_size(seqs);

  KhinchinReport rep;
  std::vector<double> values;
  SignAssignment signs;
  for (int l = l_lo; l <= seqs.active_hi(); ++l) signs.signs[l] = 1;

  if (active <= 12) {
    rep.enumerated = true;
    rep.num_signs = 1 << active;
    signs.provenance = "enumerated";
    for (unsigned mask = 0; mask < (1u << active); ++mask) {
      for (int b = 0; b < active; ++b)
        signs.signs[l_lo + b] = (mask >> b) & 1u ? -1 : 1;
      const double v = draw_value(trig_coeffs(seqs, signs), l_lo, grid_m, W);
      values.push_back(v);
      if (v > rep.best_value) {
        rep.best_value = v;
        rep.best_signs = signs;
      }
    }
  } else {
    rep.num_signs = num_signs;
    std::mt19937_64 rng(derive_seed(seed, "khinchin"));
    for (int t = 0; t < num_signs; ++t) {
      signs = sample_signs(seqs, rng);
      const double v = draw_value(trig_coeffs(seqs, signs), l_lo, grid_m, W);
      values.push_back(v);
      if (v > rep.best_value) {
        rep.best_value = v;
        rep.best_signs = signs;
      }
    }
  }

  rep.A_mc = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - rep.A_mc) * (v - rep.A_mc);
  var /= std::max<std::size_t>(1, values.size() - 1);
  rep.ci_half_width =
      rep.enumerated
          ? 0.0
          : 1.96 * std::sqrt(var / static_cast<double>(values.size()));

  double b2 = 0.0;
  for (int l = l_lo; l <= seqs.active_hi(); ++l) {
    const double t = v_weight(l) * convolution_sum(seqs, l);
    b2 += t * t;
  }
  rep.B_raw = std::cbrt(b2);
  rep.B_weighted = W * rep.B_raw;
  rep.ratio = rep.B_weighted > 0.0 ? rep.A_mc / rep.B_weighted : 0.0;
  return rep;
}

GrowthReport growth_fit(const std::vector<int>& N_range, int num_signs,
                        std::uint64_t seed) {
  if (N_range.empty())
    throw std::invalid_argument("growth_fit: empty N range");
  for (int N : N_range)
    if (N < 1 || N > 20)
      throw std::invalid_argument("growth_fit: N must be 1..20");

  GrowthReport rep;
  std::vector<double> xs, ya, yb;
  const SampledPhi phi = make_phi();
  for (int N : N_range) {
    BlockSequences seqs;
    seqs.N = N;
    const KhinchinReport kh = khinchin_average(
        seqs, phi, num_signs, derive_seed(seed, "N-" + std::to_string(N)));
    GrowthRow row;
    row.N = N;
    row.A_N = kh.A_mc;
    row.B_N = kh.B_raw;
    row.ci_half_width = kh.ci_half_width;
    row.best_value = kh.best_value;
    rep.rows.push_back(row);
    xs.push_back(std::log(static_cast<double>(N)));
    ya.push_back(std::log(row.A_N));
    yb.push_back(std::log(row.B_N));
  }
  if (xs.size() >= 2) {
    rep.slope_A = lsq_slope(xs, ya);
    rep.slope_B = lsq_slope(xs, yb);
  }
  return rep;
}

BoundaryReport lq_boundary_check(double q, long long L_max) {
  if (!(q > 0.0)) throw std::invalid_argument("lq_boundary_check: q > 0");
  if (L_max < 1000)
    throw refusal_error("lq_boundary_check: L_max >= 1000 required for the "
                        "checkpoint ladder");

  BoundaryReport rep;
  rep.q = q;
  rep.L_max = L_max;

  auto term = [q](long long l) {
    // (log(l-1))^{q/2} (l-1)^{2-q} in log space to survive extreme q.
    const double x = static_cast<double>(l - 1);
    return std::exp(0.5 * q * std::log(std::log(x)) + (2.0 - q) * std::log(x));
  };

  std::vector<long long> marks = {1000, L_max / 1000, L_max / 10, L_max};
  for (auto& m : marks) m = std::max<long long>(m, 3);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  double acc = 0.0;
  long long done = 2;  // terms start at l = 3
  for (long long mark : marks) {
    const long long count = mark - done;
    if (count > 0) {
      const long long base = done + 1;
      acc += parallel_sum(static_cast<std::size_t>(count), [&](std::size_t i) {
        return term(base + static_cast<long long>(i));
      });
      done = mark;
    }
    rep.checkpoints[mark] = acc;
  }

  const double p_max = rep.checkpoints.at(L_max);
  const auto tenth = rep.checkpoints.find(std::max<long long>(L_max / 10, 3));
  rep.ratio10 = tenth != rep.checkpoints.end() && tenth->second > 0.0
                    ? p_max / tenth->second
                    : 0.0;
  const double p_first = rep.checkpoints.begin()->second;
  rep.ratio_decades = p_first > 0.0 ? p_max / p_first : 0.0;

  if (q > 3.0) {
    const double L = static_cast<double>(L_max);
    const double tail =
        std::pow(std::log(L), 0.5 * q) * std::pow(L, 3.0 - q) / (q - 3.0);
    rep.tail_fraction = tail / p_max;
  } else {
    rep.tail_fraction = std::numeric_limits<double>::infinity();
  }

  if (rep.ratio10 > 1.5)
    rep.verdict = "diverging";
  else if (rep.tail_fraction < 0.01)
    rep.verdict = "converged";
  else
    rep.verdict = "inconclusive";
  return rep;
}

SignAssignment sample_signs(const BlockSequences& seqs, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 1);
  SignAssignment out;
  out.provenance = "sampled";
  for (int l = seqs.active_lo(); l <= seqs.active_hi(); ++l)
    out.signs[l] = coin(rng) ? 1 : -1;
  return out;
}

}  // namespace trimul
