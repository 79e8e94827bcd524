// coeffs.cpp

#include "trimul/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trimul {
namespace {

long long floor_div2(long long a) { return a >= 0 ? a / 2 : -((1 - a) / 2); }
long long ceil_div2(long long a) { return floor_div2(a + 1); }

// Dense block of one pyramid band: per-axis integer offsets plus a
// row-major (axis 0 slowest) value array.
struct Band {
  std::array<long long, 3> off{};
  std::array<long long, 3> len{};
  std::vector<double> v;

  std::size_t total() const {
    return static_cast<std::size_t>(len[0]) * static_cast<std::size_t>(len[1]) *
           static_cast<std::size_t>(len[2]);
  }
};

// Convolve-decimate along one axis: out[n] = sum_q f[q] in[2n + q], with
// zero padding outside the stored range. Offsets track absolute indices.
Band decimate_step(const Band& in, int axis, const Eigen::ArrayXd& f) {
  const int S = static_cast<int>(f.size()) - 1;
  Band out;
  out.off = in.off;
  out.len = in.len;
  const long long n_lo = ceil_div2(in.off[axis] - S);
  const long long n_hi = floor_div2(in.off[axis] + in.len[axis] - 1);
  out.off[axis] = n_lo;
  out.len[axis] = n_hi - n_lo + 1;
  out.v.assign(out.total(), 0.0);

  const long long ol1 = out.len[1], ol2 = out.len[2];
  const long long il1 = in.len[1], il2 = in.len[2];
  parallel_for(out.total(), [&](std::size_t flat) {
    auto rem = static_cast<long long>(flat);
    const long long i2 = rem % ol2;
    rem /= ol2;
    const long long i1 = rem % ol1;
    const long long i0 = rem / ol1;
    long long src[3] = {i0, i1, i2};
    const long long base = 2 * (out.off[axis] + src[axis]) - in.off[axis];
    double acc = 0.0;
    for (int q = 0; q <= S; ++q) {
      const long long k = base + q;
      if (k < 0 || k >= in.len[axis]) continue;
      src[axis] = k;
      acc += f[q] * in.v[static_cast<std::size_t>((src[0] * il1 + src[1]) * il2 +
                                                  src[2])];
      src[axis] = (axis == 0) ? i0 : (axis == 1) ? i1 : i2;
    }
    out.v[flat] = acc;
  });
  return out;
}

// Upsample-convolve along one axis onto a prescribed output range:
// out[k] = sum_n f[k - 2n] in[n].
Band upsample_step(const Band& in, int axis, const Eigen::ArrayXd& f,
                   long long out_lo, long long out_hi) {
  const int S = static_cast<int>(f.size()) - 1;
  Band out;
  out.off = in.off;
  out.len = in.len;
  out.off[axis] = out_lo;
  out.len[axis] = out_hi - out_lo + 1;
  out.v.assign(out.total(), 0.0);

  const long long ol1 = out.len[1], ol2 = out.len[2];
  const long long il1 = in.len[1], il2 = in.len[2];
  parallel_for(out.total(), [&](std::size_t flat) {
    auto rem = static_cast<long long>(flat);
    const long long i2 = rem % ol2;
    rem /= ol2;
    const long long i1 = rem % ol1;
    const long long i0 = rem / ol1;
    long long src[3] = {i0, i1, i2};
    const long long k = out.off[axis] + src[axis];
    const long long n_min = std::max(ceil_div2(k - S), in.off[axis]);
    const long long n_max =
        std::min(floor_div2(k), in.off[axis] + in.len[axis] - 1);
    double acc = 0.0;
    for (long long n = n_min; n <= n_max; ++n) {
      src[axis] = n - in.off[axis];
      acc += f[k - 2 * n] *
             in.v[static_cast<std::size_t>((src[0] * il1 + src[1]) * il2 +
                                           src[2])];
      src[axis] = (axis == 0) ? i0 : (axis == 1) ? i1 : i2;
    }
    out.v[flat] = acc;
  });
  return out;
}

Eigen::ArrayXd highpass_of(const Eigen::ArrayXd& h) {
  const int S = static_cast<int>(h.size()) - 1;
  Eigen::ArrayXd g(h.size());
  for (int q = 0; q <= S; ++q) g[q] = ((q % 2) ? -1.0 : 1.0) * h[S - q];
  return g;
}

// Aligned dyadic grid test: common spacing 2^{-L} on every axis with
// box corners on that lattice. Returns L or -1.
int dyadic_level(const MultiplierGrid& m) {
  const double h = m.spacing(0);
  for (int r = 1; r < m.axes(); ++r)
    if (std::abs(m.spacing(r) - h) > 1e-12 * h) return -1;
  const double lg = -std::log2(h);
  const int L = static_cast<int>(std::lround(lg));
  if (L < 0 || std::abs(std::ldexp(1.0, -L) - h) > 1e-12 * h) return -1;
  for (int r = 0; r < m.axes(); ++r) {
    const double scaled = m.lo[r] * std::ldexp(1.0, L);
    if (std::abs(scaled - std::round(scaled)) > 1e-6) return -1;
  }
  return L;
}

void record_band(std::map<FrameIndex, double>& entries, const Band& band,
                 int j, unsigned type) {
  FrameIndex idx;
  idx.j = j;
  idx.type = type;
  idx.n.resize(3);
  std::size_t flat = 0;
  for (long long i0 = 0; i0 < band.len[0]; ++i0)
    for (long long i1 = 0; i1 < band.len[1]; ++i1)
      for (long long i2 = 0; i2 < band.len[2]; ++i2, ++flat) {
        const double v = band.v[flat];
        if (v == 0.0) continue;
        idx.n[0] = static_cast<int>(band.off[0] + i0);
        idx.n[1] = static_cast<int>(band.off[1] + i1);
        idx.n[2] = static_cast<int>(band.off[2] + i2);
        entries.emplace(idx, v);
      }
}

// Per-axis sample weights of one frame element over the cells of m whose
// midpoints fall in its support; empty when the ranges miss.
struct AxisWeights {
  long long i_lo = 0;
  Eigen::ArrayXd w;
};

bool axis_weights(const MultiplierGrid& m, const WaveletSystem& sys,
                  const FrameIndex& idx, std::array<AxisWeights, 3>& out) {
  const double scale = std::ldexp(1.0, idx.j);
  for (int r = 0; r < 3; ++r) {
    const double h = m.spacing(r);
    const double sup_lo = idx.n[r] / scale;
    const double sup_hi = (idx.n[r] + sys.support_len) / scale;
    auto i_lo = static_cast<long long>(
        std::ceil((sup_lo - m.lo[r]) / h - 0.5 - 1e-12));
    auto i_hi = static_cast<long long>(
        std::floor((sup_hi - m.lo[r]) / h - 0.5 + 1e-12));
    i_lo = std::max<long long>(i_lo, 0);
    i_hi = std::min<long long>(i_hi, m.res - 1);
    if (i_hi < i_lo) return false;
    out[r].i_lo = i_lo;
    out[r].w.resize(i_hi - i_lo + 1);
    for (long long i = i_lo; i <= i_hi; ++i) {
      const double x = m.lo[r] + (i + 0.5) * h;
      out[r].w[i - i_lo] = point_eval(sys, idx.axis_type(r), scale * x - idx.n[r]);
    }
  }
  return true;
}

}  // namespace

double CoeffTensor::sup_abs() const {
  double s = 0.0;
  for (const auto& e : entries) s = std::max(s, std::abs(e.second));
  return s;
}

double CoeffTensor::scale_sup(int j, unsigned type) const {
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.first.j != j) continue;
    if (type != no_type && e.first.type != type) continue;
    s = std::max(s, std::abs(e.second));
  }
  return s;
}

CoeffTensor analyze(const MultiplierGrid& m, const WaveletSystem& sys,
                    int j_max) {
  if (j_max < 1) throw std::invalid_argument("analyze: j_max >= 1");
  for (int r = 0; r < m.axes(); ++r) {
    const double per_unit = m.res / (m.hi[r] - m.lo[r]);
    if (per_unit < std::ldexp(1.0, j_max + 2))
      throw refusal_error(
          "analyze: grid too coarse for j_max (need >= 2^{j_max+2} samples "
          "per unit length)");
  }

  CoeffTensor c;
  c.j_max = j_max;
  const int L = dyadic_level(m);

  if (L >= 1) {
    // Exact separable filter-bank pyramid from midpoint samples.
    const Eigen::ArrayXd& h = sys.filter;
    const Eigen::ArrayXd g = highpass_of(h);
    Band cur;
    for (int r = 0; r < 3; ++r) {
      cur.off[r] = std::llround(m.lo[r] * std::ldexp(1.0, L));
      cur.len[r] = m.res;
    }
    cur.v.resize(m.values.size());
    const double init = std::exp2(-1.5 * L);
    for (Eigen::Index i = 0; i < m.values.size(); ++i)
      cur.v[static_cast<std::size_t>(i)] = init * m.values[i];

    for (int t = L; t >= 1; --t) {
      const int j_out = t - 1;
      const bool want = (j_out >= 1 && j_out <= j_max);
      if (!want) {
        cur = decimate_step(decimate_step(decimate_step(cur, 0, h), 1, h), 2,
                            h);
        continue;
      }
      std::array<Band, 2> a0 = {decimate_step(cur, 0, h),
                                decimate_step(cur, 0, g)};
      for (unsigned b0 = 0; b0 < 2; ++b0) {
        std::array<Band, 2> a1 = {decimate_step(a0[b0], 1, h),
                                  decimate_step(a0[b0], 1, g)};
        for (unsigned b1 = 0; b1 < 2; ++b1) {
          for (unsigned b2 = 0; b2 < 2; ++b2) {
            Band leaf = decimate_step(a1[b1], 2, b2 ? g : h);
            const unsigned type = b0 | (b1 << 1) | (b2 << 2);
            if (type == 0) {
              cur = std::move(leaf);
            } else {
              record_band(c.entries, leaf, j_out, type);
            }
          }
        }
      }
    }
    record_band(c.entries, cur, 0, 0u);
    c.source_meta = "pyramid;L=" + std::to_string(L) +
                    ";jmax=" + std::to_string(j_max);
  } else {
    // Non-dyadic grid: per-index midpoint quadrature.
    std::vector<FrameIndex> all;
    for (int j = 0; j <= j_max; ++j) {
      auto batch = enumerate_indices(sys, j, m.lo, m.hi);
      all.insert(all.end(), batch.begin(), batch.end());
    }
    std::vector<double> vals(all.size());
    parallel_for(all.size(), [&](std::size_t i) {
      vals[i] = direct_coefficient(m, sys, all[i]);
    });
    for (std::size_t i = 0; i < all.size(); ++i)
      if (vals[i] != 0.0) c.entries.emplace(all[i], vals[i]);
    c.source_meta = "quadrature;res=" + std::to_string(m.res) +
                    ";jmax=" + std::to_string(j_max);
  }

  const double cut = 1e-14 * c.sup_abs();
  for (auto it = c.entries.begin(); it != c.entries.end();)
    it = (std::abs(it->second) < cut) ? c.entries.erase(it) : std::next(it);
  return c;
}

double direct_coefficient(const MultiplierGrid& m, const WaveletSystem& sys,
                          const FrameIndex& idx) {
  if (idx.n.size() != m.axes())
    throw std::invalid_argument("direct_coefficient: dimension mismatch");
  std::array<AxisWeights, 3> w;
  if (!axis_weights(m, sys, idx, w)) return 0.0;

  const long long res = m.res;
  const long long n1 = w[1].w.size(), n2 = w[2].w.size();
  double acc = parallel_sum(static_cast<std::size_t>(w[0].w.size()),
                            [&](std::size_t a) {
    const long long i0 = w[0].i_lo + static_cast<long long>(a);
    double plane = 0.0;
    for (long long b = 0; b < n1; ++b) {
      const long long i1 = w[1].i_lo + b;
      const std::size_t base =
          static_cast<std::size_t>((i0 * res + i1) * res + w[2].i_lo);
      double line = 0.0;
      for (long long cI = 0; cI < n2; ++cI)
        line += w[2].w[cI] * m.values[static_cast<Eigen::Index>(base + cI)];
      plane += w[1].w[b] * line;
    }
    return w[0].w[a] * plane;
  });
  return acc * std::exp2(1.5 * idx.j) * m.cell_volume();
}

MultiplierGrid reconstruct(const CoeffTensor& c, const WaveletSystem& sys,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           int res, ReconstructMode mode) {
  MultiplierGrid out;
  out.d = 1;
  out.lo = lo;
  out.hi = hi;
  out.res = res;
  if (lo.size() != 3 || hi.size() != 3)
    throw std::invalid_argument("reconstruct: box corners need 3 entries");
  for (int r = 0; r < 3; ++r)
    if (!(hi[r] > lo[r])) throw std::invalid_argument("reconstruct: empty box");
  std::size_t total = static_cast<std::size_t>(res) * res * res;
  out.values = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(total));

  if (mode == ReconstructMode::pointwise) {
    const long long rr = res;
    for (const auto& e : c.entries) {
      std::array<AxisWeights, 3> w;
      if (!axis_weights(out, sys, e.first, w)) continue;
      const double amp = e.second * std::exp2(1.5 * e.first.j);
      for (long long a = 0; a < w[0].w.size(); ++a) {
        const long long i0 = w[0].i_lo + a;
        for (long long b = 0; b < w[1].w.size(); ++b) {
          const long long i1 = w[1].i_lo + b;
          const double f01 = amp * w[0].w[a] * w[1].w[b];
          const std::size_t base =
              static_cast<std::size_t>((i0 * rr + i1) * rr + w[2].i_lo);
          for (long long cI = 0; cI < w[2].w.size(); ++cI)
            out.values[static_cast<Eigen::Index>(base + cI)] +=
                f01 * w[2].w[cI];
        }
      }
    }
    return out;
  }

  // Inverse filter bank. Needs an aligned dyadic target grid fine enough
  // to hold every stored scale.
  const int L = dyadic_level(out);
  if (L < 1)
    throw refusal_error(
        "reconstruct: pyramid mode needs an aligned dyadic grid");
  if (c.j_max >= L)
    throw refusal_error(
        "reconstruct: grid too coarse for stored scales (need res per unit "
        "> 2^{j_max})");

  const Eigen::ArrayXd& h = sys.filter;
  const Eigen::ArrayXd g = highpass_of(h);
  const int S = sys.support_len;

  // Index ranges needed at each level to cover the output block.
  std::vector<std::array<long long, 3>> rlo(L + 1), rhi(L + 1);
  for (int r = 0; r < 3; ++r) {
    rlo[L][r] = std::llround(lo[r] * std::ldexp(1.0, L));
    rhi[L][r] = rlo[L][r] + res - 1;
  }
  for (int t = L; t >= 1; --t)
    for (int r = 0; r < 3; ++r) {
      rlo[t - 1][r] = ceil_div2(rlo[t][r] - S);
      rhi[t - 1][r] = floor_div2(rhi[t][r]);
    }

  auto dense_band = [&](int j, unsigned type, int t) {
    Band b;
    for (int r = 0; r < 3; ++r) {
      b.off[r] = rlo[t][r];
      b.len[r] = rhi[t][r] - rlo[t][r] + 1;
    }
    b.v.assign(b.total(), 0.0);
    FrameIndex probe;
    probe.j = j;
    probe.type = type;
    probe.n = Eigen::VectorXi::Constant(3, std::numeric_limits<int>::min());
    for (auto it = c.entries.lower_bound(probe);
         it != c.entries.end() && it->first.j == j && it->first.type == type;
         ++it) {
      bool inside = true;
      std::size_t flat = 0;
      for (int r = 0; r < 3; ++r) {
        const long long i = it->first.n[r] - b.off[r];
        if (i < 0 || i >= b.len[r]) {
          inside = false;
          break;
        }
        flat = flat * static_cast<std::size_t>(b.len[r]) +
               static_cast<std::size_t>(i);
      }
      if (inside) b.v[flat] = it->second;
    }
    return b;
  };

  Band a = dense_band(0, 0u, 0);
  for (int t = 1; t <= L; ++t) {
    Band next;
    for (int r = 0; r < 3; ++r) {
      next.off[r] = rlo[t][r];
      next.len[r] = rhi[t][r] - rlo[t][r] + 1;
    }
    next.v.assign(next.total(), 0.0);
    const int j_in = t - 1;
    const unsigned type_hi = (j_in >= 1 && j_in <= c.j_max) ? 7u : 0u;
    for (unsigned type = 0; type <= type_hi; ++type) {
      Band src = (type == 0) ? a : dense_band(j_in, type, t - 1);
      for (int r = 0; r < 3; ++r)
        src = upsample_step(src, r, (type >> r) & 1u ? g : h, rlo[t][r],
                            rhi[t][r]);
      for (std::size_t i = 0; i < next.v.size(); ++i) next.v[i] += src.v[i];
    }
    a = std::move(next);
  }

  const double undo = std::exp2(1.5 * L);
  for (std::size_t i = 0; i < total; ++i)
    out.values[static_cast<Eigen::Index>(i)] = undo * a.v[i];
  return out;
}

double frame_norm_lq(const CoeffTensor& c, double q, const WaveletSystem& sys) {
  (void)sys;
  if (!(q > 0.0)) throw std::invalid_argument("frame_norm_lq: q > 0");
  if (c.entries.empty()) return 0.0;

  int J = c.j_max;
  for (const auto& e : c.entries) J = std::max(J, e.first.j);

  // Cube Q_{jn} = prod [2^{-j}(n_r - 1), 2^{-j}(n_r + 1)] covers whole
  // cells of the lattice with spacing 2^{-J}.
  std::array<long long, 3> g_lo{}, g_hi{};
  bool first = true;
  for (const auto& e : c.entries) {
    const long long scale = 1ll << (J - e.first.j);
    for (int r = 0; r < 3; ++r) {
      const long long a = (e.first.n[r] - 1ll) * scale;
      const long long b = (e.first.n[r] + 1ll) * scale;
      if (first) {
        g_lo[r] = a;
        g_hi[r] = b;
      } else {
        g_lo[r] = std::min(g_lo[r], a);
        g_hi[r] = std::max(g_hi[r], b);
      }
    }
    first = false;
  }
  std::array<long long, 3> dim{};
  double cells = 1.0;
  for (int r = 0; r < 3; ++r) {
    dim[r] = g_hi[r] - g_lo[r];
    cells *= static_cast<double>(dim[r]);
  }
  if (cells > 6e8)
    throw refusal_error("frame_norm_lq: accumulation lattice too large");

  std::vector<double> energy(static_cast<std::size_t>(cells), 0.0);
  for (const auto& e : c.entries) {
    const long long scale = 1ll << (J - e.first.j);
    const double w2 =
        e.second * e.second * std::exp2(3.0 * e.first.j);
    std::array<long long, 3> a{}, b{};
    for (int r = 0; r < 3; ++r) {
      a[r] = (e.first.n[r] - 1ll) * scale - g_lo[r];
      b[r] = (e.first.n[r] + 1ll) * scale - g_lo[r];
    }
    for (long long i0 = a[0]; i0 < b[0]; ++i0)
      for (long long i1 = a[1]; i1 < b[1]; ++i1) {
        const std::size_t base =
            static_cast<std::size_t>((i0 * dim[1] + i1) * dim[2]);
        for (long long i2 = a[2]; i2 < b[2]; ++i2)
          energy[base + static_cast<std::size_t>(i2)] += w2;
      }
  }

  const double cell_vol = std::exp2(-3.0 * J);
  const double acc = parallel_sum(energy.size(), [&](std::size_t i) {
    return energy[i] > 0.0 ? std::pow(energy[i], 0.5 * q) : 0.0;
  });
  return std::pow(acc * cell_vol, 1.0 / q);
}

CoeffBoundReport lq_coeff_bound_check(const CoeffTensor& c, double q,
                                      double m_norm_q, double flag_threshold) {
  if (!(q > 0.0)) throw std::invalid_argument("lq_coeff_bound_check: q > 0");
  if (!(m_norm_q > 0.0))
    throw std::invalid_argument("lq_coeff_bound_check: m_norm_q > 0");
  std::map<std::pair<int, unsigned>, double> acc;
  for (const auto& e : c.entries)
    acc[{e.first.j, e.first.type}] += std::pow(std::abs(e.second), q);

  CoeffBoundReport rep;
  rep.flag_threshold = flag_threshold;
  for (const auto& slice : acc) {
    CoeffBoundRow row;
    row.j = slice.first.first;
    row.type = slice.first.second;
    row.lq_norm = std::pow(slice.second, 1.0 / q);
    row.envelope = std::pow(2.0, 3.0 * row.j * (1.0 / q - 0.5)) * m_norm_q;
    row.ratio = row.lq_norm / row.envelope;
    row.flagged = row.ratio > flag_threshold;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

std::optional<double> decay_slope_for_type(const CoeffTensor& c,
                                           unsigned type) {
  std::vector<double> xs, ys;
  for (int j = 1; j <= c.j_max; ++j) {
    const double s = c.scale_sup(j, type);
    if (!(s > 0.0)) return std::nullopt;
    xs.push_back(j);
    ys.push_back(std::log2(s));
  }
  if (xs.size() < 3) return std::nullopt;
  return lsq_slope(xs, ys);
}

double decay_slope(const CoeffTensor& c) {
  if (c.j_max < 3)
    throw refusal_error("decay_slope: needs at least 3 detail scales");
  bool any = false;
  double best = std::numeric_limits<double>::infinity();
  for (unsigned type = 1; type <= 7; ++type) {
    auto s = decay_slope_for_type(c, type);
    if (s) {
      best = std::min(best, *s);
      any = true;
    }
  }
  if (!any)
    throw refusal_error("decay_slope: no type populates every scale");
  return best;
}

DilationReport dilation_covariance_check(const WaveletSystem& sys,
                                         const MultiplierGrid& m, int i, int j,
                                         int j_max) {
  if (i < 0 || j - i < 1 || j > j_max)
    throw std::invalid_argument(
        "dilation_covariance_check: need 0 <= i, 1 <= j - i, j <= j_max");
  if (!m.evaluator)
    throw refusal_error("dilation_covariance_check: multiplier grid has no "
                        "closed-form evaluator");

  const double pow2i = std::ldexp(1.0, i);
  const ScalarField base = m.evaluator;
  const ScalarField dilated = [base, pow2i](const Eigen::VectorXd& x) {
    return base(pow2i * x);
  };
  const MultiplierGrid md =
      sample_grid(m.d, m.lo / pow2i, m.hi / pow2i, m.res, dilated);

  DilationReport rep;
  rep.i = i;
  rep.factor = std::exp2(-1.5 * i);

  auto coarse = enumerate_indices(sys, j - i, m.lo, m.hi);
  const std::size_t cap = 200;
  const std::size_t stride = std::max<std::size_t>(1, coarse.size() / cap);
  std::vector<FrameIndex> picks;
  for (std::size_t k = 0; k < coarse.size(); k += stride)
    picks.push_back(coarse[k]);

  rep.rows.resize(picks.size());
  parallel_for(picks.size(), [&](std::size_t k) {
    DilationRow row;
    row.lhs_index = picks[k];
    row.lhs_index.j = j;
    row.lhs = direct_coefficient(md, sys, row.lhs_index);
    row.rhs = rep.factor * direct_coefficient(m, sys, picks[k]);
    rep.rows[k] = row;
  });

  double sup = 0.0;
  for (const auto& row : rep.rows)
    sup = std::max({sup, std::abs(row.lhs), std::abs(row.rhs)});
  for (auto& row : rep.rows) {
    const double denom =
        std::max({std::abs(row.lhs), std::abs(row.rhs), 1e-8 * sup});
    row.rel_err = denom > 0.0 ? std::abs(row.lhs - row.rhs) / denom : 0.0;
    rep.max_rel_err = std::max(rep.max_rel_err, row.rel_err);
  }
  return rep;
}

}  // namespace trimul
