// wavelet.cpp

#include "trimul/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace trimul {
namespace {

// Daubechies low-pass filters, standard order, sum = sqrt(2).
// Generated by spectral factorization at 60-digit precision and rounded
// to shortest-round-trip doubles.
const std::map<int, std::vector<double>>& filter_table() {
  static const std::map<int, std::vector<double>> table = {
      {1, {0.707106781186547524, 0.707106781186547524}},
      {2,
       {0.482962913144534143, 0.836516303737807906, 0.224143868042013381,
        -0.129409522551260381}},
      {3,
       {0.332670552950082616, 0.806891509311092576, 0.45987750211849157,
        -0.135011020010254589, -0.0854412738820266617, 0.0352262918857095366}},
      {4,
       {0.230377813308896501, 0.714846570552915647, 0.630880767929858908,
        -0.0279837694168598542, -0.187034811719093084, 0.0308413818355607636,
        0.0328830116668851997, -0.0105974017850690321}},
      {5,
       {0.160102397974192914, 0.603829269797189671, 0.724308528437772928,
        0.138428145901320732, -0.242294887066382032, -0.0322448695846383746,
        0.0775714938400457135, -0.00624149021279827427, -0.0125807519990819995,
        0.00333572528547377128}},
      {6,
       {0.111540743350109464, 0.494623890398453086, 0.751133908021095351,
        0.315250351709197629, -0.22626469396543982, -0.129766867567261936,
        0.0975016055873230491, 0.0275228655303057286, -0.0315820393174860296,
        0.000553842201161496139, 0.00477725751094551064,
        -0.00107730108530847956}},
      {7,
       {0.077852054085009179, 0.396539319481917307, 0.72913209084623512,
        0.469782287405193122, -0.143906003928564975, -0.224036184993874983,
        0.0713092192668302648, 0.0806126091510830719, -0.0380299369350144136,
        -0.0165745416306668807, 0.0125509985560998406, 0.000429577972921366521,
        -0.00180164070404749092, 0.000353713799974520248}},
      {8,
       {0.05441584224310401, 0.312871590914299971, 0.675630736297289807,
        0.585354683654206713, -0.0158291052563493057, -0.284015542961546927,
        0.00047248457391328277, 0.128747426620478459, -0.0173693010018075462,
        -0.0440882539307947515, 0.0139810279173982816, 0.00874609404740577672,
        -0.00487035299345157431, -0.000391740373376947046,
        0.000675449406450569366, -0.000117476784124769534}},
  };
  return table;
}

// Integer-point values of phi: the eigenvector of T[n][m] = sqrt(2)
// h_{2n-m} (n, m in 1..S-1) at eigenvalue 1, normalized to sum 1.
// phi(0) = phi(S) = 0 for order >= 2.
Eigen::VectorXd integer_values(const Eigen::ArrayXd& h, int S) {
  const int inner = S - 1;
  const double rt2 = std::sqrt(2.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(inner + 1, inner);
  for (int n = 1; n <= inner; ++n) {
    for (int m = 1; m <= inner; ++m) {
      const int q = 2 * n - m;
      double t = (q >= 0 && q <= S) ? rt2 * h[q] : 0.0;
      if (n == m) t -= 1.0;
      A(n - 1, m - 1) = t;
    }
  }
  A.row(inner).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(inner + 1);
  rhs[inner] = 1.0;
  Eigen::VectorXd v = A.colPivHouseholderQr().solve(rhs);
  if ((A * v - rhs).norm() > 1e-8)
    throw refusal_error("build_wavelet_system: cascade eigenproblem did not "
                        "converge (invalid orthonormal filter?)");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(S + 1);
  full.segment(1, inner) = v;
  return full;
}

double table_at(const Eigen::ArrayXd& tbl, long long idx) {
  if (idx < 0 || idx >= tbl.size()) return 0.0;
  return tbl[idx];
}

}  // namespace

std::string FrameIndex::type_string() const {
  std::string s;
  for (int r = 0; r < axes(); ++r)
    s += (axis_type(r) == WaveletType::Mother) ? 'M' : 'F';
  return s;
}

bool FrameIndex::operator<(const FrameIndex& o) const {
  if (j != o.j) return j < o.j;
  if (type != o.type) return type < o.type;
  if (n.size() != o.n.size()) return n.size() < o.n.size();
  for (int r = 0; r < n.size(); ++r)
    if (n[r] != o.n[r]) return n[r] < o.n[r];
  return false;
}

WaveletSystem build_wavelet_system(int family_order, int resolution_levels) {
  if (family_order < 1)
    throw std::invalid_argument("build_wavelet_system: family_order >= 1");
  if (resolution_levels < 6)
    throw std::invalid_argument("build_wavelet_system: resolution_levels >= 6");
  auto it = filter_table().find(family_order);
  if (it == filter_table().end())
    throw std::invalid_argument(
        "build_wavelet_system: no filter for family_order " +
        std::to_string(family_order) + " (1..8 available)");

  WaveletSystem sys;
  sys.filter = Eigen::Map<const Eigen::ArrayXd>(it->second.data(),
                                                it->second.size());
  sys.K = family_order;
  sys.support_len = static_cast<int>(it->second.size()) - 1;
  sys.resolution_levels = resolution_levels;

  const int S = sys.support_len;
  const int R = resolution_levels;
  const double rt2 = std::sqrt(2.0);

  // Level-0 values at the integers.
  Eigen::ArrayXd phi;
  if (family_order == 1) {
    // Haar: phi = indicator of [0, 1); handled directly since the
    // integer eigenproblem is trivial here.
    phi = Eigen::ArrayXd::Zero(S + 1);
    phi[0] = 1.0;
  } else {
    phi = integer_values(sys.filter, S).array();
  }

  // Dyadic refinement phi(x) = sqrt(2) sum_q h_q phi(2x - q), applied
  // levelwise: the level-t table at spacing 2^{-t} is produced entirely
  // from the level-(t-1) table. Exact in exact arithmetic.
  for (int t = 1; t <= R; ++t) {
    const long long size = static_cast<long long>(S) * (1ll << t) + 1;
    const long long half = 1ll << (t - 1);
    Eigen::ArrayXd next(size);
    for (long long k = 0; k < size; ++k) {
      double acc = 0.0;
      for (int q = 0; q <= S; ++q)
        acc += sys.filter[q] * table_at(phi, k - q * half);
      next[k] = rt2 * acc;
    }
    if (family_order == 1) {
      // The refinement identity holds a.e. but not at the jump point of
      // the discontinuous Haar father; pin the half-open convention.
      for (long long k = 0; k < size; ++k)
        next[k] = (k < size - 1) ? 1.0 : 0.0;
    }
    phi.swap(next);
  }

  // Mother from the high-pass mirror g_q = (-1)^q h_{S-q}.
  const long long fine = static_cast<long long>(S) * (1ll << R) + 1;
  Eigen::ArrayXd psi(fine);
  const long long unit = 1ll << R;
  for (long long k = 0; k < fine; ++k) {
    double acc = 0.0;
    for (int q = 0; q <= S; ++q) {
      const double g = ((q % 2) ? -1.0 : 1.0) * sys.filter[S - q];
      acc += g * table_at(phi, 2 * k - q * unit);
    }
    psi[k] = rt2 * acc;
  }

  // Force discrete L2 norms to exactly 1; orthogonality and moments are
  // invariant under this scaling.
  const double hq = std::ldexp(1.0, -R);
  const double nphi = std::sqrt((phi * phi).sum() * hq);
  const double npsi = std::sqrt((psi * psi).sum() * hq);
  if (!(nphi > 0.0) || !(npsi > 0.0))
    throw refusal_error("build_wavelet_system: degenerate cascade tables");
  sys.phi_F_samples = phi / nphi;
  sys.phi_M_samples = psi / npsi;
  return sys;
}

double point_eval(const WaveletSystem& sys, WaveletType t, double x) {
  if (x < 0.0 || x > sys.support_len) return 0.0;
  const Eigen::ArrayXd& tbl =
      (t == WaveletType::Father) ? sys.phi_F_samples : sys.phi_M_samples;
  const double u = std::ldexp(x, sys.resolution_levels);
  const auto i = static_cast<long long>(std::floor(u));
  if (i >= tbl.size() - 1) return tbl[tbl.size() - 1];
  const double f = u - static_cast<double>(i);
  return tbl[i] * (1.0 - f) + tbl[i + 1] * f;
}

double tensor_wavelet_eval(const WaveletSystem& sys, const FrameIndex& idx,
                           const Eigen::VectorXd& x) {
  if (x.size() != idx.n.size())
    throw std::invalid_argument("tensor_wavelet_eval: dimension mismatch");
  const double scale = std::ldexp(1.0, idx.j);
  double prod = std::pow(2.0, 0.5 * idx.axes() * idx.j);
  for (int r = 0; r < idx.axes(); ++r) {
    prod *= point_eval(sys, idx.axis_type(r), scale * x[r] - idx.n[r]);
    if (prod == 0.0) return 0.0;
  }
  return prod;
}

std::vector<FrameIndex> enumerate_indices(const WaveletSystem& sys, int j,
                                          const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi) {
  std::vector<FrameIndex> out;
  const int axes = static_cast<int>(lo.size());
  if (axes == 0 || j < 0) return out;
  for (int r = 0; r < axes; ++r)
    if (hi[r] < lo[r]) return out;

  const double scale = std::ldexp(1.0, j);
  std::vector<long long> n_lo(axes), n_hi(axes);
  for (int r = 0; r < axes; ++r) {
    // Support [2^{-j} n, 2^{-j}(n + S)] meets [lo, hi] iff
    // 2^j lo - S <= n <= 2^j hi; snap near-integer endpoints first.
    const double a = scale * lo[r] - sys.support_len;
    const double b = scale * hi[r];
    n_lo[r] = static_cast<long long>(std::ceil(a - 1e-9));
    n_hi[r] = static_cast<long long>(std::floor(b + 1e-9));
    if (n_hi[r] < n_lo[r]) return out;
  }

  std::vector<unsigned> types;
  if (j == 0) {
    types = {0u};
  } else {
    for (unsigned t = 1; t < (1u << axes); ++t) types.push_back(t);
  }

  Eigen::VectorXi n(axes);
  std::vector<long long> cur(n_lo);
  for (bool more = true; more;) {
    for (int r = 0; r < axes; ++r) n[r] = static_cast<int>(cur[r]);
    for (unsigned t : types) {
      FrameIndex idx;
      idx.j = j;
      idx.type = t;
      idx.n = n;
      out.push_back(idx);
    }
    // Odometer over the per-axis ranges.
    int r = axes - 1;
    for (; r >= 0; --r) {
      if (++cur[r] <= n_hi[r]) break;
      cur[r] = n_lo[r];
    }
    more = (r >= 0);
  }
  return out;
}

double inner_product_1d(const WaveletSystem& sys, WaveletType ta, int ja,
                        int na, WaveletType tb, int jb, int nb) {
  const int R = sys.resolution_levels;
  const int S = sys.support_len;
  const int j_lo = std::min(ja, jb);
  if (ja - j_lo > R || jb - j_lo > R)
    throw refusal_error("inner_product_1d: scale gap exceeds table depth");

  // Quadrature ticks t at spacing 2^{-(R + j_lo)}; both factors hit
  // exact table nodes there (the finer one with a power-of-two stride).
  const long long t_a_lo = static_cast<long long>(na) << (R + j_lo - ja);
  const long long t_a_hi = static_cast<long long>(na + S) << (R + j_lo - ja);
  const long long t_b_lo = static_cast<long long>(nb) << (R + j_lo - jb);
  const long long t_b_hi = static_cast<long long>(nb + S) << (R + j_lo - jb);
  const long long t_lo = std::max(t_a_lo, t_b_lo);
  const long long t_hi = std::min(t_a_hi, t_b_hi);
  if (t_hi <= t_lo) return 0.0;

  const Eigen::ArrayXd& tbl_a =
      (ta == WaveletType::Father) ? sys.phi_F_samples : sys.phi_M_samples;
  const Eigen::ArrayXd& tbl_b =
      (tb == WaveletType::Father) ? sys.phi_F_samples : sys.phi_M_samples;
  const long long stride_a = 1ll << (ja - j_lo);
  const long long stride_b = 1ll << (jb - j_lo);
  long long ia = (t_lo - t_a_lo) * stride_a;
  long long ib = (t_lo - t_b_lo) * stride_b;
  double acc = 0.0;
  for (long long t = t_lo; t <= t_hi;
       ++t, ia += stride_a, ib += stride_b)
    acc += table_at(tbl_a, ia) * table_at(tbl_b, ib);
  const double hq = std::ldexp(1.0, -(R + j_lo));
  return std::pow(2.0, 0.5 * (ja + jb)) * hq * acc;
}

double frame_gram(const WaveletSystem& sys, const FrameIndex& a,
                  const FrameIndex& b) {
  if (a.n.size() != b.n.size())
    throw std::invalid_argument("frame_gram: dimension mismatch");
  double prod = 1.0;
  for (int r = 0; r < a.axes(); ++r) {
    prod *= inner_product_1d(sys, a.axis_type(r), a.j, a.n[r], b.axis_type(r),
                             b.j, b.n[r]);
    if (prod == 0.0) return 0.0;
  }
  return prod;
}

double mother_moment(const WaveletSystem& sys, int alpha) {
  const double hq = sys.table_spacing();
  double acc = 0.0;
  for (long long k = 0; k < sys.phi_M_samples.size(); ++k)
    acc += std::pow(static_cast<double>(k) * hq, alpha) * sys.phi_M_samples[k];
  return acc * hq;
}

double table_l2_norm(const WaveletSystem& sys, WaveletType t) {
  const Eigen::ArrayXd& tbl =
      (t == WaveletType::Father) ? sys.phi_F_samples : sys.phi_M_samples;
  return std::sqrt((tbl * tbl).sum() * sys.table_spacing());
}

int max_support_overlap(const WaveletSystem& sys, int axes) {
  int per_axis = sys.support_len + 1;
  int total = 1;
  for (int r = 0; r < axes; ++r) total *= per_axis;
  return total;
}

}  // namespace trimul
