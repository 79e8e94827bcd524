// engine.cpp

#include "trimul/engine.hpp"

#include <cmath>
#include <map>
#include <tuple>

namespace trimul {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Per-axis alignment of a shared frequency lattice against one axis of
// m's grid: lattice index i hits cell i - shift.
long long axis_shift(const MultiplierGrid& m, int axis,
                     const FreqLattice& grid) {
  const double h = m.spacing(axis);
  if (std::abs(grid.step - h) > 1e-12 * h)
    throw refusal_error("apply_direct: lattice spacing does not match the "
                        "multiplier grid");
  const double raw = (m.lo[axis] - grid.lo) / h;
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) > 1e-9)
    throw refusal_error("apply_direct: lattice is not aligned with the "
                        "multiplier grid");
  return static_cast<long long>(rounded);
}

}  // namespace

FreqLattice lattice_of(const MultiplierGrid& m) {
  if (m.d != 1) throw refusal_error("lattice_of: d = 1 only");
  const double h = m.spacing(0);
  for (int r = 1; r < m.axes(); ++r) {
    if (std::abs(m.lo[r] - m.lo[0]) > 1e-12 ||
        std::abs(m.spacing(r) - h) > 1e-12 * h)
      throw refusal_error("lattice_of: axes do not share a common lattice");
  }
  FreqLattice grid;
  grid.lo = m.lo[0];
  grid.step = h;
  grid.count = m.res;
  return grid;
}

double TestFunctionTriple::l2_norm(int slot) const {
  if (slot < 0 || slot > 2)
    throw std::invalid_argument("l2_norm: slot must be 0..2");
  return std::sqrt(grid.step * fhat[slot].abs2().sum());
}

Eigen::ArrayXd make_x_grid(double lo, double dx, int n) {
  if (n < 1 || !(dx > 0.0))
    throw std::invalid_argument("make_x_grid: n >= 1 and dx > 0");
  Eigen::ArrayXd x(n);
  for (int i = 0; i < n; ++i) x[i] = lo + i * dx;
  return x;
}

OutputField apply_direct(const MultiplierGrid& m, const TestFunctionTriple& f,
                         const Eigen::ArrayXd& x_grid) {
  if (m.d != 1 || f.d != 1) throw refusal_error("apply_direct: d = 1 only");
  for (int slot = 0; slot < 3; ++slot)
    if (f.fhat[slot].size() != f.grid.count)
      throw std::invalid_argument("apply_direct: fhat size mismatch");

  long long shift[3];
  for (int r = 0; r < 3; ++r) shift[r] = axis_shift(m, r, f.grid);

  // Nonzero samples must fall inside m's box (cell range after shift).
  std::array<std::vector<int>, 3> live;
  for (int slot = 0; slot < 3; ++slot) {
    for (int i = 0; i < f.grid.count; ++i) {
      if (f.fhat[slot][i] == cd(0.0, 0.0)) continue;
      const long long cell = i - shift[slot];
      if (cell < 0 || cell >= m.res)
        throw refusal_error("apply_direct: nonzero test-function sample "
                            "outside the multiplier box");
      live[slot].push_back(i);
    }
  }

  // Group by total lattice index: xi+eta+delta = 3 lo + (s + 3/2) step.
  const int s_max = 3 * (f.grid.count - 1);
  Eigen::ArrayXcd amp = Eigen::ArrayXcd::Zero(s_max + 1);
  Eigen::VectorXi cell(3);
  for (int i1 : live[0])
    for (int i2 : live[1]) {
      const cd f12 = f.fhat[0][i1] * f.fhat[1][i2];
      for (int i3 : live[2]) {
        cell[0] = static_cast<int>(i1 - shift[0]);
        cell[1] = static_cast<int>(i2 - shift[1]);
        cell[2] = static_cast<int>(i3 - shift[2]);
        const double mv = m.values[static_cast<Eigen::Index>(m.flat_index(cell))];
        if (mv == 0.0) continue;
        amp[i1 + i2 + i3] += mv * f12 * f.fhat[2][i3];
      }
    }

  OutputField out;
  out.x_grid = x_grid;
  out.cell_volume = x_grid.size() > 1 ? x_grid[1] - x_grid[0] : 1.0;
  out.samples = Eigen::ArrayXcd::Zero(x_grid.size());
  const double vol = f.grid.step * f.grid.step * f.grid.step;
  parallel_for(static_cast<std::size_t>(x_grid.size()), [&](std::size_t ix) {
    const double x = x_grid[static_cast<Eigen::Index>(ix)];
    cd acc(0.0, 0.0);
    for (int s = 0; s <= s_max; ++s) {
      if (amp[s] == cd(0.0, 0.0)) continue;
      const double freq = 3.0 * f.grid.lo + (s + 1.5) * f.grid.step;
      acc += amp[s] * std::polar(1.0, kTwoPi * x * freq);
    }
    out.samples[static_cast<Eigen::Index>(ix)] = acc * vol;
  });
  return out;
}

OutputField apply_wavelet_form(const CoeffTensor& c, const WaveletSystem& sys,
                               const TestFunctionTriple& f,
                               const Eigen::ArrayXd& x_grid) {
  if (f.d != 1)
    throw refusal_error("apply_wavelet_form: d = 1 only");
  for (int slot = 0; slot < 3; ++slot)
    if (f.fhat[slot].size() != f.grid.count)
      throw std::invalid_argument("apply_wavelet_form: fhat size mismatch");

  OutputField out;
  out.x_grid = x_grid;
  out.cell_volume = x_grid.size() > 1 ? x_grid[1] - x_grid[0] : 1.0;
  out.samples = Eigen::ArrayXcd::Zero(x_grid.size());

  // Windowed inverse transforms, keyed by (slot, type, j, k).
  std::map<std::tuple<int, int, int, int>, Eigen::ArrayXcd> memo;
  auto windowed = [&](int slot, WaveletType t, int j,
                      int k) -> const Eigen::ArrayXcd& {
    const auto key = std::make_tuple(slot, t == WaveletType::Mother ? 1 : 0,
                                     j, k);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    const Eigen::ArrayXd w = freq_window(sys, t, j, k, f.grid);
    Eigen::ArrayXcd field = Eigen::ArrayXcd::Zero(x_grid.size());
    std::vector<int> live;
    for (int i = 0; i < f.grid.count; ++i)
      if (w[i] != 0.0 && f.fhat[slot][i] != cd(0.0, 0.0)) live.push_back(i);
    parallel_for(static_cast<std::size_t>(x_grid.size()), [&](std::size_t ix) {
      const double x = x_grid[static_cast<Eigen::Index>(ix)];
      cd acc(0.0, 0.0);
      for (int i : live)
        acc += w[i] * f.fhat[slot][i] *
               std::polar(1.0, kTwoPi * x * f.grid.point(i));
      field[static_cast<Eigen::Index>(ix)] = acc * f.grid.step;
    });
    return memo.emplace(key, std::move(field)).first->second;
  };

  for (const auto& e : c.entries) {
    if (e.first.n.size() != 3)
      throw std::invalid_argument("apply_wavelet_form: entries must have "
                                  "three axes");
    const Eigen::ArrayXcd& w0 =
        windowed(0, e.first.axis_type(0), e.first.j, e.first.n[0]);
    const Eigen::ArrayXcd& w1 =
        windowed(1, e.first.axis_type(1), e.first.j, e.first.n[1]);
    const Eigen::ArrayXcd& w2 =
        windowed(2, e.first.axis_type(2), e.first.j, e.first.n[2]);
    out.samples += e.second * w0 * w1 * w2;
  }
  return out;
}

double quasi_norm(const OutputField& field, double p) {
  if (!(p > 0.0) || !std::isfinite(p))
    throw std::invalid_argument("quasi_norm: 0 < p < inf");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < field.samples.size(); ++i)
    acc += std::pow(std::abs(field.samples[i]), p);
  return std::pow(acc * field.cell_volume, 1.0 / p);
}

double bump_profile(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

Eigen::ArrayXcd make_bump_hat(double center, double width,
                              const FreqLattice& grid) {
  if (!(width > 0.0)) throw std::invalid_argument("make_bump_hat: width > 0");
  Eigen::ArrayXcd out(grid.count);
  for (int i = 0; i < grid.count; ++i)
    out[i] = cd(bump_profile((grid.point(i) - center) / width), 0.0);
  return out;
}

Eigen::ArrayXd freq_window(const WaveletSystem& sys, WaveletType t, int j,
                           int k, const FreqLattice& grid) {
  if (j < 0) throw std::invalid_argument("freq_window: j >= 0");
  Eigen::ArrayXd out(grid.count);
  const double scale = std::ldexp(1.0, j);
  const double amp = std::pow(2.0, 0.5 * j);
  for (int i = 0; i < grid.count; ++i)
    out[i] = amp * point_eval(sys, t, scale * grid.point(i) - k);
  return out;
}

}  // namespace trimul
