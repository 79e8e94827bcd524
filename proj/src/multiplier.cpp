// multiplier.cpp

#include "trimul/multiplier.hpp"

#include <cmath>

namespace trimul {

Eigen::VectorXd MultiplierGrid::point(const Eigen::VectorXi& cell) const {
  Eigen::VectorXd x(axes());
  for (int r = 0; r < axes(); ++r)
    x[r] = lo[r] + (cell[r] + 0.5) * spacing(r);
  return x;
}

std::size_t MultiplierGrid::flat_index(const Eigen::VectorXi& cell) const {
  std::size_t idx = 0;
  for (int r = 0; r < axes(); ++r)
    idx = idx * static_cast<std::size_t>(res) +
          static_cast<std::size_t>(cell[r]);
  return idx;
}

double MultiplierGrid::cell_volume() const {
  double v = 1.0;
  for (int r = 0; r < axes(); ++r) v *= spacing(r);
  return v;
}

MultiplierGrid sample_grid(int d, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, int res,
                           const ScalarField& fn) {
  if (d < 1 || d > 1)
    throw std::invalid_argument("sample_grid: only d = 1 is supported");
  if (res < 1) throw std::invalid_argument("sample_grid: res >= 1");
  const int axes = 3 * d;
  if (lo.size() != axes || hi.size() != axes)
    throw std::invalid_argument("sample_grid: box corners need 3d entries");
  for (int r = 0; r < axes; ++r)
    if (!(hi[r] > lo[r]))
      throw std::invalid_argument("sample_grid: empty box");

  MultiplierGrid m;
  m.d = d;
  m.lo = lo;
  m.hi = hi;
  m.res = res;
  m.evaluator = fn;
  std::size_t total = 1;
  for (int r = 0; r < axes; ++r) total *= static_cast<std::size_t>(res);
  m.values.resize(static_cast<Eigen::Index>(total));

  parallel_for(total, [&](std::size_t flat) {
    Eigen::VectorXd x(axes);
    std::size_t rem = flat;
    for (int r = axes - 1; r >= 0; --r) {
      const auto c = static_cast<int>(rem % static_cast<std::size_t>(res));
      rem /= static_cast<std::size_t>(res);
      x[r] = lo[r] + (c + 0.5) * (hi[r] - lo[r]) / res;
    }
    m.values[static_cast<Eigen::Index>(flat)] = fn(x);
  });
  return m;
}

double grid_lq_norm(const MultiplierGrid& m, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("grid_lq_norm: q > 0");
  const double vol = m.cell_volume();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.values.size(); ++i)
    acc += std::pow(std::abs(m.values[i]), q);
  return std::pow(acc * vol, 1.0 / q);
}

double grid_sup_norm(const MultiplierGrid& m) {
  return m.values.abs().maxCoeff();
}

ScalarField gaussian_field(double sigma, const Eigen::VectorXd& center) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_field: sigma > 0");
  return [sigma, center](const Eigen::VectorXd& x) {
    return std::exp(-(x - center).squaredNorm() / (2.0 * sigma * sigma));
  };
}

ScalarField sine_window_poly(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  // Quadratic p(x) = c0 + sum_r c_r x_r + sum_{r<=s} c_{rs} x_r x_s.
  const double c0 = coeff(rng);
  Eigen::Vector3d lin;
  Eigen::Matrix3d quad = Eigen::Matrix3d::Zero();
  for (int r = 0; r < 3; ++r) lin[r] = coeff(rng);
  for (int r = 0; r < 3; ++r)
    for (int s = r; s < 3; ++s) quad(r, s) = coeff(rng);
  return [c0, lin, quad](const Eigen::VectorXd& x) {
    double w = 1.0;
    for (int r = 0; r < 3; ++r) {
      if (x[r] <= 0.0 || x[r] >= 1.0) return 0.0;
      const double s = std::sin(M_PI * x[r]);
      w *= s * s * s;
    }
    double p = c0;
    for (int r = 0; r < 3; ++r) {
      p += lin[r] * x[r];
      for (int s = r; s < 3; ++s) p += quad(r, s) * x[r] * x[s];
    }
    return w * p;
  };
}

ScalarField gaussian_mix(std::mt19937_64& rng, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, int count) {
  if (count < 1) throw std::invalid_argument("gaussian_mix: count >= 1");
  if (lo.size() != 3 || hi.size() != 3)
    throw std::invalid_argument("gaussian_mix: box corners need 3 entries");
  std::uniform_real_distribution<double> unit(0.2, 0.8);
  std::uniform_real_distribution<double> width(0.35, 0.8);
  std::uniform_real_distribution<double> amp(0.3, 1.0);
  struct Term {
    Eigen::Vector3d c;
    double sigma, a;
  };
  std::vector<Term> terms(count);
  double peak = 0.0;
  for (auto& t : terms) {
    for (int r = 0; r < 3; ++r)
      t.c[r] = lo[r] + unit(rng) * (hi[r] - lo[r]);
    t.sigma = width(rng);
    t.a = amp(rng);
    peak += t.a;
  }
  const double scale = 1.0 / peak;
  return [terms, scale](const Eigen::VectorXd& x) {
    double acc = 0.0;
    for (const auto& t : terms)
      acc += t.a * std::exp(-(x.head<3>() - t.c).squaredNorm() /
                            (2.0 * t.sigma * t.sigma));
    return scale * acc;
  };
}

ScalarField diagonal_kink(const ScalarField& window, double c) {
  return [window, c](const Eigen::VectorXd& x) {
    return window(x) * std::abs(x[0] + x[1] + x[2] - c);
  };
}

}  // namespace trimul
