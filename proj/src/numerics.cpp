#include "wavemech/numerics.hpp"
#include "wavemech/core.hpp"

#include <array>
#include <cmath>

namespace wavemech {

std::vector<double> polyfit(std::span<const double> x, std::span<const double> y, int degree) {
  require(x.size() == y.size(), ErrorKind::shape, "polyfit needs matching x and y");
  require(degree >= 0 && degree <= 3, ErrorKind::precondition, "polyfit degree must be 0..3");
  const int m = degree + 1;
  require(static_cast<int>(x.size()) >= m, ErrorKind::precondition, "polyfit needs more samples than coefficients");
  // Normal equations on a centred, scaled abscissa for conditioning.
  double xmin = x[0], xmax = x[0];
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  const double c0 = 0.5 * (xmin + xmax);
  const double s = xmax > xmin ? 0.5 * (xmax - xmin) : 1.0;
  std::array<std::array<double, 5>, 4> a{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = (x[i] - c0) / s;
    std::array<double, 4> p{1.0, u, u * u, u * u * u};
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a[r][c] += p[r] * p[c];
      a[r][m] += p[r] * y[i];
    }
  }
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    require(a[col][col] != 0.0, ErrorKind::precondition, "polyfit system is singular");
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> cu(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) cu[static_cast<std::size_t>(r)] = a[r][m] / a[r][r];
  // Expand sum cu_k ((x - c0)/s)^k back into powers of x.
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < m; ++k) {
    const double ck = cu[static_cast<std::size_t>(k)] / std::pow(s, k);
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      out[static_cast<std::size_t>(j)] += ck * binom * std::pow(-c0, k - j);
      binom = binom * (k - j) / (j + 1);
    }
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0 && x[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nan("");
  return polyfit(lx, ly, 1)[1];
}

std::vector<Vec3> shell_directions(int dims, int count) {
  std::vector<Vec3> out;
  if (dims == 1) return {Vec3(-1.0), Vec3(1.0)};
  if (dims == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * kPi * k / count;
      out.emplace_back(std::cos(th), std::sin(th));
    }
    return out;
  }
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / count;
    const double r = std::sqrt(1.0 - z * z);
    const double th = golden * k;
    out.emplace_back(r * std::cos(th), r * std::sin(th), z);
  }
  return out;
}

}  // namespace wavemech
