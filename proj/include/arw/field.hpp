#pragma once

// Gaussian random eigenfunctions on the unit square (Dirichlet, built from
// products of sines over the classes of E_n) and on the unit torus.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <ostream>
#include <string_view>
#include <vector>

#include "arw/arithmetic.hpp"
#include "arw/error.hpp"
#include "arw/parallel.hpp"
#include "arw/rng.hpp"

namespace arw {

enum class WaveKind { BoundaryAdapted, Torus };

constexpr std::string_view to_string(WaveKind k) {
  return k == WaveKind::BoundaryAdapted ? "boundary_adapted" : "torus";
}

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

// Coefficient j of a sample with seed s:
//   boundary-adapted: a_j = normal(s, j), one per class;
//   torus: a_j = (g1 + i g2)/sqrt(2) with (g1, g2) = normal_pair(s, j), one per
//   antipodal pair; the partner carries the conjugate.
struct WaveSample {
  WaveKind kind = WaveKind::BoundaryAdapted;
  u64 n = 0;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  std::vector<LatticePoint> modes;  // classes, or one representative per pair
  std::vector<double> re;
  std::vector<double> im;  // torus only

  double scale() const {
    return kind == WaveKind::BoundaryAdapted ? 4.0 / std::sqrt(static_cast<double>(N))
                                             : 2.0 / std::sqrt(static_cast<double>(N));
  }
};

/// Representatives of E_n / {mu ~ -mu}: x > 0, or x == 0 and y > 0.
inline std::vector<LatticePoint> pair_representatives(const LatticeSet& set) {
  std::vector<LatticePoint> out;
  for (const auto& p : set.points)
    if (p.x > 0 || (p.x == 0 && p.y > 0)) out.push_back(p);
  return out;
}

inline WaveSample sample(WaveKind kind, const LatticeSet& set, std::uint64_t seed) {
  WaveSample w;
  w.kind = kind;
  w.n = set.n;
  w.N = set.size();
  w.seed = seed;
  if (kind == WaveKind::BoundaryAdapted) {
    if (set.classes.empty())
      throw Error(ErrorCode::EmptySpectrum, "n = " + std::to_string(set.n) + " has no class with both coordinates nonzero");
    w.modes = set.classes;
    w.re.resize(w.modes.size());
    for (std::size_t j = 0; j < w.modes.size(); ++j) w.re[j] = rng::normal(seed, j);
  } else {
    if (set.points.empty()) throw Error(ErrorCode::EmptySpectrum, "empty lattice set");
    w.modes = pair_representatives(set);
    w.re.resize(w.modes.size());
    w.im.resize(w.modes.size());
    for (std::size_t j = 0; j < w.modes.size(); ++j) {
      const auto [g1, g2] = rng::normal_pair(seed, j);
      w.re[j] = g1 * std::numbers::sqrt2 / 2;
      w.im[j] = g2 * std::numbers::sqrt2 / 2;
    }
  }
  return w;
}

inline double evaluate(const WaveSample& w, Point x) {
  constexpr double pi = std::numbers::pi;
  double acc = 0.0;
  if (w.kind == WaveKind::BoundaryAdapted) {
    for (std::size_t j = 0; j < w.modes.size(); ++j)
      acc += w.re[j] * std::sin(pi * w.modes[j].x * x.x1) * std::sin(pi * w.modes[j].y * x.x2);
  } else {
    // 2 Re(a e(<mu,x>)) = 2 (re cos - im sin), the factor 2 lives in scale()
    for (std::size_t j = 0; j < w.modes.size(); ++j) {
      const double t = 2 * pi * (w.modes[j].x * x.x1 + w.modes[j].y * x.x2);
      acc += w.re[j] * std::cos(t) - w.im[j] * std::sin(t);
    }
  }
  return w.scale() * acc;
}

inline std::array<double, 2> evaluate_gradient(const WaveSample& w, Point x) {
  constexpr double pi = std::numbers::pi;
  double g1 = 0.0;
  double g2 = 0.0;
  if (w.kind == WaveKind::BoundaryAdapted) {
    for (std::size_t j = 0; j < w.modes.size(); ++j) {
      const double k1 = pi * w.modes[j].x;
      const double k2 = pi * w.modes[j].y;
      g1 += w.re[j] * k1 * std::cos(k1 * x.x1) * std::sin(k2 * x.x2);
      g2 += w.re[j] * k2 * std::sin(k1 * x.x1) * std::cos(k2 * x.x2);
    }
  } else {
    for (std::size_t j = 0; j < w.modes.size(); ++j) {
      const double t = 2 * pi * (w.modes[j].x * x.x1 + w.modes[j].y * x.x2);
      const double d = -w.re[j] * std::sin(t) - w.im[j] * std::cos(t);
      g1 += 2 * pi * w.modes[j].x * d;
      g2 += 2 * pi * w.modes[j].y * d;
    }
  }
  return {w.scale() * g1, w.scale() * g2};
}

/// Second derivatives {f_11, f_12, f_22}.
inline std::array<double, 3> evaluate_hessian(const WaveSample& w, Point x) {
  constexpr double pi = std::numbers::pi;
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
  if (w.kind == WaveKind::BoundaryAdapted) {
    for (std::size_t j = 0; j < w.modes.size(); ++j) {
      const double k1 = pi * w.modes[j].x;
      const double k2 = pi * w.modes[j].y;
      const double s1 = std::sin(k1 * x.x1), c1 = std::cos(k1 * x.x1);
      const double s2 = std::sin(k2 * x.x2), c2 = std::cos(k2 * x.x2);
      h11 -= w.re[j] * k1 * k1 * s1 * s2;
      h12 += w.re[j] * k1 * k2 * c1 * c2;
      h22 -= w.re[j] * k2 * k2 * s1 * s2;
    }
  } else {
    for (std::size_t j = 0; j < w.modes.size(); ++j) {
      const double k1 = 2 * pi * w.modes[j].x;
      const double k2 = 2 * pi * w.modes[j].y;
      const double t = k1 * x.x1 + k2 * x.x2;
      const double v = -(w.re[j] * std::cos(t) - w.im[j] * std::sin(t));
      h11 += k1 * k1 * v;
      h12 += k1 * k2 * v;
      h22 += k2 * k2 * v;
    }
  }
  const double c = w.scale();
  return {c * h11, c * h12, c * h22};
}

/// Residual of the Helmholtz equation; the eigenvalue is pi^2 n (square) or 4 pi^2 n (torus).
inline double helmholtz_residual(const WaveSample& w, Point x) {
  const auto h = evaluate_hessian(w, x);
  const double lambda = (w.kind == WaveKind::BoundaryAdapted ? 1.0 : 4.0) * std::numbers::pi * std::numbers::pi *
                        static_cast<double>(w.n);
  return h[0] + h[2] + lambda * evaluate(w, x);
}

/// r_n(x, y) for the boundary-adapted ensemble.
inline double covariance(const LatticeSet& set, Point x, Point y) {
  constexpr double pi = std::numbers::pi;
  double acc = 0.0;
  for (const auto& p : set.classes)
    acc += std::sin(pi * p.x * x.x1) * std::sin(pi * p.y * x.x2) * std::sin(pi * p.x * y.x1) *
           std::sin(pi * p.y * y.x2);
  return 16.0 / static_cast<double>(set.size()) * acc;
}

/// p_n(x - y) for the torus ensemble.
inline double torus_covariance(const LatticeSet& set, Point x, Point y) {
  double acc = 0.0;
  for (const auto& p : set.points)
    acc += std::cos(2 * std::numbers::pi * (p.x * (x.x1 - y.x1) + p.y * (x.x2 - y.x2)));
  return acc / static_cast<double>(set.size());
}

// Values on an M x M node grid, row-major with row index along x1:
// values[i * M + j] = f(node(i), node(j)). Boundary-adapted grids include both
// walls (node(i) = i / (M - 1)); torus grids are periodic (node(i) = i / M).
struct Grid {
  std::size_t M = 0;
  double spacing = 0.0;
  bool periodic = false;
  std::vector<double> values;

  double& at(std::size_t i, std::size_t j) { return values[i * M + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * M + j]; }
  double node(std::size_t i) const { return static_cast<double>(i) * spacing; }
};

/// Separable evaluation: per-mode 1-D tables, O(|modes| M^2). Rows are
/// distributed over threads; each value is computed by exactly one thread in a
/// fixed order, so the output does not depend on the thread count.
inline Grid evaluate_grid(const WaveSample& w, std::size_t M, unsigned threads = 1) {
  constexpr double pi = std::numbers::pi;
  Grid g;
  g.M = M;
  g.periodic = w.kind == WaveKind::Torus;
  if (M < 2) throw Error(ErrorCode::GridTooSmall, "grid needs at least 2 nodes per axis");
  g.spacing = g.periodic ? 1.0 / static_cast<double>(M) : 1.0 / static_cast<double>(M - 1);
  g.values.assign(M * M, 0.0);
  const std::size_t K = w.modes.size();
  const double c = w.scale();
  if (!g.periodic) {
    std::vector<double> t1(K * M), t2(K * M);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < M; ++i) {
        const double x = g.node(i);
        t1[k * M + i] = c * w.re[k] * std::sin(pi * w.modes[k].x * x);
        t2[k * M + i] = std::sin(pi * w.modes[k].y * x);
      }
    parallel_for(M, threads, [&](std::size_t i) {
      double* row = &g.values[i * M];
      for (std::size_t k = 0; k < K; ++k) {
        const double a = t1[k * M + i];
        const double* b = &t2[k * M];
        for (std::size_t j = 0; j < M; ++j) row[j] += a * b[j];
      }
    });
  } else {
    // Re(a e(mu1 x1) e(mu2 x2)) with complex tables
    std::vector<std::complex<double>> t1(K * M), t2(K * M);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < M; ++i) {
        const double x = g.node(i);
        t1[k * M + i] = c * std::complex<double>(w.re[k], w.im[k]) * std::polar(1.0, 2 * pi * w.modes[k].x * x);
        t2[k * M + i] = std::polar(1.0, 2 * pi * w.modes[k].y * x);
      }
    parallel_for(M, threads, [&](std::size_t i) {
      double* row = &g.values[i * M];
      for (std::size_t k = 0; k < K; ++k) {
        const auto a = t1[k * M + i];
        const auto* b = &t2[k * M];
        for (std::size_t j = 0; j < M; ++j) row[j] += a.real() * b[j].real() - a.imag() * b[j].imag();
      }
    });
  }
  return g;
}

// Dump formats. CSV: one comment line "# M=<M> spacing=<h> periodic=<0|1>"
// then M rows of M comma-separated values. Binary: the 8 bytes "ARWGRID1",
// uint64 M, float64 spacing, uint64 periodic, then M*M float64 row-major,
// all little-endian host order.
inline void write_grid_csv(std::ostream& os, const Grid& g) {
  os << "# M=" << g.M << " spacing=" << g.spacing << " periodic=" << (g.periodic ? 1 : 0) << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < g.M; ++i) {
    for (std::size_t j = 0; j < g.M; ++j) {
      if (j) os << ',';
      os << g.at(i, j);
    }
    os << '\n';
  }
}

inline void write_grid_binary(std::ostream& os, const Grid& g) {
  os.write("ARWGRID1", 8);
  const std::uint64_t M = g.M;
  const std::uint64_t periodic = g.periodic ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&M), sizeof M);
  os.write(reinterpret_cast<const char*>(&g.spacing), sizeof g.spacing);
  os.write(reinterpret_cast<const char*>(&periodic), sizeof periodic);
  os.write(reinterpret_cast<const char*>(g.values.data()), static_cast<std::streamsize>(g.values.size() * sizeof(double)));
}

}  // namespace arw
