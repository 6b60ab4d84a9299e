#pragma once

// Nodal length of sampled fields by marching squares, and a Monte Carlo
// harness for its expectation.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "arw/arithmetic.hpp"
#include "arw/error.hpp"
#include "arw/field.hpp"
#include "arw/parallel.hpp"
#include "arw/rng.hpp"

namespace arw {

inline constexpr double kZeroShift = 1e-12;

/// Correctly rounded sum of a multiset of doubles (Shewchuk's partials), so the
/// result does not depend on summation order.
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  double result() const {
    if (partials_.empty()) return 0.0;
    auto k = partials_.size() - 1;
    double hi = partials_[k];
    double lo = 0.0;
    while (k > 0) {
      const double x = hi;
      const double y = partials_[--k];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    // half-way correction as in Python's fsum
    if (k > 0 && ((lo < 0.0 && partials_[k - 1] < 0.0) || (lo > 0.0 && partials_[k - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

struct NodalEstimate {
  double length = 0.0;
  std::size_t grid_M = 0;
  std::size_t ambiguous_cells = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double shift_zero(double v) { return v == 0.0 ? kZeroShift : v; }

// Zero-crossing parameter along an edge from p to q (opposite signs).
inline double crossing(double p, double q) { return p / (p - q); }

// Length of the contour inside one cell in cell units. Corners a=(0,0),
// b=(1,0), c=(1,1), d=(0,1) with the first coordinate along rows. The result is
// invariant under swapping b and d (transpose).
inline double cell_length(double a, double b, double c, double d, bool& ambiguous) {
  const bool pa = a > 0, pb = b > 0, pc = c > 0, pd = d > 0;
  struct E {
    bool on;
    double u, w;
  };
  const E ab{pa != pb, pa != pb ? crossing(a, b) : 0.0, 0.0};
  const E bc{pb != pc, 1.0, pb != pc ? crossing(b, c) : 0.0};
  const E dc{pd != pc, pd != pc ? crossing(d, c) : 0.0, 1.0};
  const E ad{pa != pd, 0.0, pa != pd ? crossing(a, d) : 0.0};
  auto seg = [](const E& p, const E& q) { return std::hypot(p.u - q.u, p.w - q.w); };
  const int count = ab.on + bc.on + dc.on + ad.on;
  ambiguous = false;
  if (count == 0) return 0.0;
  if (count == 2) {
    const E* ends[2];
    int k = 0;
    for (const E* e : {&ab, &bc, &dc, &ad})
      if (e->on) ends[k++] = e;
    return seg(*ends[0], *ends[1]);
  }
  // saddle: bilinear centre value decides which diagonal pair is connected
  ambiguous = true;
  const bool centre = ((a + c) + (b + d)) > 0;
  if (centre == pa) return seg(ab, bc) + seg(dc, ad);  // b and d cut off
  return seg(ab, ad) + seg(bc, dc);                     // a and c cut off
}

}  // namespace detail

/// Total contour length of the zero set of bilinearly interpolated node
/// values (M x M, row-major). Exact zeros are read as +kZeroShift. With
/// periodic = true the last row/column connects back to the first.
inline NodalEstimate marching_squares_length(std::span<const double> values, std::size_t M, double spacing,
                                             bool periodic = false) {
  if (M < 3) throw Error(ErrorCode::GridTooSmall, "marching squares needs M >= 3");
  if (values.size() != M * M) throw Error(ErrorCode::InvalidArgument, "value count is not M*M");
  NodalEstimate est;
  est.grid_M = M;
  ExactSum sum;
  const std::size_t cells = periodic ? M : M - 1;
  auto at = [&](std::size_t i, std::size_t j) { return detail::shift_zero(values[(i % M) * M + (j % M)]); };
  for (std::size_t i = 0; i < cells; ++i)
    for (std::size_t j = 0; j < cells; ++j) {
      bool amb = false;
      const double l = detail::cell_length(at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1), amb);
      if (l != 0.0) sum.add(l);
      est.ambiguous_cells += amb ? 1 : 0;
    }
  est.length = sum.result() * spacing;
  return est;
}

inline NodalEstimate marching_squares_length(const Grid& g) {
  return marching_squares_length(g.values, g.M, g.spacing, g.periodic);
}

/// Dirichlet frame convention: the wall nodes, where the field vanishes
/// identically, take kZeroShift times the sign of their inward neighbour, so
/// the wall itself never registers as nodal line.
inline void apply_dirichlet_frame(Grid& g) {
  const std::size_t M = g.M;
  auto sgn = [](double v) { return v < 0 ? -kZeroShift : kZeroShift; };
  for (std::size_t k = 1; k + 1 < M; ++k) {
    g.at(0, k) = sgn(g.at(1, k));
    g.at(M - 1, k) = sgn(g.at(M - 2, k));
    g.at(k, 0) = sgn(g.at(k, 1));
    g.at(k, M - 1) = sgn(g.at(k, M - 2));
  }
  g.at(0, 0) = sgn(g.at(1, 1));
  g.at(0, M - 1) = sgn(g.at(1, M - 2));
  g.at(M - 1, 0) = sgn(g.at(M - 2, 1));
  g.at(M - 1, M - 1) = sgn(g.at(M - 2, M - 2));
}

struct LengthReport {
  WaveKind kind = WaveKind::BoundaryAdapted;
  u64 n = 0;
  std::size_t N = 0;
  std::size_t trials = 0;
  double ppw = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double variance = 0.0;
  double min = 0.0;
  std::size_t grid_M = 0;
  std::uint64_t seed0 = 0;
  std::size_t ambiguous_cells = 0;  // summed over trials
  std::vector<double> lengths;
};

/// Node count per axis. Boundary-adapted: ceil(ppw sqrt(n) / 2) + 1 nodes
/// spanning [0,1] (wavelength 2/sqrt n), increased until gcd(M - 1, Q_n) = 1 so
/// no interior node lies on the deterministic lines x_i = k/Q_n. Torus:
/// ceil(ppw sqrt n) periodic nodes (wavelength 1/sqrt n).
inline std::size_t monte_carlo_grid(WaveKind kind, u64 n, double ppw) {
  const double r = std::sqrt(static_cast<double>(n));
  if (kind == WaveKind::Torus) return std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(ppw * r)));
  auto M = static_cast<std::size_t>(std::ceil(ppw * r / 2.0)) + 1;
  M = std::max<std::size_t>(M, 3);
  const u64 Q = grid_number(n);
  while (std::gcd(static_cast<u64>(M - 1), Q) != 1) ++M;
  return M;
}

inline LengthReport monte_carlo_expected_length(WaveKind kind, const LatticeSet& set, std::size_t trials,
                                                double ppw = 40.0, std::uint64_t seed0 = 1, unsigned threads = 1) {
  if (trials < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 trials");
  if (!(ppw > 0.0)) throw Error(ErrorCode::InvalidArgument, "points per wavelength must be positive");
  if (kind == WaveKind::BoundaryAdapted && set.classes.empty())
    throw Error(ErrorCode::EmptySpectrum, "n = " + std::to_string(set.n) + " has no class with both coordinates nonzero");
  LengthReport rep;
  rep.kind = kind;
  rep.n = set.n;
  rep.N = set.size();
  rep.trials = trials;
  rep.ppw = ppw;
  rep.seed0 = seed0;
  std::size_t M = monte_carlo_grid(kind, set.n, ppw);

  auto run = [&](std::size_t t, std::size_t grid) {
    const auto w = sample(kind, set, rng::derive_seed(seed0, t));
    auto g = evaluate_grid(w, grid);
    if (kind == WaveKind::BoundaryAdapted) apply_dirichlet_frame(g);
    return std::pair{marching_squares_length(g), g};
  };
  // nodes landing on the zero set en masse would bias the zero shift; move the grid
  for (int attempt = 0; attempt < 8; ++attempt) {
    const auto [est, g] = run(0, M);
    std::size_t tiny = 0;
    const std::size_t lo = kind == WaveKind::BoundaryAdapted ? 1 : 0;
    const std::size_t hi = kind == WaveKind::BoundaryAdapted ? g.M - 1 : g.M;
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = lo; j < hi; ++j) tiny += std::abs(g.at(i, j)) < 1e-14 ? 1 : 0;
    if (tiny <= 2 * M) break;
    ++M;
    if (kind == WaveKind::BoundaryAdapted)
      while (std::gcd(static_cast<u64>(M - 1), grid_number(set.n)) != 1) ++M;
  }
  rep.grid_M = M;

  std::vector<double> lengths(trials);
  std::vector<std::size_t> amb(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    const auto est = run(t, M).first;
    lengths[t] = est.length;
    amb[t] = est.ambiguous_cells;
  });
  rep.mean = pairwise_sum(lengths) / static_cast<double>(trials);
  std::vector<double> dev(trials);
  for (std::size_t t = 0; t < trials; ++t) dev[t] = (lengths[t] - rep.mean) * (lengths[t] - rep.mean);
  rep.variance = pairwise_sum(dev) / static_cast<double>(trials - 1);
  rep.stderr_ = std::sqrt(rep.variance / static_cast<double>(trials));
  rep.min = *std::min_element(lengths.begin(), lengths.end());
  for (auto a : amb) rep.ambiguous_cells += a;
  rep.lengths = std::move(lengths);
  return rep;
}

}  // namespace arw
