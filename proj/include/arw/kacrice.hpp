#pragma once

// Pointwise covariance data of the boundary-adapted field, its zero density,
// the singular-square classification, the second-order expansion of the
// density, integrals of the expansion terms, and the Kac-Rice quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "arw/arithmetic.hpp"
#include "arw/error.hpp"
#include "arw/field.hpp"
#include "arw/parallel.hpp"

namespace arw {

inline constexpr double kVarianceFloor = 1e-12;

struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a12; }
  double frobenius() const { return std::sqrt(a11 * a11 + 2 * a12 * a12 + a22 * a22); }
  double trace_of_square() const { return a11 * a11 + 2 * a12 * a12 + a22 * a22; }
  /// Eigenvalues, larger first.
  std::array<double, 2> eigenvalues() const {
    const double m = 0.5 * (a11 + a22);
    const double r = std::hypot(0.5 * (a11 - a22), a12);
    return {m + r, m - r};
  }
};

inline Sym2 operator-(const Sym2& a, const Sym2& b) { return {a.a11 - b.a11, a.a12 - b.a12, a.a22 - b.a22}; }

struct LocalMoments {
  double v = 0.0;  // Var f(x)
  double s = 0.0;  // 1 - v
  std::array<double, 2> B{};  // E[f grad f]
  Sym2 C;      // E[grad f grad f^T]
  Sym2 Theta;  // Cov(grad f | f = 0)
  Sym2 Gamma;  // Omega - I
  Sym2 Omega;  // 2/(pi^2 n) Theta
};

namespace detail {

struct RawMoments {
  double v = 0, b1 = 0, b2 = 0, c11 = 0, c12 = 0, c22 = 0;
};

// Sums over classes from per-class sin/cos values; factors 16/N and pi are applied later.
inline RawMoments accumulate(std::size_t K, const double* mu1, const double* mu2, const double* s1,
                             const double* c1, const double* s2, const double* c2) {
  RawMoments r;
  for (std::size_t k = 0; k < K; ++k) {
    const double p = s1[k] * s2[k];
    const double q1 = mu1[k] * c1[k] * s2[k];
    const double q2 = mu2[k] * s1[k] * c2[k];
    r.v += p * p;
    r.b1 += p * q1;
    r.b2 += p * q2;
    r.c11 += q1 * q1;
    r.c12 += q1 * q2;
    r.c22 += q2 * q2;
  }
  return r;
}

// Returns nullopt when v <= kVarianceFloor.
inline std::optional<LocalMoments> finish(const RawMoments& r, double N, double n) {
  constexpr double pi = std::numbers::pi;
  const double f = 16.0 / N;
  LocalMoments m;
  m.v = f * r.v;
  m.s = 1.0 - m.v;
  if (!(m.v > kVarianceFloor)) return std::nullopt;
  m.B = {f * pi * r.b1, f * pi * r.b2};
  m.C = {f * pi * pi * r.c11, f * pi * pi * r.c12, f * pi * pi * r.c22};
  m.Theta = {m.C.a11 - m.B[0] * m.B[0] / m.v, m.C.a12 - m.B[0] * m.B[1] / m.v, m.C.a22 - m.B[1] * m.B[1] / m.v};
  const double g = 2.0 / (pi * pi * n);
  m.Omega = {g * m.Theta.a11, g * m.Theta.a12, g * m.Theta.a22};
  m.Gamma = {m.Omega.a11 - 1.0, m.Omega.a12, m.Omega.a22 - 1.0};
  return m;
}

// Per-class sin/cos tables along one axis at a list of abscissae.
struct TrigTable {
  std::size_t K = 0;
  std::vector<double> mu1, mu2;
  std::vector<double> s1, c1, s2, c2;  // [node * K + k]

  TrigTable(const LatticeSet& set, const std::vector<double>& nodes) : K(set.classes.size()) {
    constexpr double pi = std::numbers::pi;
    for (const auto& p : set.classes) {
      mu1.push_back(static_cast<double>(p.x));
      mu2.push_back(static_cast<double>(p.y));
    }
    const std::size_t M = nodes.size();
    s1.resize(M * K);
    c1.resize(M * K);
    s2.resize(M * K);
    c2.resize(M * K);
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t k = 0; k < K; ++k) {
        s1[i * K + k] = std::sin(pi * mu1[k] * nodes[i]);
        c1[i * K + k] = std::cos(pi * mu1[k] * nodes[i]);
        s2[i * K + k] = std::sin(pi * mu2[k] * nodes[i]);
        c2[i * K + k] = std::cos(pi * mu2[k] * nodes[i]);
      }
  }

  RawMoments at(std::size_t i, std::size_t j) const {
    return accumulate(K, mu1.data(), mu2.data(), &s1[i * K], &c1[i * K], &s2[j * K], &c2[j * K]);
  }
};

inline void require_classes(const LatticeSet& set) {
  if (set.classes.empty())
    throw Error(ErrorCode::EmptySpectrum, "n = " + std::to_string(set.n) + " has no class with both coordinates nonzero");
}

}  // namespace detail

/// Covariance data by direct summation over classes, then Gaussian conditioning.
inline LocalMoments local_moments(const LatticeSet& set, Point x) {
  detail::require_classes(set);
  constexpr double pi = std::numbers::pi;
  detail::RawMoments r;
  for (const auto& p : set.classes) {
    const double a = pi * p.x * x.x1, b = pi * p.y * x.x2;
    const double s1 = std::sin(a), c1 = std::cos(a), s2 = std::sin(b), c2 = std::cos(b);
    const double mu1 = p.x, mu2 = p.y;
    auto one = detail::accumulate(1, &mu1, &mu2, &s1, &c1, &s2, &c2);
    r.v += one.v, r.b1 += one.b1, r.b2 += one.b2, r.c11 += one.c11, r.c12 += one.c12, r.c22 += one.c22;
  }
  auto m = detail::finish(r, static_cast<double>(set.size()), static_cast<double>(set.n));
  if (!m) throw Error(ErrorCode::DegeneratePoint, "variance below floor at (" + std::to_string(x.x1) + ", " + std::to_string(x.x2) + ")");
  return *m;
}

/// Gamma from the closed b/d expressions. These use sum over classes of
/// mu_1^2 = nN/8, which fails for perfect squares, so those are rejected.
inline Sym2 gamma_explicit(const LatticeSet& set, Point x) {
  detail::require_classes(set);
  if (is_perfect_square(set.n))
    throw Error(ErrorCode::InvalidArgument, "closed-form Gamma needs non-square n");
  constexpr double pi = std::numbers::pi;
  double b11 = 0, b12 = 0, b22 = 0, d1 = 0, d2 = 0, v = 0;
  for (const auto& p : set.classes) {
    const double m1 = p.x, m2 = p.y;
    const double a = pi * m1 * x.x1, b = pi * m2 * x.x2;
    const double ca = std::cos(2 * a), cb = std::cos(2 * b);
    const double sa = std::sin(2 * a), sb = std::sin(2 * b);
    const double s1 = std::sin(a), s2 = std::sin(b);
    b11 += m1 * m1 * (ca - cb - ca * cb);
    b22 += m2 * m2 * (cb - ca - ca * cb);
    b12 += m1 * m2 * sa * sb;
    d1 += m1 * sa * s2 * s2;
    d2 += m2 * sb * s1 * s1;
    v += s1 * s1 * s2 * s2;
  }
  const double N = static_cast<double>(set.size());
  const double n = static_cast<double>(set.n);
  v *= 16.0 / N;
  if (!(v > kVarianceFloor)) throw Error(ErrorCode::DegeneratePoint, "variance below floor");
  const double f = 8.0 / (n * N);
  const double g = 128.0 / (n * N * N * v);
  return {f * b11 - g * d1 * d1, f * b12 - g * d1 * d2, f * b22 - g * d2 * d2};
}

namespace detail {

inline std::array<double, 2> psd_eigenvalues(const Sym2& S, double scale) {
  auto [l1, l2] = S.eigenvalues();
  const double tol = 1e-10 * std::max({1.0, std::abs(l1), scale});
  if (l2 < -tol) throw Error(ErrorCode::NotPSD, "smallest eigenvalue " + std::to_string(l2));
  return {std::max(l1, 0.0), std::max(l2, 0.0)};
}

inline double expected_norm_from_eigenvalues(double l1, double l2) {
  if (l1 <= 0.0) return 0.0;
  const double k = std::sqrt(std::clamp(1.0 - l2 / l1, 0.0, 1.0));
  return std::sqrt(2.0 / std::numbers::pi) * std::sqrt(l1) * std::comp_ellint_2(k);
}

}  // namespace detail

/// E|Z| for Z ~ N(0, Sigma) in the plane, via the complete elliptic integral of the second kind.
inline double expected_norm_bivariate(const Sym2& Sigma) {
  const auto [l1, l2] = detail::psd_eigenvalues(Sigma, 0.0);
  return detail::expected_norm_from_eigenvalues(l1, l2);
}

/// Same quantity by composite Simpson over the angle; independent of the elliptic routine.
inline double expected_norm_quadrature(const Sym2& Sigma, int intervals = 4096) {
  const auto [l1, l2] = detail::psd_eigenvalues(Sigma, 0.0);
  const double h = (std::numbers::pi / 2) / intervals;
  auto f = [&](double t) { return std::sqrt(l1 * std::cos(t) * std::cos(t) + l2 * std::sin(t) * std::sin(t)); };
  double acc = f(0.0) + f(std::numbers::pi / 2);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  const double mean = acc * h / 3.0 / (std::numbers::pi / 2);
  return std::sqrt(std::numbers::pi / 2) * mean;
}

namespace detail {

inline double density_from_moments(const LocalMoments& m) {
  const auto [l1, l2] = psd_eigenvalues(m.Theta, m.C.trace());
  return expected_norm_from_eigenvalues(l1, l2) / std::sqrt(2 * std::numbers::pi * m.v);
}

}  // namespace detail

/// K_1(x) = E[|grad f| | f = 0] / sqrt(2 pi v).
inline double zero_density(const LatticeSet& set, Point x) {
  const auto m = local_moments(set, x);
  // a single class gives a rank-one field whose conditioned gradient vanishes
  if (set.classes.size() == 1) return 0.0;
  return detail::density_from_moments(m);
}

struct SingularPartition {
  double c0 = 0.0;
  double eps0 = 0.0;
  int probes = 0;
  std::size_t K = 0;
  std::vector<std::uint8_t> flags;  // K x K row-major, 1 = singular
  double measure = 0.0;

  bool singular(std::size_t i, std::size_t j) const { return flags[i * K + j] != 0; }
};

/// Squares of side 1/K, K = floor(sqrt n / c0) + 1, probed on a p x p sub-lattice
/// including corners. A degenerate probe is treated as s = 1 with the Gamma
/// tests skipped.
inline SingularPartition singular_partition(const LatticeSet& set, double c0 = 0.25, double eps0 = 0.1,
                                            int probes = 3, unsigned threads = 1) {
  detail::require_classes(set);
  if (!(c0 > 0.0) || !(eps0 > 0.0) || probes < 2)
    throw Error(ErrorCode::InvalidArgument, "need c0 > 0, eps0 > 0 and at least 2 probes per side");
  SingularPartition sp;
  sp.c0 = c0;
  sp.eps0 = eps0;
  sp.probes = probes;
  sp.K = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(set.n)) / c0)) + 1;
  const std::size_t K = sp.K;
  const std::size_t P = K * static_cast<std::size_t>(probes - 1) + 1;
  std::vector<double> nodes(P);
  for (std::size_t i = 0; i < P; ++i) nodes[i] = static_cast<double>(i) / static_cast<double>(P - 1);
  const detail::TrigTable table(set, nodes);
  const double N = static_cast<double>(set.size());
  const double n = static_cast<double>(set.n);

  // violation flag per probe node
  std::vector<std::uint8_t> bad(P * P);
  parallel_for(P, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < P; ++j) {
      const auto raw = table.at(i, j);
      const auto m = detail::finish(raw, N, n);
      bool b;
      if (!m) {
        b = 1.0 > eps0;
      } else {
        b = std::abs(m->s) > eps0 || std::abs(m->Gamma.trace()) > eps0 || std::abs(m->Gamma.det()) > eps0;
      }
      bad[i * P + j] = b ? 1 : 0;
    }
  });
  sp.flags.assign(K * K, 0);
  std::size_t count = 0;
  const auto step = static_cast<std::size_t>(probes - 1);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b) {
      bool any = false;
      for (std::size_t i = a * step; i <= (a + 1) * step && !any; ++i)
        for (std::size_t j = b * step; j <= (b + 1) * step && !any; ++j) any = bad[i * P + j] != 0;
      sp.flags[a * K + b] = any ? 1 : 0;
      count += any ? 1 : 0;
    }
  sp.measure = static_cast<double>(count) / static_cast<double>(K * K);
  return sp;
}

struct ExpansionTerms {
  double leading = 0.0;  // sqrt(lambda)/(2 sqrt 2), lambda = pi^2 n
  double L = 0.0;        // second-order term
  double bound = 0.0;    // sqrt(n) (|s|^3 + |Gamma|_F^3)
  double K1 = 0.0;       // exact density at the same point
};

inline double leading_density(u64 n) {
  return std::numbers::pi * std::sqrt(static_cast<double>(n)) / (2 * std::numbers::sqrt2);
}

inline double expansion_L(double n, double s, const Sym2& G) {
  const double tr = G.trace();
  return std::sqrt(n) * std::numbers::pi / (4 * std::numbers::sqrt2) *
         (s + tr / 2 + 0.75 * s * s + 0.25 * s * tr - G.trace_of_square() / 16 - tr * tr / 32);
}

inline ExpansionTerms perturbative_terms(const LatticeSet& set, Point x) {
  const auto m = local_moments(set, x);
  const double n = static_cast<double>(set.n);
  ExpansionTerms t;
  t.leading = leading_density(set.n);
  t.L = expansion_L(n, m.s, m.Gamma);
  const double g = m.Gamma.frobenius();
  t.bound = std::sqrt(n) * (std::abs(m.s) * m.s * m.s + g * g * g);
  t.K1 = set.classes.size() == 1 ? 0.0 : detail::density_from_moments(m);
  return t;
}

/// C_n = -(1 + 4 nu4) / (16 N).
inline double correction_term(const LatticeSet& set) {
  detail::require_classes(set);
  const auto st = angular_stats(set);
  return -(1.0 + 4.0 * st.nu4) / (16.0 * static_cast<double>(st.N));
}

struct MomentItem {
  std::string name;
  double value = 0.0;             // over the whole square
  double value_nonsingular = 0.0; // restricted to nonsingular squares (not renormalised)
  double prediction = 0.0;
  double residual = 0.0;          // value - prediction
};

struct MomentReport {
  u64 n = 0;
  std::size_t N = 0;
  double nu4 = 0.0;
  double m4 = 0.0;
  std::size_t exact_grid = 0;     // M_e
  std::size_t midpoint_grid = 0;  // cells per axis for the Gamma integrals
  double singular_measure = 0.0;
  std::vector<MomentItem> items;  // s, s2, s3, trG, s_trG, trG2, trG_sq, trG_cubed

  const MomentItem& item(std::string_view name) const {
    for (const auto& it : items)
      if (it.name == name) return it;
    throw Error(ErrorCode::InvalidArgument, "no moment named " + std::string(name));
  }
};

struct MomentParams {
  double c0 = 0.25;
  double eps0 = 0.1;
  int probes = 3;
  std::size_t cells_per_square = 0;  // 0: smallest m >= 2 with K m >= 6 sqrt n
  unsigned threads = 1;
};

/// Integrals of s, s^2, s^3 on the exact grid M_e = 8 floor(sqrt n) + 3 (every
/// frequency present is an integer below M_e / 2), and of the Gamma terms by
/// the midpoint rule on cells nested in the singular-partition squares.
inline MomentReport moment_integrals(const LatticeSet& set, const MomentParams& p = {}) {
  detail::require_classes(set);
  constexpr double pi = std::numbers::pi;
  const auto st = angular_stats(set);
  const double N = static_cast<double>(set.size());
  const double n = static_cast<double>(set.n);
  MomentReport rep;
  rep.n = set.n;
  rep.N = set.size();
  rep.nu4 = st.nu4;
  rep.m4 = st.m4;

  // exact trig quadrature
  const std::size_t Me = 8 * isqrt(set.n) + 3;
  rep.exact_grid = Me;
  const std::size_t K = set.classes.size();
  std::vector<double> sq1(Me * K), sq2(Me * K);
  for (std::size_t i = 0; i < Me; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const double x = static_cast<double>(i) / static_cast<double>(Me);
      const double a = std::sin(pi * set.classes[k].x * x);
      const double b = std::sin(pi * set.classes[k].y * x);
      sq1[i * K + k] = a * a;
      sq2[i * K + k] = b * b;
    }
  std::vector<double> r1(Me), r2(Me), r3(Me);
  parallel_for(Me, p.threads, [&](std::size_t i) {
    std::vector<double> a1(Me), a2(Me), a3(Me);
    for (std::size_t j = 0; j < Me; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < K; ++k) v += sq1[i * K + k] * sq2[j * K + k];
      const double s = 1.0 - 16.0 / N * v;
      a1[j] = s;
      a2[j] = s * s;
      a3[j] = s * s * s;
    }
    r1[i] = pairwise_sum(a1);
    r2[i] = pairwise_sum(a2);
    r3[i] = pairwise_sum(a3);
  });
  const double we = 1.0 / (static_cast<double>(Me) * static_cast<double>(Me));
  const double int_s = pairwise_sum(r1) * we;
  const double int_s2 = pairwise_sum(r2) * we;
  const double int_s3 = pairwise_sum(r3) * we;

  // midpoint quadrature for the Gamma terms
  const auto part = singular_partition(set, p.c0, p.eps0, p.probes, p.threads);
  rep.singular_measure = part.measure;
  std::size_t m = p.cells_per_square;
  if (m == 0) {
    m = 2;
    while (static_cast<double>(part.K * m) < 6.0 * std::sqrt(n)) ++m;
  }
  const std::size_t M = part.K * m;
  rep.midpoint_grid = M;
  std::vector<double> nodes(M);
  for (std::size_t i = 0; i < M; ++i) nodes[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(M);
  const detail::TrigTable table(set, nodes);
  constexpr int T = 5;  // trG, s trG, tr(G^2), (trG)^2, (trG)^3
  std::vector<double> rows_all(M * T), rows_ns(M * T);
  parallel_for(M, p.threads, [&](std::size_t i) {
    std::vector<std::array<double, T>> all(M), ns(M);
    for (std::size_t j = 0; j < M; ++j) {
      const auto mm = detail::finish(table.at(i, j), N, n);
      std::array<double, T> t{};
      if (mm) {
        const double tr = mm->Gamma.trace();
        t = {tr, mm->s * tr, mm->Gamma.trace_of_square(), tr * tr, tr * tr * tr};
      }
      all[j] = t;
      ns[j] = part.singular(i / m, j / m) ? std::array<double, T>{} : t;
    }
    std::vector<double> col(M);
    for (int q = 0; q < T; ++q) {
      for (std::size_t j = 0; j < M; ++j) col[j] = all[j][static_cast<std::size_t>(q)];
      rows_all[static_cast<std::size_t>(q) * M + i] = pairwise_sum(col);
      for (std::size_t j = 0; j < M; ++j) col[j] = ns[j][static_cast<std::size_t>(q)];
      rows_ns[static_cast<std::size_t>(q) * M + i] = pairwise_sum(col);
    }
  });
  const double wm = 1.0 / (static_cast<double>(M) * static_cast<double>(M));
  auto total = [&](const std::vector<double>& rows, int q) {
    return pairwise_sum(std::span<const double>(rows).subspan(static_cast<std::size_t>(q) * M, M)) * wm;
  };

  auto add = [&](std::string name, double value, double value_ns, double prediction) {
    rep.items.push_back({std::move(name), value, value_ns, prediction, value - prediction});
  };
  // the s-integrals are not restricted; their nonsingular column repeats the full value
  add("s", int_s, int_s, 0.0);
  add("s2", int_s2, int_s2, 5.0 / N);
  add("s3", int_s3, int_s3, 0.0);
  add("trG", total(rows_all, 0), total(rows_ns, 0), -6.0 / N);
  add("s_trG", total(rows_all, 1), total(rows_ns, 1), 2.0 / N);
  add("trG2", total(rows_all, 2), total(rows_ns, 2), 4.0 / N * (1.0 + 32.0 * st.m4));
  add("trG_sq", total(rows_all, 3), total(rows_ns, 3), 4.0 / N * (64.0 * st.m4 - 3.0));
  add("trG_cubed", total(rows_all, 4), total(rows_ns, 4), 0.0);
  return rep;
}

struct KacRiceParams {
  std::size_t mq = 0;        // cells per axis; 0 means 40 ceil(sqrt n)
  double tolerance = 0.01;   // relative change allowed on doubling
  bool check_convergence = true;
  unsigned threads = 1;
};

struct KacRiceResult {
  u64 n = 0;
  std::size_t N = 0;
  double nu4 = 0.0;
  u64 Q = 1;
  std::size_t mq = 0;
  double integral = 0.0;
  double integral_refined = 0.0;  // at 2 mq, NaN when not computed
  double grid_term = 0.0;
  double total = 0.0;
  double leading = 0.0;
  double correction_pred = 0.0;  // leading * C_n
  double convergence = 0.0;      // |refined - integral| / |refined|
  std::size_t degenerate_cells = 0;
};

inline std::size_t default_mq(u64 n) {
  return 40 * static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

namespace detail {

// Midpoint rule for K_1 over the unit square with M cells per axis. K_1 is
// invariant under x1 <-> x2 and under x_i -> 1 - x_i, so for even M only the
// cells i <= j of the lower-left quarter are evaluated.
inline std::pair<double, std::size_t> integrate_density(const LatticeSet& set, std::size_t M, unsigned threads) {
  constexpr double pi = std::numbers::pi;
  const double N = static_cast<double>(set.size());
  const double n = static_cast<double>(set.n);
  if (set.classes.size() == 1) return {0.0, 0};
  const double h = 1.0 / static_cast<double>(M);
  const bool folded = M % 2 == 0;
  const std::size_t H = folded ? M / 2 : M;
  std::vector<double> nodes(H);
  for (std::size_t i = 0; i < H; ++i) nodes[i] = (static_cast<double>(i) + 0.5) * h;
  const TrigTable table(set, nodes);

  auto refine = [&](std::size_t i, std::size_t j) {
    double acc = 0.0;
    int used = 0;
    for (double di : {-0.25, 0.25})
      for (double dj : {-0.25, 0.25}) {
        const double x1 = nodes[i] + di * h, x2 = nodes[j] + dj * h;
        RawMoments r;
        for (std::size_t k = 0; k < table.K; ++k) {
          const double a = pi * table.mu1[k] * x1, b = pi * table.mu2[k] * x2;
          const double s1 = std::sin(a), c1 = std::cos(a), s2 = std::sin(b), c2 = std::cos(b);
          const auto one = accumulate(1, &table.mu1[k], &table.mu2[k], &s1, &c1, &s2, &c2);
          r.v += one.v, r.b1 += one.b1, r.b2 += one.b2, r.c11 += one.c11, r.c12 += one.c12, r.c22 += one.c22;
        }
        if (const auto m = finish(r, N, n)) {
          acc += density_from_moments(*m);
          ++used;
        }
      }
    return used ? acc / used : 0.0;
  };

  std::vector<double> rows(H);
  std::vector<std::size_t> degenerate(H, 0);
  parallel_for(H, threads, [&](std::size_t i) {
    std::vector<double> vals;
    vals.reserve(H);
    for (std::size_t j = folded ? i : 0; j < H; ++j) {
      const double w = folded && j > i ? 2.0 : 1.0;
      const auto m = finish(table.at(i, j), N, n);
      double k1;
      if (m) {
        k1 = density_from_moments(*m);
      } else {
        ++degenerate[i];
        k1 = refine(i, j);
      }
      vals.push_back(w * k1);
    }
    rows[i] = pairwise_sum(vals);
  });
  const double scale = (folded ? 4.0 : 1.0) * h * h;
  std::size_t deg = 0;
  for (auto d : degenerate) deg += d;
  return {pairwise_sum(rows) * scale, deg};
}

}  // namespace detail

/// E[L_n] = integral of K_1 over the square + 2 (Q_n - 1).
inline KacRiceResult kac_rice_expected_length(const LatticeSet& set, const KacRiceParams& p = {}) {
  detail::require_classes(set);
  KacRiceResult r;
  r.n = set.n;
  r.N = set.size();
  r.nu4 = angular_stats(set).nu4;
  r.Q = grid_number(set.n);
  r.mq = p.mq ? p.mq : default_mq(set.n);
  if (r.mq < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 quadrature cells per axis");
  const auto [integral, deg] = detail::integrate_density(set, r.mq, p.threads);
  r.integral = integral;
  r.degenerate_cells = deg;
  r.grid_term = 2.0 * static_cast<double>(r.Q - 1);
  r.total = r.integral + r.grid_term;
  r.leading = leading_density(set.n);
  r.correction_pred = r.leading * correction_term(set);
  r.integral_refined = std::numeric_limits<double>::quiet_NaN();
  if (p.check_convergence) {
    r.integral_refined = detail::integrate_density(set, 2 * r.mq, p.threads).first;
    const double denom = std::abs(r.integral_refined);
    r.convergence = denom > 1e-300 ? std::abs(r.integral_refined - r.integral) / denom : 0.0;
    if (r.convergence > p.tolerance)
      throw Error(ErrorCode::NonConvergent, "Kac-Rice integral changed by " + std::to_string(r.convergence) +
                                                " relative on doubling the grid");
  }
  return r;
}

}  // namespace arw
