#pragma once

// Integer and lattice-point arithmetic on circles x^2 + y^2 = n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "arw/error.hpp"

namespace arw {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;

struct PrimeFactor {
  u64 prime;
  int exponent;
  bool operator==(const PrimeFactor&) const = default;
};

struct PrimeFactorization {
  std::vector<PrimeFactor> factors;  // primes strictly increasing

  u64 value() const {
    u64 v = 1;
    for (const auto& f : factors)
      for (int e = 0; e < f.exponent; ++e) v *= f.prime;
    return v;
  }
  int exponent_of(u64 p) const {
    for (const auto& f : factors)
      if (f.prime == p) return f.exponent;
    return 0;
  }
};

struct LatticePoint {
  i64 x;  // first coordinate
  i64 y;  // second coordinate
  auto operator<=>(const LatticePoint&) const = default;
};

// E_n: all integer points on the circle of radius sqrt(n).
struct LatticeSet {
  u64 n = 0;
  std::vector<LatticePoint> points;       // full set, sorted
  std::vector<LatticePoint> classes;      // representatives with x > 0 and y > 0
  std::vector<LatticePoint> axis_points;  // points with a zero coordinate

  std::size_t size() const { return points.size(); }
};

struct AngularStats {
  double nu4 = 0.0;  // fourth Fourier coefficient of the angular measure
  double m4 = 0.0;   // sum over classes of x^4, divided by n^2 N
  std::size_t N = 0;
};

/// Floor of the square root, exact for every 64-bit input.
inline u64 isqrt(u64 n) {
  auto r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<unsigned __int128>(r) * r > n) --r;
  while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline bool is_perfect_square(u64 n) {
  const u64 r = isqrt(n);
  return r * r == n;
}

/// Trial division. factorize(1) is the empty product.
inline PrimeFactorization factorize(u64 n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "factorize requires n >= 1");
  PrimeFactorization out;
  auto take = [&](u64 p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e > 0) out.factors.push_back({p, e});
  };
  take(2);
  for (u64 p = 3; p <= n / p; p += 2) take(p);
  if (n > 1) out.factors.push_back({n, 1});
  return out;
}

/// n is a sum of two squares iff every prime = 3 mod 4 divides it to an even power.
inline bool is_representable(const PrimeFactorization& f) {
  return std::all_of(f.factors.begin(), f.factors.end(), [](const PrimeFactor& pf) {
    return pf.prime % 4 != 3 || pf.exponent % 2 == 0;
  });
}

inline bool is_representable(u64 n) { return n >= 1 && is_representable(factorize(n)); }

/// r_2(n) from the factorization: 4 * prod (e_j + 1) over primes = 1 mod 4, or 0.
inline u64 r2_from_factorization(const PrimeFactorization& f) {
  if (!is_representable(f)) return 0;
  u64 r = 4;
  for (const auto& pf : f.factors)
    if (pf.prime % 4 == 1) r *= static_cast<u64>(pf.exponent + 1);
  return r;
}

namespace detail {

// Possibly empty set; callers decide whether emptiness is an error.
inline LatticeSet scan_lattice_set(u64 n) {
  LatticeSet set;
  set.n = n;
  const u64 r = isqrt(n);
  for (u64 a = 0; a <= r; ++a) {
    const u64 rest = n - a * a;
    const u64 b = isqrt(rest);
    if (b * b != rest) continue;
    const auto x = static_cast<i64>(a);
    const auto y = static_cast<i64>(b);
    for (i64 sx : {1, -1}) {
      if (x == 0 && sx < 0) continue;
      for (i64 sy : {1, -1}) {
        if (y == 0 && sy < 0) continue;
        set.points.push_back({sx * x, sy * y});
      }
    }
    if (x > 0 && y > 0) set.classes.push_back({x, y});
  }
  std::sort(set.points.begin(), set.points.end());
  for (const auto& p : set.points)
    if (p.x == 0 || p.y == 0) set.axis_points.push_back(p);
  return set;
}

}  // namespace detail

/// Brute-force scan over x in [0, floor(sqrt n)]; O(sqrt n).
inline LatticeSet enumerate_lattice_set(u64 n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  auto set = detail::scan_lattice_set(n);
  if (set.points.empty())
    throw Error(ErrorCode::NotRepresentable, std::to_string(n) + " is not a sum of two squares");
  return set;
}

/// Q_n = 2^floor(a/2) * prod q_k^{h_k}, where 2^a || n and q_k^{2 h_k} || n for q_k = 3 mod 4.
inline u64 grid_number(u64 n) {
  const auto f = factorize(n);
  if (!is_representable(f))
    throw Error(ErrorCode::NotRepresentable, std::to_string(n) + " is not a sum of two squares");
  u64 q = 1;
  for (const auto& pf : f.factors) {
    if (pf.prime == 2) {
      for (int e = 0; e < pf.exponent / 2; ++e) q *= 2;
    } else if (pf.prime % 4 == 3) {
      for (int e = 0; e < pf.exponent / 2; ++e) q *= pf.prime;
    }
  }
  return q;
}

/// gcd of all first coordinates; equals grid_number for every n in S.
inline u64 first_coordinate_gcd(const LatticeSet& set) {
  u64 g = 0;
  for (const auto& p : set.points) g = std::gcd(g, static_cast<u64>(p.x < 0 ? -p.x : p.x));
  return g;
}

/// nu4 is summed exactly as (x^4 - 6 x^2 y^2 + y^4) / n^2 over the full set.
inline AngularStats angular_stats(const LatticeSet& set) {
  i128 num = 0;
  for (const auto& p : set.points) {
    const i128 x2 = static_cast<i128>(p.x) * p.x;
    const i128 y2 = static_cast<i128>(p.y) * p.y;
    num += x2 * x2 - 6 * x2 * y2 + y2 * y2;
  }
  i128 m4num = 0;
  for (const auto& p : set.classes) {
    const i128 x2 = static_cast<i128>(p.x) * p.x;
    m4num += x2 * x2;
  }
  const long double n2 = static_cast<long double>(set.n) * static_cast<long double>(set.n);
  const auto N = static_cast<long double>(set.size());
  AngularStats s;
  s.N = set.size();
  s.nu4 = static_cast<double>(static_cast<long double>(num) / (n2 * N));
  s.m4 = static_cast<double>(static_cast<long double>(m4num) / (n2 * N));
  return s;
}

/// General Fourier coefficient (1/N) sum exp(i k theta) of the angular measure.
inline std::complex<double> angular_fourier(const LatticeSet& set, int k) {
  std::complex<double> acc{0.0, 0.0};
  for (const auto& p : set.points) {
    const double theta = std::atan2(static_cast<double>(p.y), static_cast<double>(p.x));
    acc += std::polar(1.0, k * theta);
  }
  return acc / static_cast<double>(set.size());
}

struct AngularTarget {
  u64 n;
  std::size_t N;
  double nu4;
};

/// Exhaustive search for n <= n_max with |nu4(n) - s| <= tol, sorted by N descending (then n).
inline std::vector<AngularTarget> find_angular_target(double s, double tol, u64 n_max) {
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be nonnegative");
  std::vector<AngularTarget> out;
  for (u64 n = 1; n <= n_max; ++n) {
    const auto set = detail::scan_lattice_set(n);
    if (set.points.empty()) continue;
    const auto st = angular_stats(set);
    if (std::abs(st.nu4 - s) <= tol + 1e-15) out.push_back({n, st.N, st.nu4});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AngularTarget& a, const AngularTarget& b) { return a.N > b.N; });
  return out;
}

}  // namespace arw
