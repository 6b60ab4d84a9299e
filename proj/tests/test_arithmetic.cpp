#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "arw/arithmetic.hpp"

using namespace arw;

namespace {

// Oracle: r_2 by counting all (x, y) in the square box.
u64 r2_bruteforce(u64 n) {
  const auto r = static_cast<i64>(std::sqrt(static_cast<double>(n))) + 1;
  u64 c = 0;
  for (i64 x = -r; x <= r; ++x)
    for (i64 y = -r; y <= r; ++y)
      if (static_cast<u64>(x * x + y * y) == n) ++c;
  return c;
}

// Oracle: nu4 through floating-point angles.
double nu4_by_angles(const LatticeSet& s) {
  double acc = 0.0;
  for (const auto& p : s.points) acc += std::cos(4.0 * std::atan2(static_cast<double>(p.y), static_cast<double>(p.x)));
  return acc / static_cast<double>(s.size());
}

}  // namespace

TEST(Factorize, Examples) {
  EXPECT_TRUE(factorize(1).factors.empty());
  EXPECT_EQ(factorize(3060).factors, (std::vector<PrimeFactor>{{2, 2}, {3, 2}, {5, 1}, {17, 1}}));
  EXPECT_EQ(factorize(170).factors, (std::vector<PrimeFactor>{{2, 1}, {5, 1}, {17, 1}}));
  EXPECT_THROW(factorize(0), Error);
}

TEST(Factorize, ProductAndOrder) {
  for (u64 n = 1; n <= 5000; ++n) {
    const auto f = factorize(n);
    EXPECT_EQ(f.value(), n);
    for (std::size_t i = 0; i < f.factors.size(); ++i) {
      EXPECT_GE(f.factors[i].exponent, 1);
      if (i) EXPECT_LT(f.factors[i - 1].prime, f.factors[i].prime);
    }
  }
}

TEST(Representable, Examples) {
  EXPECT_TRUE(is_representable(2));
  EXPECT_FALSE(is_representable(3));
  EXPECT_TRUE(is_representable(765));
  EXPECT_FALSE(is_representable(21));
}

TEST(Lattice, SmallSets) {
  const auto s5 = enumerate_lattice_set(5);
  EXPECT_EQ(s5.size(), 8u);
  EXPECT_EQ(s5.classes, (std::vector<LatticePoint>{{1, 2}, {2, 1}}));
  const auto s2 = enumerate_lattice_set(2);
  EXPECT_EQ(s2.size(), 4u);
  EXPECT_EQ(s2.classes, (std::vector<LatticePoint>{{1, 1}}));
  const auto s25 = enumerate_lattice_set(25);
  EXPECT_EQ(s25.size(), 12u);
  EXPECT_EQ(s25.classes, (std::vector<LatticePoint>{{3, 4}, {4, 3}}));
  EXPECT_EQ(s25.axis_points, (std::vector<LatticePoint>{{-5, 0}, {0, -5}, {0, 5}, {5, 0}}));
  try {
    enumerate_lattice_set(3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotRepresentable);
  }
}

TEST(Lattice, Invariants) {
  for (u64 n = 1; n <= 10000; ++n) {
    const auto f = factorize(n);
    const u64 r2 = r2_from_factorization(f);
    if (!is_representable(f)) {
      EXPECT_EQ(r2, 0u);
      continue;
    }
    const auto s = enumerate_lattice_set(n);
    ASSERT_EQ(s.size(), r2) << n;
    for (const auto& p : s.points) {
      EXPECT_EQ(static_cast<u64>(p.x * p.x + p.y * p.y), n);
      EXPECT_TRUE(std::binary_search(s.points.begin(), s.points.end(), LatticePoint{-p.x, p.y}));
      EXPECT_TRUE(std::binary_search(s.points.begin(), s.points.end(), LatticePoint{p.y, p.x}));
    }
    EXPECT_EQ(s.classes.size(), (s.size() - s.axis_points.size()) / 4);
    EXPECT_EQ(!s.axis_points.empty(), is_perfect_square(n));
    i128 sum_x2 = 0;
    for (const auto& p : s.points) sum_x2 += static_cast<i128>(p.x) * p.x;
    EXPECT_TRUE(sum_x2 * 2 == static_cast<i128>(n) * static_cast<i128>(s.size())) << n;
    if (!is_perfect_square(n)) {
      i128 cls = 0;
      for (const auto& p : s.classes) cls += static_cast<i128>(p.x) * p.x;
      EXPECT_TRUE(cls * 8 == static_cast<i128>(n) * static_cast<i128>(s.size())) << n;
    }
  }
}

TEST(Lattice, R2Oracle) {
  for (u64 n = 1; n <= 600; ++n) EXPECT_EQ(detail::scan_lattice_set(n).size(), r2_bruteforce(n)) << n;
}

TEST(GridNumber, Examples) {
  EXPECT_EQ(grid_number(170), 1u);
  EXPECT_EQ(grid_number(765), 3u);
  EXPECT_EQ(grid_number(1000), 2u);
  EXPECT_EQ(grid_number(3060), 6u);
  EXPECT_THROW(grid_number(3), Error);
}

TEST(GridNumber, EqualsGcdAndDividesSquare) {
  for (u64 n = 1; n <= 10000; ++n) {
    if (!is_representable(n)) continue;
    const u64 q = grid_number(n);
    EXPECT_EQ(q, first_coordinate_gcd(enumerate_lattice_set(n))) << n;
    EXPECT_EQ(n % (q * q), 0u);
  }
}

TEST(Angular, Examples) {
  EXPECT_NEAR(angular_stats(enumerate_lattice_set(2)).nu4, -1.0, 1e-15);
  EXPECT_NEAR(angular_stats(enumerate_lattice_set(5)).nu4, -7.0 / 25.0, 1e-15);
  EXPECT_NEAR(angular_stats(enumerate_lattice_set(25)).nu4, -143.0 / 625.0, 1e-15);
}

TEST(Angular, Properties) {
  for (u64 n = 1; n <= 3000; ++n) {
    const auto s = detail::scan_lattice_set(n);
    if (s.points.empty()) continue;
    const auto st = angular_stats(s);
    EXPECT_GE(st.nu4, -1.0);
    EXPECT_LE(st.nu4, 1.0);
    EXPECT_NEAR(st.nu4, nu4_by_angles(s), 1e-12);
    EXPECT_LT(std::abs(angular_fourier(s, 4).imag()), 1e-12);
    for (int k : {1, 2, 3, 5, 6, 7}) EXPECT_LT(std::abs(angular_fourier(s, k)), 1e-12) << n << " " << k;
    if (!is_perfect_square(n)) EXPECT_NEAR(st.m4, (3.0 + st.nu4) / 32.0, 1e-12) << n;
  }
}

TEST(AngularTarget, Examples) {
  auto has = [](const std::vector<AngularTarget>& v, u64 n) {
    return std::any_of(v.begin(), v.end(), [&](const AngularTarget& t) { return t.n == n; });
  };
  const auto a = find_angular_target(-1.0, 0.0, 100);
  for (u64 n : {2, 8, 18}) EXPECT_TRUE(has(a, n)) << n;
  const auto b = find_angular_target(1.0, 0.0, 10);
  for (u64 n : {1, 4, 9}) EXPECT_TRUE(has(b, n)) << n;
  const auto c = find_angular_target(0.5, 0.6, 100);
  for (const auto& t : b) EXPECT_TRUE(has(c, t.n));
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i - 1].N, c[i].N);
  for (const auto& t : c) {
    EXPECT_TRUE(is_representable(t.n));
    EXPECT_LE(std::abs(t.nu4 - 0.5), 0.6 + 1e-12);
  }
  EXPECT_THROW(find_angular_target(0.0, -1.0, 10), Error);
}
