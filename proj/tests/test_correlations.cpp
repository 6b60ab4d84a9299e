#include <gtest/gtest.h>

#include <cmath>

#include "arw/correlations.hpp"

using namespace arw;

namespace {

// Exhaustive oracles over all ordered l-tuples.
struct Brute {
  Count semi = 0, corr = 0, diag = 0;
};

bool pairs_off(const std::vector<LatticePoint>& t, std::vector<bool>& used) {
  std::size_t i = 0;
  while (i < t.size() && used[i]) ++i;
  if (i == t.size()) return true;
  used[i] = true;
  for (std::size_t j = i + 1; j < t.size(); ++j) {
    if (used[j] || t[j].x != -t[i].x || t[j].y != -t[i].y) continue;
    used[j] = true;
    if (pairs_off(t, used)) return true;
    used[j] = false;
  }
  used[i] = false;
  return false;
}

Brute brute(const LatticeSet& s, int l) {
  Brute b;
  const std::size_t N = s.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(l), 0);
  std::vector<LatticePoint> t(static_cast<std::size_t>(l));
  for (;;) {
    i64 sx = 0, sy = 0;
    for (int k = 0; k < l; ++k) {
      t[static_cast<std::size_t>(k)] = s.points[idx[static_cast<std::size_t>(k)]];
      sx += t[static_cast<std::size_t>(k)].x;
      sy += t[static_cast<std::size_t>(k)].y;
    }
    if (sx == 0) {
      ++b.semi;
      if (sy == 0) {
        ++b.corr;
        std::vector<bool> used(static_cast<std::size_t>(l), false);
        if (pairs_off(t, used)) ++b.diag;
      }
    }
    int k = l - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == N) idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  return b;
}

}  // namespace

TEST(Semi, Examples) {
  EXPECT_EQ(count_semi_correlations(enumerate_lattice_set(5), 2), Count{16});
  EXPECT_EQ(count_semi_correlations(enumerate_lattice_set(2), 4), brute(enumerate_lattice_set(2), 4).semi);
}

TEST(Counts, MatchExhaustiveOracle) {
  for (u64 n = 1; n <= 130; ++n) {
    const auto s = detail::scan_lattice_set(n);
    if (s.points.empty()) continue;
    for (int l : {2, 4}) {
      const auto b = brute(s, l);
      EXPECT_EQ(count_semi_correlations(s, l), b.semi) << n << " l=" << l;
      EXPECT_EQ(count_correlations(s, l), b.corr) << n << " l=" << l;
      EXPECT_EQ(count_diagonal(s, l), b.diag) << n << " l=" << l;
    }
  }
}

TEST(Diagonal, SixAgainstOracle) {
  for (u64 n : {1, 2, 5, 25}) {
    const auto s = enumerate_lattice_set(n);
    EXPECT_EQ(count_diagonal(s, 6), brute(s, 6).diag) << n;
  }
}

TEST(Diagonal, ClosedForms) {
  for (u64 n : {5, 65, 1105, 32045}) {
    const auto s = enumerate_lattice_set(n);
    const Count N = s.size();
    EXPECT_EQ(count_diagonal(s, 2), N);
    EXPECT_EQ(count_diagonal(s, 4), 3 * N * (N - 1));
  }
}

TEST(Counts, Inclusions) {
  for (u64 n = 1; n <= 2000; ++n) {
    const auto s = detail::scan_lattice_set(n);
    if (s.points.empty()) continue;
    EXPECT_EQ(count_correlations(s, 2), Count{s.size()});
    for (int l : {4, 6}) {
      const auto r = count_correlations(s, l);
      EXPECT_LE(count_diagonal(s, l), r) << n;
      EXPECT_LE(r, count_semi_correlations(s, l)) << n;
    }
  }
}

TEST(Counts, ReflectionInvariance) {
  for (u64 n : {25, 65, 325, 1105}) {
    auto s = enumerate_lattice_set(n);
    auto r = s;
    for (auto& p : r.points) p.x = -p.x;
    std::sort(r.points.begin(), r.points.end());
    for (int l : {2, 4, 6}) {
      EXPECT_EQ(count_semi_correlations(s, l), count_semi_correlations(r, l));
      EXPECT_EQ(count_correlations(s, l), count_correlations(r, l));
      EXPECT_EQ(count_diagonal(s, l), count_diagonal(r, l));
    }
  }
}

TEST(Counts, Errors) {
  const auto s = enumerate_lattice_set(5);
  for (auto f : {count_semi_correlations, count_correlations, count_diagonal}) {
    try {
      f(s, 3);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OddLength);
    }
  }
  try {
    count_semi_correlations(s, 14);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthTooLarge);
  }
  EXPECT_THROW(count_diagonal(s, 8), Error);
  try {
    count_correlations(enumerate_lattice_set(5525ull * 13 * 17), 12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
}

TEST(Counts, LargeValuesUse128Bits) {
  // 5 * 13 * 17 * 29 * 37: N = 128, l = 12 semi-correlations exceed 2^64
  const auto s = enumerate_lattice_set(5ull * 13 * 17 * 29 * 37);
  const Count m = count_semi_correlations(s, 12);
  EXPECT_GT(m, Count{1} << 64);
  EXPECT_GE(to_double(m), std::pow(128.0, 6));
}

TEST(Quasi, AgainstOracle) {
  const auto s = enumerate_lattice_set(5);
  const double thr = std::pow(5.0, 0.4);
  Count b = 0;
  for (const auto& p : s.points)
    for (const auto& q : s.points) {
      const double r = std::hypot(static_cast<double>(p.x + q.x), static_cast<double>(p.y + q.y));
      if (r > 0 && r < thr) ++b;
    }
  EXPECT_EQ(count_quasi_correlations(s, 2, 0.1), b);
  // threshold below 1: no nonzero lattice vector is that short
  EXPECT_EQ(count_quasi_correlations(s, 4, 0.499), Count{0});
  EXPECT_THROW(count_quasi_correlations(s, 2, 0.7), Error);
}

TEST(Scan, FractionsMonotoneAndDeterministic) {
  const std::vector<double> c{1, 2, 4, 8, 16};
  const auto a = scan_semi_correlations(2, 2000, 4, c);
  const auto b = scan_semi_correlations(2, 2000, 4, c, false, 3);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].n, b.rows[i].n);
    EXPECT_EQ(a.rows[i].M_count, b.rows[i].M_count);
    EXPECT_GE(a.rows[i].M_count, a.rows[i].D_count);
  }
  for (std::size_t i = 1; i < a.fractions.size(); ++i) EXPECT_GE(a.fractions[i].second, a.fractions[i - 1].second);
}

TEST(Report, Fields) {
  const std::vector<double> eps{0.25};
  const auto r = correlation_report(enumerate_lattice_set(25), 4, true, eps);
  ASSERT_TRUE(r.R_count && r.D_count);
  EXPECT_LE(*r.D_count, *r.R_count);
  EXPECT_LE(*r.R_count, r.M_count);
  EXPECT_NEAR(r.ratio_M, to_double(r.M_count) / 144.0, 1e-12);
}
