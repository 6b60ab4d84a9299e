#pragma once

// Exact counts of ordered l-tuples of lattice points:
//   semi-correlations  M_l: first coordinates sum to 0,
//   correlations       R_l: vector sum is 0,
//   diagonal           D_l: tuples cancelling in antipodal pairs,
//   quasi-correlations     : 0 < |vector sum| < n^(1/2 - eps).
// D_l ⊆ R_l ⊆ M_l for every n and even l.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <bit>
#include <numeric>
#include <ostream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "arw/arithmetic.hpp"
#include "arw/error.hpp"
#include "arw/parallel.hpp"

namespace arw {

using Count = unsigned __int128;

inline std::string to_string(Count c) {
  if (c == 0) return "0";
  std::string s;
  while (c > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(c % 10)));
    c /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

inline double to_double(Count c) { return static_cast<double>(static_cast<long double>(c)); }

/// Projected elementary steps above which a count is refused.
inline constexpr double kStepBudget = 1e9;
inline constexpr int kMaxLength = 12;

namespace detail {

inline int check_length(int l, int max_length = kMaxLength) {
  if (l < 2 || l % 2 != 0)
    throw Error(ErrorCode::OddLength, "tuple length must be even and >= 2, got " + std::to_string(l));
  if (l > max_length)
    throw Error(ErrorCode::LengthTooLarge,
                "tuple length " + std::to_string(l) + " exceeds " + std::to_string(max_length));
  return l / 2;
}

inline std::uint64_t key2(i64 x, i64 y) {
  return (static_cast<std::uint64_t>(x) << 32) ^ (static_cast<std::uint64_t>(y) & 0xFFFFFFFFULL);
}

struct Key2Hash {
  std::size_t operator()(std::uint64_t k) const noexcept {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

using SumMap = std::unordered_map<std::uint64_t, Count, Key2Hash>;

// Distribution of vector sums of ordered k-tuples, built by repeated sparse
// convolution with the point set.
inline SumMap vector_sum_distribution(const LatticeSet& set, int k) {
  SumMap cur;
  cur[key2(0, 0)] = 1;
  for (int level = 0; level < k; ++level) {
    SumMap next;
    next.reserve(cur.size() * std::min<std::size_t>(set.size(), 16));
    for (const auto& [key, c] : cur) {
      const auto x = static_cast<i64>(static_cast<std::int32_t>(key >> 32));
      const auto y = static_cast<i64>(static_cast<std::int32_t>(key & 0xFFFFFFFFULL));
      for (const auto& p : set.points) next[key2(x + p.x, y + p.y)] += c;
    }
    cur.swap(next);
  }
  return cur;
}

inline double projected_correlation_steps(const LatticeSet& set, int k) {
  // each level touches at most min(N^j, (2 j R + 1)^2) keys, times N points
  const double N = static_cast<double>(set.size());
  const double R = std::sqrt(static_cast<double>(set.n));
  double steps = 0.0;
  double keys = 1.0;
  for (int j = 0; j < k; ++j) {
    steps += keys * N;
    keys = std::min(keys * N, std::pow(2.0 * (j + 1) * R + 1.0, 2.0));
  }
  return steps;
}

}  // namespace detail

/// |M_l(n)| from the dense distribution of first-coordinate sums of l/2-tuples.
inline Count count_semi_correlations(const LatticeSet& set, int l) {
  const int k = detail::check_length(l);
  const auto R = static_cast<i64>(isqrt(set.n));
  // multiplicity of each first coordinate value
  std::vector<std::pair<i64, Count>> mult;
  for (const auto& p : set.points) {
    if (!mult.empty() && mult.back().first == p.x)
      mult.back().second += 1;
    else
      mult.push_back({p.x, 1});
  }
  const double steps = static_cast<double>(k) * k * static_cast<double>(2 * R + 1) * mult.size();
  if (steps > kStepBudget)
    throw Error(ErrorCode::BudgetExceeded, "semi-correlation count needs ~" + std::to_string(steps) + " steps");

  // dist[t + offset] = number of j-tuples with first-coordinate sum t
  std::vector<Count> dist{1};
  i64 offset = 0;
  for (int level = 0; level < k; ++level) {
    std::vector<Count> next(dist.size() + 2 * static_cast<std::size_t>(R), 0);
    for (std::size_t t = 0; t < dist.size(); ++t) {
      if (dist[t] == 0) continue;
      for (const auto& [x, m] : mult) next[t + static_cast<std::size_t>(x + R)] += dist[t] * m;
    }
    dist.swap(next);
    offset += R;
  }
  Count total = 0;
  const auto size = static_cast<i64>(dist.size());
  for (i64 t = 0; t < size; ++t) {
    const i64 mirror = 2 * offset - t;  // index of -(t - offset)
    total += dist[static_cast<std::size_t>(t)] * dist[static_cast<std::size_t>(mirror)];
  }
  return total;
}

/// |R_l(n)| by meet-in-the-middle on 2-D partial sums.
inline Count count_correlations(const LatticeSet& set, int l) {
  const int k = detail::check_length(l);
  const double steps = detail::projected_correlation_steps(set, k);
  if (steps > kStepBudget)
    throw Error(ErrorCode::BudgetExceeded, "correlation count needs ~" + std::to_string(steps) + " steps");
  const auto half = detail::vector_sum_distribution(set, k);
  Count total = 0;
  for (const auto& [key, c] : half) {
    const auto x = static_cast<i64>(static_cast<std::int32_t>(key >> 32));
    const auto y = static_cast<i64>(static_cast<std::int32_t>(key & 0xFFFFFFFFULL));
    if (auto it = half.find(detail::key2(-x, -y)); it != half.end()) total += c * it->second;
  }
  return total;
}

/// |D_l(n)| for l in {2, 4, 6} by inclusion-exclusion over perfect matchings of
/// the l positions. Tuples obeying a set of matchings form a constraint graph
/// (edge = "antipodal"); each bipartite component contributes one free point
/// and an odd cycle forces mu = -mu, impossible on E_n.
inline Count count_diagonal(const LatticeSet& set, int l) {
  detail::check_length(l, 6);
  std::vector<std::vector<std::pair<int, int>>> matchings;
  std::vector<std::pair<int, int>> current;
  std::vector<bool> used(static_cast<std::size_t>(l), false);
  auto build = [&](auto&& self) -> void {
    int first = -1;
    for (int i = 0; i < l; ++i)
      if (!used[static_cast<std::size_t>(i)]) {
        first = i;
        break;
      }
    if (first < 0) {
      matchings.push_back(current);
      return;
    }
    used[static_cast<std::size_t>(first)] = true;
    for (int j = first + 1; j < l; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      used[static_cast<std::size_t>(j)] = true;
      current.emplace_back(first, j);
      self(self);
      current.pop_back();
      used[static_cast<std::size_t>(j)] = false;
    }
    used[static_cast<std::size_t>(first)] = false;
  };
  build(build);

  const auto N = static_cast<Count>(set.size());
  const std::size_t m = matchings.size();
  // signed accumulation in two unsigned halves
  Count plus = 0;
  Count minus = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    // union-find with parity
    std::array<int, 6> parent{};
    std::array<int, 6> parity{};
    for (int i = 0; i < l; ++i) parent[static_cast<std::size_t>(i)] = i;
    auto find = [&](int a) {
      int p = 0;
      while (parent[static_cast<std::size_t>(a)] != a) {
        p ^= parity[static_cast<std::size_t>(a)];
        a = parent[static_cast<std::size_t>(a)];
      }
      return std::pair{a, p};
    };
    bool consistent = true;
    for (std::size_t b = 0; b < m && consistent; ++b) {
      if (!(mask >> b & 1)) continue;
      for (const auto& [i, j] : matchings[b]) {
        auto [ri, pi] = find(i);
        auto [rj, pj] = find(j);
        if (ri == rj) {
          if (pi == pj) consistent = false;  // odd cycle
        } else {
          parent[static_cast<std::size_t>(ri)] = rj;
          parity[static_cast<std::size_t>(ri)] = pi ^ pj ^ 1;
        }
      }
    }
    if (!consistent) continue;
    int components = 0;
    for (int i = 0; i < l; ++i)
      if (parent[static_cast<std::size_t>(i)] == i) ++components;
    Count term = 1;
    for (int c = 0; c < components; ++c) term *= N;
    if (std::popcount(mask) % 2 == 1)
      plus += term;
    else
      minus += term;
  }
  return plus - minus;
}

/// Ordered l-tuples whose vector sum u satisfies 0 < |u| < n^(1/2 - eps).
inline Count count_quasi_correlations(const LatticeSet& set, int l, double eps) {
  const int k = detail::check_length(l);
  if (!(eps > 0.0 && eps < 0.5))
    throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1/2)");
  const double threshold = std::pow(static_cast<double>(set.n), 0.5 - eps);
  const auto radius = static_cast<i64>(std::ceil(threshold));
  const double shells = (2.0 * radius + 1) * (2.0 * radius + 1);
  const double keys = std::min(std::pow(static_cast<double>(set.size()), k),
                               std::pow(2.0 * k * std::sqrt(static_cast<double>(set.n)) + 1, 2.0));
  if (detail::projected_correlation_steps(set, k) + shells * keys > kStepBudget)
    throw Error(ErrorCode::BudgetExceeded, "quasi-correlation count exceeds the step budget");
  const auto half = detail::vector_sum_distribution(set, k);
  Count total = 0;
  for (i64 ux = -radius; ux <= radius; ++ux) {
    for (i64 uy = -radius; uy <= radius; ++uy) {
      if (ux == 0 && uy == 0) continue;
      const double norm = std::hypot(static_cast<double>(ux), static_cast<double>(uy));
      if (!(norm < threshold)) continue;
      // number of l-tuples with total u = sum_v h(v) h(u - v)
      for (const auto& [key, c] : half) {
        const auto x = static_cast<i64>(static_cast<std::int32_t>(key >> 32));
        const auto y = static_cast<i64>(static_cast<std::int32_t>(key & 0xFFFFFFFFULL));
        if (auto it = half.find(detail::key2(ux - x, uy - y)); it != half.end()) total += c * it->second;
      }
    }
  }
  return total;
}

struct CorrelationReport {
  u64 n = 0;
  int l = 0;
  std::size_t N = 0;
  Count M_count = 0;
  std::optional<Count> R_count;
  std::optional<Count> D_count;
  std::vector<std::pair<double, Count>> quasi_counts;  // (eps, count)
  double ratio_M = 0.0;  // M_count / N^(l/2)
};

inline CorrelationReport correlation_report(const LatticeSet& set, int l, bool with_correlations,
                                            std::span<const double> quasi_eps = {}) {
  CorrelationReport r;
  r.n = set.n;
  r.l = l;
  r.N = set.size();
  r.M_count = count_semi_correlations(set, l);
  r.ratio_M = to_double(r.M_count) / std::pow(static_cast<double>(r.N), l / 2);
  if (with_correlations) r.R_count = count_correlations(set, l);
  if (with_correlations && l <= 6) r.D_count = count_diagonal(set, l);
  for (double eps : quasi_eps) r.quasi_counts.emplace_back(eps, count_quasi_correlations(set, l, eps));
  return r;
}

struct ScanRow {
  u64 n = 0;
  std::size_t N = 0;
  int l = 0;
  Count M_count = 0;
  std::optional<Count> R_count;
  Count D_count = 0;  // 0 when l > 6
  double ratio = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  std::vector<std::pair<double, double>> fractions;  // (C, fraction with M <= C N^(l/2))
};

/// Semi-correlation counts for every n in [n_min, n_max] with a nonempty class set.
inline ScanResult scan_semi_correlations(u64 n_min, u64 n_max, int l, std::span<const double> thresholds,
                                         bool with_correlations = false, unsigned threads = 1) {
  detail::check_length(l);
  if (n_min < 1) n_min = 1;
  if (n_max < n_min) throw Error(ErrorCode::InvalidArgument, "empty range");
  const double per_n = static_cast<double>(l) * l * 2.0 * std::sqrt(static_cast<double>(n_max)) * 64;
  if (per_n * static_cast<double>(n_max - n_min + 1) > 50 * kStepBudget)
    throw Error(ErrorCode::BudgetExceeded, "scan range exceeds the step budget");

  const std::size_t count = n_max - n_min + 1;
  std::vector<std::optional<ScanRow>> slots(count);
  parallel_for(count, threads, [&](std::size_t i) {
    const u64 n = n_min + i;
    const auto set = detail::scan_lattice_set(n);
    if (set.classes.empty()) return;
    ScanRow row;
    row.n = n;
    row.N = set.size();
    row.l = l;
    row.M_count = count_semi_correlations(set, l);
    if (with_correlations) row.R_count = count_correlations(set, l);
    if (l <= 6) row.D_count = count_diagonal(set, l);
    row.ratio = to_double(row.M_count) / std::pow(static_cast<double>(row.N), l / 2);
    slots[i] = row;
  });
  ScanResult out;
  for (auto& s : slots)
    if (s) out.rows.push_back(*s);
  std::vector<double> sorted(thresholds.begin(), thresholds.end());
  std::sort(sorted.begin(), sorted.end());
  for (double c : sorted) {
    const auto hits = std::count_if(out.rows.begin(), out.rows.end(),
                                    [&](const ScanRow& r) { return r.ratio <= c; });
    out.fractions.emplace_back(c, out.rows.empty() ? 0.0 : static_cast<double>(hits) / out.rows.size());
  }
  return out;
}

/// CSV with header n,N,l,M_count,R_count,ratio; R_count is empty when not computed.
inline void write_scan_csv(std::ostream& os, const ScanResult& r) {
  os << "n,N,l,M_count,R_count,ratio\n";
  char ratio[40];
  for (const auto& row : r.rows) {
    std::snprintf(ratio, sizeof ratio, "%.12g", row.ratio);
    os << row.n << ',' << row.N << ',' << row.l << ',' << to_string(row.M_count) << ','
       << (row.R_count ? to_string(*row.R_count) : "") << ',' << ratio << '\n';
  }
}

}  // namespace arw
