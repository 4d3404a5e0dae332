#pragma once

// Prime-interval partitions and the truncated-exponential mollifiers built on them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "zml/dirichlet.hpp"
#include "zml/error.hpp"
#include "zml/primes.hpp"
#include "zml/summation.hpp"

namespace zml {

/// Parameters alpha_j, ell_j and intervals I_j = (T^{alpha_{j-1}}, T^{alpha_j}].
///
/// alphas[0] = 0 and alphas[j] for j = 1..J; ells[j-1] and intervals[j-1]
/// belong to interval j. A `toy` partition carries hand-picked intervals and
/// lengths instead of the geometric rule.
struct HarperPartition {
  double k = 1.0;
  double T = 0.0;
  double log_T = 0.0;  // kept separately so T may exceed the double range
  double M = 0.0;
  double base = 20.0;
  std::vector<double> alphas;
  std::vector<int> ells;
  int J = 0;
  std::vector<PrimeInterval> intervals;
  bool degenerate = false;
  bool toy = false;

  /// Exponent L with supp(N) inside [1, T^L].
  double length_exponent() const {
    return 40.0 * std::numbers::e * std::numbers::e * k * std::pow(10.0, -M / 4.0);
  }
};

/// alpha_j = base^{j-1} / (log log T)^2, ell_j = ceil(e^2 k alpha_j^{-3/4}),
/// J = max{j : alpha_j <= 10^{-M}}, from log T. T itself is stored as
/// exp(log T) and may be infinite; interval ends likewise.
inline HarperPartition build_partition_log(double k, double log_T, double M, double base = 20.0) {
  if (!(log_T > 1.0)) throw DomainError("build_partition: T must exceed e");
  if (!(k > 0.0)) throw DomainError("build_partition: k must be positive");
  if (!(base > 1.0)) throw DomainError("build_partition: base must exceed 1");
  HarperPartition p;
  p.k = k;
  p.T = std::exp(log_T);
  p.log_T = log_T;
  p.M = M;
  p.base = base;
  p.alphas.push_back(0.0);
  const double llt = std::log(log_T);
  const double ceiling = std::pow(10.0, -M);
  const double e2 = std::numbers::e * std::numbers::e;
  for (int j = 1;; ++j) {
    const double a = std::pow(base, j - 1) / (llt * llt);
    if (a > ceiling) break;
    p.alphas.push_back(a);
    p.ells.push_back(static_cast<int>(std::ceil(e2 * k * std::pow(a, -0.75))));
    p.intervals.push_back({std::exp(p.alphas[j - 1] * log_T), std::exp(a * log_T), j});
    p.J = j;
  }
  p.degenerate = p.J == 0;
  return p;
}

inline HarperPartition build_partition(double k, double T, double M, double base = 20.0) {
  if (!(T > std::numbers::e)) throw DomainError("build_partition: T must exceed e");
  HarperPartition p = build_partition_log(k, std::log(T), M, base);
  p.T = T;
  return p;
}

/// Partition with explicit intervals and truncation lengths.
inline HarperPartition toy_partition(double k, double T, std::vector<PrimeInterval> intervals,
                                     std::vector<int> ells) {
  if (intervals.size() != ells.size() || intervals.empty()) {
    throw DomainError("toy_partition: need one ell per interval and at least one interval");
  }
  if (!(T > 1.0)) throw DomainError("toy_partition: T must exceed 1");
  HarperPartition p;
  p.k = k;
  p.T = T;
  p.log_T = std::log(T);
  p.toy = true;
  p.base = std::numeric_limits<double>::quiet_NaN();
  p.alphas.push_back(0.0);
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    if (!(intervals[j].lo < intervals[j].hi)) throw DomainError("toy_partition: empty interval");
    if (j > 0 && intervals[j].lo != intervals[j - 1].hi) {
      throw DomainError("toy_partition: intervals must be contiguous");
    }
    if (ells[j] < 0) throw DomainError("toy_partition: ell must be nonnegative");
    intervals[j].index = static_cast<int>(j + 1);
    p.alphas.push_back(std::log(intervals[j].hi) / std::log(T));
  }
  p.intervals = std::move(intervals);
  p.ells = std::move(ells);
  p.J = static_cast<int>(p.intervals.size());
  return p;
}

/// Standard two-interval toy: primes {2,3} with ell 2 and {5} with ell 1.
inline HarperPartition standard_toy_partition(double k, double T) {
  return toy_partition(k, T, {{1.0, 3.0, 1}, {3.0, 5.0, 2}}, {2, 1});
}

inline int r_k(double k) {
  if (!(k > 0.0)) throw DomainError("r_k: k must be positive");
  if (k <= 0.5) return 2 + static_cast<int>(std::ceil(1.0 / k));
  return 1 + static_cast<int>(std::ceil(2.0 * k / (2.0 * k - 1.0)));
}

struct QParams {
  double c;
  int ell;
};

/// N_j(s, alpha) = E_{ell_j}(alpha P_j(s)), N = prod_j N_j, and the Q_j data.
struct MollifierFamily {
  HarperPartition partition;
  double alpha = 0.0;
  std::vector<std::vector<std::uint64_t>> interval_primes;
  std::vector<DirichletPolynomial> Pj;
  std::vector<DirichletPolynomial> Nj;
  DirichletPolynomial N;
  std::vector<QParams> Qj_params;
  int rk = 0;
  bool trivial = false;
  bool N_truncated = false;

  int J() const { return partition.J; }
  cplx coeff(std::uint64_t n) const { return N.coeff(n); }
};

/// Largest admissible index for N: min(T^L, 2^63 - 1).
inline std::uint64_t length_cap(const HarperPartition& p) {
  const double log_bound = p.length_exponent() * p.log_T;
  if (log_bound >= std::log(static_cast<double>(kMaxIndex))) return kMaxIndex;
  return static_cast<std::uint64_t>(std::floor(std::exp(log_bound)));
}

inline MollifierFamily build_family(const HarperPartition& partition, double alpha,
                                    const PrimeTable& table) {
  if (partition.J == 0) {
    throw DomainError(
        "build_family: partition has no intervals (J = 0); lower M or base, or raise T");
  }
  MollifierFamily f;
  f.partition = partition;
  f.alpha = alpha;
  f.rk = r_k(partition.k);
  const std::uint64_t cap = length_cap(partition);
  f.N = DirichletPolynomial::delta_one();
  for (int j = 0; j < partition.J; ++j) {
    auto primes = interval_primes(partition.intervals[j], table);
    std::vector<DirichletPolynomial::Term> terms;
    for (std::uint64_t p : primes) terms.emplace_back(p, cplx(1.0));
    f.Pj.push_back(DirichletPolynomial::from_terms(std::move(terms)));
    f.interval_primes.push_back(std::move(primes));
    const int ell = partition.ells[j];
    f.Nj.push_back(dp_exp_truncated(f.Pj.back(), alpha, ell));
    f.Qj_params.push_back({64.0 * std::max(2.0, partition.k + 1.5) / ell, ell});
  }
  std::size_t full = 1;
  for (const auto& nj : f.Nj) {
    f.N = dp_mul(f.N, nj, cap);
    full *= nj.size();
  }
  // alpha = 0 collapses every N_j to 1, so compare against the expected size
  // only when no coefficient can vanish.
  f.N_truncated = alpha != 0.0 && f.N.size() < full;
  return f;
}

/// Family with J = 0 and N = 1.
inline MollifierFamily trivial_family(double k, double T) {
  MollifierFamily f;
  f.partition.k = k;
  f.partition.T = T;
  f.partition.log_T = std::log(T);
  f.partition.degenerate = true;
  f.partition.alphas = {0.0};
  f.alpha = k;
  f.rk = r_k(k);
  f.N = DirichletPolynomial::delta_one();
  f.trivial = true;
  return f;
}

inline cplx eval_P(const MollifierFamily& f, int j, cplx s) {
  CompensatedComplexSum acc;
  for (std::uint64_t p : f.interval_primes.at(j - 1)) {
    acc.add(std::exp(-s * std::log(static_cast<double>(p))));
  }
  return acc.value();
}

/// E_ell(x) = sum_{i<=ell} x^i / i!.
inline cplx truncated_exp(cplx x, int ell) {
  cplx term = 1.0, sum = 1.0;
  for (int i = 1; i <= ell; ++i) {
    term *= x / static_cast<double>(i);
    sum += term;
  }
  return sum;
}

/// N_j(s, alpha) from P_j(s) without expanding the polynomial.
inline cplx eval_Nj(const MollifierFamily& f, int j, cplx s) {
  return truncated_exp(f.alpha * eval_P(f, j, s), f.partition.ells.at(j - 1));
}

/// N(s, alpha) as prod_j N_j; falls back to the expanded polynomial if the
/// length cap removed terms.
inline cplx eval_N(const MollifierFamily& f, cplx s) {
  if (f.trivial) return 1.0;
  if (f.N_truncated) return dp_eval(f.N, s);
  cplx prod = 1.0;
  for (int j = 1; j <= f.J(); ++j) prod *= eval_Nj(f, j, s);
  return prod;
}

/// Q_j(s, k) = (c_j P_j(s))^{ell_j}.
inline cplx eval_Q(const MollifierFamily& f, int j, cplx s) {
  if (j < 1 || j > f.J()) throw DomainError("eval_Q: j out of range");
  const QParams q = f.Qj_params[j - 1];
  const cplx z = q.c * eval_P(f, j, s);
  if (z == cplx(0.0)) return 0.0;
  cplx result = 1.0, b = z;
  for (int e = q.ell; e > 0; e >>= 1) {
    if (e & 1) result *= b;
    b *= b;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Bound checks

struct CoefficientBoundReport {
  std::uint64_t length_cap = 0;
  std::size_t vanishing_violations = 0;
  double max_growth_ratio = 0.0;
  std::uint64_t argmax_n = 0;
  std::size_t growth_violations = 0;
  double slack = 2.0;
  bool ok() const { return vanishing_violations == 0 && growth_violations == 0; }
};

/// Checks a(n) = 0 above the length bound and
/// |a(n)| <= exp(slack |alpha| log n / log log n) for n >= 3.
inline CoefficientBoundReport check_coefficient_bounds(const MollifierFamily& f,
                                                       double slack = 2.0) {
  CoefficientBoundReport r;
  r.slack = slack;
  r.length_cap = length_cap(f.partition);
  for (const auto& [n, c] : f.N.terms()) {
    if (n > r.length_cap) ++r.vanishing_violations;
    if (n < 3) continue;
    const double ln = std::log(static_cast<double>(n));
    const double ratio = std::abs(c) / std::exp(slack * std::abs(f.alpha) * ln / std::log(ln));
    if (ratio > r.max_growth_ratio) {
      r.max_growth_ratio = ratio;
      r.argmax_n = n;
    }
    if (ratio > 1.0) ++r.growth_violations;
  }
  return r;
}

struct P1BoundEntry {
  int j;
  double P_at_1;
  double bound;
  bool holds;
};

/// P_1(1) <= ell_1 / N_param and P_j(1) <= min(10, ell_j / N_param) for j >= 2.
inline std::vector<P1BoundEntry> check_P1_bound(const MollifierFamily& f, double N_param) {
  std::vector<P1BoundEntry> out;
  for (int j = 1; j <= f.J(); ++j) {
    CompensatedSum s;
    for (std::uint64_t p : f.interval_primes[j - 1]) s.add(1.0 / static_cast<double>(p));
    const double ell = f.partition.ells[j - 1];
    const double bound = j == 1 ? ell / N_param : std::min(10.0, ell / N_param);
    out.push_back({j, s.value(), bound, s.value() <= bound});
  }
  return out;
}

/// sum_{lo<p<=hi} 1/p from log log x + b, for intervals beyond any sieve.
inline double mertens_interval_estimate(double log_lo, double log_hi,
                                        double b_hat = kMertensConstantEstimate) {
  const double upper = std::log(log_hi) + b_hat;
  const double lower = log_lo < std::log(2.0) ? 0.0 : std::log(log_lo) + b_hat;
  return upper - lower;
}

/// Same check as check_P1_bound on the partition alone, with P_j(1) taken
/// from the Mertens estimate. Works at T far beyond sieving range.
inline std::vector<P1BoundEntry> check_P1_bound_theory(const HarperPartition& p, double N_param) {
  std::vector<P1BoundEntry> out;
  const double log_t = p.log_T;
  for (int j = 1; j <= p.J; ++j) {
    const double v = mertens_interval_estimate(p.alphas[j - 1] * log_t, p.alphas[j] * log_t);
    const double ell = p.ells[j - 1];
    const double bound = j == 1 ? ell / N_param : std::min(10.0, ell / N_param);
    out.push_back({j, v, bound, v <= bound});
  }
  return out;
}

struct NormBoundReport {
  double max_ratio = 0.0;
  cplx argmax_s = 0.0;
  std::size_t samples = 0;
};

/// Ratio |N(s)| / (exp(slack |alpha| log T / log log T) T^{L (1 + 1/log T)})
/// over sample points with Re s >= -1/log T.
inline NormBoundReport check_norm_bound(const MollifierFamily& f, std::span<const cplx> points,
                                        double slack = 2.0) {
  NormBoundReport r;
  const double log_t = f.partition.log_T;
  const double log_bound = slack * std::abs(f.alpha) * log_t / std::log(log_t) +
                           f.partition.length_exponent() * (1.0 + 1.0 / log_t) * log_t;
  for (cplx s : points) {
    if (s.real() < -1.0 / log_t) throw DomainError("check_norm_bound: Re s below -1/log T");
    const double ratio = std::exp(std::log(std::abs(eval_N(f, s))) - log_bound);
    ++r.samples;
    if (ratio > r.max_ratio) {
      r.max_ratio = ratio;
      r.argmax_s = s;
    }
  }
  return r;
}

}  // namespace zml
