#pragma once

// Local Euler factors, Rankin-type error bounds and the lower bound for the
// arithmetic main term of the twisted first moment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zml/dirichlet.hpp"
#include "zml/error.hpp"
#include "zml/moments.hpp"
#include "zml/mollifier.hpp"
#include "zml/primes.hpp"
#include "zml/summation.hpp"

namespace zml {

inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

namespace detail {

inline double factorial(int n) { return std::tgamma(n + 1.0); }

inline double int_pow(double x, int r) {
  double v = 1.0;
  for (int i = 0; i < r; ++i) v *= x;
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Local sums over one interval

/// sum over m built from `primes` with Omega(n m) <= ell of
/// (1/m) k^{Omega(nm)} (k-1)^{Omega(m)} / (g(nm) g(m)), summed in ascending m.
inline double local_sum_restricted(std::uint64_t n, std::span<const std::uint64_t> primes, int ell,
                                   double k, std::size_t cap = kDefaultEnumerationCap) {
  const std::vector<int> ln = exponents_over(n, primes);
  const int omega_n = big_omega(ln);
  if (omega_n > ell) return 0.0;
  const int budget = ell - omega_n;
  std::vector<std::pair<long double, double>> terms;  // (log m, term)
  std::vector<int> e(primes.size(), 0);
  auto visit = [&](auto&& self, std::size_t i, int left, long double logm) -> void {
    if (i == primes.size()) {
      if (terms.size() >= cap) {
        throw ResourceError("local_sum_restricted: more than " + std::to_string(cap) +
                            " terms; raise the enumeration cap");
      }
      int om = 0;
      double g_nm = 1.0, g_m = 1.0;
      for (std::size_t q = 0; q < primes.size(); ++q) {
        om += e[q];
        g_nm *= detail::factorial(ln[q] + e[q]);
        g_m *= detail::factorial(e[q]);
      }
      const double term = std::exp(-static_cast<double>(logm)) *
                          detail::int_pow(k, omega_n + om) * detail::int_pow(k - 1.0, om) /
                          (g_nm * g_m);
      terms.emplace_back(logm, term);
      return;
    }
    const long double lp = std::log(static_cast<long double>(primes[i]));
    for (int r = 0; r <= left; ++r) {
      e[i] = r;
      self(self, i + 1, left - r, logm + r * lp);
    }
    e[i] = 0;
  };
  visit(visit, 0, budget, 0.0L);
  std::sort(terms.begin(), terms.end());
  CompensatedSum s;
  for (const auto& [lm, t] : terms) s.add(t);
  return s.value();
}

struct UnrestrictedSum {
  double value;       // the Euler product
  double normalized;  // value / (k^{Omega(n)} / g(n))
};

/// Euler-product form of the same sum without the Omega restriction, each
/// local series truncated at prime-power depth `depth` (r <= depth):
/// prod_{p not| n} sum_r (k beta)^r / (r!^2 p^r) *
/// prod_{p^l || n} sum_r k^{l+r} beta^r / ((l+r)! r! p^r), with beta = k - 1
/// unless given.
inline UnrestrictedSum local_sum_unrestricted(std::uint64_t n, std::span<const std::uint64_t> primes,
                                              double k, int depth, double beta = NAN) {
  if (depth < 0) throw DomainError("local_sum_unrestricted: depth must be nonnegative");
  if (std::isnan(beta)) beta = k - 1.0;
  const std::vector<int> ln = exponents_over(n, primes);
  double log_value = 0.0;
  int sign = 1;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const double p = static_cast<double>(primes[i]);
    const int l = ln[i];
    CompensatedSum f;
    for (int r = 0; r <= depth; ++r) {
      f.add(detail::int_pow(k, l + r) * detail::int_pow(beta, r) /
            (detail::factorial(l + r) * detail::factorial(r) * detail::int_pow(p, r)));
    }
    const double v = f.value();
    if (v == 0.0) return {0.0, 0.0};
    if (v < 0.0) sign = -sign;
    log_value += std::log(std::abs(v));
  }
  const double value = sign * std::exp(log_value);
  double norm = 1.0;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    norm *= detail::int_pow(k, ln[i]) / detail::factorial(ln[i]);
  }
  return {value, norm != 0.0 ? value / norm : NAN};
}

/// sum_r k^{l+r} (k-1)^r / ((l+r)! r! p^r) divided by k^l / l!, truncated at r <= depth.
inline double recast_local_factor(std::uint64_t p, int l, double k, int depth) {
  CompensatedSum f;
  const double pd = static_cast<double>(p);
  for (int r = 0; r <= depth; ++r) {
    f.add(detail::int_pow(k, r) * detail::int_pow(k - 1.0, r) * detail::factorial(l) /
          (detail::factorial(l + r) * detail::factorial(r) * detail::int_pow(pd, r)));
  }
  return f.value();
}

struct LocalFactorReport {
  int j = 0;
  std::uint64_t n_j = 1;
  int ell = 0;
  double k = 0.0;
  double unrestricted_sum = 0.0;
  double restricted_sum = 0.0;
  double rankin_bound = 0.0;  // 2^{Omega - ell} U(n; k, 2|1-k|)
  double f_j = 0.0;           // restricted / unrestricted - 1
  double f_bound = 0.0;       // 2^{Omega - ell/2}
  bool rankin_ok = false;
  bool f_ok = false;
};

/// Restricted sum against the (converged) unrestricted product and both
/// error bounds.
inline LocalFactorReport local_factor_report(std::uint64_t n, std::span<const std::uint64_t> primes,
                                             int ell, double k, int j = 1,
                                             std::size_t cap = kDefaultEnumerationCap) {
  constexpr int kExactDepth = 60;
  LocalFactorReport r;
  r.j = j;
  r.n_j = n;
  r.ell = ell;
  r.k = k;
  r.restricted_sum = local_sum_restricted(n, primes, ell, k, cap);
  r.unrestricted_sum = local_sum_unrestricted(n, primes, k, kExactDepth).value;
  const int omega = big_omega(exponents_over(n, primes));
  r.rankin_bound = std::ldexp(1.0, omega - ell) *
                   local_sum_unrestricted(n, primes, k, kExactDepth, 2.0 * std::abs(1.0 - k)).value;
  r.f_j = r.restricted_sum / r.unrestricted_sum - 1.0;
  r.f_bound = std::pow(2.0, omega - ell / 2.0);
  const double diff = std::abs(r.restricted_sum - r.unrestricted_sum);
  r.rankin_ok = diff <= r.rankin_bound * (1.0 + 1e-12) + 1e-300;
  r.f_ok = std::abs(r.f_j) <= r.f_bound;
  return r;
}

// ---------------------------------------------------------------------------
// Products over an interval

enum class EulerVariant {
  twisted,   // sum_r (k(k-1))^r / (r!^2 p^r)
  positive,  // sum_r k^r / (r! p^r)
  doubled,   // sum_r (2k)^r / (r! p^r)
};

inline double euler_local_factor(std::uint64_t p, double k, int depth, EulerVariant v) {
  const double pd = static_cast<double>(p);
  CompensatedSum f;
  for (int r = 0; r <= depth; ++r) {
    const double pr = detail::int_pow(pd, r);
    switch (v) {
      case EulerVariant::twisted:
        f.add(detail::int_pow(k * (k - 1.0), r) / (detail::factorial(r) * detail::factorial(r) * pr));
        break;
      case EulerVariant::positive:
        f.add(detail::int_pow(k, r) / (detail::factorial(r) * pr));
        break;
      case EulerVariant::doubled:
        f.add(detail::int_pow(2.0 * k, r) / (detail::factorial(r) * pr));
        break;
    }
  }
  return f.value();
}

/// prod_{p in primes} of the depth-truncated local factor, accumulated in logs.
inline double euler_product(std::span<const std::uint64_t> primes, double k, int depth,
                            EulerVariant v = EulerVariant::twisted) {
  CompensatedSum logs;
  for (std::uint64_t p : primes) {
    const double f = euler_local_factor(p, k, depth, v);
    if (!(f > 0.0)) throw DomainError("euler_product: nonpositive local factor");
    logs.add(std::log(f));
  }
  return std::exp(logs.value());
}

inline double euler_product_interval(const PrimeInterval& interval, double k,
                                     const PrimeTable& table, int depth,
                                     EulerVariant v = EulerVariant::twisted) {
  const auto primes = interval_primes(interval, table);
  return euler_product(primes, k, depth, v);
}

inline double sum_k_logp_over_p(std::span<const std::uint64_t> primes, double k) {
  CompensatedSum s;
  for (std::uint64_t p : primes) {
    const double pd = static_cast<double>(p);
    s.add(k * std::log(pd) / pd);
  }
  return s.value();
}

struct DerivativeMainTerm {
  double product_side;  // prod(1 + k/p + ...) * sum k log p / p
  double fd_side;       // -d/ds at s = 0 of the truncated series, central difference
  double relative_gap;
};

/// -d/ds sum_{n built from primes} k^{Omega(n)} / (g(n) n^{1+s}) at s = 0,
/// against its Euler-product approximation. The series keeps prime powers
/// p^r with r <= exponent_cap.
inline DerivativeMainTerm derivative_main_term(std::span<const std::uint64_t> primes, double k,
                                               int depth, int exponent_cap = 30,
                                               double step = 1e-5) {
  const double product = euler_product(primes, k, depth, EulerVariant::positive);
  const double main = product * sum_k_logp_over_p(primes, k);
  auto series = [&](double s) {
    CompensatedSum logs;
    for (std::uint64_t p : primes) {
      const double x = k * std::pow(static_cast<double>(p), -(1.0 + s));
      double term = 1.0, sum = 1.0;
      for (int r = 1; r <= exponent_cap; ++r) {
        term *= x / r;
        sum += term;
      }
      logs.add(std::log(sum));
    }
    return std::exp(logs.value());
  };
  const double fd = primes.empty() ? 0.0 : -(series(step) - series(-step)) / (2.0 * step);
  const double gap = main != 0.0 ? std::abs(fd - main) / std::abs(main) : std::abs(fd);
  return {main, fd, gap};
}

inline DerivativeMainTerm derivative_main_term(const PrimeInterval& interval, double k,
                                               const PrimeTable& table, int depth) {
  const auto primes = interval_primes(interval, table);
  return derivative_main_term(primes, k, depth);
}

struct RankinDamping {
  int ell;
  double subtracted;  // 2^{-ell/2} prod(1 + 2k/p) sum 2k log p / p
  double allowed;     // 2^{-ell/4} prod(1 + k/p) sum k log p / p
  bool holds;
};

inline RankinDamping rankin_damping(std::span<const std::uint64_t> primes, double k, int ell,
                                    int depth) {
  const double sub = std::pow(2.0, -ell / 2.0) *
                     euler_product(primes, k, depth, EulerVariant::doubled) *
                     sum_k_logp_over_p(primes, 2.0 * k);
  const double allowed = std::pow(2.0, -ell / 4.0) *
                         euler_product(primes, k, depth, EulerVariant::positive) *
                         sum_k_logp_over_p(primes, k);
  return {ell, sub, allowed, sub <= allowed};
}

/// Smallest ell >= 0 from which the damping inequality holds (it is monotone in ell).
inline int rankin_crossover(std::span<const std::uint64_t> primes, double k, int depth) {
  if (primes.empty() || k <= 0.0) return 0;
  const double ratio = 2.0 * euler_product(primes, k, depth, EulerVariant::doubled) /
                       euler_product(primes, k, depth, EulerVariant::positive);
  return std::max(0, static_cast<int>(std::ceil(4.0 * std::log2(ratio) - 1e-12)));
}

// ---------------------------------------------------------------------------
// Inner sums and the assembled bound

/// sum_m a_{k-1}(m) a_k(mn) / m by direct lookup over the mollifier supports.
inline double inner_sum_enumerated(const MollifierPair& pair, std::uint64_t n) {
  CompensatedSum s;
  for (const auto& [m, cm] : pair.fkm1.N.terms()) {
    const auto mn = checked_index_mul(m, n);
    if (!mn) break;
    const cplx c = pair.fk.coeff(*mn);
    if (c != cplx(0.0)) s.add((cm * c).real() / static_cast<double>(m));
  }
  return s.value();
}

/// The same inner sum as a product of per-interval restricted local sums.
inline double inner_sum_factored(const MollifierPair& pair, std::uint64_t n,
                                 std::size_t cap = kDefaultEnumerationCap) {
  const auto& f = pair.fk;
  double prod = 1.0;
  std::uint64_t rest = n;
  for (int j = 1; j <= f.J(); ++j) {
    const auto& primes = f.interval_primes[j - 1];
    std::uint64_t nj = 1;
    for (std::uint64_t p : primes) {
      while (rest % p == 0) {
        rest /= p;
        nj *= p;
      }
    }
    prod *= local_sum_restricted(nj, primes, f.partition.ells[j - 1], f.partition.k, cap);
  }
  if (rest != 1) return 0.0;
  return prod;
}

struct LowerBoundReport {
  double k = 0.0;
  int depth = 1;
  double lhs_sum = 0.0;
  double rhs_bound = 0.0;
  double margin = 0.0;  // lhs_sum / rhs_bound
  double slack = 0.1;
  bool holds = false;
  double damping = 1.0;          // prod_j (1 - 2^{-ell_j/4})
  double twisted_product = 1.0;  // prod_p (1 + k(k-1)/p + ...)
  double positive_product = 1.0; // prod_p (1 + k/p + ...)
  double log_sum = 0.0;          // sum_p k log p / p
};

/// lhs = sum_n (log n / n) sum_m a_{k-1}(m) a_k(mn) / m by enumeration;
/// rhs = prod_j (1 - 2^{-ell_j/4}) prod_p twisted(p) prod_p positive(p) sum_p k log p / p,
/// every local series truncated at r <= depth.
inline LowerBoundReport assemble_lower_bound(const HarperPartition& partition,
                                             const PrimeTable& table, int depth = 1,
                                             double slack = 0.1,
                                             std::size_t cap = kDefaultEnumerationCap) {
  if (partition.J < 1) throw DomainError("assemble_lower_bound: partition has no intervals");
  const MollifierPair pair = build_pair(partition, table);
  if (pair.fk.N.size() > cap || pair.fkm1.N.size() > cap) {
    throw ResourceError("assemble_lower_bound: mollifier support exceeds the enumeration cap " +
                        std::to_string(cap));
  }
  LowerBoundReport r;
  r.k = partition.k;
  r.depth = depth;
  r.slack = slack;
  r.lhs_sum = s1_arith_main_term(pair.fkm1, pair.fk, partition.T).sum_decomposed;
  std::vector<std::uint64_t> all;
  for (int j = 0; j < partition.J; ++j) {
    r.damping *= 1.0 - std::pow(2.0, -partition.ells[j] / 4.0);
    const auto& ps = pair.fk.interval_primes[j];
    all.insert(all.end(), ps.begin(), ps.end());
  }
  r.twisted_product = euler_product(all, r.k, depth, EulerVariant::twisted);
  r.positive_product = euler_product(all, r.k, depth, EulerVariant::positive);
  r.log_sum = sum_k_logp_over_p(all, r.k);
  r.rhs_bound = r.damping * r.twisted_product * r.positive_product * r.log_sum;
  r.margin = r.rhs_bound != 0.0 ? r.lhs_sum / r.rhs_bound : NAN;
  r.holds = r.lhs_sum >= r.rhs_bound * (1.0 - slack);
  return r;
}

}  // namespace zml
