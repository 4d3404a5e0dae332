#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "zml/mollifier.hpp"

using zml::cplx;

namespace {

const zml::PrimeTable& small_table() {
  static const zml::PrimeTable t = zml::sieve(10000);
  return t;
}

// a_alpha(n) from the definition: product over intervals of alpha^Omega(n_j)/g(n_j)
// when Omega(n_j) <= ell_j, else 0; n must factor over the partition primes.
double coefficient_oracle(const zml::HarperPartition& p, double alpha, std::uint64_t n) {
  double a = 1.0;
  for (int j = 0; j < p.J; ++j) {
    int omega = 0;
    double g = 1.0;
    for (std::uint64_t q = 2; q <= 100; ++q) {
      if (!(p.intervals[j].lo < q && q <= p.intervals[j].hi) || !zml::is_prime(q)) continue;
      int r = 0;
      while (n % q == 0) {
        n /= q;
        ++r;
        g *= r;
      }
      omega += r;
    }
    if (omega > p.ells[j]) return 0.0;
    a *= std::pow(alpha, omega) / g;
  }
  return n == 1 ? a : 0.0;
}

}  // namespace

TEST(Partition, TheoryRegimeExample) {
  const auto p = zml::build_partition_log(1.0, std::exp(10.0), 2.0, 20.0);
  ASSERT_EQ(p.J, 1);
  EXPECT_NEAR(p.alphas[1], 0.01, 1e-15);
  const long double e2 = std::exp(2.0L);
  EXPECT_EQ(p.ells[0], static_cast<int>(std::ceil(e2 * std::pow(0.01L, -0.75L))));
  EXPECT_EQ(p.ells[0], 234);
  EXPECT_TRUE(std::isinf(p.T));
}

TEST(Partition, DeskScaleIsDegenerate) {
  const auto p = zml::build_partition(1.0, 1e5, 1.0, 20.0);
  EXPECT_EQ(p.J, 0);
  EXPECT_TRUE(p.degenerate);
  EXPECT_TRUE(p.intervals.empty());
  const double llt = std::log(std::log(1e5));
  EXPECT_NEAR(llt, 2.4435, 1e-4);
  EXPECT_GT(1.0 / (llt * llt), 0.1);
  EXPECT_THROW(zml::build_family(p, 1.0, small_table()), zml::DomainError);
}

TEST(Partition, Errors) {
  EXPECT_THROW(zml::build_partition(1.0, 2.0, 1.0), zml::DomainError);
  EXPECT_THROW(zml::build_partition(0.0, 1e6, 1.0), zml::DomainError);
  EXPECT_THROW(zml::build_partition(1.0, 1e6, 1.0, 1.0), zml::DomainError);
  EXPECT_THROW(zml::toy_partition(1.0, 100.0, {{1, 3, 1}, {4, 5, 2}}, {1, 1}), zml::DomainError);
  EXPECT_THROW(zml::toy_partition(1.0, 100.0, {{1, 3, 1}}, {1, 1}), zml::DomainError);
}

TEST(Partition, Invariants) {
  for (double k : {0.3, 1.0, 2.5}) {
    for (double base : {2.0, 5.0, 20.0}) {
      const auto p = zml::build_partition_log(k, std::exp(10.0), 0.3, base);
      ASSERT_GE(p.J, 1);
      EXPECT_LE(p.alphas[p.J], std::pow(10.0, -0.3));
      for (int j = 1; j <= p.J; ++j) {
        EXPECT_GE(p.ells[j - 1], 1);
        if (j >= 2) {
          EXPECT_GT(p.alphas[j], p.alphas[j - 1]);
          EXPECT_NEAR(p.alphas[j] / p.alphas[j - 1], base, 1e-12 * base);
          EXPECT_LT(p.ells[j - 1], p.ells[j - 2]);
          EXPECT_EQ(p.intervals[j - 1].lo, p.intervals[j - 2].hi);
        }
      }
    }
  }
  const auto d = zml::build_partition(1.0, 1e12, 0.5, 2.0);
  ASSERT_EQ(d.J, 2);
  for (int j = 1; j <= d.J; ++j) {
    EXPECT_NEAR(d.intervals[j - 1].hi, std::pow(1e12, d.alphas[j]), 1e-9 * d.intervals[j - 1].hi);
  }
}

TEST(Family, SingleIntervalExample) {
  for (double k : {0.5, 1.0, 2.0}) {
    const auto p = zml::toy_partition(k, 100.0, {{1.0, 3.0, 1}}, {1});
    const auto f = zml::build_family(p, k, small_table());
    ASSERT_EQ(f.N.size(), 3u);
    EXPECT_EQ(f.coeff(1), cplx(1.0));
    EXPECT_EQ(f.coeff(2), cplx(k));
    EXPECT_EQ(f.coeff(3), cplx(k));
  }
}

TEST(Family, StandardToySupport) {
  const double alpha = 0.7;
  const auto p = zml::standard_toy_partition(1.0, 1000.0);
  const auto f = zml::build_family(p, alpha, small_table());
  std::set<std::uint64_t> expected;
  for (std::uint64_t a : {1, 2, 3, 4, 6, 9}) {
    for (std::uint64_t b : {1, 5}) expected.insert(a * b);
  }
  std::set<std::uint64_t> got;
  for (const auto& [n, c] : f.N.terms()) got.insert(n);
  EXPECT_EQ(got, expected);
  EXPECT_EQ(f.coeff(12), cplx(0.0));
  EXPECT_NEAR(f.coeff(4).real(), alpha * alpha / 2, 1e-15);
  EXPECT_EQ(f.coeff(1), cplx(1.0));
}

TEST(Family, CoefficientIdentityOnRandomToys) {
  std::mt19937_64 rng(31);
  std::vector<double> primes;
  for (int n = 2; n <= 100; ++n) {
    if (zml::is_prime(n)) primes.push_back(n);
  }
  int partitions = 0, checked = 0;
  while (partitions < 24) {
    const int parts = 1 + static_cast<int>(rng() % 3);
    std::set<std::size_t> cut_idx;
    while (static_cast<int>(cut_idx.size()) < parts) cut_idx.insert(rng() % primes.size());
    std::vector<zml::PrimeInterval> iv;
    std::vector<int> ells;
    double lo = 1, log_max = 0, support = 1;
    std::size_t prev = 0;
    for (std::size_t c : cut_idx) {
      iv.push_back({lo, primes[c], 0});
      ells.push_back(1 + static_cast<int>(rng() % 4));
      log_max += ells.back() * std::log(primes[c]);
      // number of monomials of degree <= ell in (c + 1 - prev) primes
      support *= std::tgamma(c + 1 - prev + ells.back() + 1.0) /
                 (std::tgamma(c + 1 - prev + 1.0) * std::tgamma(ells.back() + 1.0));
      lo = primes[c];
      prev = c + 1;
    }
    if (log_max > 62 * std::log(2.0) || support > 2e5) continue;
    const double k = std::vector<double>{0.5, 1.0, 2.0}[partitions % 3];
    const auto p = zml::toy_partition(k, 1e6, iv, ells);
    ++partitions;
    for (double alpha : {k, k - 1.0}) {
      const auto f = zml::build_family(p, alpha, small_table());
      ASSERT_FALSE(f.N_truncated);
      for (const auto& [n, c] : f.N.terms()) {
        const double want = coefficient_oracle(p, alpha, n);
        ASSERT_NEAR(c.real(), want, 1e-12 * std::abs(want)) << n;
        ++checked;
      }
      if (alpha == 0.0) continue;
      // Support is the elementwise product of the per-interval supports.
      std::set<std::uint64_t> prod = {1};
      for (const auto& nj : f.Nj) {
        std::set<std::uint64_t> next;
        for (std::uint64_t a : prod) {
          for (const auto& [b, c] : nj.terms()) next.insert(a * b);
        }
        prod = std::move(next);
      }
      std::set<std::uint64_t> got;
      for (const auto& [n, c] : f.N.terms()) got.insert(n);
      EXPECT_EQ(got, prod);
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Family, RkAndQParams) {
  EXPECT_EQ(zml::r_k(1.0), 3);
  EXPECT_EQ(zml::r_k(0.5), 4);
  EXPECT_EQ(zml::r_k(0.4), 5);
  EXPECT_EQ(zml::r_k(2.0), 3);
  EXPECT_EQ(zml::r_k(0.75), 4);
  EXPECT_THROW(zml::r_k(0.0), zml::DomainError);
  const auto p = zml::toy_partition(1.0, 1e4, {{1, 3, 1}, {3, 7, 2}}, {4, 2});
  const auto f = zml::build_family(p, 1.0, small_table());
  EXPECT_DOUBLE_EQ(f.Qj_params[0].c, 160.0 / 4);
  EXPECT_DOUBLE_EQ(f.Qj_params[1].c, 160.0 / 2);
  EXPECT_EQ(f.rk, 3);
}

TEST(Family, EvaluationForms) {
  const auto p = zml::toy_partition(1.5, 1e4, {{1, 3, 1}, {3, 7, 2}, {7, 7.5, 3}}, {3, 2, 2});
  const auto f = zml::build_family(p, 0.5, small_table());
  for (cplx s : {cplx(0.5, 14.1), cplx(0.5, -3.0), cplx(1.2, 100.0), cplx(0.0, 7.0)}) {
    EXPECT_LT(std::abs(zml::eval_N(f, s) - zml::dp_eval(f.N, s)), 1e-13);
    for (int j = 1; j <= 2; ++j) {
      const cplx direct = std::pow(f.Qj_params[j - 1].c * zml::dp_eval(f.Pj[j - 1], s),
                                   f.Qj_params[j - 1].ell);
      EXPECT_LT(std::abs(zml::eval_Q(f, j, s) - direct), 1e-12 * std::abs(direct));
    }
    EXPECT_EQ(zml::eval_Q(f, 3, s), cplx(0.0));  // no primes in (7, 7.5]
  }
}

TEST(Bounds, CoefficientBoundsOnToys) {
  for (double k : {0.5, 1.0, 2.0}) {
    const auto p = zml::standard_toy_partition(k, 1e4);
    for (double alpha : {k, k - 1.0}) {
      const auto r = zml::check_coefficient_bounds(zml::build_family(p, alpha, small_table()));
      EXPECT_EQ(r.vanishing_violations, 0u);
      EXPECT_LE(r.max_growth_ratio, 1.0);
      EXPECT_TRUE(r.ok());
    }
  }
}

TEST(Bounds, P1) {
  const auto p = zml::toy_partition(1.0, 1e4, {{3, 10, 1}, {10, 100, 2}}, {2, 3});
  const auto f = zml::build_family(p, 1.0, small_table());
  const auto r = zml::check_P1_bound(f, 1.0);
  double oracle = 0.0;
  for (int n = 11; n <= 100; ++n) oracle += zml::is_prime(n) ? 1.0 / n : 0.0;
  EXPECT_NEAR(r[1].P_at_1, oracle, 1e-14);
  EXPECT_EQ(r[1].bound, 3.0);
  const auto e = zml::build_family(zml::toy_partition(1.0, 1e4, {{7, 7.5, 1}}, {1}), 1.0,
                                   small_table());
  EXPECT_EQ(zml::check_P1_bound(e, 1e9)[0].P_at_1, 0.0);
  EXPECT_TRUE(zml::check_P1_bound(e, 1e9)[0].holds);
}

TEST(Bounds, P1TheoryRegime) {
  const auto p = zml::build_partition_log(1.0, std::exp(10.0), 0.5, 20.0);
  ASSERT_EQ(p.J, 2);
  const auto r = zml::check_P1_bound_theory(p, 1.0);
  EXPECT_NEAR(r[1].P_at_1, std::log(20.0), 1e-12);
  EXPECT_LE(r[1].P_at_1, 10.0);
  EXPECT_TRUE(r[1].holds);
}

TEST(Bounds, NormBoundOnToys) {
  const auto table = zml::sieve(1000);
  std::mt19937_64 rng(37);
  const std::vector<zml::HarperPartition> parts = {
      zml::standard_toy_partition(1.0, 1e4),
      zml::toy_partition(2.0, 1e6, {{1, 5, 1}, {5, 13, 2}, {13, 31, 3}}, {4, 3, 2})};
  for (const auto& p : parts) {
    const double log_t = std::log(p.T);
    std::uniform_real_distribution<double> sig(-1.0 / log_t, 3.0), ht(-1e4, 1e4);
    std::vector<cplx> pts;
    for (int i = 0; i < 100; ++i) {
      const double s = sig(rng);
      pts.emplace_back(s, ht(rng));
    }
    for (double alpha : {p.k, p.k - 1.0}) {
      const auto f = zml::build_family(p, alpha, table);
      const auto r = zml::check_norm_bound(f, pts);
      EXPECT_EQ(r.samples, 100u);
      EXPECT_LE(r.max_ratio, 1.0);
      EXPECT_LE(f.N.length_bound(), zml::length_cap(p));
    }
    const std::vector<cplx> bad = {cplx(-0.5, 0.0)};
    EXPECT_THROW(zml::check_norm_bound(zml::build_family(p, 1.0, table), bad), zml::DomainError);
  }
}

TEST(Bounds, DeskGeometricFamilyOverflows) {
  // ell_1 = 45 on the primes up to 12 gives indices beyond 2^63.
  const auto p = zml::build_partition(1.0, 1e12, 0.5, 2.0);
  ASSERT_EQ(p.J, 2);
  EXPECT_EQ(p.ells[0], 45);
  EXPECT_THROW(zml::build_family(p, 1.0, zml::sieve(1000)), zml::OverflowError);
}
