#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "zml/mollifier.hpp"
#include "zml/primes.hpp"

namespace {

bool trial_division_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::size_t trial_division_count(std::uint64_t limit) {
  std::size_t c = 0;
  for (std::uint64_t n = 2; n <= limit; ++n) c += trial_division_prime(n);
  return c;
}

const zml::PrimeTable& table_1e7() {
  static const zml::PrimeTable t = zml::sieve(10'000'000);
  return t;
}

}  // namespace

TEST(Sieve, SmallLimits) {
  EXPECT_EQ(zml::sieve(10).primes, (std::vector<std::uint64_t>{2, 3, 5, 7}));
  EXPECT_EQ(zml::sieve(2).primes, (std::vector<std::uint64_t>{2}));
  EXPECT_EQ(zml::sieve(3).primes, (std::vector<std::uint64_t>{2, 3}));
}

TEST(Sieve, CountUpToOneMillion) {
  const auto t = zml::sieve(1'000'000);
  EXPECT_EQ(t.primes.size(), trial_division_count(1'000'000));
  EXPECT_EQ(t.primes.size(), 78498u);
}

TEST(Sieve, AgreesWithTrialDivisionAcrossSegmentBoundaries) {
  const std::uint64_t limit = 600'000;  // more than two segments of odd numbers
  const auto t = zml::sieve(limit);
  std::size_t i = 0;
  for (std::uint64_t n = 2; n <= limit; ++n) {
    if (trial_division_prime(n)) {
      ASSERT_LT(i, t.primes.size());
      ASSERT_EQ(t.primes[i++], n);
    }
  }
  EXPECT_EQ(i, t.primes.size());
}

TEST(Sieve, Errors) {
  EXPECT_THROW(zml::sieve(1), zml::DomainError);
  EXPECT_THROW(zml::sieve(1000, 999), zml::ResourceError);
  try {
    zml::sieve(2000, 1000);
  } catch (const zml::ResourceError& e) {
    EXPECT_NE(std::string(e.what()).find("1000"), std::string::npos);
  }
}

TEST(Sieve, TableInvariants) {
  const auto t = zml::sieve(200'000);
  for (std::size_t i = 0; i < t.primes.size(); ++i) {
    if (i > 0) {
      ASSERT_LT(t.primes[i - 1], t.primes[i]);
      ASSERT_GE(t.cum_recip[i], t.cum_recip[i - 1]);
      ASSERT_GE(t.cum_logp_over_p[i], t.cum_logp_over_p[i - 1]);
    }
    ASSERT_TRUE(zml::is_prime(t.primes[i]));
  }
}

TEST(IsPrime, MatchesTrialDivision) {
  for (std::uint64_t n = 0; n < 20000; ++n) ASSERT_EQ(zml::is_prime(n), trial_division_prime(n)) << n;
  EXPECT_TRUE(zml::is_prime((1ULL << 61) - 1));
  EXPECT_FALSE(zml::is_prime((1ULL << 61) + 1));
  EXPECT_FALSE(zml::is_prime(3215031751ULL));  // strong pseudoprime to bases 2, 3, 5, 7
}

TEST(Mertens, SmallSums) {
  const auto t = zml::sieve(100);
  EXPECT_NEAR(zml::mertens_recip(10, t), 1.0 / 2 + 1.0 / 3 + 1.0 / 5 + 1.0 / 7, 1e-15);
  EXPECT_NEAR(zml::mertens_recip(10, t), 1.176190, 1e-6);
  EXPECT_DOUBLE_EQ(zml::mertens_recip(2, t), 0.5);
  const double logp10 = std::log(2.0) / 2 + std::log(3.0) / 3 + std::log(5.0) / 5 + std::log(7.0) / 7;
  EXPECT_NEAR(zml::mertens_logp(10, t), logp10, 1e-15);
  EXPECT_NEAR(zml::mertens_logp(10, t), 1.312652, 1e-6);
  EXPECT_NEAR(zml::mertens_logp(2, t), 0.346574, 1e-6);
  EXPECT_NEAR(zml::mertens_logp_remainder(10, t), logp10 - std::log(10.0), 1e-15);
}

TEST(Mertens, PrefixSumsMatchBruteForce) {
  const auto& t = table_1e7();
  for (double x : {2.0, 10.0, 97.5, 1e3, 12345.0, 1e5, 1e6, 1e7}) {
    long double s = 0, l = 0;
    for (std::uint64_t p : t.primes) {
      if (static_cast<double>(p) > x) break;
      s += 1.0L / p;
      l += std::log(static_cast<long double>(p)) / p;
    }
    EXPECT_NEAR(zml::mertens_recip(x, t), static_cast<double>(s), 1e-12 * static_cast<double>(s));
    EXPECT_NEAR(zml::mertens_logp(x, t), static_cast<double>(l), 1e-12 * static_cast<double>(l));
  }
}

TEST(Mertens, Monotone) {
  const auto t = zml::sieve(5000);
  double prev_r = 0, prev_l = 0;
  for (double x = 2; x <= 5000; x += 0.75) {
    const double r = zml::mertens_recip(x, t), l = zml::mertens_logp(x, t);
    ASSERT_GE(r, prev_r);
    ASSERT_GE(l, prev_l);
    prev_r = r;
    prev_l = l;
  }
}

TEST(Mertens, LogSumRemainderBoundedOnGrid) {
  const auto& t = table_1e7();
  for (double x : {1e3, 1e4, 1e5, 1e6}) {
    EXPECT_LE(std::abs(zml::mertens_logp_remainder(x, t)), 2.1) << x;
  }
}

TEST(Mertens, ConstantEstimateFixture) {
  const auto& t = table_1e7();
  const double b = zml::extrapolate_mertens_constant(1e6, 1e7, t);
  EXPECT_NEAR(b, zml::kMertensConstantEstimate, 1e-9);
  // Meissel-Mertens constant 0.2614972128...
  EXPECT_NEAR(b, 0.2614972128, 1e-3);
  EXPECT_LT(std::abs(zml::mertens_recip_remainder(1e6, t)), 1e-3);
  EXPECT_LT(std::abs(zml::mertens_recip_remainder(1e7, t)), 1e-3);
}

TEST(Mertens, RangeErrors) {
  const auto t = zml::sieve(100);
  EXPECT_THROW(zml::mertens_recip(101, t), zml::RangeError);
  EXPECT_THROW(zml::mertens_logp(1e9, t), zml::RangeError);
  EXPECT_THROW(zml::mertens_recip(1.5, t), zml::DomainError);
}

TEST(IntervalPrimes, Examples) {
  const auto t = zml::sieve(1000);
  EXPECT_EQ(zml::interval_primes({3, 10, 1}, t), (std::vector<std::uint64_t>{5, 7}));
  EXPECT_TRUE(zml::interval_primes({7, 7.5, 1}, t).empty());
  std::size_t oracle = 0;
  for (std::uint64_t n = 11; n <= 100; ++n) oracle += trial_division_prime(n);
  EXPECT_EQ(zml::interval_primes({10, 100, 1}, t).size(), oracle);
  EXPECT_EQ(oracle, 21u);
  EXPECT_THROW(zml::interval_primes({10, 2000, 1}, t), zml::RangeError);
}

TEST(IntervalPrimes, PartitionIntervalsCoverEveryPrimeOnce) {
  const auto p = zml::build_partition(1.0, 1e12, 0.5, 2.0);
  ASSERT_EQ(p.J, 2);
  double top = 0;
  for (const auto& iv : p.intervals) top = std::max(top, iv.hi);
  ASSERT_LT(top, 1e7);
  const auto t = zml::sieve(static_cast<std::uint64_t>(top) + 1);
  std::vector<std::uint64_t> all;
  for (const auto& iv : p.intervals) {
    const auto ps = zml::interval_primes(iv, t);
    all.insert(all.end(), ps.begin(), ps.end());
  }
  const auto expected = zml::interval_primes({1.0, p.intervals.back().hi, 1}, t);
  EXPECT_EQ(all, expected);
}

TEST(PrimeCache, RoundTripAndValidation) {
  const auto t = zml::sieve(10000);
  const std::string path = ::testing::TempDir() + "zml_primes.bin";
  zml::save_prime_cache(path, t);
  const auto u = zml::load_prime_cache(path, 10000);
  EXPECT_EQ(u.primes, t.primes);
  EXPECT_EQ(u.cum_recip, t.cum_recip);
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTMAGIC";
  }
  EXPECT_THROW(zml::load_prime_cache(path), zml::DomainError);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(zml::kPrimeCacheMagic.data(), 8);
    const unsigned char rec[16] = {5, 0, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0};
    out.write(reinterpret_cast<const char*>(rec), 16);
  }
  EXPECT_THROW(zml::load_prime_cache(path), zml::DomainError);
  std::remove(path.c_str());
}
