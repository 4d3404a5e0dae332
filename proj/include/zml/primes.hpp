#pragma once

// Prime sieving, prime intervals and Mertens-type sums.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "zml/error.hpp"
#include "zml/summation.hpp"

namespace zml {

inline constexpr std::uint64_t kDefaultSieveBudget = 1'000'000'000ULL;

/// Estimate of the constant b in sum_{p<=x} 1/p = log log x + b + O(1/log x),
/// obtained by two-point extrapolation in 1/log x from x = 1e6 and 1e7.
inline constexpr double kMertensConstantEstimate = 0.2613303983;

/// Sieved primes up to `limit` with prefix sums of 1/p and log(p)/p.
///
/// cum_recip[i] = sum_{m<=i} 1/primes[m], and likewise for cum_logp_over_p.
/// Immutable after construction.
struct PrimeTable {
  std::uint64_t limit = 0;
  std::vector<std::uint64_t> primes;
  std::vector<double> cum_recip;
  std::vector<double> cum_logp_over_p;

  /// Number of primes p <= x.
  std::size_t count_upto(double x) const {
    if (x < 2.0) return 0;
    const auto bound = x >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(std::floor(x));
    return static_cast<std::size_t>(std::upper_bound(primes.begin(), primes.end(), bound) -
                                    primes.begin());
  }
};

/// Half-open prime interval (lo, hi] with its position j in a partition.
struct PrimeInterval {
  double lo = 0.0;
  double hi = 0.0;
  int index = 1;
};

namespace detail {

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1;
  b %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

inline void fill_prefix_sums(PrimeTable& t) {
  t.cum_recip.resize(t.primes.size());
  t.cum_logp_over_p.resize(t.primes.size());
  CompensatedSum recip, logp;
  for (std::size_t i = 0; i < t.primes.size(); ++i) {
    const double p = static_cast<double>(t.primes[i]);
    recip.add(1.0 / p);
    logp.add(std::log(p) / p);
    t.cum_recip[i] = recip.value();
    t.cum_logp_over_p[i] = logp.value();
  }
}

}  // namespace detail

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL,
                          37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL,
                          37ULL}) {
    std::uint64_t x = detail::pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Segmented sieve of Eratosthenes over odd numbers.
inline PrimeTable sieve(std::uint64_t limit, std::uint64_t budget = kDefaultSieveBudget) {
  if (limit < 2) throw DomainError("sieve: limit must be at least 2");
  if (limit > budget) {
    throw ResourceError("sieve: limit " + std::to_string(limit) + " exceeds the memory budget " +
                        std::to_string(budget));
  }
  PrimeTable table;
  table.limit = limit;
  table.primes.push_back(2);

  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  std::vector<std::uint64_t> base;  // odd primes <= root
  {
    std::vector<std::uint8_t> small(root + 1, 1);
    for (std::uint64_t i = 3; i * i <= root; i += 2) {
      if (small[i]) {
        for (std::uint64_t j = i * i; j <= root; j += 2 * i) small[j] = 0;
      }
    }
    for (std::uint64_t i = 3; i <= root; i += 2) {
      if (small[i]) base.push_back(i);
    }
  }

  // Segment covers odd numbers lo, lo+2, ..., lo + 2*(kSegment-1).
  constexpr std::uint64_t kSegment = 1u << 18;
  std::vector<std::uint8_t> seg(kSegment);
  for (std::uint64_t lo = 3; lo <= limit; lo += 2 * kSegment) {
    const std::uint64_t hi = std::min(limit, lo + 2 * (kSegment - 1));
    const std::uint64_t count = (hi - lo) / 2 + 1;
    std::fill(seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(count), 1);
    for (std::uint64_t p : base) {
      if (p * p > hi) break;
      std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
      if ((start & 1) == 0) start += p;
      for (std::uint64_t m = start; m <= hi; m += 2 * p) seg[(m - lo) / 2] = 0;
    }
    for (std::uint64_t i = 0; i < count; ++i) {
      if (seg[i]) table.primes.push_back(lo + 2 * i);
    }
  }
  detail::fill_prefix_sums(table);
  return table;
}

namespace detail {

inline std::size_t checked_count(double x, const PrimeTable& table, const char* op) {
  if (!(x >= 2.0)) throw DomainError(std::string(op) + ": x must be at least 2");
  if (x > static_cast<double>(table.limit)) {
    throw RangeError(std::string(op) + ": x = " + std::to_string(x) + " exceeds sieve limit " +
                     std::to_string(table.limit));
  }
  return table.count_upto(x);
}

}  // namespace detail

/// sum_{p<=x} 1/p.
inline double mertens_recip(double x, const PrimeTable& table) {
  const std::size_t n = detail::checked_count(x, table, "mertens_recip");
  return table.cum_recip[n - 1];
}

/// sum_{p<=x} 1/p - log log x - b_hat.
inline double mertens_recip_remainder(double x, const PrimeTable& table,
                                      double b_hat = kMertensConstantEstimate) {
  return mertens_recip(x, table) - std::log(std::log(x)) - b_hat;
}

/// sum_{p<=x} log(p)/p.
inline double mertens_logp(double x, const PrimeTable& table) {
  const std::size_t n = detail::checked_count(x, table, "mertens_logp");
  return table.cum_logp_over_p[n - 1];
}

/// sum_{p<=x} log(p)/p - log x.
inline double mertens_logp_remainder(double x, const PrimeTable& table) {
  return mertens_logp(x, table) - std::log(x);
}

/// Extrapolates b from r(x) = sum 1/p - log log x assuming r(x) = b + c / log x.
inline double extrapolate_mertens_constant(double x1, double x2, const PrimeTable& table) {
  const double r1 = mertens_recip(x1, table) - std::log(std::log(x1));
  const double r2 = mertens_recip(x2, table) - std::log(std::log(x2));
  const double l1 = std::log(x1);
  const double l2 = std::log(x2);
  return (r2 * l2 - r1 * l1) / (l2 - l1);
}

/// Primes p with interval.lo < p <= interval.hi, ascending.
inline std::vector<std::uint64_t> interval_primes(const PrimeInterval& interval,
                                                  const PrimeTable& table) {
  if (!(interval.lo < interval.hi)) throw DomainError("interval_primes: require lo < hi");
  if (interval.hi > static_cast<double>(table.limit)) {
    throw RangeError("interval_primes: interval end " + std::to_string(interval.hi) +
                     " exceeds sieve limit " + std::to_string(table.limit));
  }
  const std::size_t first = table.count_upto(interval.lo);
  const std::size_t last = table.count_upto(interval.hi);
  return {table.primes.begin() + static_cast<std::ptrdiff_t>(first),
          table.primes.begin() + static_cast<std::ptrdiff_t>(last)};
}

/// sum_{p in interval} 1/p using the prefix sums.
inline double interval_recip_sum(const PrimeInterval& interval, const PrimeTable& table) {
  if (interval.hi > static_cast<double>(table.limit)) {
    throw RangeError("interval_recip_sum: interval exceeds sieve limit");
  }
  const std::size_t first = table.count_upto(interval.lo);
  const std::size_t last = table.count_upto(interval.hi);
  if (last == first) return 0.0;
  CompensatedSum s;
  for (std::size_t i = first; i < last; ++i) s.add(1.0 / static_cast<double>(table.primes[i]));
  return s.value();
}

// ---------------------------------------------------------------------------
// On-disk cache: 8-byte magic "ZMLPRIM1" followed by little-endian uint64 primes.

inline constexpr std::array<char, 8> kPrimeCacheMagic = {'Z', 'M', 'L', 'P', 'R', 'I', 'M', '1'};

inline void save_prime_cache(const std::string& path, const PrimeTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_prime_cache: cannot open " + path);
  out.write(kPrimeCacheMagic.data(), kPrimeCacheMagic.size());
  for (std::uint64_t p : table.primes) {
    std::array<unsigned char, 8> bytes{};
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(p >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes.data()), 8);
  }
  if (!out) throw Error("save_prime_cache: write failed for " + path);
}

/// Loads a cache written by save_prime_cache. The table limit is taken to be
/// `limit` when given, otherwise the largest stored prime.
inline PrimeTable load_prime_cache(const std::string& path, std::uint64_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_prime_cache: cannot open " + path);
  std::array<char, 8> magic{};
  in.read(magic.data(), 8);
  if (!in || magic != kPrimeCacheMagic) throw DomainError("load_prime_cache: bad magic in " + path);
  PrimeTable table;
  std::array<unsigned char, 8> bytes{};
  while (in.read(reinterpret_cast<char*>(bytes.data()), 8)) {
    std::uint64_t p = 0;
    for (int b = 0; b < 8; ++b) p |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    if (!table.primes.empty() && p <= table.primes.back()) {
      throw DomainError("load_prime_cache: primes not strictly increasing in " + path);
    }
    table.primes.push_back(p);
  }
  if (in.gcount() != 0) throw DomainError("load_prime_cache: truncated record in " + path);
  if (table.primes.empty()) throw DomainError("load_prime_cache: empty cache " + path);
  table.limit = limit ? limit : table.primes.back();
  if (table.primes.back() > table.limit) throw DomainError("load_prime_cache: prime above limit");
  detail::fill_prefix_sums(table);
  return table;
}

}  // namespace zml
