#pragma once

// Riemann zeta function: Euler-Maclaurin everywhere, Riemann-Siegel on the
// critical line at large height, Cauchy-circle derivatives.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "zml/error.hpp"
#include "zml/summation.hpp"

namespace zml {

using cplx = std::complex<double>;

struct ZetaEvalConfig {
  enum class Method { euler_maclaurin, riemann_siegel_auto };
  Method method = Method::riemann_siegel_auto;
  /// Absolute error target; NaN selects 1e-10 for |t| <= 1e4 and 1e-8 above.
  /// An explicit target is binding: an estimate above it raises AccuracyError.
  double target_abs_error = std::numeric_limits<double>::quiet_NaN();
  /// Radius of the derivative circle at height t; empty selects min(1/log(2+|t|), 1/4).
  std::function<double(double)> radius_rule;
  /// Height above which the Riemann-Siegel path is used on Re s = 1/2.
  double rs_threshold = 1e3;

  double target(double t) const {
    if (!std::isnan(target_abs_error)) return target_abs_error;
    return std::abs(t) <= 1e4 ? 1e-10 : 1e-8;
  }
  double radius(double t) const {
    if (radius_rule) return radius_rule(t);
    return std::min(1.0 / std::log(2.0 + std::abs(t)), 0.25);
  }
};

struct ZetaValue {
  cplx value;
  double est_error;
};

namespace detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr long double kTwoPiL = 6.283185307179586476925286766559L;
inline constexpr long double kPiL = 3.141592653589793238462643383279L;

// B_{2k} for k = 1..15.
inline constexpr std::array<double, 15> kBernoulli = {
    1.0 / 6.0,           -1.0 / 30.0,          1.0 / 42.0,          -1.0 / 30.0,
    5.0 / 66.0,          -691.0 / 2730.0,      7.0 / 6.0,           -3617.0 / 510.0,
    43867.0 / 798.0,     -174611.0 / 330.0,    854513.0 / 138.0,    -236364091.0 / 2730.0,
    8553103.0 / 6.0,     -23749461029.0 / 870.0, 8615841276005.0 / 14322.0};

// Smallest prime factor table, built once.
inline const std::vector<std::uint32_t>& spf_table() {
  static const std::vector<std::uint32_t> table = [] {
    constexpr std::uint32_t kSize = 1u << 21;
    std::vector<std::uint32_t> spf(kSize, 0);
    for (std::uint32_t i = 2; i < kSize; ++i) {
      if (spf[i]) continue;
      for (std::uint64_t j = i; j < kSize; j += i) {
        if (!spf[j]) spf[j] = i;
      }
    }
    return spf;
  }();
  return table;
}

// n^{-s} for n = 1..count into out[1..count]; multiplicative for composites.
inline void fill_powers(cplx s, std::size_t count, std::vector<cplx>& out) {
  out.resize(count + 1);
  const auto& spf = spf_table();
  out[1] = 1.0;
  for (std::size_t n = 2; n <= count; ++n) {
    if (n < spf.size() && spf[n] != n) {
      out[n] = out[spf[n]] * out[n / spf[n]];
    } else {
      out[n] = std::exp(-s * std::log(static_cast<double>(n)));
    }
  }
}

inline long double reduce_phase(long double x) {
  x = std::fmod(x, kTwoPiL);
  if (x > kPiL) x -= kTwoPiL;
  if (x < -kPiL) x += kTwoPiL;
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gamma

/// Principal-branch-continuous log Gamma(z) by Stirling's series after an
/// upward shift to Re z >= 15. Im part is continuous along horizontal lines
/// with Re z > 0.
inline cplx log_gamma(cplx z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
    throw PoleError("log_gamma: pole at nonpositive integer");
  }
  cplx shift = 0.0;
  while (z.real() < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  const cplx zinv = 1.0 / z;
  const cplx zinv2 = zinv * zinv;
  cplx series = 0.0;
  cplx p = zinv;
  for (int k = 1; k <= 10; ++k) {
    series += detail::kBernoulli[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * p;
    p *= zinv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(detail::kTwoPi) + series - shift;
}

/// log sin(z) without overflow for large |Im z|.
inline cplx log_sin(cplx z) {
  const cplx i(0.0, 1.0);
  if (z.imag() > 1.0) {
    return -i * z - std::log(-2.0 * i) + std::log(1.0 - std::exp(2.0 * i * z));
  }
  if (z.imag() < -1.0) {
    return i * z - std::log(2.0 * i) + std::log(1.0 - std::exp(-2.0 * i * z));
  }
  return std::log(std::sin(z));
}

/// chi(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1 - s), from the reflection formula.
inline cplx chi(cplx s) {
  const double pi = std::numbers::pi;
  return std::exp(s * std::log(2.0) + (s - 1.0) * std::log(pi) + log_sin(pi * s / 2.0) +
                  log_gamma(1.0 - s));
}

// ---------------------------------------------------------------------------
// Riemann-Siegel theta

/// theta(t) in long double, unreduced.
inline long double riemann_siegel_theta_l(double t) {
  const long double tl = t;
  if (std::abs(t) < 50.0) {
    const cplx lg = log_gamma(cplx(0.25, t / 2.0));
    return static_cast<long double>(lg.imag()) - tl / 2.0L * std::log(detail::kPiL);
  }
  const long double t2 = tl * tl;
  return tl / 2.0L * std::log(tl / detail::kTwoPiL) - tl / 2.0L - detail::kPiL / 8.0L +
         1.0L / (48.0L * tl) + 7.0L / (5760.0L * tl * t2) + 31.0L / (80640.0L * tl * t2 * t2) +
         127.0L / (430080.0L * tl * t2 * t2 * t2);
}

inline double riemann_siegel_theta(double t) {
  return static_cast<double>(riemann_siegel_theta_l(t));
}

/// theta'(t) from the asymptotic series (t >= 50).
inline double riemann_siegel_theta_prime(double t) {
  const double t2 = t * t;
  return 0.5 * std::log(t / detail::kTwoPi) - 1.0 / (48.0 * t2) - 7.0 / (1920.0 * t2 * t2) -
         31.0 / (16128.0 * t2 * t2 * t2) - 127.0 / (61440.0 * t2 * t2 * t2 * t2);
}

// ---------------------------------------------------------------------------
// Euler-Maclaurin

/// zeta(s) by Euler-Maclaurin summation with an adaptive number of terms.
inline ZetaValue zeta_euler_maclaurin(cplx s, double target = 1e-10) {
  if (s == cplx(1.0, 0.0)) throw PoleError("zeta: pole at s = 1");
  if (s.real() < -1.0) throw DomainError("zeta: Re s < -1 is outside the supported region");
  thread_local std::vector<cplx> powers;
  std::size_t n_terms = 10 + static_cast<std::size_t>(std::ceil(std::abs(s) / 2.0));
  for (int attempt = 0; attempt < 6; ++attempt, n_terms *= 2) {
    const double N = static_cast<double>(n_terms);
    detail::fill_powers(s, n_terms, powers);
    CompensatedComplexSum acc;
    for (std::size_t n = 1; n < n_terms; ++n) acc.add(powers[n]);
    const cplx n_pow = powers[n_terms];  // N^{-s}
    acc.add(n_pow * N / (s - 1.0));
    acc.add(0.5 * n_pow);
    // B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
    cplx poch = s;
    cplx npow = n_pow / N;
    double fact = 2.0;
    double last = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int k = 1; k <= 15; ++k) {
      const cplx term = detail::kBernoulli[k - 1] / fact * poch * npow;
      const double mag = std::abs(term);
      if (mag > last) break;  // asymptotic series started to diverge
      acc.add(term);
      last = mag;
      if (mag < 0.01 * target) {
        converged = true;
        break;
      }
      poch *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
      npow /= N * N;
      fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    const cplx value = acc.value();
    const double rounding = 1e-15 * (std::abs(value) + std::pow(N, std::max(0.0, 1.0 - s.real())));
    if (converged) return {value, last + rounding};
    if (attempt == 5) {
      throw AccuracyError("zeta_euler_maclaurin: no convergence", std::abs(value), last);
    }
  }
  throw AccuracyError("zeta_euler_maclaurin: no convergence", 0.0, 0.0);
}

// ---------------------------------------------------------------------------
// Riemann-Siegel

namespace detail {

// Taylor coefficients of Psi(1/2 + x) = cos(2 pi (x^2 - 5/16)) / cos(2 pi x + pi)
// in x, from a trapezoid Cauchy integral on |x| = 1.
inline constexpr int kPsiDegree = 72;

inline const std::array<long double, kPsiDegree + 1>& psi_taylor() {
  static const std::array<long double, kPsiDegree + 1> coeffs = [] {
    constexpr int kNodes = 256;
    std::array<long double, kPsiDegree + 1> c{};
    std::array<std::complex<long double>, kNodes> values{};
    for (int j = 0; j < kNodes; ++j) {
      const long double phi = kTwoPiL * j / kNodes;
      const std::complex<long double> x(std::cos(phi), std::sin(phi));
      values[j] = std::cos(kTwoPiL * (x * x - 5.0L / 16.0L)) / std::cos(kTwoPiL * x + kPiL);
    }
    for (int m = 0; m <= kPsiDegree; ++m) {
      std::complex<long double> acc = 0;
      for (int j = 0; j < kNodes; ++j) {
        const long double phi = -kTwoPiL * static_cast<long double>(m) * j / kNodes;
        acc += values[j] * std::complex<long double>(std::cos(phi), std::sin(phi));
      }
      c[m] = m % 2 ? 0.0L : acc.real() / kNodes;
    }
    return c;
  }();
  return coeffs;
}

// Psi^{(d)}(1/2 + x) = x^{d mod 2} sum_i a_{d,i} x^{2i}; Psi is even in x.
struct PsiTables {
  std::array<std::vector<double>, 14> a;
};

inline const PsiTables& psi_tables() {
  static const PsiTables tables = [] {
    const auto& c = psi_taylor();
    PsiTables t;
    for (int d = 0; d < 14; ++d) {
      for (int m = d + (d % 2); m <= kPsiDegree; m += 2) {
        long double falling = 1;
        for (int i = 0; i < d; ++i) falling *= static_cast<long double>(m - i);
        t.a[d].push_back(static_cast<double>(c[m] * falling));
      }
    }
    return t;
  }();
  return tables;
}

// Psi^{(d)}(p) for d = 0..13.
inline std::array<double, 14> psi_derivatives(double p) {
  const auto& t = psi_tables();
  const double x = p - 0.5;
  const double y = x * x;
  std::array<double, 14> out{};
  for (int d = 0; d < 14; ++d) {
    const auto& a = t.a[d];
    double acc = 0.0;
    for (std::size_t i = a.size(); i-- > 0;) acc = acc * y + a[i];
    out[d] = d % 2 ? acc * x : acc;
  }
  return out;
}

// C_0..C_4 and their p-derivatives.
inline void rs_coefficients(double p, std::array<double, 5>& C, std::array<double, 5>& dC) {
  const auto d = psi_derivatives(p);
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  constexpr double pi4 = pi2 * pi2;
  constexpr double pi6 = pi4 * pi2;
  constexpr double pi8 = pi4 * pi4;
  auto coeffs = [&](int o, std::array<double, 5>& out) {
    out[0] = d[o];
    out[1] = -d[3 + o] / (96.0 * pi2);
    out[2] = d[6 + o] / (18432.0 * pi4) + d[2 + o] / (64.0 * pi2);
    out[3] = -d[9 + o] / (5308416.0 * pi6) - d[5 + o] / (3840.0 * pi4) - d[1 + o] / (64.0 * pi2);
    out[4] = d[12 + o] / (2038431744.0 * pi8) + 11.0 * d[8 + o] / (5898240.0 * pi6) +
             19.0 * d[4 + o] / (24576.0 * pi4) + d[o] / (128.0 * pi2);
  };
  coeffs(0, C);
  coeffs(1, dC);
}

}  // namespace detail

struct HardyZ {
  double Z;
  double dZ;
  double theta;  // reduced to (-pi, pi]
  double est_error;
};

namespace detail {

// log n as an unevaluated double pair and n^{-1/2}, grown on demand per thread.
struct RsTables {
  std::vector<double> log_hi{0.0}, log_lo{0.0}, rsqrt_n{0.0};
  void ensure(std::size_t n) {
    for (std::size_t i = log_hi.size(); i <= n; ++i) {
      const long double l = std::log(static_cast<long double>(i));
      const double hi = static_cast<double>(l);
      log_hi.push_back(hi);
      log_lo.push_back(static_cast<double>(l - hi));
      rsqrt_n.push_back(1.0 / std::sqrt(static_cast<double>(i)));
    }
  }
};

// t log n mod 2 pi, accurate to a few ulps of 2 pi.
inline double phase_mod_two_pi(double t, double log_hi, double log_lo) {
  constexpr double kTwoPiHi = 6.283185307179586;
  constexpr double kTwoPiLo = 2.4492935982947064e-16;
  const double prod = t * log_hi;
  const double prod_err = std::fma(t, log_hi, -prod) + t * log_lo;
  const double k = std::nearbyint(prod / kTwoPiHi);
  return std::fma(-k, kTwoPiHi, prod) - k * kTwoPiLo + prod_err;
}

}  // namespace detail

/// Hardy Z(t) and Z'(t) by the Riemann-Siegel formula with four correction terms.
inline HardyZ hardy_z_riemann_siegel(double t) {
  if (t < 10.0) throw DomainError("hardy_z_riemann_siegel: requires t >= 10");
  const long double a_l = std::sqrt(static_cast<long double>(t) / detail::kTwoPiL);
  const auto N = static_cast<std::size_t>(std::floor(a_l));
  const double a = static_cast<double>(a_l);
  const double p = static_cast<double>(a_l - static_cast<long double>(N));
  const long double theta_l = riemann_siegel_theta_l(t);
  const double theta = static_cast<double>(detail::reduce_phase(theta_l));
  const double dtheta = riemann_siegel_theta_prime(t);
  thread_local detail::RsTables tables;
  tables.ensure(N);
  double z = 0.0, dz = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double ph = theta - detail::phase_mod_two_pi(t, tables.log_hi[n], tables.log_lo[n]);
    const double w = tables.rsqrt_n[n];
    z += w * std::cos(ph);
    dz -= w * std::sin(ph) * (dtheta - tables.log_hi[n]);
  }
  z *= 2.0;
  dz *= 2.0;
  std::array<double, 5> C{}, dC{};
  detail::rs_coefficients(p, C, dC);
  const double sign = (N % 2 == 1) ? 1.0 : -1.0;  // (-1)^{N-1}
  const double da = 1.0 / (4.0 * std::numbers::pi * a);
  double r = 0.0, dr = 0.0;
  double aj = 1.0 / std::sqrt(a);  // a^{-j-1/2}
  for (int j = 0; j <= 4; ++j) {
    r += C[j] * aj;
    dr += dC[j] * aj - (j + 0.5) * C[j] * aj / a;
    aj /= a;
  }
  z += sign * r;
  dz += sign * da * dr;
  const double err = 0.002 * std::pow(a, -5.5) + 3e-13 * std::sqrt(t);
  return {z, dz, theta, err};
}

// ---------------------------------------------------------------------------
// zeta

namespace detail {

inline ZetaValue enforce_target(const ZetaValue& v, const ZetaEvalConfig& cfg, const char* what) {
  if (!std::isnan(cfg.target_abs_error) && !(v.est_error <= cfg.target_abs_error)) {
    throw AccuracyError(std::string(what) + ": error estimate above the requested target",
                        std::abs(v.value), v.est_error);
  }
  return v;
}

inline ZetaValue zeta_eval_unchecked(cplx s, const ZetaEvalConfig& cfg) {
  if (s == cplx(1.0, 0.0)) throw PoleError("zeta: pole at s = 1");
  if (s.real() < -1.0) throw DomainError("zeta: Re s < -1 is outside the supported region");
  const double t = s.imag();
  if (cfg.method == ZetaEvalConfig::Method::riemann_siegel_auto && s.real() == 0.5 &&
      std::abs(t) > cfg.rs_threshold) {
    const HardyZ h = hardy_z_riemann_siegel(std::abs(t));
    const cplx v = std::polar(h.Z, -h.theta);
    return {t > 0 ? v : std::conj(v), h.est_error};
  }
  if (t < 0) {
    const ZetaValue v = zeta_euler_maclaurin(std::conj(s), cfg.target(t));
    return {std::conj(v.value), v.est_error};
  }
  return zeta_euler_maclaurin(s, cfg.target(t));
}

}  // namespace detail

/// zeta(s) with an error estimate.
inline ZetaValue zeta_eval(cplx s, const ZetaEvalConfig& cfg = {}) {
  return detail::enforce_target(detail::zeta_eval_unchecked(s, cfg), cfg, "zeta");
}

inline cplx zeta(cplx s, const ZetaEvalConfig& cfg = {}) { return zeta_eval(s, cfg).value; }

/// Hardy Z(t) = exp(i theta(t)) zeta(1/2 + it), real for real t.
inline double hardy_z(double t, const ZetaEvalConfig& cfg = {}) {
  const cplx v = zeta(cplx(0.5, t), cfg);
  const double th = static_cast<double>(detail::reduce_phase(riemann_siegel_theta_l(t)));
  return (std::polar(1.0, th) * v).real();
}

// ---------------------------------------------------------------------------
// Cauchy-circle derivatives

/// f^{(l)}(c) = l!/(n r^l) sum_j f(c + r w_j) w_j^{-l}, w_j = exp(2 pi i j / n),
/// with n doubled from 8 until successive estimates agree to `target` (or to
/// the rounding floor implied by the sampled magnitudes).
///
/// `f` returns ZetaValue-like {value, est_error}.
template <class F>
ZetaValue circle_derivative(F&& f, cplx c, int l, double r, double target,
                            int max_nodes = 1 << 14) {
  if (l < 0) throw DomainError("circle_derivative: negative order");
  if (!(r > 0.0)) throw DomainError("circle_derivative: radius must be positive");
  double lfact = 1.0;
  for (int i = 2; i <= l; ++i) lfact *= i;
  const double scale = lfact / std::pow(r, l);
  std::vector<cplx> samples;  // weighted samples, ordered by node index of the finest grid
  double max_abs = 0.0, max_err = 0.0;
  auto sample = [&](int j, int n) {
    const double phi = detail::kTwoPi * j / n;
    const cplx w = std::polar(1.0, phi);
    const auto v = f(c + r * w);
    max_abs = std::max(max_abs, std::abs(v.value));
    max_err = std::max(max_err, v.est_error);
    return v.value * std::polar(1.0, -l * phi);
  };
  int n = 8;
  CompensatedComplexSum acc;
  for (int j = 0; j < n; ++j) acc.add(sample(j, n));
  cplx prev = scale * acc.value() / static_cast<double>(n);
  for (n = 16; n <= max_nodes; n *= 2) {
    for (int j = 1; j < n; j += 2) acc.add(sample(j, n));
    const cplx est = scale * acc.value() / static_cast<double>(n);
    const double diff = std::abs(est - prev);
    const double floor = scale * (max_err + 1e-14 * max_abs);
    if (diff <= std::max(target, floor)) return {est, diff + floor};
    prev = est;
  }
  throw AccuracyError("circle_derivative: no convergence within " + std::to_string(max_nodes) +
                          " nodes",
                      std::abs(prev), 0.0);
}

/// zeta^{(l)}(c) at an arbitrary point via the circle rule.
inline ZetaValue zeta_deriv_at(cplx c, int l, const ZetaEvalConfig& cfg = {}) {
  if (c == cplx(1.0, 0.0)) throw PoleError("zeta_deriv: pole at s = 1");
  const double r = std::min(cfg.radius(c.imag()), 0.5 * std::abs(c - 1.0));
  ZetaEvalConfig inner = cfg;
  inner.method = ZetaEvalConfig::Method::euler_maclaurin;
  const double tgt = cfg.target(c.imag());
  const ZetaValue v =
      circle_derivative([&](cplx s) { return detail::zeta_eval_unchecked(s, inner); }, c, l, r, tgt);
  return detail::enforce_target(v, cfg, "zeta_deriv");
}

/// zeta^{(l)}(1/2 + it) for 1 <= l <= 4.
///
/// For l = 1 above the Riemann-Siegel threshold the derivative comes from
/// zeta = exp(-i theta) Z, i.e. zeta' = exp(-i theta)(-theta' Z - i Z').
inline ZetaValue zeta_deriv_eval(double t, int l, const ZetaEvalConfig& cfg = {}) {
  if (l < 1 || l > 4) throw DomainError("zeta_deriv: order must be in 1..4");
  if (cfg.method == ZetaEvalConfig::Method::riemann_siegel_auto && l == 1 &&
      std::abs(t) > cfg.rs_threshold) {
    const HardyZ h = hardy_z_riemann_siegel(std::abs(t));
    const double dth = riemann_siegel_theta_prime(std::abs(t));
    const cplx v = std::polar(1.0, -h.theta) * cplx(-dth * h.Z, -h.dZ);
    return detail::enforce_target({t > 0 ? v : std::conj(v), h.est_error * (1.0 + dth)}, cfg,
                                  "zeta_deriv");
  }
  return zeta_deriv_at(cplx(0.5, t), l, cfg);
}

inline cplx zeta_deriv(double t, int l, const ZetaEvalConfig& cfg = {}) {
  return zeta_deriv_eval(t, l, cfg).value;
}

// ---------------------------------------------------------------------------

struct GonekRow {
  double sigma;
  double max_ratio;
  double argmax_t;
  std::vector<double> excluded_t;
};

/// max over the grid of |zeta'(sigma + it)| (1 + |t|)^{-(1 - sigma)/2 - eps}
/// for sigma in {1/2, 3/4, 1}. The pole at sigma = 1, t = 0 is excluded.
inline std::vector<GonekRow> gonek_bound_check(std::span<const double> t_grid,
                                               const ZetaEvalConfig& cfg = {}, double eps = 0.1) {
  std::vector<GonekRow> rows;
  for (double sigma : {0.5, 0.75, 1.0}) {
    GonekRow row{sigma, 0.0, 0.0, {}};
    for (double t : t_grid) {
      const cplx c(sigma, t);
      if (std::abs(c - 1.0) < 1e-3) {
        row.excluded_t.push_back(t);
        continue;
      }
      const cplx d = sigma == 0.5 ? zeta_deriv(t, 1, cfg) : zeta_deriv_at(c, 1, cfg).value;
      const double ratio = std::abs(d) * std::pow(1.0 + std::abs(t), -(1.0 - sigma) / 2.0 - eps);
      if (ratio > row.max_ratio) {
        row.max_ratio = ratio;
        row.argmax_t = t;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace zml
