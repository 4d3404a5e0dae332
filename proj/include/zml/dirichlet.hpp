#pragma once

// Sparse Dirichlet polynomials sum_n a(n) n^{-s} and their mean values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zml/error.hpp"
#include "zml/primes.hpp"
#include "zml/summation.hpp"

namespace zml {

using cplx = std::complex<double>;

inline constexpr std::uint64_t kMaxIndex = static_cast<std::uint64_t>(INT64_MAX);

/// Sparse Dirichlet polynomial in normal form: indices ascending, unique,
/// every stored coefficient nonzero.
class DirichletPolynomial {
 public:
  using Term = std::pair<std::uint64_t, cplx>;

  DirichletPolynomial() = default;

  /// Builds a polynomial from arbitrary terms. Duplicate indices are summed in
  /// the order given and exact zeros are dropped.
  static DirichletPolynomial from_terms(std::vector<Term> terms) {
    for (const auto& [n, c] : terms) {
      if (n == 0) throw DomainError("DirichletPolynomial: index 0 is not allowed");
      if (n > kMaxIndex) throw OverflowError("DirichletPolynomial: index exceeds 2^63-1");
    }
    std::stable_sort(terms.begin(), terms.end(),
                     [](const Term& a, const Term& b) { return a.first < b.first; });
    DirichletPolynomial out;
    out.terms_.reserve(terms.size());
    for (std::size_t i = 0; i < terms.size();) {
      std::size_t j = i;
      CompensatedComplexSum acc;
      while (j < terms.size() && terms[j].first == terms[i].first) acc.add(terms[j++].second);
      const cplx c = acc.value();
      if (c != cplx(0.0)) out.terms_.emplace_back(terms[i].first, c);
      i = j;
    }
    return out;
  }

  static DirichletPolynomial delta_one() { return from_terms({{1, cplx(1.0)}}); }

  std::span<const Term> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  /// Largest stored index, 0 for the empty polynomial.
  std::uint64_t length_bound() const noexcept { return terms_.empty() ? 0 : terms_.back().first; }

  cplx coeff(std::uint64_t n) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), n,
                               [](const Term& t, std::uint64_t v) { return t.first < v; });
    return (it != terms_.end() && it->first == n) ? it->second : cplx(0.0);
  }

  bool contains(std::uint64_t n) const { return coeff(n) != cplx(0.0); }

  friend bool operator==(const DirichletPolynomial&, const DirichletPolynomial&) = default;

 private:
  std::vector<Term> terms_;
};

/// Coefficientwise sum.
inline DirichletPolynomial dp_add(const DirichletPolynomial& a, const DirichletPolynomial& b) {
  std::vector<DirichletPolynomial::Term> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.terms().begin(), a.terms().end());
  all.insert(all.end(), b.terms().begin(), b.terms().end());
  return DirichletPolynomial::from_terms(std::move(all));
}

inline DirichletPolynomial dp_scale(const DirichletPolynomial& a, cplx c) {
  std::vector<DirichletPolynomial::Term> all;
  all.reserve(a.size());
  for (const auto& [n, v] : a.terms()) all.emplace_back(n, v * c);
  return DirichletPolynomial::from_terms(std::move(all));
}

/// Coefficientwise complex conjugate.
inline DirichletPolynomial dp_conj(const DirichletPolynomial& a) {
  std::vector<DirichletPolynomial::Term> all;
  all.reserve(a.size());
  for (const auto& [n, v] : a.terms()) all.emplace_back(n, std::conj(v));
  return DirichletPolynomial::from_terms(std::move(all));
}

/// Checked index product; nullopt when the product exceeds 2^63-1.
inline std::optional<std::uint64_t> checked_index_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r) || r > kMaxIndex) return std::nullopt;
  return r;
}

/// Dirichlet convolution (A*B)[n] = sum_{de=n} A[d] B[e].
///
/// With a cap, products with index > cap are dropped. Without one, an index
/// beyond 2^63-1 raises OverflowError.
inline DirichletPolynomial dp_mul(const DirichletPolynomial& a, const DirichletPolynomial& b,
                                  std::optional<std::uint64_t> cap = std::nullopt) {
  std::vector<DirichletPolynomial::Term> all;
  all.reserve(a.size() * b.size());
  for (const auto& [m, x] : a.terms()) {
    for (const auto& [n, y] : b.terms()) {
      const auto prod = checked_index_mul(m, n);
      if (!prod) {
        if (cap) break;  // b is ascending, later products overflow too
        throw OverflowError("dp_mul: index product " + std::to_string(m) + " * " +
                            std::to_string(n) + " overflows; supply a cap");
      }
      if (cap && *prod > *cap) break;
      all.emplace_back(*prod, x * y);
    }
  }
  return DirichletPolynomial::from_terms(std::move(all));
}

/// Truncated exponential sum_{j=0}^{ceil(ell)} (alpha P)^j / j! of a
/// prime-supported polynomial P.
inline DirichletPolynomial dp_exp_truncated(const DirichletPolynomial& p, double alpha, double ell,
                                            std::optional<std::uint64_t> cap = std::nullopt) {
  for (const auto& [n, c] : p.terms()) {
    if (!is_prime(n)) {
      throw DomainError("dp_exp_truncated: index " + std::to_string(n) + " is not prime");
    }
  }
  const int top = ell <= 0.0 ? 0 : static_cast<int>(std::ceil(ell));
  const DirichletPolynomial scaled = dp_scale(p, cplx(alpha));
  DirichletPolynomial result = DirichletPolynomial::delta_one();
  DirichletPolynomial term = DirichletPolynomial::delta_one();
  for (int j = 1; j <= top; ++j) {
    term = dp_scale(dp_mul(term, scaled, cap), cplx(1.0 / j));
    if (term.empty()) break;
    result = dp_add(result, term);
  }
  return result;
}

/// (log * A)[n] = sum_{d m = n} log(d) A[m], evaluated at the requested indices.
inline DirichletPolynomial dp_log_convolve(const DirichletPolynomial& a,
                                           std::span<const std::uint64_t> targets) {
  std::vector<DirichletPolynomial::Term> out;
  out.reserve(targets.size());
  for (std::uint64_t n : targets) {
    CompensatedComplexSum acc;
    for (const auto& [m, c] : a.terms()) {
      if (m > n) break;
      if (n % m == 0) acc.add(std::log(static_cast<double>(n / m)) * c);
    }
    out.emplace_back(n, acc.value());
  }
  return DirichletPolynomial::from_terms(std::move(out));
}

/// (log * A) on every index n <= cap (multiples of A's support only).
inline DirichletPolynomial dp_log_convolve(const DirichletPolynomial& a, std::uint64_t cap) {
  std::vector<DirichletPolynomial::Term> out;
  for (const auto& [m, c] : a.terms()) {
    if (m > cap) break;
    for (std::uint64_t d = 2; d <= cap / m; ++d) {
      out.emplace_back(m * d, std::log(static_cast<double>(d)) * c);
    }
  }
  return DirichletPolynomial::from_terms(std::move(out));
}

/// sum_n A[n] n^{-s}, reduced in ascending index order with compensation.
inline cplx dp_eval(const DirichletPolynomial& a, cplx s) {
  CompensatedComplexSum acc;
  for (const auto& [n, c] : a.terms()) {
    acc.add(c * std::exp(-s * std::log(static_cast<double>(n))));
  }
  return acc.value();
}

// ---------------------------------------------------------------------------
// Mean value of a product of two Dirichlet polynomials along a vertical segment.

/// Weight g(t) for the mean value estimate.
///
/// `constant` uses g = value. `custom` needs g, its integral over the range
/// and the total variation of g on it (both may be left NaN to be computed
/// from g and dg by Gauss-Legendre quadrature).
struct MeanValueWeight {
  enum class Kind { constant, custom };
  Kind kind = Kind::constant;
  double value = 1.0;
  std::function<double(double)> g;
  std::function<double(double)> dg;
  double integral = std::numeric_limits<double>::quiet_NaN();
  double total_variation = std::numeric_limits<double>::quiet_NaN();

  static MeanValueWeight constant(double v = 1.0) { return {Kind::constant, v, {}, {}, NAN, NAN}; }
};

struct MeanValueTerm {
  cplx main;
  double error_bound;
};

namespace detail {

// 20-point Gauss-Legendre composite rule for weight data.
inline double gl_integrate(const std::function<double(double)>& f, double a, double b) {
  static constexpr double x[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                                   0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                                   0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                                   0.9931285991850949};
  static constexpr double w[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                                   0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                                   0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                                   0.0176140071391521};
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 1.0)));
  const double h = (b - a) / panels;
  CompensatedSum s;
  for (int i = 0; i < panels; ++i) {
    const double c = a + (i + 0.5) * h;
    for (int k = 0; k < 10; ++k) {
      s.add(0.5 * h * w[k] * (f(c + 0.5 * h * x[k]) + f(c - 0.5 * h * x[k])));
    }
  }
  return s.value();
}

}  // namespace detail

/// Main term (int g) * sum_n A[n] B[n] and the explicit error bound
/// C (|g(T1)| + |g(T2)| + int |g'|) (sum n|A_n|^2)^{1/2} (sum n|B_n|^2)^{1/2}
/// for int g(t) (sum A_n n^{-it}) (sum B_n n^{it}) dt over [T1, T2].
inline MeanValueTerm mv_main_term(const DirichletPolynomial& a, const DirichletPolynomial& b,
                                  const MeanValueWeight& weight, double t1, double t2,
                                  double error_constant = 3.0) {
  if (!(t1 < t2)) throw DomainError("mv_main_term: require T1 < T2");
  double integral = 0.0;
  double boundary = 0.0;
  double variation = 0.0;
  if (weight.kind == MeanValueWeight::Kind::constant) {
    integral = weight.value * (t2 - t1);
    boundary = 2.0 * std::abs(weight.value);
  } else {
    if (!weight.g) throw DomainError("mv_main_term: custom weight without g");
    integral = std::isnan(weight.integral) ? detail::gl_integrate(weight.g, t1, t2) : weight.integral;
    if (std::isnan(weight.total_variation)) {
      if (!weight.dg) throw DomainError("mv_main_term: custom weight needs dg or total_variation");
      variation = detail::gl_integrate([&](double t) { return std::abs(weight.dg(t)); }, t1, t2);
    } else {
      variation = weight.total_variation;
    }
    boundary = std::abs(weight.g(t1)) + std::abs(weight.g(t2));
  }
  if (!std::isfinite(integral) || !std::isfinite(boundary) || !std::isfinite(variation) ||
      variation < 0.0) {
    throw DomainError("mv_main_term: weight descriptor is not finite on [T1, T2]");
  }

  CompensatedComplexSum diag;
  CompensatedSum na, nb;
  for (const auto& [n, c] : a.terms()) {
    diag.add(c * b.coeff(n));
    na.add(static_cast<double>(n) * std::norm(c));
  }
  for (const auto& [n, c] : b.terms()) nb.add(static_cast<double>(n) * std::norm(c));
  return {integral * diag.value(),
          error_constant * (boundary + variation) * std::sqrt(na.value()) * std::sqrt(nb.value())};
}

// ---------------------------------------------------------------------------
// Text serialization: "# zml-dp v1" header, then "n<TAB>re<TAB>im" per term.

inline std::string dp_to_text(const DirichletPolynomial& a) {
  std::ostringstream out;
  out << "# zml-dp v1\n" << std::setprecision(17);
  for (const auto& [n, c] : a.terms()) out << n << '\t' << c.real() << '\t' << c.imag() << '\n';
  return out.str();
}

inline DirichletPolynomial dp_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# zml-dp v1", 0) != 0) {
    throw DomainError("dp_from_text: missing '# zml-dp v1' header");
  }
  std::vector<DirichletPolynomial::Term> terms;
  std::uint64_t prev = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::uint64_t n = 0;
    double re = 0, im = 0;
    if (!(fields >> n >> re >> im)) throw DomainError("dp_from_text: malformed line '" + line + "'");
    if (n <= prev) throw DomainError("dp_from_text: indices must be strictly ascending");
    prev = n;
    terms.emplace_back(n, cplx(re, im));
  }
  return DirichletPolynomial::from_terms(std::move(terms));
}

// ---------------------------------------------------------------------------
// Arithmetic helpers over a known prime support.

/// Exponent vector of n over `primes`; throws DomainError when n has a prime
/// factor outside the list.
inline std::vector<int> exponents_over(std::uint64_t n, std::span<const std::uint64_t> primes) {
  std::vector<int> e(primes.size(), 0);
  for (std::size_t i = 0; i < primes.size() && n > 1; ++i) {
    while (n % primes[i] == 0) {
      n /= primes[i];
      ++e[i];
    }
  }
  if (n != 1) throw DomainError("exponents_over: index has a prime factor outside the support");
  return e;
}

inline int big_omega(std::span<const int> exponents) {
  int s = 0;
  for (int e : exponents) s += e;
  return s;
}

/// g(n) = prod r! over p^r || n, the weight making E_ell(alpha P) have
/// coefficients alpha^Omega(n) / g(n).
inline double g_weight(std::span<const int> exponents) {
  double g = 1.0;
  for (int e : exponents) g *= std::tgamma(e + 1.0);
  return g;
}

}  // namespace zml
