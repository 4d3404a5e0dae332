#pragma once

// Moment integrals of zeta and zeta' on the critical line, twisted by
// mollifiers, and the inequalities relating them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "zml/dirichlet.hpp"
#include "zml/error.hpp"
#include "zml/mollifier.hpp"
#include "zml/quadrature.hpp"
#include "zml/summation.hpp"
#include "zml/zeta.hpp"

namespace zml {

enum class MomentKind { I_kl, M_k, S1, S2, S3_product };

inline const char* to_string(MomentKind k) {
  switch (k) {
    case MomentKind::I_kl: return "I";
    case MomentKind::M_k: return "M";
    case MomentKind::S1: return "S1";
    case MomentKind::S2: return "S2";
    case MomentKind::S3_product: return "S3";
  }
  return "?";
}

struct MomentConfig {
  ZetaEvalConfig zeta;
  QuadConfig quad;
  double ceiling = 1e6;
  /// Throw AccuracyError when some panel hit the depth cap untouched by tolerance.
  bool strict = true;
};

struct MomentResult {
  MomentKind kind = MomentKind::I_kl;
  double k = 0.0;
  int l = 0;
  double T_lo = 0.0;
  double T_hi = 0.0;
  cplx value;
  double est_error = 0.0;
  std::size_t panels = 0;
  double samples_per_unit_t = 0.0;
};

/// Mollifier families for alpha = k and alpha = k - 1 over one partition.
struct MollifierPair {
  MollifierFamily fk;
  MollifierFamily fkm1;
};

inline MollifierPair build_pair(const HarperPartition& p, const PrimeTable& table) {
  return {build_family(p, p.k, table), build_family(p, p.k - 1.0, table)};
}

inline MollifierPair trivial_pair(double k, double T) {
  MollifierPair pair{trivial_family(k, T), trivial_family(k, T)};
  pair.fkm1.alpha = k - 1.0;
  return pair;
}

/// prod_j (|N_j(s, k)|^2 + |Q_j(s, k)|^{2 r_k}); 1 for the trivial family.
inline double s3_integrand(const MollifierFamily& fk, cplx s) {
  double prod = 1.0;
  for (int j = 1; j <= fk.J(); ++j) {
    prod *= std::norm(eval_Nj(fk, j, s)) + std::pow(std::norm(eval_Q(fk, j, s)), fk.rk);
  }
  return prod;
}

namespace detail {

inline void check_range(double lo, double hi, const MomentConfig& cfg) {
  if (!(lo < hi)) throw DomainError("moment: require T_lo < T_hi");
  if (lo < 0.0) throw DomainError("moment: T_lo must be nonnegative");
  if (hi > cfg.ceiling) {
    throw DomainError("moment: T_hi = " + std::to_string(hi) + " exceeds the evaluation ceiling " +
                      std::to_string(cfg.ceiling));
  }
}

// zeta^{(l)}(1/2 + it), l = 0 meaning zeta itself.
inline ZetaValue zeta_l(double t, int l, const ZetaEvalConfig& cfg) {
  return l == 0 ? zeta_eval(cplx(0.5, t), cfg) : zeta_deriv_eval(t, l, cfg);
}

// |z|^{2k} and its first-order error propagation.
inline std::pair<double, double> abs_pow(const ZetaValue& z, double k) {
  if (k == 0.0) return {1.0, 0.0};
  const double a = std::abs(z.value);
  const double v = std::pow(a, 2.0 * k);
  return {v, a > 0.0 ? 2.0 * k * v / a * z.est_error : 0.0};
}

inline std::string unmet_suffix(const QuadCheckpoint& q) {
  if (q.unmet_at.empty()) return "";
  std::ostringstream out;
  out << " (first near t = " << std::setprecision(10) << q.unmet_at.front() << ")";
  return out.str();
}

inline void finish(MomentResult& r, const QuadCheckpoint& q, std::size_t comp,
                   const MomentConfig& cfg) {
  r.value = q.value[comp];
  r.est_error = q.est_error[comp];
  r.panels = q.panels;
  r.samples_per_unit_t =
      static_cast<double>(q.panels) * cfg.quad.gl_nodes / (r.T_hi - r.T_lo);
  if (cfg.strict && !q.tolerance_met) {
    throw AccuracyError(std::string("moment ") + to_string(r.kind) +
                            ": quadrature tolerance not met at the refinement cap" +
                            unmet_suffix(q),
                        std::abs(r.value), r.est_error);
  }
}

}  // namespace detail

/// Integrand of S1: -zeta'(s) N(s, k-1) N(1-s, k).
inline ZetaValue s1_integrand(const MollifierPair& pair, cplx s, const ZetaEvalConfig& cfg) {
  const ZetaValue d = s.real() == 0.5 ? zeta_deriv_eval(s.imag(), 1, cfg) : zeta_deriv_at(s, 1, cfg);
  const cplx w = eval_N(pair.fkm1, s) * eval_N(pair.fk, 1.0 - s);
  return {-d.value * w, d.est_error * std::abs(w)};
}

/// One of I_{k,l}, M_k, S1, S2, S3 over [T_lo, T_hi]. `pair` is required
/// for the twisted kinds.
inline MomentResult integrate_moment(MomentKind kind, double k, int l, double T_lo, double T_hi,
                                     const MollifierPair* pair, const MomentConfig& cfg = {}) {
  detail::check_range(T_lo, T_hi, cfg);
  if (l < 0 || l > 4) throw DomainError("integrate_moment: l must be in 0..4");
  if (k < 0.0) throw DomainError("integrate_moment: k must be nonnegative");
  const bool needs_pair =
      kind == MomentKind::S1 || kind == MomentKind::S2 || kind == MomentKind::S3_product;
  if (needs_pair && !pair) throw DomainError("integrate_moment: mollifier family required");
  MomentResult r;
  r.kind = kind;
  r.k = k;
  r.l = kind == MomentKind::M_k ? 0 : (needs_pair && kind != MomentKind::S3_product ? 1 : l);
  r.T_lo = T_lo;
  r.T_hi = T_hi;
  const int order = r.l;
  if ((kind == MomentKind::I_kl || kind == MomentKind::M_k) && k == 0.0) {
    // Integrand identically 1.
    r.value = T_hi - T_lo;
    r.panels = 1;
    r.samples_per_unit_t = 0.0;
    return r;
  }
  auto f = [&](double t, std::span<cplx> out, std::span<double> err) {
    const cplx s(0.5, t);
    switch (kind) {
      case MomentKind::I_kl:
      case MomentKind::M_k: {
        const auto [v, e] = detail::abs_pow(detail::zeta_l(t, order, cfg.zeta), k);
        out[0] = v;
        err[0] = e;
        return;
      }
      case MomentKind::S1: {
        const ZetaValue v = s1_integrand(*pair, s, cfg.zeta);
        out[0] = v.value;
        err[0] = v.est_error;
        return;
      }
      case MomentKind::S2: {
        const ZetaValue d = zeta_deriv_eval(t, 1, cfg.zeta);
        const double n2 = std::norm(eval_N(pair->fkm1, s));
        out[0] = std::norm(d.value) * n2;
        err[0] = 2.0 * std::abs(d.value) * d.est_error * n2;
        return;
      }
      case MomentKind::S3_product:
        out[0] = s3_integrand(pair->fk, s);
        return;
    }
  };
  const QuadCheckpoint q = integrate(f, 1, T_lo, T_hi, cfg.quad);
  detail::finish(r, q, 0, cfg);
  if (kind != MomentKind::S1) r.value = r.value.real();
  return r;
}

// ---------------------------------------------------------------------------
// Arithmetic side of S1

struct S1ArithResult {
  double sum_convolution;  // sum_n (log * a_{k-1})(n) a_k(n) / n
  double sum_decomposed;   // sum_n (log n / n) sum_m a_{k-1}(m) a_k(mn) / m
  double main_term;        // (T - 1) / (2 pi) * sum_convolution
};

inline bool same_partition(const HarperPartition& a, const HarperPartition& b) {
  if (a.J != b.J || a.ells != b.ells || a.T != b.T) return false;
  for (int j = 0; j < a.J; ++j) {
    if (a.intervals[j].lo != b.intervals[j].lo || a.intervals[j].hi != b.intervals[j].hi) {
      return false;
    }
  }
  return true;
}

inline S1ArithResult s1_arith_main_term(const MollifierFamily& fkm1, const MollifierFamily& fk,
                                        double T) {
  if (fkm1.trivial != fk.trivial || !same_partition(fkm1.partition, fk.partition)) {
    throw DomainError("s1_arith_main_term: families are built over different partitions");
  }
  std::vector<std::uint64_t> targets;
  for (const auto& [n, c] : fk.N.terms()) targets.push_back(n);
  const DirichletPolynomial conv = dp_log_convolve(fkm1.N, targets);
  CompensatedSum a;
  for (const auto& [n, c] : fk.N.terms()) {
    a.add((conv.coeff(n) * c).real() / static_cast<double>(n));
  }

  // (n, m, a_{k-1}(m) a_k(mn) / m), summed over m inside each n, then over n.
  std::vector<std::tuple<std::uint64_t, std::uint64_t, double>> triples;
  for (const auto& [m, cm] : fkm1.N.terms()) {
    for (const auto& [q, cq] : fk.N.terms()) {
      if (q % m == 0) triples.emplace_back(q / m, m, (cm * cq).real() / static_cast<double>(m));
    }
  }
  std::sort(triples.begin(), triples.end());
  CompensatedSum b;
  for (std::size_t i = 0; i < triples.size();) {
    const std::uint64_t n = std::get<0>(triples[i]);
    CompensatedSum inner;
    for (; i < triples.size() && std::get<0>(triples[i]) == n; ++i) inner.add(std::get<2>(triples[i]));
    const double dn = static_cast<double>(n);
    b.add(std::log(dn) / dn * inner.value());
  }
  return {a.value(), b.value(), (T - 1.0) / (2.0 * std::numbers::pi) * a.value()};
}

// ---------------------------------------------------------------------------
// S1 along two contours

/// Measured ratio of the critical-line S1 to the arithmetic main term,
/// standard toy partition, k = 1, T = 1000.
inline constexpr double kS1MeasuredNormalization = 6.114571;

struct S1ConsistencyReport {
  double k = 0.0;
  double T = 0.0;
  double kappa = 0.0;
  cplx critical;  // (a) integral over the critical line
  double critical_err = 0.0;
  cplx kappa_line;  // (b) integral over Re s = kappa
  double kappa_err = 0.0;
  cplx edge_bottom;  // integral over sigma in [1/2, kappa] at t = 1
  cplx edge_top;     // same at t = T
  double edge_err = 0.0;
  cplx contour_prediction;  // (b) - i (edge_bottom - edge_top)
  double contour_deviation = 0.0;
  double contour_allowance = 0.0;  // summed error estimates
  bool contour_ok = false;
  double arith_main = 0.0;          // (c) (T - 1)/(2 pi) sum
  double normalization_used = 0.0;  // nu in (a) ~ nu * (c)
  double measured_normalization = 0.0;
  double arith_relative_deviation = 0.0;
};

inline S1ConsistencyReport verify_s1_consistency(double k, double T, const MollifierPair& pair,
                                                 double normalization = 2.0 * std::numbers::pi,
                                                 const MomentConfig& cfg = {}) {
  detail::check_range(1.0, T, cfg);
  S1ConsistencyReport r;
  r.k = k;
  r.T = T;
  r.kappa = 1.0 + 1.0 / std::log(T);
  r.normalization_used = normalization;

  const MomentResult a = integrate_moment(MomentKind::S1, k, 1, 1.0, T, &pair, cfg);
  r.critical = a.value;
  r.critical_err = a.est_error;

  auto along = [&](auto point) {
    return [&, point](double x, std::span<cplx> out, std::span<double> err) {
      const ZetaValue v = s1_integrand(pair, point(x), cfg.zeta);
      out[0] = v.value;
      err[0] = v.est_error;
    };
  };
  const double kappa = r.kappa;
  const QuadCheckpoint b =
      integrate(along([kappa](double t) { return cplx(kappa, t); }), 1, 1.0, T, cfg.quad);
  r.kappa_line = b.value[0];
  r.kappa_err = b.est_error[0];

  QuadConfig edge_cfg = cfg.quad;
  edge_cfg.panel_c = 0.05;
  const QuadCheckpoint bot =
      integrate(along([](double s) { return cplx(s, 1.0); }), 1, 0.5, kappa, edge_cfg);
  const QuadCheckpoint top =
      integrate(along([T](double s) { return cplx(s, T); }), 1, 0.5, kappa, edge_cfg);
  r.edge_bottom = bot.value[0];
  r.edge_top = top.value[0];
  r.edge_err = bot.est_error[0] + top.est_error[0];

  const cplx i(0.0, 1.0);
  r.contour_prediction = r.kappa_line - i * (r.edge_bottom - r.edge_top);
  r.contour_deviation = std::abs(r.critical - r.contour_prediction);
  r.contour_allowance = r.critical_err + r.kappa_err + r.edge_err;
  r.contour_ok = r.contour_deviation <= r.contour_allowance;

  r.arith_main = s1_arith_main_term(pair.fkm1, pair.fk, T).main_term;
  if (r.arith_main != 0.0) {
    r.measured_normalization = r.critical.real() / r.arith_main;
    r.arith_relative_deviation =
        std::abs(r.critical - normalization * r.arith_main) / std::abs(r.critical);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lower-bound principle

struct HolderReport {
  double k = 0.0;
  double T = 0.0;
  bool large_k_branch = false;  // k > 1/2
  cplx lhs;                     // S1
  double I = 0.0;               // int |zeta'|^{2k}
  double S2 = 0.0;
  double S3 = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // |S1| / rhs
  double lhs_err = 0.0, I_err = 0.0, S2_err = 0.0, S3_err = 0.0;
  std::size_t panels = 0;
};

/// k > 1/2: |S1| <= I^{1/2k} S3^{(2k-1)/2k};
/// k <= 1/2: |S1| << I^{1/2} S2^{(1-k)/2} S3^{k/2}.
inline HolderReport verify_holder_principle(double k, double T, const MollifierPair& pair,
                                            const MomentConfig& cfg = {}) {
  if (!(k > 0.0)) throw DomainError("verify_holder_principle: k must be positive");
  detail::check_range(1.0, T, cfg);
  HolderReport r;
  r.k = k;
  r.T = T;
  r.large_k_branch = k > 0.5;
  const bool need_s2 = !r.large_k_branch;
  auto f = [&](double t, std::span<cplx> out, std::span<double> err) {
    const cplx s(0.5, t);
    const ZetaValue d = zeta_deriv_eval(t, 1, cfg.zeta);
    const cplx nkm1 = eval_N(pair.fkm1, s);
    const cplx w = nkm1 * eval_N(pair.fk, 1.0 - s);
    out[0] = -d.value * w;
    err[0] = d.est_error * std::abs(w);
    const auto [p, pe] = detail::abs_pow(d, k);
    out[1] = p;
    err[1] = pe;
    if (need_s2) {
      out[2] = std::norm(d.value) * std::norm(nkm1);
      err[2] = 2.0 * std::abs(d.value) * d.est_error * std::norm(nkm1);
    } else {
      out[2] = 0.0;
    }
    out[3] = s3_integrand(pair.fk, s);
  };
  const QuadCheckpoint q = integrate(f, 4, 1.0, T, cfg.quad);
  if (cfg.strict && !q.tolerance_met) {
    throw AccuracyError("verify_holder_principle: quadrature tolerance not met",
                        std::abs(q.value[0]), q.est_error[0]);
  }
  r.lhs = q.value[0];
  r.I = q.value[1].real();
  r.S2 = q.value[2].real();
  r.S3 = q.value[3].real();
  r.lhs_err = q.est_error[0];
  r.I_err = q.est_error[1];
  r.S2_err = q.est_error[2];
  r.S3_err = q.est_error[3];
  r.panels = q.panels;
  if (r.large_k_branch) {
    r.rhs = std::pow(r.I, 1.0 / (2.0 * k)) * std::pow(r.S3, (2.0 * k - 1.0) / (2.0 * k));
  } else {
    r.rhs = std::sqrt(r.I) * std::pow(r.S2, (1.0 - k) / 2.0) * std::pow(r.S3, k / 2.0);
  }
  if (!(r.rhs > 0.0)) throw DomainError("verify_holder_principle: right side is not positive");
  r.ratio = std::abs(r.lhs) / r.rhs;
  return r;
}

// ---------------------------------------------------------------------------
// S2 against its circle majorant

struct S2MajorantReport {
  double T = 0.0;
  double R = 0.0;
  double S2 = 0.0;
  double S2_err = 0.0;
  std::vector<double> circle_integrals;  // int |zeta(1/2 + alpha + it)|^2 |N|^2 per sampled alpha
  double avg = 0.0;
  double max = 0.0;
  double majorant_avg = 0.0;    // R^{-2} avg, a rigorous bound
  double majorant_max = 0.0;    // R^{-2} max
  double literal_form = 0.0;    // (2 pi)^{-2} R^{-2} max
  double ratio = 0.0;           // S2 / majorant_avg
};

inline S2MajorantReport s2_majorant(const MollifierPair& pair, double T, int n_alpha = 8,
                                    const MomentConfig& cfg = {}) {
  detail::check_range(1.0, T, cfg);
  if (n_alpha < 1) throw DomainError("s2_majorant: need at least one circle point");
  S2MajorantReport r;
  r.T = T;
  r.R = 1.0 / std::log(T);
  std::vector<cplx> alphas;
  for (int j = 0; j < n_alpha; ++j) {
    alphas.push_back(std::polar(r.R, 2.0 * std::numbers::pi * (j + 0.5) / n_alpha));
  }
  auto f = [&](double t, std::span<cplx> out, std::span<double> err) {
    const cplx s(0.5, t);
    const double n2 = std::norm(eval_N(pair.fkm1, s));
    const ZetaValue d = zeta_deriv_eval(t, 1, cfg.zeta);
    out[0] = std::norm(d.value) * n2;
    err[0] = 2.0 * std::abs(d.value) * d.est_error * n2;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      const ZetaValue z = zeta_eval(s + alphas[j], cfg.zeta);
      out[j + 1] = std::norm(z.value) * n2;
      err[j + 1] = 2.0 * std::abs(z.value) * z.est_error * n2;
    }
  };
  const QuadCheckpoint q = integrate(f, alphas.size() + 1, 1.0, T, cfg.quad);
  r.S2 = q.value[0].real();
  r.S2_err = q.est_error[0];
  CompensatedSum sum;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const double v = q.value[j + 1].real();
    r.circle_integrals.push_back(v);
    sum.add(v);
    r.max = std::max(r.max, v);
  }
  r.avg = sum.value() / static_cast<double>(alphas.size());
  r.majorant_avg = r.avg / (r.R * r.R);
  r.majorant_max = r.max / (r.R * r.R);
  r.literal_form = r.majorant_max / (4.0 * std::numbers::pi * std::numbers::pi);
  r.ratio = r.S2 / r.majorant_avg;
  return r;
}

// ---------------------------------------------------------------------------
// Growth of I_{k,l}(T) in T

struct ScanRow {
  double k = 0.0;
  std::vector<double> T;
  std::vector<double> I;
  std::vector<double> I_err;
  std::vector<double> normalized;  // I / (T - 1)
  double fitted_slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  double conjectured_slope = 0.0;  // k^2 + 2kl
  bool increasing = true;
};

struct LinearFit {
  double slope;
  double intercept;
};

/// Equal-weight least squares y = slope x + intercept.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least_squares: need >= 2 points");
  CompensatedSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / x.size(), my = sy.value() / y.size();
  CompensatedSum sxy, sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy.add((x[i] - mx) * (y[i] - my));
    sxx.add((x[i] - mx) * (x[i] - mx));
  }
  if (sxx.value() == 0.0) throw DomainError("least_squares: degenerate abscissae");
  const double slope = sxy.value() / sxx.value();
  return {slope, my - slope * mx};
}

/// Integrates |zeta^{(l)}(1/2+it)|^{2k} from 1 for every k in one pass and
/// fits log(I/(T-1)) against log log T over the checkpoint grid.
inline std::vector<ScanRow> exponent_scan(std::span<const double> k_list,
                                          std::span<const double> T_list, int l,
                                          const MomentConfig& cfg = {}) {
  if (k_list.empty() || T_list.size() < 2) throw DomainError("exponent_scan: need k and >= 2 T");
  std::vector<double> Ts(T_list.begin(), T_list.end());
  std::sort(Ts.begin(), Ts.end());
  for (double T : Ts) {
    if (!(T > std::numbers::e)) throw DomainError("exponent_scan: T must exceed e");
  }
  detail::check_range(1.0, Ts.back(), cfg);
  auto f = [&](double t, std::span<cplx> out, std::span<double> err) {
    bool need = false;
    for (double k : k_list) need = need || k != 0.0;
    const ZetaValue z = need ? detail::zeta_l(t, l, cfg.zeta) : ZetaValue{1.0, 0.0};
    for (std::size_t i = 0; i < k_list.size(); ++i) {
      const auto [v, e] = detail::abs_pow(z, k_list[i]);
      out[i] = v;
      err[i] = e;
    }
  };
  const auto cps = integrate_checkpoints(f, k_list.size(), 1.0, Ts, cfg.quad);
  for (const auto& q : cps) {
    if (cfg.strict && !q.tolerance_met) {
      throw AccuracyError("exponent_scan: quadrature tolerance not met" + detail::unmet_suffix(q),
                          std::abs(q.value[0]), q.est_error[0]);
    }
  }
  std::vector<ScanRow> rows;
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    ScanRow row;
    row.k = k_list[i];
    row.conjectured_slope = row.k * row.k + 2.0 * row.k * l;
    std::vector<double> x, y;
    for (const auto& q : cps) {
      const bool exact = row.k == 0.0;  // integrand identically 1
      row.T.push_back(q.t);
      row.I.push_back(exact ? q.t - 1.0 : q.value[i].real());
      row.I_err.push_back(exact ? 0.0 : q.est_error[i]);
      row.normalized.push_back(exact ? 1.0 : q.value[i].real() / (q.t - 1.0));
      x.push_back(std::log(std::log(q.t)));
      y.push_back(std::log(row.normalized.back()));
    }
    for (std::size_t j = 1; j < row.normalized.size(); ++j) {
      row.increasing = row.increasing && row.normalized[j] > row.normalized[j - 1];
    }
    const LinearFit fit = least_squares(x, y);
    row.fitted_slope = fit.slope;
    row.intercept = fit.intercept;
    for (std::size_t j = 0; j < x.size(); ++j) {
      row.residuals.push_back(y[j] - (fit.slope * x[j] + fit.intercept));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace zml
