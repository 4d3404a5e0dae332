#pragma once

// Adaptive composite Gauss-Legendre quadrature for vector-valued integrands
// on long intervals, with panel widths following the local zero spacing of zeta.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include "zml/error.hpp"
#include "zml/parallel.hpp"
#include "zml/summation.hpp"

namespace zml {

using cplx = std::complex<double>;

struct QuadConfig {
  int gl_nodes = 4;
  /// Base panel width c / log(2 + t/2pi); a work unit is two base panels.
  double panel_c = 1.0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-6;
  int max_depth = 24;
  /// Worker threads; 0 selects default_workers().
  unsigned workers = 0;
};

/// Cumulative result from the start of the range up to `t`.
struct QuadCheckpoint {
  double t = 0.0;
  std::vector<cplx> value;
  std::vector<double> est_error;     // quadrature plus integrated evaluation error
  std::vector<double> abs_integral;  // integral of |f|
  std::size_t panels = 0;
  bool tolerance_met = true;
  /// Left ends of the first subpanels that missed tolerance at the depth cap.
  std::vector<double> unmet_at;
};

inline constexpr std::size_t kMaxUnmetRecorded = 16;

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule by Newton iteration on P_m.
inline GaussLegendreRule gauss_legendre(int m) {
  if (m < 1) throw DomainError("gauss_legendre: need at least one node");
  GaussLegendreRule r;
  r.nodes.resize(m);
  r.weights.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.weights[i] = w;
    r.nodes[m - 1 - i] = x;
    r.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) r.nodes[m / 2] = 0.0;
  return r;
}

/// Base panel width at height t.
inline double panel_width(double t, double c) {
  return c / std::log(2.0 + (std::abs(t) + 1.5 * c) / (2.0 * std::numbers::pi));
}

namespace detail {

struct PanelSum {
  std::vector<cplx> value;
  std::vector<double> abs;
  std::vector<double> eval_err;
  void reset(std::size_t dim) {
    value.assign(dim, 0.0);
    abs.assign(dim, 0.0);
    eval_err.assign(dim, 0.0);
  }
};

struct UnitResult {
  std::vector<CompensatedComplexSum> value;
  std::vector<CompensatedSum> abs, quad_err, eval_err;
  std::size_t panels = 0;
  bool tolerance_met = true;
  std::vector<double> unmet_at;
  void reset(std::size_t dim) {
    value.assign(dim, {});
    abs.assign(dim, {});
    quad_err.assign(dim, {});
    eval_err.assign(dim, {});
    panels = 0;
    tolerance_met = true;
    unmet_at.clear();
  }
};

template <class F>
class UnitIntegrator {
 public:
  UnitIntegrator(F& f, std::size_t dim, const GaussLegendreRule& rule, const QuadConfig& cfg,
                 double total_width)
      : f_(f), dim_(dim), rule_(rule), cfg_(cfg), total_(total_width), out_(dim), err_(dim) {}

  void run(double lo, double hi, UnitResult& res) {
    res.reset(dim_);
    PanelSum coarse;
    gl(lo, hi, coarse);
    density_.resize(dim_);
    for (std::size_t c = 0; c < dim_; ++c) density_[c] = coarse.abs[c] / (hi - lo);
    refine(lo, hi, coarse, 0, res);
  }

 private:
  void gl(double lo, double hi, PanelSum& out) {
    out.reset(dim_);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
      const double t = mid + half * rule_.nodes[i];
      std::fill(err_.begin(), err_.end(), 0.0);
      f_(t, std::span<cplx>(out_), std::span<double>(err_));
      const double w = half * rule_.weights[i];
      for (std::size_t c = 0; c < dim_; ++c) {
        out.value[c] += w * out_[c];
        out.abs[c] += w * std::abs(out_[c]);
        out.eval_err[c] += w * err_[c];
      }
    }
  }

  void refine(double lo, double hi, const PanelSum& coarse, int depth, UnitResult& res) {
    const double mid = 0.5 * (lo + hi);
    PanelSum left, right;
    gl(lo, mid, left);
    gl(mid, hi, right);
    bool ok = true;
    for (std::size_t c = 0; c < dim_ && ok; ++c) {
      const double diff = std::abs(left.value[c] + right.value[c] - coarse.value[c]);
      // Relative share against the unit's mean |f|.
      const double scale = std::max(left.abs[c] + right.abs[c], density_[c] * (hi - lo));
      const double tol = std::max(cfg_.abs_tol * (hi - lo) / total_, cfg_.rel_tol * scale);
      ok = diff <= tol;
    }
    if (!ok && depth < cfg_.max_depth) {
      refine(lo, mid, left, depth + 1, res);
      refine(mid, hi, right, depth + 1, res);
      return;
    }
    if (!ok) {
      res.tolerance_met = false;
      if (res.unmet_at.size() < kMaxUnmetRecorded) res.unmet_at.push_back(lo);
    }
    for (std::size_t c = 0; c < dim_; ++c) {
      const cplx fine = left.value[c] + right.value[c];
      res.value[c].add(fine);
      res.abs[c].add(left.abs[c] + right.abs[c]);
      res.quad_err[c].add(std::abs(fine - coarse.value[c]));
      res.eval_err[c].add(left.eval_err[c] + right.eval_err[c]);
    }
    res.panels += 2;
  }

  F& f_;
  std::size_t dim_;
  const GaussLegendreRule& rule_;
  const QuadConfig& cfg_;
  double total_;
  std::vector<cplx> out_;
  std::vector<double> err_;
  std::vector<double> density_;
};

}  // namespace detail

/// Integrates f over [a, checkpoints.back()] and reports cumulative results
/// at every checkpoint (ascending, each > a).
///
/// f(t, out, err) writes `dim` integrand components into `out` and optional
/// absolute evaluation errors into `err` (pre-zeroed). Units are fixed by the
/// panel rule and checkpoints alone and reduced in index order, so results do
/// not depend on the worker count.
template <class F>
std::vector<QuadCheckpoint> integrate_checkpoints(F&& f, std::size_t dim, double a,
                                                  std::span<const double> checkpoints,
                                                  const QuadConfig& cfg = {}) {
  if (checkpoints.empty()) throw DomainError("integrate: no checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const double prev = i == 0 ? a : checkpoints[i - 1];
    if (!(checkpoints[i] > prev)) throw DomainError("integrate: checkpoints must ascend above a");
  }
  if (!(cfg.panel_c > 0.0) || cfg.gl_nodes < 1) throw DomainError("integrate: bad config");
  const GaussLegendreRule rule = gauss_legendre(cfg.gl_nodes);
  const unsigned workers = cfg.workers ? cfg.workers : default_workers();
  const double total = checkpoints.back() - a;

  std::vector<CompensatedComplexSum> value(dim);
  std::vector<CompensatedSum> abs(dim), quad_err(dim), eval_err(dim);
  std::size_t panels = 0;
  bool met = true;
  std::vector<double> unmet;
  std::vector<QuadCheckpoint> out;

  constexpr std::size_t kBlock = 1 << 14;
  std::vector<double> bounds;
  std::vector<detail::UnitResult> results(kBlock);
  double x = a;
  for (double cp : checkpoints) {
    while (x < cp) {
      bounds.assign(1, x);
      while (bounds.size() <= kBlock && x < cp) {
        double next = x + 2.0 * panel_width(x, cfg.panel_c);
        if (next > cp || cp - next < 1e-9 * (next - x)) next = cp;
        bounds.push_back(next);
        x = next;
      }
      const std::size_t units = bounds.size() - 1;
      parallel_for(units, workers, [&](std::size_t i) {
        detail::UnitIntegrator<std::remove_reference_t<F>> integ(f, dim, rule, cfg, total);
        integ.run(bounds[i], bounds[i + 1], results[i]);
      });
      for (std::size_t i = 0; i < units; ++i) {
        const auto& r = results[i];
        for (std::size_t c = 0; c < dim; ++c) {
          value[c].add(r.value[c].value());
          abs[c].add(r.abs[c].value());
          quad_err[c].add(r.quad_err[c].value());
          eval_err[c].add(r.eval_err[c].value());
        }
        panels += r.panels;
        met = met && r.tolerance_met;
        for (double u : r.unmet_at) {
          if (unmet.size() < kMaxUnmetRecorded) unmet.push_back(u);
        }
      }
    }
    QuadCheckpoint q;
    q.t = cp;
    q.panels = panels;
    q.tolerance_met = met;
    q.unmet_at = unmet;
    for (std::size_t c = 0; c < dim; ++c) {
      q.value.push_back(value[c].value());
      q.abs_integral.push_back(abs[c].value());
      q.est_error.push_back(quad_err[c].value() + eval_err[c].value());
    }
    out.push_back(std::move(q));
  }
  return out;
}

/// Single-range convenience wrapper.
template <class F>
QuadCheckpoint integrate(F&& f, std::size_t dim, double a, double b, const QuadConfig& cfg = {}) {
  const double cp[1] = {b};
  return integrate_checkpoints(std::forward<F>(f), dim, a, std::span<const double>(cp, 1), cfg)
      .front();
}

/// Scalar real integrand on [a, b].
template <class G>
QuadCheckpoint integrate_scalar(G&& g, double a, double b, const QuadConfig& cfg = {}) {
  return integrate(
      [&](double t, std::span<cplx> out, std::span<double>) { out[0] = g(t); }, 1, a, b, cfg);
}

}  // namespace zml
