// zml: command-line driver for the zml library.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zml/io.hpp"
#include "zml/zml.hpp"

namespace {

using zml::cplx;
using zml::format_double;
using Json = nlohmann::ordered_json;

enum ExitCode { kOk = 0, kUsage = 1, kAccuracy = 2, kDomain = 3, kResource = 4 };

struct NumericOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-10;
  int gl_nodes = 4;
  double panel_c = 1.0;
  double ceiling = 1e6;
  std::string method = "auto";
};

void add_numeric_options(CLI::App* app, NumericOptions& o) {
  app->add_option("--tol", o.rel_tol, "relative quadrature tolerance")->check(CLI::PositiveNumber);
  app->add_option("--abs-tol", o.abs_tol, "absolute quadrature tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--gl-nodes", o.gl_nodes, "Gauss-Legendre nodes per panel")
      ->check(CLI::Range(1, 64));
  app->add_option("--panel-c", o.panel_c, "panel width constant")->check(CLI::PositiveNumber);
  app->add_option("--ceiling", o.ceiling, "largest admissible height")
      ->check(CLI::PositiveNumber);
  app->add_option("--method", o.method, "zeta evaluation: auto or em")
      ->check(CLI::IsMember({"auto", "em"}));
}

zml::MomentConfig moment_config(const NumericOptions& o, unsigned workers) {
  zml::MomentConfig cfg;
  cfg.quad.rel_tol = o.rel_tol;
  cfg.quad.abs_tol = o.abs_tol;
  cfg.quad.gl_nodes = o.gl_nodes;
  cfg.quad.panel_c = o.panel_c;
  cfg.quad.workers = workers;
  cfg.ceiling = o.ceiling;
  cfg.zeta.method = o.method == "em" ? zml::ZetaEvalConfig::Method::euler_maclaurin
                                     : zml::ZetaEvalConfig::Method::riemann_siegel_auto;
  return cfg;
}

// Parameter echo for output headers: every named option of `app` and its
// parents, given or default.
zml::ParamList echo(const CLI::App* app) {
  zml::ParamList out;
  if (app->get_parent()) out = echo(app->get_parent());
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_name();
    if (name.empty() || name == "--help" || name == "--version") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    if (value.empty()) value = opt->get_expected_max() == 0 ? "false" : "-";
    std::string key = name.substr(name.find_first_not_of('-'));
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::string command_path(const CLI::App* app) {
  std::string path;
  for (const CLI::App* a = app; a && a->get_parent(); a = a->get_parent()) {
    path = a->get_name() + (path.empty() ? "" : "." + path);
  }
  return path;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw zml::DomainError("cannot open output file " + path);
  out << text;
}

std::string csv_document(const CLI::App* app, const std::string& columns,
                         const std::vector<std::string>& rows) {
  std::string text = zml::output_header(command_path(app), echo(app)) + "\n" + columns + "\n";
  for (const auto& r : rows) text += r + "\n";
  return text;
}

std::string json_document(const CLI::App* app, Json body) {
  Json doc;
  doc["header"] = zml::output_header(command_path(app), echo(app));
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = std::move(it.value());
  return doc.dump(2) + "\n";
}

std::string join(std::initializer_list<std::string> fields) {
  std::string s;
  for (const auto& f : fields) s += (s.empty() ? "" : ",") + f;
  return s;
}

// Partition selection: "toy", "trivial", a JSON sidecar, or a dp file with a
// sidecar next to it. `k` replaces the stored k.
std::optional<zml::HarperPartition> load_partition(const std::string& spec, double k, double T) {
  if (spec == "trivial") return std::nullopt;
  if (spec == "toy") return zml::standard_toy_partition(k, T);
  const bool is_json = spec.size() > 5 && spec.substr(spec.size() - 5) == ".json";
  const std::string path = is_json ? spec : spec + ".json";
  std::ifstream in(path);
  if (!in) throw zml::DomainError("cannot open partition sidecar " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw zml::DomainError("partition file " + path + ": " + e.what());
  }
  j["k"] = k;
  return zml::partition_from_json(j);
}

zml::PrimeTable table_for(const zml::HarperPartition& p) {
  double hi = 2.0;
  for (const auto& i : p.intervals) hi = std::max(hi, i.hi);
  if (hi > 1e18) throw zml::ResourceError("partition primes exceed any sieve budget");
  return zml::sieve(static_cast<std::uint64_t>(std::floor(hi)));
}

zml::MollifierPair load_pair(const std::string& spec, double k, double T) {
  const auto p = load_partition(spec, k, T);
  if (!p) return zml::trivial_pair(k, T);
  return zml::build_pair(*p, table_for(*p));
}

Json complex_json(cplx z) { return Json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------------------

struct SieveArgs {
  std::uint64_t limit = 1000000;
  bool limit_given = false;
  std::vector<double> x;
  std::string cache_in, cache_out, out;
};

void run_sieve(const CLI::App* app, const SieveArgs& a) {
  const zml::PrimeTable table =
      a.cache_in.empty() ? zml::sieve(a.limit) : zml::load_prime_cache(a.cache_in, a.limit_given ? a.limit : 0);
  if (!a.cache_out.empty()) zml::save_prime_cache(a.cache_out, table);
  std::vector<double> xs = a.x;
  if (xs.empty()) {
    for (double x = 10.0; x <= static_cast<double>(table.limit); x *= 10.0) xs.push_back(x);
  }
  std::vector<std::string> rows;
  for (double x : xs) {
    rows.push_back(join({format_double(x), std::to_string(table.count_upto(x)),
                         format_double(zml::mertens_recip(x, table)),
                         format_double(zml::mertens_recip_remainder(x, table)),
                         format_double(zml::mertens_logp(x, table)),
                         format_double(zml::mertens_logp_remainder(x, table))}));
  }
  write_output(a.out, csv_document(app,
                                   "x,pi_x,sum_recip,recip_remainder,sum_logp_over_p,"
                                   "logp_remainder",
                                   rows));
}

struct ZetaArgs {
  std::vector<double> t;
  double sigma = 0.5;
  int l = 0;
  double target = NAN;
  std::string method = "auto";
  std::string out;
};

void run_zeta(const CLI::App* app, const ZetaArgs& a) {
  zml::ZetaEvalConfig cfg;
  cfg.target_abs_error = a.target;
  cfg.method = a.method == "em" ? zml::ZetaEvalConfig::Method::euler_maclaurin
                                : zml::ZetaEvalConfig::Method::riemann_siegel_auto;
  std::vector<std::string> rows;
  for (double t : a.t) {
    const cplx s(a.sigma, t);
    zml::ZetaValue v;
    if (a.l == 0) {
      v = zml::zeta_eval(s, cfg);
    } else if (a.sigma == 0.5) {
      v = zml::zeta_deriv_eval(t, a.l, cfg);
    } else {
      v = zml::zeta_deriv_at(s, a.l, cfg);
    }
    rows.push_back(join({format_double(t), format_double(v.value.real()),
                         format_double(v.value.imag()), format_double(v.est_error)}));
  }
  write_output(a.out, csv_document(app, "t,re,im,est_error", rows));
}

struct MollifierArgs {
  double k = 1.0, T = 1e6, M = 1.0, base = 20.0;
  std::string alpha = "k";
  bool toy = false;
  std::string out;
};

void run_mollifier(const CLI::App* app, const MollifierArgs& a) {
  const zml::HarperPartition p =
      a.toy ? zml::standard_toy_partition(a.k, a.T) : zml::build_partition(a.k, a.T, a.M, a.base);
  const double alpha = a.alpha == "k" ? a.k : a.k - 1.0;
  const zml::MollifierFamily f = zml::build_family(p, alpha, table_for(p));
  const std::string header = zml::output_header(command_path(app), echo(app));
  write_output(a.out, header + "\n" + zml::dp_to_text(f.N));
  if (!a.out.empty() && a.out != "-") {
    Json side;
    side["header"] = header;
    const Json pj = zml::partition_to_json(p);
    for (auto it = pj.begin(); it != pj.end(); ++it) side[it.key()] = it.value();
    side["alpha"] = alpha;
    side["support_size"] = f.N.size();
    side["truncated"] = f.N_truncated;
    side["r_k"] = f.rk;
    write_output(a.out + ".json", side.dump(2) + "\n");
  }
}

struct MomentArgs {
  std::string kind = "I";
  double k = 1.0;
  int l = 0;
  double T_lo = 1.0, T_hi = 100.0;
  std::string mollifier = "trivial";
  NumericOptions num;
  std::string out;
};

void run_moment(const CLI::App* app, const MomentArgs& a, unsigned workers) {
  static const std::map<std::string, zml::MomentKind> kinds = {
      {"I", zml::MomentKind::I_kl},
      {"M", zml::MomentKind::M_k},
      {"S1", zml::MomentKind::S1},
      {"S2", zml::MomentKind::S2},
      {"S3", zml::MomentKind::S3_product}};
  const zml::MomentKind kind = kinds.at(a.kind);
  const zml::MomentConfig cfg = moment_config(a.num, workers);
  std::optional<zml::MollifierPair> pair;
  if (kind == zml::MomentKind::S1 || kind == zml::MomentKind::S2 ||
      kind == zml::MomentKind::S3_product) {
    pair = load_pair(a.mollifier, a.k, a.T_hi);
  }
  const zml::MomentResult r =
      zml::integrate_moment(kind, a.k, a.l, a.T_lo, a.T_hi, pair ? &*pair : nullptr, cfg);
  const std::string row =
      join({zml::to_string(r.kind), format_double(r.k), std::to_string(r.l), format_double(r.T_lo),
            format_double(r.T_hi), format_double(r.value.real()), format_double(r.value.imag()),
            format_double(r.est_error), std::to_string(r.panels)});
  write_output(a.out, csv_document(app, "kind,k,l,T_lo,T_hi,value_re,value_im,est_error,panels",
                                   {row}));
}

struct VerifyArgs {
  double k = 1.0, T = 2000.0;
  std::string mollifier = "toy";
  double normalization = zml::kS1MeasuredNormalization;
  double tolerance = 0.05;
  double N_param = 1.0;
  double slack = 2.0;
  int samples = 64;
  std::uint64_t seed = 1;
  bool s2 = false;
  NumericOptions num;
  std::string out;
};

void run_verify_holder(const CLI::App* app, const VerifyArgs& a, unsigned workers) {
  const zml::MollifierPair pair = load_pair(a.mollifier, a.k, a.T);
  const zml::HolderReport r =
      zml::verify_holder_principle(a.k, a.T, pair, moment_config(a.num, workers));
  Json b;
  b["k"] = r.k;
  b["T"] = r.T;
  b["branch"] = r.large_k_branch ? "k>1/2" : "k<=1/2";
  b["lhs"] = complex_json(r.lhs);
  b["lhs_err"] = r.lhs_err;
  b["I"] = r.I;
  b["I_err"] = r.I_err;
  if (!r.large_k_branch) {
    b["S2"] = r.S2;
    b["S2_err"] = r.S2_err;
  }
  b["S3"] = r.S3;
  b["S3_err"] = r.S3_err;
  b["rhs"] = r.rhs;
  b["ratio"] = r.ratio;
  b["panels"] = r.panels;
  b["pass"] = r.large_k_branch ? r.ratio <= 1.0 + 1e-9 : std::isfinite(r.ratio);
  write_output(a.out, json_document(app, std::move(b)));
}

void run_verify_s1(const CLI::App* app, const VerifyArgs& a, unsigned workers) {
  const zml::MollifierPair pair = load_pair(a.mollifier, a.k, a.T);
  const zml::S1ConsistencyReport r = zml::verify_s1_consistency(a.k, a.T, pair, a.normalization,
                                                                moment_config(a.num, workers));
  Json b;
  b["k"] = r.k;
  b["T"] = r.T;
  b["kappa"] = r.kappa;
  b["critical"] = complex_json(r.critical);
  b["critical_err"] = r.critical_err;
  b["kappa_line"] = complex_json(r.kappa_line);
  b["kappa_err"] = r.kappa_err;
  b["edge_bottom"] = complex_json(r.edge_bottom);
  b["edge_top"] = complex_json(r.edge_top);
  b["edge_err"] = r.edge_err;
  b["contour_deviation"] = r.contour_deviation;
  b["contour_allowance"] = r.contour_allowance;
  b["contour_ok"] = r.contour_ok;
  b["arith_main"] = r.arith_main;
  b["normalization_used"] = r.normalization_used;
  b["measured_normalization"] = r.measured_normalization;
  b["arith_relative_deviation"] = r.arith_relative_deviation;
  b["pass"] = r.contour_ok && r.arith_relative_deviation <= a.tolerance;
  write_output(a.out, json_document(app, std::move(b)));
}

void run_verify_bounds(const CLI::App* app, const VerifyArgs& a, unsigned workers) {
  const zml::MollifierPair pair = load_pair(a.mollifier, a.k, a.T);
  Json b;
  bool pass = true;
  std::mt19937_64 rng(a.seed);
  const double log_t = std::log(a.T);
  std::uniform_real_distribution<double> sigma(-1.0 / log_t, 2.0), height(0.0, a.T);
  std::vector<cplx> points;
  for (int i = 0; i < a.samples; ++i) {
    const double s = sigma(rng);
    points.emplace_back(s, height(rng));
  }
  for (const auto* f : {&pair.fk, &pair.fkm1}) {
    Json fam;
    fam["alpha"] = f->alpha;
    fam["support_size"] = f->N.size();
    const auto c = zml::check_coefficient_bounds(*f, a.slack);
    fam["coefficients"] = {{"length_cap", c.length_cap},
                           {"vanishing_violations", c.vanishing_violations},
                           {"max_growth_ratio", c.max_growth_ratio},
                           {"argmax_n", c.argmax_n},
                           {"growth_violations", c.growth_violations}};
    pass = pass && c.ok();
    if (!f->trivial && !f->partition.toy) {
      const auto nb = zml::check_norm_bound(*f, points, a.slack);
      fam["norm"] = {{"samples", nb.samples},
                     {"max_ratio", nb.max_ratio},
                     {"argmax_s", complex_json(nb.argmax_s)}};
      pass = pass && nb.max_ratio <= 1.0;
    }
    Json p1 = Json::array();
    if (!f->trivial) {
      for (const auto& e : zml::check_P1_bound(*f, a.N_param)) {
        p1.push_back({{"j", e.j}, {"P_at_1", e.P_at_1}, {"bound", e.bound}, {"holds", e.holds}});
      }
    }
    fam["P1"] = std::move(p1);
    b[f == &pair.fk ? "family_k" : "family_k_minus_1"] = std::move(fam);
  }
  if (a.s2) {
    const auto r = zml::s2_majorant(pair, a.T, 8, moment_config(a.num, workers));
    b["s2"] = {{"R", r.R},
               {"S2", r.S2},
               {"S2_err", r.S2_err},
               {"majorant_avg", r.majorant_avg},
               {"majorant_max", r.majorant_max},
               {"literal_form", r.literal_form},
               {"ratio", r.ratio}};
    pass = pass && r.S2 <= r.majorant_avg;
  }
  b["pass"] = pass;
  write_output(a.out, json_document(app, std::move(b)));
}

struct ArithArgs {
  double k = 1.0;
  std::string partition = "toy";
  double T = 1e3;
  int depth = 1;
  double slack = 0.1;
  std::size_t cap = zml::kDefaultEnumerationCap;
  std::string out;
};

void run_lower_bound(const CLI::App* app, const ArithArgs& a) {
  const auto p = load_partition(a.partition, a.k, a.T);
  if (!p) throw zml::DomainError("arith lower-bound: the trivial family has no partition");
  const zml::LowerBoundReport r = zml::assemble_lower_bound(*p, table_for(*p), a.depth, a.slack,
                                                            a.cap);
  Json b;
  b["k"] = r.k;
  b["depth"] = r.depth;
  b["lhs_sum"] = r.lhs_sum;
  b["rhs_bound"] = r.rhs_bound;
  b["margin"] = r.margin;
  b["damping"] = r.damping;
  b["twisted_product"] = r.twisted_product;
  b["positive_product"] = r.positive_product;
  b["log_sum"] = r.log_sum;
  b["holds"] = r.holds;
  write_output(a.out, json_document(app, std::move(b)));
}

struct ScanArgs {
  std::vector<double> k = {0.5, 1.0};
  std::vector<double> T = {1e3, 1e4, 1e5};
  int l = 1;
  NumericOptions num;
  std::string out;
};

void run_scan(const CLI::App* app, const ScanArgs& a, unsigned workers) {
  const auto rows = zml::exponent_scan(a.k, a.T, a.l, moment_config(a.num, workers));
  std::vector<std::string> lines;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.T.size(); ++i) {
      lines.push_back(join({format_double(r.k), std::to_string(a.l), format_double(r.T[i]),
                            format_double(r.I[i]), format_double(r.I_err[i]),
                            format_double(r.normalized[i]),
                            format_double(std::log(std::log(r.T[i]))),
                            format_double(r.residuals[i]), format_double(r.fitted_slope),
                            format_double(r.conjectured_slope), r.increasing ? "1" : "0"}));
    }
  }
  write_output(a.out, csv_document(app,
                                   "k,l,T,I,est_error,normalized,log_log_T,residual,"
                                   "fitted_slope,conjectured_slope,increasing",
                                   lines));
}

struct ReportArgs {
  std::vector<std::string> in;
  std::string out, points;
};

void run_report(const CLI::App* app, const ReportArgs& a) {
  // (k, l) -> T -> normalized
  std::map<std::pair<double, int>, std::map<double, double>> series;
  for (const auto& path : a.in) {
    std::ifstream in(path);
    if (!in) throw zml::DomainError("cannot open scan file " + path);
    std::string line;
    std::vector<std::string> cols;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
      if (cols.empty()) {
        cols = fields;
        continue;
      }
      auto field = [&](const std::string& name) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end() || static_cast<std::size_t>(it - cols.begin()) >= fields.size()) {
          throw zml::DomainError("scan file " + path + ": missing column " + name);
        }
        return std::stod(fields[it - cols.begin()]);
      };
      const auto key = std::make_pair(field("k"), static_cast<int>(field("l")));
      series[key].emplace(field("T"), field("normalized"));
    }
  }
  std::vector<std::string> summary, points;
  for (const auto& [key, pts] : series) {
    std::vector<double> x, y;
    bool increasing = true;
    double prev = -INFINITY;
    for (const auto& [T, v] : pts) {
      x.push_back(std::log(std::log(T)));
      y.push_back(std::log(v));
      increasing = increasing && v > prev;
      prev = v;
    }
    const double conj = key.first * key.first + 2.0 * key.first * key.second;
    double slope = NAN, icept = NAN;
    if (x.size() >= 2) {
      const auto fit = zml::least_squares(x, y);
      slope = fit.slope;
      icept = fit.intercept;
    }
    summary.push_back(join({format_double(key.first), std::to_string(key.second),
                            std::to_string(pts.size()), format_double(pts.begin()->first),
                            format_double(pts.rbegin()->first), format_double(slope),
                            format_double(conj), format_double(slope - conj),
                            increasing ? "1" : "0"}));
    std::size_t i = 0;
    for (const auto& [T, v] : pts) {
      points.push_back(join({format_double(key.first), std::to_string(key.second),
                             format_double(T), format_double(x[i]), format_double(y[i]),
                             format_double(slope * x[i] + icept)}));
      ++i;
    }
  }
  write_output(a.out, csv_document(app,
                                   "k,l,points,T_min,T_max,fitted_slope,conjectured_slope,"
                                   "slope_gap,increasing",
                                   summary));
  if (!a.points.empty()) {
    write_output(a.points,
                 csv_document(app, "k,l,T,log_log_T,log_normalized,fit", points));
  }
}

// Appends "--key value" for config entries whose option is absent from argv.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") path = args[i + 1];
  }
  for (const auto& s : args) {
    if (s.rfind("--config=", 0) == 0) path = s.substr(9);
  }
  if (path.empty()) return args;
  for (const auto& [key, value] : zml::read_config_file(path)) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& s) {
      return s == flag || s.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

int run(int argc, char** argv) {
  CLI::App app{"zml: moments of zeta' with mollifiers"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  unsigned workers = 0;
  std::string config;
  app.add_option("--workers", workers, "worker threads (0: ZML_WORKERS or hardware)");
  app.add_option("--config", config, "key = value file with option defaults");
  app.set_version_flag("--version", zml::kVersion);

  SieveArgs sv;
  auto* sieve = app.add_subcommand("sieve", "sieve primes and report Mertens sums");
  auto* limit_opt = sieve->add_option("--limit", sv.limit)->check(CLI::Range(2.0, 1e12));
  sieve->add_option("--x", sv.x, "evaluation points")->delimiter(',');
  sieve->add_option("--cache-in", sv.cache_in);
  sieve->add_option("--cache-out", sv.cache_out);
  sieve->add_option("--out", sv.out);

  ZetaArgs zt;
  auto* zeta = app.add_subcommand("zeta", "evaluate zeta or its derivatives");
  zeta->add_option("--t", zt.t)->delimiter(',')->required();
  zeta->add_option("--sigma", zt.sigma);
  zeta->add_option("--l", zt.l)->check(CLI::Range(0, 8));
  zeta->add_option("--target", zt.target, "absolute error target");
  zeta->add_option("--method", zt.method)->check(CLI::IsMember({"auto", "em"}));
  zeta->add_option("--out", zt.out);

  MollifierArgs ml;
  auto* moll = app.add_subcommand("mollifier", "build N(s, alpha) and write its coefficients");
  moll->add_option("--k", ml.k)->check(CLI::PositiveNumber);
  moll->add_option("--T", ml.T);
  moll->add_option("--M", ml.M);
  moll->add_option("--base", ml.base);
  moll->add_option("--alpha", ml.alpha)->check(CLI::IsMember({"k", "k-1"}));
  moll->add_flag("--toy", ml.toy, "standard two-interval toy partition");
  moll->add_option("--out", ml.out);

  MomentArgs mo;
  auto* moment = app.add_subcommand("moment", "integrate one moment");
  moment->add_option("--kind", mo.kind)->check(CLI::IsMember({"I", "M", "S1", "S2", "S3"}));
  moment->add_option("--k", mo.k);
  moment->add_option("--l", mo.l);
  moment->add_option("--T-lo", mo.T_lo);
  moment->add_option("--T-hi", mo.T_hi);
  moment->add_option("--mollifier", mo.mollifier, "toy, trivial, or a mollifier file");
  add_numeric_options(moment, mo.num);
  moment->add_option("--out", mo.out);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "inequality and consistency checks");
  verify->require_subcommand(1);
  auto add_verify_common = [&](CLI::App* sub) {
    sub->add_option("--k", va.k)->check(CLI::PositiveNumber);
    sub->add_option("--T", va.T);
    sub->add_option("--mollifier", va.mollifier, "toy, trivial, or a mollifier file");
    sub->add_option("--out", va.out);
    add_numeric_options(sub, va.num);
  };
  auto* holder = verify->add_subcommand("holder", "S1 against the Hoelder right side");
  add_verify_common(holder);
  auto* s1 = verify->add_subcommand("s1", "S1 on two contours and the arithmetic main term");
  add_verify_common(s1);
  s1->add_option("--normalization", va.normalization, "factor between S1 and the main term");
  s1->add_option("--rel-tolerance", va.tolerance, "allowed relative main-term deviation");
  auto* bounds = verify->add_subcommand("bounds", "coefficient, P_j(1) and norm bounds");
  add_verify_common(bounds);
  bounds->add_option("--N-param", va.N_param)->check(CLI::PositiveNumber);
  bounds->add_option("--slack", va.slack)->check(CLI::PositiveNumber);
  bounds->add_option("--samples", va.samples)->check(CLI::Range(1, 1000000));
  bounds->add_option("--seed", va.seed);
  bounds->add_flag("--s2", va.s2, "also integrate S2 against its circle majorant");

  ArithArgs ar;
  auto* arith = app.add_subcommand("arith", "arithmetic side of the lower bound");
  arith->require_subcommand(1);
  auto* lb = arith->add_subcommand("lower-bound", "enumerated double sum against the product bound");
  lb->add_option("--k", ar.k)->check(CLI::PositiveNumber);
  lb->add_option("--partition", ar.partition, "toy or a partition/mollifier file");
  lb->add_option("--T", ar.T, "height used with --partition toy");
  lb->add_option("--depth", ar.depth)->check(CLI::Range(0, 60));
  lb->add_option("--slack", ar.slack);
  lb->add_option("--cap", ar.cap);
  lb->add_option("--out", ar.out);

  ScanArgs sc;
  auto* scan = app.add_subcommand("scan", "growth of I_{k,l}(T) over a k x T grid");
  scan->add_option("--k", sc.k)->delimiter(',');
  scan->add_option("--T", sc.T)->delimiter(',');
  scan->add_option("--l", sc.l)->check(CLI::Range(0, 4));
  add_numeric_options(scan, sc.num);
  scan->add_option("--out", sc.out);

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "merge scan files into a slope table");
  report->add_option("--in", rp.in)->required()->delimiter(',');
  report->add_option("--out", rp.out);
  report->add_option("--points", rp.points, "plot-ready per-point file");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config(std::move(args));
  } catch (const zml::Error& e) {
    std::cerr << "zml: " << e.what() << "\n";
    return kUsage;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    sv.limit_given = limit_opt->count() > 0;
    if (*sieve) run_sieve(sieve, sv);
    if (*zeta) run_zeta(zeta, zt);
    if (*moll) run_mollifier(moll, ml);
    if (*moment) run_moment(moment, mo, workers);
    if (*holder) run_verify_holder(holder, va, workers);
    if (*s1) run_verify_s1(s1, va, workers);
    if (*bounds) run_verify_bounds(bounds, va, workers);
    if (*lb) run_lower_bound(lb, ar);
    if (*scan) run_scan(scan, sc, workers);
    if (*report) run_report(report, rp);
  } catch (const zml::AccuracyError& e) {
    std::cerr << "zml: accuracy: " << e.what() << " (best estimate " << e.best_estimate()
              << ", est. error " << e.est_error() << ")\n";
    return kAccuracy;
  } catch (const zml::ResourceError& e) {
    std::cerr << "zml: resource: " << e.what() << "\n";
    return kResource;
  } catch (const zml::Error& e) {
    std::cerr << "zml: " << e.what() << "\n";
    return kDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "zml: malformed number: " << e.what() << "\n";
    return kDomain;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
