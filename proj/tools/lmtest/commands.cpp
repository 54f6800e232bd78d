#include "lmtest/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmtest/critical.hpp"
#include "lmtest/errors.hpp"
#include "lmtest/lower_bounds.hpp"
#include "lmtest/lpt.hpp"
#include "lmtest/serialize.hpp"
#include "lmtest/sim.hpp"
#include "lmtest/widths.hpp"

namespace lmtest::cli {
namespace {

using nlohmann::ordered_json;
using detail::fmt_double;

void flatten(const ordered_json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten(j[i], prefix + "." + std::to_string(i), out);
    }
  } else if (j.is_number_float()) {
    out << prefix << ',' << fmt_double(j.get<double>()) << '\n';
  } else if (j.is_string()) {
    out << prefix << ',' << j.get<std::string>() << '\n';
  } else {
    out << prefix << ',' << j.dump() << '\n';
  }
}

// Writes to cfg.out when set, else to `fallback`.
template <class Fn>
void write_to(const RunConfig& cfg, std::ostream& fallback, Fn&& fn) {
  if (!cfg.out) {
    fn(fallback);
    return;
  }
  std::ofstream f(*cfg.out, std::ios::binary);
  if (!f) throw ValidationError("--out: cannot open '" + cfg.out->string() + "' for writing");
  fn(f);
  if (!f) throw ValidationError("--out: write to '" + cfg.out->string() + "' failed");
}

void emit(const RunConfig& cfg, std::ostream& fallback, const ordered_json& doc) {
  write_to(cfg, fallback, [&](std::ostream& o) {
    if (cfg.format == Format::Json) {
      o << doc.dump(2) << '\n';
    } else {
      o << "key,value\n";
      flatten(doc, "", o);
    }
  });
}

ordered_json parsed(const std::string& s) { return ordered_json::parse(s); }

double effective_sigma(const RunConfig& cfg) {
  if (!cfg.problem.sigma) throw ValidationError("config: 'sigma' is required for " + cfg.command);
  return *cfg.problem.sigma * cfg.problem.sigma_scale;
}

std::string_view theta_kind(const ThetaStarSpec& t) {
  switch (t.kind) {
    case ThetaStarSpec::Kind::Zero: return "zero";
    case ThetaStarSpec::Kind::Axis: return "axis";
    case ThetaStarSpec::Kind::Explicit: return "explicit";
    case ThetaStarSpec::Kind::BoundaryOffset: return "boundary_offset";
  }
  return "zero";
}

// The s of a t* computation: from the theta_star block, else the config key.
std::optional<std::size_t> extremal_index(const ProblemConfig& p) {
  if (p.theta.kind == ThetaStarSpec::Kind::Axis ||
      p.theta.kind == ThetaStarSpec::Kind::BoundaryOffset) {
    return p.theta.s;
  }
  return p.s;
}

std::optional<double> predicted_exponent(const EllipseSpec& e, bool extremal, double rho) {
  RateQuery q;
  q.rho = rho;
  q.sigma = 0.1;
  q.alpha = e.params().alpha;
  q.gamma = e.params().gamma;
  if (e.family() == Family::Poly) {
    q.family = extremal ? RateFamily::PolyExtremal : RateFamily::PolyZero;
    if (extremal) q.s = 1.0;
  } else if (e.family() == Family::Exp && !extremal) {
    q.family = RateFamily::ExpZero;
  } else {
    return std::nullopt;
  }
  return closed_form_rates(q).exponent;
}

ordered_json base_header(const RunConfig& cfg, double sigma) {
  const auto& e = cfg.problem.ellipse;
  ordered_json j;
  j["family"] = std::string(to_string(e.family()));
  j["d"] = e.dim();
  j["theta_star"] = std::string(theta_kind(cfg.problem.theta));
  j["sigma"] = sigma;
  j["rho"] = cfg.problem.rho;
  if (e.family() == Family::Kernel) {
    j["sigma_scale"] = cfg.problem.sigma_scale;
    j["clamped_eigenvalues"] = cfg.problem.clamped;
  }
  return j;
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const double sigma = effective_sigma(cfg);
  const auto& e = cfg.problem.ellipse;
  const Vector theta = resolve_theta_star(cfg.problem.theta, e);
  const TestProblem problem(e, theta, sigma, cfg.problem.rho);
  const LocalizedEllipse local(e, theta);

  const CriticalSolution up = solve_eps_upper(local, sigma, cfg.problem.rho);
  const CriticalSolution lo = solve_eps_lower(local, sigma);
  const CriticalSolution bern = solve_eps_bernstein(local, sigma);

  ordered_json j = base_header(cfg, sigma);
  j["eps_u"] = up.eps;
  j["eps_u_sq"] = up.eps * up.eps;
  j["k_u"] = up.k;
  j["eps_l"] = lo.eps;
  j["eps_l_sq"] = lo.eps * lo.eps;
  j["k_l"] = lo.k;
  j["eps_B"] = bern.eps;
  j["k_B"] = bern.k;
  j["theorem2_radius"] = theorem2_radius(problem);
  j["upper"] = parsed(to_json(up));
  j["lower"] = parsed(to_json(lo));
  j["bernstein"] = parsed(to_json(bern));

  if (auto s = extremal_index(cfg.problem)) {
    try {
      j["t_star"] = parsed(to_json(t_star(e, *s, sigma, cfg.problem.rho)));
      j["t_star"]["s"] = *s;
    } catch (const NumericError& err) {
      j["t_star"] = nullptr;
      j["t_star_error"] = err.what();
    }
  }
  if (auto p = predicted_exponent(e, extremal_index(cfg.problem).has_value(), cfg.problem.rho)) {
    j["predicted_exponent"] = *p;
  }
  emit(cfg, out, j);
  return kExitOk;
}

namespace {

int certificate(const RunConfig& cfg, std::ostream& out) {
  const double sigma = effective_sigma(cfg);
  const auto& e = cfg.problem.ellipse;
  const Vector theta = resolve_theta_star(cfg.problem.theta, e);
  const TestProblem problem(e, theta, sigma, cfg.problem.rho);
  const double t2 = theorem2_radius(problem);
  const double eps = cfg.eps.value_or(t2 / 2.0);
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ValidationError("--eps: must be positive and finite, got " + fmt_double(eps));
  }
  const LocalizedEllipse local(e, theta);
  const std::size_t k = k_bernstein(local, eps);
  if (k == 0) {
    throw NumericError("certificate: no cube dimension fits the ellipse at eps = " +
                       fmt_double(eps));
  }
  const PriorSupport prior = hypercube_prior(e, theta, eps, k, cfg.seed);
  const Chi2Bound closed = chi2_bound_hypercube(eps, sigma, k);
  const EmpiricalChi2 emp = chi2_bound_empirical(prior, sigma, cfg.trials, cfg.seed, cfg.threads);

  ordered_json j = base_header(cfg, sigma);
  j["eps"] = eps;
  j["theorem2_radius"] = t2;
  j["k"] = k;
  j["halfside"] = prior.cube->halfside;
  j["membership_ok"] = prior.membership_ok;
  j["hypercube"] = parsed(certificate_json(closed, eps, sigma, k));
  j["empirical"] = parsed(certificate_json(emp, eps, sigma, k));
  emit(cfg, out, j);
  return kExitOk;
}

}  // namespace

int cmd_mc(const RunConfig& cfg, std::ostream& out) {
  if (cfg.trials == 0) throw ValidationError("--trials: must be positive");
  if (cfg.certificate) return certificate(cfg, out);

  const double sigma = effective_sigma(cfg);
  const double rho = cfg.problem.rho;
  const auto& e = cfg.problem.ellipse;
  const Vector theta = resolve_theta_star(cfg.problem.theta, e);
  const TestProblem problem(e, theta, sigma, rho);
  const BuiltTest built = build_test(problem);

  double eps = built.upper.eps;
  LptTest test = built.test;
  if (cfg.eps) {
    eps = *cfg.eps;
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw ValidationError("--eps: must be positive and finite, got " + fmt_double(eps));
    }
    test = make_test(theta, sigma, rho, k_upper(e, theta, eps));
  }

  AlternativeOptions opt;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  const Alternative alt = worst_case_alternative(e, theta, eps, test.coords, opt);
  const double floor = noncentrality_floor(e, theta, eps, test.k);
  const AnalyticBound analytic = analytic_error_bound(test, eps, floor);
  const ErrorEstimate est = estimate_errors(test, alt.theta, cfg.trials, cfg.seed, cfg.threads);

  ordered_json j = base_header(cfg, sigma);
  j["eps"] = eps;
  j["eps_u"] = built.upper.eps;
  j["test"] = parsed(to_json(test));
  j["alternative"] = {{"c0", alt.c0}, {"c0_floor", floor}, {"distance", alt.distance}};
  j["analytic_bound"] = {{"value", analytic.value},
                         {"type1_ok", analytic.type1_ok},
                         {"type2_ok", analytic.type2_ok},
                         {"diagnostic", analytic.diagnostic}};
  j["errors"] = parsed(to_json(est));
  j["uniform_error"] = est.uniform_error();
  emit(cfg, out, j);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<double> grid;
  if (cfg.sweep_lo || cfg.sweep_hi || cfg.sweep_points) {
    if (!cfg.sweep_lo || !cfg.sweep_hi || !cfg.sweep_points) {
      throw ValidationError("--sweep-lo, --sweep-hi and --sweep-points must be given together");
    }
    grid = log_grid(*cfg.sweep_lo, *cfg.sweep_hi, *cfg.sweep_points);
  } else {
    grid = cfg.problem.sigma_grid;
  }
  if (grid.empty()) {
    throw ValidationError("config: 'sigma_grid' (or --sweep-lo/--sweep-hi/--sweep-points) is "
                          "required for sweep");
  }
  for (double& s : grid) s *= cfg.problem.sigma_scale;

  const auto& e = cfg.problem.ellipse;
  const double rho = cfg.problem.rho;
  const auto s_index = extremal_index(cfg.problem);

  ordered_json summary;
  summary["family"] = std::string(to_string(e.family()));
  summary["d"] = e.dim();
  summary["rho"] = rho;
  summary["points"] = grid.size();
  const auto predicted = predicted_exponent(e, s_index.has_value(), rho);
  summary["predicted_exponent"] = predicted ? ordered_json(*predicted) : ordered_json(nullptr);

  ordered_json failures = ordered_json::array();
  std::string csv;
  ordered_json rows;
  if (s_index) {
    const TStarSweep r = tstar_sweep(e, *s_index, grid, rho, cfg.threads);
    summary["mode"] = "t_star";
    summary["s"] = *s_index;
    summary["fitted_exponent"] = r.upper.slope;
    summary["fitted_stderr"] = r.upper.stderr;
    summary["fitted_exponent_lower"] = r.lower.slope;
    summary["fitted_stderr_lower"] = r.lower.stderr;
    for (const auto& f : r.failures) failures.push_back({{"sigma", f.sigma}, {"message", f.message}});
    std::ostringstream os;
    write_tstar_csv(os, r);
    csv = os.str();
    rows = ordered_json::array();
    for (const auto& row : r.rows) {
      ordered_json x = parsed(to_json(row.t));
      x["sigma"] = row.sigma;
      rows.push_back(std::move(x));
    }
  } else {
    const Vector theta = resolve_theta_star(cfg.problem.theta, e);
    const SweepResult r = sigma_sweep(e, theta, grid, rho, {}, cfg.threads);
    summary["mode"] = "radius";
    summary["fitted_exponent"] = r.upper.slope;
    summary["fitted_stderr"] = r.upper.stderr;
    summary["fitted_exponent_lower"] = r.lower.slope;
    summary["fitted_stderr_lower"] = r.lower.stderr;
    for (const auto& f : r.failures) failures.push_back({{"sigma", f.sigma}, {"message", f.message}});
    std::ostringstream os;
    write_sweep_csv(os, r);
    csv = os.str();
    rows = parsed(to_json(r))["rows"];
  }
  summary["failures"] = failures;

  if (cfg.format == Format::Json) {
    ordered_json doc = summary;
    doc["rows"] = rows;
    write_to(cfg, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    return kExitOk;
  }
  write_to(cfg, out, [&](std::ostream& o) { o << csv; });
  if (cfg.out) {
    std::filesystem::path side = *cfg.out;
    side += ".summary.json";
    std::ofstream f(side, std::ios::binary);
    if (!f) throw ValidationError("--out: cannot open '" + side.string() + "' for writing");
    f << summary.dump(2) << '\n';
  } else {
    err << summary.dump(2) << '\n';
  }
  return kExitOk;
}

int cmd_widths(const RunConfig& cfg, std::ostream& out) {
  const auto& e = cfg.problem.ellipse;
  const Vector theta = resolve_theta_star(cfg.problem.theta, e);
  const auto eps_opt = cfg.eps ? cfg.eps : cfg.problem.eps;
  if (!eps_opt) throw ValidationError("config: 'eps' (or --eps) is required for widths");
  const double eps = *eps_opt;
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ValidationError("eps: must be positive and finite, got " + fmt_double(eps));
  }
  const std::size_t d = e.dim();
  const std::size_t k_lo = cfg.k_lo.value_or(cfg.problem.k_lo.value_or(0));
  const std::size_t k_hi = cfg.k_hi.value_or(cfg.problem.k_hi.value_or(d));
  if (k_lo > k_hi || k_hi > d) {
    throw ValidationError("k range [" + std::to_string(k_lo) + ", " + std::to_string(k_hi) +
                          "] must satisfy 0 <= k_lo <= k_hi <= d = " + std::to_string(d));
  }
  const bool brute = cfg.brute || cfg.problem.brute;

  std::vector<WidthBounds> rows;
  std::vector<double> brute_col;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    rows.push_back(width_generic_bounds(e, theta, eps, k));
    if (brute) {
      BruteForceOptions opt;
      opt.n_dirs = cfg.n_dirs;
      opt.seed = cfg.seed;
      opt.threads = cfg.threads;
      try {
        brute_col.push_back(brute_force_width_detail(e, theta, eps, k, opt).width);
      } catch (const ValidationError& ex) {
        throw NumericError(std::string("brute-force oracle: ") + ex.what());
      }
    }
  }

  write_to(cfg, out, [&](std::ostream& o) {
    if (cfg.format == Format::Csv) {
      write_width_csv(o, eps, rows, brute_col);
      return;
    }
    ordered_json j;
    j["eps"] = eps;
    j["d"] = d;
    j["rows"] = ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ordered_json r = {{"k", rows[i].k},
                        {"lower", rows[i].lower},
                        {"upper", rows[i].upper},
                        {"method", std::string(to_string(rows[i].method))}};
      if (brute) r["brute"] = brute_col[i];
      j["rows"].push_back(std::move(r));
    }
    o << j.dump(2) << '\n';
  });
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Localized minimax testing radii for ellipses"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;
  std::string out_path;
  std::string format = "json";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML problem description")->required();
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--trials", cfg.trials, "Monte Carlo trials");
    sub->add_option("--eps", cfg.eps, "radius override");
    sub->add_option("--threads", cfg.threads, "worker threads (0: all cores)");
  };

  auto* solve = app.add_subcommand("solve", "critical radii, dimensions and t*");
  common(solve);
  auto* mc = app.add_subcommand("mc", "Monte Carlo errors of the projection test");
  common(mc);
  mc->add_flag("--certificate", cfg.certificate, "chi-square lower-bound certificate instead");
  auto* sweep = app.add_subcommand("sweep", "radius or t* sweep over sigma with fitted exponent");
  common(sweep);
  sweep->add_option("--sweep-lo", cfg.sweep_lo, "smallest sigma");
  sweep->add_option("--sweep-hi", cfg.sweep_hi, "largest sigma");
  sweep->add_option("--sweep-points", cfg.sweep_points, "number of log-spaced points");
  auto* widths = app.add_subcommand("widths", "width bounds over a range of k");
  common(widths);
  widths->add_flag("--brute", cfg.brute, "add the brute-force oracle column");
  widths->add_option("--n-dirs", cfg.n_dirs, "oracle directions per subset");
  widths->add_option("--k-lo", cfg.k_lo, "first k");
  widths->add_option("--k-hi", cfg.k_hi, "last k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.config_path = config_path;
    cfg.problem = load_config(cfg.config_path);
    if (!out_path.empty()) cfg.out = out_path;
    cfg.format = format == "csv" ? Format::Csv : Format::Json;

    // Command-line flags win over config keys.
    auto* sub = app.get_subcommands().front();
    if (sub->count("--seed") == 0 && cfg.problem.seed) cfg.seed = *cfg.problem.seed;
    if (sub->count("--trials") == 0 && cfg.problem.trials) cfg.trials = *cfg.problem.trials;
    if (!cfg.eps && cfg.command != "widths") cfg.eps = cfg.problem.eps;
    if (cfg.command == "widths" && sub->count("--n-dirs") == 0) cfg.n_dirs = cfg.problem.n_dirs;

    if (cfg.command == "solve") return cmd_solve(cfg, out);
    if (cfg.command == "mc") return cmd_mc(cfg, out);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
    return cmd_widths(cfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NotImplementedError& e) {
    err << "not implemented: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace lmtest::cli
