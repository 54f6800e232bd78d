#include "lmtest/sim.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lmtest/errors.hpp"
#include "lmtest/parallel.hpp"
#include "lmtest/widths.hpp"

namespace lmtest {

using detail::fmt_double;
using detail::throw_numeric;
using detail::throw_validation;

Vector sample_observation(std::span<const double> theta, double sigma, std::uint64_t seed,
                          std::uint64_t trial_index, StreamPurpose purpose) {
  if (!std::isfinite(sigma) || !(sigma > 0.0)) {
    throw_validation("sample_observation: sigma must be positive, got " + fmt_double(sigma));
  }
  const Substream stream(seed, trial_index, purpose);
  Vector y(theta.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = theta[i] + sigma * stream.gaussian(i);
  return y;
}

Vector observe(std::span<const double> theta, double sigma, std::span<const double> noise) {
  if (noise.size() != theta.size()) throw_validation("observe: dimension mismatch");
  if (!(sigma >= 0.0)) throw_validation("observe: sigma must be >= 0");
  Vector y(theta.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = theta[i] + sigma * noise[i];
  return y;
}

// ---------------------------------------------------------------------------

namespace {

struct SearchSpace {
  std::span<const double> mu;
  std::span<const double> theta;
  std::vector<char> in_proj;
  double eps = 0.0;
};

struct Candidate {
  Vector delta;
  double tail = -1.0;  // squared mass outside the projection
};

// E-norm^2 change when delta_i moves from old_v to new_v.
double enorm_change(const SearchSpace& s, std::size_t i, double old_v, double new_v) {
  const double a = s.theta[i] + old_v;
  const double b = s.theta[i] + new_v;
  return (b * b - a * a) / s.mu[i];
}

// Best point eps (cos phi e_j + sin phi e_t) for one coordinate pair.
Candidate two_coordinate(const SearchSpace& s, double base_n2, std::size_t j, std::size_t t,
                         std::size_t grid) {
  // base_n2 is ||theta*||_E^2; replace the contributions of j and t.
  const double rest = base_n2 - s.theta[j] * s.theta[j] / s.mu[j] -
                      s.theta[t] * s.theta[t] / s.mu[t];
  const double eps = s.eps;
  auto n2 = [&](double phi) {
    const double a = s.theta[j] + eps * std::cos(phi);
    const double b = s.theta[t] + eps * std::sin(phi);
    return rest + a * a / s.mu[j] + b * b / s.mu[t];
  };
  const bool j_tail = !s.in_proj[j];
  const bool t_tail = !s.in_proj[t];
  auto tail = [&](double phi) {
    const double c = std::cos(phi);
    const double sn = std::sin(phi);
    return eps * eps * ((j_tail ? c * c : 0.0) + (t_tail ? sn * sn : 0.0));
  };
  const double step = 2.0 * std::numbers::pi / static_cast<double>(grid);
  double best_phi = 0.0;
  double best_val = -1.0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double phi = step * static_cast<double>(g);
    if (n2(phi) <= 1.0 && tail(phi) > best_val) {
      best_val = tail(phi);
      best_phi = phi;
    }
  }
  Candidate out;
  if (best_val < 0.0) return out;
  // The optimum sits on the boundary of the feasible arc next to the best grid
  // point; walk towards each infeasible neighbour by bisection.
  for (double dir : {-1.0, 1.0}) {
    double in = best_phi;
    double outp = best_phi + dir * step;
    if (n2(outp) <= 1.0) continue;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (in + outp);
      (n2(mid) <= 1.0 ? in : outp) = mid;
    }
    if (tail(in) > best_val) {
      best_val = tail(in);
      best_phi = in;
    }
  }
  out.delta.assign(s.mu.size(), 0.0);
  out.delta[j] = eps * std::cos(best_phi);
  out.delta[t] += eps * std::sin(best_phi);
  out.tail = best_val;
  return out;
}

std::vector<std::size_t> top_by(std::vector<std::size_t> idx, std::size_t n,
                                const std::function<double(std::size_t)>& key) {
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  if (idx.size() > n) idx.resize(n);
  return idx;
}

struct LocalState {
  Vector delta;
  double n2 = 0.0;
  double tail = 0.0;
};

bool try_rotate(const SearchSpace& s, LocalState& st, std::size_t a, std::size_t b, double tau,
                bool require_gain) {
  const double c = std::cos(tau);
  const double sn = std::sin(tau);
  const double da = st.delta[a];
  const double db = st.delta[b];
  const double na = c * da - sn * db;
  const double nb = sn * da + c * db;
  const double n2 = st.n2 + enorm_change(s, a, da, na) + enorm_change(s, b, db, nb);
  if (n2 > 1.0) return false;
  double tail = st.tail;
  if (!s.in_proj[a]) tail += na * na - da * da;
  if (!s.in_proj[b]) tail += nb * nb - db * db;
  if (require_gain && !(tail > st.tail + 1e-15 * s.eps * s.eps)) return false;
  st.delta[a] = na;
  st.delta[b] = nb;
  st.n2 = n2;
  st.tail = tail;
  return true;
}

}  // namespace

Alternative worst_case_alternative(const EllipseSpec& e, std::span<const double> theta_star,
                                   double eps, std::span<const std::size_t> coords,
                                   const AlternativeOptions& options) {
  if (!std::isfinite(eps) || !(eps > 0.0)) {
    throw_validation("worst_case_alternative: eps must be positive");
  }
  if (theta_star.size() != e.dim() || !contains(e, theta_star)) {
    throw_validation("worst_case_alternative: theta* must be a point of the ellipse");
  }
  const std::size_t d = e.dim();
  SearchSpace s{e.mu(), theta_star, std::vector<char>(d, 0), eps};
  for (std::size_t j : coords) {
    if (j == 0 || j > d) throw_validation("worst_case_alternative: coordinate outside [1, d]");
    if (s.in_proj[j - 1]) throw_validation("worst_case_alternative: repeated coordinate");
    s.in_proj[j - 1] = 1;
  }
  const double base_n2 = ellipse_norm_sq(e, theta_star);

  std::vector<std::size_t> proj, tail;
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < d; ++i) {
    (s.in_proj[i] ? proj : tail).push_back(i);
    if (theta_star[i] != 0.0) nonzero.push_back(i);
  }
  auto by_mu = [&](std::size_t i) { return s.mu[i]; };
  auto by_weight = [&](std::size_t i) { return std::abs(theta_star[i]) / std::sqrt(s.mu[i]); };
  auto merge = [](std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  };
  const auto nz_top = top_by(nonzero, 4, by_weight);
  std::vector<std::size_t> firsts, seconds;
  if (tail.empty()) {
    // Nothing escapes the projection; any point at distance eps will do.
    firsts = merge(top_by(proj, 4, by_mu), nz_top);
    seconds = firsts;
  } else {
    firsts = top_by(proj, 4, by_mu);
    std::vector<std::size_t> nz_proj;
    for (std::size_t i : nz_top) {
      if (s.in_proj[i]) nz_proj.push_back(i);
    }
    firsts = merge(firsts, nz_proj);
    std::vector<std::size_t> nz_tail;
    for (std::size_t i : nz_top) {
      if (!s.in_proj[i]) nz_tail.push_back(i);
    }
    seconds = merge(top_by(tail, 2, by_mu), nz_tail);
  }

  Candidate best;
  for (std::size_t t : seconds) {
    for (std::size_t j : firsts) {
      if (j == t) continue;
      auto c = two_coordinate(s, base_n2, j, t, options.angle_grid);
      if (c.tail > best.tail) best = std::move(c);
    }
  }
  if (d == 1) {
    for (double sign : {1.0, -1.0}) {
      Vector delta{sign * eps};
      const double v = theta_star[0] + delta[0];
      if (v * v / s.mu[0] <= 1.0 && best.tail < 0.0) {
        best.delta = delta;
        best.tail = s.in_proj[0] ? 0.0 : eps * eps;
      }
    }
  }
  if (best.tail < 0.0) {
    throw_numeric("worst_case_alternative: no point of the ellipse at distance eps = " +
                  fmt_double(eps) + " from theta* was found (alternative set empty)");
  }

  // Multistart pairwise-rotation search over a pool of promising coordinates.
  std::vector<std::size_t> pool = merge(top_by(proj, 12, by_mu), top_by(tail, 12, by_mu));
  pool = merge(pool, top_by(nonzero, 14, by_weight));
  for (std::size_t i = 0; i < d; ++i) {
    if (best.delta[i] != 0.0) pool.push_back(i);
  }
  pool = merge(pool, {});
  const std::size_t starts = std::max<std::size_t>(options.starts, 1);
  std::vector<LocalState> results(starts);
  LocalState init;
  init.delta = best.delta;
  init.n2 = ellipse_norm_sq(e, [&] {
    Vector th(d);
    for (std::size_t i = 0; i < d; ++i) th[i] = theta_star[i] + best.delta[i];
    return th;
  }());
  init.tail = best.tail;
  if (pool.size() >= 2) {
    parallel_for(
        starts,
        [&](std::size_t start) {
          LocalState st = init;
          const Substream rng(options.seed, start, StreamPurpose::Multistart);
          std::uint64_t draw = 0;
          auto pick = [&] {
            return pool[std::min(pool.size() - 1,
                                 static_cast<std::size_t>(rng.uniform(draw++) *
                                                          static_cast<double>(pool.size())))];
          };
          if (start > 0) {
            for (int r = 0; r < 4; ++r) {
              const std::size_t a = pick();
              const std::size_t b = pick();
              if (a == b) continue;
              const double tau = 0.6 * (rng.uniform(draw++) - 0.5);
              try_rotate(s, st, a, b, tau, false);
            }
          }
          double step = 0.25;
          for (int sweep = 0; sweep < 200 && step > 1e-7; ++sweep) {
            bool improved = false;
            for (std::size_t x = 0; x < pool.size(); ++x) {
              for (std::size_t y = x + 1; y < pool.size(); ++y) {
                const std::size_t a = pool[x];
                const std::size_t b = pool[y];
                if (s.in_proj[a] == s.in_proj[b]) continue;
                improved |= try_rotate(s, st, a, b, step, true);
                improved |= try_rotate(s, st, a, b, -step, true);
              }
            }
            if (!improved) step *= 0.5;
          }
          results[start] = std::move(st);
        },
        options.threads);
  } else {
    results.assign(1, init);
  }
  std::size_t arg = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].tail > results[arg].tail) arg = i;
  }
  LocalState chosen = results[arg].tail > init.tail ? results[arg] : init;

  const double norm = l2_norm(chosen.delta);
  Alternative out;
  out.theta.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    chosen.delta[i] *= eps / norm;
    out.theta[i] = theta_star[i] + chosen.delta[i];
  }
  if (!contains(e, out.theta)) {
    throw_numeric("worst_case_alternative: constructed point left the ellipse (||theta||_E^2 = " +
                  fmt_double(ellipse_norm_sq(e, out.theta)) + ")");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (s.in_proj[i]) out.c0 += chosen.delta[i] * chosen.delta[i];
  }
  out.distance = l2_norm(chosen.delta);
  return out;
}

// ---------------------------------------------------------------------------

ErrorEstimate estimate_errors(const LptTest& test, std::span<const double> theta_alt,
                              std::size_t trials, std::uint64_t seed, std::size_t threads) {
  if (trials == 0) throw_validation("estimate_errors: trials must be >= 1");
  if (theta_alt.size() != test.theta_star.size()) {
    throw_validation("estimate_errors: theta_alt dimension mismatch");
  }
  std::vector<unsigned char> flags(trials, 0);
  Vector shift(test.coords.size());
  for (std::size_t c = 0; c < test.coords.size(); ++c) {
    const std::size_t j = test.coords[c] - 1;
    shift[c] = theta_alt[j] - test.theta_star[j];
  }
  // Only projected coordinates enter the statistic; coordinate i always draws
  // gaussian(i) so these are exactly the values sample_observation would use.
  parallel_for(
      trials,
      [&](std::size_t t) {
        const Substream null_stream(seed, t, StreamPurpose::NullObservation);
        const Substream alt_stream(seed, t, StreamPurpose::AlternativeObservation);
        double t0 = 0.0;
        double t1 = 0.0;
        for (std::size_t c = 0; c < test.coords.size(); ++c) {
          const std::size_t j = test.coords[c] - 1;
          const double z0 = test.sigma * null_stream.gaussian(j);
          const double z1 = shift[c] + test.sigma * alt_stream.gaussian(j);
          t0 += z0 * z0;
          t1 += z1 * z1;
        }
        unsigned char f = 0;
        if (t0 >= test.threshold) f |= 1;
        if (t1 < test.threshold) f |= 2;
        flags[t] = f;
      },
      threads);
  ErrorEstimate out;
  out.trials = trials;
  out.seed = seed;
  for (unsigned char f : flags) {
    out.null_rejections += f & 1;
    out.alt_acceptances += (f >> 1) & 1;
  }
  const double n = static_cast<double>(trials);
  out.type1 = static_cast<double>(out.null_rejections) / n;
  out.type2 = static_cast<double>(out.alt_acceptances) / n;
  out.stderr1 = std::sqrt(out.type1 * (1.0 - out.type1) / n);
  out.stderr2 = std::sqrt(out.type2 * (1.0 - out.type2) / n);
  return out;
}

// ---------------------------------------------------------------------------

EmpiricalRadius empirical_radius(const TestProblem& problem, std::size_t trials,
                                 std::uint64_t seed, const LowerBoundConstants& consts,
                                 std::size_t threads) {
  if (trials == 0) throw_validation("empirical_radius: trials must be >= 1");
  const auto& e = problem.ellipse();
  const auto theta_star = problem.theta_star();
  const LocalizedEllipse local(e, Vector(theta_star.begin(), theta_star.end()));
  const double rho = problem.rho();

  EmpiricalRadius out;
  out.eps_u = solve_eps_upper(local, problem.sigma(), rho).eps;
  out.theorem2 = theorem2_radius(problem, consts);

  AlternativeOptions alt_options;
  alt_options.seed = seed;
  alt_options.threads = threads;

  auto run = [&](std::size_t n_trials) {
    std::vector<RadiusEvaluation> evals;
    auto evaluate = [&](double eps) {
      const std::size_t k = k_upper(local, eps);
      const LptTest test = make_test(theta_star, problem.sigma(), rho, k);
      const auto alt = worst_case_alternative(e, theta_star, eps, test.coords, alt_options);
      const auto est = estimate_errors(test, alt.theta, n_trials, seed, threads);
      evals.push_back({eps, k, est.uniform_error()});
      return est.uniform_error();
    };
    double lo = std::max(out.theorem2, kBracketFloor);
    double hi = out.eps_u;
    const double hi_cap = local.diameter_bound();
    double err_hi = evaluate(hi);
    for (int grow = 0; grow < 8 && err_hi > rho && hi * 1.25 <= hi_cap; ++grow) {
      hi *= 1.25;
      err_hi = evaluate(hi);
    }
    const double err_lo = evaluate(lo);
    struct Outcome {
      double eps;
      bool monotone;
      std::vector<RadiusEvaluation> evals;
    };
    if (err_lo <= rho) return Outcome{lo, err_hi <= rho, evals};
    if (err_hi > rho) return Outcome{hi, false, evals};
    for (int depth = 0; depth < 20; ++depth) {
      const double mid = 0.5 * (lo + hi);
      (evaluate(mid) <= rho ? hi : lo) = mid;
    }
    return Outcome{hi, true, evals};
  };

  auto outcome = run(trials);
  out.trials = trials;
  if (!outcome.monotone) {
    out.retried = true;
    out.trials = 4 * trials;
    outcome = run(out.trials);
    if (!outcome.monotone) {
      throw_numeric("empirical_radius: estimated uniform error is not monotone across the bracket "
                    "even with " + std::to_string(out.trials) + " trials");
    }
  }
  out.eps = outcome.eps;
  out.evaluations = std::move(outcome.evals);
  return out;
}

// ---------------------------------------------------------------------------

ExponentFit fit_exponent(std::span<const std::pair<double, double>> rows) {
  if (rows.size() < 3) throw_validation("fit_exponent: need at least 3 rows");
  double xmin = rows.front().first;
  double xmax = xmin;
  for (const auto& [x, y] : rows) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw_validation("fit_exponent: all values must be positive and finite");
    }
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  if (xmax < 10.0 * xmin * (1.0 - 1e-12)) {
    throw_validation("fit_exponent: x spans less than one decade");
  }
  const double n = static_cast<double>(rows.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : rows) {
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : rows) {
    sxx += (std::log(x) - mx) * (std::log(x) - mx);
    sxy += (std::log(x) - mx) * (std::log(y) - my);
  }
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : rows) {
    const double r = std::log(y) - fit.intercept - fit.slope * std::log(x);
    ssr += r * r;
  }
  fit.stderr = rows.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  return fit;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo)) throw_validation("log_grid: need 0 < lo < hi");
  if (points < 2) throw_validation("log_grid: need at least 2 points");
  std::vector<double> out(points);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

std::vector<double> sorted_grid(std::span<const double> sigma_grid, const char* op) {
  if (sigma_grid.size() < 8) {
    throw_validation(std::string(op) + ": sigma grid needs at least 8 points, got " +
                     std::to_string(sigma_grid.size()));
  }
  std::vector<double> grid(sigma_grid.begin(), sigma_grid.end());
  for (double s : grid) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw_validation(std::string(op) + ": sigma values must be positive");
    }
  }
  std::sort(grid.begin(), grid.end());
  if (grid.back() * grid.back() < 10.0 * grid.front() * grid.front() * (1.0 - 1e-12)) {
    throw_validation(std::string(op) + ": sigma^2 grid spans less than one decade");
  }
  return grid;
}

}  // namespace

SweepResult sigma_sweep(const EllipseSpec& e, std::span<const double> theta_star,
                        std::span<const double> sigma_grid, double rho,
                        const LowerBoundConstants& consts, std::size_t threads) {
  const auto grid = sorted_grid(sigma_grid, "sigma_sweep");
  if (!(rho > 0.0 && rho <= 0.5)) throw_validation("sigma_sweep: rho must lie in (0, 1/2]");
  const LocalizedEllipse local(e, Vector(theta_star.begin(), theta_star.end()));
  std::vector<SweepRow> rows(grid.size());
  std::vector<std::string> errors(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        try {
          const auto up = solve_eps_upper(local, grid[i], rho);
          const auto lo = solve_eps_lower(local, grid[i], consts);
          rows[i] = {grid[i], up.eps, lo.eps, up.k, lo.k, 0.0};
        } catch (const std::exception& ex) {
          errors[i] = ex.what();
        }
      },
      threads);
  SweepResult out;
  out.family = e.family();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (errors[i].empty()) {
      out.rows.push_back(rows[i]);
    } else {
      out.failures.push_back({grid[i], errors[i]});
    }
  }
  std::vector<std::pair<double, double>> up, lo;
  for (const auto& r : out.rows) {
    up.emplace_back(r.sigma * r.sigma, r.eps_u * r.eps_u);
    lo.emplace_back(r.sigma * r.sigma, r.eps_l * r.eps_l);
  }
  out.upper = fit_exponent(up);
  out.lower = fit_exponent(lo);
  for (auto& r : out.rows) {
    r.residual = std::log(r.eps_u * r.eps_u) - out.upper.intercept -
                 out.upper.slope * std::log(r.sigma * r.sigma);
  }
  return out;
}

TStarSweep tstar_sweep(const EllipseSpec& e, std::size_t s, std::span<const double> sigma_grid,
                       double rho, std::size_t threads) {
  const auto grid = sorted_grid(sigma_grid, "tstar_sweep");
  std::vector<TStar> rows(grid.size());
  std::vector<std::string> errors(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        try {
          rows[i] = t_star(e, s, grid[i], rho);
        } catch (const std::exception& ex) {
          errors[i] = ex.what();
        }
      },
      threads);
  TStarSweep out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (errors[i].empty()) {
      out.rows.push_back({grid[i], rows[i]});
    } else {
      out.failures.push_back({grid[i], errors[i]});
    }
  }
  std::vector<std::pair<double, double>> up, lo;
  for (const auto& r : out.rows) {
    up.emplace_back(r.sigma * r.sigma, r.t.t_u * r.t.t_u);
    lo.emplace_back(r.sigma * r.sigma, r.t.t_l * r.t.t_l);
  }
  out.upper = fit_exponent(up);
  out.lower = fit_exponent(lo);
  return out;
}

}  // namespace lmtest
