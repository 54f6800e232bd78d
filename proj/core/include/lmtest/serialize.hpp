#pragma once

#include <iosfwd>
#include <string>

#include "lmtest/critical.hpp"
#include "lmtest/lower_bounds.hpp"
#include "lmtest/lpt.hpp"
#include "lmtest/sim.hpp"

namespace lmtest {

// JSON records; doubles are written with round-trip precision.

/// {eps, k, side, bracket_lo, bracket_hi, residual}
std::string to_json(const CriticalSolution& s);
/// {k, coords, threshold, sigma, rho}
std::string to_json(const LptTest& t);
/// {type1, type2, stderr1, stderr2, trials, seed, null_rejections, alt_acceptances}
std::string to_json(const ErrorEstimate& e);
/// {eps, sigma, k, bound, method, value, overflow, diagnostic?}
std::string certificate_json(const Chi2Bound& b, double eps, double sigma, std::size_t k);
/// {eps, sigma, k, bound, method, stderr, value, exact, pairs, overflow_count}
std::string certificate_json(const EmpiricalChi2& b, double eps, double sigma, std::size_t k);
/// {t_u, t_l, m_u, m_l, t_u_closed?, t_l_closed?, t_u_relaxed?, t_l_relaxed?}
std::string to_json(const TStar& t);
/// {rows: [...], failures: [...], slope_upper, stderr_upper, slope_lower, stderr_lower}
std::string to_json(const SweepResult& r);

/// Columns sigma,sigma_sq,eps_u,eps_u_sq,eps_l,k_u,k_l,residual.
void write_sweep_csv(std::ostream& out, const SweepResult& r);
/// Columns sigma,sigma_sq,t_u,t_u_sq,t_l,m_u,m_l,t_u_closed,t_l_closed.
void write_tstar_csv(std::ostream& out, const TStarSweep& r);

}  // namespace lmtest
