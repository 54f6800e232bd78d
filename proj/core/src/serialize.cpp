#include "lmtest/serialize.hpp"

#include "json.hpp"

#include <cmath>
#include <ostream>

#include "lmtest/errors.hpp"

namespace lmtest {

using detail::fmt_double;
using nlohmann::json;

std::string to_json(const CriticalSolution& s) {
  return json{{"eps", s.eps},
              {"k", s.k},
              {"side", to_string(s.side)},
              {"bracket_lo", s.bracket_lo},
              {"bracket_hi", s.bracket_hi},
              {"residual", s.residual}}
      .dump();
}

std::string to_json(const LptTest& t) {
  return json{{"k", t.k},
              {"coords", t.coords},
              {"threshold", t.threshold},
              {"sigma", t.sigma},
              {"rho", t.rho}}
      .dump();
}

std::string to_json(const ErrorEstimate& e) {
  return json{{"type1", e.type1},
              {"type2", e.type2},
              {"stderr1", e.stderr1},
              {"stderr2", e.stderr2},
              {"trials", e.trials},
              {"seed", e.seed},
              {"null_rejections", e.null_rejections},
              {"alt_acceptances", e.alt_acceptances}}
      .dump();
}

std::string certificate_json(const Chi2Bound& b, double eps, double sigma, std::size_t k) {
  json j{{"eps", eps},
         {"sigma", sigma},
         {"k", k},
         {"bound", b.bound},
         {"method", "hypercube_closed_form"},
         {"value", b.overflow ? json(nullptr) : json(b.value)},
         {"overflow", b.overflow}};
  if (!b.diagnostic.empty()) j["diagnostic"] = b.diagnostic;
  return j.dump();
}

std::string certificate_json(const EmpiricalChi2& b, double eps, double sigma, std::size_t k) {
  const bool finite = std::isfinite(b.value);
  return json{{"eps", eps},
              {"sigma", sigma},
              {"k", k},
              {"bound", b.bound},
              {"method", b.exact ? "enumeration" : "monte_carlo"},
              {"stderr", finite ? json(b.stderr_bound) : json(nullptr)},
              {"value", finite ? json(b.value) : json(nullptr)},
              {"exact", b.exact},
              {"pairs", b.pairs},
              {"overflow_count", b.overflow_count}}
      .dump();
}

std::string to_json(const TStar& t) {
  json j{{"t_u", t.t_u}, {"t_l", t.t_l}, {"m_u", t.m_u}, {"m_l", t.m_l}};
  if (t.t_u_closed) j["t_u_closed"] = *t.t_u_closed;
  if (t.t_l_closed) j["t_l_closed"] = *t.t_l_closed;
  if (t.t_u_relaxed) j["t_u_relaxed"] = *t.t_u_relaxed;
  if (t.t_l_relaxed) j["t_l_relaxed"] = *t.t_l_relaxed;
  return j.dump();
}

std::string to_json(const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"sigma", row.sigma},
                    {"eps_u", row.eps_u},
                    {"eps_l", row.eps_l},
                    {"k_u", row.k_u},
                    {"k_l", row.k_l},
                    {"residual", row.residual}});
  }
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"sigma", f.sigma}, {"message", f.message}});
  return json{{"family", to_string(r.family)},
              {"rows", rows},
              {"failures", failures},
              {"slope_upper", r.upper.slope},
              {"stderr_upper", r.upper.stderr},
              {"slope_lower", r.lower.slope},
              {"stderr_lower", r.lower.stderr}}
      .dump();
}

void write_sweep_csv(std::ostream& out, const SweepResult& r) {
  out << "sigma,sigma_sq,eps_u,eps_u_sq,eps_l,k_u,k_l,residual\n";
  for (const auto& row : r.rows) {
    out << fmt_double(row.sigma) << ',' << fmt_double(row.sigma * row.sigma) << ','
        << fmt_double(row.eps_u) << ',' << fmt_double(row.eps_u * row.eps_u) << ','
        << fmt_double(row.eps_l) << ',' << row.k_u << ',' << row.k_l << ','
        << fmt_double(row.residual) << '\n';
  }
}

void write_tstar_csv(std::ostream& out, const TStarSweep& r) {
  out << "sigma,sigma_sq,t_u,t_u_sq,t_l,m_u,m_l,t_u_closed,t_l_closed\n";
  for (const auto& row : r.rows) {
    const auto& t = row.t;
    out << fmt_double(row.sigma) << ',' << fmt_double(row.sigma * row.sigma) << ','
        << fmt_double(t.t_u) << ',' << fmt_double(t.t_u * t.t_u) << ',' << fmt_double(t.t_l)
        << ',' << t.m_u << ',' << t.m_l << ','
        << (t.t_u_closed ? fmt_double(*t.t_u_closed) : "") << ','
        << (t.t_l_closed ? fmt_double(*t.t_l_closed) : "") << '\n';
  }
}

}  // namespace lmtest
