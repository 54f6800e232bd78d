#include "lmtest/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "lmtest/errors.hpp"

namespace lmtest {

using detail::fmt_double;
using detail::throw_validation;

Vector resolve_theta_star(const ThetaStarSpec& spec, const EllipseSpec& e) {
  const std::size_t d = e.dim();
  Vector theta(d, 0.0);
  auto check_s = [&] {
    if (spec.s == 0 || spec.s > d) {
      throw_validation("theta_star.s = " + std::to_string(spec.s) + " outside [1, " +
                       std::to_string(d) + "]");
    }
  };
  switch (spec.kind) {
    case ThetaStarSpec::Kind::Zero: break;
    case ThetaStarSpec::Kind::Axis:
      check_s();
      theta[spec.s - 1] = spec.value;
      break;
    case ThetaStarSpec::Kind::BoundaryOffset: {
      check_s();
      const double root = std::sqrt(e.axis(spec.s));
      if (!(spec.w >= 0.0 && spec.w <= root)) {
        throw_validation("theta_star.w = " + fmt_double(spec.w) + " outside [0, sqrt(mu_s)] = [0, " +
                         fmt_double(root) + "]");
      }
      theta[spec.s - 1] = root - spec.w;
      break;
    }
    case ThetaStarSpec::Kind::Explicit:
      if (spec.values.size() != d) {
        throw_validation("theta_star.values has " + std::to_string(spec.values.size()) +
                         " entries, expected d = " + std::to_string(d));
      }
      theta = spec.values;
      break;
  }
  if (!contains(e, theta)) {
    throw_validation("theta_star lies outside the ellipse (||theta*||_E^2 = " +
                     fmt_double(ellipse_norm_sq(e, theta)) + ")");
  }
  return theta;
}

SquareMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_validation("gram: cannot open '" + path.string() + "'");
  std::vector<Vector> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Vector row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw_validation("gram: bad number '" + cell + "' on line " + std::to_string(lineno) +
                         " of " + path.string());
      }
    }
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  if (n == 0) throw_validation("gram: '" + path.string() + "' is empty");
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw_validation("gram: row " + std::to_string(i + 1) + " has " +
                       std::to_string(rows[i].size()) + " entries, expected " + std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {

template <typename T>
T get(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw_validation("config: key '" + key + "' has an invalid value");
  }
}

template <typename T>
std::optional<T> opt(const YAML::Node& root, const std::string& key) {
  const auto node = root[key];
  if (!node) return std::nullopt;
  return get<T>(node, key);
}

template <typename T>
T need(const YAML::Node& root, const std::string& key) {
  const auto node = root[key];
  if (!node) throw_validation("config: missing required key '" + key + "'");
  return get<T>(node, key);
}

std::size_t positive_size(const YAML::Node& root, const std::string& key) {
  const auto v = need<long long>(root, key);
  if (v < 1) throw_validation("config: '" + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

ThetaStarSpec parse_theta(const YAML::Node& node) {
  ThetaStarSpec spec;
  if (!node) return spec;
  if (node.IsScalar()) {
    const auto kind = get<std::string>(node, "theta_star");
    if (kind != "zero") throw_validation("config: theta_star shorthand must be 'zero'");
    return spec;
  }
  if (node.IsSequence()) {
    spec.kind = ThetaStarSpec::Kind::Explicit;
    spec.values = get<Vector>(node, "theta_star");
    return spec;
  }
  if (!node["kind"]) throw_validation("config: missing required key 'theta_star.kind'");
  const auto kind = get<std::string>(node["kind"], "theta_star.kind");
  if (kind == "zero") {
    spec.kind = ThetaStarSpec::Kind::Zero;
  } else if (kind == "axis") {
    spec.kind = ThetaStarSpec::Kind::Axis;
    spec.s = positive_size(node, "s");
    spec.value = need<double>(node, "value");
  } else if (kind == "boundary_offset") {
    spec.kind = ThetaStarSpec::Kind::BoundaryOffset;
    spec.s = positive_size(node, "s");
    spec.w = need<double>(node, "w");
  } else if (kind == "explicit") {
    spec.kind = ThetaStarSpec::Kind::Explicit;
    spec.values = need<Vector>(node, "values");
  } else {
    throw_validation("config: theta_star.kind '" + kind +
                     "' is not one of zero, axis, explicit, boundary_offset");
  }
  return spec;
}

}  // namespace

ProblemConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& ex) {
    throw_validation(std::string("config: malformed YAML: ") + ex.what());
  }
  if (!root.IsMap()) throw_validation("config: expected a mapping of keys to values");

  ProblemConfig cfg;
  const auto family = need<std::string>(root, "family");
  try {
    if (family == "poly") {
      cfg.ellipse = generate_poly(positive_size(root, "d"), need<double>(root, "alpha"),
                                  opt<double>(root, "c1").value_or(1.0));
    } else if (family == "exp") {
      cfg.ellipse = generate_exp(positive_size(root, "d"), need<double>(root, "gamma"),
                                 opt<double>(root, "c1").value_or(1.0),
                                 opt<double>(root, "c2").value_or(1.0));
    } else if (family == "explicit") {
      cfg.ellipse = make_ellipse(need<Vector>(root, "mu"));
    } else if (family == "kernel") {
      SquareMatrix gram;
      if (const auto path = opt<std::string>(root, "gram")) {
        std::filesystem::path p(*path);
        if (p.is_relative()) p = base_dir / p;
        gram = read_matrix_csv(p);
      } else {
        const auto kernel = need<std::string>(root, "kernel");
        const auto points = need<Vector>(root, "points");
        BuiltinKernel k;
        if (kernel == "sobolev1") {
          k = BuiltinKernel::FirstOrderSobolev;
        } else if (kernel == "gaussian") {
          k = BuiltinKernel::Gaussian;
        } else {
          throw_validation("config: kernel '" + kernel + "' is not one of sobolev1, gaussian");
        }
        gram = gram_matrix(k, points, opt<double>(root, "bandwidth").value_or(1.0));
      }
      auto ke = kernel_to_ellipse(gram, 1.0);
      cfg.ellipse = std::move(ke.ellipse);
      cfg.sigma_scale = ke.effective_sigma;
      cfg.clamped = ke.clamped;
    } else {
      throw_validation("config: family '" + family +
                       "' is not one of poly, exp, explicit, kernel");
    }
  } catch (const ValidationError& ex) {
    const std::string what = ex.what();
    if (what.rfind("config:", 0) == 0) throw;
    throw_validation("config: " + what);
  }

  cfg.theta = parse_theta(root["theta_star"]);
  resolve_theta_star(cfg.theta, cfg.ellipse);

  cfg.sigma = opt<double>(root, "sigma");
  if (cfg.sigma && !(*cfg.sigma > 0.0)) throw_validation("config: 'sigma' must be positive");
  cfg.sigma_grid = opt<Vector>(root, "sigma_grid").value_or(Vector{});
  for (double s : cfg.sigma_grid) {
    if (!(s > 0.0)) throw_validation("config: 'sigma_grid' entries must be positive");
  }
  cfg.rho = opt<double>(root, "rho").value_or(0.25);
  if (!(cfg.rho > 0.0 && cfg.rho <= 0.5)) throw_validation("config: 'rho' must lie in (0, 1/2]");
  if (const auto seed = opt<unsigned long long>(root, "seed")) cfg.seed = *seed;
  if (root["trials"]) cfg.trials = positive_size(root, "trials");
  cfg.eps = opt<double>(root, "eps");
  if (cfg.eps && !(*cfg.eps > 0.0)) throw_validation("config: 'eps' must be positive");
  if (root["s"]) {
    cfg.s = positive_size(root, "s");
    if (*cfg.s > cfg.ellipse.dim()) throw_validation("config: 's' exceeds d");
  }
  if (const auto v = opt<long long>(root, "k_lo")) {
    if (*v < 0) throw_validation("config: 'k_lo' must be >= 0");
    cfg.k_lo = static_cast<std::size_t>(*v);
  }
  if (const auto v = opt<long long>(root, "k_hi")) {
    if (*v < 0) throw_validation("config: 'k_hi' must be >= 0");
    cfg.k_hi = static_cast<std::size_t>(*v);
  }
  cfg.brute = opt<bool>(root, "brute").value_or(false);
  if (root["n_dirs"]) cfg.n_dirs = positive_size(root, "n_dirs");
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_validation("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace lmtest
