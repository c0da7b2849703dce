#include "mps/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mps {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
}

long parse_int(const std::string& v, int line) {
  try {
    size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + v + "'", line);
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) items.push_back(cur);
  }
  return items;
}

// Shortest decimal form that round-trips to the same double.
std::string number(double x) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  cfg.poles.polygons.clear();
  std::string raw;
  int line = 0;
  bool polygon_open = false, sample_open = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = raw;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.resize(hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string val = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (val.empty()) throw ConfigError("empty value for '" + key + "'", line);

    if (key == "dim") {
      cfg.poles.dim = static_cast<int>(parse_int(val, line));
    } else if (key == "lambda0") {
      cfg.poles.lambda0 = parse_double(val, line);
    } else if (key == "mode") {
      if (val == "polygonal")
        cfg.poles.mode = SymmetryMode::Polygonal;
      else if (val == "circular")
        cfg.poles.mode = SymmetryMode::Circular;
      else
        throw ConfigError("mode must be 'polygonal' or 'circular'", line);
    } else if (key == "k") {
      cfg.poles.k = static_cast<int>(parse_int(val, line));
    } else if (key == "polygon.radius") {
      cfg.poles.polygons.push_back({parse_double(val, line), 0.0, 0.0});
      polygon_open = true;
    } else if (key == "polygon.mass" || key == "polygon.phase") {
      if (!polygon_open)
        throw ConfigError("'" + key + "' before any polygon.radius", line);
      auto& poly = cfg.poles.polygons.back();
      (key == "polygon.mass" ? poly.mass : poly.phase) =
          parse_double(val, line);
    } else if (key == "grid.rho_nodes") {
      cfg.grid.rho_nodes = static_cast<int>(parse_int(val, line));
    } else if (key == "grid.theta_nodes") {
      cfg.grid.theta_nodes = static_cast<int>(parse_int(val, line));
    } else if (key == "grid.s_nodes") {
      cfg.grid.s_nodes = static_cast<int>(parse_int(val, line));
    } else if (key == "grid.r_trunc") {
      cfg.grid.r_trunc = parse_double(val, line);
    } else if (key == "grid.s_trunc") {
      cfg.grid.s_trunc = parse_double(val, line);
    } else if (key == "grid.grading") {
      cfg.grid.grading = parse_double(val, line);
    } else if (key == "solver.max_iterations") {
      cfg.solver.max_iterations = static_cast<int>(parse_int(val, line));
    } else if (key == "solver.tol") {
      cfg.solver.tol = parse_double(val, line);
    } else if (key == "solver.multistart_iterations") {
      cfg.solver.multistart_iterations =
          static_cast<int>(parse_int(val, line));
    } else if (key == "solver.el_tol") {
      cfg.solver.el_tol = parse_double(val, line);
    } else if (key == "solver.compute_thresholds") {
      cfg.solver.compute_thresholds = parse_int(val, line) != 0;
    } else if (key == "study.kind") {
      cfg.study.kind = val;
    } else if (key == "study.lambda") {
      cfg.study.lambda = parse_double(val, line);
    } else if (key == "study.xi") {
      cfg.study.xi = parse_double(val, line);
    } else if (key == "study.mu_grid") {
      cfg.study.mu_grid.clear();
      for (const auto& item : split_list(val))
        cfg.study.mu_grid.push_back(parse_double(item, line));
    } else if (key == "study.shrink") {
      cfg.study.shrink.clear();
      for (const auto& item : split_list(val))
        cfg.study.shrink.push_back(parse_double(item, line));
    } else if (key == "study.radius") {
      cfg.study.radius = parse_double(val, line);
    } else if (key == "study.k_list") {
      cfg.study.k_list.clear();
      for (const auto& item : split_list(val))
        cfg.study.k_list.push_back(static_cast<int>(parse_int(item, line)));
    } else if (key == "study.sample_rho") {
      cfg.study.sample.rho = parse_double(val, line);
    } else if (key == "study.sample_theta") {
      cfg.study.sample.theta = parse_double(val, line);
    } else if (key == "study.sample_s") {
      cfg.study.sample.s = parse_double(val, line);
    } else if (key == "sample.rho") {
      cfg.samples.push_back({parse_double(val, line), 0.0, 0.0});
      sample_open = true;
    } else if (key == "sample.theta" || key == "sample.s") {
      if (!sample_open)
        throw ConfigError("'" + key + "' before any sample.rho", line);
      auto& pt = cfg.samples.back();
      (key == "sample.theta" ? pt.theta : pt.s) = parse_double(val, line);
    } else if (key == "out_dir") {
      cfg.out_dir = val;
    } else if (key == "seed") {
      cfg.seed = static_cast<unsigned long>(parse_int(val, line));
    } else {
      throw ConfigError("unknown key '" + key + "'", line);
    }
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'", 0);
  return parse_config(in);
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "dim = " << cfg.poles.dim << "\n";
  out << "lambda0 = " << number(cfg.poles.lambda0) << "\n";
  out << "mode = "
      << (cfg.poles.mode == SymmetryMode::Polygonal ? "polygonal"
                                                    : "circular")
      << "\n";
  out << "k = " << cfg.poles.k << "\n";
  for (const auto& poly : cfg.poles.polygons) {
    out << "polygon.radius = " << number(poly.radius) << "\n";
    out << "polygon.mass = " << number(poly.mass) << "\n";
    out << "polygon.phase = " << number(poly.phase) << "\n";
  }
  out << "grid.rho_nodes = " << cfg.grid.rho_nodes << "\n";
  out << "grid.theta_nodes = " << cfg.grid.theta_nodes << "\n";
  out << "grid.s_nodes = " << cfg.grid.s_nodes << "\n";
  out << "grid.r_trunc = " << number(cfg.grid.r_trunc) << "\n";
  out << "grid.s_trunc = " << number(cfg.grid.s_trunc) << "\n";
  out << "grid.grading = " << number(cfg.grid.grading) << "\n";
  out << "solver.max_iterations = " << cfg.solver.max_iterations << "\n";
  out << "solver.tol = " << number(cfg.solver.tol) << "\n";
  out << "solver.multistart_iterations = "
      << cfg.solver.multistart_iterations << "\n";
  out << "solver.el_tol = " << number(cfg.solver.el_tol) << "\n";
  out << "solver.compute_thresholds = "
      << (cfg.solver.compute_thresholds ? 1 : 0) << "\n";
  if (!cfg.study.kind.empty()) {
    out << "study.kind = " << cfg.study.kind << "\n";
    out << "study.lambda = " << number(cfg.study.lambda) << "\n";
    out << "study.xi = " << number(cfg.study.xi) << "\n";
    if (!cfg.study.mu_grid.empty()) {
      out << "study.mu_grid = ";
      for (size_t i = 0; i < cfg.study.mu_grid.size(); ++i)
        out << (i ? "," : "") << number(cfg.study.mu_grid[i]);
      out << "\n";
    }
    if (!cfg.study.shrink.empty()) {
      out << "study.shrink = ";
      for (size_t i = 0; i < cfg.study.shrink.size(); ++i)
        out << (i ? "," : "") << number(cfg.study.shrink[i]);
      out << "\n";
    }
    out << "study.radius = " << number(cfg.study.radius) << "\n";
    if (!cfg.study.k_list.empty()) {
      out << "study.k_list = ";
      for (size_t i = 0; i < cfg.study.k_list.size(); ++i)
        out << (i ? "," : "") << cfg.study.k_list[i];
      out << "\n";
    }
    out << "study.sample_rho = " << number(cfg.study.sample.rho) << "\n";
    out << "study.sample_theta = " << number(cfg.study.sample.theta)
        << "\n";
    out << "study.sample_s = " << number(cfg.study.sample.s) << "\n";
  }
  for (const auto& pt : cfg.samples) {
    out << "sample.rho = " << number(pt.rho) << "\n";
    out << "sample.theta = " << number(pt.theta) << "\n";
    out << "sample.s = " << number(pt.s) << "\n";
  }
  out << "out_dir = " << cfg.out_dir << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

}  // namespace mps
