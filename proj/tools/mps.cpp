// Command-line front end: configuration-driven runs of the condition
// checks, the quotient minimizer, the scripted studies, and the potential
// comparison table. All outputs are plain text with a header echoing the
// resolved configuration; files are written atomically (temp-then-rename).
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "mps/config.hpp"
#include "mps/geometry.hpp"
#include "mps/minimizer.hpp"
#include "mps/studies.hpp"

namespace fs = std::filesystem;
using namespace mps;

namespace {

constexpr const char* kToolVersion = "mps 1.0.0";
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string header_block(const RunConfig& cfg) {
  std::ostringstream out;
  out << "# " << kToolVersion << "\n";
  std::istringstream lines(serialize_config(cfg));
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << "\n";
  return out.str();
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

void append_report(std::ostringstream& out, const ConditionReport& rep) {
  out << "[" << rep.label << "]\n";
  for (const auto& c : rep.checks)
    out << c.name << " = " << fmt(c.lhs) << " " << c.relation << " "
        << fmt(c.rhs) << " -> " << (c.holds ? "holds" : "fails") << "\n";
  out << "verdict = " << (rep.verdict ? "pass" : "fail") << "\n\n";
}

int cmd_check(const RunConfig& cfg, const fs::path& out_dir) {
  std::ostringstream out;
  out << header_block(cfg);
  append_report(out, check_positivity(cfg.poles));
  try {
    append_report(out, check_nonattainability(cfg.poles));
  } catch (const std::exception& e) {
    out << "[nonattainability]\nerror = " << e.what() << "\n\n";
  }
  if (cfg.poles.mode == SymmetryMode::Circular) {
    try {
      append_report(out, check_circ_existence(cfg.poles));
    } catch (const std::exception& e) {
      out << "[circular existence]\nerror = " << e.what() << "\n\n";
    }
  } else {
    try {
      append_report(out, check_polygon_existence_k(cfg.poles));
    } catch (const std::exception& e) {
      out << "[polygonal existence]\nerror = " << e.what() << "\n\n";
    }
    try {
      const std::optional<int> min_k = min_k_for_existence(cfg.poles, 512);
      out << "[minimal k]\n";
      if (min_k)
        out << "min_k = " << *min_k << " -> achieved for k large\n\n";
      else
        out << "min_k = none up to 512\n\n";
    } catch (const std::exception& e) {
      out << "[minimal k]\nerror = " << e.what() << "\n\n";
    }
  }
  const std::string text = out.str();
  atomic_write(out_dir / "check_report.txt", text);
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_minimize(const RunConfig& cfg, const fs::path& out_dir) {
  const ReducedGrid grid = ReducedGrid::build(cfg.grid, cfg.poles);
  const MinimizationResult res =
      minimize_quotient(grid, cfg.poles, InitPreset::BestOfThree, cfg.solver);

  std::ostringstream summary;
  summary << header_block(cfg);
  summary << "level = " << fmt(res.level) << "\n";
  summary << "residual = " << fmt(res.residual) << "\n";
  summary << "iterations = " << res.iterations << "\n";
  summary << "converged = " << (res.converged ? 1 : 0) << "\n";
  summary << "dirichlet = " << fmt(res.breakdown.dirichlet) << "\n";
  summary << "central = " << fmt(res.breakdown.central) << "\n";
  for (size_t l = 0; l < res.breakdown.per_ring.size(); ++l)
    summary << "ring_" << l << " = " << fmt(res.breakdown.per_ring[l])
            << "\n";
  summary << "lp_integral = " << fmt(res.breakdown.lp_integral) << "\n";
  if (res.thresholds.available) {
    summary << "threshold.sobolev_proxy = "
            << fmt(res.thresholds.sobolev_proxy) << "\n";
    summary << "threshold.scaled_proxy = "
            << fmt(res.thresholds.scaled_proxy) << "\n";
    summary << "threshold.central_level = "
            << fmt(res.thresholds.central_level) << "\n";
    for (size_t l = 0; l < res.thresholds.per_pole_levels.size(); ++l)
      summary << "threshold.pole_" << l << " = "
              << fmt(res.thresholds.per_pole_levels[l]) << "\n";
    summary << "threshold.aggregate_level = "
            << fmt(res.thresholds.aggregate_level) << "\n";
  }
  if (res.converged) {
    for (const auto& fit : extract_singular_exponents(res, grid, cfg.poles))
      summary << "exponent." << fit.label << " = " << fmt(fit.exponent)
              << " (classification " << fit.classification << ", "
              << (fit.reliable ? "reliable" : "unreliable") << ")\n";
  }
  atomic_write(out_dir / "summary.txt", summary.str());

  std::ostringstream trace;
  trace << header_block(cfg) << "iteration,quotient,step,residual\n";
  for (size_t i = 0; i < res.trace.size(); ++i)
    trace << i << "," << fmt(res.trace[i].quotient) << ","
          << fmt(res.trace[i].step) << "," << fmt(res.trace[i].residual)
          << "\n";
  atomic_write(out_dir / "trace.csv", trace.str());

  std::ostringstream profile;
  profile << header_block(cfg);
  write_field_csv(profile, res.field, grid);
  atomic_write(out_dir / "profile.csv", profile.str());

  std::printf("level = %s (residual %s, %d iterations)\n",
              fmt(res.level).c_str(), fmt(res.residual).c_str(),
              res.iterations);
  if (!res.converged) {
    std::fprintf(stderr, "minimize: not converged within %d iterations\n",
                 cfg.solver.max_iterations);
    return kExitNumerical;
  }
  return 0;
}

void write_table(const RunConfig& cfg, const fs::path& path,
                 const char* key_name, const ConvergenceTable& table) {
  std::ostringstream out;
  out << header_block(cfg) << key_name << ",value,ok\n";
  for (size_t j = 0; j < table.keys.size(); ++j)
    out << fmt(table.keys[j]) << "," << fmt(table.values[j]) << ","
        << (table.row_ok[j] ? 1 : 0) << "\n";
  atomic_write(path, out.str());
}

int cmd_study(const RunConfig& cfg, const fs::path& out_dir) {
  std::ostringstream manifest;
  manifest << header_block(cfg);
  const std::string& kind = cfg.study.kind;
  if (kind == "hardy") {
    std::vector<double> shrink = cfg.study.shrink;
    if (shrink.empty())
      for (int l = 6; l <= 30; l += 3) shrink.push_back(std::exp(-l));
    const ConvergenceTable table =
        hardy_optimality_study(cfg.poles.dim, cfg.study.radius, shrink);
    write_table(cfg, out_dir / "hardy.csv", "log_width", table);
    manifest << "study = hardy\n";
    manifest << "predicted_limit = " << fmt(table.reference) << "\n";
    manifest << "measured_last = " << fmt(table.values.back()) << "\n";
    manifest << "extrapolated = " << fmt(table.extrapolated) << "\n";
    manifest << "observed_order = " << fmt(table.observed_order) << "\n";
  } else if (kind == "scaling") {
    const HardyParameter p(cfg.poles.dim, cfg.study.lambda);
    const ScalingFitReport rep =
        fit_interaction_scaling(p, cfg.study.xi, cfg.study.mu_grid);
    std::ostringstream out;
    out << header_block(cfg) << "mu,value\n";
    for (size_t i = 0; i < rep.mu_grid.size(); ++i)
      out << fmt(rep.mu_grid[i]) << "," << fmt(rep.values[i]) << "\n";
    atomic_write(out_dir / "scaling.csv", out.str());
    manifest << "study = scaling\n";
    manifest << "predicted_slope = " << fmt(rep.predicted_slope) << "\n";
    manifest << "fitted_slope = " << fmt(rep.fitted_slope) << "\n";
    manifest << "log_correction = " << (rep.log_correction ? 1 : 0) << "\n";
    if (rep.log_correction)
      manifest << "log_constant = " << fmt(rep.log_constant) << "\n";
    manifest << "max_residual = " << fmt(rep.max_residual) << "\n";
  } else if (kind == "k-limit") {
    const ConvergenceTable table =
        k_limit_study(cfg.poles, cfg.study.k_list, cfg.grid, cfg.solver);
    write_table(cfg, out_dir / "k_limit.csv", "k", table);
    manifest << "study = k-limit\n";
    manifest << "circular_level = " << fmt(table.reference) << "\n";
    manifest << "extrapolated = " << fmt(table.extrapolated) << "\n";
    manifest << "observed_order = " << fmt(table.observed_order) << "\n";
    for (bool ok : table.row_ok)
      if (!ok) {
        atomic_write(out_dir / "study_manifest.txt", manifest.str());
        std::fprintf(stderr, "study: a sector minimization did not converge\n");
        return kExitNumerical;
      }
  } else if (kind == "riemann") {
    const ConvergenceTable table = potential_riemann_error_study(
        cfg.poles, cfg.study.k_list, cfg.study.sample);
    write_table(cfg, out_dir / "riemann.csv", "k", table);
    manifest << "study = riemann\n";
    manifest << "circular_value = " << fmt(table.reference) << "\n";
    manifest << "observed_order = " << fmt(table.observed_order) << "\n";
  } else {
    std::fprintf(stderr, "study: unknown kind '%s'\n", kind.c_str());
    return kExitConfig;
  }
  atomic_write(out_dir / "study_manifest.txt", manifest.str());
  std::fputs(manifest.str().c_str(), stdout);
  return 0;
}

int cmd_potential_table(const RunConfig& cfg, const fs::path& out_dir) {
  if (cfg.poles.mode != SymmetryMode::Polygonal)
    throw std::invalid_argument(
        "potential-table: configuration must be polygonal");
  PoleConfiguration circ = cfg.poles;
  circ.mode = SymmetryMode::Circular;
  for (auto& poly : circ.polygons) poly.mass *= cfg.poles.k;

  std::ostringstream out;
  out << header_block(cfg)
      << "rho,theta,s,V_polygon,V_circle_limit,abs_diff,note\n";
  for (const auto& pt : cfg.samples) {
    out << fmt(pt.rho) << "," << fmt(pt.theta) << "," << fmt(pt.s) << ",";
    double vp = 0.0, vc = 0.0;
    std::string note;
    try {
      vp = total_potential(cfg.poles, pt);
      vc = total_potential(circ, pt);
      if (!std::isfinite(vp) || !std::isfinite(vc))
        note = "singular sample rejected";
    } catch (const std::exception&) {
      note = "singular sample rejected";
    }
    if (note.empty())
      out << fmt(vp) << "," << fmt(vc) << "," << fmt(std::abs(vp - vc))
          << ",\n";
    else
      out << ",,," << note << "\n";
  }
  atomic_write(out_dir / "potential_table.csv", out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational solver and verification harness for "
               "inverse-square multi-pole Rayleigh quotients"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  unsigned long seed_override = 0;
  bool seed_given = false;
  int threads = 0;

  app.add_option("--config", config_path, "key=value configuration file")
      ->required();
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--seed", seed_override, "random seed override")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--threads", threads, "worker thread cap");

  auto* check = app.add_subcommand("check", "evaluate existence conditions");
  auto* minimize = app.add_subcommand("minimize", "minimize the quotient");
  auto* study = app.add_subcommand("study", "run the configured study");
  auto* table =
      app.add_subcommand("potential-table", "tabulate both potentials");
  for (auto* sub : {check, minimize, study, table}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (threads > 0) Eigen::setNbThreads(threads);

  RunConfig cfg;
  try {
    cfg = parse_config_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_given) cfg.seed = seed_override;
    cfg.poles.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  try {
    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);
    if (*check) return cmd_check(cfg, out_dir);
    if (*minimize) return cmd_minimize(cfg, out_dir);
    if (*study) return cmd_study(cfg, out_dir);
    if (*table) return cmd_potential_table(cfg, out_dir);
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
}
