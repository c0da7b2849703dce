#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mps/discretization.hpp"
#include "mps/geometry.hpp"
#include "mps/minimizer.hpp"
#include "mps/potentials.hpp"

namespace mps {

/// Parse failure with the offending line retained for diagnostics.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// Parameters of one scripted study run.
struct StudyParams {
  std::string kind;             // "hardy", "scaling", "k-limit", "riemann"
  double lambda = 0.0;          // scaling: one-pole mass
  double xi = 1.0;              // scaling: offset distance
  std::vector<double> mu_grid;  // scaling: explicit grid (empty = default)
  std::vector<double> shrink;   // hardy: shrink sequence
  double radius = 1.0;          // hardy: ring radius
  std::vector<int> k_list;      // k-limit / riemann
  ReducedPoint sample;          // riemann: evaluation point
};

/// One run of the tool, as read from a flat key=value file. Repeated
/// `polygon.` groups describe the pole rings (a polygon.radius line opens
/// a new ring); repeated `sample.` groups list potential-table rows.
struct RunConfig {
  PoleConfiguration poles;
  MeshSpec grid;
  SolverOptions solver;
  StudyParams study;
  std::vector<ReducedPoint> samples;
  std::string out_dir = ".";
  unsigned long seed = 0;
};

/// Parse a flat key=value stream. Unknown keys, malformed values, and
/// group fields without an open group are reported with line numbers.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// Canonical serialization: fixed key order, shortest round-trip number
/// format. parse(serialize(parse(text))) == parse(text).
std::string serialize_config(const RunConfig& cfg);

}  // namespace mps
