#pragma once

#include <Eigen/Dense>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace cartan::report {

using Eigen::VectorXd;

/// One classified sample (model representative or chart point).
struct SampleRow {
  VectorXd coords;
  std::string label;
  bool targeted = false;  // constructed representative, not a random draw
  std::vector<int> zu_membership;  // 1/0 per filtration level, innermost first
  std::map<std::string, double> diagnostics;
};

/// Per-scenario stratification summary shared by the model- and chart-level
/// decompositions.
struct StrataReport {
  std::vector<SampleRow> samples;
  std::map<std::string, int> random_counts;
  std::set<std::string> observed_labels;
  std::map<std::string, std::string> stratum_geometry;
  bool zu_monotone = true;
  std::map<std::string, double> metrics;

  void add(SampleRow row);
};

/// Deterministic CSV dump (fixed column order, %.17g doubles).
void write_csv(const StrataReport& r, std::ostream& os);

std::string format_double(double v);

}  // namespace cartan::report
