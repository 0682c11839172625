#include "cartan/report.hpp"

#include <cstdio>

namespace cartan::report {

void StrataReport::add(SampleRow row) {
  observed_labels.insert(row.label);
  if (!row.targeted) ++random_counts[row.label];
  // monotone filtration: membership at level k implies membership at k+1
  for (size_t k = 0; k + 1 < row.zu_membership.size(); ++k)
    if (row.zu_membership[k] == 1 && row.zu_membership[k + 1] == 0)
      zu_monotone = false;
  samples.push_back(std::move(row));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const StrataReport& r, std::ostream& os) {
  // stable diagnostic column set: union over rows, sorted
  std::set<std::string> diag_cols;
  size_t zu_levels = 0;
  int max_coord = 0;
  for (const auto& row : r.samples) {
    for (const auto& [k, v] : row.diagnostics) diag_cols.insert(k);
    zu_levels = std::max(zu_levels, row.zu_membership.size());
    max_coord = std::max(max_coord, static_cast<int>(row.coords.size()));
  }
  os << "label,targeted";
  for (int i = 0; i < max_coord; ++i) os << ",x" << i;
  for (size_t k = 0; k < zu_levels; ++k) os << ",zu" << k;
  for (const auto& c : diag_cols) os << "," << c;
  os << "\n";
  for (const auto& row : r.samples) {
    os << row.label << "," << (row.targeted ? 1 : 0);
    for (int i = 0; i < max_coord; ++i)
      os << "," << (i < row.coords.size() ? format_double(row.coords[i]) : "");
    for (size_t k = 0; k < zu_levels; ++k)
      os << ","
         << (k < row.zu_membership.size() ? std::to_string(row.zu_membership[k])
                                          : "");
    for (const auto& c : diag_cols) {
      auto it = row.diagnostics.find(c);
      os << ","
         << (it == row.diagnostics.end() ? "" : format_double(it->second));
    }
    os << "\n";
  }
}

}  // namespace cartan::report
