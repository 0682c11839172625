#include "cartan/json_io.hpp"

namespace cartan::io {

using Eigen::MatrixXd;
using Eigen::VectorXd;

json to_json(const forms::SymmetricForm& f) {
  json j;
  j["kind"] = "symmetric";
  j["dim"] = f.dim();
  std::vector<double> entries;
  for (int r = 0; r < f.dim(); ++r)
    for (int c = 0; c < f.dim(); ++c) entries.push_back(f.matrix()(r, c));
  j["entries"] = entries;
  return j;
}

json to_json(const forms::HermitianForm& f) {
  json j;
  j["kind"] = "hermitian";
  int n = f.complex_dim();
  j["dim"] = n;
  const MatrixXd& m = f.matrix();
  std::vector<double> entries;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      entries.push_back(m(r, c));          // Re H_rc
      entries.push_back(m(r + n, c));      // Im H_rc
    }
  j["entries"] = entries;
  return j;
}

forms::AnyForm form_from_json(const json& j) {
  std::string kind = j.at("kind");
  int n = j.at("dim");
  std::vector<double> entries = j.at("entries");
  if (kind == "symmetric") {
    if (static_cast<int>(entries.size()) != n * n)
      throw ConfigError("symmetric form: wrong entry count");
    MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = entries[r * n + c];
    return forms::SymmetricForm(m);
  }
  if (kind == "hermitian") {
    if (static_cast<int>(entries.size()) != 2 * n * n)
      throw ConfigError("hermitian form: wrong entry count");
    Eigen::MatrixXcd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        m(r, c) = {entries[2 * (r * n + c)], entries[2 * (r * n + c) + 1]};
    return forms::HermitianForm(m);
  }
  throw ConfigError("unknown form kind: " + kind);
}

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix: expected array");
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j[0].size());
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c];
  return m;
}

json to_json(const VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

VectorXd vector_from_json(const json& j) {
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i];
  return v;
}

json to_json(const lie::AlgebraBasis& basis) {
  json j;
  j["dim"] = basis.dim();
  j["matrix_dim"] = basis.matrix_dim();
  if (basis.dim() > 0) j["tag"] = basis[0].tag.name();
  json elems = json::array();
  for (const auto& e : basis.elements()) elems.push_back(to_json(e.m));
  j["elements"] = elems;
  return j;
}

json to_json(const tractor::Path& path) {
  // emit a polyline when every segment is straight, else a segment list
  bool all_lines = true;
  for (const auto& s : path.segments())
    if (s.cubic) all_lines = false;
  json j;
  if (all_lines) {
    j["type"] = "polyline";
    json pts = json::array();
    pts.push_back(to_json(path.segments().front().p0));
    for (const auto& s : path.segments()) pts.push_back(to_json(s.p1));
    j["points"] = pts;
    return j;
  }
  j["type"] = "segments";
  json segs = json::array();
  for (const auto& s : path.segments()) {
    json sj;
    sj["type"] = s.cubic ? "bezier" : "line";
    if (s.cubic)
      sj["control"] = {to_json(s.p0), to_json(s.p1), to_json(s.p2),
                       to_json(s.p3)};
    else
      sj["points"] = {to_json(s.p0), to_json(s.p1)};
    segs.push_back(sj);
  }
  j["segments"] = segs;
  return j;
}

tractor::Path path_from_json(const json& j) {
  std::string type = j.at("type");
  if (type == "polyline") {
    std::vector<VectorXd> pts;
    for (const auto& p : j.at("points")) pts.push_back(vector_from_json(p));
    return tractor::Path::polyline(pts);
  }
  if (type == "bezier") {
    const auto& c = j.at("control");
    if (c.size() != 4) throw ConfigError("bezier path needs 4 control points");
    return tractor::Path::cubic(vector_from_json(c[0]), vector_from_json(c[1]),
                                vector_from_json(c[2]), vector_from_json(c[3]));
  }
  throw ConfigError("unknown path type: " + type);
}

chart::MetricAnsatz metric_from_json(const json& j, int dim,
                                     const VectorXd& flat_diag) {
  std::string name = j.at("name");
  if (name == "flat") return chart::FlatMetric{flat_diag};
  if (name == "round_sphere") return chart::RoundSphereMetric{dim};
  if (name == "poincare_ball") return chart::PoincareBallMetric{dim};
  if (name == "bump_perturbation") {
    chart::BumpMetric b;
    b.diag = flat_diag;
    b.eps = j.value("eps", 0.4);
    b.width = j.value("width", 1.2);
    b.center = j.contains("center") ? vector_from_json(j.at("center"))
                                    : VectorXd::Zero(dim);
    if (j.contains("mix"))
      b.mix = matrix_from_json(j.at("mix"));
    else
      throw ConfigError("bump_perturbation needs a mix matrix or a seed");
    return b;
  }
  if (name == "polynomial") {
    chart::PolynomialMetric p;
    p.dim = dim;
    for (const auto& t : j.at("terms")) {
      chart::PolynomialMetric::Monomial m;
      m.row = t.at("row");
      m.col = t.at("col");
      m.coeff = t.at("coeff");
      m.exponents = t.at("exponents").get<std::vector<int>>();
      if (static_cast<int>(m.exponents.size()) != dim)
        throw ConfigError("polynomial term exponent count mismatch");
      p.terms.push_back(std::move(m));
    }
    return p;
  }
  throw ConfigError("unknown metric ansatz: " + name);
}

json to_json(const report::StrataReport& r) {
  json j;
  json counts = json::object();
  for (const auto& [label, c] : r.random_counts) counts[label] = c;
  j["random_counts"] = counts;
  j["observed_labels"] = r.observed_labels;
  json geo = json::object();
  for (const auto& [label, g] : r.stratum_geometry) geo[label] = g;
  j["stratum_geometry"] = geo;
  j["zu_monotone"] = r.zu_monotone;
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  j["n_samples"] = r.samples.size();
  return j;
}

}  // namespace cartan::io
