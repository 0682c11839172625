#pragma once

#include <json.hpp>

#include "cartan/chart.hpp"
#include "cartan/forms.hpp"
#include "cartan/lie.hpp"
#include "cartan/report.hpp"
#include "cartan/tractor.hpp"

namespace cartan::io {

using nlohmann::json;

// Forms: {"kind": "symmetric"|"hermitian", "dim": n, "entries": row-major
// (re/im interleaved for hermitian)}.
json to_json(const forms::SymmetricForm& f);
json to_json(const forms::HermitianForm& f);
forms::AnyForm form_from_json(const json& j);

json to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);
json to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

// Algebra bases: {"tag": name, "matrix_dim": n, "elements": [row-major...]}.
json to_json(const lie::AlgebraBasis& basis);

// Paths: {"type": "polyline", "points": [[...], ...]} or
// {"type": "bezier", "control": [[p0], [p1], [p2], [p3]]}.
json to_json(const tractor::Path& path);
tractor::Path path_from_json(const json& j);

// Metric ansatz descriptors: {"name": "flat"|"round_sphere"|"poincare_ball"
// |"bump_perturbation"|"polynomial", ...parameters}.
chart::MetricAnsatz metric_from_json(const json& j, int dim,
                                     const Eigen::VectorXd& flat_diag);

json to_json(const report::StrataReport& r);

}  // namespace cartan::io
