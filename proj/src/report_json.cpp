#include "lossmetro/report_json.hpp"

#include <cmath>

namespace lossmetro {

using nlohmann::json;

json number_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const RealVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_json(v(i)));
  return a;
}

json vector_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const QfimReport& r) {
  json j = {{"parametrization", to_string(r.parametrization)},
            {"theta", vector_json(r.theta)},
            {"qfim", matrix_json(r.qfim)},
            {"energies", vector_json(r.energies)},
            {"mp_bound", matrix_json(r.mp_bound)},
            {"bound_margin", number_json(r.bound_margin)},
            {"bound_satisfied", r.bound_satisfied},
            {"tolerances",
             {{"trunc", r.tolerances.trunc},
              {"hermitian", r.tolerances.hermitian},
              {"psd", r.tolerances.psd},
              {"rank", r.tolerances.rank},
              {"component", r.tolerances.component},
              {"prob", r.tolerances.prob},
              {"fd_step", r.tolerances.fd_step}}}};
  if (!r.slds.empty()) {
    json slds = json::array();
    for (const auto& l : r.slds) slds.push_back({{"re", matrix_json(l.real())}, {"im", matrix_json(l.imag())}});
    j["slds"] = slds;
  }
  return j;
}

json to_json(const SimReport& r, bool include_counts) {
  json j = {{"true_etas", vector_json(r.true_etas)},
            {"trials", r.estimates.rows()},
            {"mean", vector_json(r.mean)},
            {"bias", vector_json(r.bias)},
            {"covariance", matrix_json(r.covariance)},
            {"qfim", matrix_json(r.qfim)},
            {"cfim", matrix_json(r.cfim)},
            {"crb", matrix_json(r.crb)},
            {"efficiency", vector_json(r.efficiency)},
            {"boundary_hits", r.boundary_hits}};
  if (include_counts) j["counts"] = r.counts;
  return j;
}

EcbReport ecb_report(const EcbQuery& query, bool with_pipeline, const Tolerances& tol) {
  EcbReport r;
  r.query = query;
  r.mu = mu(query.eta, query.eta_prime);
  r.closed_form = min_fidelity_closed(query.energy, r.mu);
  r.oracle = min_fidelity_bruteforce(query);
  r.distance = ecb_distance(query);
  if (with_pipeline) r.pipeline = ecb_pipeline_fidelity(query, tol);
  return r;
}

json to_json(const EcbReport& r) {
  const int n_max = r.query.n_max > 0 ? r.query.n_max : 10 * static_cast<int>(std::ceil(r.query.energy)) + 10;
  json j = {{"query",
             {{"eta", r.query.eta},
              {"eta_prime", r.query.eta_prime},
              {"energy", r.query.energy},
              {"modes", r.query.modes},
              {"n_max", n_max}}},
            {"mu", r.mu},
            {"closed_form", r.closed_form},
            {"oracle", r.oracle.value},
            {"argmin_support", r.oracle.support},
            {"argmin_weights", r.oracle.weights},
            {"distance", r.distance}};
  j["pipeline"] = r.pipeline ? json(*r.pipeline) : json(nullptr);
  return j;
}

}  // namespace lossmetro
