#include "lossmetro/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "lossmetro/errors.hpp"

namespace lossmetro {

using nlohmann::json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ok.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

LossParams LossConfig::params() const {
  return given == Parametrization::eta ? LossParams::from_etas(values) : LossParams::from_phis(values);
}

json tolerances_to_json(const Tolerances& t) {
  return {{"trunc", t.trunc}, {"hermitian", t.hermitian}, {"psd", t.psd},        {"rank", t.rank},
          {"component", t.component}, {"prob", t.prob},   {"fd_step", t.fd_step}};
}

Tolerances tolerances_from_json(const json& j) {
  only_keys(j, {"trunc", "hermitian", "psd", "rank", "component", "prob", "fd_step"}, "tolerances");
  Tolerances t;
  read(j, "trunc", t.trunc);
  read(j, "hermitian", t.hermitian);
  read(j, "psd", t.psd);
  read(j, "rank", t.rank);
  read(j, "component", t.component);
  read(j, "prob", t.prob);
  read(j, "fd_step", t.fd_step);
  for (double v : {t.trunc, t.hermitian, t.psd, t.rank, t.component, t.prob, t.fd_step})
    if (!(v >= 0.0)) throw ValidationError("tolerances must be >= 0");
  return t;
}

json probe_spec_to_json(const ProbeSpec& s) {
  json j = {{"kind", to_string(s.kind)},
            {"energies", s.energies},
            {"modes_per_element", s.modes_per_element},
            {"ancilla_policy", to_string(s.ancilla_policy)},
            {"force", s.force}};
  json dists = json::array();
  for (const auto& d : s.distributions) {
    json e = json::object();
    if (!d.total.empty()) e["total"] = d.total;
    if (!d.joint.empty()) {
      json rows = json::array();
      for (const auto& pw : d.joint) rows.push_back({{"pattern", pw.pattern}, {"p", pw.p}});
      e["joint"] = rows;
    }
    dists.push_back(e);
  }
  j["distributions"] = dists;
  j["cutoff"] = s.cutoff ? json(*s.cutoff) : json(nullptr);
  return j;
}

ProbeSpec probe_spec_from_json(const json& j) {
  only_keys(j, {"kind", "energies", "modes_per_element", "distributions", "cutoff", "ancilla_policy", "force"},
            "probe");
  ProbeSpec s;
  if (j.contains("kind")) s.kind = probe_kind_from_string(j.at("kind").get<std::string>());
  read(j, "energies", s.energies);
  read(j, "modes_per_element", s.modes_per_element);
  if (j.contains("distributions")) {
    for (const auto& d : j.at("distributions")) {
      only_keys(d, {"total", "joint"}, "probe.distributions[]");
      ElementDistribution e;
      read(d, "total", e.total);
      if (d.contains("joint"))
        for (const auto& row : d.at("joint")) {
          only_keys(row, {"pattern", "p"}, "probe.distributions[].joint[]");
          e.joint.push_back({row.at("pattern").get<std::vector<int>>(), row.at("p").get<double>()});
        }
      s.distributions.push_back(std::move(e));
    }
  }
  if (j.contains("cutoff") && !j.at("cutoff").is_null()) s.cutoff = j.at("cutoff").get<int>();
  if (j.contains("ancilla_policy"))
    s.ancilla_policy = ancilla_policy_from_string(j.at("ancilla_policy").get<std::string>());
  read(j, "force", s.force);
  return s;
}

ScenarioConfig config_from_json(const json& j) {
  try {
    only_keys(j,
              {"probe", "probe_state", "loss", "eta_prime", "parametrization", "measurement", "simulation",
               "tolerances", "seed", "output"},
              "config");
    ScenarioConfig c;
    if (j.contains("probe") && !j.at("probe").is_null()) c.probe = probe_spec_from_json(j.at("probe"));
    read(j, "probe_state", c.probe_state);
    if (j.contains("loss") && !j.at("loss").is_null()) {
      const json& l = j.at("loss");
      only_keys(l, {"etas", "phis", "assignment"}, "loss");
      if (l.contains("etas") == l.contains("phis"))
        throw ValidationError("loss must give exactly one of 'etas' and 'phis'");
      LossConfig lc;
      lc.given = l.contains("etas") ? Parametrization::eta : Parametrization::phi;
      lc.values = l.at(lc.given == Parametrization::eta ? "etas" : "phis").get<std::vector<double>>();
      read(l, "assignment", lc.assignment);
      lc.params();  // range check
      c.loss = std::move(lc);
    }
    read(j, "eta_prime", c.eta_prime);
    for (double e : c.eta_prime)
      if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("eta_prime entries must lie in [0, 1]");
    if (j.contains("parametrization"))
      c.parametrization = parametrization_from_string(j.at("parametrization").get<std::string>());
    if (j.contains("measurement"))
      c.measurement = measurement_kind_from_string(j.at("measurement").get<std::string>());
    if (j.contains("simulation")) {
      const json& s = j.at("simulation");
      only_keys(s, {"shots", "trials", "estimator", "grid_points", "grid_min", "grid_max", "refine_tol"},
                "simulation");
      read(s, "shots", c.simulation.shots);
      read(s, "trials", c.simulation.trials);
      if (s.contains("estimator")) c.simulation.estimator = estimator_from_string(s.at("estimator").get<std::string>());
      read(s, "grid_points", c.simulation.grid_points);
      read(s, "grid_min", c.simulation.grid_min);
      read(s, "grid_max", c.simulation.grid_max);
      read(s, "refine_tol", c.simulation.refine_tol);
      if (c.simulation.shots < 1 || c.simulation.trials < 1)
        throw ValidationError("simulation shots and trials must be >= 1");
    }
    if (j.contains("tolerances")) c.tolerances = tolerances_from_json(j.at("tolerances"));
    read(j, "seed", c.seed);
    if (j.contains("output")) {
      const json& o = j.at("output");
      only_keys(o, {"path", "format", "csv"}, "output");
      read(o, "path", c.output.path);
      read(o, "format", c.output.format);
      read(o, "csv", c.output.csv);
      if (c.output.format != "json" && c.output.format != "csv")
        throw ValidationError("output.format must be json or csv");
    }
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["probe"] = c.probe ? probe_spec_to_json(*c.probe) : json(nullptr);
  j["probe_state"] = c.probe_state;
  if (c.loss) {
    json l = {{c.loss->given == Parametrization::eta ? "etas" : "phis", c.loss->values},
              {"assignment", c.loss->assignment}};
    j["loss"] = l;
  } else {
    j["loss"] = nullptr;
  }
  j["eta_prime"] = c.eta_prime;
  j["parametrization"] = to_string(c.parametrization);
  j["measurement"] = to_string(c.measurement);
  j["simulation"] = {{"shots", c.simulation.shots},
                     {"trials", c.simulation.trials},
                     {"estimator", to_string(c.simulation.estimator)},
                     {"grid_points", c.simulation.grid_points},
                     {"grid_min", c.simulation.grid_min},
                     {"grid_max", c.simulation.grid_max},
                     {"refine_tol", c.simulation.refine_tol}};
  j["tolerances"] = tolerances_to_json(c.tolerances);
  j["seed"] = c.seed;
  j["output"] = {{"path", c.output.path}, {"format", c.output.format}, {"csv", c.output.csv}};
  return j;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace lossmetro
