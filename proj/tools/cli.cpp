#include "cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

#include "lossmetro/bures.hpp"
#include "lossmetro/config.hpp"
#include "lossmetro/errors.hpp"
#include "lossmetro/estimation.hpp"
#include "lossmetro/metrology.hpp"
#include "lossmetro/report_json.hpp"
#include "lossmetro/state_io.hpp"

namespace lossmetro {

namespace {

using nlohmann::json;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config_path, "Scenario config file (JSON)");
  if (needs_config) opt->required();
  cmd->add_option("--seed", c.seed, "Random seed (overrides the config)");
  cmd->add_option("--threads", c.threads, "OpenMP threads (default: all cores)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Write the report to this file instead of stdout");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

ScenarioConfig resolve(const Common& c) {
  ScenarioConfig cfg = c.config_path.empty() ? ScenarioConfig{} : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output.path = c.out;
  if (!c.format.empty()) cfg.output.format = c.format;
  return cfg;
}

LossParams require_loss(const ScenarioConfig& cfg) {
  if (!cfg.loss) throw ValidationError("config has no 'loss' section");
  return cfg.loss->params();
}

LossAssignment assignment_of(const ScenarioConfig& cfg) {
  return cfg.loss ? LossAssignment{cfg.loss->assignment} : LossAssignment{};
}

PureState dense_probe(const ScenarioConfig& cfg) {
  if (!cfg.probe_state.empty()) return load_state(cfg.probe_state);
  if (!cfg.probe) throw ValidationError("config has neither 'probe' nor 'probe_state'");
  return build_probe(*cfg.probe, cfg.tolerances);
}

void emit(const ScenarioConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.output.path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + cfg.output.path + "'");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void require_json(const ScenarioConfig& cfg, const char* cmd) {
  if (cfg.output.format != "json") throw ValidationError(std::string(cmd) + " only writes JSON");
}

std::string cmd_qfim(const ScenarioConfig& cfg, bool keep_slds) {
  require_json(cfg, "qfim");
  const LossParams params = require_loss(cfg);
  QfimOptions opt;
  opt.parametrization = cfg.parametrization;
  opt.tol = cfg.tolerances;
  opt.keep_slds = keep_slds;
  QfimReport r;
  if (cfg.probe_state.empty() && cfg.probe && !keep_slds && assignment_of(cfg).elements.empty()) {
    r = qfim(build_product_probe(*cfg.probe, cfg.tolerances), params, opt);
  } else {
    opt.assignment = assignment_of(cfg);
    r = qfim(dense_probe(cfg), params, opt);
  }
  return dump(to_json(r));
}

std::string cmd_fidelity(const ScenarioConfig& cfg) {
  require_json(cfg, "fidelity");
  const LossParams a = require_loss(cfg);
  if (cfg.eta_prime.size() != a.size())
    throw ValidationError("eta_prime must list one transmittance per loss element");
  const LossParams b = LossParams::from_etas(cfg.eta_prime);
  const PureState probe = dense_probe(cfg);
  const auto assign = assignment_of(cfg);
  const auto rho = DensityOperator::from_pure(probe);
  const double f = uhlmann_fidelity(apply_loss(rho, a, assign, cfg.tolerances),
                                    apply_loss(rho, b, assign, cfg.tolerances), cfg.tolerances);
  const double g = purified_fidelity(purified_evolve_angles(probe, a.phis(), assign),
                                     purified_evolve_angles(probe, b.phis(), assign));
  const json j = {{"method", "uhlmann"},
                  {"etas", a.etas()},
                  {"eta_prime", cfg.eta_prime},
                  {"fidelity", f},
                  {"purified_gram", g}};
  return dump(j);
}

std::string cmd_simulate(const ScenarioConfig& cfg) {
  if (!cfg.probe) throw ValidationError("simulate needs a 'probe' spec (product probes only)");
  SimScenario sc;
  sc.probe = *cfg.probe;
  sc.true_params = require_loss(cfg);
  sc.measurement = cfg.measurement;
  sc.shots = cfg.simulation.shots;
  sc.trials = cfg.simulation.trials;
  sc.seed = cfg.seed;
  sc.estimator = cfg.simulation.estimator;
  sc.grid_points = cfg.simulation.grid_points;
  sc.grid_min = cfg.simulation.grid_min;
  sc.grid_max = cfg.simulation.grid_max;
  sc.refine_tol = cfg.simulation.refine_tol;
  sc.tol = cfg.tolerances;
  const SimReport r = run_sim(sc);
  std::ostringstream csv;
  write_estimates_csv(csv, r);
  if (cfg.output.format == "csv") return csv.str();
  if (!cfg.output.csv.empty()) {
    std::ofstream f(cfg.output.csv, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + cfg.output.csv + "'");
    f << csv.str();
  }
  json j = to_json(r);
  j["seed"] = cfg.seed;
  j["shots"] = cfg.simulation.shots;
  j["measurement"] = to_string(cfg.measurement);
  j["estimator"] = to_string(cfg.simulation.estimator);
  return dump(j);
}

std::string cmd_outcomes(const ScenarioConfig& cfg, std::optional<std::uint64_t> shots) {
  const LossParams params = require_loss(cfg);
  const PureState probe = dense_probe(cfg);
  const auto out = apply_loss(DensityOperator::from_pure(probe), params, assignment_of(cfg), cfg.tolerances);
  const Povm povm = make_povm(cfg.measurement, probe, cfg.tolerances);
  Tolerances t = cfg.tolerances;
  t.trunc = std::max(t.trunc, out.trace_deficit() + 1e-12);
  const RealVector p = outcome_distribution(out, povm, t);
  std::vector<std::uint64_t> counts;
  if (shots) counts = sample(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), *shots, cfg.seed);
  if (cfg.output.format == "csv") {
    std::ostringstream os;
    write_outcome_csv(os, povm, p, counts);
    return os.str();
  }
  json rows = json::array();
  for (std::size_t x = 0; x < povm.size(); ++x) {
    json row = {{"label", povm.label(x)}, {"probability", p(static_cast<Eigen::Index>(x))}};
    if (!counts.empty()) row["count"] = counts[x];
    rows.push_back(row);
  }
  return dump({{"measurement", to_string(cfg.measurement)}, {"outcomes", rows}});
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loss estimation with signal-ancilla probes: Fisher information, fidelities, simulation.", "lossmetro"};
  app.require_subcommand(1);

  Common qc, fc, sc, dc, oc, ec;
  bool keep_slds = false;
  auto* qfim_cmd = app.add_subcommand("qfim", "Quantum Fisher information matrix of a probe");
  add_common(qfim_cmd, qc, true);
  qfim_cmd->add_flag("--keep-slds", keep_slds, "Include the SLD matrices in the report");

  auto* fid_cmd = app.add_subcommand("fidelity", "Output fidelity at loss and loss-prime");
  add_common(fid_cmd, fc, true);

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo maximum-likelihood estimation");
  add_common(sim_cmd, sc, true);

  bool binary = false;
  auto* dump_cmd = app.add_subcommand("probe-dump", "Build the configured probe and save its state");
  add_common(dump_cmd, dc, true);
  dump_cmd->add_flag("--binary", binary, "Write the binary state format (needs --out)");

  std::optional<std::uint64_t> shots;
  auto* out_cmd = app.add_subcommand("outcomes", "Outcome distribution of the configured measurement");
  add_common(out_cmd, oc, true);
  out_cmd->add_option("--shots", shots, "Also sample this many outcomes")->check(CLI::PositiveNumber);

  EcbQuery q;
  bool pipeline = false;
  auto* ecb_cmd = app.add_subcommand("ecb", "Energy-constrained Bures distance between loss channels");
  add_common(ecb_cmd, ec, false);
  ecb_cmd->add_option("--eta", q.eta, "Transmittance of the first channel")->required();
  ecb_cmd->add_option("--eta-prime", q.eta_prime, "Transmittance of the second channel")->required();
  ecb_cmd->add_option("--energy", q.energy, "Mean signal photon number")->required();
  ecb_cmd->add_option("--modes", q.modes, "Number of modes");
  ecb_cmd->add_option("--n-max", q.n_max, "Support cap of the brute-force search");
  ecb_cmd->add_flag("--pipeline", pipeline, "Also push the optimal probe through both channels");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const Common* common = nullptr;
    for (auto [cmd, c] : {std::pair{qfim_cmd, &qc}, {fid_cmd, &fc}, {sim_cmd, &sc}, {dump_cmd, &dc},
                          {out_cmd, &oc}, {ecb_cmd, &ec}})
      if (cmd->parsed()) common = c;
    if (common->threads) omp_set_num_threads(*common->threads);
    const ScenarioConfig cfg = resolve(*common);

    std::string text;
    if (qfim_cmd->parsed()) {
      text = cmd_qfim(cfg, keep_slds);
    } else if (fid_cmd->parsed()) {
      text = cmd_fidelity(cfg);
    } else if (sim_cmd->parsed()) {
      text = cmd_simulate(cfg);
    } else if (out_cmd->parsed()) {
      text = cmd_outcomes(cfg, shots);
    } else if (dump_cmd->parsed()) {
      const PureState probe = dense_probe(cfg);
      if (binary) {
        if (cfg.output.path.empty()) throw ValidationError("--binary needs --out");
        save_state(cfg.output.path, probe, true);
        return 0;
      }
      text = dump(state_to_json(probe));
    } else {
      require_json(cfg, "ecb");
      text = dump(to_json(ecb_report(q, pipeline, cfg.tolerances)));
    }
    emit(cfg, text, out);
    return 0;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace lossmetro
