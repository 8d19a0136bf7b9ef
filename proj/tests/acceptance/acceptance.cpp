// Acceptance run: eight end-to-end criteria, one PASS/FAIL line each.
//
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only
//
// Exit status is 0 when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lossmetro/bures.hpp"
#include "lossmetro/estimation.hpp"
#include "lossmetro/loss_channel.hpp"
#include "lossmetro/measurements.hpp"
#include "lossmetro/metrology.hpp"
#include "lossmetro/probe.hpp"
#include "oracles.hpp"

using namespace lossmetro;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream detail;

  Result() { detail.precision(10); }

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

QfimOptions in(Parametrization p) {
  QfimOptions o;
  o.parametrization = p;
  return o;
}

struct NamedProbe {
  std::string name;
  PureState psi;
  double energy;
};

std::vector<NamedProbe> saturation_probes() {
  const std::vector<PatternWeight> pats{{{0}, 0.2}, {{1}, 0.5}, {{2}, 0.3}};
  return {
      {"single-photon", single_photon_element(1.0, 0, std::nullopt), 1.0},
      {"fractional-single-photon", single_photon_element(1.5, 0, std::nullopt), 1.5},
      {"tmsv", tmsv_copy(1.0, 0, 25, {}), 1.0},
      {"nds(0.2,0.5,0.3)", nds_element(pats, 1, 0, std::nullopt, AncillaPolicy::orthonormal_min, {}, false), 1.1},
  };
}

const std::vector<double> kEtas{0.1, 0.5, 0.9};

Result criterion1() {
  Result r;
  double worst_sld = 0.0, worst_fid = 0.0;
  for (const auto& p : saturation_probes())
    for (double eta : kEtas) {
      const auto params = LossParams::from_etas({eta});
      const double k = qfim(p.psi, params, in(Parametrization::phi)).qfim(0, 0);
      const double f = qfi_from_fidelity(p.psi, params, 0).value;
      worst_sld = std::max(worst_sld, std::abs(k - 4 * p.energy));
      worst_fid = std::max(worst_fid, std::abs(f - 4 * p.energy));
    }
  r.detail << "max |K_sld - 4N| = " << worst_sld << ", max |K_fid - 4N| = " << worst_fid;
  r.require(worst_sld <= 1e-6, "SLD QFI within 1e-6");
  r.require(worst_fid <= 1e-4, "fidelity QFI within 1e-4");
  return r;
}

Result criterion2() {
  Result r;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const ModeLayout l({ModeSpec::ancilla(4), ModeSpec::signal(4, 0), ModeSpec::signal(4, 1)});
  double worst = 1e300;
  for (int t = 0; t < 100; ++t) {
    const PureState psi(l, oracle::random_vector(static_cast<Eigen::Index>(l.dimension()), rng));
    const RealMatrix k = qfim(psi, LossParams::from_etas({u(rng), u(rng)}), in(Parametrization::phi)).qfim;
    const RealMatrix gap = mp_bound(energies(psi)) - k;
    worst = std::min(worst, Eigen::SelfAdjointEigenSolver<RealMatrix>(gap).eigenvalues().minCoeff());
  }
  r.detail << "100 probes, min eig(4 diag(N) - K) = " << worst;
  r.require(worst >= -1e-8, "bound gap >= -1e-8");
  return r;
}

Result criterion3() {
  Result r;
  ProbeSpec s;
  s.kind = ProbeKind::generic_nds;
  s.distributions = {{{0.5, 0.5}, {}}, {{0.25, 0.0, 0.25, 0.5}, {}}};
  const PureState psi = build_probe(s);
  const RealMatrix k = qfim(psi, LossParams::from_etas({0.3, 0.8}), in(Parametrization::phi)).qfim;
  const double diag_err = std::max(std::abs(k(0, 0) - 2.0), std::abs(k(1, 1) - 8.0));
  const double off = std::max(std::abs(k(0, 1)), std::abs(k(1, 0)));
  r.detail << "K = [[" << k(0, 0) << ", " << k(0, 1) << "], [" << k(1, 0) << ", " << k(1, 1) << "]]";
  r.require(diag_err <= 1e-6, "diagonal within 1e-6");
  r.require(off < 1e-8, "off-diagonal below 1e-8");
  return r;
}

double cfi_of(const Povm& povm, const PureState& psi, const LossParams& p) {
  const auto out =
      evolve_with_derivatives(psi.amplitudes() * psi.amplitudes().adjoint(), psi.layout(), p, Parametrization::eta);
  return classical_fi(povm, out.rho, out.drho[0]);
}

Result criterion4() {
  Result r;
  double worst_schmidt = 0.0;
  for (const auto& p : saturation_probes()) {
    const Povm povm = schmidt_povm(p.psi);
    for (double eta : kEtas) {
      const auto params = LossParams::from_etas({eta});
      const double q = qfim(p.psi, params, in(Parametrization::eta)).qfim(0, 0);
      worst_schmidt = std::max(worst_schmidt, std::abs(cfi_of(povm, p.psi, params) - q));
    }
  }
  const PureState frac = single_photon_element(1.5, 0, std::nullopt);
  const Povm onoff = make_povm(MeasurementKind::on_off, frac);
  double worst_onoff = 0.0;
  for (double eta : kEtas) {
    const auto params = LossParams::from_etas({eta});
    const double q = qfim(frac, params, in(Parametrization::eta)).qfim(0, 0);
    worst_onoff = std::max(worst_onoff, std::abs(cfi_of(onoff, frac, params) - q));
  }

  // Twenty TMSV copies sharing N = 0.5; Fisher information adds over copies.
  ProbeSpec t;
  t.kind = ProbeKind::tmsv;
  t.energies = {0.5};
  t.modes_per_element = {20};
  const ProductProbe copies = build_product_probe(t);
  double worst_ratio = 1.0;
  std::ostringstream ratios;
  for (double eta : kEtas) {
    const auto params = LossParams::from_etas({eta});
    const double q = qfim(copies, params, in(Parametrization::eta)).qfim(0, 0);
    const double j = classical_fim(copies, params, MeasurementKind::on_off, Parametrization::eta)(0, 0);
    worst_ratio = std::min(worst_ratio, j / q);
    ratios << " " << eta << ":" << j / q;
  }
  r.detail << "max |J_schmidt - K| = " << worst_schmidt << ", max |J_onoff - K| (fractional probe) = " << worst_onoff
           << ", 20-copy TMSV on-off J/K at eta" << ratios.str();
  r.require(worst_schmidt <= 1e-6, "Schmidt CFI within 1e-6");
  r.require(worst_onoff <= 1e-6, "on-off CFI within 1e-6");
  r.require(worst_ratio >= 0.99, "TMSV on-off ratio >= 0.99");
  return r;
}

Result criterion5() {
  Result r;
  // The default truncation (tail <= 1e-8) leaves ~2e-7 in K_eta, which the
  // ratio amplifies by 1 / (1 - eta); cutoff 20 puts the tail below 1e-19.
  const PureState coh = coherent_element(1.0, 1, 0, 20, {}, false);
  const double k = qfim(coh, LossParams::from_etas({0.7}), in(Parametrization::eta)).qfim(0, 0);
  const PureState nds = single_photon_element(1.0, 0, std::nullopt);
  double worst_ratio = 0.0;
  for (double eta : {0.1, 0.5, 0.7, 0.9}) {
    const auto p = LossParams::from_etas({eta});
    const double ratio = qfim(nds, p, in(Parametrization::eta)).qfim(0, 0) /
                         qfim(coh, p, in(Parametrization::eta)).qfim(0, 0);
    worst_ratio = std::max(worst_ratio, std::abs(ratio - 1 / (1 - eta)));
  }
  r.detail << "coherent K_eta(N=1, eta=0.7) = " << k << ", max |ratio - 1/(1-eta)| = " << worst_ratio;
  r.require(std::abs(k - 1 / 0.7) <= 1e-6, "coherent QFI within 1e-6");
  r.require(worst_ratio <= 1e-6, "NDS/coherent ratio within 1e-6");
  return r;
}

Result criterion6() {
  Result r;
  double worst_grid = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (double n : {0.3, 1.0, 1.5, 2.7, 5.0}) {
        EcbQuery q;
        q.eta = 0.05 + 0.1 * i;
        q.eta_prime = 0.05 + 0.1 * j;
        q.energy = n;
        const double closed = min_fidelity_closed(n, mu(q.eta, q.eta_prime));
        worst_grid = std::max(worst_grid, std::abs(min_fidelity_bruteforce(q).value - closed));
      }
  double worst_pipe = 0.0;
  for (double n : {0.3, 1.5, 2.7})
    for (auto [a, b] : {std::pair{0.9, 0.5}, std::pair{0.25, 0.65}, std::pair{0.05, 0.95}})
      for (int m : {1, 2, 4}) {
        EcbQuery q;
        q.eta = a;
        q.eta_prime = b;
        q.energy = n;
        q.modes = m;
        worst_pipe = std::max(worst_pipe, std::abs(ecb_pipeline_fidelity(q) - min_fidelity_closed(n, mu(a, b))));
      }
  r.detail << "grid max |closed - oracle| = " << worst_grid << ", pipeline max error (M = 1, 2, 4) = " << worst_pipe;
  r.require(worst_grid <= 1e-9, "oracle within 1e-9");
  r.require(worst_pipe <= 1e-9, "pipeline within 1e-9");
  return r;
}

Result criterion7() {
  Result r;
  SimScenario sc;
  sc.probe.kind = ProbeKind::single_photon;
  sc.probe.energies = {1.0};
  sc.true_params = LossParams::from_etas({0.5});
  sc.measurement = MeasurementKind::on_off;
  sc.shots = 10000;
  sc.trials = 200;
  sc.seed = 1;
  const SimReport rep = run_sim(sc);
  const double eff = rep.efficiency(0);
  const double floor = (1 - 3 / std::sqrt(200.0)) * rep.crb(0, 0);
  r.detail << "efficiency = " << eff << ", variance = " << rep.covariance(0, 0) << ", CRB = " << rep.crb(0, 0)
           << ", bias = " << rep.bias(0);
  r.require(eff >= 0.9 && eff <= 1.1, "efficiency in [0.9, 1.1]");
  r.require(rep.covariance(0, 0) >= floor, "variance >= (1 - 3/sqrt(trials)) CRB");
  return r;
}

Result criterion8() {
  Result r;
  double completeness = 0.0;
  for (double eta : {0.0, 0.13, 0.5, 0.87, 1.0}) {
    const auto ops = kraus_ops(eta, 20);
    RealMatrix sum = RealMatrix::Zero(21, 21);
    for (const auto& a : ops) sum += a.transpose() * a;
    completeness = std::max(completeness, (sum - RealMatrix::Identity(21, 21)).cwiseAbs().maxCoeff());
  }

  std::mt19937_64 rng(8);
  const ModeLayout l({ModeSpec::ancilla(2), ModeSpec::signal(4, 0), ModeSpec::signal(3, 1)});
  const DensityOperator rho(l, oracle::random_density(static_cast<Eigen::Index>(l.dimension()), rng));
  const auto twice = apply_loss(apply_loss(rho, LossParams::from_etas({0.6, 0.9})), LossParams::from_etas({0.5, 0.3}));
  const auto once = apply_loss(rho, LossParams::from_etas({0.3, 0.27}));
  const double semigroup = (twice.matrix() - once.matrix()).cwiseAbs().maxCoeff();

  const PureState psi(l, oracle::random_vector(static_cast<Eigen::Index>(l.dimension()), rng));
  const auto params = LossParams::from_etas({0.45, 0.7});
  const PureState full = purified_evolve(psi, params).assembled();
  const auto env = full.layout().modes_with_role(ModeRole::environment);
  const double purification =
      (partial_trace(full, env).matrix() - apply_loss(DensityOperator::from_pure(psi), params).matrix())
          .cwiseAbs()
          .maxCoeff();

  const int c = 30;
  auto coherent = [c](double alpha) {
    Vector v(c + 1);
    double fact = 1.0;
    for (int n = 0; n <= c; ++n) {
      if (n > 0) fact *= n;
      v(n) = std::exp(-alpha * alpha / 2) * std::pow(alpha, n) / std::sqrt(fact);
    }
    return v.normalized();
  };
  const ModeLayout one({ModeSpec::signal(c, 0)});
  const double eta = 0.6;
  const auto out = apply_loss(DensityOperator::from_pure(PureState(one, coherent(1.0))), LossParams::from_etas({eta}));
  const double fid = uhlmann_fidelity(out, DensityOperator::from_pure(PureState(one, coherent(std::sqrt(eta)))));

  r.detail << "Kraus completeness = " << completeness << ", semigroup = " << semigroup
           << ", purification = " << purification << ", coherent fidelity deficit = " << 1 - fid;
  r.require(completeness < 1e-10, "completeness < 1e-10");
  r.require(semigroup < 1e-10, "semigroup < 1e-10");
  r.require(purification < 1e-12, "purification < 1e-12");
  r.require(fid >= 1 - 1e-8, "coherent fidelity >= 1 - 1e-8");
  return r;
}

struct Criterion {
  const char* name;
  double budget_s;  // <= 0: no runtime limit
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"NDS saturation", 10.0, criterion1},   {"MP bound", 60.0, criterion2},
      {"multiparameter QFIM", 0.0, criterion3}, {"measurement attainment", 0.0, criterion4},
      {"coherent comparison", 0.0, criterion5}, {"ECB exactness", 30.0, criterion6},
      {"QCRB attainment", 60.0, criterion7},  {"channel correctness", 0.0, criterion8},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
      return 2;
    }
  }
  if (selected.empty())
    for (int i = 1; i <= 8; ++i) selected.push_back(i);

  bool ok = true;
  for (int id : selected) {
    if (id < 1 || id > 8) {
      std::fprintf(stderr, "no criterion %d\n", id);
      return 2;
    }
    const auto& c = all[static_cast<std::size_t>(id - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Result res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) res.require(secs < c.budget_s, "runtime budget");
    std::printf("criterion %d (%s): %s  %s  [%.2f s]\n", id, c.name, res.pass ? "PASS" : "FAIL",
                res.detail.str().c_str(), secs);
    ok = ok && res.pass;
  }
  return ok ? 0 : 1;
}
