#include <doctest.h>

#include <array>
#include <random>

#include "lossmetro/bures.hpp"
#include "lossmetro/errors.hpp"
#include "lossmetro/metrology.hpp"
#include "oracles.hpp"

using namespace lossmetro;

namespace {

double min_eig(const RealMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<RealMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

QfimOptions in(Parametrization p) {
  QfimOptions o;
  o.parametrization = p;
  return o;
}

PureState single_element_coherent(double n) { return coherent_element(n, 1, 0, std::nullopt, {}, false); }

}  // namespace

// ---------------------------------------------------------------------------
// Fidelity

TEST_CASE("Uhlmann fidelity basics") {
  std::mt19937_64 rng(1);
  const ModeLayout l({ModeSpec::signal(1, 0)});
  const DensityOperator zero = DensityOperator::from_pure(PureState::basis(l, std::vector<int>{0}));
  const DensityOperator one = DensityOperator::from_pure(PureState::basis(l, std::vector<int>{1}));
  CHECK(uhlmann_fidelity(zero, zero) == doctest::Approx(1.0));
  CHECK(uhlmann_fidelity(zero, one) == doctest::Approx(0.0));

  const ModeLayout big({ModeSpec::ancilla(2), ModeSpec::signal(2, 0)});
  for (int t = 0; t < 10; ++t) {
    const PureState a(big, oracle::random_vector(9, rng)), b(big, oracle::random_vector(9, rng));
    CHECK(uhlmann_fidelity(DensityOperator::from_pure(a), DensityOperator::from_pure(b)) ==
          doctest::Approx(std::abs(a.amplitudes().dot(b.amplitudes()))).epsilon(1e-10));
    const DensityOperator r(big, oracle::random_density(9, rng)), s(big, oracle::random_density(9, rng));
    const double f = uhlmann_fidelity(r, s);
    CHECK(std::abs(f - uhlmann_fidelity(s, r)) < 1e-10);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-12);
    CHECK(uhlmann_fidelity(r, r) == doctest::Approx(1.0).epsilon(1e-10));
  }

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  CHECK_THROWS_AS(uhlmann_fidelity(DensityOperator(l, bad), zero), ValidationError);
}

TEST_CASE("closed-form NDS fidelity") {
  const std::vector<double> same{0.3, 0.7};
  CHECK(nds_fidelity(same, 0.4, 0.4) == doctest::Approx(1.0));
  const std::vector<double> p1{0.0, 1.0};
  CHECK(nds_fidelity(p1, 1.0, 0.0) == doctest::Approx(0.0));
  // N = 1.5 split over {1, 2}; (eta, eta') = (1, 0.25) has mu = 0.5, so
  // F = 0.5 * 0.5 + 0.5 * 0.25.
  const std::vector<double> split{0.0, 0.5, 0.5};
  CHECK(nds_fidelity(split, 1.0, 0.25) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(nds_fidelity(split, 0.9, 0.5) ==
        doctest::Approx(0.5 * mu(0.9, 0.5) + 0.5 * mu(0.9, 0.5) * mu(0.9, 0.5)).epsilon(1e-12));
}

TEST_CASE("NDS output fidelity: reduced, purified and closed form agree") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 20; ++t) {
    const int modes = 1 + t % 3;
    const auto nds = oracle::random_nds(modes, 0, rng);
    for (auto [e1, e2] : std::array<std::pair<double, double>, 3>{{{0.9, 0.5}, {0.2, 0.3}, {0.05, 0.95}}}) {
      const auto a = LossParams::from_etas({e1});
      const auto b = LossParams::from_etas({e2});
      const auto rho = DensityOperator::from_pure(nds.probe);
      const double f = uhlmann_fidelity(apply_loss(rho, a), apply_loss(rho, b));
      const double closed = nds_fidelity(nds.total_distribution, e1, e2);
      CHECK(std::abs(f - closed) <= 1e-9);
      const auto pa = purified_evolve_angles(nds.probe, a.phis());
      const auto pb = purified_evolve_angles(nds.probe, b.phis());
      CHECK(std::abs(environment_overlap(pa, pb) - f) <= 1e-9);
      CHECK(std::abs(purified_fidelity(pa, pb) - f) <= 1e-9);
    }
  }
}

// ---------------------------------------------------------------------------
// SLD

TEST_CASE("SLD of a Bernoulli family") {
  const double eta = 0.3;
  Matrix rho = Matrix::Zero(2, 2), d = Matrix::Zero(2, 2);
  rho(0, 0) = 1 - eta;
  rho(1, 1) = eta;
  d(0, 0) = -1;
  d(1, 1) = 1;
  const Matrix l = sld(rho, d);
  CHECK(l(0, 0).real() == doctest::Approx(-1 / (1 - eta)));
  CHECK(l(1, 1).real() == doctest::Approx(1 / eta));
  CHECK(std::abs(l(0, 1)) < 1e-15);
}

TEST_CASE("SLD of a pure family is twice the derivative") {
  std::mt19937_64 rng(6);
  const Vector psi = oracle::random_vector(5, rng);
  Vector dpsi = oracle::random_vector(5, rng);
  dpsi -= psi * psi.dot(dpsi).real();  // keeps d<psi|psi> = 0
  const Matrix rho = psi * psi.adjoint();
  const Matrix d = dpsi * psi.adjoint() + psi * dpsi.adjoint();
  const Matrix l = sld(rho, d);
  CHECK((l - 2.0 * d).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(((rho * l + l * rho) / 2.0 - d).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("SLD edge cases") {
  const Matrix mixed = Matrix::Identity(2, 2) / 2.0;
  CHECK(sld(mixed, Matrix::Zero(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(sld(Matrix::Zero(2, 2), Matrix::Zero(2, 2)), NumericalError);
}

TEST_CASE("SLD satisfies the Lyapunov relation on the support of random states") {
  std::mt19937_64 rng(14);
  const ModeLayout l({ModeSpec::ancilla(1), ModeSpec::signal(2, 0)});
  for (int t = 0; t < 10; ++t) {
    const PureState psi(l, oracle::random_vector(6, rng));
    const auto out = evolve_with_derivatives(psi.amplitudes() * psi.amplitudes().adjoint(), l,
                                             LossParams::from_etas({0.45}), Parametrization::eta);
    const Matrix s = sld(out.rho, out.drho[0]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.rho);
    const Matrix residual = es.eigenvectors().adjoint() * ((out.rho * s + s * out.rho) / 2.0 - out.drho[0]) *
                            es.eigenvectors();
    const double lmax = es.eigenvalues().maxCoeff();
    double worst = 0.0;
    for (Eigen::Index a = 0; a < 6; ++a)
      for (Eigen::Index b = 0; b < 6; ++b)
        if (es.eigenvalues()(a) + es.eigenvalues()(b) > 1e-12 * lmax) worst = std::max(worst, std::abs(residual(a, b)));
    CHECK(worst < 1e-8);
  }
}

// ---------------------------------------------------------------------------
// QFIM

TEST_CASE("MP bound values") {
  const std::vector<double> one{1.0}, zero{0.0}, two{0.5, 2.5};
  CHECK(mp_bound(one)(0, 0) == 4.0);
  CHECK(mp_bound(zero)(0, 0) == 0.0);
  const auto b = mp_bound(two);
  CHECK(b(0, 0) == 2.0);
  CHECK(b(1, 1) == 10.0);
  CHECK(b(0, 1) == 0.0);
}

TEST_CASE("QFIM of a product NDS probe is 4 diag(N)") {
  ProbeSpec s;
  s.kind = ProbeKind::generic_nds;
  s.distributions = {{{0.5, 0.5}, {}}, {{0.0, 0.2, 0.3, 0.5}, {}}};
  const auto prod = build_product_probe(s);
  const auto params = LossParams::from_etas({0.3, 0.8});
  const auto r = qfim(prod.dense(), params, in(Parametrization::phi));
  CHECK(r.qfim(0, 0) == doctest::Approx(4 * 0.5).epsilon(1e-6));
  CHECK(r.qfim(1, 1) == doctest::Approx(4 * 2.3).epsilon(1e-6));
  CHECK(std::abs(r.qfim(0, 1)) < 1e-8);
  CHECK(r.bound_satisfied);
  const auto f = qfim(prod, params, in(Parametrization::phi));
  CHECK((f.qfim - r.qfim).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(f.energies[1] == doctest::Approx(2.3));
}

TEST_CASE("QFI in the eta parametrization for NDS and coherent probes") {
  const std::vector<PatternWeight> pats{{{0}, 0.2}, {{1}, 0.5}, {{2}, 0.3}};
  const auto nds = nds_element(pats, 1, 0, std::nullopt, AncillaPolicy::orthonormal_min, {}, false);
  const auto coh = single_element_coherent(1.0);
  for (double eta : {0.1, 0.5, 0.7, 0.9}) {
    const auto p = LossParams::from_etas({eta});
    CHECK(qfim(nds, p, in(Parametrization::eta)).qfim(0, 0) ==
          doctest::Approx(1.1 / (eta * (1 - eta))).epsilon(1e-6));
    CHECK(qfim(coh, p, in(Parametrization::eta)).qfim(0, 0) == doctest::Approx(1.0 / eta).epsilon(1e-6));
  }
  CHECK(qfim(coh, LossParams::from_etas({0.7}), in(Parametrization::eta)).qfim(0, 0) ==
        doctest::Approx(1.428571428571).epsilon(1e-6));
  CHECK_THROWS_AS(qfim(coh, LossParams::from_etas({1.0}), in(Parametrization::eta)), ValidationError);
}

TEST_CASE("report keeps SLDs on request and carries the bound into eta") {
  const auto psi = single_photon_element(1.0, 0, std::nullopt);
  auto o = in(Parametrization::eta);
  o.keep_slds = true;
  const auto r = qfim(psi, LossParams::from_etas({0.4}), o);
  REQUIRE(r.slds.size() == 1);
  CHECK(r.mp_bound(0, 0) == doctest::Approx(1.0 / (0.4 * 0.6)));
  CHECK(r.qfim(0, 0) == doctest::Approx(1.0 / (0.4 * 0.6)));
  CHECK(r.bound_satisfied);
}

TEST_CASE("vacuum probe carries no information") {
  ProbeSpec s;
  s.kind = ProbeKind::generic_nds;
  s.distributions = {{{1.0}, {}}};
  const auto r = qfim(build_product_probe(s), LossParams::from_etas({0.5}), in(Parametrization::phi));
  CHECK(r.qfim(0, 0) == 0.0);
  CHECK(r.bound_satisfied);
}

TEST_CASE("property: random probes respect the MP bound") {
  std::mt19937_64 rng(101);
  const ModeLayout l({ModeSpec::ancilla(4), ModeSpec::signal(4, 0), ModeSpec::signal(4, 1)});
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int t = 0; t < 100; ++t) {
    const PureState psi(l, oracle::random_vector(static_cast<Eigen::Index>(l.dimension()), rng));
    const auto r = qfim(psi, LossParams::from_etas({u(rng), u(rng)}), in(Parametrization::phi));
    CHECK(min_eig(mp_bound(energies(psi)) - r.qfim) >= -1e-8);
    CHECK(r.bound_satisfied);
    CHECK(min_eig(r.qfim) >= -1e-10);
  }
}

TEST_CASE("property: NDS probes saturate the bound") {
  std::mt19937_64 rng(202);
  for (int t = 0; t < 30; ++t) {
    const auto nds = oracle::random_nds(1 + t % 3, 0, rng);
    for (double eta : {0.1, 0.5, 0.9}) {
      const auto r = qfim(nds.probe, LossParams::from_etas({eta}), in(Parametrization::phi));
      CHECK(std::abs(r.qfim(0, 0) - 4 * nds.energy) <= 1e-6);
    }
  }
}

TEST_CASE("property: environment access does not help NDS probes") {
  std::mt19937_64 rng(303);
  for (int t = 0; t < 20; ++t) {
    const auto nds = oracle::random_nds(1 + t % 3, 0, rng);
    for (double eta : {0.1, 0.5, 0.9}) {
      const auto p = LossParams::from_etas({eta});
      const double reduced = qfim(nds.probe, p, in(Parametrization::phi)).qfim(0, 0);
      const double purified = purified_qfim(nds.probe, p, Parametrization::phi)(0, 0);
      CHECK(std::abs(reduced - purified) <= 1e-6);
      CHECK(purified == doctest::Approx(4 * nds.energy).epsilon(1e-9));
    }
  }
  // For a generic probe the environment can only add information, and the
  // purified QFIM equals 4 diag(N) exactly.
  const ModeLayout l({ModeSpec::ancilla(2), ModeSpec::signal(2, 0), ModeSpec::signal(2, 1)});
  for (int t = 0; t < 10; ++t) {
    const PureState psi(l, oracle::random_vector(27, rng));
    const auto p = LossParams::from_etas({0.4, 0.7});
    const RealMatrix kt = purified_qfim(psi, p, Parametrization::phi);
    CHECK((kt - mp_bound(energies(psi))).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(min_eig(kt - qfim(psi, p, in(Parametrization::phi)).qfim) >= -1e-8);
  }
}

TEST_CASE("property: Jacobian consistency between parametrizations") {
  std::mt19937_64 rng(404);
  const ModeLayout l({ModeSpec::ancilla(2), ModeSpec::signal(3, 0), ModeSpec::signal(2, 1)});
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int t = 0; t < 20; ++t) {
    const PureState psi(l, oracle::random_vector(static_cast<Eigen::Index>(l.dimension()), rng));
    const auto p = LossParams::from_etas({u(rng), u(rng)});
    const auto kphi = qfim(psi, p, in(Parametrization::phi)).qfim;
    const auto keta = qfim(psi, p, in(Parametrization::eta)).qfim;
    for (int k = 0; k < 2; ++k) {
      const double eta = p.eta(k);
      CHECK(std::abs(kphi(k, k) - 4 * eta * (1 - eta) * keta(k, k)) <= 1e-8);
    }
    CHECK((convert_fisher(kphi, p, Parametrization::phi, Parametrization::eta) - keta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((convert_fisher(keta, p, Parametrization::eta, Parametrization::phi) - kphi).cwiseAbs().maxCoeff() < 1e-8);
  }
}

// ---------------------------------------------------------------------------
// Fidelity-based QFI

TEST_CASE("QFI from the fidelity second derivative") {
  const auto psi = single_photon_element(1.5, 0, std::nullopt);
  for (double eta : {0.1, 0.5, 0.9}) {
    const auto r = qfi_from_fidelity(psi, LossParams::from_etas({eta}), 0);
    CHECK(std::abs(r.value - 6.0) <= 1e-4);
    CHECK_FALSE(r.flagged);
  }

  ProbeSpec vac;
  vac.kind = ProbeKind::generic_nds;
  vac.distributions = {{{1.0}, {}}};
  CHECK(std::abs(qfi_from_fidelity(build_probe(vac), LossParams::from_etas({0.5}), 0).value) < 1e-9);

  const auto coh = single_element_coherent(1.0);
  for (double eta : {0.3, 0.7}) {
    const auto p = LossParams::from_etas({eta});
    const double fd = qfi_from_fidelity(coh, p, 0).value;
    CHECK(std::abs(fd - 4 * (1 - eta)) <= 1e-4);
    CHECK(std::abs(fd - qfim(coh, p, in(Parametrization::phi)).qfim(0, 0)) <= 1e-4);
  }

  CHECK_THROWS_AS(qfi_from_fidelity(psi, LossParams::from_etas({0.5}), 0, 0.5), ValidationError);
  CHECK_THROWS_AS(qfi_from_fidelity(psi, LossParams::from_etas({0.5}), 1), ValidationError);
}

TEST_CASE("fidelity route agrees with the SLD route on random probes") {
  std::mt19937_64 rng(505);
  const ModeLayout l({ModeSpec::ancilla(2), ModeSpec::signal(2, 0)});
  for (int t = 0; t < 10; ++t) {
    const PureState psi(l, oracle::random_vector(9, rng));
    const auto p = LossParams::from_etas({0.55});
    const double sld_route = qfim(psi, p, in(Parametrization::phi)).qfim(0, 0);
    CHECK(std::abs(qfi_from_fidelity(psi, p, 0).value - sld_route) <= 1e-4);
  }
}

// ---------------------------------------------------------------------------
// Classical Fisher information

TEST_CASE("classical Fisher information") {
  const auto psi = single_photon_element(1.5, 0, std::nullopt);
  const auto rho = psi.amplitudes() * psi.amplitudes().adjoint();
  for (double eta : {0.1, 0.5, 0.9}) {
    const auto out = evolve_with_derivatives(rho, psi.layout(), LossParams::from_etas({eta}), Parametrization::eta);
    const double want = 1.5 / (eta * (1 - eta));
    CHECK(classical_fi(schmidt_povm(psi), out.rho, out.drho[0]) == doctest::Approx(want).epsilon(1e-6));
    CHECK(classical_fi(make_povm(MeasurementKind::on_off, psi), out.rho, out.drho[0]) ==
          doctest::Approx(want).epsilon(1e-6));
    // Bernoulli oracle: each photon is independently kept with probability eta.
    CHECK(want == doctest::Approx(1.5 * oracle::bernoulli_fi(eta, 1.0)));

    const Povm trivial(psi.layout().dimension(), {DiagonalEffect{RealVector::Ones(8)}}, {"all"});
    CHECK(std::abs(classical_fi(trivial, out.rho, out.drho[0])) < 1e-12);
  }
}

TEST_CASE("property: measurements never beat the QFI") {
  std::mt19937_64 rng(606);
  for (int t = 0; t < 15; ++t) {
    const auto nds = oracle::random_nds(1 + t % 3, 0, rng);
    const auto& psi = nds.probe;
    for (double eta : {0.1, 0.5, 0.9}) {
      const auto p = LossParams::from_etas({eta});
      const auto out = evolve_with_derivatives(psi.amplitudes() * psi.amplitudes().adjoint(), psi.layout(), p,
                                               Parametrization::eta);
      const double q = qfim(psi, p, in(Parametrization::eta)).qfim(0, 0);
      for (auto kind : {MeasurementKind::schmidt, MeasurementKind::on_off, MeasurementKind::photon_counting}) {
        const double j = classical_fi(make_povm(kind, psi), out.rho, out.drho[0]);
        CHECK(j <= q + 1e-6);
      }
      CHECK(classical_fi(schmidt_povm(psi), out.rho, out.drho[0]) == doctest::Approx(nds.energy / (eta * (1 - eta))).epsilon(1e-6));
    }
  }
  const ModeLayout l({ModeSpec::ancilla(2), ModeSpec::signal(3, 0)});
  for (int t = 0; t < 10; ++t) {
    const PureState psi(l, oracle::random_vector(12, rng));
    const auto p = LossParams::from_etas({0.35});
    const auto out = evolve_with_derivatives(psi.amplitudes() * psi.amplitudes().adjoint(), l, p, Parametrization::phi);
    const double q = qfim(psi, p, in(Parametrization::phi)).qfim(0, 0);
    for (auto kind : {MeasurementKind::on_off, MeasurementKind::photon_counting})
      CHECK(classical_fi(make_povm(kind, psi), out.rho, out.drho[0]) <= q + 1e-6);
  }
}

TEST_CASE("classical Fisher matrix of a product probe") {
  ProbeSpec s;
  s.kind = ProbeKind::single_photon;
  s.energies = {1.0, 2.0};
  const auto prod = build_product_probe(s);
  const auto p = LossParams::from_etas({0.3, 0.6});
  const auto j = classical_fim(prod, p, MeasurementKind::on_off, Parametrization::eta);
  CHECK(j(0, 0) == doctest::Approx(1.0 / (0.3 * 0.7)));
  CHECK(j(1, 1) == doctest::Approx(2.0 / (0.6 * 0.4)));
  CHECK(j(0, 1) == 0.0);
}
