#include "lossmetro/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lossmetro/bures.hpp"
#include "lossmetro/errors.hpp"

namespace lossmetro {

namespace {

// sqrt(rho) restricted to its support, as a d x r factor B with rho ~ B B^dagger.
Matrix sqrt_factor(const Matrix& m, const Tolerances& tol, const char* which) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const RealVector& lam = es.eigenvalues();
  const double lmax = lam.size() ? lam.maxCoeff() : 0.0;
  if (lam.size() && lam.minCoeff() < -tol.psd)
    throw ValidationError(std::string(which) + " is not positive semidefinite (eigenvalue " +
                          std::to_string(lam.minCoeff()) + ")");
  const double floor = tol.rank * lmax;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > floor && lam(i) > 0.0) keep.push_back(i);
  Matrix b(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    b.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(lam(keep[j]));
  return b;
}

double trace_norm(const Matrix& g) {
  if (g.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(g);
  return svd.singularValues().sum();
}

Matrix stack(const PurifiedOutput& out) {
  Matrix m(static_cast<Eigen::Index>(out.layout.dimension()), static_cast<Eigen::Index>(out.components.size()));
  for (std::size_t i = 0; i < out.components.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = out.components[i].state;
  return m;
}

double min_eigenvalue(const RealMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_eta_interior(const LossParams& params) {
  for (std::size_t k = 0; k < params.size(); ++k)
    if (!(params.eta(k) > 0.0 && params.eta(k) < 1.0))
      throw ValidationError("eta parametrization needs 0 < eta < 1 (element " + std::to_string(k) +
                            " has eta = " + std::to_string(params.eta(k)) + ")");
}

QfimReport finish_report(RealMatrix k, std::vector<double> energies, const LossParams& params,
                         const QfimOptions& options) {
  QfimReport r;
  r.parametrization = options.parametrization;
  r.theta = params.values(options.parametrization);
  r.qfim = std::move(k);
  r.energies = std::move(energies);
  r.mp_bound = convert_fisher(mp_bound(r.energies), params, Parametrization::phi, options.parametrization);
  r.bound_margin = min_eigenvalue(r.mp_bound - r.qfim);
  r.bound_satisfied = r.bound_margin >= -1e-8;
  r.tolerances = options.tol;
  return r;
}

}  // namespace

double uhlmann_fidelity(const DensityOperator& rho, const DensityOperator& sigma, const Tolerances& tol) {
  if (rho.layout().dimension() != sigma.layout().dimension())
    throw ValidationError("fidelity of states with different dimensions");
  const Matrix a = sqrt_factor(rho.matrix(), tol, "first state");
  const Matrix b = sqrt_factor(sigma.matrix(), tol, "second state");
  return trace_norm(a.adjoint() * b);
}

double nds_fidelity(std::span<const double> p, double eta, double eta_prime) {
  const double m = mu(eta, eta_prime);
  double f = 0.0, pw = 1.0;
  for (double pn : p) {
    f += pn * pw;
    pw *= m;
  }
  return f;
}

double purified_fidelity(const PurifiedOutput& a, const PurifiedOutput& b) {
  if (a.layout.dimension() != b.layout.dimension())
    throw ValidationError("purified outputs live on different spaces");
  if (a.components.empty() || b.components.empty()) return 0.0;
  return trace_norm(stack(a).adjoint() * stack(b));
}

double environment_overlap(const PurifiedOutput& a, const PurifiedOutput& b) {
  if (a.layout.dimension() != b.layout.dimension())
    throw ValidationError("purified outputs live on different spaces");
  std::map<std::vector<int>, const Vector*> index;
  for (const auto& c : b.components) index.emplace(c.pattern, &c.state);
  Complex s = 0.0;
  for (const auto& c : a.components) {
    auto it = index.find(c.pattern);
    if (it != index.end()) s += c.state.dot(*it->second);
  }
  return std::abs(s);
}

Matrix sld(const Matrix& rho, const Matrix& drho, double rank_tol) {
  if (rho.rows() != rho.cols() || drho.rows() != rho.rows() || drho.cols() != rho.cols())
    throw ValidationError("state and derivative dimensions differ");
  std::vector<Matrix> out;
  const Matrix d[] = {drho};
  qfim_from_derivatives(rho, d, rank_tol, &out);
  return out.front();
}

RealMatrix qfim_from_derivatives(const Matrix& rho, std::span<const Matrix> drho, double rank_tol,
                                 std::vector<Matrix>* slds) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const RealVector& lam = es.eigenvalues();
  const Matrix& u = es.eigenvectors();
  const Eigen::Index d = rho.rows();
  const double lmax = d ? lam.maxCoeff() : 0.0;
  if (!(lmax > 0.0)) throw NumericalError("state has no positive eigenvalue");
  const double thr = rank_tol * lmax;

  // Weight matrix 2 / (lambda_a + lambda_b) on retained pairs.
  RealMatrix w = RealMatrix::Zero(d, d);
  bool any = false;
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const double s = lam(a) + lam(b);
      if (s > thr) {
        w(a, b) = 2.0 / s;
        any = true;
      }
    }
  if (!any) throw NumericalError("degenerate family: no eigenvalue pair above the SLD rank tolerance");

  const auto n = static_cast<Eigen::Index>(drho.size());
  std::vector<Matrix> le(drho.size());
  for (std::size_t k = 0; k < drho.size(); ++k) {
    if (drho[k].rows() != d || drho[k].cols() != d) throw ValidationError("derivative dimension mismatch");
    le[k] = (u.adjoint() * drho[k] * u).cwiseProduct(w.cast<Complex>());
  }
  RealVector weight = lam.cwiseMax(0.0);
  RealMatrix k = RealMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const Matrix& li = le[static_cast<std::size_t>(i)];
      const Matrix& lj = le[static_cast<std::size_t>(j)];
      // Re Tr(rho L_i L_j) = sum_ab lambda_a Re(L_i[a,b] conj(L_j[a,b])).
      const double v = (weight.asDiagonal() * li.cwiseProduct(lj.conjugate())).real().sum();
      k(i, j) = v;
      k(j, i) = v;
    }
  if (slds) {
    slds->clear();
    for (const auto& l : le) slds->push_back(u * l * u.adjoint());
  }
  return k;
}

RealMatrix mp_bound(std::span<const double> energies) {
  RealMatrix b = RealMatrix::Zero(static_cast<Eigen::Index>(energies.size()),
                                  static_cast<Eigen::Index>(energies.size()));
  for (std::size_t k = 0; k < energies.size(); ++k) {
    if (!(energies[k] >= 0.0)) throw ValidationError("energies must be >= 0");
    b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 4.0 * energies[k];
  }
  return b;
}

RealMatrix convert_fisher(const RealMatrix& fisher, const LossParams& params, Parametrization from,
                          Parametrization to) {
  if (static_cast<std::size_t>(fisher.rows()) != params.size() || fisher.cols() != fisher.rows())
    throw ValidationError("Fisher matrix size does not match the parameter count");
  if (from == to) return fisher;
  RealVector jac(fisher.rows());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double eta = params.eta(k);
    const double s = std::sqrt(eta * (1.0 - eta));
    if (from == Parametrization::phi) {
      // d phi / d eta
      if (!(s > 0.0))
        throw ValidationError("eta parametrization is singular at eta = " + std::to_string(eta));
      jac(static_cast<Eigen::Index>(k)) = -0.5 / s;
    } else {
      jac(static_cast<Eigen::Index>(k)) = -2.0 * s;  // d eta / d phi
    }
  }
  return jac.asDiagonal() * fisher * jac.asDiagonal();
}

QfimReport qfim(const PureState& probe, const LossParams& params, const QfimOptions& options) {
  if (params.size() == 0) throw ValidationError("no loss parameters given");
  if (options.parametrization == Parametrization::eta) check_eta_interior(params);
  const Vector& psi = probe.amplitudes();
  const LossOutput out = evolve_with_derivatives(psi * psi.adjoint(), probe.layout(), params,
                                                 options.parametrization, options.assignment);
  std::vector<Matrix> slds;
  RealMatrix k = qfim_from_derivatives(out.rho, out.drho, options.tol.rank,
                                       options.keep_slds ? &slds : nullptr);
  std::vector<double> energies(params.size(), 0.0);
  const auto resolved = resolve_assignment(probe.layout(), options.assignment, params.size());
  const Vector& a = probe.amplitudes();
  for (const auto& [m, elem] : resolved)
    for (std::size_t i = 0; i < probe.layout().dimension(); ++i)
      energies[static_cast<std::size_t>(elem)] +=
          std::norm(a(static_cast<Eigen::Index>(i))) * probe.layout().occupation(i, m);
  auto report = finish_report(std::move(k), std::move(energies), params, options);
  report.slds = std::move(slds);
  return report;
}

QfimReport qfim(const ProductProbe& probe, const LossParams& params, const QfimOptions& options) {
  if (params.size() == 0) throw ValidationError("no loss parameters given");
  if (!options.assignment.elements.empty())
    throw ValidationError("product probes carry their own element tags; pass no assignment");
  if (options.parametrization == Parametrization::eta) check_eta_interior(params);
  const auto n = static_cast<Eigen::Index>(params.size());
  RealMatrix k = RealMatrix::Zero(n, n);
  std::vector<double> energies(params.size(), 0.0);
  QfimOptions factor_options = options;
  factor_options.keep_slds = false;
  for (const auto& factor : probe.factors) {
    const auto r = qfim(factor, params, factor_options);
    k += r.qfim;
    for (std::size_t e = 0; e < energies.size(); ++e) energies[e] += r.energies[e];
  }
  return finish_report(std::move(k), std::move(energies), params, options);
}

RealMatrix purified_qfim(const PureState& probe, const LossParams& params, Parametrization parametrization,
                         const LossAssignment& assignment) {
  if (parametrization == Parametrization::eta) check_eta_interior(params);
  const auto pd = purified_evolve_derivative(probe, params, parametrization, assignment);
  const auto n = static_cast<Eigen::Index>(params.size());
  const auto& comps = pd.value.components;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector& di = pd.derivative[static_cast<std::size_t>(i)][c];
      b(i) += comps[c].state.dot(di);
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) += di.dot(pd.derivative[static_cast<std::size_t>(j)][c]);
    }
  RealMatrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = 4.0 * (a(i, j) - std::conj(b(i)) * b(j)).real();
  return 0.5 * (k + k.transpose());
}

FidelityQfi qfi_from_fidelity(const PureState& probe, const LossParams& params, int element, double step,
                              const LossAssignment& assignment) {
  if (!(step >= 1e-5 && step <= 0.1))
    throw ValidationError("finite-difference step must lie in [1e-5, 0.1] radians");
  if (element < 0 || static_cast<std::size_t>(element) >= params.size())
    throw ValidationError("element index out of range");
  const auto& phis = params.phis();
  const PurifiedOutput base = purified_evolve_angles(probe, phis, assignment);
  const double f0 = purified_fidelity(base, base);
  auto fid = [&](double shift) {
    std::vector<double> p = phis;
    p[static_cast<std::size_t>(element)] += shift;
    return purified_fidelity(base, purified_evolve_angles(probe, p, assignment));
  };
  auto curvature = [&](double h) { return -4.0 * (fid(h) - 2.0 * f0 + fid(-h)) / (h * h); };
  FidelityQfi r;
  r.coarse = curvature(step);
  const double fine = curvature(0.5 * step);
  r.value = (4.0 * fine - r.coarse) / 3.0;
  r.flagged = std::abs(r.value - fine) > std::max(1e-4, 10.0 * step * step);
  return r;
}

double classical_fi(const Povm& povm, const Matrix& rho, const Matrix& drho, const Tolerances& tol) {
  const RealVector p = povm.expectations(rho);
  const RealVector dp = povm.expectations(drho);
  double fi = 0.0, res_p = 0.0, res_dp = 0.0;
  bool any = false;
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    if (p(x) > tol.prob) {
      fi += dp(x) * dp(x) / p(x);
      any = true;
    } else {
      res_p += std::max(p(x), 0.0);
      res_dp += dp(x);
    }
  }
  if (!any) throw NumericalError("every outcome probability is below the probability tolerance");
  if (res_p > tol.prob) fi += res_dp * res_dp / res_p;
  return fi;
}

RealMatrix classical_fim(const ProductProbe& probe, const LossParams& params, MeasurementKind kind,
                         Parametrization parametrization, const Tolerances& tol) {
  if (parametrization == Parametrization::eta) check_eta_interior(params);
  const auto n = static_cast<Eigen::Index>(params.size());
  RealMatrix j = RealMatrix::Zero(n, n);
  for (std::size_t f = 0; f < probe.factors.size(); ++f) {
    const auto& factor = probe.factors[f];
    const auto k = probe.factor_element.at(f);
    if (k < 0 || k >= n) throw ValidationError("probe factor element has no loss parameter");
    const Povm povm = make_povm(kind, factor, tol);
    const Vector& psi = factor.amplitudes();
    const auto out = evolve_with_derivatives(psi * psi.adjoint(), factor.layout(), params, parametrization);
    j(k, k) += classical_fi(povm, out.rho, out.drho[static_cast<std::size_t>(k)], tol);
  }
  return j;
}

}  // namespace lossmetro
