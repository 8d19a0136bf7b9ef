#pragma once

// Fidelities, symmetric logarithmic derivatives, quantum and classical Fisher
// information for loss estimation.
//
// The reduced-route QFIM uses analytic derivatives of the Kraus operators.
// qfi_from_fidelity() is an independent cross-check: a finite-difference
// second derivative of the output fidelity, with the fidelity taken as the
// trace norm of the Gram matrix of the purified components.

#include <span>
#include <string>
#include <vector>

#include "lossmetro/fock.hpp"
#include "lossmetro/loss_channel.hpp"
#include "lossmetro/measurements.hpp"
#include "lossmetro/probe.hpp"
#include "lossmetro/tolerances.hpp"

namespace lossmetro {

/// Tr sqrt(sqrt(rho) sigma sqrt(rho)). Eigenvalues below tol.rank * lambda_max
/// are treated as zero; throws ValidationError for eigenvalues below
/// -tol.psd or mismatched layouts.
double uhlmann_fidelity(const DensityOperator& rho, const DensityOperator& sigma,
                        const Tolerances& tol = {});

/// sum_n p_n mu^n with mu = sqrt(eta eta') + sqrt((1 - eta)(1 - eta')).
double nds_fidelity(std::span<const double> p, double eta, double eta_prime);

/// Uhlmann fidelity of the reduced outputs of two purified families: the
/// trace norm of the Gram matrix G_ll' = <psi_l|psi'_l'>.
double purified_fidelity(const PurifiedOutput& a, const PurifiedOutput& b);

/// |<Psi|Psi'>| with the environment kept: sum_l <psi_l|psi'_l> over matching
/// patterns.
double environment_overlap(const PurifiedOutput& a, const PurifiedOutput& b);

/// SLD on the support of rho (pairs with lambda_i + lambda_j above
/// rank_tol * lambda_max). Throws NumericalError when no pair is retained.
Matrix sld(const Matrix& rho, const Matrix& drho, double rank_tol = 1e-12);

/// K_ij = Re Tr(rho L_i L_j) for the given derivatives. Optionally returns
/// the SLDs in the computational basis.
RealMatrix qfim_from_derivatives(const Matrix& rho, std::span<const Matrix> drho,
                                 double rank_tol = 1e-12, std::vector<Matrix>* slds = nullptr);

/// 4 diag(N).
RealMatrix mp_bound(std::span<const double> energies);

/// Re-expresses a Fisher matrix given in `from` in the parametrization `to`.
/// Throws ValidationError at eta in {0, 1} when a Jacobian is singular.
RealMatrix convert_fisher(const RealMatrix& fisher, const LossParams& params, Parametrization from,
                          Parametrization to);

struct QfimReport {
  Parametrization parametrization = Parametrization::phi;
  std::vector<double> theta;
  RealMatrix qfim;
  std::vector<Matrix> slds;  // empty unless retained
  std::vector<double> energies;
  /// 4 diag(N) carried into the report's parametrization.
  RealMatrix mp_bound;
  /// Smallest eigenvalue of mp_bound - qfim.
  double bound_margin = 0.0;
  bool bound_satisfied = false;
  Tolerances tolerances;
};

struct QfimOptions {
  Parametrization parametrization = Parametrization::phi;
  LossAssignment assignment;
  Tolerances tol;
  bool keep_slds = false;
};

QfimReport qfim(const PureState& probe, const LossParams& params, const QfimOptions& options = {});

/// Sum of the per-factor QFIMs of a product probe. SLDs are never retained.
QfimReport qfim(const ProductProbe& probe, const LossParams& params, const QfimOptions& options = {});

/// QFIM with access to the environment, 4 Re(<d_i Psi|d_j Psi> -
/// <d_i Psi|Psi><Psi|d_j Psi>), from the purified route.
RealMatrix purified_qfim(const PureState& probe, const LossParams& params,
                         Parametrization parametrization, const LossAssignment& assignment = {});

struct FidelityQfi {
  double value = 0.0;   // Richardson-extrapolated
  double coarse = 0.0;  // plain central difference at the full step
  bool flagged = false; // coarse and refined estimates disagree beyond max(1e-4, 10 step^2)
};

/// -4 d^2 F(rho_phi, rho_phi') / d phi'^2 at phi' = phi for the loss angle of
/// `element`, by central differences at `step` and step/2 with Richardson
/// extrapolation. Always in the phi parametrization.
FidelityQfi qfi_from_fidelity(const PureState& probe, const LossParams& params, int element,
                              double step = 1e-3, const LossAssignment& assignment = {});

/// sum_x (Tr(drho E_x))^2 / p_x. Outcomes with p_x <= tol.prob are merged
/// into one residual outcome. Throws NumericalError if every outcome is
/// below tol.prob.
double classical_fi(const Povm& povm, const Matrix& rho, const Matrix& drho, const Tolerances& tol = {});

/// Diagonal classical Fisher matrix of a product probe measured factor by
/// factor with `kind`.
RealMatrix classical_fim(const ProductProbe& probe, const LossParams& params, MeasurementKind kind,
                         Parametrization parametrization, const Tolerances& tol = {});

}  // namespace lossmetro
