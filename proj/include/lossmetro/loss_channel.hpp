#pragma once

// Pure-loss channel L_eta on signal modes.
//
// Two routes are provided. The reduced route applies Kraus operators mode by
// mode to a density operator, optionally carrying analytic derivatives along
// (forward-mode differentiation). The purified route keeps the environment
// explicitly: the output is the family of unnormalized signal-ancilla vectors
// indexed by the environment photon-number pattern l,
//
//   |psi_l> = prod_m A_{l_m}(eta_{k(m)}) |psi>,
//   <n - l| A_l(eta) |n> = sqrt(C(n, l) eta^(n - l) (1 - eta)^l).
//
// Environment phases follow the all-positive amplitude convention above.

#include <string>
#include <vector>

#include "lossmetro/fock.hpp"
#include "lossmetro/kernels.hpp"
#include "lossmetro/tolerances.hpp"

namespace lossmetro {

enum class Parametrization { eta, phi };

std::string to_string(Parametrization p);
Parametrization parametrization_from_string(const std::string& name);

/// Transmittances eta_k in [0, 1] together with their angles phi_k in
/// [0, pi/2], cos(phi_k) = sqrt(eta_k). `native` records which of the two
/// the caller supplied.
class LossParams {
 public:
  LossParams() = default;
  static LossParams from_etas(std::vector<double> etas);
  static LossParams from_phis(std::vector<double> phis);

  std::size_t size() const noexcept { return etas_.size(); }
  double eta(std::size_t k) const { return etas_.at(k); }
  double phi(std::size_t k) const { return phis_.at(k); }
  const std::vector<double>& etas() const noexcept { return etas_; }
  const std::vector<double>& phis() const noexcept { return phis_; }
  Parametrization native() const noexcept { return native_; }
  /// Values in the given parametrization.
  const std::vector<double>& values(Parametrization p) const {
    return p == Parametrization::eta ? etas_ : phis_;
  }

  static double eta_to_phi(double eta);
  static double phi_to_eta(double phi);

  bool operator==(const LossParams&) const = default;

 private:
  std::vector<double> etas_;
  std::vector<double> phis_;
  Parametrization native_ = Parametrization::eta;
};

/// Maps the i-th signal mode of a layout (in layout order) to a loss
/// element. An empty assignment uses the element tags stored in the layout.
struct LossAssignment {
  std::vector<int> elements;
};

/// (mode index, element) for every signal mode; throws if the assignment
/// does not cover the signal modes or names an element without a parameter.
std::vector<std::pair<std::size_t, int>> resolve_assignment(const ModeLayout& layout,
                                                            const LossAssignment& assignment,
                                                            std::size_t parameter_count);

/// sqrt(C(n, l)) cos(phi)^(n - l) sin(phi)^l. Valid for any real angle, which
/// lets finite-difference stencils step slightly outside [0, pi/2].
kernels::LadderSet kraus_ladder(double phi, int cutoff);
kernels::LadderSet kraus_ladder_dphi(double phi, int cutoff);
/// d/deta of sqrt(C(n, l) eta^(n - l) (1 - eta)^l); requires 0 < eta < 1.
kernels::LadderSet kraus_ladder_deta(double eta, int cutoff);

/// Dense single-mode Kraus matrices A_0..A_cutoff.
std::vector<RealMatrix> kraus_ops(double eta, int cutoff);

DensityOperator apply_loss(const DensityOperator& rho, const LossParams& params,
                           const LossAssignment& assignment = {}, const Tolerances& tol = {});

/// Output state together with d(rho)/d(theta_k) for every element k, in the
/// requested parametrization.
struct LossOutput {
  Matrix rho;
  std::vector<Matrix> drho;  // indexed by element; zero for elements without modes
};

LossOutput evolve_with_derivatives(const Matrix& rho_in, const ModeLayout& layout,
                                   const LossParams& params, Parametrization parametrization,
                                   const LossAssignment& assignment = {});

/// Same as evolve_with_derivatives but taking raw angles (which may leave
/// [0, pi/2]); no derivatives.
Matrix evolve_angles(const Matrix& rho_in, const ModeLayout& layout, std::span<const double> phis,
                     const LossAssignment& assignment = {});

struct PurifiedComponent {
  std::vector<int> pattern;  // environment photon numbers, one per signal mode
  Vector state;              // unnormalized signal-ancilla vector
};

struct PurifiedOutput {
  ModeLayout layout;  // signal-ancilla layout of every component
  std::vector<PurifiedComponent> components;
  double dropped_mass = 0.0;  // norm^2 of patterns below the component tolerance

  /// Sum_l |psi_l><psi_l|.
  DensityOperator reduced(const Tolerances& tol = {}) const;
  /// Total norm^2, i.e. sum over l of <psi_l|psi_l>.
  double total_mass() const;
  /// Signal-ancilla-environment pure state with one environment mode per
  /// signal mode (cutoff equal to that signal mode's cutoff).
  PureState assembled() const;
};

PurifiedOutput purified_evolve(const PureState& probe, const LossParams& params,
                               const LossAssignment& assignment = {}, const Tolerances& tol = {});

/// Purified output together with d|psi_l>/d(theta_k) for every element k.
/// Components are aligned with derivative[k]; none are dropped.
struct PurifiedDerivative {
  PurifiedOutput value;
  std::vector<std::vector<Vector>> derivative;  // [element][component]
};

PurifiedDerivative purified_evolve_derivative(const PureState& probe, const LossParams& params,
                                              Parametrization parametrization,
                                              const LossAssignment& assignment = {});

/// Purified output at raw angles, all components retained. Used by the
/// fidelity stencils.
PurifiedOutput purified_evolve_angles(const PureState& probe, std::span<const double> phis,
                                      const LossAssignment& assignment = {});

}  // namespace lossmetro
