#pragma once

// Truncated multimode Fock space: mode layouts, pure states, density
// operators, and the structural operations on them (tensor products, partial
// traces, Schmidt decomposition).
//
// Basis ordering is lexicographic over the mode occupations with mode 0 the
// most significant digit. Modes are stored ancilla first, then signal modes
// grouped by loss element, then environment modes grouped by loss element.
// Binary and JSON state files depend on this ordering.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lossmetro/tolerances.hpp"

namespace lossmetro {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

enum class ModeRole { ancilla, signal, environment };

std::string to_string(ModeRole role);
ModeRole mode_role_from_string(const std::string& name);

/// One bosonic mode. `element` is the 0-based loss-element index for signal
/// and environment modes and -1 for ancilla modes.
struct ModeSpec {
  int cutoff = 0;  // maximum photon number, inclusive
  ModeRole role = ModeRole::signal;
  int element = 0;

  static ModeSpec ancilla(int cutoff) { return {cutoff, ModeRole::ancilla, -1}; }
  static ModeSpec signal(int cutoff, int element) { return {cutoff, ModeRole::signal, element}; }
  static ModeSpec environment(int cutoff, int element) {
    return {cutoff, ModeRole::environment, element};
  }

  bool operator==(const ModeSpec&) const = default;
};

class ModeLayout {
 public:
  ModeLayout() = default;
  /// Throws ValidationError unless the modes are in canonical order and the
  /// Hilbert dimension is finite.
  explicit ModeLayout(std::vector<ModeSpec> modes);

  std::size_t mode_count() const noexcept { return modes_.size(); }
  const ModeSpec& mode(std::size_t m) const { return modes_.at(m); }
  std::span<const ModeSpec> modes() const noexcept { return modes_; }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t stride(std::size_t m) const { return strides_.at(m); }

  /// One past the largest element index carried by a signal mode.
  int element_count() const noexcept;

  std::vector<std::size_t> modes_with_role(ModeRole role) const;
  std::vector<std::size_t> signal_modes_of(int element) const;

  int occupation(std::size_t index, std::size_t m) const {
    return static_cast<int>((index / strides_[m]) % static_cast<std::size_t>(modes_[m].cutoff + 1));
  }
  std::vector<int> occupations(std::size_t index) const;
  std::size_t index_of(std::span<const int> occupations) const;

  /// Layout of the listed modes, kept in their original relative order.
  ModeLayout subset(std::span<const std::size_t> keep) const;

  bool operator==(const ModeLayout& other) const { return modes_ == other.modes_; }

 private:
  std::vector<ModeSpec> modes_;
  std::vector<std::size_t> strides_;
  std::size_t dimension_ = 1;
};

/// Normalized (up to the reported truncation tail) state vector.
class PureState {
 public:
  PureState() = default;
  /// Validates length and that the squared norm lies in [1 - tol.trunc, 1].
  PureState(ModeLayout layout, Vector amplitudes, double truncated_tail = 0.0,
            const Tolerances& tol = {});
  /// Skips the norm check. Used when the caller deliberately forces a state
  /// whose truncation tail exceeds the tolerance.
  static PureState unchecked(ModeLayout layout, Vector amplitudes, double truncated_tail);

  static PureState vacuum(ModeLayout layout);
  static PureState basis(ModeLayout layout, std::span<const int> occupations);

  const ModeLayout& layout() const noexcept { return layout_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  Complex amplitude(std::span<const int> occupations) const {
    return amplitudes_(static_cast<Eigen::Index>(layout_.index_of(occupations)));
  }
  double norm() const { return amplitudes_.norm(); }
  /// Probability mass of the ideal state that falls outside the cutoffs.
  double truncated_tail() const noexcept { return truncated_tail_; }

  PureState normalized() const;

 private:
  ModeLayout layout_;
  Vector amplitudes_;
  double truncated_tail_ = 0.0;
};

class DensityOperator {
 public:
  DensityOperator() = default;
  /// Checks Hermiticity and the trace window. Positivity is checked lazily
  /// by the operations that diagonalize anyway (see min_eigenvalue()).
  DensityOperator(ModeLayout layout, Matrix matrix, const Tolerances& tol = {});
  static DensityOperator from_pure(const PureState& psi);

  const ModeLayout& layout() const noexcept { return layout_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  double trace() const { return matrix_.trace().real(); }
  double trace_deficit() const { return 1.0 - trace(); }
  double min_eigenvalue() const;

 private:
  ModeLayout layout_;
  Matrix matrix_;
};

/// Mean photon number summed over the signal modes of `element`.
double energy(const PureState& psi, int element);
double energy(const DensityOperator& rho, int element);
/// Energies of all elements 0..element_count()-1.
std::vector<double> energies(const PureState& psi);

/// Tensor product. The result is reordered into canonical mode order, which
/// keeps the relative order of equal-rank modes from `a` before `b`.
PureState tensor(const PureState& a, const PureState& b);

DensityOperator partial_trace(const PureState& psi, std::span<const std::size_t> drop);
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> drop);

struct SchmidtTerm {
  double weight = 0.0;  // squared Schmidt coefficient
  Vector first;         // vector on the first party
  Vector second;        // vector on the second party
};

struct SchmidtDecomposition {
  ModeLayout first_layout;
  ModeLayout second_layout;
  std::vector<SchmidtTerm> terms;  // sorted by decreasing weight
  double dropped_weight = 0.0;     // total weight of terms below rank_tol
};

/// Schmidt decomposition across (first_modes, remaining modes). Terms whose
/// weight falls below `rank_tol` are dropped and their weight reported.
SchmidtDecomposition schmidt_decompose(const PureState& psi,
                                       std::span<const std::size_t> first_modes,
                                       double rank_tol = 1e-12);

/// Index table for a (kept, dropped) bipartition of a layout:
/// table(i_kept, i_dropped) is the full-space index.
Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> bipartition_index(
    const ModeLayout& layout, std::span<const std::size_t> kept,
    std::span<const std::size_t> dropped);

}  // namespace lossmetro
