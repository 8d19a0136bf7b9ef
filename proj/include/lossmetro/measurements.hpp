#pragma once

// POVMs on a truncated Fock space, outcome distributions and sampling.
//
// Effects are stored in structured form. Number-basis projectors are
// diagonal, Schmidt-basis projectors are rank-one (E = v v^dagger); a dense
// d x d matrix per outcome would not fit for the larger probes.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lossmetro/fock.hpp"
#include "lossmetro/tolerances.hpp"

namespace lossmetro {

struct DiagonalEffect {
  RealVector diagonal;
};

/// E = factor * factor^dagger.
struct LowRankEffect {
  Matrix factor;
};

struct DenseEffect {
  Matrix matrix;
};

using Effect = std::variant<DiagonalEffect, LowRankEffect, DenseEffect>;

class Povm {
 public:
  Povm() = default;
  /// Throws ValidationError unless the effects are PSD (eigenvalue floor
  /// -1e-12) and sum to the identity within `completeness_tol` entrywise.
  Povm(std::size_t dimension, std::vector<Effect> effects, std::vector<std::string> labels,
       double completeness_tol = 1e-10);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return effects_.size(); }
  const Effect& effect(std::size_t i) const { return effects_.at(i); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  Matrix dense_effect(std::size_t i) const;
  /// Re Tr(op E_i).
  double expectation(std::size_t i, const Matrix& op) const;
  RealVector expectations(const Matrix& op) const;

 private:
  std::size_t dimension_ = 0;
  std::vector<Effect> effects_;
  std::vector<std::string> labels_;
};

enum class MeasurementKind { schmidt, on_off, photon_counting };

std::string to_string(MeasurementKind kind);
MeasurementKind measurement_kind_from_string(const std::string& name);

/// Joint measurement in the Schmidt bases of an NDS probe: the ancilla
/// vectors chi attached to each signal number pattern, times the signal
/// number basis, plus (chi-complement) x I_S when the chi do not span the
/// ancilla space. Throws ValidationError if the ancilla vectors of
/// different patterns are neither parallel nor orthogonal.
Povm schmidt_povm(const PureState& probe, const Tolerances& tol = {});

/// Tensor products of {|0><0|, I - |0><0|} over `modes`, identity elsewhere.
/// Labels read e.g. "on-off" in mode order.
Povm on_off_povm(const ModeLayout& layout, std::span<const std::size_t> modes);

/// Number-basis projectors over `modes`, identity elsewhere. Labels read
/// e.g. "n=1,0".
Povm photon_counting_povm(const ModeLayout& layout, std::span<const std::size_t> modes);

/// Schmidt measurement for `probe`, or on-off / photon counting on all of
/// its modes.
Povm make_povm(MeasurementKind kind, const PureState& probe, const Tolerances& tol = {});

/// p_x = Tr(rho E_x). Values down to -1e-12 are clipped to 0; the sum must
/// lie in [1 - tol.trunc - deficit, 1 + 1e-10] where deficit is the trace
/// deficit of rho.
RealVector outcome_distribution(const DensityOperator& rho, const Povm& povm,
                                const Tolerances& tol = {});

/// Multinomial counts (conditional binomials), reproducible per (seed, stream).
std::vector<std::uint64_t> sample(std::span<const double> dist, std::uint64_t shots,
                                  std::uint64_t seed, std::uint64_t stream = 0);

/// CSV table "label,probability,count". `counts` may be empty.
void write_outcome_csv(std::ostream& os, const Povm& povm, const RealVector& probabilities,
                       std::span<const std::uint64_t> counts);

}  // namespace lossmetro
