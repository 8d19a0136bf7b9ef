#pragma once

// Declarative signal-ancilla probes and their construction.
//
// Every built-in probe kind is a product over loss elements, and some (TMSV
// copies) are products within an element as well. build_product_probe()
// returns those factors individually so that callers can exploit additivity
// of Fisher information; build_probe() returns the dense tensor product.

#include <optional>
#include <string>
#include <vector>

#include "lossmetro/fock.hpp"
#include "lossmetro/tolerances.hpp"

namespace lossmetro {

enum class ProbeKind { generic_nds, tmsv, coherent, single_photon, ecb_optimal, custom };

std::string to_string(ProbeKind kind);
ProbeKind probe_kind_from_string(const std::string& name);

enum class AncillaPolicy { orthonormal_min, none };

std::string to_string(AncillaPolicy policy);
AncillaPolicy ancilla_policy_from_string(const std::string& name);

/// Photon-number pattern over the signal modes of one element, with its
/// probability.
struct PatternWeight {
  std::vector<int> pattern;
  double p = 0.0;

  bool operator==(const PatternWeight&) const = default;
};

/// Signal photon statistics of one element. Either `total` (p_n of the total
/// photon number, all photons placed in the element's first mode) or
/// `joint` (explicit per-mode patterns) is given.
struct ElementDistribution {
  std::vector<double> total;
  std::vector<PatternWeight> joint;

  bool operator==(const ElementDistribution&) const = default;
};

struct ProbeSpec {
  ProbeKind kind = ProbeKind::generic_nds;
  /// Target signal energy N_k per element. May be left empty for kinds that
  /// derive it from `distributions`.
  std::vector<double> energies;
  /// M_k per element. Empty means one mode per element (or ceil(N_k) for
  /// single_photon).
  std::vector<int> modes_per_element;
  /// generic_nds / custom only.
  std::vector<ElementDistribution> distributions;
  /// Uniform signal-mode cutoff. When absent the smallest cutoff that holds
  /// the requested state within `tol.trunc` is used, per mode.
  std::optional<int> cutoff;
  AncillaPolicy ancilla_policy = AncillaPolicy::orthonormal_min;
  /// Accept states whose truncated tail exceeds tol.trunc.
  bool force = false;

  bool operator==(const ProbeSpec&) const = default;
};

/// Factors of a product probe. Each factor acts on the signal modes of a
/// single loss element (plus its own ancillas).
struct ProductProbe {
  std::vector<PureState> factors;
  std::vector<int> factor_element;

  /// Dense tensor product of all factors.
  PureState dense() const;
  /// Dense tensor product of the factors belonging to one element.
  PureState element_factor(int element) const;
  int element_count() const;
};

ProductProbe build_product_probe(const ProbeSpec& spec, const Tolerances& tol = {});
PureState build_probe(const ProbeSpec& spec, const Tolerances& tol = {});

/// Number of elements and their derived energies/mode counts after the
/// defaults of `spec` are applied.
std::vector<double> probe_energies(const ProbeSpec& spec);

// Single-element building blocks. `element` tags the signal modes.

/// sum_n sqrt(p_n) |chi_n>_A |n>_S over explicit patterns; `policy` decides
/// whether the chi_n are orthonormal basis states of one ancilla mode.
PureState nds_element(const std::vector<PatternWeight>& patterns, int modes, int element,
                      std::optional<int> cutoff, AncillaPolicy policy, const Tolerances& tol,
                      bool force);

/// One two-mode squeezed vacuum copy (ancilla mode, signal mode) with mean
/// signal photon number exactly `mean`. The Schmidt spectrum is the
/// geometric law truncated at the cutoff with its ratio re-solved so that the
/// truncated mean equals `mean`; the ideal tail mass is reported.
PureState tmsv_copy(double mean, int element, std::optional<int> cutoff, const Tolerances& tol);

/// Ideal (untruncated) TMSV Schmidt weights N^n / (1 + N)^(n + 1), n <= cutoff.
std::vector<double> tmsv_schmidt_weights(double mean, int cutoff);

/// Product of coherent states of real amplitude sqrt(N / M) on M modes.
PureState coherent_element(double energy, int modes, int element, std::optional<int> cutoff,
                           const Tolerances& tol, bool force);

/// |1>^{floor N} (sqrt(1 - {N}) |1>_A |0> + sqrt({N}) |0>_A |1>) on ceil(N)
/// signal modes.
PureState single_photon_element(double energy, int element, std::optional<int> cutoff);

/// sqrt(1 - {N}) |0>_A |floor N, 0, ..., 0> + sqrt({N}) |1>_A |ceil N, 0, ..., 0>
/// on M signal modes.
PureState ecb_element(double energy, int modes, int element, std::optional<int> cutoff);

}  // namespace lossmetro
