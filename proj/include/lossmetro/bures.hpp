#pragma once

// Energy-constrained Bures distance between multimode pure-loss channels.
//
// The minimum output fidelity over probes with mean signal photon number N
// reduces to minimizing sum_n p_n mu^n over photon-number distributions of
// mean N. The closed form puts all weight on floor(N) and ceil(N). The
// brute-force route solves the same linear program by enumerating two-point
// supports, which contain an optimal vertex.

#include <optional>
#include <vector>

#include "lossmetro/fock.hpp"
#include "lossmetro/tolerances.hpp"

namespace lossmetro {

/// sqrt(eta eta') + sqrt((1 - eta)(1 - eta')) = cos(phi' - phi).
double mu(double eta, double eta_prime);

/// (1 - {N}) mu^floor(N) + {N} mu^ceil(N).
double min_fidelity_closed(double energy, double mu_value);

struct EcbQuery {
  double eta = 1.0;
  double eta_prime = 1.0;
  double energy = 0.0;
  int modes = 1;
  /// Largest photon number the brute-force search may use; <= 0 selects
  /// 10 ceil(N) + 10.
  int n_max = 0;
};

struct BruteForceResult {
  double value = 1.0;
  std::vector<int> support;       // photon numbers carrying weight, ascending
  std::vector<double> weights;    // matching probabilities
};

/// Exhaustive search over distributions supported on at most two photon
/// numbers n1 <= N <= n2 <= n_max. Does not read query.modes.
BruteForceResult min_fidelity_bruteforce(const EcbQuery& query);

/// sqrt(1 - min_fidelity_closed).
double ecb_distance(const EcbQuery& query);

/// sqrt(1 - {N}) |0>_A |floor N, 0, ..> + sqrt({N}) |1>_A |ceil N, 0, ..>
/// on query.modes signal modes.
PureState ecb_optimal_probe(const EcbQuery& query, std::optional<int> cutoff = std::nullopt);

/// Fidelity of the optimal probe's outputs through L_eta and L_eta' on every
/// signal mode, via apply_loss and uhlmann_fidelity.
double ecb_pipeline_fidelity(const EcbQuery& query, const Tolerances& tol = {});

}  // namespace lossmetro
