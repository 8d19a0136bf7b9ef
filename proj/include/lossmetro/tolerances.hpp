#pragma once

namespace lossmetro {

/// Numerical tolerances shared by all modules. Every field is exposed as a
/// config key under "tolerances".
struct Tolerances {
  double trunc = 1e-8;       // tail mass allowed to fall outside the cutoffs
  double hermitian = 1e-12;  // entrywise |rho - rho^dagger|
  double psd = 1e-10;        // eigenvalue floor for density operators
  double rank = 1e-12;       // SLD support, relative to the largest eigenvalue
  double component = 1e-14;  // purified components with smaller norm^2 are dropped
  double prob = 1e-15;       // outcome probabilities below this are merged
  double fd_step = 1e-3;     // fidelity second-difference step (radians)

  bool operator==(const Tolerances&) const = default;
};

}  // namespace lossmetro
