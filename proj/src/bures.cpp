#include "lossmetro/bures.hpp"

#include <algorithm>
#include <cmath>

#include "lossmetro/errors.hpp"
#include "lossmetro/loss_channel.hpp"
#include "lossmetro/metrology.hpp"
#include "lossmetro/probe.hpp"

namespace lossmetro {

namespace {

void check_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0, 1]");
}

void check_query(const EcbQuery& q) {
  check_unit(q.eta, "eta");
  check_unit(q.eta_prime, "eta_prime");
  if (!(q.energy >= 0.0) || !std::isfinite(q.energy)) throw ValidationError("energy must be finite and >= 0");
  if (q.modes < 1) throw ValidationError("the channel needs at least one mode");
}

}  // namespace

double mu(double eta, double eta_prime) {
  check_unit(eta, "eta");
  check_unit(eta_prime, "eta_prime");
  const double m = std::sqrt(eta * eta_prime) + std::sqrt((1.0 - eta) * (1.0 - eta_prime));
  return std::clamp(m, 0.0, 1.0);
}

double min_fidelity_closed(double energy, double mu_value) {
  if (!(energy >= 0.0) || !std::isfinite(energy)) throw ValidationError("energy must be finite and >= 0");
  check_unit(mu_value, "mu");
  if (mu_value == 1.0) return 1.0;
  const double fl = std::floor(energy);
  const double frac = energy - fl;
  const double low = std::pow(mu_value, fl);
  return frac == 0.0 ? low : (1.0 - frac) * low + frac * low * mu_value;
}

BruteForceResult min_fidelity_bruteforce(const EcbQuery& query) {
  check_query(query);
  const double n = query.energy;
  const int lo = static_cast<int>(std::floor(n));
  const int hi = static_cast<int>(std::ceil(n));
  const int n_max = query.n_max > 0 ? query.n_max : 10 * hi + 10;
  if (n_max < hi)
    throw ValidationError("infeasible: energy " + std::to_string(n) + " exceeds the support cap " +
                          std::to_string(n_max));
  const double m = mu(query.eta, query.eta_prime);

  BruteForceResult best;
  if (lo == hi) {
    best.value = std::pow(m, lo);
    best.support = {lo};
    best.weights = {1.0};
  } else {
    best.value = 2.0;
  }
  if (m == 1.0) {
    // Every feasible distribution gives F = 1; report the floor/ceil split.
    if (lo != hi) {
      best.support = {lo, hi};
      best.weights = {hi - n, n - lo};
    }
    best.value = 1.0;
    return best;
  }

  std::vector<double> pw(static_cast<std::size_t>(n_max) + 1);
  for (int k = 0; k <= n_max; ++k) pw[k] = std::pow(m, k);
  for (int n1 = 0; n1 <= lo; ++n1)
    for (int n2 = std::max(hi, n1 + 1); n2 <= n_max; ++n2) {
      const double w2 = (n - n1) / static_cast<double>(n2 - n1);
      const double w1 = 1.0 - w2;
      const double v = w1 * pw[n1] + w2 * pw[n2];
      if (v < best.value) {
        best.value = v;
        best.support.clear();
        best.weights.clear();
        if (w1 > 0.0) {
          best.support.push_back(n1);
          best.weights.push_back(w1);
        }
        if (w2 > 0.0) {
          best.support.push_back(n2);
          best.weights.push_back(w2);
        }
      }
    }
  return best;
}

double ecb_distance(const EcbQuery& query) {
  check_query(query);
  const double f = min_fidelity_closed(query.energy, mu(query.eta, query.eta_prime));
  return std::sqrt(std::max(0.0, 1.0 - f));
}

PureState ecb_optimal_probe(const EcbQuery& query, std::optional<int> cutoff) {
  check_query(query);
  return ecb_element(query.energy, query.modes, 0, cutoff);
}

double ecb_pipeline_fidelity(const EcbQuery& query, const Tolerances& tol) {
  const PureState probe = ecb_optimal_probe(query);
  const auto rho = DensityOperator::from_pure(probe);
  const auto a = apply_loss(rho, LossParams::from_etas({query.eta}), {}, tol);
  const auto b = apply_loss(rho, LossParams::from_etas({query.eta_prime}), {}, tol);
  return uhlmann_fidelity(a, b, tol);
}

}  // namespace lossmetro
