#pragma once

// Monte Carlo estimation of loss parameters: product probe -> channel ->
// measurement -> maximum-likelihood estimate, compared with the quantum
// Cramer-Rao bound.
//
// Each loss element is estimated on its own (the experiments are product
// form). Within an element the factors of the probe are measured
// independently and their log-likelihoods add.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lossmetro/loss_channel.hpp"
#include "lossmetro/measurements.hpp"
#include "lossmetro/probe.hpp"
#include "lossmetro/tolerances.hpp"

namespace lossmetro {

enum class Estimator { mle_grid, mle_refined };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

struct SimScenario {
  ProbeSpec probe;
  LossParams true_params;
  MeasurementKind measurement = MeasurementKind::on_off;
  std::uint64_t shots = 10000;
  std::uint64_t trials = 200;
  std::uint64_t seed = 1;
  Estimator estimator = Estimator::mle_refined;
  int grid_points = 512;
  double grid_min = 0.01;
  double grid_max = 0.99;
  double refine_tol = 1e-8;
  Tolerances tol;
};

struct SimReport {
  std::vector<double> true_etas;
  RealMatrix estimates;   // trials x K
  RealVector mean;
  RealVector bias;
  RealMatrix covariance;  // unbiased sample covariance
  RealMatrix qfim;        // eta parametrization, per shot
  RealMatrix cfim;        // eta parametrization, per shot, of the chosen measurement
  RealMatrix crb;         // qfim^-1 / shots
  RealVector efficiency;  // covariance_kk * shots * qfim_kk
  std::vector<std::uint64_t> boundary_hits;  // trials whose grid maximum sat on a grid end
  /// counts[trial][factor]: outcome counts of every probe factor.
  std::vector<std::vector<std::vector<std::uint64_t>>> counts;
};

/// Throws ValidationError for bad settings and NumericalError when the
/// likelihood of an element is flat over the whole grid.
SimReport run_sim(const SimScenario& scenario);

/// Per-trial estimates as CSV: "trial,eta_0,eta_1,...".
void write_estimates_csv(std::ostream& os, const SimReport& report);

}  // namespace lossmetro
