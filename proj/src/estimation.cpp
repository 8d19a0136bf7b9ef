#include "lossmetro/estimation.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>

#include "lossmetro/errors.hpp"
#include "lossmetro/metrology.hpp"

namespace lossmetro {

std::string to_string(Estimator e) { return e == Estimator::mle_grid ? "mle_grid" : "mle_refined"; }

Estimator estimator_from_string(const std::string& name) {
  if (name == "mle_grid") return Estimator::mle_grid;
  if (name == "mle_refined") return Estimator::mle_refined;
  throw ValidationError("unknown estimator '" + name + "' (expected mle_grid or mle_refined)");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Factor {
  const PureState* state;
  int element;
  Povm povm;
  Matrix rho_in;
};

void validate(const SimScenario& sc) {
  if (sc.shots < 1) throw ValidationError("shots must be at least 1");
  if (sc.trials < 1) throw ValidationError("trials must be at least 1");
  if (sc.grid_points < 3) throw ValidationError("the likelihood grid needs at least 3 points");
  if (!(sc.grid_min > 0.0 && sc.grid_min < sc.grid_max && sc.grid_max < 1.0))
    throw ValidationError("grid bounds must satisfy 0 < grid_min < grid_max < 1");
  if (!(sc.refine_tol > 0.0)) throw ValidationError("refine_tol must be positive");
  if (sc.true_params.size() == 0) throw ValidationError("no loss parameters given");
}

// Outcome probabilities of one factor with its element's transmittance set to
// `eta` (other elements do not act on the factor).
RealVector probabilities(const Factor& f, std::vector<double> phis, double eta) {
  phis[static_cast<std::size_t>(f.element)] = LossParams::eta_to_phi(eta);
  const Matrix rho = evolve_angles(f.rho_in, f.state->layout(), phis);
  RealVector p = f.povm.expectations(rho);
  return p.cwiseMax(0.0);
}

double log_likelihood(const RealVector& p, const std::vector<std::uint64_t>& counts) {
  double ll = 0.0;
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (counts[x] == 0) continue;
    const double px = p(static_cast<Eigen::Index>(x));
    if (!(px > 0.0)) return kNegInf;
    ll += static_cast<double>(counts[x]) * std::log(px);
  }
  return ll;
}

bool interior(const LossParams& params) {
  for (double e : params.etas())
    if (!(e > 0.0 && e < 1.0)) return false;
  return true;
}

}  // namespace

SimReport run_sim(const SimScenario& sc) {
  validate(sc);
  const std::size_t k_count = sc.true_params.size();
  const ProductProbe probe = build_product_probe(sc.probe, sc.tol);
  if (static_cast<std::size_t>(probe.element_count()) > k_count)
    throw ValidationError("probe has more loss elements than loss parameters");

  std::vector<Factor> factors;
  std::vector<std::vector<std::size_t>> by_element(k_count);
  for (std::size_t i = 0; i < probe.factors.size(); ++i) {
    const auto& psi = probe.factors[i];
    by_element[static_cast<std::size_t>(probe.factor_element[i])].push_back(i);
    factors.push_back({&psi, probe.factor_element[i], make_povm(sc.measurement, psi, sc.tol),
                       psi.amplitudes() * psi.amplitudes().adjoint()});
  }
  for (std::size_t k = 0; k < k_count; ++k)
    if (by_element[k].empty()) throw ValidationError("element " + std::to_string(k) + " has no probe modes");

  const auto& phis = sc.true_params.phis();
  std::vector<RealVector> p_true;
  for (const auto& f : factors) {
    const DensityOperator out(f.state->layout(), evolve_angles(f.rho_in, f.state->layout(), phis),
                              Tolerances{.trunc = std::max(sc.tol.trunc, f.state->truncated_tail() + 1e-12)});
    p_true.push_back(outcome_distribution(out, f.povm, Tolerances{.trunc = std::max(sc.tol.trunc, out.trace_deficit() + 1e-12)}));
  }

  // Log-probability tables on the grid, shared by all trials.
  const int g_count = sc.grid_points;
  std::vector<double> grid(static_cast<std::size_t>(g_count));
  for (int g = 0; g < g_count; ++g)
    grid[g] = sc.grid_min + (sc.grid_max - sc.grid_min) * g / (g_count - 1);
  std::vector<std::vector<RealVector>> table(factors.size(), std::vector<RealVector>(grid.size()));
  const std::size_t cells = factors.size() * grid.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < cells; ++i) {
    const std::size_t f = i / grid.size(), g = i % grid.size();
    table[f][g] = probabilities(factors[f], phis, grid[g]);
  }

  const auto trials = static_cast<std::size_t>(sc.trials);
  SimReport rep;
  rep.true_etas = sc.true_params.etas();
  rep.estimates = RealMatrix::Zero(static_cast<Eigen::Index>(trials), static_cast<Eigen::Index>(k_count));
  rep.counts.assign(trials, {});
  std::vector<std::vector<std::uint8_t>> at_boundary(trials, std::vector<std::uint8_t>(k_count, 0));
  std::vector<std::exception_ptr> errors(trials);

#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < trials; ++t) {
    try {
      auto& counts = rep.counts[t];
      counts.resize(factors.size());
      for (std::size_t f = 0; f < factors.size(); ++f) {
        const RealVector& p = p_true[f];
        counts[f] = sample(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), sc.shots,
                           sc.seed, t * factors.size() + f);
      }
      for (std::size_t k = 0; k < k_count; ++k) {
        auto ll_at = [&](double eta) {
          double ll = 0.0;
          for (auto f : by_element[k]) ll += log_likelihood(probabilities(factors[f], phis, eta), counts[f]);
          return ll;
        };
        std::size_t best = 0;
        double best_ll = kNegInf, worst_ll = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < grid.size(); ++g) {
          double ll = 0.0;
          for (auto f : by_element[k]) ll += log_likelihood(table[f][g], counts[f]);
          if (ll > best_ll) {
            best_ll = ll;
            best = g;
          }
          worst_ll = std::min(worst_ll, ll);
        }
        if (best_ll == kNegInf || best_ll - worst_ll <= 1e-12 * std::max(1.0, std::abs(best_ll)))
          throw NumericalError("likelihood of element " + std::to_string(k) +
                               " is flat over the grid; the scenario is not identifiable");
        at_boundary[t][k] = best == 0 || best + 1 == grid.size();
        double estimate = grid[best];
        if (sc.estimator == Estimator::mle_refined) {
          double a = grid[best == 0 ? 0 : best - 1];
          double b = grid[std::min(best + 1, grid.size() - 1)];
          const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
          double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
          double fc = ll_at(c), fd = ll_at(d);
          while (b - a > sc.refine_tol) {
            if (fc >= fd) {
              b = d;
              d = c;
              fd = fc;
              c = b - inv_phi * (b - a);
              fc = ll_at(c);
            } else {
              a = c;
              c = d;
              fc = fd;
              d = a + inv_phi * (b - a);
              fd = ll_at(d);
            }
          }
          const double mid = 0.5 * (a + b);
          estimate = ll_at(mid) >= best_ll ? mid : grid[best];
        }
        rep.estimates(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = estimate;
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const auto n = static_cast<Eigen::Index>(k_count);
  rep.boundary_hits.assign(k_count, 0);
  for (std::size_t t = 0; t < trials; ++t)
    for (std::size_t k = 0; k < k_count; ++k) rep.boundary_hits[k] += at_boundary[t][k];
  rep.mean = rep.estimates.colwise().mean().transpose();
  rep.bias = rep.mean - Eigen::Map<const RealVector>(rep.true_etas.data(), n);
  const RealMatrix centered = rep.estimates.rowwise() - rep.mean.transpose();
  rep.covariance = trials > 1 ? RealMatrix((centered.transpose() * centered) / static_cast<double>(trials - 1))
                              : RealMatrix::Zero(n, n);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (interior(sc.true_params)) {
    QfimOptions opt;
    opt.parametrization = Parametrization::eta;
    opt.tol = sc.tol;
    rep.qfim = qfim(probe, sc.true_params, opt).qfim;
    rep.cfim = classical_fim(probe, sc.true_params, sc.measurement, Parametrization::eta, sc.tol);
  } else {
    rep.qfim = RealMatrix::Constant(n, n, nan);
    rep.cfim = RealMatrix::Constant(n, n, nan);
  }
  rep.crb = RealMatrix::Zero(n, n);
  rep.efficiency = RealVector::Zero(n);
  const double shots = static_cast<double>(sc.shots);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double q = rep.qfim(k, k);
    rep.crb(k, k) = q > 0.0 ? 1.0 / (q * shots) : (std::isnan(q) ? nan : std::numeric_limits<double>::infinity());
    rep.efficiency(k) = rep.covariance(k, k) * shots * q;
  }
  return rep;
}

void write_estimates_csv(std::ostream& os, const SimReport& report) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "trial";
  for (Eigen::Index k = 0; k < report.estimates.cols(); ++k) buf << ",eta_" << k;
  buf << '\n';
  for (Eigen::Index t = 0; t < report.estimates.rows(); ++t) {
    buf << t;
    for (Eigen::Index k = 0; k < report.estimates.cols(); ++k) buf << ',' << report.estimates(t, k);
    buf << '\n';
  }
  os << buf.str();
}

}  // namespace lossmetro
