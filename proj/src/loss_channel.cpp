#include "lossmetro/loss_channel.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "lossmetro/errors.hpp"

namespace lossmetro {

std::string to_string(Parametrization p) { return p == Parametrization::eta ? "eta" : "phi"; }

Parametrization parametrization_from_string(const std::string& name) {
  if (name == "eta") return Parametrization::eta;
  if (name == "phi") return Parametrization::phi;
  throw ValidationError("unknown parametrization '" + name + "' (expected eta or phi)");
}

// ---------------------------------------------------------------------------
// LossParams

double LossParams::eta_to_phi(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("transmittance must lie in [0, 1]");
  return std::acos(std::sqrt(eta));
}

double LossParams::phi_to_eta(double phi) {
  if (!(phi >= 0.0 && phi <= std::numbers::pi / 2))
    throw ValidationError("loss angle must lie in [0, pi/2]");
  const double c = std::cos(phi);
  return std::clamp(c * c, 0.0, 1.0);
}

LossParams LossParams::from_etas(std::vector<double> etas) {
  LossParams p;
  p.native_ = Parametrization::eta;
  p.phis_.reserve(etas.size());
  for (double e : etas) p.phis_.push_back(eta_to_phi(e));
  p.etas_ = std::move(etas);
  return p;
}

LossParams LossParams::from_phis(std::vector<double> phis) {
  LossParams p;
  p.native_ = Parametrization::phi;
  p.etas_.reserve(phis.size());
  for (double f : phis) p.etas_.push_back(phi_to_eta(f));
  p.phis_ = std::move(phis);
  return p;
}

std::vector<std::pair<std::size_t, int>> resolve_assignment(const ModeLayout& layout,
                                                            const LossAssignment& assignment,
                                                            std::size_t parameter_count) {
  const auto signal = layout.modes_with_role(ModeRole::signal);
  if (!assignment.elements.empty() && assignment.elements.size() != signal.size())
    throw ValidationError("loss assignment must list one element per signal mode");
  std::vector<std::pair<std::size_t, int>> out;
  out.reserve(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const int k = assignment.elements.empty() ? layout.mode(signal[i]).element : assignment.elements[i];
    if (k < 0 || static_cast<std::size_t>(k) >= parameter_count)
      throw ValidationError("signal mode " + std::to_string(signal[i]) + " assigned to element " +
                            std::to_string(k) + " which has no loss parameter");
    out.emplace_back(signal[i], k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kraus ladders

namespace {

double sqrt_binomial(int n, int l) {
  double c = 1.0;
  for (int i = 1; i <= l; ++i) c = c * (n - l + i) / i;
  return std::sqrt(c);
}

kernels::LadderSet empty_ladder(int cutoff) {
  kernels::LadderSet set;
  set.cutoff = cutoff;
  set.coeff.assign(static_cast<std::size_t>(cutoff) + 1,
                   std::vector<double>(static_cast<std::size_t>(cutoff) + 1, 0.0));
  return set;
}

}  // namespace

kernels::LadderSet kraus_ladder(double phi, int cutoff) {
  auto set = empty_ladder(cutoff);
  const double c = std::cos(phi), s = std::sin(phi);
  for (int l = 0; l <= cutoff; ++l)
    for (int n = l; n <= cutoff; ++n)
      set.coeff[l][n] = sqrt_binomial(n, l) * std::pow(c, n - l) * std::pow(s, l);
  return set;
}

kernels::LadderSet kraus_ladder_dphi(double phi, int cutoff) {
  auto set = empty_ladder(cutoff);
  const double c = std::cos(phi), s = std::sin(phi);
  for (int l = 0; l <= cutoff; ++l)
    for (int n = l; n <= cutoff; ++n) {
      const int a = n - l, b = l;
      double d = 0.0;
      if (a > 0) d -= a * std::pow(c, a - 1) * std::pow(s, b + 1);
      if (b > 0) d += b * std::pow(c, a + 1) * std::pow(s, b - 1);
      set.coeff[l][n] = sqrt_binomial(n, l) * d;
    }
  return set;
}

kernels::LadderSet kraus_ladder_deta(double eta, int cutoff) {
  if (!(eta > 0.0 && eta < 1.0))
    throw ValidationError("eta-derivatives need 0 < eta < 1 (the Jacobian is singular at the boundary)");
  auto set = empty_ladder(cutoff);
  for (int l = 0; l <= cutoff; ++l)
    for (int n = l; n <= cutoff; ++n) {
      const double a = 0.5 * (n - l), b = 0.5 * l;
      double d = 0.0;
      if (a > 0) d += a * std::pow(eta, a - 1) * std::pow(1 - eta, b);
      if (b > 0) d -= b * std::pow(eta, a) * std::pow(1 - eta, b - 1);
      set.coeff[l][n] = sqrt_binomial(n, l) * d;
    }
  return set;
}

std::vector<RealMatrix> kraus_ops(double eta, int cutoff) {
  const auto set = kraus_ladder(LossParams::eta_to_phi(eta), cutoff);
  std::vector<RealMatrix> ops;
  for (int l = 0; l <= cutoff; ++l) {
    RealMatrix a = RealMatrix::Zero(cutoff + 1, cutoff + 1);
    for (int n = l; n <= cutoff; ++n) a(n - l, n) = set.coeff[l][n];
    ops.push_back(std::move(a));
  }
  return ops;
}

// ---------------------------------------------------------------------------
// Reduced route

namespace {

Matrix run_angles(Matrix rho, const ModeLayout& layout,
                  const std::vector<std::pair<std::size_t, int>>& modes,
                  std::span<const double> phis) {
  std::map<std::pair<int, int>, kernels::LadderSet> cache;
  Matrix tmp;
  for (const auto& [m, k] : modes) {
    const int cutoff = layout.mode(m).cutoff;
    auto it = cache.find({k, cutoff});
    if (it == cache.end()) it = cache.emplace(std::pair{k, cutoff}, kraus_ladder(phis[k], cutoff)).first;
    kernels::apply_mode_map(rho, tmp, kernels::ModeGeometry::of(layout, m), it->second, it->second);
    rho.swap(tmp);
  }
  return rho;
}

}  // namespace

Matrix evolve_angles(const Matrix& rho_in, const ModeLayout& layout, std::span<const double> phis,
                     const LossAssignment& assignment) {
  const auto modes = resolve_assignment(layout, assignment, phis.size());
  return run_angles(rho_in, layout, modes, phis);
}

DensityOperator apply_loss(const DensityOperator& rho, const LossParams& params,
                           const LossAssignment& assignment, const Tolerances& tol) {
  Matrix out = evolve_angles(rho.matrix(), rho.layout(), params.phis(), assignment);
  Tolerances t = tol;
  t.trunc = std::max(tol.trunc, rho.trace_deficit() + 1e-12);
  return DensityOperator(rho.layout(), std::move(out), t);
}

LossOutput evolve_with_derivatives(const Matrix& rho_in, const ModeLayout& layout,
                                   const LossParams& params, Parametrization parametrization,
                                   const LossAssignment& assignment) {
  const auto modes = resolve_assignment(layout, assignment, params.size());
  const auto d = static_cast<Eigen::Index>(layout.dimension());

  LossOutput out;
  out.rho = rho_in;
  out.drho.assign(params.size(), Matrix());
  std::vector<bool> touched(params.size(), false);

  Matrix tmp, x;
  for (const auto& [m, k] : modes) {
    const int cutoff = layout.mode(m).cutoff;
    const auto geom = kernels::ModeGeometry::of(layout, m);
    const auto kraus = kraus_ladder(params.phi(k), cutoff);
    const auto deriv = parametrization == Parametrization::phi ? kraus_ladder_dphi(params.phi(k), cutoff)
                                                               : kraus_ladder_deta(params.eta(k), cutoff);

    for (std::size_t j = 0; j < params.size(); ++j) {
      if (!touched[j]) continue;
      kernels::apply_mode_map(out.drho[j], tmp, geom, kraus, kraus);
      out.drho[j].swap(tmp);
    }
    kernels::apply_mode_map(out.rho, x, geom, deriv, kraus);
    if (!touched[k]) {
      out.drho[k] = Matrix::Zero(d, d);
      touched[k] = true;
    }
    out.drho[k] += x + x.adjoint();

    kernels::apply_mode_map(out.rho, tmp, geom, kraus, kraus);
    out.rho.swap(tmp);
  }
  for (std::size_t j = 0; j < params.size(); ++j)
    if (!touched[j]) out.drho[j] = Matrix::Zero(d, d);
  return out;
}

// ---------------------------------------------------------------------------
// Purified route

namespace {

struct PurifyWalk {
  const ModeLayout& layout;
  std::vector<std::pair<std::size_t, int>> modes;
  std::vector<kernels::LadderSet> kraus;  // per entry of `modes`
  std::vector<kernels::LadderSet> deriv;  // per entry of `modes`; empty without derivatives
  std::size_t element_count = 0;          // number of derivative slots, 0 for none
  std::vector<int> pattern;
  PurifiedOutput out;
  std::vector<std::vector<Vector>> derivative;

  void visit(std::size_t depth, const Vector& v, const std::vector<Vector>& dv) {
    if (depth == modes.size()) {
      out.components.push_back({pattern, v});
      for (std::size_t k = 0; k < element_count; ++k) derivative[k].push_back(dv[k]);
      return;
    }
    const auto [m, elem] = modes[depth];
    const auto geom = kernels::ModeGeometry::of(layout, m);
    const int cutoff = layout.mode(m).cutoff;
    Vector w, tmp;
    std::vector<Vector> dw(element_count);
    for (int l = 0; l <= cutoff; ++l) {
      kernels::apply_ladder(v, w, geom, kraus[depth].coeff[l], l);
      bool zero = w.squaredNorm() == 0.0;
      for (std::size_t k = 0; k < element_count; ++k) {
        kernels::apply_ladder(dv[k], dw[k], geom, kraus[depth].coeff[l], l);
        if (static_cast<int>(k) == elem) {
          kernels::apply_ladder(v, tmp, geom, deriv[depth].coeff[l], l);
          dw[k] += tmp;
        }
        zero = zero && dw[k].squaredNorm() == 0.0;
      }
      if (zero) continue;
      pattern[depth] = l;
      visit(depth + 1, w, dw);
    }
  }
};

PurifyWalk make_walk(const PureState& probe, std::span<const double> phis,
                     const LossAssignment& assignment) {
  PurifyWalk walk{probe.layout(), resolve_assignment(probe.layout(), assignment, phis.size()), {}, {}};
  for (const auto& [m, k] : walk.modes) walk.kraus.push_back(kraus_ladder(phis[k], probe.layout().mode(m).cutoff));
  walk.pattern.assign(walk.modes.size(), 0);
  walk.out.layout = probe.layout();
  return walk;
}

}  // namespace

PurifiedOutput purified_evolve_angles(const PureState& probe, std::span<const double> phis,
                                      const LossAssignment& assignment) {
  auto walk = make_walk(probe, phis, assignment);
  walk.visit(0, probe.amplitudes(), {});
  return std::move(walk.out);
}

PurifiedOutput purified_evolve(const PureState& probe, const LossParams& params,
                               const LossAssignment& assignment, const Tolerances& tol) {
  PurifiedOutput all = purified_evolve_angles(probe, params.phis(), assignment);
  PurifiedOutput kept;
  kept.layout = all.layout;
  for (auto& c : all.components) {
    const double mass = c.state.squaredNorm();
    if (mass > tol.component) {
      kept.components.push_back(std::move(c));
    } else {
      kept.dropped_mass += mass;
    }
  }
  return kept;
}

PurifiedDerivative purified_evolve_derivative(const PureState& probe, const LossParams& params,
                                              Parametrization parametrization,
                                              const LossAssignment& assignment) {
  auto walk = make_walk(probe, params.phis(), assignment);
  walk.element_count = params.size();
  walk.derivative.assign(params.size(), {});
  for (const auto& [m, k] : walk.modes) {
    const int cutoff = probe.layout().mode(m).cutoff;
    walk.deriv.push_back(parametrization == Parametrization::phi ? kraus_ladder_dphi(params.phi(k), cutoff)
                                                                 : kraus_ladder_deta(params.eta(k), cutoff));
  }
  const std::vector<Vector> zero(params.size(), Vector::Zero(probe.amplitudes().size()));
  walk.visit(0, probe.amplitudes(), zero);
  return {std::move(walk.out), std::move(walk.derivative)};
}

double PurifiedOutput::total_mass() const {
  double total = 0.0;
  for (const auto& c : components) total += c.state.squaredNorm();
  return total;
}

DensityOperator PurifiedOutput::reduced(const Tolerances& tol) const {
  const auto d = static_cast<Eigen::Index>(layout.dimension());
  Matrix stacked(d, static_cast<Eigen::Index>(components.size()));
  for (std::size_t i = 0; i < components.size(); ++i) stacked.col(static_cast<Eigen::Index>(i)) = components[i].state;
  Tolerances t = tol;
  t.trunc = std::max(tol.trunc, 1.0 - total_mass() + 1e-12);
  return DensityOperator(layout, stacked * stacked.adjoint(), t);
}

PureState PurifiedOutput::assembled() const {
  std::vector<ModeSpec> specs(layout.modes().begin(), layout.modes().end());
  const auto signal = layout.modes_with_role(ModeRole::signal);
  std::vector<ModeSpec> env;
  for (auto m : signal) env.push_back(ModeSpec::environment(layout.mode(m).cutoff, layout.mode(m).element));
  const ModeLayout env_layout(env);
  specs.insert(specs.end(), env.begin(), env.end());
  ModeLayout full(std::move(specs));

  const auto de = env_layout.dimension();
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(full.dimension()));
  for (const auto& c : components) {
    const auto e = env_layout.index_of(c.pattern);
    for (std::size_t i = 0; i < layout.dimension(); ++i)
      amps(static_cast<Eigen::Index>(i * de + e)) = c.state(static_cast<Eigen::Index>(i));
  }
  return PureState::unchecked(std::move(full), std::move(amps), dropped_mass);
}

}  // namespace lossmetro
