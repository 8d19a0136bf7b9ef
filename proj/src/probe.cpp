#include "lossmetro/probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lossmetro/errors.hpp"

namespace lossmetro {

std::string to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::generic_nds: return "generic_nds";
    case ProbeKind::tmsv: return "tmsv";
    case ProbeKind::coherent: return "coherent";
    case ProbeKind::single_photon: return "single_photon";
    case ProbeKind::ecb_optimal: return "ecb_optimal";
    case ProbeKind::custom: return "custom";
  }
  return "unknown";
}

ProbeKind probe_kind_from_string(const std::string& name) {
  for (auto k : {ProbeKind::generic_nds, ProbeKind::tmsv, ProbeKind::coherent,
                 ProbeKind::single_photon, ProbeKind::ecb_optimal, ProbeKind::custom})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown probe kind '" + name + "'");
}

std::string to_string(AncillaPolicy policy) {
  return policy == AncillaPolicy::orthonormal_min ? "orthonormal_min" : "none";
}

AncillaPolicy ancilla_policy_from_string(const std::string& name) {
  if (name == "orthonormal_min") return AncillaPolicy::orthonormal_min;
  if (name == "none") return AncillaPolicy::none;
  throw ValidationError("unknown ancilla policy '" + name + "'");
}

namespace {

void check_energy(double energy, const char* what) {
  if (!(energy >= 0.0) || !std::isfinite(energy))
    throw ValidationError(std::string(what) + ": signal energy must be finite and >= 0");
}

std::vector<ModeSpec> signal_modes(const std::vector<int>& cutoffs, int element) {
  std::vector<ModeSpec> specs;
  for (int c : cutoffs) specs.push_back(ModeSpec::signal(c, element));
  return specs;
}

}  // namespace

// ---------------------------------------------------------------------------
// Generic number-diagonal probes

PureState nds_element(const std::vector<PatternWeight>& patterns, int modes, int element,
                      std::optional<int> cutoff, AncillaPolicy policy, const Tolerances& tol,
                      bool force) {
  if (modes < 1) throw ValidationError("an element needs at least one signal mode");
  std::vector<PatternWeight> support;
  std::set<std::vector<int>> seen;
  double total = 0.0;
  for (const auto& pw : patterns) {
    if (pw.pattern.size() != static_cast<std::size_t>(modes))
      throw ValidationError("photon-number pattern length differs from the mode count");
    if (!(pw.p >= 0.0)) throw ValidationError("probabilities must be >= 0");
    for (int n : pw.pattern)
      if (n < 0) throw ValidationError("photon numbers must be >= 0");
    if (!seen.insert(pw.pattern).second) throw ValidationError("photon-number pattern listed twice");
    total += pw.p;
    if (pw.p > 0.0) support.push_back(pw);
  }
  if (support.empty()) throw ValidationError("distribution has no support");
  if (total > 1.0 + 1e-12) throw ValidationError("probabilities sum to more than 1");
  const double deficit = std::max(0.0, 1.0 - total);
  if (deficit > tol.trunc && !force)
    throw ValidationError("probabilities sum to " + std::to_string(total) +
                          ", deficit exceeds the truncation tolerance");

  std::vector<int> needed(static_cast<std::size_t>(modes), 0);
  for (const auto& pw : support)
    for (std::size_t m = 0; m < needed.size(); ++m) needed[m] = std::max(needed[m], pw.pattern[m]);
  const int required = *std::max_element(needed.begin(), needed.end());
  std::vector<int> cutoffs = needed;
  if (cutoff) {
    if (*cutoff < required)
      throw CutoffTooSmall("cutoff " + std::to_string(*cutoff) + " cannot hold the distribution support",
                           required);
    cutoffs.assign(needed.size(), *cutoff);
  }

  const bool with_ancilla = policy == AncillaPolicy::orthonormal_min && support.size() > 1;
  std::vector<ModeSpec> specs;
  if (with_ancilla) specs.push_back(ModeSpec::ancilla(static_cast<int>(support.size()) - 1));
  const auto sig = signal_modes(cutoffs, element);
  specs.insert(specs.end(), sig.begin(), sig.end());
  ModeLayout layout(std::move(specs));

  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    std::vector<int> occ;
    if (with_ancilla) occ.push_back(static_cast<int>(j));
    occ.insert(occ.end(), support[j].pattern.begin(), support[j].pattern.end());
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = std::sqrt(support[j].p / total);
  }
  return PureState(std::move(layout), std::move(amps), deficit);
}

// ---------------------------------------------------------------------------
// Two-mode squeezed vacuum

std::vector<double> tmsv_schmidt_weights(double mean, int cutoff) {
  check_energy(mean, "tmsv");
  const double r = mean / (1.0 + mean);
  std::vector<double> w(static_cast<std::size_t>(cutoff) + 1);
  for (int n = 0; n <= cutoff; ++n) w[n] = (1.0 - r) * std::pow(r, n);
  return w;
}

namespace {

// Normalized weights t^n, n = 0..cutoff, and their mean.
std::pair<std::vector<double>, double> truncated_geometric(double t, int cutoff) {
  std::vector<double> w(static_cast<std::size_t>(cutoff) + 1);
  double z = 0.0, p = 1.0;
  for (int n = 0; n <= cutoff; ++n) {
    w[n] = p;
    z += p;
    p *= t;
  }
  double mean = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    w[n] /= z;
    mean += n * w[n];
  }
  return {std::move(w), mean};
}

}  // namespace

PureState tmsv_copy(double mean, int element, std::optional<int> cutoff, const Tolerances& tol) {
  check_energy(mean, "tmsv");
  const double r = mean / (1.0 + mean);
  int c = 0;
  if (cutoff) {
    c = *cutoff;
  } else if (mean > 0.0) {
    while (std::pow(r, c + 1) > tol.trunc) ++c;
  }
  if (c < 0) throw ValidationError("negative cutoff");
  ModeLayout layout({ModeSpec::ancilla(c), ModeSpec::signal(c, element)});
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  if (mean == 0.0) {
    amps(0) = 1.0;
    return PureState(std::move(layout), std::move(amps));
  }
  // The truncated geometric mean increases from 0 to c/2 as the ratio goes
  // from 0 to 1; solve for the ratio that restores the requested mean.
  if (2.0 * mean >= c) {
    throw CutoffTooSmall("TMSV energy " + std::to_string(mean) +
                             " is not representable at cutoff " + std::to_string(c),
                         static_cast<int>(std::floor(2.0 * mean)) + 1);
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (truncated_geometric(mid, c).second < mean ? lo : hi) = mid;
  }
  auto [w, achieved] = truncated_geometric(0.5 * (lo + hi), c);
  if (std::abs(achieved - mean) > tol.trunc)
    throw ValidationError("TMSV energy not representable within the truncation tolerance");
  for (int n = 0; n <= c; ++n) {
    const std::vector<int> occ{n, n};
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = std::sqrt(w[n]);
  }
  return PureState(std::move(layout), std::move(amps), std::pow(r, c + 1));
}

// ---------------------------------------------------------------------------
// Coherent states

namespace {

// Poisson(lambda) probabilities for n = 0..cutoff and the mass above cutoff.
std::pair<std::vector<double>, double> poisson(double lambda, int cutoff) {
  std::vector<double> p(static_cast<std::size_t>(cutoff) + 1);
  double term = std::exp(-lambda);
  for (int n = 0; n <= cutoff; ++n) {
    if (n > 0) term *= lambda / n;
    p[n] = term;
  }
  double tail = 0.0;
  for (int n = cutoff + 1; n < cutoff + 2000; ++n) {
    term *= lambda / n;
    tail += term;
    if (term < 1e-300 || term < tail * 1e-17) break;
  }
  return {std::move(p), tail};
}

}  // namespace

PureState coherent_element(double energy, int modes, int element, std::optional<int> cutoff,
                           const Tolerances& tol, bool force) {
  check_energy(energy, "coherent");
  if (modes < 1) throw ValidationError("an element needs at least one signal mode");
  const double lambda = energy / modes;
  const double per_mode_budget = tol.trunc / modes;
  int required = 0;
  while (poisson(lambda, required).second > per_mode_budget) ++required;
  const int c = cutoff.value_or(required);
  auto [p, tail] = poisson(lambda, c);
  const double total_tail = 1.0 - std::pow(1.0 - tail, modes);
  if (total_tail > tol.trunc && !force)
    throw CutoffTooSmall("coherent state tail " + std::to_string(total_tail) +
                             " exceeds the truncation tolerance at cutoff " + std::to_string(c),
                         required);

  Vector single(c + 1);
  double z = 0.0;
  for (int n = 0; n <= c; ++n) z += p[n];
  for (int n = 0; n <= c; ++n) single(n) = std::sqrt(p[n] / z);

  PureState out = PureState::unchecked(ModeLayout({ModeSpec::signal(c, element)}), single, tail);
  for (int m = 1; m < modes; ++m)
    out = tensor(out, PureState::unchecked(ModeLayout({ModeSpec::signal(c, element)}), single, tail));
  return PureState::unchecked(out.layout(), out.amplitudes(), total_tail);
}

// ---------------------------------------------------------------------------
// Single-photon and discrimination-optimal probes

PureState single_photon_element(double energy, int element, std::optional<int> cutoff) {
  check_energy(energy, "single_photon");
  const int whole = static_cast<int>(std::floor(energy));
  const double frac = energy - whole;
  const int modes = std::max(1, static_cast<int>(std::ceil(energy)));
  const int needed = energy > 0.0 ? 1 : 0;
  if (cutoff && *cutoff < needed) throw CutoffTooSmall("single-photon probe needs cutoff 1", needed);
  const int c = cutoff.value_or(needed);

  std::vector<ModeSpec> specs;
  if (frac > 0.0) specs.push_back(ModeSpec::ancilla(1));
  const auto sig = signal_modes(std::vector<int>(static_cast<std::size_t>(modes), c), element);
  specs.insert(specs.end(), sig.begin(), sig.end());
  ModeLayout layout(std::move(specs));

  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  if (frac > 0.0) {
    std::vector<int> occ(layout.mode_count(), 0);
    for (int m = 0; m < whole; ++m) occ[1 + m] = 1;
    occ[0] = 1;  // ancilla excited, last signal mode empty
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = std::sqrt(1.0 - frac);
    occ[0] = 0;
    occ.back() = 1;
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = std::sqrt(frac);
  } else {
    std::vector<int> occ(layout.mode_count(), energy > 0.0 ? 1 : 0);
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = 1.0;
  }
  return PureState(std::move(layout), std::move(amps));
}

PureState ecb_element(double energy, int modes, int element, std::optional<int> cutoff) {
  check_energy(energy, "ecb_optimal");
  if (modes < 1) throw ValidationError("an element needs at least one signal mode");
  const int lo = static_cast<int>(std::floor(energy));
  const int hi = static_cast<int>(std::ceil(energy));
  const double frac = energy - lo;
  if (cutoff && *cutoff < hi)
    throw CutoffTooSmall("cutoff " + std::to_string(*cutoff) + " cannot hold " + std::to_string(hi) +
                             " photons",
                         hi);
  std::vector<int> cutoffs(static_cast<std::size_t>(modes), cutoff.value_or(0));
  cutoffs[0] = cutoff.value_or(hi);

  std::vector<ModeSpec> specs;
  if (frac > 0.0) specs.push_back(ModeSpec::ancilla(1));
  const auto sig = signal_modes(cutoffs, element);
  specs.insert(specs.end(), sig.begin(), sig.end());
  ModeLayout layout(std::move(specs));

  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  std::vector<int> occ(layout.mode_count(), 0);
  if (frac > 0.0) {
    occ[1] = lo;
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = std::sqrt(1.0 - frac);
    occ[0] = 1;
    occ[1] = hi;
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = std::sqrt(frac);
  } else {
    occ[0] = lo;
    amps(static_cast<Eigen::Index>(layout.index_of(occ))) = 1.0;
  }
  return PureState(std::move(layout), std::move(amps));
}

// ---------------------------------------------------------------------------
// ProbeSpec dispatch

namespace {

std::size_t element_count_of(const ProbeSpec& spec) {
  std::size_t k = 0;
  for (std::size_t n : {spec.energies.size(), spec.modes_per_element.size(), spec.distributions.size()}) {
    if (n == 0) continue;
    if (k != 0 && n != k)
      throw ValidationError("energies, modes_per_element and distributions disagree on the element count");
    k = n;
  }
  if (k == 0) throw ValidationError("probe spec names no loss elements");
  return k;
}

std::vector<PatternWeight> element_patterns(const ElementDistribution& dist, int& modes) {
  if (!dist.total.empty() && !dist.joint.empty())
    throw ValidationError("give either a total or a joint distribution, not both");
  if (!dist.joint.empty()) {
    const int len = static_cast<int>(dist.joint.front().pattern.size());
    if (modes == 0) modes = len;
    return dist.joint;
  }
  if (modes == 0) modes = 1;
  std::vector<PatternWeight> out;
  for (std::size_t n = 0; n < dist.total.size(); ++n) {
    std::vector<int> pattern(static_cast<std::size_t>(modes), 0);
    pattern[0] = static_cast<int>(n);
    out.push_back({std::move(pattern), dist.total[n]});
  }
  return out;
}

double pattern_energy(const std::vector<PatternWeight>& patterns) {
  double total = 0.0, mean = 0.0;
  for (const auto& pw : patterns) {
    int n = 0;
    for (int x : pw.pattern) n += x;
    total += pw.p;
    mean += n * pw.p;
  }
  return total > 0.0 ? mean / total : 0.0;
}

}  // namespace

std::vector<double> probe_energies(const ProbeSpec& spec) {
  const auto count = element_count_of(spec);
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (spec.kind == ProbeKind::generic_nds || spec.kind == ProbeKind::custom) {
      if (spec.distributions.size() != count)
        throw ValidationError(to_string(spec.kind) + " probes need one distribution per element");
      int modes = spec.modes_per_element.empty() ? 0 : spec.modes_per_element[k];
      out[k] = pattern_energy(element_patterns(spec.distributions[k], modes));
    } else {
      if (spec.energies.size() != count)
        throw ValidationError(to_string(spec.kind) + " probes need one energy per element");
      out[k] = spec.energies[k];
    }
  }
  return out;
}

ProductProbe build_product_probe(const ProbeSpec& spec, const Tolerances& tol) {
  const auto count = element_count_of(spec);
  const auto targets = probe_energies(spec);
  ProductProbe probe;

  auto add = [&](PureState psi, int k) {
    probe.factors.push_back(std::move(psi));
    probe.factor_element.push_back(k);
  };

  for (std::size_t kk = 0; kk < count; ++kk) {
    const int k = static_cast<int>(kk);
    const double n_k = targets[kk];
    int modes = spec.modes_per_element.empty() ? 0 : spec.modes_per_element[kk];
    if (!spec.modes_per_element.empty() && modes < 1)
      throw ValidationError("modes_per_element entries must be >= 1");

    switch (spec.kind) {
      case ProbeKind::generic_nds:
      case ProbeKind::custom: {
        if (spec.kind == ProbeKind::generic_nds && spec.ancilla_policy == AncillaPolicy::none)
          throw ValidationError("generic_nds probes need orthonormal ancillas; use kind=custom");
        const auto patterns = element_patterns(spec.distributions[kk], modes);
        if (!spec.energies.empty() && std::abs(spec.energies[kk] - n_k) > 1e-9)
          throw ValidationError("element " + std::to_string(k) + ": distribution mean " +
                                std::to_string(n_k) + " differs from the requested energy " +
                                std::to_string(spec.energies[kk]));
        add(nds_element(patterns, modes, k, spec.cutoff, spec.ancilla_policy, tol, spec.force), k);
        break;
      }
      case ProbeKind::tmsv: {
        if (spec.ancilla_policy == AncillaPolicy::none)
          throw ValidationError("TMSV probes carry their own ancilla modes");
        check_energy(n_k, "tmsv");
        if (modes == 0) modes = 1;
        for (int copy = 0; copy < modes; ++copy) add(tmsv_copy(n_k / modes, k, spec.cutoff, tol), k);
        break;
      }
      case ProbeKind::coherent:
        add(coherent_element(n_k, modes == 0 ? 1 : modes, k, spec.cutoff, tol, spec.force), k);
        break;
      case ProbeKind::single_photon: {
        check_energy(n_k, "single_photon");
        const int natural = std::max(1, static_cast<int>(std::ceil(n_k)));
        if (modes != 0 && modes != natural)
          throw ValidationError("single-photon probe of energy " + std::to_string(n_k) + " uses " +
                                std::to_string(natural) + " signal modes");
        if (spec.ancilla_policy == AncillaPolicy::none && n_k != std::floor(n_k))
          throw ValidationError("fractional single-photon probes need an ancilla");
        add(single_photon_element(n_k, k, spec.cutoff), k);
        break;
      }
      case ProbeKind::ecb_optimal:
        if (spec.ancilla_policy == AncillaPolicy::none && n_k != std::floor(n_k))
          throw ValidationError("fractional-energy discrimination probes need an ancilla");
        add(ecb_element(n_k, modes == 0 ? 1 : modes, k, spec.cutoff), k);
        break;
    }
  }
  return probe;
}

PureState build_probe(const ProbeSpec& spec, const Tolerances& tol) {
  return build_product_probe(spec, tol).dense();
}

PureState ProductProbe::dense() const {
  if (factors.empty()) throw ValidationError("empty product probe");
  PureState out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

PureState ProductProbe::element_factor(int element) const {
  std::optional<PureState> out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factor_element[i] != element) continue;
    out = out ? tensor(*out, factors[i]) : factors[i];
  }
  if (!out) throw ValidationError("no factor acts on element " + std::to_string(element));
  return *out;
}

int ProductProbe::element_count() const {
  int count = 0;
  for (int k : factor_element) count = std::max(count, k + 1);
  return count;
}

}  // namespace lossmetro
