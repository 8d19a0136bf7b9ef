#include "lossmetro/measurements.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lossmetro/errors.hpp"
#include "lossmetro/rng.hpp"

namespace lossmetro {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Rows of a low-rank factor that carry any weight.
std::vector<Eigen::Index> support_of(const Matrix& f) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    if (f.row(i).squaredNorm() != 0.0) rows.push_back(i);
  return rows;
}

std::string join_occupations(const std::vector<int>& occ) {
  std::string s;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(occ[i]);
  }
  return s;
}

void check_modes(const ModeLayout& layout, std::span<const std::size_t> modes) {
  if (modes.empty()) throw ValidationError("measurement needs at least one mode");
  std::vector<bool> seen(layout.mode_count(), false);
  for (auto m : modes) {
    if (m >= layout.mode_count()) throw ValidationError("measurement mode index out of range");
    if (seen[m]) throw ValidationError("measurement mode listed twice");
    seen[m] = true;
  }
}

}  // namespace

Povm::Povm(std::size_t dimension, std::vector<Effect> effects, std::vector<std::string> labels,
           double completeness_tol)
    : dimension_(dimension), effects_(std::move(effects)), labels_(std::move(labels)) {
  if (effects_.empty()) throw ValidationError("POVM has no effects");
  if (labels_.size() != effects_.size()) throw ValidationError("POVM needs one label per effect");
  const auto d = static_cast<Eigen::Index>(dimension_);
  Matrix sum = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < effects_.size(); ++x) {
    std::visit(overloaded{
                   [&](const DiagonalEffect& e) {
                     if (e.diagonal.size() != d) throw ValidationError("POVM effect has wrong dimension");
                     if (e.diagonal.size() > 0 && e.diagonal.minCoeff() < -1e-12)
                       throw ValidationError("POVM effect '" + labels_[x] + "' is not PSD");
                     sum.diagonal() += e.diagonal.cast<Complex>();
                   },
                   [&](const LowRankEffect& e) {
                     if (e.factor.rows() != d) throw ValidationError("POVM effect has wrong dimension");
                     const auto rows = support_of(e.factor);
                     for (auto i : rows)
                       for (auto j : rows) sum(i, j) += e.factor.row(j).dot(e.factor.row(i));
                   },
                   [&](const DenseEffect& e) {
                     if (e.matrix.rows() != d || e.matrix.cols() != d)
                       throw ValidationError("POVM effect has wrong dimension");
                     if ((e.matrix - e.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
                       throw ValidationError("POVM effect '" + labels_[x] + "' is not Hermitian");
                     Eigen::SelfAdjointEigenSolver<Matrix> es(e.matrix, Eigen::EigenvaluesOnly);
                     if (es.eigenvalues().minCoeff() < -1e-12)
                       throw ValidationError("POVM effect '" + labels_[x] + "' is not PSD");
                     sum += e.matrix;
                   }},
               effects_[x]);
  }
  const double residual = (sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (residual > completeness_tol)
    throw ValidationError("POVM effects do not sum to the identity (residual " +
                          std::to_string(residual) + ")");
}

Matrix Povm::dense_effect(std::size_t i) const {
  const auto d = static_cast<Eigen::Index>(dimension_);
  return std::visit(overloaded{[&](const DiagonalEffect& e) -> Matrix {
                                 Matrix m = Matrix::Zero(d, d);
                                 m.diagonal() = e.diagonal.cast<Complex>();
                                 return m;
                               },
                               [](const LowRankEffect& e) -> Matrix { return e.factor * e.factor.adjoint(); },
                               [](const DenseEffect& e) -> Matrix { return e.matrix; }},
                    effects_.at(i));
}

double Povm::expectation(std::size_t i, const Matrix& op) const {
  return std::visit(
      overloaded{[&](const DiagonalEffect& e) { return (op.diagonal().real().array() * e.diagonal.array()).sum(); },
                 [&](const LowRankEffect& e) {
                   const auto rows = support_of(e.factor);
                   double acc = 0.0;
                   for (Eigen::Index c = 0; c < e.factor.cols(); ++c) {
                     Complex s = 0.0;
                     for (auto a : rows) {
                       Complex t = 0.0;
                       for (auto b : rows) t += op(a, b) * e.factor(b, c);
                       s += std::conj(e.factor(a, c)) * t;
                     }
                     acc += s.real();
                   }
                   return acc;
                 },
                 [&](const DenseEffect& e) { return (op.transpose().cwiseProduct(e.matrix)).sum().real(); }},
      effects_.at(i));
}

RealVector Povm::expectations(const Matrix& op) const {
  if (op.rows() != static_cast<Eigen::Index>(dimension_) || op.cols() != op.rows())
    throw ValidationError("operator dimension does not match the POVM");
  RealVector out(static_cast<Eigen::Index>(effects_.size()));
  for (std::size_t i = 0; i < effects_.size(); ++i) out(static_cast<Eigen::Index>(i)) = expectation(i, op);
  return out;
}

std::string to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::schmidt: return "schmidt";
    case MeasurementKind::on_off: return "on_off";
    case MeasurementKind::photon_counting: return "photon_counting";
  }
  return "?";
}

MeasurementKind measurement_kind_from_string(const std::string& name) {
  if (name == "schmidt") return MeasurementKind::schmidt;
  if (name == "on_off") return MeasurementKind::on_off;
  if (name == "photon_counting") return MeasurementKind::photon_counting;
  throw ValidationError("unknown measurement '" + name + "' (expected schmidt, on_off or photon_counting)");
}

Povm schmidt_povm(const PureState& probe, const Tolerances& tol) {
  const auto& layout = probe.layout();
  const auto anc = layout.modes_with_role(ModeRole::ancilla);
  if (!layout.modes_with_role(ModeRole::environment).empty())
    throw ValidationError("Schmidt measurement expects a signal-ancilla probe without environment modes");
  const auto sig = layout.modes_with_role(ModeRole::signal);
  const auto table = bipartition_index(layout, anc, sig);
  const ModeLayout sig_layout = layout.subset(sig);
  const Eigen::Index dA = table.rows(), dS = table.cols();
  const auto d = static_cast<Eigen::Index>(layout.dimension());

  std::vector<Vector> chis;
  Vector col(dA);
  for (Eigen::Index s = 0; s < dS; ++s) {
    for (Eigen::Index a = 0; a < dA; ++a) col(a) = probe.amplitudes()(static_cast<Eigen::Index>(table(a, s)));
    const double n2 = col.squaredNorm();
    if (n2 <= tol.component) continue;
    const Vector chi = col / std::sqrt(n2);
    bool found = false;
    for (const auto& e : chis) {
      const double ov = std::abs(e.dot(chi));
      if (ov > 1.0 - 1e-8) {
        found = true;
        break;
      }
      if (ov > 1e-8)
        throw ValidationError(
            "probe is not number-diagonal: ancilla vectors of two signal patterns are neither "
            "parallel nor orthogonal");
    }
    if (!found) chis.push_back(chi);
  }
  if (chis.empty()) throw ValidationError("probe has no amplitude above the component tolerance");

  std::vector<Effect> effects;
  std::vector<std::string> labels;
  for (std::size_t j = 0; j < chis.size(); ++j)
    for (Eigen::Index s = 0; s < dS; ++s) {
      Matrix f = Matrix::Zero(d, 1);
      for (Eigen::Index a = 0; a < dA; ++a) f(static_cast<Eigen::Index>(table(a, s)), 0) = chis[j](a);
      effects.emplace_back(LowRankEffect{std::move(f)});
      labels.push_back("chi" + std::to_string(j) + "|q=(" +
                       join_occupations(sig_layout.occupations(static_cast<std::size_t>(s))) + ")");
    }

  const auto n = static_cast<Eigen::Index>(chis.size());
  if (n < dA) {
    Matrix basis(dA, n);
    for (Eigen::Index j = 0; j < n; ++j) basis.col(j) = chis[static_cast<std::size_t>(j)];
    const Matrix q = Eigen::HouseholderQR<Matrix>(basis).householderQ() * Matrix::Identity(dA, dA);
    const Matrix comp = q.rightCols(dA - n);
    Matrix f = Matrix::Zero(d, comp.cols() * dS);
    for (Eigen::Index s = 0; s < dS; ++s)
      for (Eigen::Index c = 0; c < comp.cols(); ++c)
        for (Eigen::Index a = 0; a < dA; ++a) f(static_cast<Eigen::Index>(table(a, s)), s * comp.cols() + c) = comp(a, c);
    effects.emplace_back(LowRankEffect{std::move(f)});
    labels.emplace_back("complement");
  }
  return Povm(layout.dimension(), std::move(effects), std::move(labels));
}

Povm on_off_povm(const ModeLayout& layout, std::span<const std::size_t> modes) {
  check_modes(layout, modes);
  const std::size_t outcomes = std::size_t{1} << modes.size();
  const auto d = static_cast<Eigen::Index>(layout.dimension());
  std::vector<RealVector> diag(outcomes, RealVector::Zero(d));
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    std::size_t code = 0;
    for (auto m : modes) code = (code << 1) | (layout.occupation(i, m) > 0 ? 1u : 0u);
    diag[code](static_cast<Eigen::Index>(i)) = 1.0;
  }
  std::vector<Effect> effects;
  std::vector<std::string> labels;
  for (std::size_t code = 0; code < outcomes; ++code) {
    std::string label;
    for (std::size_t p = 0; p < modes.size(); ++p) {
      if (p) label += '-';
      label += (code >> (modes.size() - 1 - p)) & 1u ? "on" : "off";
    }
    effects.emplace_back(DiagonalEffect{std::move(diag[code])});
    labels.push_back(std::move(label));
  }
  return Povm(layout.dimension(), std::move(effects), std::move(labels));
}

Povm photon_counting_povm(const ModeLayout& layout, std::span<const std::size_t> modes) {
  check_modes(layout, modes);
  const std::vector<std::size_t> sel(modes.begin(), modes.end());
  const ModeLayout sub = layout.subset(sel);
  const auto d = static_cast<Eigen::Index>(layout.dimension());
  std::vector<RealVector> diag(sub.dimension(), RealVector::Zero(d));
  std::vector<int> occ(modes.size());
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    for (std::size_t p = 0; p < modes.size(); ++p) occ[p] = layout.occupation(i, modes[p]);
    diag[sub.index_of(occ)](static_cast<Eigen::Index>(i)) = 1.0;
  }
  std::vector<Effect> effects;
  std::vector<std::string> labels;
  for (std::size_t x = 0; x < sub.dimension(); ++x) {
    effects.emplace_back(DiagonalEffect{std::move(diag[x])});
    labels.push_back("n=" + join_occupations(sub.occupations(x)));
  }
  return Povm(layout.dimension(), std::move(effects), std::move(labels));
}

Povm make_povm(MeasurementKind kind, const PureState& probe, const Tolerances& tol) {
  if (kind == MeasurementKind::schmidt) return schmidt_povm(probe, tol);
  std::vector<std::size_t> all(probe.layout().mode_count());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return kind == MeasurementKind::on_off ? on_off_povm(probe.layout(), all)
                                         : photon_counting_povm(probe.layout(), all);
}

RealVector outcome_distribution(const DensityOperator& rho, const Povm& povm, const Tolerances& tol) {
  if (rho.layout().dimension() != povm.dimension())
    throw ValidationError("state dimension " + std::to_string(rho.layout().dimension()) +
                          " does not match POVM dimension " + std::to_string(povm.dimension()));
  RealVector p = povm.expectations(rho.matrix());
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    if (p(x) < -1e-12)
      throw NumericalError("outcome '" + povm.label(static_cast<std::size_t>(x)) +
                           "' has negative probability " + std::to_string(p(x)));
    if (p(x) < 0.0) p(x) = 0.0;
  }
  const double total = p.sum();
  const double floor = 1.0 - std::max(tol.trunc, rho.trace_deficit() + 1e-12);
  if (total < floor || total > 1.0 + 1e-10)
    throw NumericalError("outcome probabilities sum to " + std::to_string(total));
  return p;
}

std::vector<std::uint64_t> sample(std::span<const double> dist, std::uint64_t shots,
                                  std::uint64_t seed, std::uint64_t stream) {
  if (shots < 1) throw ValidationError("shots must be at least 1");
  if (dist.empty()) throw ValidationError("cannot sample from an empty distribution");
  double mass = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("sampling distribution has a negative entry");
    mass += p;
  }
  if (!(mass > 0.0)) throw ValidationError("sampling distribution has zero mass");

  auto engine = stream_engine(seed, stream);
  std::vector<std::uint64_t> counts(dist.size(), 0);
  std::uint64_t remaining = shots;
  // Index of the last outcome with positive probability takes the remainder.
  std::size_t last = dist.size() - 1;
  while (dist[last] <= 0.0) --last;
  for (std::size_t i = 0; i < last && remaining > 0; ++i) {
    if (dist[i] <= 0.0) continue;
    const double q = std::clamp(dist[i] / mass, 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> binom(remaining, q);
    const auto k = binom(engine);
    counts[i] = k;
    remaining -= k;
    mass -= dist[i];
    if (mass <= 0.0) break;
  }
  counts[last] += remaining;
  return counts;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_outcome_csv(std::ostream& os, const Povm& povm, const RealVector& probabilities,
                       std::span<const std::uint64_t> counts) {
  if (static_cast<std::size_t>(probabilities.size()) != povm.size() ||
      (!counts.empty() && counts.size() != povm.size()))
    throw ValidationError("outcome table columns do not match the POVM");
  std::ostringstream buf;
  buf.precision(17);
  buf << "label,probability,count\n";
  for (std::size_t x = 0; x < povm.size(); ++x) {
    buf << csv_field(povm.label(x)) << ',' << probabilities(static_cast<Eigen::Index>(x)) << ',';
    if (!counts.empty()) buf << counts[x];
    buf << '\n';
  }
  os << buf.str();
}

}  // namespace lossmetro
