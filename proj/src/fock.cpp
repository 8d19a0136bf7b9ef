#include "lossmetro/fock.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lossmetro/errors.hpp"

namespace lossmetro {

namespace {

constexpr std::size_t kMaxDimension = std::size_t{1} << 28;

int role_rank(ModeRole role) {
  switch (role) {
    case ModeRole::ancilla: return 0;
    case ModeRole::signal: return 1;
    case ModeRole::environment: return 2;
  }
  return 3;
}

std::vector<std::size_t> complement(std::size_t count, std::span<const std::size_t> picked) {
  std::vector<bool> used(count, false);
  for (auto m : picked) {
    if (m >= count) throw ValidationError("mode index " + std::to_string(m) + " out of range");
    if (used[m]) throw ValidationError("mode index " + std::to_string(m) + " listed twice");
    used[m] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t m = 0; m < count; ++m)
    if (!used[m]) rest.push_back(m);
  return rest;
}

}  // namespace

std::string to_string(ModeRole role) {
  switch (role) {
    case ModeRole::ancilla: return "ancilla";
    case ModeRole::signal: return "signal";
    case ModeRole::environment: return "environment";
  }
  return "unknown";
}

ModeRole mode_role_from_string(const std::string& name) {
  if (name == "ancilla") return ModeRole::ancilla;
  if (name == "signal") return ModeRole::signal;
  if (name == "environment") return ModeRole::environment;
  throw ValidationError("unknown mode role '" + name + "'");
}

// ---------------------------------------------------------------------------
// ModeLayout

ModeLayout::ModeLayout(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    auto& spec = modes_[m];
    if (spec.cutoff < 0) throw ValidationError("mode " + std::to_string(m) + ": negative cutoff");
    if (spec.role == ModeRole::ancilla) {
      spec.element = -1;
    } else if (spec.element < 0) {
      throw ValidationError("mode " + std::to_string(m) + ": " + to_string(spec.role) +
                            " mode needs a loss-element index >= 0");
    }
    if (m > 0) {
      const auto& prev = modes_[m - 1];
      const int r0 = role_rank(prev.role), r1 = role_rank(spec.role);
      if (r1 < r0 || (r1 == r0 && spec.element < prev.element)) {
        throw ValidationError(
            "modes must be ordered ancilla, signal by element, environment by element");
      }
    }
  }

  strides_.assign(modes_.size(), 1);
  dimension_ = 1;
  for (std::size_t m = modes_.size(); m-- > 0;) {
    strides_[m] = dimension_;
    const auto levels = static_cast<std::size_t>(modes_[m].cutoff) + 1;
    if (dimension_ > kMaxDimension / levels) {
      throw ValidationError("Hilbert dimension exceeds " + std::to_string(kMaxDimension));
    }
    dimension_ *= levels;
  }
}

int ModeLayout::element_count() const noexcept {
  int count = 0;
  for (const auto& spec : modes_)
    if (spec.role == ModeRole::signal) count = std::max(count, spec.element + 1);
  return count;
}

std::vector<std::size_t> ModeLayout::modes_with_role(ModeRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < modes_.size(); ++m)
    if (modes_[m].role == role) out.push_back(m);
  return out;
}

std::vector<std::size_t> ModeLayout::signal_modes_of(int element) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < modes_.size(); ++m)
    if (modes_[m].role == ModeRole::signal && modes_[m].element == element) out.push_back(m);
  return out;
}

std::vector<int> ModeLayout::occupations(std::size_t index) const {
  std::vector<int> occ(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) occ[m] = occupation(index, m);
  return occ;
}

std::size_t ModeLayout::index_of(std::span<const int> occupations) const {
  if (occupations.size() != modes_.size())
    throw ValidationError("occupation pattern has wrong length");
  std::size_t index = 0;
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    if (occupations[m] < 0 || occupations[m] > modes_[m].cutoff)
      throw ValidationError("occupation exceeds cutoff of mode " + std::to_string(m));
    index += static_cast<std::size_t>(occupations[m]) * strides_[m];
  }
  return index;
}

ModeLayout ModeLayout::subset(std::span<const std::size_t> keep) const {
  std::vector<ModeSpec> specs;
  specs.reserve(keep.size());
  for (auto m : keep) specs.push_back(modes_.at(m));
  return ModeLayout(std::move(specs));
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(ModeLayout layout, Vector amplitudes, double truncated_tail,
                     const Tolerances& tol)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)), truncated_tail_(truncated_tail) {
  if (static_cast<std::size_t>(amplitudes_.size()) != layout_.dimension())
    throw ValidationError("amplitude vector length does not match the layout dimension");
  const double norm2 = amplitudes_.squaredNorm();
  if (norm2 > 1.0 + 1e-10 || norm2 < 1.0 - tol.trunc - 1e-12) {
    throw ValidationError("state norm^2 " + std::to_string(norm2) + " outside [1 - " +
                          std::to_string(tol.trunc) + ", 1]");
  }
}

PureState PureState::unchecked(ModeLayout layout, Vector amplitudes, double truncated_tail) {
  PureState psi;
  if (static_cast<std::size_t>(amplitudes.size()) != layout.dimension())
    throw ValidationError("amplitude vector length does not match the layout dimension");
  psi.layout_ = std::move(layout);
  psi.amplitudes_ = std::move(amplitudes);
  psi.truncated_tail_ = truncated_tail;
  return psi;
}

PureState PureState::vacuum(ModeLayout layout) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  amps(0) = 1.0;
  return PureState(std::move(layout), std::move(amps));
}

PureState PureState::basis(ModeLayout layout, std::span<const int> occupations) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  amps(static_cast<Eigen::Index>(layout.index_of(occupations))) = 1.0;
  return PureState(std::move(layout), std::move(amps));
}

PureState PureState::normalized() const {
  const double n = amplitudes_.norm();
  if (n == 0.0) throw NumericalError("cannot normalize the zero vector");
  return unchecked(layout_, amplitudes_ / n, truncated_tail_);
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(ModeLayout layout, Matrix matrix, const Tolerances& tol)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  const auto d = static_cast<Eigen::Index>(layout_.dimension());
  if (matrix_.rows() != d || matrix_.cols() != d)
    throw ValidationError("density matrix shape does not match the layout dimension");
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol.hermitian)
    throw ValidationError("density matrix is not Hermitian (deviation " + std::to_string(asym) + ")");
  matrix_ = (0.5 * (matrix_ + matrix_.adjoint())).eval();
  const double tr = trace();
  if (tr > 1.0 + 1e-10 || tr < 1.0 - tol.trunc - 1e-12)
    throw ValidationError("density matrix trace " + std::to_string(tr) + " outside [1 - " +
                          std::to_string(tol.trunc) + ", 1]");
}

DensityOperator DensityOperator::from_pure(const PureState& psi) {
  DensityOperator rho;
  rho.layout_ = psi.layout();
  rho.matrix_ = psi.amplitudes() * psi.amplitudes().adjoint();
  return rho;
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Energies

namespace {

RealVector element_number_diagonal(const ModeLayout& layout, int element) {
  const auto modes = layout.signal_modes_of(element);
  RealVector diag = RealVector::Zero(static_cast<Eigen::Index>(layout.dimension()));
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    int n = 0;
    for (auto m : modes) n += layout.occupation(i, m);
    diag(static_cast<Eigen::Index>(i)) = n;
  }
  return diag;
}

}  // namespace

double energy(const PureState& psi, int element) {
  if (element < 0) throw ValidationError("negative element index");
  const RealVector n = element_number_diagonal(psi.layout(), element);
  return n.dot(psi.amplitudes().cwiseAbs2());
}

double energy(const DensityOperator& rho, int element) {
  if (element < 0) throw ValidationError("negative element index");
  const RealVector n = element_number_diagonal(rho.layout(), element);
  return n.dot(rho.matrix().diagonal().real());
}

std::vector<double> energies(const PureState& psi) {
  std::vector<double> out(static_cast<std::size_t>(psi.layout().element_count()));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = energy(psi, static_cast<int>(k));
  return out;
}

// ---------------------------------------------------------------------------
// Tensor product

PureState tensor(const PureState& a, const PureState& b) {
  const auto& la = a.layout();
  const auto& lb = b.layout();
  std::vector<ModeSpec> joined(la.modes().begin(), la.modes().end());
  joined.insert(joined.end(), lb.modes().begin(), lb.modes().end());

  std::vector<std::size_t> order(joined.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const int rx = role_rank(joined[x].role), ry = role_rank(joined[y].role);
    if (rx != ry) return rx < ry;
    return joined[x].element < joined[y].element;
  });

  std::vector<ModeSpec> sorted;
  sorted.reserve(joined.size());
  for (auto m : order) sorted.push_back(joined[m]);
  ModeLayout layout(std::move(sorted));

  // Strides of the concatenated (unsorted) product space.
  std::vector<std::size_t> concat_stride(joined.size());
  const std::size_t db = lb.dimension();
  for (std::size_t m = 0; m < la.mode_count(); ++m) concat_stride[m] = la.stride(m) * db;
  for (std::size_t m = 0; m < lb.mode_count(); ++m) concat_stride[la.mode_count() + m] = lb.stride(m);

  Vector amps(static_cast<Eigen::Index>(layout.dimension()));
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    std::size_t old_index = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos)
      old_index += static_cast<std::size_t>(layout.occupation(i, pos)) * concat_stride[order[pos]];
    const std::size_t ia = old_index / db, ib = old_index % db;
    amps(static_cast<Eigen::Index>(i)) =
        a.amplitudes()(static_cast<Eigen::Index>(ia)) * b.amplitudes()(static_cast<Eigen::Index>(ib));
  }
  return PureState::unchecked(std::move(layout), std::move(amps),
                              a.truncated_tail() + b.truncated_tail());
}

// ---------------------------------------------------------------------------
// Partial trace

Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> bipartition_index(
    const ModeLayout& layout, std::span<const std::size_t> kept,
    std::span<const std::size_t> dropped) {
  const ModeLayout lk = layout.subset(kept);
  const ModeLayout ld = layout.subset(dropped);
  std::vector<std::size_t> offset_k(lk.dimension()), offset_d(ld.dimension());
  for (std::size_t i = 0; i < lk.dimension(); ++i) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < kept.size(); ++p)
      off += static_cast<std::size_t>(lk.occupation(i, p)) * layout.stride(kept[p]);
    offset_k[i] = off;
  }
  for (std::size_t i = 0; i < ld.dimension(); ++i) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < dropped.size(); ++p)
      off += static_cast<std::size_t>(ld.occupation(i, p)) * layout.stride(dropped[p]);
    offset_d[i] = off;
  }
  Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> table(
      static_cast<Eigen::Index>(lk.dimension()), static_cast<Eigen::Index>(ld.dimension()));
  for (std::size_t j = 0; j < ld.dimension(); ++j)
    for (std::size_t i = 0; i < lk.dimension(); ++i)
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = offset_k[i] + offset_d[j];
  return table;
}

namespace {

Matrix reshape_bipartite(const PureState& psi, std::span<const std::size_t> first,
                         std::span<const std::size_t> second) {
  const auto table = bipartition_index(psi.layout(), first, second);
  Matrix out(table.rows(), table.cols());
  for (Eigen::Index j = 0; j < table.cols(); ++j)
    for (Eigen::Index i = 0; i < table.rows(); ++i)
      out(i, j) = psi.amplitudes()(static_cast<Eigen::Index>(table(i, j)));
  return out;
}

}  // namespace

DensityOperator partial_trace(const PureState& psi, std::span<const std::size_t> drop) {
  const auto keep = complement(psi.layout().mode_count(), drop);
  if (keep.empty()) throw ValidationError("partial trace would leave no modes");
  const Matrix m = reshape_bipartite(psi, keep, drop);
  const double deficit = 1.0 - psi.amplitudes().squaredNorm();
  return DensityOperator(psi.layout().subset(keep), m * m.adjoint(),
                         Tolerances{.trunc = std::max(1e-8, deficit + 1e-12)});
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> drop) {
  const auto& layout = rho.layout();
  const auto keep = complement(layout.mode_count(), drop);
  if (keep.empty()) throw ValidationError("partial trace would leave no modes");
  const auto table = bipartition_index(layout, keep, drop);
  const Eigen::Index dk = table.rows(), dd = table.cols();
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index j = 0; j < dk; ++j)
    for (Eigen::Index i = 0; i < dk; ++i) {
      Complex acc = 0.0;
      for (Eigen::Index e = 0; e < dd; ++e)
        acc += rho.matrix()(static_cast<Eigen::Index>(table(i, e)), static_cast<Eigen::Index>(table(j, e)));
      out(i, j) = acc;
    }
  return DensityOperator(layout.subset(keep), std::move(out),
                         Tolerances{.trunc = std::max(1e-8, rho.trace_deficit() + 1e-12)});
}

// ---------------------------------------------------------------------------
// Schmidt decomposition

SchmidtDecomposition schmidt_decompose(const PureState& psi,
                                       std::span<const std::size_t> first_modes,
                                       double rank_tol) {
  const auto second_modes = complement(psi.layout().mode_count(), first_modes);
  const Matrix m = reshape_bipartite(psi, first_modes, second_modes);

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtDecomposition out;
  out.first_layout = psi.layout().subset(first_modes);
  out.second_layout = psi.layout().subset(second_modes);
  const auto& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double w = s(i) * s(i);
    if (w < rank_tol) {
      out.dropped_weight += w;
      continue;
    }
    out.terms.push_back({w, svd.matrixU().col(i), svd.matrixV().col(i).conjugate()});
  }
  return out;
}

}  // namespace lossmetro
