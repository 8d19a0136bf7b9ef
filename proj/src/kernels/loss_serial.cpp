#include "lossmetro/kernels.hpp"

#include <algorithm>

namespace lossmetro::kernels {

void apply_mode_map_serial(const Matrix& in, Matrix& out, const ModeGeometry& geom,
                           const LadderSet& left, const LadderSet& right) {
  const auto d = static_cast<Eigen::Index>(geom.dimension);
  const auto s = static_cast<Eigen::Index>(geom.stride);
  const auto levels = static_cast<std::size_t>(geom.cutoff) + 1;
  const int terms = static_cast<int>(std::min(left.coeff.size(), right.coeff.size()));

  out = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const int nj = static_cast<int>((static_cast<std::size_t>(j) / geom.stride) % levels);
    for (Eigen::Index i = 0; i < d; ++i) {
      const int ni = static_cast<int>((static_cast<std::size_t>(i) / geom.stride) % levels);
      const Complex v = in(i, j);
      const int lmax = std::min({ni, nj, terms - 1});
      for (int l = 0; l <= lmax; ++l) {
        out(i - l * s, j - l * s) += (left.coeff[l][ni] * right.coeff[l][nj]) * v;
      }
    }
  }
}

void apply_ladder(const Vector& in, Vector& out, const ModeGeometry& geom,
                  std::span<const double> coeff, int shift) {
  const auto d = static_cast<Eigen::Index>(geom.dimension);
  const auto levels = static_cast<std::size_t>(geom.cutoff) + 1;
  const auto offset = static_cast<Eigen::Index>(geom.stride) * shift;
  out = Vector::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const int n = static_cast<int>((static_cast<std::size_t>(i) / geom.stride) % levels);
    if (n + shift > geom.cutoff) continue;
    out(i) = coeff[static_cast<std::size_t>(n + shift)] * in(i + offset);
  }
}

}  // namespace lossmetro::kernels
