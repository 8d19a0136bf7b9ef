#include "lossmetro/kernels.hpp"

#include <algorithm>
#include <vector>

#include <omp.h>

namespace lossmetro::kernels {

void apply_mode_map_omp(const Matrix& in, Matrix& out, const ModeGeometry& geom,
                        const LadderSet& left, const LadderSet& right) {
  const auto d = static_cast<Eigen::Index>(geom.dimension);
  const auto s = static_cast<Eigen::Index>(geom.stride);
  const auto levels = static_cast<std::size_t>(geom.cutoff) + 1;
  const int terms = static_cast<int>(std::min(left.coeff.size(), right.coeff.size()));

  std::vector<int> occ(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = static_cast<int>((i / geom.stride) % levels);

  out.resize(d, d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < d; ++j) {
    const int nj = occ[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < d; ++i) {
      const int ni = occ[static_cast<std::size_t>(i)];
      const int lmax = std::min({geom.cutoff - ni, geom.cutoff - nj, terms - 1});
      Complex acc = 0.0;
      for (int l = 0; l <= lmax; ++l) {
        acc += (left.coeff[l][ni + l] * right.coeff[l][nj + l]) * in(i + l * s, j + l * s);
      }
      out(i, j) = acc;
    }
  }
}

}  // namespace lossmetro::kernels
