#pragma once

// Single-mode ladder maps on dense operators. These are the hot loops of the
// loss channel: every Kraus application, and every derivative of one, runs
// through apply_mode_map(). Two implementations are kept side by side:
//
//   *_serial  scatter loop over input entries, the reference used in tests
//   *_omp     gather loop over output columns, parallel with OpenMP
//
// Each output entry of the OpenMP kernel is summed by a single thread in a
// fixed order, so results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "lossmetro/fock.hpp"

namespace lossmetro::kernels {

/// A family of single-mode operators {op_l}, where op_l lowers the photon
/// number by l:  <n - l| op_l |n> = coeff[l][n]  for l <= n <= cutoff.
struct LadderSet {
  int cutoff = 0;
  std::vector<std::vector<double>> coeff;  // coeff[l].size() == cutoff + 1
};

/// Where one mode sits inside a dense layout.
struct ModeGeometry {
  std::size_t dimension = 1;
  std::size_t stride = 1;
  int cutoff = 0;

  static ModeGeometry of(const ModeLayout& layout, std::size_t mode) {
    return {layout.dimension(), layout.stride(mode), layout.mode(mode).cutoff};
  }
};

/// out = sum_l left_l * in * right_l^T, with both ladder families acting on
/// the same mode. The coefficients are real, so right_l^T = right_l^dagger.
void apply_mode_map_serial(const Matrix& in, Matrix& out, const ModeGeometry& geom,
                           const LadderSet& left, const LadderSet& right);
void apply_mode_map_omp(const Matrix& in, Matrix& out, const ModeGeometry& geom,
                        const LadderSet& left, const LadderSet& right);

/// Dispatches to the OpenMP kernel.
inline void apply_mode_map(const Matrix& in, Matrix& out, const ModeGeometry& geom,
                           const LadderSet& left, const LadderSet& right) {
  apply_mode_map_omp(in, out, geom, left, right);
}

/// out = op_l * in for a single ladder operator given by its coefficients.
void apply_ladder(const Vector& in, Vector& out, const ModeGeometry& geom,
                  std::span<const double> coeff, int shift);

}  // namespace lossmetro::kernels
