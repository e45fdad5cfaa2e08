// Compiled with -ffast-math so the logarithm below maps onto the vector math
// library. Keep this file limited to the draw kernel.

#include <cmath>

#include "comp/montecarlo.hpp"
#include "comp/rng.hpp"

namespace comp::detail {

void exponential_block(std::uint64_t key, std::uint64_t first, double* out) noexcept {
  alignas(64) double u[kDrawBlock];
  for (std::size_t i = 0; i < kDrawBlock; ++i) u[i] = rng::to_open_unit(rng::at(key, first + i));
#pragma omp simd aligned(u : 64)
  for (std::size_t i = 0; i < kDrawBlock; ++i) out[i] = -std::log(u[i]);
}

}  // namespace comp::detail
