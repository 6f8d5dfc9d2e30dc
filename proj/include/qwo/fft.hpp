#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace qwo::fft {

enum class Direction { forward, backward };

// In-place unnormalized DFT over all axes of a row-major array of `rank`
// equal axes of length n. Backward transforms are not scaled.
void transform(std::span<std::complex<double>> data, std::size_t n, std::size_t rank,
               Direction dir);

// In-place unnormalized DFT along a single axis.
void transform_axis(std::span<std::complex<double>> data, std::size_t n, std::size_t rank,
                    std::size_t axis, Direction dir);

}  // namespace qwo::fft
