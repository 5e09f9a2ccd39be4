#pragma once

#include <cstddef>
#include <span>

#include "polycode/types.hpp"

// Thin FFTW wrapper. Plans are created with FFTW_ESTIMATE so the same size
// always runs the same algorithm, which keeps results bit-reproducible
// across runs and threads. Planning is serialized internally.
namespace polycode::fft {

// Forward DFT of `in` zero-padded (or truncated) to `n` points.
CVector forward(std::span<const cplx> in, std::size_t n);

// Inverse DFT including the 1/n normalization.
CVector inverse(std::span<const cplx> in);

// Smallest size >= n of the form 2^a 3^b 5^c.
std::size_t good_size(std::size_t n);

}  // namespace polycode::fft
