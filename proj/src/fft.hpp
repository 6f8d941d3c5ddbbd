#pragma once

#include <complex>
#include <vector>

namespace oam::detail {

// Forward (e^{-i}) DFT, unnormalized. Row-major data of shape rows x cols.
void fft2_forward(std::vector<std::complex<double>>& data, int rows, int cols);
void fft1_forward(std::vector<std::complex<double>>& data);

}  // namespace oam::detail
