#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace oam::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void run(fftw_plan (*make)(std::vector<std::complex<double>>&, int, int),
         std::vector<std::complex<double>>& data, int rows, int cols) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = make(data, rows, cols);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

fftw_plan make2(std::vector<std::complex<double>>& d, int rows, int cols) {
  auto* p = reinterpret_cast<fftw_complex*>(d.data());
  return fftw_plan_dft_2d(rows, cols, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
}

fftw_plan make1(std::vector<std::complex<double>>& d, int n, int) {
  auto* p = reinterpret_cast<fftw_complex*>(d.data());
  return fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
}
}  // namespace

void fft2_forward(std::vector<std::complex<double>>& data, int rows, int cols) {
  run(make2, data, rows, cols);
}

void fft1_forward(std::vector<std::complex<double>>& data) {
  run(make1, data, static_cast<int>(data.size()), 1);
}

}  // namespace oam::detail
