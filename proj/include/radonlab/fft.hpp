#pragma once

// Thin RAII layer over FFTW for in-place multi-dimensional complex transforms.

#include <complex>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "errors.hpp"
#include "numeric.hpp"

namespace radonlab {

enum class FftSign { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Unnormalised in-place DFT of a row-major array with the given dims.
/// forward:  X_j = sum_n x_n e(-j.n/L);  backward: X_j = sum_n x_n e(+j.n/L).
inline void fft_inplace(std::span<cplx> data, std::span<const std::size_t> dims, FftSign sign) {
  std::size_t vol = 1;
  std::vector<int> n;
  for (auto d : dims) {
    vol *= d;
    n.push_back(int(d));
  }
  if (vol != data.size()) throw domain_error("fft_inplace: dims do not match data size");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft(int(n.size()), n.data(), ptr, ptr, int(sign), FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("fft_inplace: FFTW planning failed");
  fftw_execute(plan);
  std::lock_guard lock(detail::fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace radonlab
