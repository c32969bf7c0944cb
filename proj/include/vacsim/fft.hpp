#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "vacsim/error.hpp"

namespace vacsim {

namespace fft_detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct api;

template <>
struct api<double> {
  using plan = fftw_plan;
  using complex = fftw_complex;
  static plan r2c(int n0, int n1, int n2, double* in, complex* out, unsigned f) {
    return fftw_plan_dft_r2c_3d(n0, n1, n2, in, out, f);
  }
  static plan c2r(int n0, int n1, int n2, complex* in, double* out, unsigned f) {
    return fftw_plan_dft_c2r_3d(n0, n1, n2, in, out, f);
  }
  static void exec_r2c(plan p, double* in, complex* out) { fftw_execute_dft_r2c(p, in, out); }
  static void exec_c2r(plan p, complex* in, double* out) { fftw_execute_dft_c2r(p, in, out); }
  static void destroy(plan p) { fftw_destroy_plan(p); }
};

template <>
struct api<float> {
  using plan = fftwf_plan;
  using complex = fftwf_complex;
  static plan r2c(int n0, int n1, int n2, float* in, complex* out, unsigned f) {
    return fftwf_plan_dft_r2c_3d(n0, n1, n2, in, out, f);
  }
  static plan c2r(int n0, int n1, int n2, complex* in, float* out, unsigned f) {
    return fftwf_plan_dft_c2r_3d(n0, n1, n2, in, out, f);
  }
  static void exec_r2c(plan p, float* in, complex* out) { fftwf_execute_dft_r2c(p, in, out); }
  static void exec_c2r(plan p, complex* in, float* out) { fftwf_execute_dft_c2r(p, in, out); }
  static void destroy(plan p) { fftwf_destroy_plan(p); }
};

} // namespace fft_detail

/// 3D real-to-complex transform pair, unnormalized. The half-spectrum has shape
/// n0 x n1 x (n2/2 + 1). Plans accept any arrays of the right size.
template <class T>
class RealFFT3 {
  using A = fft_detail::api<T>;

public:
  explicit RealFFT3(std::array<int, 3> n) : n_(n) {
    std::vector<T> r(real_size());
    std::vector<std::complex<T>> c(complex_size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lk(fft_detail::planner_mutex());
    fwd_ = A::r2c(n[0], n[1], n[2], r.data(), reinterpret_cast<typename A::complex*>(c.data()), flags);
    bwd_ = A::c2r(n[0], n[1], n[2], reinterpret_cast<typename A::complex*>(c.data()), r.data(), flags);
    if (!fwd_ || !bwd_) throw Error("FFTW planning failed");
  }
  RealFFT3(const RealFFT3&) = delete;
  RealFFT3& operator=(const RealFFT3&) = delete;
  ~RealFFT3() {
    std::lock_guard lk(fft_detail::planner_mutex());
    if (fwd_) A::destroy(fwd_);
    if (bwd_) A::destroy(bwd_);
  }

  const std::array<int, 3>& shape() const { return n_; }
  std::size_t real_size() const { return std::size_t(n_[0]) * n_[1] * n_[2]; }
  int half_last() const { return n_[2] / 2 + 1; }
  std::size_t complex_size() const { return std::size_t(n_[0]) * n_[1] * half_last(); }

  /// out[k] = sum_x in[x] exp(-2 pi i k.x / n). Input is left untouched.
  void forward(const T* in, std::complex<T>* out) const {
    A::exec_r2c(fwd_, const_cast<T*>(in), reinterpret_cast<typename A::complex*>(out));
  }
  /// out[x] = sum_k in[k] exp(+2 pi i k.x / n). Overwrites the input.
  void backward(std::complex<T>* in, T* out) const {
    A::exec_c2r(bwd_, reinterpret_cast<typename A::complex*>(in), out);
  }

private:
  std::array<int, 3> n_;
  typename A::plan fwd_ = nullptr;
  typename A::plan bwd_ = nullptr;
};

/// Signed FFT frequency index for bin j of n.
inline int fft_index(int j, int n) { return j <= n / 2 ? j : j - n; }

} // namespace vacsim
