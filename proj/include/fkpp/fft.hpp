#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fkpp {

/// Circular convolution with a fixed real kernel via FFTW (r2c/c2r).
/// Plans use FFTW_ESTIMATE so that results are bit-reproducible; execution
/// goes through the new-array interface with per-call scratch, so
/// convolve() may be called concurrently.
class CircularConvolver {
 public:
  explicit CircularConvolver(std::span<const double> kernel);
  ~CircularConvolver();
  CircularConvolver(const CircularConvolver&) = delete;
  CircularConvolver& operator=(const CircularConvolver&) = delete;
  CircularConvolver(CircularConvolver&& other) noexcept;
  CircularConvolver& operator=(CircularConvolver&&) = delete;

  std::size_t size() const { return n_; }

  /// out[i] = sum_m kernel[m] * in[(i - m) mod n] for i < out.size();
  /// `in` is zero-padded to the transform length.
  void convolve(std::span<const double> in, std::span<double> out) const;

  /// Convolver for the inverse of (diag * I - this), i.e. with symbol
  /// 1 / (diag - kernel_hat). Throws if the symbol is not strictly positive.
  CircularConvolver shifted_inverse(double diag) const;

 private:
  CircularConvolver(std::size_t n, std::vector<std::complex<double>> spectrum);
  void make_plans();

  std::size_t n_ = 0;
  std::vector<std::complex<double>> spectrum_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace fkpp
