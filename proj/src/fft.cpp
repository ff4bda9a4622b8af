#include "fkpp/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <mutex>

#include "fkpp/error.hpp"

namespace fkpp {
namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

}  // namespace

void CircularConvolver::make_plans() {
  const std::size_t nc = n_ / 2 + 1;
  RealBuffer in = alloc_real(n_);
  ComplexBuffer out = alloc_complex(nc);
  std::lock_guard<std::mutex> lock(planner_mutex());
  forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), in.get(), out.get(), FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), out.get(), in.get(), FFTW_ESTIMATE);
}

CircularConvolver::CircularConvolver(std::size_t n, std::vector<std::complex<double>> spectrum)
    : n_(n), spectrum_(std::move(spectrum)) {
  make_plans();
}

CircularConvolver CircularConvolver::shifted_inverse(double diag) const {
  const double nd = static_cast<double>(n_);
  std::vector<std::complex<double>> inv(spectrum_.size());
  for (std::size_t k = 0; k < spectrum_.size(); ++k) {
    const double symbol = diag - nd * spectrum_[k].real();
    if (!(symbol > 0.0)) throw InvalidArgument("shifted circulant symbol is not positive");
    inv[k] = 1.0 / (nd * symbol);
  }
  return CircularConvolver(n_, std::move(inv));
}

CircularConvolver::CircularConvolver(std::span<const double> kernel) : n_(kernel.size()) {
  if (n_ < 2) throw InvalidArgument("convolution length must be at least 2");
  const std::size_t nc = n_ / 2 + 1;
  make_plans();
  RealBuffer in = alloc_real(n_);
  ComplexBuffer out = alloc_complex(nc);
  std::copy(kernel.begin(), kernel.end(), in.get());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), in.get(), out.get());
  spectrum_.resize(nc);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t k = 0; k < nc; ++k)
    spectrum_[k] = std::complex<double>(out.get()[k][0], out.get()[k][1]) * scale;
}

CircularConvolver::CircularConvolver(CircularConvolver&& other) noexcept
    : n_(other.n_),
      spectrum_(std::move(other.spectrum_)),
      forward_(other.forward_),
      backward_(other.backward_) {
  other.forward_ = nullptr;
  other.backward_ = nullptr;
}

CircularConvolver::~CircularConvolver() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void CircularConvolver::convolve(std::span<const double> in, std::span<double> out) const {
  if (in.size() > n_ || out.size() > n_) throw InvalidArgument("convolution operand too long");
  const std::size_t nc = n_ / 2 + 1;
  RealBuffer buf = alloc_real(n_);
  ComplexBuffer spec = alloc_complex(nc);
  std::copy(in.begin(), in.end(), buf.get());
  std::fill(buf.get() + in.size(), buf.get() + n_, 0.0);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), buf.get(), spec.get());
  for (std::size_t k = 0; k < nc; ++k) {
    const std::complex<double> z(spec.get()[k][0], spec.get()[k][1]);
    const std::complex<double> p = z * spectrum_[k];
    spec.get()[k][0] = p.real();
    spec.get()[k][1] = p.imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), spec.get(), buf.get());
  std::copy(buf.get(), buf.get() + out.size(), out.begin());
}

}  // namespace fkpp
