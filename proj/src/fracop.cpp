#include "fkpp/fracop.hpp"

#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fkpp/error.hpp"

namespace fkpp {
namespace {

// Beyond this index the weights use the asymptotic expansion of the second
// difference instead of differencing closed forms.
constexpr std::size_t kSeriesStart = 64;
// Images handled explicitly on each side of a torus before the
// Hurwitz-zeta tail takes over.
constexpr long kExplicitImages = 32;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgument("fractional order must lie in (0, 1)");
}

// Coefficients of 2 F^{(2p+2)}(j) / (2p+2)! relative to j^{-1-s-2p}.
std::vector<double> series_coefficients(double s) {
  std::vector<double> c{1.0};
  double prod = 1.0;
  double fact = 1.0;  // (2p+2)! / 2 for p = 0
  for (int p = 1; p <= 4; ++p) {
    prod *= (2 * p - 1 + s) * (2 * p + s);
    fact *= (2 * p + 1) * (2 * p + 2);
    c.push_back(prod / fact);
  }
  return c;
}

// E(s) = sum_{j >= 1} int_0^1 t (1 - t) (j + t)^{-1-s} dt: the defect of
// piecewise-linear interpolation of a quadratic against the kernel. Cells below
// kSeriesStart in closed form, the rest from the expansion about j + 1/2.
double interpolation_defect(double s) {
  auto prim = [s](double y, double j) {
    // antiderivative of (-y^2 + (2j+1) y - j(j+1)) y^{-1-s}
    const double p2 = std::pow(y, 2.0 - s) / (2.0 - s);
    const double p1 = s == 1.0 ? std::log(y) : std::pow(y, 1.0 - s) / (1.0 - s);
    const double p0 = -std::pow(y, -s) / s;
    return -p2 + (2.0 * j + 1.0) * p1 - j * (j + 1.0) * p0;
  };
  double e = 0.0;
  for (std::size_t j = 1; j < kSeriesStart; ++j) {
    const auto jd = static_cast<double>(j);
    e += prim(jd + 1.0, jd) - prim(jd, jd);
  }
  const double a = static_cast<double>(kSeriesStart) + 0.5;
  e += gsl_sf_hzeta(1.0 + s, a) / 6.0 +
       (1.0 + s) * (2.0 + s) / 240.0 * gsl_sf_hzeta(3.0 + s, a) +
       (1.0 + s) * (2.0 + s) * (3.0 + s) * (4.0 + s) / 26880.0 * gsl_sf_hzeta(5.0 + s, a);
  return e;
}

}  // namespace

double calpha(int d, double alpha) {
  if (d < 1) throw InvalidArgument("dimension must be at least 1");
  require_alpha(alpha);
  const double half_d = 0.5 * d;
  return std::pow(4.0, alpha) * std::tgamma(half_d + alpha) /
         (std::pow(std::numbers::pi, half_d) * std::abs(std::tgamma(-alpha)));
}

Stencil::Stencil(double alpha, double spacing)
    : alpha_(alpha), s_(2.0 * alpha), h_(spacing), c_alpha_(0.0), scale_(0.0), diagonal_(0.0) {
  require_alpha(alpha);
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  c_alpha_ = calpha(1, alpha);
  series_ = series_coefficients(s_);
  defect_ = interpolation_defect(s_);
  scale_ = c_alpha_ * std::pow(h_, -s_);
  diagonal_ = 2.0 * scale_ * (1.0 / s_ + 1.0 / (2.0 - s_) - defect_);
}

double Stencil::antiderivative(double t) const {
  if (s_ == 1.0) return -std::log(t);
  return std::pow(t, 1.0 - s_) / (s_ * (s_ - 1.0));
}

double Stencil::antiderivative_slope(double t) const { return -std::pow(t, -s_) / s_; }

double Stencil::first_difference(double m) const {
  if (s_ == 1.0) return std::log1p(-1.0 / m);
  return -std::pow(m, 1.0 - s_) * std::expm1((1.0 - s_) * std::log1p(-1.0 / m)) /
         (s_ * (s_ - 1.0));
}

double Stencil::normalized_weight(std::size_t j) const {
  if (j == 0) return 0.0;
  if (j == 1) return first_difference(2.0) + 1.0 / s_ + 1.0 / (2.0 - s_) - defect_;
  const auto jd = static_cast<double>(j);
  if (j < kSeriesStart) return first_difference(jd + 1.0) - first_difference(jd);
  const double inv2 = 1.0 / (jd * jd);
  double sum = 0.0;
  double pw = 1.0;
  for (double c : series_) {
    sum += c * pw;
    pw *= inv2;
  }
  return sum * std::pow(jd, -1.0 - s_);
}

double Stencil::weight(std::size_t j) const { return scaled(normalized_weight(j)); }

double Stencil::tail_sum(std::size_t m0) const {
  if (m0 == 0) throw InvalidArgument("tail_sum needs m0 >= 1");
  if (m0 == 1) return 0.5 * diagonal_;
  return -scaled(first_difference(static_cast<double>(m0)));
}

std::vector<double> Stencil::row(std::size_t n) const {
  std::vector<double> r(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) r[j] = weight(j);
  return r;
}

std::vector<double> Stencil::periodized_row(std::size_t n) const {
  if (n < 2) throw InvalidArgument("torus needs at least two nodes");
  const auto nl = static_cast<long>(n);
  const auto& coeff = series_;
  const double nd = static_cast<double>(n);
  // sum_{k >= k0} w(r + k n) from the asymptotic expansion of w.
  auto tail = [&](double r, long k0) {
    double sum = 0.0;
    for (std::size_t p = 0; p < coeff.size(); ++p) {
      const double q = 1.0 + s_ + 2.0 * static_cast<double>(p);
      sum += coeff[p] * std::pow(nd, -q) * gsl_sf_hzeta(q, r / nd + static_cast<double>(k0));
    }
    return sum;
  };
  std::vector<double> r(n, 0.0);
  for (long m = 0; m < nl; ++m) {
    double sum = 0.0;
    for (long k = -kExplicitImages; k <= kExplicitImages; ++k) {
      const long j = m + k * nl;
      if (j != 0) sum += normalized_weight(static_cast<std::size_t>(std::labs(j)));
    }
    // Remaining images: j = m + k n for k > K and |j| = (n - m) + k n for k >= K.
    sum += tail(static_cast<double>(m), kExplicitImages + 1);
    sum += tail(static_cast<double>(nl - m), kExplicitImages);
    r[m] = scaled(sum);
  }
  return r;
}

double Stencil::partial_hat(std::size_t j, double lo, double hi) const {
  const auto jd = static_cast<double>(j);
  double total = 0.0;
  // rising flank on [j-1, j]
  {
    const double a = std::max(lo, jd - 1.0);
    const double b = std::min(hi, jd);
    if (b > a) {
      auto g = [&](double t) {
        return (t - (jd - 1.0)) * antiderivative_slope(t) - antiderivative(t);
      };
      total += g(b) - g(a);
    }
  }
  // falling flank on [j, j+1]
  {
    const double a = std::max(lo, jd);
    const double b = std::min(hi, jd + 1.0);
    if (b > a) {
      auto g = [&](double t) {
        return ((jd + 1.0) - t) * antiderivative_slope(t) + antiderivative(t);
      };
      total += g(b) - g(a);
    }
  }
  return total;
}

std::vector<double> Stencil::truncated_row(double radius) const {
  const double tau = radius / h_;
  if (tau < 2.0 - 1e-12) throw InvalidArgument("truncation radius must be at least two cells");
  const auto last = static_cast<std::size_t>(std::ceil(tau - 1e-12));
  std::vector<double> r(last + 1, 0.0);
  for (std::size_t j = 1; j <= last; ++j) {
    const auto jd = static_cast<double>(j);
    if (jd + 1.0 <= tau) {
      r[j] = weight(j);
    } else {
      r[j] = scaled(partial_hat(j, std::max(1.0, jd - 1.0), tau));
    }
  }
  return r;
}

double Stencil::complement_mass(double radius) const {
  return 2.0 * c_alpha_ * std::pow(radius, -s_) / s_;
}

DiscreteFracOp::DiscreteFracOp(const GridDomain& dom, double alpha, Exterior exterior)
    : domain_(std::make_shared<const GridDomain>(dom)),
      stencil_(alpha, dom.spacing),
      exterior_(exterior),
      n_(dom.size()),
      diag_(0.0),
      row_(exterior == Exterior::dirichlet ? stencil_.row(n_) : stencil_.periodized_row(n_)),
      conv_([&] {
        if (exterior_ == Exterior::periodic) return CircularConvolver(row_);
        std::vector<double> kernel(2 * n_, 0.0);
        for (std::size_t j = 1; j < n_; ++j) {
          kernel[j] = row_[j];
          kernel[2 * n_ - j] = row_[j];
        }
        return CircularConvolver(kernel);
      }()) {
  diag_ = exterior_ == Exterior::dirichlet ? stencil_.diagonal() : stencil_.diagonal() - row_[0];
}

double DiscreteFracOp::coupling(std::size_t i, std::size_t j) const {
  if (exterior_ == Exterior::dirichlet) return row_[i > j ? i - j : j - i];
  return row_[(i + n_ - j) % n_];
}

double DiscreteFracOp::exterior_tail(std::size_t i) const {
  if (exterior_ == Exterior::periodic) return 0.0;
  return stencil_.tail_sum(n_ - i) + stencil_.tail_sum(i + 1);
}

void DiscreteFracOp::apply(std::span<const double> u, std::span<double> out) const {
  if (u.size() != n_ || out.size() != n_) throw InvalidArgument("field size does not match operator");
  conv_.convolve(u, out);
  const double d = stencil_.diagonal();
  for (std::size_t i = 0; i < n_; ++i) out[i] = d * u[i] - out[i];
}

Field DiscreteFracOp::apply(std::span<const double> u) const {
  Field out(n_);
  apply(u, out);
  return out;
}

void DiscreteFracOp::apply_window_only(std::span<const double> u, std::span<double> out) const {
  apply(u, out);
  if (exterior_ == Exterior::periodic) return;
  for (std::size_t i = 0; i < n_; ++i) out[i] -= exterior_tail(i) * u[i];
}

void DiscreteFracOp::apply_masked(std::span<const double> u, const NodeMask& mask,
                                  std::span<double> out) const {
  if (u.size() != n_ || out.size() != n_ || mask.size() != n_)
    throw InvalidArgument("field size does not match operator");
  Field tmp(n_);
  for (std::size_t i = 0; i < n_; ++i) tmp[i] = mask[i] ? u[i] : 0.0;
  apply(tmp, out);
  for (std::size_t i = 0; i < n_; ++i)
    if (!mask[i]) out[i] = 0.0;
}

CircularConvolver DiscreteFracOp::embedded_inverse(double shift) const {
  return conv_.shifted_inverse(stencil_.diagonal() + shift);
}

TruncatedFracOp::TruncatedFracOp(const Stencil& stencil, double radius)
    : radius_(radius),
      diag_(0.0),
      complement_(stencil.complement_mass(radius)),
      row_(stencil.truncated_row(radius)) {
  for (std::size_t j = 1; j < row_.size(); ++j) diag_ += 2.0 * row_[j];
}

void TruncatedFracOp::apply(std::span<const double> u, std::span<double> out) const {
  if (u.size() != out.size()) throw InvalidArgument("field size mismatch");
  const std::size_t n = u.size();
  const std::size_t reach = row_.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag_ * u[i];
    const std::size_t lo = i >= reach ? i - reach : 0;
    const std::size_t hi = std::min(n - 1, i + reach);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      acc -= row_[i > j ? i - j : j - i] * u[j];
    }
    out[i] = acc;
  }
}

TruncatedApply apply_truncated(const DiscreteFracOp& op, std::span<const double> u, double radius) {
  if (u.size() != op.size()) throw InvalidArgument("field size does not match operator");
  TruncatedFracOp trunc(op.stencil(), radius);
  TruncatedApply result{Field(u.size()), trunc.complement_mass()};
  trunc.apply(u, result.value);
  return result;
}

}  // namespace fkpp
