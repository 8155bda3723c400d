#include "attnflow/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "attnflow/error.hpp"

namespace attnflow {

FourierModes::FourierModes(std::vector<std::complex<double>> nonnegative)
    : coeffs_(std::move(nonnegative)) {}

std::complex<double> FourierModes::operator[](int k) const {
  const int a = k < 0 ? -k : k;
  if (a > k_cut()) return {0.0, 0.0};
  const auto c = coeffs_[static_cast<std::size_t>(a)];
  return k < 0 ? std::conj(c) : c;
}

FourierModes& FourierModes::operator+=(const FourierModes& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

FourierModes& FourierModes::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

FourierModes operator+(FourierModes a, const FourierModes& b) { return a += b; }
FourierModes operator*(double s, FourierModes a) { return a *= s; }

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {
// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  int n = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(int n) : impl_(std::make_unique<Impl>()) {
  if (n < 2) throw Error("RealFft requires n >= 2");
  impl_->n = n;
  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(static_cast<std::size_t>(n));
  impl_->spec = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  impl_->r2c = fftw_plan_dft_r2c_1d(n, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->c2r = fftw_plan_dft_c2r_1d(n, impl_->spec, impl_->real, FFTW_ESTIMATE);
  if (!impl_->r2c || !impl_->c2r) throw Error("FFTW planning failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

int RealFft::size() const { return impl_->n; }

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = impl_->n;
  if (static_cast<int>(in.size()) != n || static_cast<int>(out.size()) != n / 2 + 1) {
    throw DimensionMismatch("RealFft::forward: buffer size mismatch");
  }
  std::copy(in.begin(), in.end(), impl_->real);
  fftw_execute(impl_->r2c);
  std::memcpy(static_cast<void*>(out.data()), impl_->spec,
              sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  const int n = impl_->n;
  if (static_cast<int>(out.size()) != n || static_cast<int>(in.size()) != n / 2 + 1) {
    throw DimensionMismatch("RealFft::inverse: buffer size mismatch");
  }
  // c2r destroys its input, so it always runs on the internal buffer.
  std::memcpy(impl_->spec, static_cast<const void*>(in.data()),
              sizeof(fftw_complex) * static_cast<std::size_t>(n / 2 + 1));
  fftw_execute(impl_->c2r);
  std::copy(impl_->real, impl_->real + n, out.begin());
}

}  // namespace attnflow
