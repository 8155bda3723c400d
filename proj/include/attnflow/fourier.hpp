#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace attnflow {

// Fourier coefficients g_k = int_0^{2pi} e^{-ik theta} g(theta) d theta for
// 0 <= k <= k_cut. Real fields only: g_{-k} = conj(g_k).
//
// The same convention is used for measures (g_k = int e^{-ik theta} d mu),
// so a density field and the empirical measure it approximates share modes.
class FourierModes {
 public:
  FourierModes() = default;
  explicit FourierModes(std::vector<std::complex<double>> nonnegative);

  int k_cut() const { return static_cast<int>(coeffs_.size()) - 1; }
  // Mode k for any integer k; zero beyond the cutoff.
  std::complex<double> operator[](int k) const;
  std::complex<double>& at(int k) { return coeffs_.at(static_cast<std::size_t>(k)); }
  std::span<const std::complex<double>> nonnegative() const { return coeffs_; }

  FourierModes& operator+=(const FourierModes& other);
  FourierModes& operator*=(double s);

 private:
  std::vector<std::complex<double>> coeffs_;
};

FourierModes operator+(FourierModes a, const FourierModes& b);
FourierModes operator*(double s, FourierModes a);

// Real-to-complex FFT of fixed length. One instance per thread.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const;
  // out[k] = sum_m in[m] e^{-2 pi i k m / n}, k = 0..n/2.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // out[m] = sum_k in[k] e^{2 pi i k m / n} over the Hermitian extension (unnormalized).
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

bool is_power_of_two(int n);

}  // namespace attnflow
