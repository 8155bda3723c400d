#pragma once

#include <functional>
#include <string>
#include <vector>

namespace attnflow {

// Interaction kernel W on [-1, 1]. On the circle the angular profile is
// h(theta) = W(cos theta); for the transformer kernel W(q) = exp(beta q) / beta.
class InteractionKernel {
 public:
  static InteractionKernel transformer(double beta);

  // Samples w at `nodes` + 1 Chebyshev-Lobatto points and interpolates the
  // resulting Chebyshev series. Intended for smooth W.
  static InteractionKernel tabulated(const std::function<double(double)>& w, int nodes = 128);

  bool is_transformer() const { return chebyshev_.empty(); }
  // Inverse temperature; throws for tabulated kernels.
  double beta() const;

  double W(double q) const;
  double W_prime(double q) const;
  double W_second(double q) const;

  double h(double theta) const;
  double h_prime(double theta) const;
  double h_second(double theta) const;

  // Coefficients a_0..a_kcut with h(theta) = sum_k a_k cos(k theta).
  std::vector<double> cosine_coeffs(int kcut) const;

  // Smallest K such that sum_{k>K} k |a_k| is below rel_tol times the full sum.
  int force_truncation(double rel_tol = 1e-16) const;

 private:
  InteractionKernel() = default;

  double beta_ = 0.0;
  std::vector<double> chebyshev_;
  std::vector<double> chebyshev_d1_;
  std::vector<double> chebyshev_d2_;
};

// I_0(x), ..., I_kmax(x) by Miller's downward recurrence, normalized with
// I_0 + 2 sum_k I_k = e^x. Requires 0 <= x <= 50.
std::vector<double> bessel_i_sequence(double x, int kmax);

struct CoefficientTable {
  std::vector<double> w_hat;
  std::vector<std::string> warnings;
};

// Cosine-series coefficients of exp(beta cos theta) / beta:
// W_hat_0 = I_0(beta) / beta, W_hat_k = 2 I_k(beta) / beta.
CoefficientTable bessel_coeffs_d2(double beta, int k_cut);

// Dimension of the space of degree-k spherical harmonics on S^{d-1}.
double harmonic_dimension(int d, int k);
// Surface area of S^{n-1} (the unit sphere in R^n).
double sphere_area(int n);
// Gegenbauer polynomial of degree k for S^{d-1}, normalized so P_k(1) = 1.
double gegenbauer_normalized(int d, int k, double t);

// Coefficients W_hat_k of W(t) = sum_k W_hat_k P_k(t) with P_k(1) = 1,
// computed from the Funk-Hecke eigenvalues by Gauss-Legendre quadrature in
// the polar angle. Node count is doubled until the relative change is <= tol.
std::vector<double> gegenbauer_coeffs(const InteractionKernel& kernel, int d, int k_cut,
                                      double tol = 1e-8);

// Growth rates of the linearized mean-field flow around the uniform measure,
// with the argmax (k_max) and the runner-up rate.
class GegenbauerSpectrum {
 public:
  int dim() const { return dim_; }
  int k_cut() const { return static_cast<int>(w_hat_.size()) - 1; }
  const std::vector<double>& w_hat() const { return w_hat_; }
  const std::vector<double>& gamma() const { return gamma_; }
  double gamma(int k) const { return k <= k_cut() ? gamma_[k] : 0.0; }
  int k_max() const { return k_max_; }
  double gamma_max() const { return gamma_max_; }
  double gamma_minus() const { return gamma_minus_; }

 private:
  friend GegenbauerSpectrum gamma_spectrum(std::vector<double> w_hat, int d, double gap_tol);

  int dim_ = 2;
  std::vector<double> w_hat_;
  std::vector<double> gamma_;
  int k_max_ = 0;
  double gamma_max_ = 0.0;
  double gamma_minus_ = 0.0;
};

// gamma_k = k (k + d - 2) W_hat_k / N(d, k). Throws AssumptionViolation when
// gamma_max <= 0 or gamma_max - gamma_minus <= gap_tol.
GegenbauerSpectrum gamma_spectrum(std::vector<double> w_hat, int d, double gap_tol = 1e-10);

// Bessel route for the d = 2 transformer kernel, quadrature otherwise.
GegenbauerSpectrum spectrum_for(const InteractionKernel& kernel, int d, int k_cut = 128);

// max |h''| over a uniform grid on [0, 2pi), refined by golden-section search.
double dobrushin_constant(const InteractionKernel& kernel, int grid_points = 10000);

}  // namespace attnflow
