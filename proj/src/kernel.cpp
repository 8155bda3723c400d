#include "attnflow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"

namespace attnflow {

namespace {

constexpr double kMaxBeta = 50.0;

// Sum' c_k T_k(t), first coefficient at half weight.
double clenshaw(const std::vector<double>& c, double t) {
  if (c.empty()) return 0.0;
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size() - 1; k >= 1; --k) {
    const double b0 = c[k] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return 0.5 * c[0] + t * b1 - b2;
}

std::vector<double> chebyshev_derivative(const std::vector<double>& c) {
  const std::size_t n = c.size();
  if (n < 2) return {0.0};
  std::vector<double> d(n, 0.0);
  for (std::size_t k = n - 1; k >= 1; --k) {
    const double next = (k + 1 < n) ? d[k + 1] : 0.0;
    d[k - 1] = next + 2.0 * static_cast<double>(k) * c[k];
  }
  d.pop_back();
  return d;
}

struct GaussRule {
  std::vector<double> x, w;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on the three-term recurrence.
GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

std::vector<double> funk_hecke_coeffs(const InteractionKernel& kernel, int d, int k_cut, int n) {
  const GaussRule rule = gauss_legendre(n);
  std::vector<double> acc(k_cut + 1, 0.0);
  std::vector<double> p(k_cut + 1);
  for (int i = 0; i < n; ++i) {
    const double phi = 0.5 * kPi * (rule.x[i] + 1.0);
    const double t = std::cos(phi);
    const double weight = 0.5 * kPi * rule.w[i] * std::pow(std::sin(phi), d - 2) * kernel.W(t);
    // Normalized Gegenbauer recurrence, P_k(1) = 1.
    p[0] = 1.0;
    if (k_cut >= 1) p[1] = t;
    for (int k = 2; k <= k_cut; ++k) {
      p[k] = ((2.0 * k + d - 4.0) * t * p[k - 1] - (k - 1.0) * p[k - 2]) / (k + d - 3.0);
    }
    for (int k = 0; k <= k_cut; ++k) acc[k] += weight * p[k];
  }
  const double surface = sphere_area(d - 1) / sphere_area(d);
  for (int k = 0; k <= k_cut; ++k) acc[k] *= surface * harmonic_dimension(d, k);
  return acc;
}

}  // namespace

InteractionKernel InteractionKernel::transformer(double beta) {
  if (!(beta > 0.0)) throw Error("transformer kernel requires beta > 0");
  if (beta > kMaxBeta) throw Error("transformer kernel requires beta <= 50 (exp overflow guard)");
  InteractionKernel k;
  k.beta_ = beta;
  return k;
}

InteractionKernel InteractionKernel::tabulated(const std::function<double(double)>& w, int nodes) {
  if (nodes < 2) throw Error("tabulated kernel needs at least 2 nodes");
  const int n = nodes;
  std::vector<double> f(n + 1);
  for (int j = 0; j <= n; ++j) f[j] = w(std::cos(kPi * j / n));
  std::vector<double> c(n + 1);
  for (int k = 0; k <= n; ++k) {
    double s = 0.0;
    for (int j = 0; j <= n; ++j) {
      const double term = f[j] * std::cos(kPi * static_cast<double>(j) * k / n);
      s += (j == 0 || j == n) ? 0.5 * term : term;
    }
    c[k] = 2.0 * s / n;
  }
  c[n] *= 0.5;
  InteractionKernel k;
  k.chebyshev_ = std::move(c);
  k.chebyshev_d1_ = chebyshev_derivative(k.chebyshev_);
  k.chebyshev_d2_ = chebyshev_derivative(k.chebyshev_d1_);
  return k;
}

double InteractionKernel::beta() const {
  if (!is_transformer()) throw Error("tabulated kernel has no inverse temperature");
  return beta_;
}

double InteractionKernel::W(double q) const {
  return is_transformer() ? std::exp(beta_ * q) / beta_ : clenshaw(chebyshev_, q);
}

double InteractionKernel::W_prime(double q) const {
  return is_transformer() ? std::exp(beta_ * q) : clenshaw(chebyshev_d1_, q);
}

double InteractionKernel::W_second(double q) const {
  return is_transformer() ? beta_ * std::exp(beta_ * q) : clenshaw(chebyshev_d2_, q);
}

double InteractionKernel::h(double theta) const { return W(std::cos(theta)); }

double InteractionKernel::h_prime(double theta) const {
  const double c = std::cos(theta), s = std::sin(theta);
  if (is_transformer()) return -std::exp(beta_ * c) * s;
  return -W_prime(c) * s;
}

double InteractionKernel::h_second(double theta) const {
  const double c = std::cos(theta), s = std::sin(theta);
  if (is_transformer()) return std::exp(beta_ * c) * (beta_ * s * s - c);
  return W_second(c) * s * s - W_prime(c) * c;
}

std::vector<double> InteractionKernel::cosine_coeffs(int kcut) const {
  if (kcut < 0) throw Error("cosine_coeffs: negative cutoff");
  if (is_transformer()) {
    std::vector<double> i = bessel_i_sequence(beta_, kcut);
    std::vector<double> a(kcut + 1);
    a[0] = i[0] / beta_;
    for (int k = 1; k <= kcut; ++k) a[k] = 2.0 * i[k] / beta_;
    return a;
  }
  // W(cos phi) = sum' c_k cos(k phi), so the cosine series is the Chebyshev series.
  std::vector<double> a(kcut + 1, 0.0);
  for (int k = 0; k <= kcut && k < static_cast<int>(chebyshev_.size()); ++k) a[k] = chebyshev_[k];
  a[0] *= 0.5;
  return a;
}

int InteractionKernel::force_truncation(double rel_tol) const {
  const int probe = is_transformer() ? static_cast<int>(std::ceil(beta_)) + 80
                                     : static_cast<int>(chebyshev_.size());
  const std::vector<double> a = cosine_coeffs(probe);
  double total = 0.0;
  for (int k = 1; k <= probe; ++k) total += k * std::abs(a[k]);
  double tail = 0.0;
  int K = probe;
  for (int k = probe; k >= 1; --k) {
    tail += k * std::abs(a[k]);
    if (tail > rel_tol * total) {
      K = k;
      break;
    }
  }
  return std::max(K, 2);
}

std::vector<double> bessel_i_sequence(double x, int kmax) {
  if (kmax < 0) throw Error("bessel_i_sequence: negative order");
  if (!(x >= 0.0) || x > kMaxBeta) throw Error("bessel_i_sequence: argument outside [0, 50]");
  std::vector<double> out(kmax + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int n = std::max(kmax, static_cast<int>(std::ceil(x))) + 10;
  const int start = 2 * (n + static_cast<int>(std::sqrt(200.0 * n)));
  double b_next = 0.0, b = 1e-300;
  double sum = 0.0;
  for (int k = start; k >= 1; --k) {
    const double b_prev = b_next + (2.0 * k / x) * b;
    b_next = b;
    b = b_prev;
    // b now holds the value at order k - 1; b_next at order k.
    if (k <= kmax) out[k] = b_next;
    sum += 2.0 * b_next;
    if (std::abs(b) > 1e250) {
      constexpr double s = 1e-250;
      b *= s;
      b_next *= s;
      sum *= s;
      for (int j = k; j <= kmax; ++j) out[j] *= s;
    }
  }
  out[0] = b;
  sum += b;
  const double scale = std::exp(x) / sum;
  for (double& v : out) v *= scale;
  return out;
}

CoefficientTable bessel_coeffs_d2(double beta, int k_cut) {
  if (!(beta > 0.0)) throw Error("bessel_coeffs_d2 requires beta > 0");
  if (k_cut < 2) throw Error("bessel_coeffs_d2 requires k_cut >= 2");
  CoefficientTable table;
  const std::vector<double> i = bessel_i_sequence(beta, k_cut + 40);
  table.w_hat.resize(k_cut + 1);
  table.w_hat[0] = i[0] / beta;
  for (int k = 1; k <= k_cut; ++k) table.w_hat[k] = 2.0 * i[k] / beta;
  double tail = 0.0;
  for (int k = k_cut + 1; k <= k_cut + 40; ++k) tail += 2.0 * i[k] / beta;
  const double scale = std::exp(beta) / beta;
  if (tail > 1e-8 * scale) {
    std::ostringstream os;
    os << "k_cut=" << k_cut << " truncates the series of exp(" << beta
       << " cos) with relative tail " << tail / scale << " > 1e-8";
    table.warnings.push_back(os.str());
  }
  return table;
}

double sphere_area(int n) {
  if (n < 1) throw Error("sphere_area requires n >= 1");
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

double harmonic_dimension(int d, int k) {
  if (d < 2 || k < 0) throw Error("harmonic_dimension: invalid arguments");
  if (k == 0) return 1.0;
  if (d == 2) return 2.0;
  // (2k + d - 2) / k * binom(k + d - 3, k - 1)
  const double log_binom = std::lgamma(k + d - 2.0) - std::lgamma(static_cast<double>(k)) -
                           std::lgamma(d - 1.0);
  return (2.0 * k + d - 2.0) / k * std::exp(log_binom);
}

double gegenbauer_normalized(int d, int k, double t) {
  if (d < 2 || k < 0) throw Error("gegenbauer_normalized: invalid arguments");
  double p0 = 1.0, p1 = t;
  if (k == 0) return p0;
  for (int j = 2; j <= k; ++j) {
    const double p2 = ((2.0 * j + d - 4.0) * t * p1 - (j - 1.0) * p0) / (j + d - 3.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> gegenbauer_coeffs(const InteractionKernel& kernel, int d, int k_cut,
                                      double tol) {
  if (d < 2) throw Error("gegenbauer_coeffs requires d >= 2");
  if (k_cut < 0) throw Error("gegenbauer_coeffs requires k_cut >= 0");
  int n = std::max(64, 2 * k_cut + 32);
  std::vector<double> prev = funk_hecke_coeffs(kernel, d, k_cut, n);
  double achieved = 0.0;
  for (int doubling = 0; doubling < 8; ++doubling) {
    n *= 2;
    std::vector<double> next = funk_hecke_coeffs(kernel, d, k_cut, n);
    double scale = 0.0, diff = 0.0;
    for (int k = 0; k <= k_cut; ++k) {
      scale = std::max(scale, std::abs(next[k]));
      diff = std::max(diff, std::abs(next[k] - prev[k]));
    }
    achieved = scale > 0.0 ? diff / scale : diff;
    if (achieved <= tol) return next;
    prev = std::move(next);
  }
  std::ostringstream os;
  os << "gegenbauer_coeffs did not converge: relative change " << achieved << " > " << tol;
  throw QuadratureError(os.str(), achieved);
}

GegenbauerSpectrum gamma_spectrum(std::vector<double> w_hat, int d, double gap_tol) {
  if (d < 2) throw Error("gamma_spectrum requires d >= 2");
  if (w_hat.size() < 3) throw Error("gamma_spectrum requires coefficients up to k >= 2");
  GegenbauerSpectrum s;
  s.dim_ = d;
  s.gamma_.assign(w_hat.size(), 0.0);
  for (std::size_t k = 1; k < w_hat.size(); ++k) {
    const double kk = static_cast<double>(k);
    s.gamma_[k] = kk * (kk + d - 2.0) * w_hat[k] / harmonic_dimension(d, static_cast<int>(k));
  }
  s.w_hat_ = std::move(w_hat);
  const auto it = std::max_element(s.gamma_.begin() + 1, s.gamma_.end());
  s.k_max_ = static_cast<int>(it - s.gamma_.begin());
  s.gamma_max_ = *it;
  double minus = s.gamma_[0];
  for (std::size_t k = 1; k < s.gamma_.size(); ++k) {
    if (static_cast<int>(k) != s.k_max_) minus = std::max(minus, s.gamma_[k]);
  }
  s.gamma_minus_ = minus;
  if (!(s.gamma_max_ > 0.0)) {
    throw AssumptionViolation("Assumption 2 violated: gamma_max <= 0 (uniform state is stable)");
  }
  if (!(s.gamma_max_ - s.gamma_minus_ > gap_tol)) {
    std::ostringstream os;
    os << "Assumption 2 violated: maximum gamma_max=" << s.gamma_max_
       << " is not unique (gap " << s.gamma_max_ - s.gamma_minus_ << ")";
    throw AssumptionViolation(os.str());
  }
  return s;
}

GegenbauerSpectrum spectrum_for(const InteractionKernel& kernel, int d, int k_cut) {
  if (d == 2 && kernel.is_transformer()) {
    return gamma_spectrum(bessel_coeffs_d2(kernel.beta(), k_cut).w_hat, d);
  }
  return gamma_spectrum(gegenbauer_coeffs(kernel, d, k_cut), d);
}

double dobrushin_constant(const InteractionKernel& kernel, int grid_points) {
  if (grid_points < 2) throw Error("dobrushin_constant needs at least 2 grid points");
  const double h = kTwoPi / grid_points;
  double best = -1.0;
  double best_theta = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double theta = i * h;
    const double v = std::abs(kernel.h_second(theta));
    if (v > best) {
      best = v;
      best_theta = theta;
    }
  }
  // Golden-section refinement of |h''| on the bracketing cells.
  constexpr double g = 0.6180339887498949;
  double a = best_theta - h, b = best_theta + h;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = std::abs(kernel.h_second(c)), fd = std::abs(kernel.h_second(d));
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = std::abs(kernel.h_second(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = std::abs(kernel.h_second(d));
    }
  }
  return std::max({best, fc, fd});
}

}  // namespace attnflow
