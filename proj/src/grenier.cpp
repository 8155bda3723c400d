#include "attnflow/grenier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"

namespace attnflow {

namespace {

using cplx = std::complex<double>;

// Modes 0..cut of each g_j, j = 1..K, stored as e^{-gamma_m s} g_{j,m}.
using State = std::vector<std::vector<cplx>>;

struct Hierarchy {
  int K;
  int k;       // k_max
  int cut;     // K * k_max
  double gmax;
  std::vector<double> gamma;  // gamma_m, m = 0..cut
  std::vector<double> a;      // cosine coefficients a_m

  cplx g1(int m, double s) const {
    return m == k ? cplx(kPi * std::exp(gmax * s), 0.0) : cplx{};
  }

  // Modes of g_j at time s from the scaled state.
  std::vector<cplx> modes(const State& v, int j, double s) const {
    std::vector<cplx> out(cut + 1);
    if (j == 1) {
      for (int m = 0; m <= cut; ++m) out[m] = g1(m, s);
      return out;
    }
    for (int m = 0; m <= cut; ++m) out[m] = v[j - 1][m] * std::exp(gamma[m] * s);
    return out;
  }

  static cplx mode_at(const std::vector<cplx>& g, int m) {
    const int n = static_cast<int>(g.size()) - 1;
    if (m > n || m < -n) return {};
    return m >= 0 ? g[m] : std::conj(g[-m]);
  }

  // d/ds of the scaled state.
  State derivative(const State& v, double s) const {
    State dv(K, std::vector<cplx>(cut + 1));
    std::vector<std::vector<cplx>> g(K + 1), vel(K + 1);
    for (int j = 1; j < K; ++j) {
      g[j] = modes(v, j, s);
      vel[j].resize(cut + 1);
      // (h' * g)_q = i q pi a_q g_q
      for (int q = 0; q <= cut; ++q) vel[j][q] = cplx(0.0, q * kPi * a[q]) * g[j][q];
    }
    for (int j = 2; j <= K; ++j) {
      for (int m = 0; m <= cut; ++m) {
        cplx prod{};
        for (int l = 1; l < j; ++l) {
          for (int p = -cut; p <= cut; ++p) {
            prod += mode_at(g[l], p) * mode_at(vel[j - l], m - p);
          }
        }
        const cplx src = cplx(0.0, -m) * prod / kTwoPi;
        dv[j - 1][m] = src * std::exp(-gamma[m] * s);
      }
    }
    return dv;
  }
};

void axpy(State& out, const State& x, double h, const State& d) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t m = 0; m < out[j].size(); ++m) out[j][m] = x[j][m] + h * d[j][m];
  }
}

}  // namespace

std::vector<FourierModes> grenier_terms(int K, const GegenbauerSpectrum& spectrum,
                                        const InteractionKernel& kernel, double t,
                                        double max_dt) {
  if (K < 1) throw Error("grenier_terms: K must be at least 1");
  if (t < 0.0) throw Error("grenier_terms: negative time");
  if (spectrum.dim() != 2) throw DimensionMismatch("grenier_terms: circle spectrum required");
  Hierarchy H;
  H.K = K;
  H.k = spectrum.k_max();
  H.cut = K * H.k;
  H.gmax = spectrum.gamma_max();
  if (H.cut > spectrum.k_cut()) throw Error("grenier_terms: spectrum cutoff too small");
  H.a = kernel.cosine_coeffs(H.cut);
  H.gamma.resize(H.cut + 1);
  for (int m = 0; m <= H.cut; ++m) H.gamma[m] = spectrum.gamma(m);

  State v(K, std::vector<cplx>(H.cut + 1));
  if (K >= 2 && t > 0.0) {
    // keep h times the fastest exponential rate small
    const double h_max = std::min(max_dt, 0.01 / (K * H.gmax));
    const long n = static_cast<long>(std::ceil(t / h_max - 1e-12));
    const double h = t / static_cast<double>(n);
    State w = v;
    for (long i = 0; i < n; ++i) {
      const double s = i * h;
      const State k1 = H.derivative(v, s);
      axpy(w, v, 0.5 * h, k1);
      const State k2 = H.derivative(w, s + 0.5 * h);
      axpy(w, v, 0.5 * h, k2);
      const State k3 = H.derivative(w, s + 0.5 * h);
      axpy(w, v, h, k3);
      const State k4 = H.derivative(w, s + h);
      for (int j = 0; j < K; ++j) {
        for (int m = 0; m <= H.cut; ++m) {
          v[j][m] += h / 6.0 * (k1[j][m] + 2.0 * k2[j][m] + 2.0 * k3[j][m] + k4[j][m]);
        }
      }
    }
  }
  std::vector<FourierModes> out;
  out.reserve(K);
  for (int j = 1; j <= K; ++j) {
    auto g = H.modes(v, j, t);
    g.resize(j * H.k + 1);
    out.emplace_back(std::move(g));
  }
  return out;
}

DensityField grenier_approximant(double alpha, int K, const GegenbauerSpectrum& spectrum,
                                 const InteractionKernel& kernel, double t,
                                 const PeriodicGrid& grid) {
  if (K < 1 || K > 3) throw Error("grenier_approximant: K must be 1, 2 or 3");
  const double size = alpha * std::exp(spectrum.gamma_max() * t);
  if (!(size < 1.0)) {
    std::ostringstream os;
    os << "grenier_approximant: alpha e^{gamma_max t} = " << size << " is not below 1";
    throw AssumptionViolation(os.str());
  }
  const auto terms = grenier_terms(K, spectrum, kernel, t);
  std::vector<cplx> total(terms.back().k_cut() + 1);
  total[0] = 1.0;  // mass of the uniform density
  double scale = 1.0;
  for (const auto& g : terms) {
    scale *= alpha;
    for (int m = 0; m <= g.k_cut(); ++m) total[m] += scale * g[m];
  }
  DensityField f = field_of_fourier(FourierModes(std::move(total)), grid);
  f.time = t;
  return f;
}

}  // namespace attnflow
