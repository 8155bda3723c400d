#pragma once

#include <optional>
#include <span>
#include <vector>

#include "attnflow/fourier.hpp"
#include "attnflow/kernel.hpp"
#include "attnflow/pde.hpp"

namespace attnflow {

// Equal-weight atoms on the circle, kept sorted in [0, 2pi).
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<double> angles);
  std::size_t size() const { return atoms_.size(); }
  std::span<const double> atoms() const { return atoms_; }
  double weight() const { return 1.0 / static_cast<double>(atoms_.size()); }

 private:
  std::vector<double> atoms_;
};

// Modes of rho = mu - mu_inf: rho_k = (1/N) sum_j e^{-ik theta_j}, rho_0 = 0.
FourierModes empirical_fourier(const EmpiricalMeasure& mu, int k_cut);
// min(N / 2, 512).
int default_fourier_cutoff(std::size_t n);

struct SobolevNorm {
  double value = 0.0;
  // Bound on the omitted |k| > k_cut part, assuming |rho_k| <= 1.
  double tail_bound = 0.0;
};

// sqrt(sum_{|k| <= k_cut} |rho_k|^2 (1 + k^2)^{-s}).
SobolevNorm sobolev_neg_norm(const FourierModes& modes, int s);

// argmax_{k >= 1} |g_k|, or 0 for an empty spectrum.
int dominant_mode(const FourierModes& modes);

// Weighted atoms for general circular transport.
struct Atom {
  double angle;
  double weight;
};

// min_c int |F - G - c| d theta. Throws when total masses differ by > 1e-12.
double wasserstein1_circle(std::vector<Atom> mu, std::vector<Atom> nu);
double wasserstein1_circle(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
// Node masses on a common grid with spacing dx.
double wasserstein1_grid(std::span<const double> p, std::span<const double> q, double dx);
double wasserstein1_circle(const DensityField& mu, const DensityField& nu);
// The empirical measure is first assigned to the nearest grid node.
double wasserstein1_circle(const EmpiricalMeasure& mu, const DensityField& nu);
// Exact distance to the uniform measure.
double wasserstein1_to_uniform(const EmpiricalMeasure& mu);

// Nearest-node cell masses (sum 1) and the density they define.
std::vector<double> cell_masses(const EmpiricalMeasure& mu, const PeriodicGrid& grid);
DensityField density_of(const EmpiricalMeasure& mu, const PeriodicGrid& grid);

struct Histogram {
  std::vector<long> counts;
  long total = 0;
};

Histogram histogram(const EmpiricalMeasure& mu, int bins = 100);
// (1/2) sum_b |p_b - q_b| over bin mass fractions.
double tv_histogram(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, int bins = 100);
double tv_histogram_uniform(const EmpiricalMeasure& mu, int bins = 100);

// Splits the circular sequence at gaps wider than gap_factor * 2pi / N and
// counts groups holding at least min_mass. Empty when no gap is that wide.
std::optional<int> count_clusters(const EmpiricalMeasure& mu, double gap_factor = 10.0,
                                  double min_mass = 0.02);

// Approximate count for points on S^{d-1} (row-major N x d): single linkage
// at geodesic radius, groups below min_mass dropped. O(N^2).
int count_clusters_linkage(std::span<const double> coords, std::size_t dim, double radius = 0.1,
                           double min_mass = 0.02);

// W1 to k equal Diracs at 2pi j / k + phi, minimized over phi.
double w1_to_cluster(const EmpiricalMeasure& mu, int k);

struct ExitResult {
  std::optional<double> time;
  double final_distance = 0.0;
};

// First time the distance exceeds delta, interpolated linearly between the
// bracketing samples; a first sample already above delta gives its time.
ExitResult exit_time(std::span<const double> times, std::span<const double> distances,
                     double delta);

// Streaming form of exit_time.
class ExitDetector {
 public:
  explicit ExitDetector(double delta) : delta_(delta) {}
  // Returns true once the threshold has been crossed.
  bool feed(double time, double distance);
  const ExitResult& result() const { return result_; }

 private:
  double delta_;
  bool started_ = false;
  double last_time_ = 0.0, last_distance_ = 0.0;
  ExitResult result_;
};

struct PhaseTimes {
  double t1 = 0.0;
  double alpha = 0.0;
  double t2 = 0.0;
  // T1 <= 0: perturbation already beyond N^{-epsilon}.
  bool t1_nonpositive = false;
};

// T1 = ln(N^{-eps} / |rho_0|_{H^-1}) / gamma_max,
// alpha = N^{-eps} |rho_0,kmax| / |rho_0|_{H^-1}, T2 = ln(delta / alpha) / gamma_max.
PhaseTimes phase_times(const GegenbauerSpectrum& spectrum, std::size_t n, double norm_rho0,
                       double rho_kmax_abs, double delta, double epsilon = 0.25);

struct MeasureSummary {
  FourierModes fourier;
  double h_minus_1 = 0.0;
  double h_minus_2 = 0.0;
  double w1_to_uniform = 0.0;
  std::optional<int> cluster_count;
  int dominant_mode = 0;
};

MeasureSummary summarize(const EmpiricalMeasure& mu, int k_cut = -1, double gap_factor = 10.0,
                         double min_mass = 0.02);

}  // namespace attnflow
