#include "attnflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "attnflow/error.hpp"
#include "attnflow/geometry.hpp"

namespace attnflow {

namespace {

constexpr double kMassTolerance = 1e-9;

void check_mass(double a, double b) {
  if (std::abs(a - b) > kMassTolerance) {
    std::ostringstream os;
    os << "wasserstein1_circle: total masses differ (" << a << " vs " << b << ")";
    throw Error(os.str());
  }
}

// min_c sum_i len_i |d_i - c|, attained at the length-weighted median.
double weighted_l1_median(std::vector<std::pair<double, double>> values_lengths) {
  std::sort(values_lengths.begin(), values_lengths.end());
  double total = 0.0;
  for (const auto& [v, l] : values_lengths) total += l;
  double acc = 0.0, c = 0.0;
  for (const auto& [v, l] : values_lengths) {
    acc += l;
    if (acc >= 0.5 * total) {
      c = v;
      break;
    }
  }
  double out = 0.0;
  for (const auto& [v, l] : values_lengths) out += l * std::abs(v - c);
  return out;
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> angles) : atoms_(std::move(angles)) {
  if (atoms_.empty()) throw Error("EmpiricalMeasure requires at least one atom");
  for (double& a : atoms_) a = wrap_angle(a);
  std::sort(atoms_.begin(), atoms_.end());
}

FourierModes empirical_fourier(const EmpiricalMeasure& mu, int k_cut) {
  if (k_cut < 0) throw Error("empirical_fourier: negative cutoff");
  std::vector<std::complex<double>> modes(k_cut + 1);
  for (double a : mu.atoms()) {
    const std::complex<double> step = std::polar(1.0, -a);
    std::complex<double> z = step;
    for (int k = 1; k <= k_cut; ++k) {
      modes[k] += z;
      z *= step;
    }
  }
  const double w = mu.weight();
  for (auto& m : modes) m *= w;
  modes[0] = 0.0;
  return FourierModes(std::move(modes));
}

int default_fourier_cutoff(std::size_t n) {
  return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(n / 2, 512)));
}

SobolevNorm sobolev_neg_norm(const FourierModes& modes, int s) {
  if (s < 1) throw Error("sobolev_neg_norm: order must be at least 1");
  double sum = std::norm(modes[0]);
  for (int k = 1; k <= modes.k_cut(); ++k) {
    sum += 2.0 * std::norm(modes[k]) * std::pow(1.0 + double(k) * k, -s);
  }
  const double K = std::max(1, modes.k_cut());
  const double tail = std::pow(K, 1.0 - 2.0 * s) / (2.0 * s - 1.0);
  return {std::sqrt(sum), std::sqrt(2.0 * tail)};
}

int dominant_mode(const FourierModes& modes) {
  int best = 0;
  double amp = -1.0;
  for (int k = 1; k <= modes.k_cut(); ++k) {
    if (std::abs(modes[k]) > amp) {
      amp = std::abs(modes[k]);
      best = k;
    }
  }
  return best;
}

double wasserstein1_circle(std::vector<Atom> mu, std::vector<Atom> nu) {
  double mass_mu = 0.0, mass_nu = 0.0;
  std::vector<Atom> events;
  events.reserve(mu.size() + nu.size());
  for (const Atom& a : mu) {
    mass_mu += a.weight;
    events.push_back({wrap_angle(a.angle), a.weight});
  }
  for (const Atom& a : nu) {
    mass_nu += a.weight;
    events.push_back({wrap_angle(a.angle), -a.weight});
  }
  check_mass(mass_mu, mass_nu);
  if (events.empty()) return 0.0;
  std::sort(events.begin(), events.end(),
            [](const Atom& x, const Atom& y) { return x.angle < y.angle; });
  std::vector<std::pair<double, double>> pieces;
  pieces.reserve(events.size());
  double d = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    d += events[i].weight;
    const double end = i + 1 < events.size() ? events[i + 1].angle : kTwoPi + events[0].angle;
    // the wrap interval carries F - G = 0 up to the mass tolerance
    pieces.emplace_back(i + 1 < events.size() ? d : 0.0, end - events[i].angle);
  }
  return weighted_l1_median(std::move(pieces));
}

double wasserstein1_circle(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  std::vector<Atom> a, b;
  a.reserve(mu.size());
  b.reserve(nu.size());
  for (double x : mu.atoms()) a.push_back({x, mu.weight()});
  for (double x : nu.atoms()) b.push_back({x, nu.weight()});
  return wasserstein1_circle(std::move(a), std::move(b));
}

double wasserstein1_grid(std::span<const double> p, std::span<const double> q, double dx) {
  if (p.size() != q.size()) throw DimensionMismatch("wasserstein1_grid: grid sizes differ");
  check_mass(std::accumulate(p.begin(), p.end(), 0.0), std::accumulate(q.begin(), q.end(), 0.0));
  std::vector<std::pair<double, double>> pieces(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d += p[i] - q[i];
    pieces[i] = {d, dx};
  }
  return weighted_l1_median(std::move(pieces));
}

double wasserstein1_circle(const DensityField& mu, const DensityField& nu) {
  if (mu.grid.cells() != nu.grid.cells()) {
    throw DimensionMismatch("wasserstein1_circle: grids differ");
  }
  const double dx = mu.grid.dx();
  std::vector<double> p(mu.values), q(nu.values);
  for (double& v : p) v *= dx;
  for (double& v : q) v *= dx;
  return wasserstein1_grid(p, q, dx);
}

double wasserstein1_circle(const EmpiricalMeasure& mu, const DensityField& nu) {
  const auto p = cell_masses(mu, nu.grid);
  std::vector<double> q(nu.values);
  for (double& v : q) v *= nu.grid.dx();
  return wasserstein1_grid(p, q, nu.grid.dx());
}

double wasserstein1_to_uniform(const EmpiricalMeasure& mu) {
  // On [a_i, a_{i+1}) the CDF difference is i/N - theta/(2pi), linear in theta.
  const auto atoms = mu.atoms();
  const double n = static_cast<double>(atoms.size());
  struct Segment {
    double hi, lo, len;  // D at the left end, D at the right end, length
  };
  std::vector<Segment> segs;
  segs.reserve(atoms.size() + 1);
  double left = 0.0;
  for (std::size_t i = 0; i <= atoms.size(); ++i) {
    const double right = i < atoms.size() ? atoms[i] : kTwoPi;
    const double base = static_cast<double>(i) / n;
    segs.push_back({base - left / kTwoPi, base - right / kTwoPi, right - left});
    left = right;
  }
  double cmin = segs.front().hi, cmax = segs.front().hi;
  for (const auto& s : segs) {
    cmin = std::min(cmin, s.lo);
    cmax = std::max(cmax, s.hi);
  }
  auto above = [&](double c) {
    double m = 0.0;
    for (const auto& s : segs) m += std::clamp((s.hi - c) * kTwoPi, 0.0, s.len);
    return m;
  };
  for (int it = 0; it < 200 && cmax - cmin > 1e-15; ++it) {
    const double mid = 0.5 * (cmin + cmax);
    (above(mid) > kPi ? cmin : cmax) = mid;
  }
  const double c = 0.5 * (cmin + cmax);
  double out = 0.0;
  for (const auto& s : segs) {
    if (c >= s.hi) {
      out += s.len * (c - 0.5 * (s.hi + s.lo));
    } else if (c <= s.lo) {
      out += s.len * (0.5 * (s.hi + s.lo) - c);
    } else {
      out += kPi * ((s.hi - c) * (s.hi - c) + (c - s.lo) * (c - s.lo));
    }
  }
  return out;
}

std::vector<double> cell_masses(const EmpiricalMeasure& mu, const PeriodicGrid& grid) {
  const int m = grid.cells();
  std::vector<double> p(m, 0.0);
  for (double a : mu.atoms()) {
    long long idx = std::llround(a / grid.dx()) % m;
    p[idx] += mu.weight();
  }
  return p;
}

DensityField density_of(const EmpiricalMeasure& mu, const PeriodicGrid& grid) {
  DensityField f{grid, cell_masses(mu, grid), 0.0};
  for (double& v : f.values) v /= grid.dx();
  return f;
}

Histogram histogram(const EmpiricalMeasure& mu, int bins) {
  if (bins < 2) throw Error("histogram: at least two bins required");
  Histogram h;
  h.counts.assign(bins, 0);
  for (double a : mu.atoms()) {
    int b = static_cast<int>(a / kTwoPi * bins);
    h.counts[std::clamp(b, 0, bins - 1)] += 1;
  }
  h.total = static_cast<long>(mu.size());
  return h;
}

double tv_histogram(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, int bins) {
  const Histogram a = histogram(mu, bins), b = histogram(nu, bins);
  double s = 0.0;
  for (int i = 0; i < bins; ++i) {
    s += std::abs(double(a.counts[i]) / a.total - double(b.counts[i]) / b.total);
  }
  return 0.5 * s;
}

double tv_histogram_uniform(const EmpiricalMeasure& mu, int bins) {
  const Histogram a = histogram(mu, bins);
  double s = 0.0;
  for (int i = 0; i < bins; ++i) s += std::abs(double(a.counts[i]) / a.total - 1.0 / bins);
  return 0.5 * s;
}

std::optional<int> count_clusters(const EmpiricalMeasure& mu, double gap_factor,
                                  double min_mass) {
  const auto atoms = mu.atoms();
  const std::size_t n = atoms.size();
  if (n < 2) throw Error("count_clusters: at least two atoms required");
  const double threshold = gap_factor * kTwoPi / static_cast<double>(n);
  // gap i follows atom i
  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = i + 1 < n ? atoms[i + 1] - atoms[i] : atoms[0] + kTwoPi - atoms[n - 1];
    if (gap > threshold) cuts.push_back(i);
  }
  if (cuts.empty()) return std::nullopt;
  int clusters = 0;
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const std::size_t next = cuts[(c + 1) % cuts.size()];
    const std::size_t size = next > cuts[c] ? next - cuts[c] : next + n - cuts[c];
    if (static_cast<double>(size) / static_cast<double>(n) >= min_mass) ++clusters;
  }
  return clusters;
}

int count_clusters_linkage(std::span<const double> coords, std::size_t dim, double radius,
                           double min_mass) {
  if (dim == 0 || coords.size() % dim != 0) throw DimensionMismatch("count_clusters_linkage: bad shape");
  const std::size_t n = coords.size() / dim;
  if (n < 2) throw Error("count_clusters_linkage: at least two points required");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const double min_dot = std::cos(radius);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (std::size_t c = 0; c < dim; ++c) d += coords[i * dim + c] * coords[j * dim + c];
      if (d >= min_dot) parent[find(i)] = find(j);
    }
  }
  std::vector<std::size_t> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++size[find(i)];
  int clusters = 0;
  for (std::size_t s : size) {
    if (s > 0 && static_cast<double>(s) / static_cast<double>(n) >= min_mass) ++clusters;
  }
  return clusters;
}

double w1_to_cluster(const EmpiricalMeasure& mu, int k) {
  if (k < 1) throw Error("w1_to_cluster: k must be positive");
  std::vector<Atom> base;
  base.reserve(mu.size());
  for (double a : mu.atoms()) base.push_back({a, mu.weight()});
  auto dist = [&](double phi) {
    std::vector<Atom> target(k);
    for (int j = 0; j < k; ++j) target[j] = {phi + kTwoPi * j / k, 1.0 / k};
    return wasserstein1_circle(base, std::move(target));
  };
  const int candidates = 360;
  const double period = kTwoPi / k;
  const double step = period / candidates;
  double best_phi = 0.0, best = dist(0.0);
  for (int i = 1; i < candidates; ++i) {
    const double d = dist(i * step);
    if (d < best) {
      best = d;
      best_phi = i * step;
    }
  }
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best_phi - step, b = best_phi + step;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = dist(x1), f2 = dist(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = dist(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = dist(x2);
    }
  }
  return std::min({best, f1, f2});
}

ExitResult exit_time(std::span<const double> times, std::span<const double> distances,
                     double delta) {
  if (times.size() != distances.size()) {
    throw DimensionMismatch("exit_time: times and distances differ in length");
  }
  ExitDetector det(delta);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (det.feed(times[i], distances[i])) break;
  }
  return det.result();
}

bool ExitDetector::feed(double time, double distance) {
  if (result_.time) return true;
  result_.final_distance = distance;
  if (distance > delta_) {
    if (!started_) {
      result_.time = time;
    } else {
      const double frac = (delta_ - last_distance_) / (distance - last_distance_);
      result_.time = last_time_ + frac * (time - last_time_);
    }
    return true;
  }
  started_ = true;
  last_time_ = time;
  last_distance_ = distance;
  return false;
}

PhaseTimes phase_times(const GegenbauerSpectrum& spectrum, std::size_t n, double norm_rho0,
                       double rho_kmax_abs, double delta, double epsilon) {
  if (!(norm_rho0 > 0.0)) throw Error("phase_times: norm of rho_0 must be positive");
  const double g = spectrum.gamma_max();
  const double scale = std::pow(static_cast<double>(n), -epsilon);
  PhaseTimes out;
  out.t1 = std::log(scale / norm_rho0) / g;
  out.alpha = scale * rho_kmax_abs / norm_rho0;
  out.t2 = std::log(delta / out.alpha) / g;
  out.t1_nonpositive = out.t1 <= 0.0;
  return out;
}

MeasureSummary summarize(const EmpiricalMeasure& mu, int k_cut, double gap_factor,
                         double min_mass) {
  if (k_cut < 0) k_cut = default_fourier_cutoff(mu.size());
  MeasureSummary s;
  s.fourier = empirical_fourier(mu, k_cut);
  s.h_minus_1 = sobolev_neg_norm(s.fourier, 1).value;
  s.h_minus_2 = sobolev_neg_norm(s.fourier, 2).value;
  s.w1_to_uniform = wasserstein1_to_uniform(mu);
  if (mu.size() >= 2) s.cluster_count = count_clusters(mu, gap_factor, min_mass);
  s.dominant_mode = dominant_mode(s.fourier);
  return s;
}

}  // namespace attnflow
