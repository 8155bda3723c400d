#pragma once

#include <vector>

#include "attnflow/fourier.hpp"
#include "attnflow/kernel.hpp"
#include "attnflow/pde.hpp"

namespace attnflow {

// Terms g_1..g_K of the expansion rho = sum_j alpha^j g_j around the uniform
// density, seeded by g_1 = e^{gamma_max t} cos(k_max theta). For j >= 2,
//   (d_t - L) g_j = -sum_{l<j} d_theta(g_l (h' * g_{j-l})),  g_j(0) = 0,
// integrated per mode with an integrating factor and RK4 in time. The step is
// at most max_dt and at most 0.01 / (K gamma_max).
// Entry j-1 holds the modes of g_j (cutoff j * k_max).
std::vector<FourierModes> grenier_terms(int K, const GegenbauerSpectrum& spectrum,
                                        const InteractionKernel& kernel, double t,
                                        double max_dt = 1e-3);

// f^{alpha,K} = 1/(2pi) + sum_{j<=K} alpha^j g_j sampled on grid.
// Requires K in {1, 2, 3} and alpha e^{gamma_max t} < 1.
DensityField grenier_approximant(double alpha, int K, const GegenbauerSpectrum& spectrum,
                                 const InteractionKernel& kernel, double t,
                                 const PeriodicGrid& grid);

}  // namespace attnflow
