#pragma once

// Hot loops compiled with relaxed floating-point rules so that reductions and
// exp vectorize. Inputs must be finite.

namespace sensing::kernels {

// Sum over nodes k in [begin, end) of f[k] * W_k(z) and f[k] * W_k'(z), where W_k
// is the Cauchy transform of the hat function of width h at x[k], using its
// multipole series. Valid when |z - x[k]| >= 16 h. out = {Re g, Im g, Re g', Im g'}.
void cauchy_far(const double* x, const double* f, int begin, int end, double zr, double zi,
                double h, double out[4]);

// sum_{j,k} a[j] a[k] K[|j - k|]
double toeplitz_quadratic(const double* a, int n, const double* K);

// out[i] = log sum_k exp(c[k] - p[k] (y[i] - m[k])^2). scratch has room for n.
void log_mixture(const double* c, const double* m, const double* p, int n, const double* y,
                 int ny, double* out, double* scratch);

}  // namespace sensing::kernels
