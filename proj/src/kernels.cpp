#include "sensing/kernels.hpp"

#include <cmath>

namespace sensing::kernels {

void cauchy_far(const double* x, const double* f, int begin, int end, double zr, double zi,
                double h, double out[4]) {
  const double h2 = h * h;
  const double m0 = h, m2 = h * h2 / 6.0, m4 = m2 * h2 * 0.4, m6 = h * h2 * h2 * h2 / 28.0;
  double gr = 0.0, gi = 0.0, dr = 0.0, di = 0.0;
  for (int k = begin; k < end; ++k) {
    const double ur = zr - x[k];
    const double den = 1.0 / (ur * ur + zi * zi);
    const double ir = ur * den, ii = -zi * den;
    const double sr = ir * ir - ii * ii, si = 2.0 * ir * ii;
    // value: inv * (m0 + s (m2 + s (m4 + s m6)))
    double pr = m4 + sr * m6, pi = si * m6;
    double tr = m2 + sr * pr - si * pi, ti = sr * pi + si * pr;
    pr = m0 + sr * tr - si * ti;
    pi = sr * ti + si * tr;
    const double wr = ir * pr - ii * pi, wi = ir * pi + ii * pr;
    // derivative: -s * (m0 + s (3 m2 + s (5 m4 + s 7 m6)))
    double qr = 5.0 * m4 + sr * 7.0 * m6, qi = si * 7.0 * m6;
    double vr = 3.0 * m2 + sr * qr - si * qi, vi = sr * qi + si * qr;
    qr = m0 + sr * vr - si * vi;
    qi = sr * vi + si * vr;
    const double er = -(sr * qr - si * qi), ei = -(sr * qi + si * qr);
    gr += f[k] * wr;
    gi += f[k] * wi;
    dr += f[k] * er;
    di += f[k] * ei;
  }
  out[0] = gr;
  out[1] = gi;
  out[2] = dr;
  out[3] = di;
}

double toeplitz_quadratic(const double* a, int n, const double* K) {
  double diag = 0.0, off = 0.0;
  for (int j = 0; j < n; ++j) {
    const double aj = a[j];
    if (aj == 0.0) continue;
    diag += aj * aj;
    const double* ak = a + j + 1;
    double s = 0.0;
    for (int m = 1; m < n - j; ++m) s += ak[m - 1] * K[m];
    off += aj * s;
  }
  return diag * K[0] + 2.0 * off;
}

void log_mixture(const double* c, const double* m, const double* p, int n, const double* y,
                 int ny, double* out, double* scratch) {
  for (int i = 0; i < ny; ++i) {
    const double yi = y[i];
    double mx = -1e300;
    for (int k = 0; k < n; ++k) {
      const double d = yi - m[k];
      const double e = c[k] - p[k] * d * d;
      scratch[k] = e;
      mx = e > mx ? e : mx;
    }
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::exp(scratch[k] - mx);
    out[i] = mx + std::log(s);
  }
}

}  // namespace sensing::kernels
