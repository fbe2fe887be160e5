#include <cmath>

#include "snntrain/kernels.hpp"

namespace snntrain::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void lif_forward(const LifConstants& c, double* v, const double* current, double* v_cand, double* spike,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double vc = v[i] + c.inv_tau * (-(v[i] - c.v_rest) + c.r_in * current[i]);
    const bool fired = vc >= c.v_th;
    v_cand[i] = vc;
    spike[i] = fired ? 1.0 : 0.0;
    v[i] = fired ? c.v_rest : vc;
  }
}

void lif_backward(const LifConstants& c, const double* grad_spike, double* grad_v, const double* v_cand,
                  const double* spike, double* grad_current, std::size_t n) {
  const double half = 0.5 * c.surrogate_width;
  const double height = 1.0 / c.surrogate_width;
  const double current_scale = c.r_in * c.inv_tau;
  const double leak = 1.0 - c.inv_tau;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = std::fabs(v_cand[i] - c.v_th) <= half ? height : 0.0;
    const double g = grad_spike[i] * h + grad_v[i] * (1.0 - spike[i]);
    grad_current[i] = g * current_scale;
    grad_v[i] = g * leak;
  }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{"scalar", dot, axpy, lif_forward, lif_backward};
  return table;
}

}  // namespace snntrain::kernels
