#include <arm_neon.h>

#include <cmath>

#include "snntrain/kernels.hpp"

namespace snntrain::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void lif_forward(const LifConstants& c, double* v, const double* current, double* v_cand, double* spike,
                 std::size_t n) {
  const float64x2_t rest = vdupq_n_f64(c.v_rest);
  const float64x2_t th = vdupq_n_f64(c.v_th);
  const float64x2_t inv_tau = vdupq_n_f64(c.inv_tau);
  const float64x2_t r_in = vdupq_n_f64(c.r_in);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vp = vld1q_f64(v + i);
    const float64x2_t drive = vaddq_f64(vnegq_f64(vsubq_f64(vp, rest)), vmulq_f64(r_in, vld1q_f64(current + i)));
    const float64x2_t vc = vaddq_f64(vp, vmulq_f64(inv_tau, drive));
    const uint64x2_t fired = vcgeq_f64(vc, th);
    vst1q_f64(v_cand + i, vc);
    vst1q_f64(spike + i, vreinterpretq_f64_u64(vandq_u64(fired, vreinterpretq_u64_f64(one))));
    vst1q_f64(v + i, vbslq_f64(fired, rest, vc));
  }
  for (; i < n; ++i) {
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
  const float64x2_t v_half = vdupq_n_f64(half);
  const float64x2_t v_height = vdupq_n_f64(height);
  const float64x2_t v_th = vdupq_n_f64(c.v_th);
  const float64x2_t v_scale = vdupq_n_f64(current_scale);
  const float64x2_t v_leak = vdupq_n_f64(leak);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dist = vabsq_f64(vsubq_f64(vld1q_f64(v_cand + i), v_th));
    const float64x2_t h = vreinterpretq_f64_u64(vandq_u64(vcleq_f64(dist, v_half), vreinterpretq_u64_f64(v_height)));
    const float64x2_t keep = vsubq_f64(one, vld1q_f64(spike + i));
    const float64x2_t g =
        vaddq_f64(vmulq_f64(vld1q_f64(grad_spike + i), h), vmulq_f64(vld1q_f64(grad_v + i), keep));
    vst1q_f64(grad_current + i, vmulq_f64(g, v_scale));
    vst1q_f64(grad_v + i, vmulq_f64(g, v_leak));
  }
  for (; i < n; ++i) {
    const double h = std::fabs(v_cand[i] - c.v_th) <= half ? height : 0.0;
    const double g = grad_spike[i] * h + grad_v[i] * (1.0 - spike[i]);
    grad_current[i] = g * current_scale;
    grad_v[i] = g * leak;
  }
}

}  // namespace

const KernelTable& neon_table() noexcept {
  static const KernelTable table{"neon", dot, axpy, lif_forward, lif_backward};
  return table;
}

}  // namespace snntrain::kernels
