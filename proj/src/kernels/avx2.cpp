#include <immintrin.h>

#include <cmath>

#include "snntrain/kernels.hpp"

namespace snntrain::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    i += 4;
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  const __m128d pair = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
  double s = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void lif_forward(const LifConstants& c, double* v, const double* current, double* v_cand, double* spike,
                 std::size_t n) {
  const __m256d rest = _mm256_set1_pd(c.v_rest);
  const __m256d th = _mm256_set1_pd(c.v_th);
  const __m256d inv_tau = _mm256_set1_pd(c.inv_tau);
  const __m256d r_in = _mm256_set1_pd(c.r_in);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vp = _mm256_loadu_pd(v + i);
    const __m256d neg_leak = _mm256_xor_pd(_mm256_sub_pd(vp, rest), sign);
    const __m256d drive = _mm256_add_pd(neg_leak, _mm256_mul_pd(r_in, _mm256_loadu_pd(current + i)));
    const __m256d vc = _mm256_add_pd(vp, _mm256_mul_pd(inv_tau, drive));
    const __m256d fired = _mm256_cmp_pd(vc, th, _CMP_GE_OQ);
    _mm256_storeu_pd(v_cand + i, vc);
    _mm256_storeu_pd(spike + i, _mm256_and_pd(fired, one));
    _mm256_storeu_pd(v + i, _mm256_blendv_pd(vc, rest, fired));
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
  const __m256d v_half = _mm256_set1_pd(half);
  const __m256d v_height = _mm256_set1_pd(height);
  const __m256d v_th = _mm256_set1_pd(c.v_th);
  const __m256d v_scale = _mm256_set1_pd(current_scale);
  const __m256d v_leak = _mm256_set1_pd(leak);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dist = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(v_cand + i), v_th), abs_mask);
    const __m256d h = _mm256_and_pd(_mm256_cmp_pd(dist, v_half, _CMP_LE_OQ), v_height);
    const __m256d keep = _mm256_sub_pd(one, _mm256_loadu_pd(spike + i));
    const __m256d g = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(grad_spike + i), h),
                                    _mm256_mul_pd(_mm256_loadu_pd(grad_v + i), keep));
    _mm256_storeu_pd(grad_current + i, _mm256_mul_pd(g, v_scale));
    _mm256_storeu_pd(grad_v + i, _mm256_mul_pd(g, v_leak));
  }
  for (; i < n; ++i) {
    const double h = std::fabs(v_cand[i] - c.v_th) <= half ? height : 0.0;
    const double g = grad_spike[i] * h + grad_v[i] * (1.0 - spike[i]);
    grad_current[i] = g * current_scale;
    grad_v[i] = g * leak;
  }
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{"avx2", dot, axpy, lif_forward, lif_backward};
  return table;
}

}  // namespace snntrain::kernels
