#pragma once

// Inner loops of the spiking network, in a scalar reference form and in
// vector forms selected at runtime.
//
// Elementwise kernels (axpy, LIF forward/backward) perform the same IEEE
// operations in the same order in every variant and so agree bit for bit.
// `dot` reassociates the sum in the vector variants and agrees only to
// rounding.

#include <cstddef>
#include <string_view>

namespace snntrain::kernels {

struct LifConstants {
  double v_rest;
  double v_th;
  double inv_tau;
  double r_in;
  double surrogate_width;  // rectangular window, total width around v_th
};

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// v_cand = v + inv_tau * (-(v - v_rest) + r_in * current)
  /// spike  = v_cand >= v_th ? 1 : 0
  /// v_next = spike ? v_rest : v_cand
  /// `v` is read as the previous potential and overwritten with v_next.
  void (*lif_forward)(const LifConstants& c, double* v, const double* current, double* v_cand, double* spike,
                      std::size_t n);

  /// Reverse of lif_forward with the reset path gradient-stopped:
  ///   g          = grad_spike * h(v_cand) + grad_v * (1 - spike)
  ///   grad_current = g * r_in * inv_tau
  ///   grad_v       = g * (1 - inv_tau)        (overwritten in place)
  /// where h is the rectangular surrogate of width `surrogate_width`.
  void (*lif_backward)(const LifConstants& c, const double* grad_spike, double* grad_v, const double* v_cand,
                       const double* spike, double* grad_current, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// Null when not compiled in or not supported by this CPU.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

enum class KernelChoice { Auto, Scalar, Avx2, Neon };

/// Picks the widest supported variant for Auto. Throws ArgumentError when an
/// explicit choice is unavailable.
const KernelTable& resolve(KernelChoice choice);
KernelChoice parse_choice(std::string_view name);

/// Process-wide default, initialized from SNNTRAIN_KERNELS (auto when unset).
const KernelTable& active() noexcept;
void set_active(KernelChoice choice);

}  // namespace snntrain::kernels
