/*!
 * \file tlforge/kernels.hpp
 * \brief Dense double-precision kernels used by the seq2seq model.
 *
 * Every kernel has a scalar reference implementation. An AVX2/FMA variant is
 * compiled on x86-64 and selected at runtime when the CPU supports it. Set
 * TLFORGE_KERNELS=scalar in the environment to force the reference path.
 *
 * Matrices are row-major, `rows x cols`.
 */
#pragma once

#include <cstddef>
#include <span>

namespace tlforge::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += W x
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y += W^T x   (x has `rows` entries, y has `cols`)
  void (*gemv_t)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
  // W += a b^T
  void (*ger)(double* w, std::size_t rows, std::size_t cols, const double* a, const double* b);
};

const KernelTable& scalar_table();
/*! \brief AVX2 table, or nullptr when not compiled in or unsupported by this CPU. */
const KernelTable* avx2_table();
/*! \brief Table chosen once per process. */
const KernelTable& active();

// Span-based wrappers over the active table.

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
  active().gemv(w.data(), rows, cols, x.data(), y.data());
}
inline void gemv_t(std::span<const double> w, std::size_t rows, std::size_t cols,
                   std::span<const double> x, std::span<double> y) {
  active().gemv_t(w.data(), rows, cols, x.data(), y.data());
}
inline void ger(std::span<double> w, std::size_t rows, std::size_t cols,
                std::span<const double> a, std::span<const double> b) {
  active().ger(w.data(), rows, cols, a.data(), b.data());
}

}  // namespace tlforge::kernels
