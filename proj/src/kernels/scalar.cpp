/*!
 * \file kernels/scalar.cpp
 * \brief Reference kernels. Plain loops; the compiler may autovectorize them
 *        but never reassociates, so results are the sequential sums.
 */
#include "tlforge/kernels.hpp"

namespace tlforge::kernels {
namespace {

double Dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void Gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += Dot(w + r * cols, x, cols);
}

void GemvT(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) Axpy(x[r], w + r * cols, y, cols);
  }
}

void Ger(double* w, std::size_t rows, std::size_t cols, const double* a, const double* b) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (a[r] != 0.0) Axpy(a[r], b, w + r * cols, cols);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar, "scalar", Dot, Axpy, Gemv, GemvT, Ger};
  return table;
}

}  // namespace tlforge::kernels
